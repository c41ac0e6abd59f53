#pragma once

// Meridian profile of the finite-volume surface of revolution: F(t) = e^{-sqrt|t|}
// for |t| > 1, extended to |t| <= 1 by the even quartic that matches value,
// first and second derivative at |t| = 1.

namespace cheegerlab::revolution {

double profile(double t);
double profile_d1(double t);
double profile_d2(double t);

/// Arclength element sqrt(1 + F'(t)^2).
double arclength_element(double t);

/// Gaussian curvature -F'' / (F sqrt(1 + F'^2)).
double gaussian_curvature(double t);

/// Same formula with F'' replaced by a central second difference of step `step`.
double discrete_gaussian_curvature(double t, double step);

/// Area element with respect to t: 2 pi F sqrt(1 + F'^2).
double area_density(double t);

/// Arclength from 0 to t (signed).
double arclength(double t);

/// Inverse of arclength on t >= 0.
double arclength_inverse(double r);

/// Area of {|t| > x}, x >= 0, by adaptive quadrature.
double tail_area(double x);

struct VolumeCertificate {
    double volume;
    double alternate;      ///< same integral by an independent substitution
    double relative_gap;   ///< |volume - alternate| / volume
    bool converged;        ///< relative_gap <= 1e-7
};

/// Total area 2 pi int F sqrt(1 + F'^2) dt over the whole line.
VolumeCertificate total_area();

/// Area of {|t| <= T}.
double truncated_area(double T);

}  // namespace cheegerlab::revolution
