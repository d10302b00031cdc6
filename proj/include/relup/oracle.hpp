#pragma once

#include <complex>
#include <vector>

#include "relup/geometry.hpp"
#include "relup/quadrature.hpp"
#include "relup/weight_laws.hpp"

namespace relup {

/// A = Gamma(-3/2) / (2^{d+3} pi^{d/2} Gamma((d+3)/2)), with Gamma(-3/2) = 4 sqrt(pi) / 3.
double coeff_A(int d);

/// 2 (2 pi)^{d-1}: R*R = radon_normalization(d) (-Delta)^{-(d-1)/2} for the
/// unnormalized Radon transform and its dual.
double radon_normalization(int d);

/// Constant multiplying lambda E[V^2] (||x-y||^3 - ||x||^3 - ||y||^3 + 3 x.y (||x|| + ||y||))
/// in the autocovariance of the sampled process: coeff_A(d) * radon_normalization(d),
/// which simplifies to pi^{(d-1)/2} / (6 Gamma((d+3)/2)).
double covariance_constant(int d);

/// lambda E[V] times the cylinder integral of k_x.
double mean_pointwise(const Vector& x, double lambda, const WeightLaw& law, const CylinderQuadrature& quad);

/// Closed form of mean_pointwise: lambda E[V] ||x||^2 |S^{d-1}| / (2d).
double mean_closed(const Vector& x, double lambda, const WeightLaw& law);

/// Closed-form autocovariance. Throws InfiniteMoment for a non-finite second
/// moment.
double autocov_closed(const Vector& x, const Vector& y, double lambda, double second_moment);

/// lambda E[V^2] times the cylinder integral of k_x k_y.
double autocov_quadrature(const Vector& x, const Vector& y, double lambda, double second_moment,
                          const CylinderQuadrature& quad);

/// n-th cumulant of s(x): lambda E[V^n] times the cylinder integral of k_x^n.
double cumulant_pointwise(int n, const Vector& x, double lambda, const WeightLaw& law, const CylinderQuadrature& quad);

/// Joint characteristic function of (s(x_1), ..., s(x_m)) at xi:
/// exp( cylinder integral of Psi(sum_j xi_j k_{x_j}) ), Psi = levy_exponent.
std::complex<double> cf_predict(const std::vector<Vector>& points, const std::vector<double>& xi, double lambda,
                                const WeightLaw& law, const CylinderQuadrature& quad);

/// Scale of the symmetric alpha-stable wide limit of s(x):
/// b (cylinder integral of |k_x|^alpha)^{1/alpha}.
double stable_marginal_scale(const Vector& x, double alpha, double b, const CylinderQuadrature& quad);

/// Characteristic function of a symmetric alpha-stable variable.
inline double stable_cf(double scale, double alpha, double xi) {
    return std::exp(-std::pow(std::abs(scale * xi), alpha));
}

}  // namespace relup
