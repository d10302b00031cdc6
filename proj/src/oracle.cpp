#include "relup/oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "relup/errors.hpp"

namespace relup {

namespace {

void check_dim(int d) {
    if (d < 1) throw InvalidDimension("dimension must be >= 1, got " + std::to_string(d));
}

void check_quad(const CylinderQuadrature& quad, Eigen::Index n) {
    if (quad.dim != n) throw DimensionMismatch("quadrature dimension does not match the point");
}

void check_second_moment(double second_moment) {
    if (!std::isfinite(second_moment)) throw InfiniteMoment("autocovariance needs a finite second moment");
    if (!(second_moment > 0.0)) throw InvalidArgument("second moment must be positive");
}

void check_rate(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("rate must be positive");
}

}  // namespace

double coeff_A(int d) {
    check_dim(d);
    const double gamma_m32 = 4.0 * std::sqrt(std::numbers::pi) / 3.0;
    return gamma_m32 / (std::pow(2.0, d + 3) * std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(0.5 * (d + 3)));
}

double radon_normalization(int d) {
    check_dim(d);
    return 2.0 * std::pow(2.0 * std::numbers::pi, d - 1);
}

double covariance_constant(int d) { return coeff_A(d) * radon_normalization(d); }

double mean_pointwise(const Vector& x, double lambda, const WeightLaw& law, const CylinderQuadrature& quad) {
    check_rate(lambda);
    check_quad(quad, x.size());
    const double mean_v = moments(law).mean;
    if (mean_v == 0.0) return 0.0;
    const double integral = integrate_kernels(align_to(quad, x), x, [](const Vector& k) { return k[0]; });
    return lambda * mean_v * integral;
}

double mean_closed(const Vector& x, double lambda, const WeightLaw& law) {
    check_rate(lambda);
    const int d = static_cast<int>(x.size());
    return lambda * moments(law).mean * x.squaredNorm() * sphere_area(d) / (2.0 * d);
}

double autocov_closed(const Vector& x, const Vector& y, double lambda, double second_moment) {
    check_rate(lambda);
    check_second_moment(second_moment);
    if (x.size() != y.size()) throw DimensionMismatch("autocovariance points differ in dimension");
    const double nx = x.norm();
    const double ny = y.norm();
    const double nxy = (x - y).norm();
    const double shape = nxy * nxy * nxy - (nx * nx * nx + ny * ny * ny) + 3.0 * x.dot(y) * (nx + ny);
    return covariance_constant(static_cast<int>(x.size())) * lambda * second_moment * shape;
}

double autocov_quadrature(const Vector& x, const Vector& y, double lambda, double second_moment,
                          const CylinderQuadrature& quad) {
    check_rate(lambda);
    check_second_moment(second_moment);
    if (x.size() != y.size()) throw DimensionMismatch("autocovariance points differ in dimension");
    check_quad(quad, x.size());
    Matrix pts(x.size(), 2);
    pts << x, y;
    const double integral = integrate_kernels(align_to(quad, pts), pts, [](const Vector& k) { return k[0] * k[1]; });
    return lambda * second_moment * integral;
}

double cumulant_pointwise(int n, const Vector& x, double lambda, const WeightLaw& law, const CylinderQuadrature& quad) {
    if (n < 1 || n > 4) throw InvalidArgument("cumulant order must lie in 1..4");
    check_rate(lambda);
    check_quad(quad, x.size());
    const double moment = raw_moment(law, n);
    const double integral = integrate_kernels(align_to(quad, x), x, [n](const Vector& k) { return std::pow(k[0], n); });
    return lambda * moment * integral;
}

std::complex<double> cf_predict(const std::vector<Vector>& points, const std::vector<double>& xi, double lambda,
                                const WeightLaw& law, const CylinderQuadrature& quad) {
    if (points.empty() || points.size() != xi.size()) {
        throw InvalidArgument("cf_predict needs as many frequencies as points, at least one");
    }
    check_rate(lambda);
    const auto d = points.front().size();
    check_quad(quad, d);
    Matrix pts(d, static_cast<Eigen::Index>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (points[j].size() != d) throw DimensionMismatch("cf_predict points differ in dimension");
        pts.col(static_cast<Eigen::Index>(j)) = points[j];
    }
    const Vector w = Eigen::Map<const Vector>(xi.data(), static_cast<Eigen::Index>(xi.size()));
    const std::complex<double> exponent = integrate_kernels(
        align_to(quad, pts), pts, [&](const Vector& k) { return levy_exponent(law, lambda, w.dot(k)); }, w);
    return std::exp(exponent);
}

double stable_marginal_scale(const Vector& x, double alpha, double b, const CylinderQuadrature& quad) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw InvalidArgument("stable index must lie in (1, 2]");
    if (!(b > 0.0)) throw InvalidArgument("stable scale must be positive");
    check_quad(quad, x.size());
    const double integral = integrate_kernels(align_to(quad, x), x, [alpha](const Vector& k) { return std::pow(std::abs(k[0]), alpha); });
    return b * std::pow(integral, 1.0 / alpha);
}

}  // namespace relup
