#include "relup/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "relup/errors.hpp"

namespace relup {

namespace {

void check_dim(int d) {
    if (d < 1) throw InvalidDimension("dimension must be >= 1, got " + std::to_string(d));
}

void check_match(const Domain& domain, Eigen::Index n) {
    if (n != domain.dim()) {
        throw DimensionMismatch("vector of size " + std::to_string(n) + " against a domain of dimension " +
                                std::to_string(domain.dim()));
    }
}

}  // namespace

Direction::Direction(const Vector& v) {
    const double n = v.norm();
    if (v.size() < 1) throw InvalidDimension("direction must have at least one coordinate");
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite vector");
    coords_ = v / n;
}

Direction Direction::from_unit(const Vector& v) {
    if (v.size() < 1) throw InvalidDimension("direction must have at least one coordinate");
    if (!(std::abs(v.norm() - 1.0) <= 1e-12)) throw InvalidArgument("direction is not unit norm");
    return Direction(Unchecked{}, v);
}

Domain Domain::ball(int dim, double radius) {
    check_dim(dim);
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be positive");
    return Domain(dim, Ball{radius});
}

Domain Domain::box(int dim, double half_width) {
    check_dim(dim);
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw InvalidArgument("box half width must be positive");
    return Domain(dim, Box{half_width});
}

double Domain::scale() const noexcept {
    if (const auto* b = std::get_if<Ball>(&shape_)) return b->radius;
    return std::get<Box>(shape_).half_width;
}

bool Domain::contains(const Vector& x, double tol) const {
    check_match(*this, x.size());
    if (const auto* b = std::get_if<Ball>(&shape_)) return x.norm() <= b->radius * (1.0 + tol);
    return x.cwiseAbs().maxCoeff() <= std::get<Box>(shape_).half_width * (1.0 + tol);
}

bool Domain::operator==(const Domain& other) const {
    return dim_ == other.dim_ && is_ball() == other.is_ball() && scale() == other.scale();
}

double sphere_area(int d) {
    check_dim(d);
    if (d == 1) return 2.0;
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

void sample_unit_sphere_into(Eigen::Ref<Vector> out, Rng& rng, bool anisotropic) {
    if (out.size() == 2 && !anisotropic) {
        const double theta = 2.0 * std::numbers::pi * uniform01(rng);
        out << std::cos(theta), std::sin(theta);
        return;
    }
    std::normal_distribution<double> normal;
    for (;;) {
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
        if (anisotropic) out.tail(out.size() - 1) *= 0.25;
        const double n2 = out.squaredNorm();
        // Only an all-zero draw is rejected.
        if (n2 > 0.0) {
            out /= std::sqrt(n2);
            return;
        }
    }
}

Direction sample_unit_sphere(int d, Rng& rng) {
    check_dim(d);
    Vector v(d);
    sample_unit_sphere_into(v, rng);
    return Direction::from_unit(v);
}

double support_halfwidth(const Domain& domain, const Eigen::Ref<const Vector>& u) {
    check_match(domain, u.size());
    if (const auto* b = std::get_if<Ball>(&domain.shape())) return b->radius * u.norm();
    return std::get<Box>(domain.shape()).half_width * u.lpNorm<1>();
}

double support_halfwidth(const Domain& domain, const Direction& u) {
    return support_halfwidth(domain, u.coords());
}

double max_support_halfwidth(const Domain& domain) {
    if (domain.is_ball()) return domain.scale();
    return domain.scale() * std::sqrt(static_cast<double>(domain.dim()));
}

double measure_Z(const Domain& domain) {
    const int d = domain.dim();
    if (domain.is_ball()) return 2.0 * domain.scale() * sphere_area(d);
    // The integral of ||u||_1 over the sphere is d times the integral of |u_1|,
    // which equals twice the volume of the unit (d-1)-ball.
    const double abs_first = 2.0 * std::pow(std::numbers::pi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d + 1));
    return 2.0 * domain.scale() * d * abs_first;
}

double sample_threshold_into(const Domain& domain, Rng& rng, Eigen::Ref<Vector> u, bool anisotropic) {
    check_match(domain, u.size());
    if (domain.is_ball()) {
        sample_unit_sphere_into(u, rng, anisotropic);
        const double r = domain.scale();
        return r * (2.0 * uniform01(rng) - 1.0);
    }
    const double h_max = max_support_halfwidth(domain);
    for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
        sample_unit_sphere_into(u, rng, anisotropic);
        const double h = support_halfwidth(domain, u);
        if (uniform01(rng) * h_max < h) return h * (2.0 * uniform01(rng) - 1.0);
    }
    throw SamplerFailure("threshold sampler exceeded the rejection limit");
}

CylinderPoint sample_threshold_uniform(const Domain& domain, Rng& rng) {
    Vector u(domain.dim());
    const double t = sample_threshold_into(domain, rng, u);
    return CylinderPoint{Direction::from_unit(u), t};
}

bool ThresholdSet::contains(const CylinderPoint& p) const {
    return std::abs(p.t) <= support_halfwidth(domain_, p.u);
}

}  // namespace relup
