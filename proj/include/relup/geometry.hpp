#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <variant>

#include "relup/rng.hpp"

namespace relup {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the unit sphere S^{d-1}.
class Direction {
public:
    /// Normalizes `v`. Throws InvalidArgument for a zero or non-finite vector.
    explicit Direction(const Vector& v);

    /// Wraps a vector that is already unit norm (to 1e-12) without touching
    /// its bits. Used when reading stored realizations.
    static Direction from_unit(const Vector& v);

    const Vector& coords() const noexcept { return coords_; }
    Eigen::Index dim() const noexcept { return coords_.size(); }

private:
    struct Unchecked {};
    Direction(Unchecked, Vector v) : coords_(std::move(v)) {}
    Vector coords_;
};

/// Activation threshold (u, t): the hyperplane {x : u.x = t}.
struct CylinderPoint {
    Direction u;
    double t;
};

struct Ball {
    double radius;
};

struct Box {
    double half_width;
};

/// Origin-symmetric compact observation domain.
class Domain {
public:
    static Domain ball(int dim, double radius = 1.0);
    static Domain box(int dim, double half_width = 1.0);

    int dim() const noexcept { return dim_; }
    const std::variant<Ball, Box>& shape() const noexcept { return shape_; }
    bool is_ball() const noexcept { return std::holds_alternative<Ball>(shape_); }

    /// Scale parameter: radius or half width.
    double scale() const noexcept;

    bool contains(const Vector& x, double tol = 1e-12) const;

    bool operator==(const Domain& other) const;

private:
    Domain(int dim, std::variant<Ball, Box> shape) : dim_(dim), shape_(shape) {}
    int dim_;
    std::variant<Ball, Box> shape_;
};

/// Surface measure |S^{d-1}|; counting measure (2) for d = 1.
double sphere_area(int d);

/// Uniform direction: a uniform angle for d = 2, normalized i.i.d. standard
/// normals otherwise.
Direction sample_unit_sphere(int d, Rng& rng);

/// Writes a uniform direction into `out` (size d). With `anisotropic` set the
/// coordinates after the first are shrunk by a factor 4 before normalizing;
/// this exists only for negative-control runs.
void sample_unit_sphere_into(Eigen::Ref<Vector> out, Rng& rng, bool anisotropic = false);

/// h(u) = max over the domain of u.x.
double support_halfwidth(const Domain& domain, const Direction& u);
double support_halfwidth(const Domain& domain, const Eigen::Ref<const Vector>& u);

/// |Z_Omega| = integral over the sphere of 2 h(u).
double measure_Z(const Domain& domain);

/// Largest value of h(u) over the sphere.
double max_support_halfwidth(const Domain& domain);

/// Upper bound on consecutive rejections in the box threshold sampler.
inline constexpr std::size_t kMaxRejections = 1'000'000;

/// Uniform sample of Z_Omega with respect to du x dt.
CylinderPoint sample_threshold_uniform(const Domain& domain, Rng& rng);

/// Same draw as sample_threshold_uniform, written into caller storage.
/// Returns t.
double sample_threshold_into(const Domain& domain, Rng& rng, Eigen::Ref<Vector> u,
                             bool anisotropic = false);

/// Z_Omega, represented through its defining domain.
class ThresholdSet {
public:
    explicit ThresholdSet(Domain domain) : domain_(std::move(domain)) {}

    const Domain& domain() const noexcept { return domain_; }

    /// True iff the hyperplane {x : u.x = t} meets the domain.
    bool contains(const CylinderPoint& p) const;

    double measure() const { return measure_Z(domain_); }

private:
    Domain domain_;
};

}  // namespace relup
