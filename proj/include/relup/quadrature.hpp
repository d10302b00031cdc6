#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "relup/geometry.hpp"
#include "relup/process.hpp"

namespace relup {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    Vector nodes;
    Vector weights;
};

/// Golub-Welsch followed by Newton polishing on P_n.
GaussRule gauss_legendre(int order);

/// Product rule for integrals over S^{d-1} x R.
///
/// Sphere: d = 1 uses the two points of S^0 with unit weight; d = 2 the
/// trapezoid rule on the circle; d = 3 Gauss-Legendre in the polar cosine
/// times the trapezoid rule in azimuth (16 azimuth nodes per polar node);
/// d >= 4 equal-weight quasi-random nodes (Halton mapped through the normal quantile). The t-direction uses a
/// Gauss rule per panel between the kinks of the integrand.
struct CylinderQuadrature {
    int dim = 0;
    Matrix directions;  ///< d x M unit columns
    Vector sphere_weights;
    GaussRule t_rule;
    int sphere_resolution = 0;
    /// True for the d <= 3 product rules.
    bool deterministic = true;

    Eigen::Index size() const noexcept { return sphere_weights.size(); }
};

/// Default sphere resolution for a dimension.
int default_sphere_resolution(int d);

/// `sphere_resolution` is the number of circle nodes (d = 2), polar nodes
/// (d = 3) or quasi-random nodes (d >= 4).
/// Zero selects the default.
CylinderQuadrature make_cylinder_quadrature(int d, int sphere_resolution = 0, int t_order = 12);

/// Same rule with every resolution parameter doubled.
CylinderQuadrature refine(const CylinderQuadrature& quad);

/// For d = 3 and at most two points, the rule rotated so that its polar axis
/// is normal to the span of the points. The kinks of kernel integrands then
/// lie on meridians and the polar direction is smooth. Other inputs are
/// returned unchanged.
CylinderQuadrature align_to(const CylinderQuadrature& quad, const Matrix& points);

/// Integrates f(k_{x_1}(u,t), ..., k_{x_m}(u,t)) over S^{d-1} x R for the
/// columns x_j of `points`. f must vanish at the zero vector: each kernel is
/// supported between 0 and u.x_j, so per direction the t-range is the hull of
/// {0, u.x_1, ..., u.x_m}, split into panels at those kinks.
///
/// When `split` is non-empty, panels are further split where the linear
/// combination split . k changes sign (where |.|^alpha style integrands kink).
template <class F>
auto integrate_kernels(const CylinderQuadrature& quad, const Matrix& points, F&& f, const Vector& split = Vector())
    -> std::decay_t<decltype(f(std::declval<const Vector&>()))> {
    using Result = std::decay_t<decltype(f(std::declval<const Vector&>()))>;
    const Eigen::Index m = points.cols();
    const Matrix proj = quad.directions.transpose() * points;  // M x m
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(m) + 1);
    Vector k(m);

    auto kernels_at = [&](Eigen::Index dir, double t) {
        for (Eigen::Index j = 0; j < m; ++j) k[j] = kernel_from_projection(proj(dir, j), t);
    };
    Result total{};
    for (Eigen::Index dir = 0; dir < quad.size(); ++dir) {
        knots.assign(1, 0.0);
        for (Eigen::Index j = 0; j < m; ++j) knots.push_back(proj(dir, j));
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

        Result along{};
        auto panel = [&](double a, double b) {
            const double half = 0.5 * (b - a);
            const double mid = 0.5 * (a + b);
            Result acc{};
            for (Eigen::Index g = 0; g < quad.t_rule.nodes.size(); ++g) {
                kernels_at(dir, mid + half * quad.t_rule.nodes[g]);
                acc += quad.t_rule.weights[g] * f(static_cast<const Vector&>(k));
            }
            along += half * acc;
        };
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const double a = knots[i];
            const double b = knots[i + 1];
            if (split.size() == m) {
                // The kernels are affine on the panel, so is split . k.
                const double eps = 1e-12 * (b - a);
                kernels_at(dir, a + eps);
                const double ga = split.dot(k);
                kernels_at(dir, b - eps);
                const double gb = split.dot(k);
                if ((ga < 0.0 && gb > 0.0) || (ga > 0.0 && gb < 0.0)) {
                    const double root = (a + eps) + (ga / (ga - gb)) * ((b - eps) - (a + eps));
                    panel(a, root);
                    panel(root, b);
                    continue;
                }
            }
            panel(a, b);
        }
        total += quad.sphere_weights[dir] * along;
    }
    return total;
}

}  // namespace relup
