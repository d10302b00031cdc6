#include "relup/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

#include "relup/errors.hpp"

namespace relup {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

GaussRule gauss_legendre(int order) {
    if (order < 1) throw InvalidArgument("Gauss rule order must be positive");
    GaussRule rule{Vector(order), Vector(order)};
    if (order == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
        return rule;
    }
    Matrix jacobi = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
    for (int i = 0; i < order; ++i) {
        double x = solver.eigenvalues()[i];
        for (int it = 0; it < 3; ++it) {
            const auto [p, dp] = legendre(order, x);
            x -= p / dp;
        }
        const auto [p, dp] = legendre(order, x);
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

int default_sphere_resolution(int d) {
    switch (d) {
        case 1:
            return 2;
        case 2:
            return 2048;
        case 3:
            return 64;
        default:
            return 200000;
    }
}

CylinderQuadrature make_cylinder_quadrature(int d, int sphere_resolution, int t_order) {
    if (d < 1) throw InvalidDimension("quadrature dimension must be >= 1");
    if (sphere_resolution < 0) throw InvalidArgument("sphere resolution must be non-negative");
    const int res = sphere_resolution == 0 ? default_sphere_resolution(d) : sphere_resolution;

    CylinderQuadrature q;
    q.dim = d;
    q.t_rule = gauss_legendre(t_order);
    q.sphere_resolution = res;
    if (d == 1) {
        q.directions = Matrix{{1.0, -1.0}};
        q.sphere_weights = Vector::Ones(2);
    } else if (d == 2) {
        q.directions.resize(2, res);
        q.sphere_weights = Vector::Constant(res, 2.0 * std::numbers::pi / res);
        for (int i = 0; i < res; ++i) {
            const double theta = 2.0 * std::numbers::pi * i / res;
            q.directions.col(i) << std::cos(theta), std::sin(theta);
        }
    } else if (d == 3) {
        const GaussRule polar = gauss_legendre(res);
        const int n_az = 16 * res;
        q.directions.resize(3, static_cast<Eigen::Index>(res) * n_az);
        q.sphere_weights.resize(static_cast<Eigen::Index>(res) * n_az);
        Eigen::Index c = 0;
        for (int i = 0; i < res; ++i) {
            const double z = polar.nodes[i];
            const double rho = std::sqrt(1.0 - z * z);
            for (int j = 0; j < n_az; ++j, ++c) {
                const double phi = 2.0 * std::numbers::pi * (j + 0.5) / n_az;
                q.directions.col(c) << rho * std::cos(phi), rho * std::sin(phi), z;
                q.sphere_weights[c] = polar.weights[i] * 2.0 * std::numbers::pi / n_az;
            }
        }
    } else {
        if (static_cast<std::size_t>(d) > std::size(kPrimes)) throw InvalidDimension("quasi-random sphere rule supports d <= 16");
        q.deterministic = false;
        q.directions.resize(d, res);
        q.sphere_weights = Vector::Constant(res, sphere_area(d) / res);
        for (int i = 0; i < res; ++i) {
            Vector g(d);
            for (int c = 0; c < d; ++c) {
                const double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[c]);
                g[c] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
            }
            q.directions.col(i) = g.normalized();
        }
    }
    return q;
}

CylinderQuadrature refine(const CylinderQuadrature& quad) {
    if (quad.dim == 1) return make_cylinder_quadrature(1, 2, 2 * static_cast<int>(quad.t_rule.nodes.size()));
    return make_cylinder_quadrature(quad.dim, 2 * quad.sphere_resolution, 2 * static_cast<int>(quad.t_rule.nodes.size()));
}

CylinderQuadrature align_to(const CylinderQuadrature& quad, const Matrix& points) {
    if (quad.dim != 3 || !quad.deterministic || points.cols() < 1 || points.cols() > 2) return quad;
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    if (points.cols() == 2) axis = points.col(0).head<3>().cross(points.col(1).head<3>());
    if (axis.norm() <= 1e-12 * (points.colwise().norm().maxCoeff() + 1.0)) {
        // Any normal of the single spanning vector will do.
        Eigen::Index j = 0;
        points.colwise().norm().maxCoeff(&j);
        const Eigen::Vector3d x = points.col(j).head<3>();
        if (x.norm() == 0.0) return quad;
        Eigen::Index smallest = 0;
        x.cwiseAbs().minCoeff(&smallest);
        axis = x.cross(Eigen::Vector3d::Unit(smallest));
    }
    axis.normalize();
    const Eigen::Vector3d e1 = axis.unitOrthogonal();
    const Eigen::Vector3d e2 = axis.cross(e1);
    Eigen::Matrix3d frame;
    frame << e1, e2, axis;
    CylinderQuadrature out = quad;
    out.directions = frame * quad.directions;
    return out;
}

}  // namespace relup
