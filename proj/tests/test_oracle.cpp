#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "relup/errors.hpp"
#include "relup/mc_stats.hpp"
#include "relup/oracle.hpp"
#include "relup/quadrature.hpp"
#include "relup/verify.hpp"

using namespace relup;

namespace {

constexpr double pi = std::numbers::pi;

// Brute-force double integral over S^1 x R of f(k_x, k_y): midpoint rule in
// the angle and in t over [-2, 2], independent of the library's rules.
template <class F>
double brute_force_2d(const Vector& x, const Vector& y, F f, int n_angle = 4000, int n_t = 4000) {
    double total = 0.0;
    for (int i = 0; i < n_angle; ++i) {
        const double th = 2.0 * pi * (i + 0.5) / n_angle;
        const Vector u{{std::cos(th), std::sin(th)}};
        const double px = u.dot(x), py = u.dot(y);
        for (int j = 0; j < n_t; ++j) {
            const double t = -2.0 + 4.0 * (j + 0.5) / n_t;
            total += f(kernel_from_projection(px, t), kernel_from_projection(py, t));
        }
    }
    return total * (2.0 * pi / n_angle) * (4.0 / n_t);
}

// Integral over the circle of |cos|^p.
double abs_cos_power(double p) {
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::pow(std::abs(std::cos(2.0 * pi * (i + 0.5) / n)), p);
    return s * 2.0 * pi / n;
}

double normalized(double gap, const Vector& x, const Vector& y) {
    return std::abs(gap) / std::sqrt(autocov_closed(x, x, 1.0, 1.0) * autocov_closed(y, y, 1.0, 1.0));
}

}  // namespace

TEST_CASE("coefficient A") {
    auto gamma_oracle = [](int d) {
        return std::tgamma(-1.5) / (std::pow(2.0, d + 3) * std::pow(pi, 0.5 * d) * std::tgamma(0.5 * (d + 3)));
    };
    CHECK(coeff_A(1) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(coeff_A(2) == doctest::Approx(1.0 / (18.0 * pi)).epsilon(1e-14));
    for (int d = 1; d <= 10; ++d) {
        CHECK(coeff_A(d) > 0.0);
        CHECK(coeff_A(d) == doctest::Approx(gamma_oracle(d)).epsilon(1e-13));
        CHECK(covariance_constant(d) == doctest::Approx(coeff_A(d) * radon_normalization(d)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(coeff_A(0), InvalidDimension);
}

TEST_CASE("mean") {
    const auto quad = make_cylinder_quadrature(2);
    const Vector e1 = Vector::Unit(2, 0);
    const auto law = WeightLaw::uniform(0.5, 1.5);  // E[V] = 1
    const double brute = brute_force_2d(e1, e1, [](double a, double) { return a; });
    CHECK(brute == doctest::Approx(pi / 2.0).epsilon(1e-5));
    CHECK(mean_closed(e1, 1.0, law) == doctest::Approx(pi / 2.0).epsilon(1e-14));
    CHECK(mean_pointwise(e1, 1.0, law, quad) == doctest::Approx(pi / 2.0).epsilon(1e-10));
    CHECK(mean_closed(e1, 1.0, WeightLaw::two_point(1.0)) == 0.0);
    CHECK(mean_pointwise(Vector::Zero(2), 3.0, law, quad) == 0.0);
    Rng rng(1);
    for (int d = 1; d <= 3; ++d) {
        const auto q = make_cylinder_quadrature(d);
        for (int i = 0; i < 5; ++i) {
            const Vector x = random_point_in_ball(d, 1.0, rng);
            CHECK(mean_pointwise(x, 2.0, law, q) == doctest::Approx(mean_closed(x, 2.0, law)).epsilon(1e-8));
        }
    }
}

TEST_CASE("autocovariance closed form") {
    const Vector e1 = Vector::Unit(2, 0);

    SUBCASE("one-dimensional hand computation") {
        // k_1(+1, t) = 1 - t on [0, 1] and k_1(-1, t) = 1 + t on [-1, 0]:
        // the integral of k^2 is 2/3.
        const Vector one = Vector::Ones(1);
        CHECK(autocov_closed(one, one, 1.0, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
        CHECK(autocov_quadrature(one, one, 1.0, 1.0, make_cylinder_quadrature(1)) ==
              doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    }
    SUBCASE("brute-force quadrature in the plane") {
        const Vector x{{0.6, -0.3}}, y{{-0.2, 0.7}};
        for (const auto& [a, b] : {std::pair{x, y}, std::pair{x, x}, std::pair{e1, y}}) {
            const double brute = brute_force_2d(a, b, [](double p, double q) { return p * q; });
            CHECK(autocov_closed(a, b, 1.0, 1.0) == doctest::Approx(brute).epsilon(2e-5).scale(1e-3));
        }
    }
    SUBCASE("zero, diagonal and symmetry") {
        Rng rng(2);
        for (int d = 1; d <= 4; ++d) {
            for (int i = 0; i < 20; ++i) {
                const Vector x = random_point_in_ball(d, 1.0, rng);
                const Vector y = random_point_in_ball(d, 1.0, rng);
                CHECK(autocov_closed(x, Vector::Zero(d), 3.0, 2.0) == 0.0);
                CHECK(autocov_closed(x, y, 3.0, 2.0) == autocov_closed(y, x, 3.0, 2.0));
                CHECK(autocov_closed(x, x, 3.0, 2.0) ==
                      doctest::Approx(4.0 * covariance_constant(d) * 6.0 * std::pow(x.norm(), 3)).epsilon(1e-13));
                for (double a : {0.5, 2.0, 10.0}) {
                    CHECK(std::pow(a, 3) * autocov_closed(x / a, y / a, 3.0, 2.0) ==
                          doctest::Approx(autocov_closed(x, y, 3.0, 2.0)).epsilon(1e-12).scale(
                              std::sqrt(autocov_closed(x, x, 3.0, 2.0) * autocov_closed(y, y, 3.0, 2.0))));
                }
            }
        }
    }
    SUBCASE("rotation invariance") {
        Rng rng(3);
        for (int d = 2; d <= 4; ++d) {
            for (int i = 0; i < 10; ++i) {
                const Matrix u = random_rotation(d, rng);
                CHECK((u.transpose() * u - Matrix::Identity(d, d)).norm() <= 1e-12);
                CHECK(u.determinant() == doctest::Approx(1.0));
                const Vector x = random_point_in_ball(d, 1.0, rng);
                const Vector y = random_point_in_ball(d, 1.0, rng);
                CHECK(normalized(autocov_closed(u * x, u * y, 1.0, 1.0) - autocov_closed(x, y, 1.0, 1.0), x, y) <= 1e-12);
            }
        }
    }
    SUBCASE("covariance matrices are positive semidefinite") {
        Rng rng(4);
        for (int d = 1; d <= 3; ++d) {
            const int m = 12;
            std::vector<Vector> pts;
            for (int i = 0; i < m; ++i) pts.push_back(random_point_in_ball(d, 1.0, rng));
            Matrix gram(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) gram(i, j) = autocov_closed(pts[i], pts[j], 1.0, 1.0);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-12 * eig.eigenvalues().maxCoeff());
        }
    }
    CHECK_THROWS_AS(autocov_closed(e1, e1, 1.0, kInfinity), InfiniteMoment);
}

TEST_CASE("closed form and quadrature agree") {
    Rng rng(5);
    for (int d = 1; d <= 3; ++d) {
        const auto quad = make_cylinder_quadrature(d);
        const auto fine = refine(quad);
        for (int i = 0; i < 10; ++i) {
            const Vector x = random_point_in_ball(d, 1.0, rng);
            const Vector y = random_point_in_ball(d, 1.0, rng);
            const double c = autocov_closed(x, y, 1.0, 1.0);
            const double q = autocov_quadrature(x, y, 1.0, 1.0, quad);
            CHECK(normalized(q - c, x, y) <= 1e-6);
            // Refinement moves the quadrature by less than 1e-8.
            CHECK(normalized(autocov_quadrature(x, y, 1.0, 1.0, fine) - q, x, y) <= 1e-8);
        }
        CHECK(autocov_quadrature(Vector::Ones(d), Vector::Zero(d), 1.0, 1.0, quad) == 0.0);
    }
}

TEST_CASE("quadrature rules") {
    for (int d = 1; d <= 3; ++d) {
        const auto q = make_cylinder_quadrature(d);
        CHECK(q.sphere_weights.sum() == doctest::Approx(sphere_area(d)).epsilon(1e-10));
        // Constant 1 over S^{d-1} x [-1, 1].
        CHECK(q.sphere_weights.sum() * q.t_rule.weights.sum() == doctest::Approx(2.0 * sphere_area(d)).epsilon(1e-10));
        for (Eigen::Index i = 0; i < q.size(); ++i) CHECK(std::abs(q.directions.col(i).norm() - 1.0) <= 1e-12);
    }
    const auto q4 = make_cylinder_quadrature(4);
    CHECK_FALSE(q4.deterministic);
    CHECK(q4.sphere_weights.sum() == doctest::Approx(sphere_area(4)).epsilon(1e-10));

    // Gauss-Legendre with n nodes is exact for degree 2n - 1.
    const auto g = gauss_legendre(7);
    for (int p = 0; p <= 13; ++p) {
        double s = 0.0;
        for (int i = 0; i < 7; ++i) s += g.weights[i] * std::pow(g.nodes[i], p);
        CHECK(s == doctest::Approx(p % 2 ? 0.0 : 2.0 / (p + 1)).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("pointwise cumulants") {
    const auto quad = make_cylinder_quadrature(2);
    const Vector e1 = Vector::Unit(2, 0);
    const auto tp = WeightLaw::two_point(1.0);
    // integral of |k|^n dt = |u.x|^{n+1} / (n + 1).
    CHECK(cumulant_pointwise(4, e1, 1.0, tp, quad) == doctest::Approx(abs_cos_power(5) / 5.0).epsilon(1e-9));
    CHECK(cumulant_pointwise(4, e1, 1.0, tp, quad) == doctest::Approx(32.0 / 75.0).epsilon(1e-9));
    CHECK(cumulant_pointwise(4, Vector{{0.3, 0.1}}, 1.0, tp, quad) > 0.0);
    CHECK(cumulant_pointwise(4, Vector::Zero(2), 1.0, tp, quad) == 0.0);
    const Vector x{{0.4, -0.5}};
    const auto g = WeightLaw::gaussian(1.3);
    CHECK(cumulant_pointwise(2, x, 2.0, g, quad) == doctest::Approx(autocov_quadrature(x, x, 2.0, 1.69, quad)));
    CHECK_THROWS_AS(cumulant_pointwise(4, x, 1.0, WeightLaw::symmetric_stable(1.5, 1.0), quad), InfiniteMoment);
}

TEST_CASE("characteristic function prediction") {
    const auto quad = make_cylinder_quadrature(2);
    const auto law = WeightLaw::gaussian(1.0);
    const std::vector<Vector> pts{Vector{{0.5, 0.2}}, Vector{{-0.3, 0.6}}};
    CHECK(std::abs(cf_predict(pts, {0.0, 0.0}, 2.0, law, quad) - 1.0) <= 1e-15);
    CHECK(std::abs(cf_predict({Vector::Zero(2)}, {3.0}, 2.0, law, quad) - 1.0) <= 1e-15);

    // Monte Carlo oracle at small rate.
    const double lambda = 0.5;
    const Vector x{{0.8, 0.3}};
    EnsembleConfig cfg;
    cfg.lambda = lambda;
    cfg.law = law;
    cfg.domain = Domain::ball(2, 1.0);
    cfg.n_realizations = 1000000;
    cfg.eval_points = {x};
    cfg.master_seed = 99;
    for (int j = 1; j <= 10; ++j) cfg.cf_frequencies.push_back(Vector::Constant(1, 0.6 * j));
    const auto run = run_ensemble(cfg);
    for (const auto& cf : run.summary.cf) {
        const auto pred = cf_predict({x}, {cf.xi[0]}, lambda, law, quad);
        CHECK(std::abs(pred) <= 1.0);
        CHECK(std::abs(cf.value.real() - pred.real()) <= 5.0 * cf.se());
        CHECK(std::abs(cf.value.imag() - pred.imag()) <= 5.0 * cf.se());
    }
}

TEST_CASE("stable marginal scale") {
    const auto quad = make_cylinder_quadrature(2);
    const Vector e1 = Vector::Unit(2, 0);
    CHECK(stable_marginal_scale(Vector::Zero(2), 1.25, 1.0, quad) == 0.0);
    for (double alpha : {1.25, 1.5, 2.0}) {
        const double exact = std::pow(abs_cos_power(alpha + 1.0) / (alpha + 1.0), 1.0 / alpha);
        CHECK(stable_marginal_scale(e1, alpha, 1.0, quad) == doctest::Approx(exact).epsilon(1e-4));
    }
    const double b = 0.8;
    const Vector x{{0.3, -0.6}};
    const double s2 = stable_marginal_scale(x, 2.0, b, quad);
    CHECK(2.0 * s2 * s2 == doctest::Approx(autocov_quadrature(x, x, 1.0, 2.0 * b * b, quad)).epsilon(1e-8));

    Rng rng(6);
    for (double alpha : {1.25, 1.7}) {
        const double expected = std::pow(2.0, (alpha + 1.0) / alpha);
        for (int i = 0; i < 5; ++i) {
            const Vector y = random_point_in_ball(2, 0.5, rng);
            CHECK(stable_marginal_scale(2.0 * y, alpha, 1.0, quad) / stable_marginal_scale(y, alpha, 1.0, quad) ==
                  doctest::Approx(expected).epsilon(1e-5));
        }
    }
    CHECK(stable_cf(1.0, 1.25, 0.0) == 1.0);
    CHECK_THROWS_AS(stable_marginal_scale(e1, 1.0, 1.0, quad), InvalidArgument);
}
