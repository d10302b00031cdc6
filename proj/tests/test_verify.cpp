#include <doctest.h>

#include <cmath>
#include <numbers>

#include "relup/errors.hpp"
#include "relup/oracle.hpp"
#include "relup/quadrature.hpp"
#include "relup/verify.hpp"

using namespace relup;

namespace {

bool any_failed(const VerdictReport& r) {
    for (const auto& c : r.checks)
        if (!c.pass) return true;
    return false;
}

}  // namespace

TEST_CASE("report bookkeeping") {
    VerdictReport r;
    r.finalize();
    CHECK_FALSE(r.pass);
    r.add(within_se("a", 1.0, 1.1, 0.05));
    r.finalize();
    CHECK(r.pass);
    r.add(within_se("b", 1.0, 2.0, 0.1));
    r.finalize();
    CHECK_FALSE(r.pass);
    CHECK(r.checks[1].z.has_value());
    CHECK(*r.checks[1].z == doctest::Approx(-10.0));
    const auto j = to_json(r);
    CHECK(j["checks"].size() == 2);
    CHECK_FALSE(j["pass"].get<bool>());

    for (auto m : {Mutation::none, Mutation::h1, Mutation::directions, Mutation::hurst, Mutation::variance}) {
        CHECK(parse_mutation(to_string(m)) == m);
    }
    CHECK_THROWS(parse_mutation("everything"));
}

TEST_CASE("random rotations") {
    Rng rng(1);
    for (int d = 1; d <= 4; ++d) {
        const Matrix u = random_rotation(d, rng);
        CHECK((u.transpose() * u - Matrix::Identity(d, d)).norm() <= 1e-12);
        CHECK(u.determinant() == doctest::Approx(1.0));
        const Vector x = random_point_in_ball(d, 0.5, rng);
        CHECK(x.norm() <= 0.5);
    }
}

TEST_CASE("boundary suite") {
    const auto ok = check_boundary(BoundaryParams{});
    CHECK(ok.pass);
    CHECK(ok.checks.size() == 4);

    BoundaryParams mutated;
    mutated.mutation = Mutation::h1;
    const auto bad = check_boundary(mutated);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("width suite") {
    WidthParams p;
    p.n_seeds = 2000;
    CHECK(check_width(p).pass);

    // lambda = 1 on the unit disk: P(N = 0) = exp(-4 pi), essentially never.
    WidthParams small;
    small.lambda = 1.0;
    small.n_seeds = 5000;
    CHECK(check_width(small).pass);

    WidthParams box;
    box.lambda = 1.0;
    box.domain = Domain::box(2, 1.0);
    box.n_seeds = 5000;
    CHECK(check_width(box).pass);
}

TEST_CASE("second-order suite") {
    SecondOrderParams p;
    p.n_realizations = 20000;
    CHECK(check_second_order(p).pass);

    SUBCASE("pairs with y = 0 have zero covariance") {
        SecondOrderParams z = p;
        z.pairs = {{Vector{{0.5, 0.2}}, Vector::Zero(2)}, {Vector{{-0.3, 0.8}}, Vector::Zero(2)}};
        const auto r = check_second_order(z);
        CHECK(r.pass);
        for (const auto& c : r.checks) CHECK(c.statistic == 0.0);
    }
    SUBCASE("gaussian variance at x = e1") {
        SecondOrderParams g = p;
        g.law = WeightLaw::gaussian(1.0);
        const Vector e1 = Vector::Unit(2, 0);
        g.pairs = {{e1, e1}};
        CHECK(check_second_order(g).pass);
        // In d = 2: C(x, x) = 4 c lambda E[V^2] |x|^3 with c = sqrt(pi) / (6 Gamma(5/2)) = 2/9.
        CHECK(autocov_closed(e1, e1, g.lambda, 1.0) == doctest::Approx(8.0 * g.lambda / 9.0));
    }
}

TEST_CASE("isotropy suite") {
    IsotropyParams p;
    p.n_realizations = 20000;
    CHECK(check_isotropy(p).pass);

    SUBCASE("identity rotation reproduces the samples exactly") {
        IsotropyParams id = p;
        id.rotations = {Matrix::Identity(2, 2)};
        const auto r = check_isotropy(id);
        CHECK(r.pass);
        for (const auto& c : r.checks) CHECK(c.statistic == 0.0);
    }
    SUBCASE("anisotropic directions are detected") {
        IsotropyParams bad = p;
        bad.mutation = Mutation::directions;
        CHECK_FALSE(check_isotropy(bad).pass);
    }
}

TEST_CASE("self-similarity suite") {
    SelfSimilarityParams p;
    p.n_realizations = 20000;
    CHECK(check_self_similarity(p).pass);

    SUBCASE("a = 1 is exact") {
        SelfSimilarityParams one = p;
        one.scales = {1.0};
        const auto r = check_self_similarity(one);
        CHECK(r.pass);
        for (const auto& c : r.checks) CHECK(c.statistic == doctest::Approx(0.0).scale(1.0));
    }
    SUBCASE("wrong exponent fails") {
        SelfSimilarityParams bad = p;
        bad.mutation = Mutation::hurst;
        CHECK_FALSE(check_self_similarity(bad).pass);
    }
    SUBCASE("needs a finite-variance zero-mean law") {
        SelfSimilarityParams heavy = p;
        heavy.law = WeightLaw::symmetric_stable(1.5, 1.0);
        CHECK_THROWS(check_self_similarity(heavy));
        SelfSimilarityParams biased = p;
        biased.law = WeightLaw::uniform(0.5, 1.5);
        CHECK_THROWS(check_self_similarity(biased));
    }
}

TEST_CASE("non-gaussian suite") {
    NonGaussianParams p;
    p.lambda = 0.5;
    p.n_realizations = 200000;
    CHECK(check_non_gaussian(p).pass);

    NonGaussianParams origin = p;
    origin.x = Vector::Zero(2);
    const auto r = check_non_gaussian(origin);
    CHECK(r.pass);
    CHECK(r.checks.size() == 1);

    NonGaussianParams heavy = p;
    heavy.law = WeightLaw::symmetric_stable(1.5, 1.0);
    CHECK_THROWS_AS(check_non_gaussian(heavy), InfiniteMoment);
}

TEST_CASE("gaussian limit suite") {
    GaussianLimitParams p;
    p.lambdas = {1.0, 10.0, 100.0};
    p.n_realizations = 5000;
    const auto ok = check_gaussian_limit(p);
    CHECK(ok.pass);
    CHECK(ok.ladder.size() == 3);

    GaussianLimitParams bad = p;
    bad.mutation = Mutation::variance;
    CHECK_FALSE(check_gaussian_limit(bad).pass);
}

TEST_CASE("stable limit suite at alpha = 2 agrees with the gaussian prediction") {
    StableLimitParams p;
    p.alpha = 2.0;
    p.lambdas = {10.0, 100.0};
    p.n_realizations = 20000;
    const auto r = check_stable_limit(p);
    CHECK(r.pass);

    // The two suites predict the same law: N(0, 2 scale^2) is SaS(2, scale).
    const auto quad = make_cylinder_quadrature(2);
    const Vector e1 = Vector::Unit(2, 0);
    const double scale = stable_marginal_scale(e1, 2.0, 1.0, quad);
    const double var = autocov_closed(e1, e1, 1.0, 2.0);
    CHECK(2.0 * scale * scale == doctest::Approx(var).epsilon(1e-9));
}

TEST_CASE("suites are deterministic") {
    BoundaryParams b;
    b.n_realizations = 50;
    CHECK(to_json(check_boundary(b)).dump() == to_json(check_boundary(b)).dump());
    SecondOrderParams s;
    s.n_realizations = 2000;
    CHECK(to_json(check_second_order(s)).dump() == to_json(check_second_order(s)).dump());
    CHECK_FALSE(any_failed(check_boundary(b)));
}
