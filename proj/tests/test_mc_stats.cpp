#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

#include "relup/errors.hpp"
#include "relup/mc_stats.hpp"
#include "relup/oracle.hpp"
#include "relup/quadrature.hpp"
#include "relup/serialization.hpp"

using namespace relup;

namespace {

Vector normals(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> g;
    Vector v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Textbook k-statistics from central sample moments.
std::pair<double, double> kstats_textbook(const Vector& x) {
    const double n = static_cast<double>(x.size());
    const double mean = x.mean();
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double c = v - mean;
        m2 += c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m4 /= n;
    const double k2 = n * m2 / (n - 1.0);
    const double k4 = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    return {k2, k4};
}

EnsembleConfig small_config() {
    EnsembleConfig cfg;
    cfg.lambda = 5.0;
    cfg.law = WeightLaw::two_point(1.0);
    cfg.n_realizations = 2000;
    cfg.eval_points = {Vector{{0.5, 0.0}}, Vector{{-0.2, 0.6}}, Vector::Zero(2)};
    cfg.cf_frequencies = {Vector{{1.0, 0.5, 2.0}}, Vector{{0.0, 0.0, 0.0}}};
    cfg.master_seed = 99;
    return cfg;
}

}  // namespace

TEST_CASE("empirical characteristic function") {
    const Matrix zeros = Matrix::Zero(10, 2);
    auto cf = empirical_cf(zeros, Vector{{0.7, -3.0}});
    CHECK(cf.value == std::complex<double>(1.0, 0.0));
    CHECK(cf.se() == 0.0);

    const Vector z = normals(100000, 1);
    cf = empirical_cf(Matrix(z), Vector::Zero(1));
    CHECK(cf.value == std::complex<double>(1.0, 0.0));

    cf = empirical_cf(Matrix(z), Vector::Ones(1));
    CHECK(std::abs(cf.value.real() - std::exp(-0.5)) <= 5.0 * cf.se());
    CHECK(std::abs(cf.value.imag()) <= 5.0 * cf.se());
    CHECK(cf.se() > 0.0);

    CHECK_THROWS_AS(empirical_cf(Matrix(1, 1), Vector::Ones(1)), InvalidArgument);
    CHECK_THROWS_AS(empirical_cf(zeros, Vector::Ones(3)), DimensionMismatch);
}

TEST_CASE("k-statistics") {
    SUBCASE("constant samples") {
        const auto k = k_statistics(Vector::Constant(50, 3.25));
        CHECK(k.k2 == doctest::Approx(0.0).scale(1.0));
        CHECK(k.k4 == doctest::Approx(0.0).scale(1.0));
        CHECK(k.se_k2 >= 0.0);
    }
    SUBCASE("textbook formula") {
        Rng rng(2);
        for (int n : {8, 9, 20, 333}) {
            Vector x(n);
            for (auto& v : x) v = std::exp(3.0 * uniform01(rng));
            const auto k = k_statistics(x);
            const auto [k2, k4] = kstats_textbook(x);
            CHECK(k.k2 == doctest::Approx(k2).epsilon(1e-10));
            CHECK(k.k4 == doctest::Approx(k4).epsilon(1e-8));
        }
    }
    SUBCASE("jackknife error matches the spread of repeated estimates") {
        const int reps = 200, n = 2000;
        Vector k4s(reps);
        double se_mean = 0.0;
        for (int r = 0; r < reps; ++r) {
            const auto k = k_statistics(normals(n, 100 + r));
            k4s[r] = k.k4;
            se_mean += k.se_k4 / reps;
        }
        const double sd = std::sqrt((k4s.array() - k4s.mean()).square().sum() / (reps - 1));
        CHECK(se_mean == doctest::Approx(sd).epsilon(0.2));
    }
    SUBCASE("normal samples have zero fourth cumulant") {
        const auto k = k_statistics(normals(1000000, 3));
        CHECK(std::abs(k.k4) <= 5.0 * k.se_k4);
        CHECK(std::abs(k.k2 - 1.0) <= 5.0 * k.se_k2);
    }
    SUBCASE("compound Poisson samples match the cumulant oracle") {
        EnsembleConfig cfg;
        cfg.lambda = 0.5;
        cfg.law = WeightLaw::two_point(1.0);
        cfg.n_realizations = 200000;
        cfg.eval_points = {Vector{{1.0, 0.0}}};
        cfg.master_seed = 4;
        const auto s = run_ensemble(cfg).summary;
        REQUIRE(s.kstats[0].has_value());
        const auto quad = make_cylinder_quadrature(2);
        const double k4 = cumulant_pointwise(4, cfg.eval_points[0], cfg.lambda, cfg.law, quad);
        const double k2 = cumulant_pointwise(2, cfg.eval_points[0], cfg.lambda, cfg.law, quad);
        CHECK(std::abs(s.kstats[0]->k4 - k4) <= 5.0 * s.kstats[0]->se_k4);
        CHECK(std::abs(s.kstats[0]->k2 - k2) <= 5.0 * s.kstats[0]->se_k2);
    }
    CHECK_THROWS_AS(k_statistics(Vector::Ones(7)), InvalidArgument);
}

TEST_CASE("Kolmogorov-Smirnov distance") {
    const auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks_distance(Vector::Constant(100, 0.3), uniform_cdf) == doctest::Approx(0.7));
    CHECK(ks_distance(Vector::Constant(100, 0.8), uniform_cdf) == doctest::Approx(0.8));
    CHECK(ks_distance(Vector::Constant(5, 7.0), uniform_cdf) == doctest::Approx(1.0));

    const Vector z = normals(10000, 5);
    const double d = ks_distance(z, normal_cdf);
    CHECK(d >= 0.0);
    CHECK(d < ks_critical_1pct(10000));
    // Shifting the samples by half a standard deviation is detected.
    const Vector shifted = (z.array() + 0.5).matrix();
    CHECK(ks_distance(shifted, normal_cdf) > ks_critical_1pct(10000));

    // p-values at the tabulated asymptotic critical values.
    const std::size_t n = 1000000;
    CHECK(kolmogorov_pvalue(1.63 / std::sqrt(double(n)), n) == doctest::Approx(0.01).epsilon(0.03));
    CHECK(kolmogorov_pvalue(1.36 / std::sqrt(double(n)), n) == doctest::Approx(0.05).epsilon(0.03));
    CHECK(kolmogorov_pvalue(0.0, n) == doctest::Approx(1.0));
    CHECK(kolmogorov_pvalue(1.0, 100) <= 1e-12);

    // Null spread of sqrt(n) D by simulation.
    const int reps = 400, m = 500;
    Vector stat(reps);
    for (int r = 0; r < reps; ++r) stat[r] = std::sqrt(double(m)) * ks_distance(normals(m, 1000 + r), normal_cdf);
    const double sd = std::sqrt((stat.array() - stat.mean()).square().sum() / (reps - 1));
    CHECK(sd == doctest::Approx(kKolmogorovSd).epsilon(0.15));
}

TEST_CASE("Poisson goodness of fit") {
    Rng rng(6);
    std::poisson_distribution<std::int64_t> pois(12.5);
    std::vector<std::int64_t> counts(20000);
    for (auto& c : counts) c = pois(rng);
    const auto good = poisson_gof(counts, 12.5);
    CHECK(good.p_value > 1e-3);
    CHECK(good.dof == good.bins - 1);
    CHECK(good.bins > 10);
    CHECK(poisson_gof(counts, 13.0).p_value < 1e-3);

    std::poisson_distribution<std::int64_t> tiny(0.01);
    for (auto& c : counts) c = tiny(rng);
    CHECK(poisson_gof(counts, 0.01).p_value > 1e-3);
    CHECK_THROWS_AS(poisson_gof({}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(poisson_gof({1, -1}, 1.0), InvalidArgument);
}

TEST_CASE("seed splitting") {
    std::unordered_set<std::uint64_t> seen;
    const std::uint64_t n = 1000000;
    seen.reserve(2 * n);
    for (std::uint64_t i = 0; i < n; ++i) seen.insert(derive_seed(12345, i));
    CHECK(seen.size() == n);
    std::size_t collisions = 0;
    for (std::uint64_t i = 0; i < n; ++i) collisions += seen.count(derive_seed(12346, i));
    CHECK(collisions == 0);
}

TEST_CASE("ensemble summary") {
    const auto cfg = small_config();
    const auto run = run_ensemble(cfg);
    const auto& s = run.summary;
    REQUIRE(s.mean.size() == 3);
    REQUIRE(s.covariance.has_value());
    CHECK(s.widths.size() == cfg.n_realizations);
    CHECK(s.provenance.n_realizations == cfg.n_realizations);
    CHECK(s.provenance.config_hash == config_hash(cfg));
    for (double se : s.mean_se) CHECK(se >= 0.0);
    CHECK((s.covariance_se->array() >= 0.0).all());
    // s(0) = 0 for every realization.
    CHECK(s.mean[2] == 0.0);
    CHECK((*s.covariance)(2, 2) == 0.0);
    for (const auto& c : s.cf) CHECK(std::abs(c.value) <= 1.0 + 3.0 * c.se());
    CHECK(s.cf[1].value == std::complex<double>(1.0, 0.0));
    CHECK(run.samples.size() == 0);

    SUBCASE("determinism and thread independence") {
        const auto again = to_json(run_ensemble(cfg).summary).dump();
        CHECK(again == to_json(s).dump());
        auto par = cfg;
        par.threads = 4;
        CHECK(to_json(run_ensemble(par).summary).dump() == again);
        CHECK(config_hash(par) == config_hash(cfg));
        auto other = cfg;
        other.master_seed = 100;
        CHECK(to_json(run_ensemble(other).summary).dump() != again);
    }
    SUBCASE("samples are kept on request and match the summary") {
        auto keep = cfg;
        keep.keep_samples = true;
        const auto r = run_ensemble(keep);
        REQUIRE(r.samples.rows() == Eigen::Index(cfg.n_realizations));
        REQUIRE(r.samples.cols() == 3);
        CHECK(r.samples.col(0).mean() == doctest::Approx(s.mean[0]).epsilon(1e-12));
        const auto row = sample_realization(cfg.lambda, cfg.law, cfg.domain, derive_seed(cfg.master_seed, 17));
        CHECK(r.samples(17, 1) == evaluate(row, cfg.eval_points[1]));
    }
    SUBCASE("standard error scales like 1/sqrt(n)") {
        auto a = cfg;
        a.n_realizations = 20000;
        auto b = a;
        b.n_realizations = 40000;
        const double ratio = run_ensemble(b).summary.mean_se[0] / run_ensemble(a).summary.mean_se[0];
        CHECK(std::abs(ratio - 1.0 / std::numbers::sqrt2) <= 0.1 / std::numbers::sqrt2);
    }
}

TEST_CASE("ensemble edge cases") {
    SUBCASE("vanishing rate") {
        auto cfg = small_config();
        cfg.lambda = 1e-9;
        const auto s = run_ensemble(cfg).summary;
        for (double m : s.mean) CHECK(m == 0.0);
        CHECK(s.covariance->isZero(0.0));
        CHECK(std::all_of(s.widths.begin(), s.widths.end(), [](auto w) { return w == 0; }));
    }
    SUBCASE("heavy tails disable moment estimators") {
        auto cfg = small_config();
        cfg.law = WeightLaw::symmetric_stable(1.25, 1.0);
        const auto s = run_ensemble(cfg).summary;
        CHECK(s.mean.empty());
        CHECK_FALSE(s.covariance.has_value());
        CHECK(std::none_of(s.kstats.begin(), s.kstats.end(), [](const auto& k) { return k.has_value(); }));
        CHECK(s.cf.size() == 2);
    }
    SUBCASE("resource cap") {
        auto cfg = small_config();
        cfg.max_total_neurons = 1000;
        CHECK_THROWS_AS(run_ensemble(cfg), ResourceLimit);
    }
    SUBCASE("validation") {
        auto cfg = small_config();
        cfg.n_realizations = 1;
        CHECK_THROWS_AS(run_ensemble(cfg), InvalidArgument);
        cfg = small_config();
        cfg.eval_points.clear();
        cfg.cf_frequencies.clear();
        CHECK_THROWS_AS(run_ensemble(cfg), InvalidArgument);
        cfg = small_config();
        cfg.eval_points.push_back(Vector::Zero(3));
        CHECK_THROWS_AS(run_ensemble(cfg), DimensionMismatch);
        cfg = small_config();
        cfg.cf_frequencies.push_back(Vector::Ones(2));
        CHECK_THROWS_AS(run_ensemble(cfg), DimensionMismatch);
    }
}

TEST_CASE("mean and standard error") {
    const auto [m, se] = mean_and_se(Vector{{1.0, 2.0, 3.0, 4.0}});
    CHECK(m == doctest::Approx(2.5));
    CHECK(se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK_THROWS_AS(mean_and_se(Vector::Ones(1)), InvalidArgument);
}
