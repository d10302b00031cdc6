#include "relup/verify.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "relup/errors.hpp"
#include "relup/mc_stats.hpp"
#include "relup/oracle.hpp"
#include "relup/process.hpp"
#include "relup/quadrature.hpp"

namespace relup {

namespace {

// Index ranges of derive_seed kept apart from the per-realization seeds.
constexpr std::uint64_t kAuxStream = 1ULL << 62;
constexpr std::uint64_t kLadderStream = (1ULL << 62) + (1ULL << 61);

// The Gaussian-limit and stable-limit suites read the process at one point.
Vector default_point(const Domain& domain, const Vector& x) {
    Vector p = x.size() == 0 ? Vector(Vector::Unit(domain.dim(), 0)) : x;
    if (p.size() != domain.dim()) throw DimensionMismatch("test point does not match the domain");
    if (!domain.contains(p)) throw InvalidArgument("test point lies outside the domain");
    return p;
}

EnsembleRun ensemble(double lambda, const WeightLaw& law, const Domain& domain, std::size_t n,
                     std::vector<Vector> points, std::uint64_t master, unsigned threads, bool keep,
                     const SamplerOptions& sampler = {}, std::vector<Vector> freqs = {}) {
    EnsembleConfig cfg;
    cfg.lambda = lambda;
    cfg.law = law;
    cfg.domain = domain;
    cfg.n_realizations = n;
    cfg.eval_points = std::move(points);
    cfg.cf_frequencies = std::move(freqs);
    cfg.master_seed = master;
    cfg.threads = threads;
    cfg.keep_samples = keep;
    cfg.sampler = sampler;
    return run_ensemble(cfg);
}

// Closed-form error scaled by sqrt(C(x,x) C(y,y)), the natural size of C(x,y).
double normalized_gap(double gap, const Vector& x, const Vector& y, double lambda, double m2) {
    const double scale = std::sqrt(autocov_closed(x, x, lambda, m2) * autocov_closed(y, y, lambda, m2));
    return scale > 0.0 ? std::abs(gap) / scale : std::abs(gap);
}

Check bound_check(std::string description, double statistic, double threshold) {
    return Check{std::move(description), statistic, threshold, std::nullopt, statistic <= threshold};
}

// Paired comparison of two columns blocks of the sample matrix through the
// joint characteristic function at xi.
Check cf_pair_check(std::string description, const Matrix& a, const Matrix& b, const Vector& xi, double k) {
    const Vector pa = a * xi;
    const Vector pb = b * xi;
    const Vector dre = (pa.array().cos() - pb.array().cos()).matrix();
    const Vector dim = (pa.array().sin() - pb.array().sin()).matrix();
    const auto [mre, sre] = mean_and_se(dre);
    const auto [mim, sim] = mean_and_se(dim);
    const double stat = std::max(std::abs(mre), std::abs(mim));
    const double se = std::max(sre, sim);
    Check c{std::move(description), stat, k * se, se > 0.0 ? std::optional(stat / se) : std::nullopt, stat <= k * se};
    return c;
}

Json ladder_json(const std::vector<double>& v) { return Json(v); }

double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::numbers::sqrt2)); }

}  // namespace

void VerdictReport::add(Check c) { checks.push_back(std::move(c)); }

void VerdictReport::finalize() {
    pass = !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Json to_json(const VerdictReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        checks.push_back(Json{{"description", c.description},
                              {"statistic", c.statistic},
                              {"threshold", c.threshold},
                              {"z", c.z ? Json(*c.z) : Json(nullptr)},
                              {"pass", c.pass}});
    }
    Json ladder = Json::array();
    for (const auto& row : r.ladder) {
        ladder.push_back(Json{{"lambda", row.lambda},
                              {"ks", std::isnan(row.ks) ? Json(nullptr) : Json(row.ks)},
                              {"ks_critical", row.ks_critical},
                              {"cf_distance", row.cf_distance}});
    }
    return Json{{"suite", r.suite}, {"pass", r.pass},  {"checks", std::move(checks)},
                {"config", r.config}, {"notes", r.notes}, {"ladder", std::move(ladder)}};
}

Mutation parse_mutation(std::string_view name) {
    if (name == "none" || name.empty()) return Mutation::none;
    if (name == "h1") return Mutation::h1;
    if (name == "directions") return Mutation::directions;
    if (name == "hurst") return Mutation::hurst;
    if (name == "variance") return Mutation::variance;
    throw ConfigError("unknown mutation '" + std::string(name) + "' (h1, directions, hurst, variance)");
}

std::string to_string(Mutation m) {
    switch (m) {
        case Mutation::h1:
            return "h1";
        case Mutation::directions:
            return "directions";
        case Mutation::hurst:
            return "hurst";
        case Mutation::variance:
            return "variance";
        default:
            return "none";
    }
}

Check within_se(std::string description, double observed, double expected, double se, double k) {
    const double gap = std::abs(observed - expected);
    return Check{std::move(description), observed, k * se,
                 se > 0.0 ? std::optional((observed - expected) / se) : std::nullopt, gap <= k * se};
}

Matrix random_rotation(int d, Rng& rng) {
    std::normal_distribution<double> normal;
    Matrix g(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i) {
        if (r(i, i) < 0.0) q.col(i) *= -1.0;
    }
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

Vector random_point_in_ball(int d, double radius, Rng& rng) {
    Vector u(d);
    sample_unit_sphere_into(u, rng);
    return radius * std::pow(uniform01(rng), 1.0 / d) * u;
}

VerdictReport check_boundary(const BoundaryParams& p) {
    VerdictReport rep;
    rep.suite = "boundary";
    rep.config = Json{{"n_realizations", p.n_realizations}, {"lambda", p.lambda},    {"law", to_json(p.law)},
                      {"domain", to_json(p.domain)},         {"seed", p.seed},        {"rel_tol", p.rel_tol},
                      {"mutation", to_string(p.mutation)}};
    const KernelPerturbation pert{p.mutation == Mutation::h1 ? 0.05 : 0.0};
    const Vector zero = Vector::Zero(p.domain.dim());

    auto ratio = [](double value, double scale) { return scale > 0.0 ? value / scale : (value == 0.0 ? 0.0 : kInfinity); };
    double value = 0.0, grad = 0.0, inj_value = 0.0, inj_grad = 0.0;
    for (std::size_t i = 0; i < p.n_realizations; ++i) {
        const auto r = sample_realization(p.lambda, p.law, p.domain, derive_seed(p.seed, i));
        value = std::max(value, ratio(std::abs(evaluate(r, zero, pert)), r.total_abs_weight()));
        grad = std::max(grad, ratio(gradient(r, zero, pert).norm(), r.total_abs_weight()));

        Rng aux(derive_seed(p.seed, kAuxStream + i));
        const double v = sample(p.law, aux);
        const auto u = sample_unit_sphere(p.domain.dim(), aux);
        const auto r0 = r.with_neuron(Neuron{v, u, 0.0});
        inj_value = std::max(inj_value, ratio(std::abs(evaluate(r0, zero, pert)), r0.total_abs_weight()));
        inj_grad = std::max(inj_grad, ratio(gradient(r0, zero, pert).norm(), r0.total_abs_weight()));
    }
    rep.add(bound_check("max |s(0)| / sum |v_k|", value, p.rel_tol));
    rep.add(bound_check("max |grad s(0)| / sum |v_k|", grad, p.rel_tol));
    rep.add(bound_check("max |s(0)| / sum |v_k| with a threshold through the origin", inj_value, p.rel_tol));
    rep.add(bound_check("max |grad s(0)| / sum |v_k| with a threshold through the origin", inj_grad, p.rel_tol));
    rep.finalize();
    return rep;
}

VerdictReport check_width(const WidthParams& p) {
    VerdictReport rep;
    rep.suite = "width";
    rep.config = Json{{"lambda", p.lambda}, {"domain", to_json(p.domain)}, {"n_seeds", p.n_seeds}, {"seed", p.seed},
                      {"significance", p.significance}};
    if (p.n_seeds < 2) throw InvalidArgument("width suite needs at least 2 seeds");
    std::vector<std::int64_t> widths(p.n_seeds);
    Vector w(static_cast<Eigen::Index>(p.n_seeds));
    for (std::size_t i = 0; i < p.n_seeds; ++i) {
        widths[i] = sample_realization(p.lambda, WeightLaw::two_point(1.0), p.domain, derive_seed(p.seed, i)).width();
        w[static_cast<Eigen::Index>(i)] = static_cast<double>(widths[i]);
    }
    const double mu = p.lambda * measure_Z(p.domain);
    const double n = static_cast<double>(p.n_seeds);
    const double mean = w.mean();
    // Standard error of the mean under the Poisson null.
    rep.add(within_se("mean width vs lambda |Z|", mean, mu, std::sqrt(mu / n), p.k));
    const auto gof = poisson_gof(widths, mu);
    rep.add(Check{"chi-square p-value vs Poisson(lambda |Z|), " + std::to_string(gof.bins) + " bins", gof.p_value,
                  p.significance, std::nullopt, gof.p_value >= p.significance});
    const auto zeros = std::count(widths.begin(), widths.end(), 0);
    rep.notes.push_back("expected width " + format_double(mu) + ", observed mean " + format_double(mean) +
                        "; empty realizations " + std::to_string(zeros) + " (expected " +
                        format_double(n * std::exp(-mu)) + ")");
    rep.finalize();
    return rep;
}

VerdictReport check_second_order(const SecondOrderParams& p) {
    VerdictReport rep;
    rep.suite = "second-order";
    const double m2 = raw_moment(p.law, 2);
    const int d = p.domain.dim();

    auto pairs = p.pairs;
    if (pairs.empty()) {
        Rng aux(derive_seed(p.seed, kAuxStream));
        for (std::size_t i = 0; i < p.n_pairs; ++i) {
            Vector x = random_point_in_ball(d, p.domain.scale(), aux);
            Vector y = random_point_in_ball(d, p.domain.scale(), aux);
            pairs.emplace_back(std::move(x), std::move(y));
        }
    }
    std::vector<Vector> points;
    Json pairs_json = Json::array();
    for (const auto& [x, y] : pairs) {
        points.push_back(x);
        points.push_back(y);
        pairs_json.push_back(Json{to_json(x), to_json(y)});
    }
    rep.config = Json{{"law", to_json(p.law)},     {"lambda", p.lambda}, {"domain", to_json(p.domain)},
                      {"n_realizations", p.n_realizations}, {"pairs", pairs_json}, {"seed", p.seed},
                      {"oracle_rel_tol", p.oracle_rel_tol}};

    const auto quad = make_cylinder_quadrature(d);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [x, y] = pairs[i];
        const double closed = autocov_closed(x, y, p.lambda, m2);
        const double quadr = autocov_quadrature(x, y, p.lambda, m2, quad);
        const double gap = normalized_gap(quadr - closed, x, y, p.lambda, m2);
        rep.add(bound_check("pair " + std::to_string(i) + ": closed form vs quadrature (normalized)", gap,
                            p.oracle_rel_tol));
    }
    const auto run = ensemble(p.lambda, p.law, p.domain, p.n_realizations, points, p.seed, p.threads, false);
    const auto& cov = *run.summary.covariance;
    const auto& se = *run.summary.covariance_se;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [x, y] = pairs[i];
        const auto a = static_cast<Eigen::Index>(2 * i);
        rep.add(within_se("pair " + std::to_string(i) + ": empirical covariance vs closed form", cov(a, a + 1),
                          autocov_closed(x, y, p.lambda, m2), se(a, a + 1), p.k));
    }
    rep.finalize();
    return rep;
}

VerdictReport check_isotropy(const IsotropyParams& p) {
    VerdictReport rep;
    rep.suite = "isotropy";
    const int d = p.domain.dim();
    const auto m = static_cast<Eigen::Index>(p.n_points);
    if (m < 1) throw InvalidArgument("isotropy suite needs at least one point");
    Rng aux(derive_seed(p.seed, kAuxStream));

    // Points inside the inscribed ball stay in the domain under rotation.
    std::vector<Vector> base;
    for (Eigen::Index j = 0; j < m; ++j) base.push_back(random_point_in_ball(d, 0.9 * p.domain.scale(), aux));
    auto rotations = p.rotations;
    if (rotations.empty()) {
        for (std::size_t r = 0; r < p.n_rotations; ++r) rotations.push_back(random_rotation(d, aux));
    }
    const bool finite = has_finite_variance(p.law);
    const double m2 = finite ? raw_moment(p.law, 2) : 1.0;
    double spread = 1.0;
    if (finite) {
        double avg = 0.0;
        for (const auto& x : base) avg += autocov_closed(x, x, p.lambda, m2) / static_cast<double>(m);
        if (avg > 0.0) spread = 1.0 / std::sqrt(avg * static_cast<double>(m));
    }
    std::vector<Vector> freqs;
    std::normal_distribution<double> normal;
    for (std::size_t f = 0; f < p.n_frequencies; ++f) {
        Vector xi(m);
        for (Eigen::Index j = 0; j < m; ++j) xi[j] = spread * normal(aux);
        freqs.push_back(std::move(xi));
    }

    Json rot_json = Json::array();
    for (const auto& u : rotations) rot_json.push_back(to_json(Vector(u.reshaped())));
    Json pts_json = Json::array();
    for (const auto& x : base) pts_json.push_back(to_json(x));
    Json freq_json = Json::array();
    for (const auto& xi : freqs) freq_json.push_back(to_json(xi));
    rep.config = Json{{"law", to_json(p.law)},       {"lambda", p.lambda},  {"domain", to_json(p.domain)},
                      {"n_realizations", p.n_realizations}, {"points", pts_json},  {"rotations_column_major", rot_json},
                      {"frequencies", freq_json},  {"seed", p.seed},       {"mutation", to_string(p.mutation)}};

    for (std::size_t r = 0; r < rotations.size(); ++r) {
        const auto& u = rotations[r];
        if (u.rows() != d || u.cols() != d) throw DimensionMismatch("rotation does not match the domain");
        double worst = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index l = j; l < m; ++l) {
                const auto& x = base[static_cast<std::size_t>(j)];
                const auto& y = base[static_cast<std::size_t>(l)];
                const double gap = autocov_closed(u * x, u * y, p.lambda, m2) - autocov_closed(x, y, p.lambda, m2);
                worst = std::max(worst, normalized_gap(gap, x, y, p.lambda, m2));
            }
        }
        rep.add(bound_check("rotation " + std::to_string(r) + ": closed-form covariance change (normalized)", worst,
                            p.closed_tol));
    }

    std::vector<Vector> points = base;
    for (const auto& u : rotations)
        for (const auto& x : base) points.push_back(u * x);
    SamplerOptions sampler;
    sampler.anisotropic_directions = p.mutation == Mutation::directions;
    const auto run = ensemble(p.lambda, p.law, p.domain, p.n_realizations, points, p.seed, p.threads, true, sampler);
    const Matrix original = run.samples.leftCols(m);
    for (std::size_t r = 0; r < rotations.size(); ++r) {
        const Matrix rotated = run.samples.middleCols(static_cast<Eigen::Index>(r + 1) * m, m);
        for (std::size_t f = 0; f < freqs.size(); ++f) {
            rep.add(cf_pair_check("rotation " + std::to_string(r) + ", frequency " + std::to_string(f) +
                                      ": joint CF difference",
                                  original, rotated, freqs[f], p.k));
        }
    }
    rep.finalize();
    return rep;
}

VerdictReport check_self_similarity(const SelfSimilarityParams& p) {
    VerdictReport rep;
    rep.suite = "self-similarity";
    const auto mom = moments(p.law);
    if (mom.mean != 0.0 || !has_finite_variance(p.law)) {
        throw InvalidArgument("self-similarity suite needs a zero-mean law with finite variance");
    }
    const double m2 = raw_moment(p.law, 2);
    const double hurst = p.mutation == Mutation::hurst ? 1.4 : p.hurst;
    const int d = p.domain.dim();
    double max_inv = 1.0;
    for (double a : p.scales) {
        if (!(a > 0.0)) throw InvalidArgument("scales must be positive");
        max_inv = std::max(max_inv, 1.0 / a);
    }
    // Keep every x / a inside the inscribed ball.
    const double radius = 0.9 * p.domain.scale() / max_inv;

    Rng aux(derive_seed(p.seed, kAuxStream));
    std::vector<Vector> points;
    Json pairs_json = Json::array();
    for (std::size_t i = 0; i < p.n_pairs; ++i) {
        const Vector x = random_point_in_ball(d, radius, aux);
        const Vector y = random_point_in_ball(d, radius, aux);
        pairs_json.push_back(Json{to_json(x), to_json(y)});
        points.push_back(x);
        points.push_back(y);
        for (double a : p.scales) {
            points.push_back(x / a);
            points.push_back(y / a);
        }
    }
    rep.config = Json{{"law", to_json(p.law)},       {"lambda", p.lambda}, {"domain", to_json(p.domain)},
                      {"n_realizations", p.n_realizations}, {"scales", p.scales}, {"pairs", pairs_json},
                      {"hurst", hurst},             {"seed", p.seed},     {"mutation", to_string(p.mutation)}};

    const std::size_t stride = 2 + 2 * p.scales.size();
    for (std::size_t i = 0; i < p.n_pairs; ++i) {
        const Vector& x = points[i * stride];
        const Vector& y = points[i * stride + 1];
        for (std::size_t s = 0; s < p.scales.size(); ++s) {
            const double a = p.scales[s];
            const double gap = std::pow(a, 2.0 * hurst) * autocov_closed(x / a, y / a, p.lambda, m2) -
                               autocov_closed(x, y, p.lambda, m2);
            rep.add(bound_check("pair " + std::to_string(i) + ", a = " + format_double(a) +
                                    ": closed-form a^{2H} C(x/a, y/a) - C(x, y) (normalized)",
                                normalized_gap(gap, x, y, p.lambda, m2), p.closed_tol));
        }
    }

    const auto run = ensemble(p.lambda, p.law, p.domain, p.n_realizations, points, p.seed, p.threads, true);
    const Matrix& s = run.samples;
    for (std::size_t i = 0; i < p.n_pairs; ++i) {
        const auto base = static_cast<Eigen::Index>(i * stride);
        const Vector plain = s.col(base).cwiseProduct(s.col(base + 1));
        for (std::size_t k = 0; k < p.scales.size(); ++k) {
            const double a = p.scales[k];
            const auto c = base + 2 + 2 * static_cast<Eigen::Index>(k);
            // Paired per realization: the scaled and unscaled products share the
            // same network, which removes most of the sampling noise.
            const Vector diff = std::pow(a, 2.0 * hurst) * s.col(c).cwiseProduct(s.col(c + 1)) - plain;
            const auto [mean, se] = mean_and_se(diff);
            rep.add(within_se("pair " + std::to_string(i) + ", a = " + format_double(a) +
                                  ": empirical a^{2H} E[s(x/a) s(y/a)] - E[s(x) s(y)]",
                              mean, 0.0, se, p.k));
        }
    }
    rep.finalize();
    return rep;
}

VerdictReport check_non_gaussian(const NonGaussianParams& p) {
    VerdictReport rep;
    rep.suite = "non-gaussian";
    const Vector x = default_point(p.domain, p.x);
    rep.config = Json{{"law", to_json(p.law)}, {"lambda", p.lambda}, {"domain", to_json(p.domain)},
                      {"x", to_json(x)},       {"n_realizations", p.n_realizations}, {"seed", p.seed}};
    raw_moment(p.law, 4);  // throws for an infinite fourth moment
    const auto quad = make_cylinder_quadrature(p.domain.dim());
    if (x.norm() == 0.0) {
        // s(0) = 0 identically: nothing to sample, only the prediction to confirm.
        const double k4 = std::abs(cumulant_pointwise(4, x, p.lambda, p.law, quad));
        rep.add(Check{"predicted fourth cumulant at the origin", k4, 0.0, std::nullopt, k4 == 0.0});
        rep.notes.push_back("s(0) = 0 identically, so every cumulant vanishes; sampling skipped");
        rep.finalize();
        return rep;
    }
    const double kappa2 = cumulant_pointwise(2, x, p.lambda, p.law, quad);
    const double kappa4 = cumulant_pointwise(4, x, p.lambda, p.law, quad);
    const auto run = ensemble(p.lambda, p.law, p.domain, p.n_realizations, {x}, p.seed, p.threads, false);
    const auto& ks = *run.summary.kstats.at(0);
    rep.add(within_se("k2 vs second cumulant", ks.k2, kappa2, ks.se_k2, p.k));
    rep.add(within_se("k4 vs fourth cumulant", ks.k4, kappa4, ks.se_k4, p.k));
    const double z0 = ks.se_k4 > 0.0 ? std::abs(ks.k4) / ks.se_k4 : kInfinity;
    rep.add(Check{"k4 distance from the Gaussian value 0, in standard errors", z0, p.k, z0, z0 >= p.k});
    rep.notes.push_back("predicted excess kurtosis kappa4 / kappa2^2 = " + format_double(kappa4 / (kappa2 * kappa2)) +
                        ", which decays like 1 / lambda");
    rep.finalize();
    return rep;
}

VerdictReport check_gaussian_limit(const GaussianLimitParams& p) {
    VerdictReport rep;
    rep.suite = "gaussian-limit";
    const Vector x = default_point(p.domain, p.x);
    if (p.lambdas.empty() || !std::is_sorted(p.lambdas.begin(), p.lambdas.end())) {
        throw InvalidArgument("the rate ladder must be non-empty and ascending");
    }
    if (!(p.b > 0.0)) throw InvalidArgument("limit scale must be positive");
    rep.config = Json{{"lambdas", ladder_json(p.lambdas)}, {"b", p.b},    {"domain", to_json(p.domain)},
                      {"x", to_json(x)}, {"n_realizations", p.n_realizations}, {"seed", p.seed},
                      {"mutation", to_string(p.mutation)}};

    const auto quad = make_cylinder_quadrature(p.domain.dim());
    // SaS(2, c) is N(0, 2 c^2); the limit has variance 2 b^2 times the integral of k_x^2.
    const double sd = std::numbers::sqrt2 * stable_marginal_scale(x, 2.0, p.b, quad);
    const double n = static_cast<double>(p.n_realizations);
    const double ks_se = kKolmogorovSd / std::sqrt(n);
    std::vector<Vector> freqs;
    for (int j = 1; j <= 8; ++j) freqs.push_back(Vector::Constant(1, 0.25 * j / sd));

    for (std::size_t i = 0; i < p.lambdas.size(); ++i) {
        const double lambda = p.lambdas[i];
        const double c = p.mutation == Mutation::variance ? p.b : p.b / std::sqrt(lambda);
        const auto run = ensemble(lambda, WeightLaw::symmetric_stable(2.0, c), p.domain, p.n_realizations, {x},
                                  derive_seed(p.seed, kLadderStream + i), p.threads, true, {}, freqs);
        LadderRow row{lambda, ks_distance(run.samples.col(0), [sd](double t) { return normal_cdf(t, sd); }),
                      ks_critical_1pct(p.n_realizations), 0.0};
        for (const auto& cf : run.summary.cf) {
            const double pred = std::exp(-0.5 * sd * sd * cf.xi[0] * cf.xi[0]);
            row.cf_distance = std::max(row.cf_distance, std::abs(cf.value - pred));
        }
        rep.ladder.push_back(row);
    }
    for (std::size_t i = 1; i < rep.ladder.size(); ++i) {
        const double rise = rep.ladder[i].ks - rep.ladder[i - 1].ks;
        const double tol = p.monotone_k * std::numbers::sqrt2 * ks_se;
        rep.add(Check{"KS change from lambda = " + format_double(rep.ladder[i - 1].lambda) + " to " +
                          format_double(rep.ladder[i].lambda),
                      rise, tol, rise / (std::numbers::sqrt2 * ks_se), rise <= tol});
    }
    const auto& last = rep.ladder.back();
    rep.add(Check{"KS at lambda = " + format_double(last.lambda) + " vs the 1% critical value", last.ks, last.ks_critical,
                  last.ks / ks_se, last.ks < last.ks_critical});
    rep.notes.push_back("marginal law at a single point only; convergence of the full process law is not tested");
    rep.finalize();
    return rep;
}

VerdictReport check_stable_limit(const StableLimitParams& p) {
    VerdictReport rep;
    rep.suite = "stable-limit";
    const Vector x = default_point(p.domain, p.x);
    if (p.lambdas.empty() || !std::is_sorted(p.lambdas.begin(), p.lambdas.end())) {
        throw InvalidArgument("the rate ladder must be non-empty and ascending");
    }
    if (p.frequencies.empty()) throw InvalidArgument("the stable suite needs frequencies");
    rep.config = Json{{"alpha", p.alpha}, {"lambdas", ladder_json(p.lambdas)}, {"b", p.b},
                      {"domain", to_json(p.domain)}, {"x", to_json(x)}, {"n_realizations", p.n_realizations},
                      {"frequencies", p.frequencies}, {"seed", p.seed}, {"slope_rel_tol", p.slope_rel_tol}};

    const auto quad = make_cylinder_quadrature(p.domain.dim());
    const double scale = stable_marginal_scale(x, p.alpha, p.b, quad);
    const double n = static_cast<double>(p.n_realizations);
    std::vector<Vector> freqs;
    for (double xi : p.frequencies) freqs.push_back(Vector::Constant(1, xi));

    std::vector<CfEstimate> last_cf;
    for (std::size_t i = 0; i < p.lambdas.size(); ++i) {
        const double lambda = p.lambdas[i];
        const auto law = WeightLaw::symmetric_stable(p.alpha, p.b * std::pow(lambda, -1.0 / p.alpha));
        const auto run = ensemble(lambda, law, p.domain, p.n_realizations, {x},
                                  derive_seed(p.seed, kLadderStream + i), p.threads, p.alpha == 2.0, {}, freqs);
        LadderRow row{lambda, std::numeric_limits<double>::quiet_NaN(), ks_critical_1pct(p.n_realizations), 0.0};
        if (p.alpha == 2.0) {
            const double sd = std::numbers::sqrt2 * scale;
            row.ks = ks_distance(run.samples.col(0), [sd](double t) { return normal_cdf(t, sd); });
        }
        for (const auto& cf : run.summary.cf) {
            row.cf_distance = std::max(row.cf_distance, std::abs(cf.value - stable_cf(scale, p.alpha, cf.xi[0])));
        }
        rep.ladder.push_back(row);
        last_cf = run.summary.cf;
    }

    // log|phi(xi)| = -scale^alpha |xi|^alpha: least squares through the origin.
    double sxy = 0.0, sxx = 0.0;
    for (const auto& cf : last_cf) {
        const double u = std::pow(std::abs(cf.xi[0]), p.alpha);
        sxy += u * std::log(std::abs(cf.value));
        sxx += u * u;
    }
    const double slope = sxy / sxx;
    const double target = -std::pow(scale, p.alpha);
    const double rel = std::abs(slope - target) / std::abs(target);
    rep.add(Check{"log|CF| slope vs -scale^alpha, relative error (slope " + format_double(slope) + ", predicted " +
                      format_double(target) + ")",
                  rel, p.slope_rel_tol, std::nullopt, rel <= p.slope_rel_tol});
    for (const auto& cf : last_cf) {
        const double pred = stable_cf(scale, p.alpha, cf.xi[0]);
        const double stat = std::max(std::abs(cf.value.real() - pred), std::abs(cf.value.imag()));
        const double se = cf.se();
        rep.add(Check{"CF at xi = " + format_double(cf.xi[0]) + " vs the stable limit", stat, p.k * se,
                      se > 0.0 ? std::optional(stat / se) : std::nullopt, stat <= p.k * se});
    }
    rep.notes.push_back("predicted scale " + format_double(scale) + " at lambda = " +
                        format_double(p.lambdas.back()) + " with " + format_double(n) + " realizations");
    rep.notes.push_back("marginal law at a single point only; convergence of the full process law is not tested");
    rep.finalize();
    return rep;
}

}  // namespace relup
