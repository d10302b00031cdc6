#include "relup/mc_stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "relup/errors.hpp"
#include "relup/rng.hpp"
#include "relup/serialization.hpp"

namespace relup {

namespace {

void validate(const EnsembleConfig& cfg) {
    if (cfg.n_realizations < 2) throw InvalidArgument("an ensemble needs at least 2 realizations");
    if (cfg.eval_points.empty()) throw InvalidArgument("an ensemble needs at least one evaluation point");
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) throw InvalidArgument("rate must be positive");
    for (const auto& x : cfg.eval_points) {
        if (x.size() != cfg.domain.dim()) throw DimensionMismatch("evaluation point does not match the domain");
    }
    for (const auto& xi : cfg.cf_frequencies) {
        if (xi.size() != static_cast<Eigen::Index>(cfg.eval_points.size())) {
            throw DimensionMismatch("a frequency needs one entry per evaluation point");
        }
    }
}

// Power sums S_r = sum z^r of centered data.
struct PowerSums {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
};

double k2_from(const PowerSums& p, double n) { return (n * p.s2 - p.s1 * p.s1) / (n * (n - 1.0)); }

double k4_from(const PowerSums& p, double n) {
    const double s1 = p.s1, s2 = p.s2, s3 = p.s3, s4 = p.s4;
    const double num = -6.0 * s1 * s1 * s1 * s1 + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2 -
                       4.0 * n * (n + 1.0) * s1 * s3 + n * n * (n + 1.0) * s4;
    return num / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
}

double sample_sd(const std::vector<double>& x, double mean) {
    CompensatedSum ss;
    for (double v : x) ss.add((v - mean) * (v - mean));
    return std::sqrt(ss.value() / static_cast<double>(x.size() - 1));
}

}  // namespace

std::pair<double, double> mean_and_se(const Eigen::Ref<const Vector>& x) {
    const auto n = x.size();
    if (n < 2) throw InvalidArgument("need at least 2 samples");
    CompensatedSum s;
    for (Eigen::Index i = 0; i < n; ++i) s.add(x[i]);
    const double mean = s.value() / static_cast<double>(n);
    CompensatedSum ss;
    for (Eigen::Index i = 0; i < n; ++i) ss.add((x[i] - mean) * (x[i] - mean));
    const double var = ss.value() / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

CfEstimate empirical_cf(const Matrix& samples, const Vector& xi) {
    const auto n = samples.rows();
    if (n < 2) throw InvalidArgument("empirical characteristic function needs at least 2 samples");
    if (xi.size() != samples.cols()) throw DimensionMismatch("frequency does not match the sample width");
    const Vector phase = samples * xi;
    const Vector re = phase.array().cos().matrix();
    const Vector im = phase.array().sin().matrix();
    const auto [mr, sr] = mean_and_se(re);
    const auto [mi, si] = mean_and_se(im);
    return CfEstimate{xi, {mr, mi}, sr, si};
}

KStatistics k_statistics(const Eigen::Ref<const Vector>& samples) {
    const auto n_i = samples.size();
    if (n_i < 8) throw InvalidArgument("k-statistics need at least 8 samples");
    const double n = static_cast<double>(n_i);

    // Centering leaves the k-statistics unchanged and keeps the power sums
    // well conditioned.
    CompensatedSum mean_acc;
    for (Eigen::Index i = 0; i < n_i; ++i) mean_acc.add(samples[i]);
    const double center = mean_acc.value() / n;
    CompensatedSum a1, a2, a3, a4;
    for (Eigen::Index i = 0; i < n_i; ++i) {
        const double z = samples[i] - center;
        const double z2 = z * z;
        a1.add(z);
        a2.add(z2);
        a3.add(z2 * z);
        a4.add(z2 * z2);
    }
    const PowerSums full{a1.value(), a2.value(), a3.value(), a4.value()};
    KStatistics out;
    out.k2 = k2_from(full, n);
    out.k4 = k4_from(full, n);

    // Leave-one-out replicates from the full sums.
    std::vector<double> loo2(static_cast<std::size_t>(n_i));
    std::vector<double> loo4(static_cast<std::size_t>(n_i));
    CompensatedSum m2, m4;
    for (Eigen::Index i = 0; i < n_i; ++i) {
        const double z = samples[i] - center;
        const double z2 = z * z;
        const PowerSums p{full.s1 - z, full.s2 - z2, full.s3 - z2 * z, full.s4 - z2 * z2};
        loo2[static_cast<std::size_t>(i)] = k2_from(p, n - 1.0);
        loo4[static_cast<std::size_t>(i)] = k4_from(p, n - 1.0);
        m2.add(loo2[static_cast<std::size_t>(i)]);
        m4.add(loo4[static_cast<std::size_t>(i)]);
    }
    const double bar2 = m2.value() / n;
    const double bar4 = m4.value() / n;
    CompensatedSum v2, v4;
    for (std::size_t i = 0; i < loo2.size(); ++i) {
        v2.add((loo2[i] - bar2) * (loo2[i] - bar2));
        v4.add((loo4[i] - bar4) * (loo4[i] - bar4));
    }
    out.se_k2 = std::sqrt((n - 1.0) / n * v2.value());
    out.se_k4 = std::sqrt((n - 1.0) / n * v4.value());
    return out;
}

double ks_distance(const Eigen::Ref<const Vector>& samples, const std::function<double(double)>& cdf) {
    std::vector<double> x(samples.data(), samples.data() + samples.size());
    if (x.empty()) return 0.0;
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = std::clamp(cdf(x[i]), 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

double kolmogorov_pvalue(double d, std::size_t n) {
    if (n == 0) throw InvalidArgument("KS p-value needs at least one sample");
    const double sn = std::sqrt(static_cast<double>(n));
    const double t = (sn + 0.12 + 0.11 / sn) * d;
    if (t < 0.2) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        q += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

ChiSquareResult poisson_gof(const std::vector<std::int64_t>& counts, double mean) {
    if (counts.empty()) throw InvalidArgument("goodness of fit needs observations");
    if (!(mean > 0.0)) throw InvalidArgument("Poisson mean must be positive");
    const double n = static_cast<double>(counts.size());
    const auto max_count = *std::max_element(counts.begin(), counts.end());
    std::vector<double> observed(static_cast<std::size_t>(max_count) + 1, 0.0);
    for (auto c : counts) {
        if (c < 0) throw InvalidArgument("counts must be non-negative");
        observed[static_cast<std::size_t>(c)] += 1.0;
    }

    // Expected counts per value; the last bin absorbs the upper tail.
    std::vector<double> expected(observed.size());
    for (std::size_t k = 0; k < expected.size(); ++k) {
        const double log_pmf = -mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0);
        expected[k] = n * std::exp(log_pmf);
    }
    expected.back() = n * boost::math::gamma_p(static_cast<double>(expected.size() - 1), mean);
    if (expected.size() == 1) expected.back() = n;

    // Pool from the left until each bin expects >= 5, then fold a short
    // final bin into its neighbour.
    std::vector<std::pair<double, double>> bins;  // (observed, expected)
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        o_acc += observed[k];
        e_acc += expected[k];
        if (e_acc >= 5.0) {
            bins.emplace_back(o_acc, e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (bins.empty()) {
            bins.emplace_back(o_acc, e_acc);
        } else {
            bins.back().first += o_acc;
            bins.back().second += e_acc;
        }
    }

    ChiSquareResult r;
    r.bins = static_cast<int>(bins.size());
    for (const auto& [o, e] : bins) r.statistic += (o - e) * (o - e) / e;
    r.dof = r.bins - 1;
    r.p_value = r.dof > 0 ? boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic) : 1.0;
    return r;
}

std::uint64_t config_hash(const EnsembleConfig& cfg) { return fnv1a64(to_json(cfg).dump()); }

EnsembleRun run_ensemble(const EnsembleConfig& cfg) {
    validate(cfg);
    const std::size_t n = cfg.n_realizations;
    const auto m = static_cast<Eigen::Index>(cfg.eval_points.size());
    const double expected_neurons = cfg.lambda * measure_Z(cfg.domain) * static_cast<double>(n);
    if (expected_neurons > static_cast<double>(cfg.max_total_neurons)) {
        throw ResourceLimit("expected " + std::to_string(expected_neurons) + " neurons exceeds the cap of " +
                            std::to_string(cfg.max_total_neurons));
    }

    Matrix points(cfg.domain.dim(), m);
    for (Eigen::Index j = 0; j < m; ++j) points.col(j) = cfg.eval_points[static_cast<std::size_t>(j)];

    Matrix samples(static_cast<Eigen::Index>(n), m);
    std::vector<std::int64_t> widths(n);
    std::atomic<std::uint64_t> total{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end && !failed.load(std::memory_order_relaxed); ++i) {
                const auto r = sample_realization(cfg.lambda, cfg.law, cfg.domain, derive_seed(cfg.master_seed, i),
                                                  cfg.sampler);
                const auto w = static_cast<std::uint64_t>(r.width());
                if (total.fetch_add(w, std::memory_order_relaxed) + w > cfg.max_total_neurons) {
                    throw ResourceLimit("total neuron count exceeded the cap of " +
                                        std::to_string(cfg.max_total_neurons));
                }
                widths[i] = r.width();
                samples.row(static_cast<Eigen::Index>(i)) = evaluate_many(r, points, cfg.perturbation).transpose();
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, n);
    if (threads == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t b = t * chunk;
            const std::size_t e = std::min(n, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    EnsembleRun run;
    auto& s = run.summary;
    const bool finite_variance = has_finite_variance(cfg.law);
    s.kstats.assign(static_cast<std::size_t>(m), std::nullopt);
    if (finite_variance) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto [mu, se] = mean_and_se(samples.col(j));
            s.mean.push_back(mu);
            s.mean_se.push_back(se);
        }
        Matrix cov(m, m), cov_se(m, m);
        std::vector<double> prod(n);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index l = j; l < m; ++l) {
                CompensatedSum acc;
                for (std::size_t i = 0; i < n; ++i) {
                    const auto ii = static_cast<Eigen::Index>(i);
                    prod[i] = (samples(ii, j) - s.mean[static_cast<std::size_t>(j)]) *
                              (samples(ii, l) - s.mean[static_cast<std::size_t>(l)]);
                    acc.add(prod[i]);
                }
                const double c = acc.value() / static_cast<double>(n - 1);
                const double se = sample_sd(prod, acc.value() / static_cast<double>(n)) /
                                  std::sqrt(static_cast<double>(n));
                cov(j, l) = cov(l, j) = c;
                cov_se(j, l) = cov_se(l, j) = se;
            }
        }
        s.covariance = std::move(cov);
        s.covariance_se = std::move(cov_se);
        if (n >= 8) {
            for (Eigen::Index j = 0; j < m; ++j) s.kstats[static_cast<std::size_t>(j)] = k_statistics(samples.col(j));
        }
    }

    for (const auto& xi : cfg.cf_frequencies) s.cf.push_back(empirical_cf(samples, xi));
    s.widths = std::move(widths);
    s.provenance = Provenance{config_hash(cfg), cfg.master_seed, kSeedRule, n};
    if (cfg.keep_samples) run.samples = std::move(samples);
    return run;
}

}  // namespace relup
