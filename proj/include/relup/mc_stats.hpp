#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relup/geometry.hpp"
#include "relup/process.hpp"
#include "relup/weight_laws.hpp"

namespace relup {

struct EnsembleConfig {
    double lambda = 1.0;
    WeightLaw law = WeightLaw::gaussian(1.0);
    Domain domain = Domain::ball(2, 1.0);
    std::size_t n_realizations = 2;
    std::vector<Vector> eval_points;
    /// Joint frequencies, one entry per eval point.
    std::vector<Vector> cf_frequencies;
    std::uint64_t master_seed = 0;

    /// Hard cap on the number of neurons drawn over the whole run.
    std::uint64_t max_total_neurons = 20'000'000'000ULL;
    unsigned threads = 1;
    bool keep_samples = false;

    SamplerOptions sampler;
    KernelPerturbation perturbation;
};

struct CfEstimate {
    Vector xi;
    std::complex<double> value;
    double se_re = 0.0;
    double se_im = 0.0;

    /// Comparisons use the larger of the two component errors.
    double se() const noexcept { return std::max(se_re, se_im); }
};

struct KStatistics {
    double k2 = 0.0;
    double k4 = 0.0;
    double se_k2 = 0.0;
    double se_k4 = 0.0;
};

struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::string seed_rule;
    std::size_t n_realizations = 0;
};

/// Moment-based fields (means, covariances, k-statistics) are left empty
/// when the weight law has infinite variance; only the CF table is filled.
struct EnsembleSummary {
    std::vector<double> mean;
    std::vector<double> mean_se;
    std::optional<Matrix> covariance;
    std::optional<Matrix> covariance_se;
    /// Per point; empty for fewer than 8 realizations.
    std::vector<std::optional<KStatistics>> kstats;
    std::vector<CfEstimate> cf;
    std::vector<std::int64_t> widths;
    Provenance provenance;
};

struct EnsembleRun {
    EnsembleSummary summary;
    /// n_realizations x m, row i holds s(x_1..x_m) of realization i.
    /// Filled only with keep_samples.
    Matrix samples;
};

/// Seed rule used by run_ensemble, recorded in provenance.
inline constexpr const char* kSeedRule = "splitmix64(splitmix64(master) + 0x9e3779b97f4a7c15 * (i + 1))";

/// Realization i uses derive_seed(master_seed, i). The per-realization values
/// are buffered and reduced in index order, so the summary does not depend on
/// the thread count.
EnsembleRun run_ensemble(const EnsembleConfig& cfg);

/// Stable 64-bit hash of the canonical JSON form of a config.
std::uint64_t config_hash(const EnsembleConfig& cfg);

/// (1/n) sum_i exp(i <samples.row(i), xi>) with component standard errors.
CfEstimate empirical_cf(const Matrix& samples, const Vector& xi);

/// Unbiased k-statistics k2, k4 with leave-one-out jackknife errors. n >= 8.
KStatistics k_statistics(const Eigen::Ref<const Vector>& samples);

/// sup |F_n - F|. Takes a copy of the samples for sorting.
double ks_distance(const Eigen::Ref<const Vector>& samples, const std::function<double(double)>& cdf);

/// Asymptotic P(sqrt(n) D > d) with the Stephens small-sample correction.
double kolmogorov_pvalue(double d, std::size_t n);

/// 1%-level critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

/// Sampling standard deviation of sqrt(n) D under the null (Kolmogorov law).
inline constexpr double kKolmogorovSd = 0.26050;

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int bins = 0;
};

/// Pearson chi-square of integer counts against Poisson(mean); adjacent
/// values are pooled until every bin expects at least 5 observations.
ChiSquareResult poisson_gof(const std::vector<std::int64_t>& counts, double mean);

/// Sample mean and its standard error.
std::pair<double, double> mean_and_se(const Eigen::Ref<const Vector>& x);

}  // namespace relup
