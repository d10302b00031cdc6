#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relup/geometry.hpp"
#include "relup/serialization.hpp"
#include "relup/weight_laws.hpp"

namespace relup {

struct Check {
    std::string description;
    double statistic = 0.0;
    /// Tolerance the statistic is compared against.
    double threshold = 0.0;
    /// Deviation in standard errors, when the check is a Monte Carlo one.
    std::optional<double> z;
    bool pass = false;
};

/// One rung of a limit ladder.
struct LadderRow {
    double lambda = 0.0;
    double ks = 0.0;  ///< NaN when no closed CDF is available
    double ks_critical = 0.0;
    double cf_distance = 0.0;  ///< max over the frequency grid
};

struct VerdictReport {
    std::string suite;
    std::vector<Check> checks;
    bool pass = false;
    Json config;
    std::vector<std::string> notes;
    std::vector<LadderRow> ladder;

    void add(Check c);
    /// pass = every check passed (and at least one check ran).
    void finalize();
};

Json to_json(const VerdictReport& r);

/// Negative controls. Each one targets a single suite and must make it fail.
enum class Mutation {
    none,
    h1,          ///< shift h1 in the kernel (boundary)
    directions,  ///< non-uniform direction sampler (isotropy)
    hurst,       ///< assert H = 1.4 instead of 3/2 (self-similarity)
    variance,    ///< drop the 1/lambda weight scaling (Gaussian limit)
};

Mutation parse_mutation(std::string_view name);
std::string to_string(Mutation m);

/// |observed - expected| <= k se.
Check within_se(std::string description, double observed, double expected, double se, double k = 5.0);

// ---------------------------------------------------------------------------
// Suite parameters. Defaults are the desk-scale acceptance settings.
// ---------------------------------------------------------------------------

struct BoundaryParams {
    std::size_t n_realizations = 1000;
    double lambda = 10.0;
    WeightLaw law = WeightLaw::gaussian(1.0);
    Domain domain = Domain::ball(2, 1.0);
    std::uint64_t seed = 1;
    double rel_tol = 1e-9;
    Mutation mutation = Mutation::none;
};

struct WidthParams {
    double lambda = 100.0;
    Domain domain = Domain::ball(2, 1.0);
    std::size_t n_seeds = 10000;
    std::uint64_t seed = 2;
    double significance = 1e-3;
    double k = 5.0;
};

struct SecondOrderParams {
    WeightLaw law = WeightLaw::two_point(1.0);
    double lambda = 5.0;
    Domain domain = Domain::ball(2, 1.0);
    std::size_t n_realizations = 100000;
    std::size_t n_pairs = 10;
    /// Pairs used verbatim instead of random ones when non-empty.
    std::vector<std::pair<Vector, Vector>> pairs;
    std::uint64_t seed = 3;
    double k = 5.0;
    double oracle_rel_tol = 1e-6;
    unsigned threads = 1;
};

struct IsotropyParams {
    WeightLaw law = WeightLaw::two_point(1.0);
    double lambda = 5.0;
    Domain domain = Domain::ball(2, 1.0);
    std::size_t n_realizations = 100000;
    std::size_t n_points = 3;
    std::size_t n_frequencies = 8;
    std::size_t n_rotations = 3;
    /// Rotations used verbatim instead of random ones when non-empty.
    std::vector<Matrix> rotations;
    std::uint64_t seed = 4;
    double k = 5.0;
    double closed_tol = 1e-12;
    Mutation mutation = Mutation::none;
    unsigned threads = 1;
};

struct SelfSimilarityParams {
    WeightLaw law = WeightLaw::two_point(1.0);
    double lambda = 5.0;
    Domain domain = Domain::ball(2, 1.0);
    std::size_t n_realizations = 100000;
    std::vector<double> scales = {0.5, 2.0, 10.0};
    std::size_t n_pairs = 4;
    std::uint64_t seed = 5;
    double hurst = 1.5;
    double k = 5.0;
    double closed_tol = 1e-12;
    Mutation mutation = Mutation::none;
    unsigned threads = 1;
};

struct NonGaussianParams {
    WeightLaw law = WeightLaw::two_point(1.0);
    double lambda = 1.0;
    Domain domain = Domain::ball(2, 1.0);
    /// Empty selects (1, 0, ..., 0) scaled to the domain.
    Vector x;
    std::size_t n_realizations = 1000000;
    std::uint64_t seed = 6;
    double k = 5.0;
    unsigned threads = 1;
};

struct GaussianLimitParams {
    std::vector<double> lambdas = {1.0, 10.0, 100.0, 1000.0};
    double b = 1.0;
    Domain domain = Domain::ball(2, 1.0);
    Vector x;
    std::size_t n_realizations = 10000;
    std::uint64_t seed = 7;
    /// Allowed KS increase between rungs, in standard errors of the difference.
    double monotone_k = 2.0;
    Mutation mutation = Mutation::none;
    unsigned threads = 1;
};

struct StableLimitParams {
    double alpha = 1.25;
    std::vector<double> lambdas = {1.0, 10.0, 100.0, 1000.0};
    double b = 1.0;
    Domain domain = Domain::ball(2, 1.0);
    Vector x;
    std::size_t n_realizations = 100000;
    std::vector<double> frequencies = {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5};
    std::uint64_t seed = 8;
    double slope_rel_tol = 0.05;
    double k = 5.0;
    unsigned threads = 1;
};

VerdictReport check_boundary(const BoundaryParams& p);
VerdictReport check_width(const WidthParams& p);
VerdictReport check_second_order(const SecondOrderParams& p);
VerdictReport check_isotropy(const IsotropyParams& p);
VerdictReport check_self_similarity(const SelfSimilarityParams& p);
VerdictReport check_non_gaussian(const NonGaussianParams& p);
VerdictReport check_gaussian_limit(const GaussianLimitParams& p);
VerdictReport check_stable_limit(const StableLimitParams& p);

/// Uniform random rotation (Haar on SO(d)).
Matrix random_rotation(int d, Rng& rng);

/// Uniform point in the ball of the given radius.
Vector random_point_in_ball(int d, double radius, Rng& rng);

}  // namespace relup
