#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relup/geometry.hpp"
#include "relup/serialization.hpp"
#include "relup/verify.hpp"
#include "relup/weight_laws.hpp"

namespace relup {

/// Regular grid over a box. Points are listed row-major: the last
/// coordinate varies fastest.
struct GridSpec {
    Matrix bounds;  ///< d x 2, columns lo and hi
    std::vector<int> resolution;

    Eigen::Index size() const;
    Vector point(Eigen::Index flat) const;
};

struct RunConfig {
    Domain domain = Domain::ball(2, 1.0);
    WeightLaw law = WeightLaw::gaussian(1.0);
    /// A single rate, or the rungs of a ladder in ascending order.
    std::vector<double> lambdas = {1.0};
    bool ladder = false;
    std::uint64_t seed = 0;
    std::optional<GridSpec> grid;

    struct Ensemble {
        std::size_t n = 1000;
        std::vector<Vector> eval_points;
        std::vector<Vector> frequencies;
        bool write_samples = false;
    } ensemble;

    struct Oracle {
        std::vector<std::pair<Vector, Vector>> pairs;
        std::size_t random_pairs = 0;
        std::size_t rotations = 0;
        int sphere_resolution = 0;
    } oracle;

    struct Verify {
        std::vector<std::string> suites;
        /// Multiplies every Monte Carlo sample count; 1 is the acceptance scale.
        double scale = 1.0;
        /// Per-suite parameter overrides, keyed by suite name.
        Json params = Json::object();
    } verify;

    std::uint64_t max_total_neurons = 20'000'000'000ULL;
    unsigned threads = 1;
    std::filesystem::path out_dir = "out";
};

/// Every suite, in the order `verify` runs them by default.
const std::vector<std::string>& suite_names();

/// Validates the document; unknown keys anywhere are a ConfigError.
RunConfig parse_run_config(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical form of a config. Parsing it back gives the same config.
Json to_json(const RunConfig& cfg);
Json to_json(const GridSpec& grid);

/// Header x1..xd,s,grad_norm and one row per grid point.
std::string grid_csv(const Realization& r, const GridSpec& grid);

struct CommandResult {
    int exit_code = 0;
    std::vector<std::filesystem::path> files;
};

/// Realization JSON per rate, plus the grid CSV when a grid is configured.
CommandResult cmd_sample(const RunConfig& cfg);
/// Closed-form and quadrature moments with agreement diagnostics.
CommandResult cmd_oracle(const RunConfig& cfg);
/// Ensemble summary per rate, plus the sample CSV on request.
CommandResult cmd_ensemble(const RunConfig& cfg);
/// Runs the configured suites (or `only` when non-empty). Exit code 0 iff
/// every suite passes.
CommandResult cmd_verify(const RunConfig& cfg, const std::vector<std::string>& only = {},
                         Mutation mutation = Mutation::none);
/// Limit ladder of the configured law: Gaussian limit for finite variance
/// laws, stable limit for symmetric stable ones. Writes the report and a
/// CSV with one row per rate.
CommandResult cmd_limit_study(const RunConfig& cfg);

/// Suite by name, built from the config and its overrides.
VerdictReport run_suite(const std::string& name, const RunConfig& cfg, Mutation mutation = Mutation::none);

}  // namespace relup
