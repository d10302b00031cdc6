#include "relup/cli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>
#include <variant>

#include "relup/errors.hpp"
#include "relup/mc_stats.hpp"
#include "relup/oracle.hpp"
#include "relup/quadrature.hpp"

namespace relup {

namespace {

namespace fs = std::filesystem;

double get_number(const Json& j, std::string_view what) {
    if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
    return j.get<double>();
}

double get_positive(const Json& j, std::string_view what) {
    const double x = get_number(j, what);
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive");
    return x;
}

std::uint64_t get_count(const Json& j, std::string_view what) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw ConfigError(std::string(what) + " must be a non-negative integer");
}

bool get_bool(const Json& j, std::string_view what) {
    if (!j.is_boolean()) throw ConfigError(std::string(what) + " must be true or false");
    return j.get<bool>();
}

std::vector<double> number_list(const Json& j, std::string_view what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty array");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(get_number(e, what));
    return out;
}

std::vector<Vector> point_list(const Json& j, std::string_view what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of vectors");
    std::vector<Vector> out;
    for (const auto& e : j) out.push_back(vector_from_json(e, what));
    return out;
}

Json point_list_json(const std::vector<Vector>& pts) {
    Json j = Json::array();
    for (const auto& p : pts) j.push_back(to_json(p));
    return j;
}

std::vector<double> ladder_from_json(const Json& j) {
    auto lambdas = number_list(j, "lambda_ladder");
    for (double l : lambdas) get_positive(Json(l), "lambda_ladder entries");
    if (!std::is_sorted(lambdas.begin(), lambdas.end()) ||
        std::adjacent_find(lambdas.begin(), lambdas.end()) != lambdas.end()) {
        throw ConfigError("lambda_ladder must be strictly increasing");
    }
    return lambdas;
}

template <class F>
Domain or_throw_config(F f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

GridSpec grid_from_json(const Json& j, const Domain& domain) {
    require_keys(j, {"bounds", "resolution"}, "grid");
    const auto d = domain.dim();
    GridSpec g;
    g.bounds.resize(d, 2);
    if (j.contains("bounds")) {
        const auto& b = j["bounds"];
        if (!b.is_array() || static_cast<int>(b.size()) != d) {
            throw ConfigError("grid.bounds needs one [lo, hi] pair per dimension");
        }
        for (int i = 0; i < d; ++i) {
            const Vector lohi = vector_from_json(b[i], "grid.bounds");
            if (lohi.size() != 2 || !(lohi[0] < lohi[1])) throw ConfigError("grid.bounds entries must be [lo, hi], lo < hi");
            g.bounds.row(i) = lohi.transpose();
        }
    } else {
        const double h = domain.scale();
        g.bounds.col(0).setConstant(-h);
        g.bounds.col(1).setConstant(h);
    }
    if (!j.contains("resolution")) throw ConfigError("grid.resolution is required");
    const auto& r = j["resolution"];
    if (r.is_array()) {
        if (static_cast<int>(r.size()) != d) throw ConfigError("grid.resolution needs one entry per dimension");
        for (const auto& e : r) g.resolution.push_back(static_cast<int>(get_count(e, "grid.resolution")));
    } else {
        g.resolution.assign(static_cast<std::size_t>(d), static_cast<int>(get_count(r, "grid.resolution")));
    }
    for (int n : g.resolution) {
        if (n < 1 || n > 1 << 16) throw ConfigError("grid.resolution entries must lie in 1..65536");
    }
    if (g.size() > (Eigen::Index(1) << 26)) throw ConfigError("grid has more than 2^26 points");
    return g;
}

// ---------------------------------------------------------------------------
// Suite parameters from config
// ---------------------------------------------------------------------------

std::size_t scaled(std::size_t n, double scale, std::size_t floor = 8) {
    return std::max(floor, static_cast<std::size_t>(std::llround(static_cast<double>(n) * scale)));
}

struct Overrides {
    const Json& j;
    std::string_view suite;

    bool has(const char* key) const { return j.contains(key); }
    std::string what(const char* key) const { return std::string(suite) + "." + key; }
    std::size_t count(const char* key, std::size_t fallback) const {
        return has(key) ? static_cast<std::size_t>(get_count(j[key], what(key))) : fallback;
    }
    double positive(const char* key, double fallback) const {
        return has(key) ? get_positive(j[key], what(key)) : fallback;
    }
    WeightLaw law(const WeightLaw& fallback) const {
        if (!has("law")) return fallback;
        return law_from_json(j["law"]);
    }
    Domain domain(const Domain& fallback) const {
        return has("domain") ? or_throw_config([&] { return domain_from_json(j["domain"]); }) : fallback;
    }
    Vector point(const Vector& fallback) const { return has("x") ? vector_from_json(j["x"], what("x")) : fallback; }
    std::vector<double> ladder(const std::vector<double>& fallback) const {
        return has("lambdas") ? ladder_from_json(j["lambdas"]) : fallback;
    }
};

const Json& suite_overrides(const RunConfig& cfg, const std::string& name) {
    static const Json empty = Json::object();
    return cfg.verify.params.contains(name) ? cfg.verify.params[name] : empty;
}

std::size_t suite_index(const std::string& name) {
    const auto& names = suite_names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown suite '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> scale_list(const Json& j, std::string_view what) {
    auto xs = number_list(j, what);
    for (double a : xs) get_positive(Json(a), what);
    return xs;
}

void check_point_dim(const Vector& x, const Domain& domain, std::string_view what) {
    if (x.size() != 0 && x.size() != domain.dim()) {
        throw ConfigError(std::string(what) + " does not match the domain dimension");
    }
}

VerdictReport build_and_run(const std::string& name, const RunConfig& cfg, Mutation mutation, bool run) {
    const Json& j = suite_overrides(cfg, name);
    const Overrides o{j, name};
    const double scale = cfg.verify.scale;
    const std::uint64_t seed = derive_seed(cfg.seed, suite_index(name));
    auto seed_of = [&] { return o.has("seed") ? get_count(j["seed"], o.what("seed")) : seed; };
    VerdictReport none;

    if (name == "boundary") {
        require_keys(j, {"n", "lambda", "law", "domain", "seed"}, name);
        BoundaryParams p;
        p.n_realizations = o.count("n", scaled(p.n_realizations, scale));
        p.lambda = o.positive("lambda", p.lambda);
        p.law = o.law(p.law);
        p.domain = o.domain(p.domain);
        p.seed = seed_of();
        p.mutation = mutation;
        return run ? check_boundary(p) : none;
    }
    if (name == "width") {
        require_keys(j, {"n", "lambda", "domain", "seed"}, name);
        WidthParams p;
        p.n_seeds = o.count("n", scaled(p.n_seeds, scale));
        p.lambda = o.positive("lambda", p.lambda);
        p.domain = o.domain(p.domain);
        p.seed = seed_of();
        return run ? check_width(p) : none;
    }
    if (name == "second-order") {
        require_keys(j, {"n", "lambda", "law", "domain", "seed", "pairs"}, name);
        SecondOrderParams p;
        p.n_realizations = o.count("n", scaled(p.n_realizations, scale));
        p.lambda = o.positive("lambda", p.lambda);
        p.law = o.law(p.law);
        p.domain = o.domain(p.domain);
        p.n_pairs = o.count("pairs", p.n_pairs);
        p.seed = seed_of();
        p.threads = cfg.threads;
        return run ? check_second_order(p) : none;
    }
    if (name == "isotropy") {
        require_keys(j, {"n", "lambda", "law", "domain", "seed", "points", "frequencies", "rotations"}, name);
        IsotropyParams p;
        p.n_realizations = o.count("n", scaled(p.n_realizations, scale));
        p.lambda = o.positive("lambda", p.lambda);
        p.law = o.law(p.law);
        p.domain = o.domain(p.domain);
        p.n_points = o.count("points", p.n_points);
        p.n_frequencies = o.count("frequencies", p.n_frequencies);
        p.n_rotations = o.count("rotations", p.n_rotations);
        p.seed = seed_of();
        p.mutation = mutation;
        p.threads = cfg.threads;
        return run ? check_isotropy(p) : none;
    }
    if (name == "self-similarity") {
        require_keys(j, {"n", "lambda", "law", "domain", "seed", "scales", "pairs"}, name);
        SelfSimilarityParams p;
        p.n_realizations = o.count("n", scaled(p.n_realizations, scale));
        p.lambda = o.positive("lambda", p.lambda);
        p.law = o.law(p.law);
        p.domain = o.domain(p.domain);
        if (o.has("scales")) p.scales = scale_list(j["scales"], o.what("scales"));
        p.n_pairs = o.count("pairs", p.n_pairs);
        p.seed = seed_of();
        p.mutation = mutation;
        p.threads = cfg.threads;
        return run ? check_self_similarity(p) : none;
    }
    if (name == "non-gaussian") {
        require_keys(j, {"n", "lambda", "law", "domain", "seed", "x"}, name);
        NonGaussianParams p;
        p.n_realizations = o.count("n", scaled(p.n_realizations, scale));
        p.lambda = o.positive("lambda", p.lambda);
        p.law = o.law(p.law);
        p.domain = o.domain(p.domain);
        p.x = o.point(p.x);
        check_point_dim(p.x, p.domain, o.what("x"));
        p.seed = seed_of();
        p.threads = cfg.threads;
        return run ? check_non_gaussian(p) : none;
    }
    if (name == "gaussian-limit") {
        require_keys(j, {"n", "lambdas", "b", "domain", "seed", "x"}, name);
        GaussianLimitParams p;
        p.n_realizations = o.count("n", scaled(p.n_realizations, scale));
        p.lambdas = o.ladder(p.lambdas);
        p.b = o.positive("b", p.b);
        p.domain = o.domain(p.domain);
        p.x = o.point(p.x);
        check_point_dim(p.x, p.domain, o.what("x"));
        p.seed = seed_of();
        p.mutation = mutation;
        p.threads = cfg.threads;
        return run ? check_gaussian_limit(p) : none;
    }
    if (name == "stable-limit") {
        require_keys(j, {"n", "alpha", "lambdas", "b", "domain", "seed", "x", "frequencies"}, name);
        StableLimitParams p;
        p.n_realizations = o.count("n", scaled(p.n_realizations, scale));
        p.alpha = o.positive("alpha", p.alpha);
        p.lambdas = o.ladder(p.lambdas);
        p.b = o.positive("b", p.b);
        p.domain = o.domain(p.domain);
        p.x = o.point(p.x);
        check_point_dim(p.x, p.domain, o.what("x"));
        if (o.has("frequencies")) p.frequencies = scale_list(j["frequencies"], o.what("frequencies"));
        p.seed = seed_of();
        p.threads = cfg.threads;
        return run ? check_stable_limit(p) : none;
    }
    throw ConfigError("unknown suite '" + name + "'");
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fs::path prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

/// `stem.ext` for a single rate, `stem_lambda<rate>.ext` on a ladder.
fs::path rung_path(const RunConfig& cfg, std::string_view stem, double lambda, std::string_view ext) {
    std::string name(stem);
    if (cfg.ladder) name += "_lambda" + format_double(lambda);
    name += ext;
    return cfg.out_dir / name;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Vector random_point_in_domain(const Domain& domain, Rng& rng) {
    if (domain.is_ball()) return random_point_in_ball(domain.dim(), domain.scale(), rng);
    Vector x(domain.dim());
    for (auto& c : x) c = domain.scale() * (2.0 * uniform01(rng) - 1.0);
    return x;
}

EnsembleConfig ensemble_config(const RunConfig& cfg, double lambda) {
    EnsembleConfig e;
    e.lambda = lambda;
    e.law = cfg.law;
    e.domain = cfg.domain;
    e.n_realizations = cfg.ensemble.n;
    e.eval_points = cfg.ensemble.eval_points;
    e.cf_frequencies = cfg.ensemble.frequencies;
    e.master_seed = cfg.seed;
    e.max_total_neurons = cfg.max_total_neurons;
    e.threads = cfg.threads;
    e.keep_samples = cfg.ensemble.write_samples;
    return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

Eigen::Index GridSpec::size() const {
    Eigen::Index n = 1;
    for (int r : resolution) n *= r;
    return n;
}

Vector GridSpec::point(Eigen::Index flat) const {
    const auto d = static_cast<Eigen::Index>(resolution.size());
    Vector x(d);
    for (Eigen::Index i = d - 1; i >= 0; --i) {
        const int n = resolution[static_cast<std::size_t>(i)];
        const auto k = flat % n;
        flat /= n;
        const double lo = bounds(i, 0), hi = bounds(i, 1);
        x[i] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(k) / (n - 1);
    }
    return x;
}

std::string grid_csv(const Realization& r, const GridSpec& grid) {
    const auto d = r.dim();
    if (static_cast<Eigen::Index>(grid.resolution.size()) != d) throw DimensionMismatch("grid does not match the realization");
    std::string out;
    for (Eigen::Index i = 0; i < d; ++i) out += "x" + std::to_string(i + 1) + ",";
    out += "s,grad_norm\n";
    const Eigen::Index total = grid.size();
    const Eigen::Index chunk = 64;
    Matrix pts(d, chunk);
    for (Eigen::Index start = 0; start < total; start += chunk) {
        const Eigen::Index m = std::min(chunk, total - start);
        for (Eigen::Index j = 0; j < m; ++j) pts.col(j) = grid.point(start + j);
        const auto block = pts.leftCols(m);
        const Vector values = evaluate_many(r, block);
        const Matrix grads = gradient_many(r, block);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                out += format_double(pts(i, j));
                out += ',';
            }
            out += format_double(values[j]);
            out += ',';
            out += format_double(grads.col(j).norm());
            out += '\n';
        }
    }
    return out;
}

Json to_json(const GridSpec& grid) {
    Json bounds = Json::array();
    for (Eigen::Index i = 0; i < grid.bounds.rows(); ++i) bounds.push_back({grid.bounds(i, 0), grid.bounds(i, 1)});
    return Json{{"bounds", bounds}, {"resolution", grid.resolution}};
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"boundary",        "width",        "second-order",   "isotropy",
                                                   "self-similarity", "non-gaussian", "gaussian-limit", "stable-limit"};
    return names;
}

RunConfig parse_run_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    require_keys(j,
                 {"domain", "law", "lambda", "lambda_ladder", "seed", "grid", "ensemble", "oracle", "verify", "limit",
                  "output", "threads"},
                 "config");
    RunConfig cfg;
    if (j.contains("domain")) cfg.domain = or_throw_config([&] { return domain_from_json(j["domain"]); });
    if (j.contains("law")) cfg.law = law_from_json(j["law"]);
    if (j.contains("lambda") && j.contains("lambda_ladder")) throw ConfigError("give either lambda or lambda_ladder");
    if (j.contains("lambda")) cfg.lambdas = {get_positive(j["lambda"], "lambda")};
    if (j.contains("lambda_ladder")) {
        cfg.lambdas = ladder_from_json(j["lambda_ladder"]);
        cfg.ladder = true;
    }
    if (j.contains("seed")) cfg.seed = get_count(j["seed"], "seed");
    if (j.contains("threads")) {
        const auto t = get_count(j["threads"], "threads");
        if (t < 1 || t > 1024) throw ConfigError("threads must lie in 1..1024");
        cfg.threads = static_cast<unsigned>(t);
    }
    if (j.contains("grid")) cfg.grid = grid_from_json(j["grid"], cfg.domain);

    if (j.contains("ensemble")) {
        const auto& e = j["ensemble"];
        require_keys(e, {"n", "eval_points", "frequencies", "write_samples"}, "ensemble");
        if (e.contains("n")) cfg.ensemble.n = static_cast<std::size_t>(get_count(e["n"], "ensemble.n"));
        if (cfg.ensemble.n < 2) throw ConfigError("ensemble.n must be at least 2");
        if (e.contains("eval_points")) cfg.ensemble.eval_points = point_list(e["eval_points"], "ensemble.eval_points");
        if (e.contains("frequencies")) cfg.ensemble.frequencies = point_list(e["frequencies"], "ensemble.frequencies");
        if (e.contains("write_samples")) cfg.ensemble.write_samples = get_bool(e["write_samples"], "ensemble.write_samples");
    }
    for (const auto& x : cfg.ensemble.eval_points) {
        if (x.size() != cfg.domain.dim()) throw ConfigError("ensemble.eval_points do not match the domain dimension");
    }
    for (const auto& xi : cfg.ensemble.frequencies) {
        if (xi.size() != static_cast<Eigen::Index>(cfg.ensemble.eval_points.size())) {
            throw ConfigError("each ensemble frequency needs one entry per eval point");
        }
    }

    if (j.contains("oracle")) {
        const auto& o = j["oracle"];
        require_keys(o, {"pairs", "random_pairs", "rotations", "sphere_resolution"}, "oracle");
        if (o.contains("pairs")) {
            if (!o["pairs"].is_array()) throw ConfigError("oracle.pairs must be an array of [x, y]");
            for (const auto& p : o["pairs"]) {
                if (!p.is_array() || p.size() != 2) throw ConfigError("oracle.pairs entries must be [x, y]");
                auto x = vector_from_json(p[0], "oracle.pairs");
                auto y = vector_from_json(p[1], "oracle.pairs");
                if (x.size() != cfg.domain.dim() || y.size() != cfg.domain.dim()) {
                    throw ConfigError("oracle.pairs do not match the domain dimension");
                }
                cfg.oracle.pairs.emplace_back(std::move(x), std::move(y));
            }
        }
        if (o.contains("random_pairs")) cfg.oracle.random_pairs = get_count(o["random_pairs"], "oracle.random_pairs");
        if (o.contains("rotations")) cfg.oracle.rotations = get_count(o["rotations"], "oracle.rotations");
        if (o.contains("sphere_resolution")) {
            cfg.oracle.sphere_resolution = static_cast<int>(get_count(o["sphere_resolution"], "oracle.sphere_resolution"));
        }
    }

    if (j.contains("verify")) {
        const auto& v = j["verify"];
        require_keys(v, {"suites", "scale", "params"}, "verify");
        if (v.contains("suites")) {
            if (!v["suites"].is_array()) throw ConfigError("verify.suites must be an array of names");
            for (const auto& s : v["suites"]) {
                if (!s.is_string()) throw ConfigError("verify.suites must be an array of names");
                suite_index(s.get<std::string>());
                cfg.verify.suites.push_back(s.get<std::string>());
            }
        }
        if (v.contains("scale")) cfg.verify.scale = get_positive(v["scale"], "verify.scale");
        if (v.contains("params")) {
            if (!v["params"].is_object()) throw ConfigError("verify.params must be an object keyed by suite");
            cfg.verify.params = v["params"];
        }
    }
    if (cfg.verify.suites.empty()) cfg.verify.suites = suite_names();
    // Validate overrides now rather than halfway through a run.
    for (const auto& [name, _] : cfg.verify.params.items()) build_and_run(name, cfg, Mutation::none, false);

    if (j.contains("limit")) {
        require_keys(j["limit"], {"max_total_neurons"}, "limit");
        if (j["limit"].contains("max_total_neurons")) {
            cfg.max_total_neurons = get_count(j["limit"]["max_total_neurons"], "limit.max_total_neurons");
        }
    }
    if (j.contains("output")) {
        require_keys(j["output"], {"dir"}, "output");
        if (j["output"].contains("dir")) {
            if (!j["output"]["dir"].is_string()) throw ConfigError("output.dir must be a string");
            cfg.out_dir = j["output"]["dir"].get<std::string>();
        }
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    Json j;
    try {
        j = Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_run_config(j);
}

Json to_json(const RunConfig& cfg) {
    Json j;
    j["domain"] = to_json(cfg.domain);
    j["law"] = to_json(cfg.law);
    if (cfg.ladder) {
        j["lambda_ladder"] = cfg.lambdas;
    } else {
        j["lambda"] = cfg.lambdas.front();
    }
    j["seed"] = cfg.seed;
    if (cfg.grid) j["grid"] = to_json(*cfg.grid);
    j["ensemble"] = Json{{"n", cfg.ensemble.n},
                         {"eval_points", point_list_json(cfg.ensemble.eval_points)},
                         {"frequencies", point_list_json(cfg.ensemble.frequencies)},
                         {"write_samples", cfg.ensemble.write_samples}};
    Json pairs = Json::array();
    for (const auto& [x, y] : cfg.oracle.pairs) pairs.push_back({to_json(x), to_json(y)});
    j["oracle"] = Json{{"pairs", pairs},
                       {"random_pairs", cfg.oracle.random_pairs},
                       {"rotations", cfg.oracle.rotations},
                       {"sphere_resolution", cfg.oracle.sphere_resolution}};
    j["verify"] = Json{{"suites", cfg.verify.suites}, {"scale", cfg.verify.scale}, {"params", cfg.verify.params}};
    j["limit"] = Json{{"max_total_neurons", cfg.max_total_neurons}};
    j["output"] = Json{{"dir", cfg.out_dir.string()}};
    j["threads"] = cfg.threads;
    return j;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

VerdictReport run_suite(const std::string& name, const RunConfig& cfg, Mutation mutation) {
    return build_and_run(name, cfg, mutation, true);
}

CommandResult cmd_sample(const RunConfig& cfg) {
    prepare_dir(cfg.out_dir);
    CommandResult res;
    for (double lambda : cfg.lambdas) {
        const auto r = sample_realization(lambda, cfg.law, cfg.domain, cfg.seed);
        const auto json_path = rung_path(cfg, "realization", lambda, ".json");
        write_text(json_path, dump(to_json(r)));
        res.files.push_back(json_path);
        if (cfg.grid) {
            const auto csv_path = rung_path(cfg, "grid", lambda, ".csv");
            write_text(csv_path, grid_csv(r, *cfg.grid));
            res.files.push_back(csv_path);
        }
    }
    return res;
}

CommandResult cmd_oracle(const RunConfig& cfg) {
    prepare_dir(cfg.out_dir);
    const int d = cfg.domain.dim();
    const double second = raw_moment(cfg.law, 2);
    const auto m = moments(cfg.law);
    const auto quad = make_cylinder_quadrature(d, cfg.oracle.sphere_resolution);

    Rng rng(cfg.seed);
    auto pairs = cfg.oracle.pairs;
    for (std::size_t i = 0; i < cfg.oracle.random_pairs; ++i) {
        Vector x = random_point_in_domain(cfg.domain, rng);
        Vector y = random_point_in_domain(cfg.domain, rng);
        pairs.emplace_back(std::move(x), std::move(y));
    }
    std::vector<Matrix> rotations;
    for (std::size_t i = 0; i < cfg.oracle.rotations; ++i) rotations.push_back(random_rotation(d, rng));

    Json results = Json::array();
    for (double lambda : cfg.lambdas) {
        Json pair_rows = Json::array();
        double worst = 0.0;
        for (const auto& [x, y] : pairs) {
            const double closed = autocov_closed(x, y, lambda, second);
            const double quadrature = autocov_quadrature(x, y, lambda, second, quad);
            const double norm = std::sqrt(autocov_closed(x, x, lambda, second) * autocov_closed(y, y, lambda, second));
            const double err = norm > 0.0 ? std::abs(closed - quadrature) / norm : std::abs(closed - quadrature);
            worst = std::max(worst, err);
            Json rot = Json::array();
            double rot_dev = 0.0;
            for (const auto& u : rotations) {
                const double v = autocov_closed(u * x, u * y, lambda, second);
                rot.push_back(v);
                rot_dev = std::max(rot_dev, norm > 0.0 ? std::abs(v - closed) / norm : std::abs(v - closed));
            }
            pair_rows.push_back(Json{{"x", to_json(x)},
                                     {"y", to_json(y)},
                                     {"closed", closed},
                                     {"quadrature", quadrature},
                                     {"normalized_error", err},
                                     {"rotated_closed", rot},
                                     {"max_rotation_deviation", rot_dev}});
        }
        Json point_rows = Json::array();
        for (const auto& x : cfg.ensemble.eval_points) {
            Json row{{"x", to_json(x)},
                     {"mean_closed", mean_closed(x, lambda, cfg.law)},
                     {"mean_quadrature", mean_pointwise(x, lambda, cfg.law, quad)},
                     {"variance", autocov_closed(x, x, lambda, second)}};
            if (std::isfinite(m.fourth)) row["kappa4"] = cumulant_pointwise(4, x, lambda, cfg.law, quad);
            point_rows.push_back(std::move(row));
        }
        results.push_back(Json{{"lambda", lambda},
                               {"pairs", pair_rows},
                               {"points", point_rows},
                               {"max_normalized_error", worst}});
    }
    Json rot_json = Json::array();
    for (const auto& u : rotations) {
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < u.rows(); ++i) rows.push_back(to_json(Vector(u.row(i).transpose())));
        rot_json.push_back(rows);
    }
    const Json out{{"config", to_json(cfg)},
                   {"quadrature", Json{{"sphere_resolution", quad.sphere_resolution},
                                       {"nodes", quad.size()},
                                       {"deterministic", quad.deterministic}}},
                   {"rotations", rot_json},
                   {"results", results}};
    CommandResult res;
    res.files.push_back(cfg.out_dir / "oracle.json");
    write_text(res.files.back(), dump(out));
    return res;
}

CommandResult cmd_ensemble(const RunConfig& cfg) {
    if (cfg.ensemble.eval_points.empty()) throw ConfigError("ensemble.eval_points is required");
    prepare_dir(cfg.out_dir);
    CommandResult res;
    for (double lambda : cfg.lambdas) {
        const auto ecfg = ensemble_config(cfg, lambda);
        const auto run = run_ensemble(ecfg);
        const Json out{{"run_config", to_json(cfg)},
                       {"ensemble_config", to_json(ecfg)},
                       {"summary", to_json(run.summary)}};
        res.files.push_back(rung_path(cfg, "summary", lambda, ".json"));
        write_text(res.files.back(), dump(out));
        if (cfg.ensemble.write_samples) {
            res.files.push_back(rung_path(cfg, "samples", lambda, ".csv"));
            write_text(res.files.back(), samples_csv(run.samples));
        }
    }
    return res;
}

CommandResult cmd_verify(const RunConfig& cfg, const std::vector<std::string>& only, Mutation mutation) {
    prepare_dir(cfg.out_dir);
    const auto& names = only.empty() ? cfg.verify.suites : only;
    Json reports = Json::array();
    bool pass = true;
    for (const auto& name : names) {
        const auto rep = run_suite(name, cfg, mutation);
        pass = pass && rep.pass;
        reports.push_back(to_json(rep));
    }
    const Json out{{"pass", pass}, {"mutation", to_string(mutation)}, {"config", to_json(cfg)}, {"suites", reports}};
    CommandResult res;
    res.exit_code = pass ? 0 : 1;
    res.files.push_back(cfg.out_dir / "report.json");
    write_text(res.files.back(), dump(out));
    return res;
}

CommandResult cmd_limit_study(const RunConfig& cfg) {
    if (cfg.lambdas.size() < 2) throw ConfigError("limit-study needs a lambda_ladder with at least two rates");
    prepare_dir(cfg.out_dir);
    const Vector x = cfg.ensemble.eval_points.empty() ? Vector() : cfg.ensemble.eval_points.front();
    VerdictReport rep;
    const auto* gauss = std::get_if<GaussianLaw>(&cfg.law.variant());
    const auto* stable = std::get_if<SymmetricStableLaw>(&cfg.law.variant());
    if (gauss || (stable && stable->alpha == 2.0)) {
        GaussianLimitParams p;
        p.lambdas = cfg.lambdas;
        // N(0, s^2) is the alpha = 2 stable law with scale s / sqrt(2).
        p.b = gauss ? gauss->std / std::numbers::sqrt2 : stable->scale;
        p.domain = cfg.domain;
        p.x = x;
        p.n_realizations = cfg.ensemble.n;
        p.seed = cfg.seed;
        p.threads = cfg.threads;
        rep = check_gaussian_limit(p);
    } else if (stable) {
        StableLimitParams p;
        p.alpha = stable->alpha;
        p.b = stable->scale;
        p.lambdas = cfg.lambdas;
        p.domain = cfg.domain;
        p.x = x;
        p.n_realizations = cfg.ensemble.n;
        p.seed = cfg.seed;
        p.threads = cfg.threads;
        rep = check_stable_limit(p);
    } else {
        throw ConfigError("limit-study needs a gaussian or symmetric_stable law");
    }
    std::string csv = "lambda,ks,ks_critical,cf_distance\n";
    for (const auto& row : rep.ladder) {
        csv += format_double(row.lambda) + "," + (std::isnan(row.ks) ? std::string() : format_double(row.ks)) + "," +
               format_double(row.ks_critical) + "," + format_double(row.cf_distance) + "\n";
    }
    CommandResult res;
    res.exit_code = rep.pass ? 0 : 1;
    Json out = to_json(rep);
    out["run_config"] = to_json(cfg);
    res.files.push_back(cfg.out_dir / "limit_study.json");
    write_text(res.files.back(), dump(out));
    res.files.push_back(cfg.out_dir / "limit_study.csv");
    write_text(res.files.back(), csv);
    return res;
}

}  // namespace relup
