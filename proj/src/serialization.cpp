#include "relup/serialization.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "relup/errors.hpp"

namespace relup {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + 16, x, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

namespace {

const Json& need(const Json& j, const char* key, std::string_view where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + std::string(where));
    return j.at(key);
}

double number(const Json& j, const char* key, std::string_view where) {
    const auto& v = need(j, key, where);
    if (!v.is_number()) throw ConfigError("'" + std::string(key) + "' in " + std::string(where) + " must be a number");
    return v.get<double>();
}

}  // namespace

Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const Json& j, std::string_view what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(std::string(what) + " must contain numbers only");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json to_json(const Domain& domain) {
    if (domain.is_ball()) return Json{{"type", "ball"}, {"dim", domain.dim()}, {"radius", domain.scale()}};
    return Json{{"type", "box"}, {"dim", domain.dim()}, {"half_width", domain.scale()}};
}

Domain domain_from_json(const Json& j) {
    const auto& type = need(j, "type", "domain");
    const auto& dim = need(j, "dim", "domain");
    if (!dim.is_number_integer()) throw ConfigError("domain dim must be an integer");
    if (type == "ball") {
        require_keys(j, {"type", "dim", "radius"}, "domain");
        return Domain::ball(dim.get<int>(), number(j, "radius", "domain"));
    }
    if (type == "box") {
        require_keys(j, {"type", "dim", "half_width"}, "domain");
        return Domain::box(dim.get<int>(), number(j, "half_width", "domain"));
    }
    throw ConfigError("domain type must be 'ball' or 'box'");
}

Json to_json(const WeightLaw& law) {
    return std::visit(
        [](const auto& l) -> Json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, GaussianLaw>) {
                return {{"type", "gaussian"}, {"std", l.std}};
            } else if constexpr (std::is_same_v<T, SymmetricStableLaw>) {
                return {{"type", "symmetric_stable"}, {"alpha", l.alpha}, {"scale", l.scale}};
            } else if constexpr (std::is_same_v<T, UniformLaw>) {
                return {{"type", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
            } else {
                return {{"type", "two_point"}, {"value", l.value}};
            }
        },
        law.variant());
}

WeightLaw law_from_json(const Json& j) {
    const auto& type = need(j, "type", "law");
    try {
        if (type == "gaussian") {
            require_keys(j, {"type", "std"}, "law");
            return WeightLaw::gaussian(number(j, "std", "law"));
        }
        if (type == "symmetric_stable") {
            require_keys(j, {"type", "alpha", "scale"}, "law");
            return WeightLaw::symmetric_stable(number(j, "alpha", "law"), number(j, "scale", "law"));
        }
        if (type == "uniform") {
            require_keys(j, {"type", "lo", "hi"}, "law");
            return WeightLaw::uniform(number(j, "lo", "law"), number(j, "hi", "law"));
        }
        if (type == "two_point") {
            require_keys(j, {"type", "value"}, "law");
            return WeightLaw::two_point(number(j, "value", "law"));
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("invalid law: ") + e.what());
    }
    throw ConfigError("law type must be one of gaussian, symmetric_stable, uniform, two_point");
}

Json to_json(const Realization& r) {
    Json neurons = Json::array();
    for (Eigen::Index k = 0; k < r.width(); ++k) {
        neurons.push_back(
            Json{{"v", r.weights()[k]}, {"u", to_json(Vector(r.directions().col(k)))}, {"b", r.offsets()[k]}});
    }
    return Json{{"d", r.dim()},
                {"domain", to_json(r.domain())},
                {"lambda", r.lambda()},
                {"law", to_json(r.law())},
                {"seed", r.seed()},
                {"neurons", std::move(neurons)}};
}

Realization realization_from_json(const Json& j) {
    require_keys(j, {"d", "domain", "lambda", "law", "seed", "neurons"}, "realization");
    const Domain domain = domain_from_json(need(j, "domain", "realization"));
    if (need(j, "d", "realization") != domain.dim()) throw ConfigError("realization d does not match its domain");
    const auto& neurons = need(j, "neurons", "realization");
    if (!neurons.is_array()) throw ConfigError("neurons must be an array");
    const auto n = static_cast<Eigen::Index>(neurons.size());
    Matrix dirs(domain.dim(), n);
    Vector v(n), b(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& nk = neurons[static_cast<std::size_t>(k)];
        require_keys(nk, {"v", "u", "b"}, "neuron");
        v[k] = number(nk, "v", "neuron");
        b[k] = number(nk, "b", "neuron");
        const Vector u = vector_from_json(need(nk, "u", "neuron"), "neuron direction");
        if (u.size() != domain.dim()) throw ConfigError("neuron direction has the wrong dimension");
        dirs.col(k) = u;
    }
    const auto& seed = need(j, "seed", "realization");
    if (!seed.is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    try {
        return Realization(domain, number(j, "lambda", "realization"), law_from_json(need(j, "law", "realization")),
                           seed.get<std::uint64_t>(), std::move(dirs), std::move(v), std::move(b));
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("invalid realization: ") + e.what());
    }
}

Json to_json(const EnsembleConfig& cfg) {
    Json points = Json::array();
    for (const auto& x : cfg.eval_points) points.push_back(to_json(x));
    Json freqs = Json::array();
    for (const auto& xi : cfg.cf_frequencies) freqs.push_back(to_json(xi));
    return Json{{"lambda", cfg.lambda},
                {"law", to_json(cfg.law)},
                {"domain", to_json(cfg.domain)},
                {"n_realizations", cfg.n_realizations},
                {"eval_points", std::move(points)},
                {"cf_frequencies", std::move(freqs)},
                {"master_seed", cfg.master_seed},
                {"anisotropic_directions", cfg.sampler.anisotropic_directions},
                {"h1_shift", cfg.perturbation.h1_shift}};
}

namespace {

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
    return rows;
}

}  // namespace

Json to_json(const EnsembleSummary& s) {
    Json kstats = Json::array();
    for (const auto& k : s.kstats) {
        if (k) {
            kstats.push_back(Json{{"k2", k->k2}, {"k4", k->k4}, {"se_k2", k->se_k2}, {"se_k4", k->se_k4}});
        } else {
            kstats.push_back(nullptr);
        }
    }
    Json cf = Json::array();
    for (const auto& c : s.cf) {
        cf.push_back(Json{{"xi", to_json(c.xi)},
                          {"re", c.value.real()},
                          {"im", c.value.imag()},
                          {"se_re", c.se_re},
                          {"se_im", c.se_im}});
    }
    return Json{{"mean", s.mean},
                {"mean_se", s.mean_se},
                {"covariance", s.covariance ? matrix_json(*s.covariance) : Json(nullptr)},
                {"covariance_se", s.covariance_se ? matrix_json(*s.covariance_se) : Json(nullptr)},
                {"kstats", std::move(kstats)},
                {"cf", std::move(cf)},
                {"widths", s.widths},
                {"provenance",
                 Json{{"config_hash", hex64(s.provenance.config_hash)},
                      {"master_seed", s.provenance.master_seed},
                      {"seed_rule", s.provenance.seed_rule},
                      {"n_realizations", s.provenance.n_realizations}}}};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string samples_csv(const Matrix& samples) {
    std::string out;
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
        if (j) out += ',';
        out += "s" + std::to_string(j + 1);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < samples.cols(); ++j) {
            if (j) out += ',';
            out += format_double(samples(i, j));
        }
        out += '\n';
    }
    return out;
}

}  // namespace relup
