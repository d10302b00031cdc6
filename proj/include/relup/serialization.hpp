#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "relup/geometry.hpp"
#include "relup/mc_stats.hpp"
#include "relup/process.hpp"
#include "relup/weight_laws.hpp"

namespace relup {

using Json = nlohmann::json;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t x);

Json to_json(const Domain& domain);
Json to_json(const WeightLaw& law);
Json to_json(const Realization& r);
/// Only fields that influence results: the thread count and resource cap
/// are left out so that the hash is scheduling independent.
Json to_json(const EnsembleConfig& cfg);
Json to_json(const EnsembleSummary& s);

/// Parsers reject unknown keys and missing required keys with ConfigError.
Domain domain_from_json(const Json& j);
WeightLaw law_from_json(const Json& j);
Realization realization_from_json(const Json& j);

Vector vector_from_json(const Json& j, std::string_view what);
Json to_json(const Vector& v);

/// Throws ConfigError naming the first key of `j` not in `allowed`.
void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

/// Writes the file atomically enough for our purposes: throws ConfigError
/// when the path cannot be opened.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// One row per realization, one column per evaluation point.
std::string samples_csv(const Matrix& samples);

}  // namespace relup
