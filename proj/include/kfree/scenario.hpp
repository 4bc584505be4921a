#pragma once

// Scenario files: JSON with a schema version, generators as 8 reals
// (re, im of a, b, c, d), the sampling region and tolerances.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfree/errors.hpp"
#include "kfree/hyperbolic.hpp"
#include "kfree/kleinian.hpp"

namespace kfree {

inline constexpr int kScenarioSchemaVersion = 1;

struct Tolerances {
  double matrix = 1e-9;
  double axis = 1e-7;
  double witness_margin = 1e-6;
  double empty_margin = 1e-6;
  double marginal = 1e-6;
  double parabolic = 1e-9;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "unnamed";
  int k = 3;
  std::optional<double> lambda;  ///< defaults to log(2k - 1)
  int ball_radius = 3;
  std::vector<NamedGenerator> generators;
  Ball sample_region{Point{Complex{0.0, 0.0}, 1.0}, 1.0};
  std::size_t sample_count = 200;
  std::uint64_t seed = 1;
  Tolerances tolerances;
  std::size_t max_nerve_dimension = 8;
  std::size_t ir_subset_cap = 16;

  double log_threshold() const { return std::log(2.0 * k - 1.0); }
  double effective_lambda() const { return lambda.value_or(log_threshold()); }

  GroupSpec group_spec() const {
    GroupSpec g;
    g.generators = generators;
    g.ball_radius = ball_radius;
    g.matrix_tolerance = tolerances.matrix;
    g.axis_tolerance = tolerances.axis;
    g.classify_tolerance.boundary = tolerances.parabolic;
    return g;
  }

  std::vector<Isometry> generator_matrices() const {
    std::vector<Isometry> out;
    for (const auto& g : generators) out.push_back(g.matrix);
    return out;
  }

  void validate() const {
    if (schema_version != kScenarioSchemaVersion)
      throw InputError("unsupported schema_version " + std::to_string(schema_version));
    if (k < 3) throw InputError("k must be an integer >= 3");
    if (!(effective_lambda() > 0.0)) throw InputError("lambda must be positive");
    if (ball_radius < 1) throw InputError("ball_radius must be >= 1");
    if (generators.empty()) throw InputError("scenario has no generators");
    if (!(sample_region.radius > 0.0)) throw InputError("sample_region radius must be positive");
  }
};

namespace detail {

inline nlohmann::ordered_json matrix_to_json(const Isometry& g) {
  return nlohmann::ordered_json::array({g.a.real(), g.a.imag(), g.b.real(), g.b.imag(), g.c.real(),
                                        g.c.imag(), g.d.real(), g.d.imag()});
}

inline Isometry matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 8) throw InputError("matrix must be an array of 8 reals");
  double v[8];
  for (std::size_t i = 0; i < 8; ++i) v[i] = j.at(i).get<double>();
  return Isometry::from_matrix({v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]});
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  j["k"] = s.k;
  if (s.lambda) j["lambda"] = *s.lambda;
  j["ball_radius"] = s.ball_radius;
  auto gens = nlohmann::ordered_json::array();
  for (const auto& g : s.generators)
    gens.push_back({{"name", g.name}, {"matrix", detail::matrix_to_json(g.matrix)}});
  j["generators"] = gens;
  j["sample_region"] = {{"center", {s.sample_region.center.z.real(), s.sample_region.center.z.imag(),
                                    s.sample_region.center.t}},
                        {"radius", s.sample_region.radius}};
  j["sample_count"] = s.sample_count;
  j["seed"] = s.seed;
  j["tolerances"] = {{"matrix", s.tolerances.matrix},
                     {"axis", s.tolerances.axis},
                     {"witness_margin", s.tolerances.witness_margin},
                     {"empty_margin", s.tolerances.empty_margin},
                     {"marginal", s.tolerances.marginal},
                     {"parabolic", s.tolerances.parabolic}};
  j["max_nerve_dimension"] = s.max_nerve_dimension;
  j["ir_subset_cap"] = s.ir_subset_cap;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario s;
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != kScenarioSchemaVersion)
      throw InputError("unsupported schema_version " + std::to_string(s.schema_version));
    s.name = j.value("name", s.name);
    s.k = j.at("k").get<int>();
    if (j.contains("lambda") && !j["lambda"].is_null()) s.lambda = j["lambda"].get<double>();
    s.ball_radius = j.value("ball_radius", s.ball_radius);
    for (const auto& g : j.at("generators"))
      s.generators.push_back({g.value("name", std::string(1, char('a' + s.generators.size()))),
                              detail::matrix_from_json(g.at("matrix"))});
    if (j.contains("sample_region")) {
      const auto& r = j["sample_region"];
      const auto& c = r.at("center");
      if (c.size() != 3) throw InputError("sample_region.center must be [x, y, t]");
      s.sample_region = Ball{Point{c[0].get<double>(), c[1].get<double>(), c[2].get<double>()},
                             r.at("radius").get<double>()};
    }
    s.sample_count = j.value("sample_count", s.sample_count);
    s.seed = j.value("seed", s.seed);
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      s.tolerances.matrix = t.value("matrix", s.tolerances.matrix);
      s.tolerances.axis = t.value("axis", s.tolerances.axis);
      s.tolerances.witness_margin = t.value("witness_margin", s.tolerances.witness_margin);
      s.tolerances.empty_margin = t.value("empty_margin", s.tolerances.empty_margin);
      s.tolerances.marginal = t.value("marginal", s.tolerances.marginal);
      s.tolerances.parabolic = t.value("parabolic", s.tolerances.parabolic);
    }
    s.max_nerve_dimension = j.value("max_nerve_dimension", s.max_nerve_dimension);
    s.ir_subset_cap = j.value("ir_subset_cap", s.ir_subset_cap);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("scenario " + path + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

/// FNV-1a over the canonical JSON dump.
inline std::string scenario_digest(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return "fnv1a64:" + os.str();
}

/// Scenario around a set of generators with the sample region centred over
/// the centroid of their fixed points.
inline Scenario scenario_for(std::string name, const std::vector<Isometry>& gens, int k,
                             int ball_radius = 3) {
  Scenario s;
  s.name = std::move(name);
  s.k = k;
  s.ball_radius = ball_radius;
  Complex centroid{0.0, 0.0};
  std::size_t count = 0;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    s.generators.push_back({std::string(1, char('a' + i)), gens[i]});
    const auto lox = loxodromic_data(gens[i]);
    for (const auto& e : {lox.axis.from, lox.axis.to})
      if (!e.infinite) {
        centroid += e.z;
        ++count;
      }
  }
  if (count) centroid /= static_cast<double>(count);
  s.sample_region = Ball{Point{centroid, 1.0}, 2.0};
  return s;
}

}  // namespace kfree
