#pragma once

// Problem documents: the metric space, the maps S and T, the gauge, the
// condition preset, and sampling/solver settings, loaded from a single
// JSON file. See the README for the schema.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fixcert/condition.hpp"
#include "fixcert/expr.hpp"
#include "fixcert/gauge.hpp"
#include "fixcert/space.hpp"

namespace fixcert {

class ProblemError : public std::runtime_error {
 public:
  ProblemError(const std::string& message, std::string field = {})
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct SamplingPlan {
  int n_pairs = 2000;
  std::uint64_t seed = 0;
  double span = 10.0;
};

struct SolverConfig {
  std::optional<double> x0;    // defaults to the low end of the sampling window
  double tol = 1e-10;          // on d(x_n, x_{n+1}) in T-image space
  int max_iter = 10000;
  int stability_window = 3;
  double residual_tol = 1e-8;
  int uniqueness_probes = 3;
  std::vector<double> probes;  // explicit probe starts; auto-spread when empty
};

struct Problem {
  MetricSpace space;
  RealMap S;
  RealMap T;
  MapProperties t_properties;
  Gauge gauge;
  ConditionPreset preset;
  SamplingPlan sampling;
  SolverConfig solver;
  std::string source_path;
};

namespace detail {

using json = nlohmann::json;

inline const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline void require_object(const json& v, const std::string& field) {
  if (!v.is_object()) throw ProblemError("expected an object", field);
}

inline double number_at(const json& v, const std::string& field) {
  if (!v.is_number()) throw ProblemError("expected a number", field);
  return v.get<double>();
}

inline double number_or(const json& obj, const char* key, double fallback,
                        const std::string& scope) {
  const json* v = find(obj, key);
  return v ? number_at(*v, scope + "." + key) : fallback;
}

inline bool bool_or(const json& obj, const char* key, bool fallback, const std::string& scope) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ProblemError("expected a boolean", scope + "." + key);
  return v->get<bool>();
}

inline std::string string_at(const json& v, const std::string& field) {
  if (!v.is_string()) throw ProblemError("expected a string", field);
  return v.get<std::string>();
}

inline RealMap map_at(const json& v, const std::string& field) {
  const std::string source = string_at(v, field);
  try {
    return RealMap::parse(source);
  } catch (const ParseError& e) {
    throw ProblemError(std::string("invalid expression: ") + e.what(), field);
  }
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                                const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : known)
      if (it.key() == k) {
        found = true;
        break;
      }
    if (!found) throw ProblemError("unknown key '" + it.key() + "'", scope);
  }
}

inline Domain parse_domain(const json& v) {
  require_object(v, "space.domain");
  reject_unknown_keys(v, {"lower", "upper", "lower_closed", "upper_closed"}, "space.domain");
  const json* lower = find(v, "lower");
  if (!lower) throw ProblemError("missing", "space.domain.lower");
  const double lo = number_at(*lower, "space.domain.lower");

  double hi = std::numeric_limits<double>::infinity();
  if (const json* upper = find(v, "upper"); upper && !upper->is_null()) {
    if (upper->is_string()) {
      const std::string s = upper->get<std::string>();
      if (s != "inf" && s != "+inf")
        throw ProblemError("expected a number, null, or \"inf\"", "space.domain.upper");
    } else {
      hi = number_at(*upper, "space.domain.upper");
    }
  }
  const bool lo_closed = bool_or(v, "lower_closed", true, "space.domain");
  const bool hi_closed = bool_or(v, "upper_closed", std::isfinite(hi), "space.domain");
  try {
    return Domain(lo, hi, lo_closed, hi_closed);
  } catch (const std::invalid_argument& e) {
    throw ProblemError(e.what(), "space.domain");
  }
}

inline MetricSpace parse_space(const json& v) {
  require_object(v, "space");
  reject_unknown_keys(v, {"domain", "metric", "span", "seed"}, "space");
  const json* domain = find(v, "domain");
  if (!domain) throw ProblemError("missing", "space.domain");
  Domain d = parse_domain(*domain);

  const json* metric = find(v, "metric");
  if (!metric || (metric->is_string() && metric->get<std::string>() == "euclidean"))
    return MetricSpace(d);
  return MetricSpace(d, map_at(*metric, "space.metric"));
}

inline MapProperties parse_properties(const json* v) {
  if (!v) return MapProperties{};  // theorem hypotheses declared by default
  require_object(*v, "T_properties");
  reject_unknown_keys(*v,
                      {"one_to_one", "continuous", "sequentially_convergent",
                       "subsequentially_convergent"},
                      "T_properties");
  const bool seq = bool_or(*v, "sequentially_convergent", true, "T_properties");
  const bool subseq = bool_or(*v, "subsequentially_convergent", seq, "T_properties");
  try {
    return MapProperties::make(bool_or(*v, "one_to_one", true, "T_properties"),
                               bool_or(*v, "continuous", true, "T_properties"), seq, subseq);
  } catch (const std::invalid_argument& e) {
    throw ProblemError(e.what(), "T_properties");
  }
}

inline Gauge parse_gauge(const json* v) {
  if (!v) return Gauge(RealMap::parse("1"));
  require_object(*v, "gauge");
  reject_unknown_keys(*v, {"phi", "breakpoints", "quad_tol"}, "gauge");
  RealMap phi = find(*v, "phi") ? map_at(*find(*v, "phi"), "gauge.phi") : RealMap::parse("1");
  std::vector<double> breakpoints;
  if (const json* bp = find(*v, "breakpoints")) {
    if (!bp->is_array()) throw ProblemError("expected an array", "gauge.breakpoints");
    for (const auto& b : *bp) breakpoints.push_back(number_at(b, "gauge.breakpoints[]"));
  }
  const double quad_tol = number_or(*v, "quad_tol", 1e-10, "gauge");
  try {
    return Gauge(std::move(phi), std::move(breakpoints), quad_tol);
  } catch (const GaugeError& e) {
    throw ProblemError(e.what(), "gauge");
  }
}

inline SamplingPlan parse_sampling(const json* v, const json* space) {
  SamplingPlan plan;
  // span/seed may also live in the space block; the sampling block wins.
  if (space) {
    plan.span = number_or(*space, "span", plan.span, "space");
    plan.seed = static_cast<std::uint64_t>(number_or(*space, "seed", 0.0, "space"));
  }
  if (v) {
    require_object(*v, "sampling");
    reject_unknown_keys(*v, {"n_pairs", "seed", "span"}, "sampling");
    plan.n_pairs = static_cast<int>(number_or(*v, "n_pairs", plan.n_pairs, "sampling"));
    plan.seed = static_cast<std::uint64_t>(
        number_or(*v, "seed", static_cast<double>(plan.seed), "sampling"));
    plan.span = number_or(*v, "span", plan.span, "sampling");
  }
  if (plan.n_pairs < 1) throw ProblemError("n_pairs must be at least 1", "sampling.n_pairs");
  if (!(plan.span > 0.0)) throw ProblemError("span must be positive", "sampling.span");
  return plan;
}

inline SolverConfig parse_solver(const json* v, const Domain& domain) {
  SolverConfig config;
  if (!v) return config;
  require_object(*v, "solver");
  reject_unknown_keys(
      *v, {"x0", "tol", "max_iter", "stability_window", "residual_tol", "uniqueness_probes",
           "probes"},
      "solver");
  if (const json* x0 = find(*v, "x0")) {
    config.x0 = number_at(*x0, "solver.x0");
    if (!domain.contains(*config.x0))
      throw ProblemError("starting point lies outside the domain", "solver.x0");
  }
  config.tol = number_or(*v, "tol", config.tol, "solver");
  if (!(config.tol > 0.0)) throw ProblemError("tol must be positive", "solver.tol");
  config.max_iter = static_cast<int>(
      number_or(*v, "max_iter", static_cast<double>(config.max_iter), "solver"));
  if (config.max_iter < 1) throw ProblemError("max_iter must be at least 1", "solver.max_iter");
  config.stability_window = static_cast<int>(number_or(
      *v, "stability_window", static_cast<double>(config.stability_window), "solver"));
  if (config.stability_window < 1)
    throw ProblemError("stability_window must be at least 1", "solver.stability_window");
  config.residual_tol = number_or(*v, "residual_tol", config.residual_tol, "solver");
  if (!(config.residual_tol > 0.0))
    throw ProblemError("residual_tol must be positive", "solver.residual_tol");
  config.uniqueness_probes = static_cast<int>(number_or(
      *v, "uniqueness_probes", static_cast<double>(config.uniqueness_probes), "solver"));
  if (config.uniqueness_probes < 0)
    throw ProblemError("uniqueness_probes must be nonnegative", "solver.uniqueness_probes");
  if (const json* probes = find(*v, "probes")) {
    if (!probes->is_array()) throw ProblemError("expected an array", "solver.probes");
    for (const auto& p : *probes) {
      const double value = number_at(p, "solver.probes[]");
      if (!domain.contains(value))
        throw ProblemError("probe point lies outside the domain", "solver.probes");
      config.probes.push_back(value);
    }
  }
  return config;
}

}  // namespace detail

inline Problem parse_problem(const nlohmann::json& doc, std::string source_path = {}) {
  using detail::find;
  if (!doc.is_object()) throw ProblemError("problem document must be a JSON object");
  detail::reject_unknown_keys(
      doc, {"space", "S", "T", "T_properties", "gauge", "preset", "sampling", "solver"},
      "problem");

  const nlohmann::json* space_node = find(doc, "space");
  if (!space_node) throw ProblemError("missing", "space");
  MetricSpace space = detail::parse_space(*space_node);

  const nlohmann::json* s_node = find(doc, "S");
  if (!s_node) throw ProblemError("missing", "S");
  RealMap S = detail::map_at(*s_node, "S");

  RealMap T = find(doc, "T") ? detail::map_at(*find(doc, "T"), "T") : identity_map();
  MapProperties props = detail::parse_properties(find(doc, "T_properties"));
  Gauge gauge = detail::parse_gauge(find(doc, "gauge"));

  const nlohmann::json* preset_node = find(doc, "preset");
  if (!preset_node) throw ProblemError("missing", "preset");
  detail::require_object(*preset_node, "preset");
  detail::reject_unknown_keys(*preset_node, {"kind", "k"}, "preset");
  const nlohmann::json* kind_node = find(*preset_node, "kind");
  if (!kind_node) throw ProblemError("missing", "preset.kind");
  const std::string kind_name = detail::string_at(*kind_node, "preset.kind");
  const auto kind = condition_kind_from(kind_name);
  if (!kind) throw ProblemError("unknown preset '" + kind_name + "'", "preset.kind");
  const nlohmann::json* k_node = find(*preset_node, "k");
  if (!k_node) throw ProblemError("missing", "preset.k");
  const double k = detail::number_at(*k_node, "preset.k");

  // The preset's T is the top-level T, so the two cannot disagree.
  ConditionPreset preset = [&]() {
    try {
      return ConditionPreset(*kind, k, T);
    } catch (const std::invalid_argument& e) {
      throw ProblemError(e.what(), "preset");
    }
  }();

  SamplingPlan sampling = detail::parse_sampling(find(doc, "sampling"), space_node);
  SolverConfig solver = detail::parse_solver(find(doc, "solver"), space.domain());

  return Problem{std::move(space), std::move(S),     std::move(T),      props,
                 std::move(gauge), std::move(preset), sampling,          solver,
                 std::move(source_path)};
}

inline Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProblemError("JSON parse error in '" + path + "': " + e.what());
  }
  return parse_problem(doc, path);
}

}  // namespace fixcert
