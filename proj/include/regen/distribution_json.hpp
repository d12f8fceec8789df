#pragma once

// JSON distribution specs, e.g.
//   {"family": "exponential", "rate": 1.0}
//   {"family": "uniform", "lo": 0, "hi": 1}
//   {"family": "hyperexp", "weights": [0.5, 0.5], "rates": [1, 2]}
//   {"family": "tabulated", "grid": [...], "density": [...]}

#include <string>
#include <vector>

#include "json.hpp"
#include "regen/distributions.hpp"
#include "regen/errors.hpp"

namespace regen {

namespace detail {

inline double json_number(const nlohmann::json& spec, const char* field) {
  const std::string path = std::string("dist.") + field;
  if (!spec.contains(field)) throw InvalidParameter(path, "missing");
  const auto& v = spec.at(field);
  if (!v.is_number()) throw InvalidParameter(path, "must be a number");
  return v.get<double>();
}

inline std::vector<double> json_numbers(const nlohmann::json& spec, const char* field) {
  const std::string path = std::string("dist.") + field;
  if (!spec.contains(field)) throw InvalidParameter(path, "missing");
  const auto& v = spec.at(field);
  if (!v.is_array()) throw InvalidParameter(path, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InvalidParameter(path, "must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

/// Builds a model from a JSON spec. Errors name the offending field as "dist.<field>".
inline LifetimeModel model_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw InvalidParameter("dist", "must be a JSON object");
  if (!spec.contains("family") || !spec.at("family").is_string()) {
    throw InvalidParameter("dist.family", "missing or not a string");
  }
  const std::string family = spec.at("family").get<std::string>();
  auto rethrow_scoped = [](const InvalidParameter& e) -> InvalidParameter {
    const std::string& f = e.field();
    const std::string field = f.rfind("dist.", 0) == 0 ? f : "dist." + f;
    std::string what = e.what();
    const auto colon = what.find(": ");
    return InvalidParameter(field, colon == std::string::npos ? what : what.substr(colon + 2));
  };
  try {
    if (family == "exponential") return LifetimeModel::exponential(detail::json_number(spec, "rate"));
    if (family == "gamma") {
      return LifetimeModel::gamma(detail::json_number(spec, "shape"), detail::json_number(spec, "rate"));
    }
    if (family == "weibull") {
      return LifetimeModel::weibull(detail::json_number(spec, "shape"), detail::json_number(spec, "scale"));
    }
    if (family == "uniform") {
      return LifetimeModel::uniform(detail::json_number(spec, "lo"), detail::json_number(spec, "hi"));
    }
    if (family == "hyperexp" || family == "hyperexponential") {
      return LifetimeModel::hyperexponential(detail::json_numbers(spec, "weights"),
                                             detail::json_numbers(spec, "rates"));
    }
    if (family == "tabulated") {
      return LifetimeModel::tabulated(detail::json_numbers(spec, "grid"), detail::json_numbers(spec, "density"));
    }
    if (family == "lomax" || family == "pareto2") {
      return LifetimeModel::lomax(detail::json_number(spec, "shape"), detail::json_number(spec, "scale"));
    }
  } catch (const InvalidParameter& e) {
    throw rethrow_scoped(e);
  }
  throw InvalidParameter("dist.family", "unknown family '" + family + "'");
}

inline LifetimeModel model_from_json_text(const std::string& text) {
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter("dist", std::string("not valid JSON: ") + e.what());
  }
  return model_from_json(spec);
}

inline nlohmann::json to_json(const LifetimeModel& m) {
  nlohmann::json j;
  j["family"] = std::string(family_name(m.family()));
  for (const auto& [name, v] : m.scalar_params()) j[name] = v;
  if (m.family() == Family::hyperexponential) {
    j["weights"] = m.weights();
    j["rates"] = m.rates();
  }
  if (m.family() == Family::tabulated) {
    j["grid"] = m.grid();
    j["density"] = m.density_values();
  }
  return j;
}

}  // namespace regen
