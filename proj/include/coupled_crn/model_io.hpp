#pragma once

// Model file ingestion.  The format is UTF-8 JSON:
//
// {
//   "species": ["A", "B"],
//   "reactions": [
//     {"source": {"A": 1}, "product": {"A": 2}, "rate": {"param": 0}},
//     {"source": {},       "product": {"B": 1},
//      "rate": {"periodic": {"base": 60, "amplitude": 15,
//                            "period": 24, "phase": 0}}}
//   ],
//   "theta": [2.0, 1.0]
// }
//
// A periodic rate may bind its amplitude to a parameter with
// "amplitude_param": j instead of a literal "amplitude", which makes
// sensitivities with respect to the amplitude expressible.  Unknown keys are
// rejected everywhere.

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "coupled_crn/errors.hpp"
#include "coupled_crn/network.hpp"

namespace ccrn {

struct ParsedModel {
  ReactionNetwork network;
  ParamPoint theta;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      throw ModelError(where + ": unknown key \"" + key + "\"");
    }
  }
}

inline Complex parse_complex(const nlohmann::json& obj,
                             const ReactionNetwork& network,
                             const std::string& where) {
  if (!obj.is_object()) throw ModelError(where + ": expected an object");
  Complex cx;
  cx.counts.assign(static_cast<std::size_t>(network.species_count), 0);
  for (const auto& [name, value] : obj.items()) {
    auto it = std::find(network.species_names.begin(), network.species_names.end(),
                        name);
    if (it == network.species_names.end()) {
      throw ModelError(where + ": unknown species \"" + name + "\"");
    }
    if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
      throw ModelError(where + ": count for \"" + name +
                       "\" must be a nonnegative integer");
    }
    cx.counts[static_cast<std::size_t>(it - network.species_names.begin())] =
        value.get<std::int64_t>();
  }
  return cx;
}

inline RateLaw parse_rate(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw ModelError(where + ": expected an object");
  reject_unknown_keys(obj, {"param", "periodic"}, where);
  if (obj.contains("param") == obj.contains("periodic")) {
    throw ModelError(where + ": rate must have exactly one of "
                             "\"param\" or \"periodic\"");
  }
  if (obj.contains("param")) {
    const auto& p = obj.at("param");
    if (!p.is_number_integer() || p.get<std::int64_t>() < 0) {
      throw ModelError(where + ": \"param\" must be a nonnegative integer");
    }
    return RateLaw::mass_action(p.get<int>());
  }
  const auto& per = obj.at("periodic");
  if (!per.is_object()) throw ModelError(where + ": \"periodic\" must be an object");
  reject_unknown_keys(per, {"base", "amplitude", "amplitude_param", "period", "phase"},
                      where + ".periodic");
  for (const char* req : {"base", "period"}) {
    if (!per.contains(req) || !per.at(req).is_number()) {
      throw ModelError(where + ": periodic rate needs numeric \"" +
                       std::string(req) + "\"");
    }
  }
  if (per.contains("amplitude") == per.contains("amplitude_param")) {
    throw ModelError(where + ": periodic rate must have exactly one of "
                             "\"amplitude\" or \"amplitude_param\"");
  }
  const double base = per.at("base").get<double>();
  const double period = per.at("period").get<double>();
  const double phase = per.contains("phase") ? per.at("phase").get<double>() : 0.0;
  if (per.contains("amplitude_param")) {
    const auto& ap = per.at("amplitude_param");
    if (!ap.is_number_integer() || ap.get<std::int64_t>() < 0) {
      throw ModelError(where + ": \"amplitude_param\" must be a nonnegative integer");
    }
    return RateLaw::periodic_rate_param_amp(base, ap.get<int>(), period, phase);
  }
  if (!per.at("amplitude").is_number()) {
    throw ModelError(where + ": \"amplitude\" must be numeric");
  }
  return RateLaw::periodic_rate(base, per.at("amplitude").get<double>(), period,
                                phase);
}

}  // namespace detail

inline ParsedModel parse_model_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ModelError("model: top level must be an object");
  detail::reject_unknown_keys(doc, {"species", "reactions", "theta"}, "model");
  for (const char* req : {"species", "reactions", "theta"}) {
    if (!doc.contains(req)) {
      throw ModelError(std::string("model: missing \"") + req + "\"");
    }
  }

  ParsedModel model;
  const auto& species = doc.at("species");
  if (!species.is_array() || species.empty()) {
    throw ModelError("model: \"species\" must be a nonempty array of names");
  }
  for (const auto& name : species) {
    if (!name.is_string()) throw ModelError("model: species names must be strings");
    model.network.species_names.push_back(name.get<std::string>());
  }
  model.network.species_count = static_cast<int>(model.network.species_names.size());
  {
    std::set<std::string> uniq(model.network.species_names.begin(),
                               model.network.species_names.end());
    if (uniq.size() != model.network.species_names.size()) {
      throw ModelError("model: duplicate species name");
    }
  }

  const auto& theta = doc.at("theta");
  if (!theta.is_array() || theta.empty()) {
    throw ModelError("model: \"theta\" must be a nonempty array");
  }
  for (const auto& v : theta) {
    if (!v.is_number() || !(v.get<double>() > 0.0)) {
      throw ModelError("model: theta entries must be positive numbers");
    }
    model.theta.push_back(v.get<double>());
  }
  model.network.param_count = static_cast<int>(model.theta.size());

  const auto& reactions = doc.at("reactions");
  if (!reactions.is_array() || reactions.empty()) {
    throw ModelError("model: \"reactions\" must be a nonempty array");
  }
  int index = 0;
  for (const auto& r : reactions) {
    ++index;
    const std::string where = "reaction " + std::to_string(index);
    if (!r.is_object()) throw ModelError(where + ": expected an object");
    detail::reject_unknown_keys(r, {"source", "product", "rate"}, where);
    for (const char* req : {"source", "product", "rate"}) {
      if (!r.contains(req)) {
        throw ModelError(where + ": missing \"" + std::string(req) + "\"");
      }
    }
    Reaction reaction;
    reaction.source = detail::parse_complex(r.at("source"), model.network,
                                            where + ".source");
    reaction.product = detail::parse_complex(r.at("product"), model.network,
                                             where + ".product");
    reaction.change.resize(reaction.source.counts.size());
    for (std::size_t i = 0; i < reaction.change.size(); ++i) {
      reaction.change[i] = reaction.product.counts[i] - reaction.source.counts[i];
    }
    reaction.rate = detail::parse_rate(r.at("rate"), where + ".rate");
    model.network.reactions.push_back(std::move(reaction));
  }

  try {
    validate_network(model.network);
  } catch (const ModelError& e) {
    throw ModelError(std::string("model: ") + e.what());
  }
  return model;
}

inline ParsedModel parse_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("model file " + path + ": " + e.what());
  }
  return parse_model_json(doc);
}

}  // namespace ccrn
