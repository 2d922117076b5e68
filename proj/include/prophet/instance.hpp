#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prophet/distribution.hpp"

namespace prophet {

using json = nlohmann::json;

// Arrival-order model: a fixed (adversarial) permutation or a fresh uniform
// permutation per trial.
struct OrderModel {
  enum class Kind { UniformRandom, AdversarialFixed };
  Kind kind = Kind::UniformRandom;
  // arrival[t] = 0-based index of the distribution shown at step t+1.
  std::vector<std::size_t> arrival;

  static OrderModel uniform_random() { return OrderModel{}; }

  static OrderModel adversarial(std::vector<std::size_t> arrival_order) {
    std::vector<std::size_t> sorted = arrival_order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i)
        throw std::invalid_argument("adversarial order must be a permutation of 0..n-1");
    return OrderModel{Kind::AdversarialFixed, std::move(arrival_order)};
  }
};

// An ordered collection of independent distributions plus the arrival-order
// model.  identities_observable controls whether policies get told which
// distribution produced each observation.
struct Instance {
  std::vector<Distribution> distributions;
  OrderModel order;
  bool identities_observable = true;

  std::size_t size() const { return distributions.size(); }

  bool iid() const {
    for (std::size_t i = 1; i < distributions.size(); ++i)
      if (!(distributions[i] == distributions[0])) return false;
    return !distributions.empty();
  }
};

inline json distribution_to_json(const Distribution& d) {
  return std::visit(
      detail::overloaded{
          [&](const UniformSpec& u) { return json{{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}}; },
          [&](const ExponentialSpec& e) { return json{{"kind", "exponential"}, {"rate", e.rate}}; },
          [&](const TwoPointSpec& t) {
            return json{{"kind", "two_point"}, {"value", t.value}, {"prob", t.prob}};
          },
          [&](const ScaledShiftSpec& s) {
            return json{{"kind", "scaled_shift"},
                        {"inner", distribution_to_json(*s.inner)},
                        {"scale", s.scale},
                        {"shift", s.shift}};
          },
          [&](const DiscreteSpec& d2) {
            json atoms = json::array();
            for (std::size_t i = 0; i < d2.values.size(); ++i)
              atoms.push_back(json::array({d2.values[i], d2.probs[i]}));
            return json{{"kind", "discrete"}, {"atoms", atoms}};
          },
          [&](const CdfPowerSpec& c) {
            return json{{"kind", "cdf_power"},
                        {"inner", distribution_to_json(*c.inner)},
                        {"exponent", c.exponent}};
          },
          [&](const MaxOfSpec& m) {
            json members = json::array();
            for (const auto& mem : m.members) members.push_back(distribution_to_json(mem));
            return json{{"kind", "max_of"}, {"members", members}};
          },
          [&](const MixtureSpec& m) {
            json comps = json::array();
            for (std::size_t i = 0; i < m.components.size(); ++i)
              comps.push_back(json{{"weight", m.weights[i]},
                                   {"dist", distribution_to_json(m.components[i])}});
            return json{{"kind", "mixture"}, {"components", comps}};
          }},
      d.node());
}

inline Distribution distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("distribution JSON must be an object with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform")
    return Distribution::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (kind == "exponential") return Distribution::exponential(j.at("rate").get<double>());
  if (kind == "two_point")
    return Distribution::two_point(j.at("value").get<double>(), j.at("prob").get<double>());
  if (kind == "scaled_shift")
    return Distribution::scaled_shift(distribution_from_json(j.at("inner")),
                                      j.at("scale").get<double>(), j.at("shift").get<double>());
  if (kind == "discrete") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : j.at("atoms"))
      atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    return Distribution::discrete(std::move(atoms));
  }
  if (kind == "cdf_power")
    return Distribution::cdf_power(distribution_from_json(j.at("inner")),
                                   j.at("exponent").get<double>());
  if (kind == "max_of") {
    std::vector<Distribution> members;
    for (const auto& m : j.at("members")) members.push_back(distribution_from_json(m));
    return Distribution::max_of(std::move(members));
  }
  if (kind == "mixture") {
    std::vector<std::pair<double, Distribution>> comps;
    for (const auto& c : j.at("components"))
      comps.emplace_back(c.at("weight").get<double>(), distribution_from_json(c.at("dist")));
    return Distribution::mixture(std::move(comps));
  }
  throw std::invalid_argument("unknown distribution kind: \"" + kind + "\"");
}

inline json instance_to_json(const Instance& inst) {
  json dists = json::array();
  for (const auto& d : inst.distributions) dists.push_back(distribution_to_json(d));
  json order;
  if (inst.order.kind == OrderModel::Kind::UniformRandom) {
    order = "uniform_random";
  } else {
    json perm = json::array();
    for (std::size_t idx : inst.order.arrival) perm.push_back(idx + 1);  // 1-based on disk
    order = json{{"adversarial", perm}};
  }
  json out{{"distributions", dists}, {"order", order}};
  if (!inst.identities_observable) out["identities_observable"] = false;
  return out;
}

inline Instance instance_from_json(const json& j) {
  Instance inst;
  if (!j.contains("distributions") || !j.at("distributions").is_array() ||
      j.at("distributions").empty())
    throw std::invalid_argument("instance needs a nonempty \"distributions\" array");
  for (const auto& d : j.at("distributions"))
    inst.distributions.push_back(distribution_from_json(d));
  const json& order = j.contains("order") ? j.at("order") : json("uniform_random");
  if (order.is_string() && order.get<std::string>() == "uniform_random") {
    inst.order = OrderModel::uniform_random();
  } else if (order.is_object() && order.contains("adversarial")) {
    std::vector<std::size_t> arrival;
    for (const auto& v : order.at("adversarial")) {
      auto idx = v.get<std::int64_t>();
      if (idx < 1 || static_cast<std::size_t>(idx) > inst.distributions.size())
        throw std::invalid_argument("adversarial order entries must be in 1..n");
      arrival.push_back(static_cast<std::size_t>(idx - 1));
    }
    if (arrival.size() != inst.distributions.size())
      throw std::invalid_argument("adversarial order must list all n positions");
    inst.order = OrderModel::adversarial(std::move(arrival));
  } else {
    throw std::invalid_argument("order must be \"uniform_random\" or {\"adversarial\": [...]}");
  }
  if (j.contains("identities_observable"))
    inst.identities_observable = j.at("identities_observable").get<bool>();
  return inst;
}

inline Instance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file: " + path);
  json j;
  in >> j;
  return instance_from_json(j);
}

inline void save_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write instance file: " + path);
  out << instance_to_json(inst).dump(2) << "\n";
}

}  // namespace prophet
