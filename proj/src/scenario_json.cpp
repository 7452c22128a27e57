#include <array>
#include <set>

#include "cids/error.hpp"
#include "cids/ledger_json.hpp"
#include "cids/simnet.hpp"
#include "json.hpp"

namespace cids {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 3> kBehaviors = {"none", "poison_model", "poison_filter"};

AttackClass parse_class(const std::string& s) {
  for (int c = 0; c < 4; ++c)
    if (to_string(static_cast<AttackClass>(c)) == s) return static_cast<AttackClass>(c);
  throw Error(ErrorCode::config_invalid, "unknown attack class '" + s + "'");
}

AdversaryBehavior parse_behavior(const std::string& s) {
  for (std::size_t i = 0; i < kBehaviors.size(); ++i)
    if (kBehaviors[i] == s) return static_cast<AdversaryBehavior>(i);
  throw Error(ErrorCode::config_invalid, "unknown adversary behavior '" + s + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "n_nodes", "authorities", "duration", "block_interval", "contribution_interval", "seed",
      "benign", "attacks", "adversary", "thresholds", "adopt_peers", "window_ticks", "train_min",
      "svm_lambda", "svm_epochs", "bloom_m", "bloom_k", "catalog_size",
      "bootstrap_benign_windows", "bootstrap_attack_windows"};
  return keys;
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  ScenarioConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::config_invalid, "scenario must be a JSON object");
    for (const auto& [k, _] : j.items())
      if (!known_keys().contains(k)) throw Error(ErrorCode::config_invalid, "unknown field '" + k + "'");
    read(j, "n_nodes", c.n_nodes);
    read(j, "authorities", c.authorities);
    read(j, "duration", c.duration);
    read(j, "block_interval", c.block_interval);
    read(j, "contribution_interval", c.contribution_interval);
    read(j, "seed", c.seed);
    if (auto it = j.find("benign"); it != j.end()) {
      read(*it, "rate", c.benign.rate);
      read(*it, "payload_mean", c.benign.payload_mean);
      read(*it, "payload_std", c.benign.payload_std);
    }
    if (auto it = j.find("attacks"); it != j.end()) {
      for (const auto& a : *it) {
        AttackSpec s;
        s.attack_class = parse_class(a.at("class").get<std::string>());
        s.start = a.at("start").get<Tick>();
        s.length = a.at("length").get<Tick>();
        s.target = a.at("target").get<NodeId>();
        s.intensity = a.at("intensity").get<double>();
        c.attacks.push_back(s);
      }
    }
    if (auto it = j.find("adversary"); it != j.end() && !it->is_null()) {
      AdversarySpec adv;
      adv.node = it->at("node_id").get<NodeId>();
      adv.behavior = parse_behavior(it->at("behavior").get<std::string>());
      if (adv.behavior != AdversaryBehavior::none) c.adversary = adv;
    }
    if (auto it = j.find("thresholds"); it != j.end()) {
      read(*it, "accuracy", c.thresholds.accuracy);
      read(*it, "coverage", c.thresholds.coverage);
      read(*it, "filter_fpr", c.thresholds.filter_fpr);
    }
    read(j, "adopt_peers", c.adopt_peers);
    read(j, "window_ticks", c.window_ticks);
    read(j, "train_min", c.train_min);
    read(j, "svm_lambda", c.svm_lambda);
    read(j, "svm_epochs", c.svm_epochs);
    read(j, "bloom_m", c.bloom_m);
    read(j, "bloom_k", c.bloom_k);
    read(j, "catalog_size", c.catalog_size);
    read(j, "bootstrap_benign_windows", c.bootstrap_benign_windows);
    read(j, "bootstrap_attack_windows", c.bootstrap_attack_windows);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_invalid, e.what());
  }
  validate_config(c);
  return c;
}

std::string scenario_to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["n_nodes"] = c.n_nodes;
  j["authorities"] = c.authorities;
  j["duration"] = c.duration;
  j["block_interval"] = c.block_interval;
  j["contribution_interval"] = c.contribution_interval;
  j["seed"] = c.seed;
  j["benign"] = {{"rate", c.benign.rate},
                 {"payload_mean", c.benign.payload_mean},
                 {"payload_std", c.benign.payload_std}};
  j["attacks"] = nlohmann::ordered_json::array();
  for (const auto& a : c.attacks)
    j["attacks"].push_back({{"class", to_string(a.attack_class)},
                            {"start", a.start},
                            {"length", a.length},
                            {"target", a.target},
                            {"intensity", a.intensity}});
  if (c.adversary)
    j["adversary"] = {{"node_id", c.adversary->node},
                      {"behavior", kBehaviors[static_cast<std::size_t>(c.adversary->behavior)]}};
  else
    j["adversary"] = nullptr;
  j["thresholds"] = {{"accuracy", c.thresholds.accuracy},
                     {"coverage", c.thresholds.coverage},
                     {"filter_fpr", c.thresholds.filter_fpr}};
  j["adopt_peers"] = c.adopt_peers;
  j["window_ticks"] = c.window_ticks;
  j["train_min"] = c.train_min;
  j["svm_lambda"] = c.svm_lambda;
  j["svm_epochs"] = c.svm_epochs;
  j["bloom_m"] = c.bloom_m;
  j["bloom_k"] = c.bloom_k;
  j["catalog_size"] = c.catalog_size;
  j["bootstrap_benign_windows"] = c.bootstrap_benign_windows;
  j["bootstrap_attack_windows"] = c.bootstrap_attack_windows;
  return j.dump(2);
}

}  // namespace cids
