#include "cids/simnet.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <set>

#include "cids/error.hpp"
#include "cids/ledger_json.hpp"
#include "json.hpp"

namespace cids {

namespace {

constexpr std::size_t kReplayHistory = 200;
constexpr double kAttackWindowFraction = 0.25;

double default_intensity(AttackClass c) {
  switch (c) {
    case AttackClass::dos: return 20.0;
    case AttackClass::spoof: return 1.0;
    default: return 2.0;
  }
}

std::vector<EventRecord> generate_attack(const AttackSpec& spec, double base_rate,
                                         std::span<const EventRecord> history, Rng& rng) {
  switch (spec.attack_class) {
    case AttackClass::dos: return gen_dos(spec, base_rate, rng);
    case AttackClass::spoof: return gen_spoof(spec, base_rate, rng);
    case AttackClass::recon: return gen_recon(spec, base_rate, rng);
    case AttackClass::replay: return gen_replay(spec, base_rate, history, rng);
    case AttackClass::anomaly: break;
  }
  throw Error(ErrorCode::config_invalid, "attacks must be dos, spoof, recon or replay");
}

NodeConfig node_config(const ScenarioConfig& c, NodeId id) {
  NodeConfig nc;
  nc.window_ticks = c.window_ticks;
  nc.train_min = c.train_min;
  nc.svm = {c.svm_lambda, c.svm_epochs, c.seed ^ id};
  nc.bloom_m = c.bloom_m;
  nc.bloom_k = c.bloom_k;
  nc.adopt_peers = c.adopt_peers;
  if (c.adversary && c.adversary->node == id) nc.behavior = c.adversary->behavior;
  return nc;
}

// Ground truth and alarm bookkeeping for one gateway's tumbling windows.
struct WindowBook {
  struct Window {
    std::uint64_t total = 0;
    std::array<std::uint64_t, 4> attack{};
    bool alarmed = false;
  };
  std::vector<Window> windows;
  std::vector<Tick> alarm_ticks;
};

// Everything one gateway receives during one tick, with ground truth.
struct TickInput {
  std::vector<EventRecord> events;
  std::vector<std::optional<AttackClass>> truth;
};

}  // namespace

void validate_config(const ScenarioConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::config_invalid, why); };
  if (c.n_nodes == 0) fail("n_nodes must be >= 1");
  if (c.duration == 0) fail("duration must be > 0");
  if (c.block_interval == 0 || c.contribution_interval == 0) fail("intervals must be >= 1");
  if (c.window_ticks == 0) fail("window_ticks must be >= 1");
  if (c.authorities.empty()) fail("authorities must be non-empty");
  std::set<NodeId> seen;
  for (NodeId a : c.authorities) {
    if (a >= c.n_nodes) fail("authority " + std::to_string(a) + " is not a node");
    if (!seen.insert(a).second) fail("duplicate authority " + std::to_string(a));
  }
  if (!(c.benign.rate >= 0) || !(c.benign.payload_std >= 0)) fail("benign parameters must be non-negative");
  for (const auto& a : c.attacks) {
    if (a.attack_class == AttackClass::anomaly) fail("attack class must be dos, spoof, recon or replay");
    if (a.start < 1) fail("attack start must be >= 1");
    if (a.start + a.length > c.duration) fail("attack exceeds duration");
    if (a.target >= c.n_nodes) fail("attack target is not a node");
    if (!(a.intensity > 0)) fail("attack intensity must be positive");
  }
  if (c.adversary) {
    if (c.adversary->node >= c.n_nodes) fail("adversary is not a node");
    if (seen.contains(c.adversary->node)) fail("adversary must not be an authority");
  }
  for (double t : {c.thresholds.accuracy, c.thresholds.coverage, c.thresholds.filter_fpr})
    if (!(t >= 0 && t <= 1)) fail("thresholds must lie in [0,1]");
  if (!(c.svm_lambda > 0) || c.svm_epochs == 0) fail("svm hyperparameters out of range");
  if (c.bloom_m < BloomFilter::kMinBits || c.bloom_k < 1 || c.bloom_k > BloomFilter::kMaxHashes)
    fail("bloom parameters out of range");
}

ScenarioConfig standard_scenario() {
  ScenarioConfig c;
  c.attacks = {
      {AttackClass::dos, 301, 100, 1, 20.0},
      {AttackClass::spoof, 701, 100, 2, 1.0},
      {AttackClass::recon, 1101, 100, 3, 2.0},
      {AttackClass::replay, 1501, 100, 4, 2.0},
  };
  c.adversary = AdversarySpec{5, AdversaryBehavior::poison_model};
  return c;
}

BootstrapData bootstrap_dataset(const ScenarioConfig& config, NodeId node) {
  BootstrapData out;
  Rng rng(config.seed ^ (node << 32) ^ 0xb007'57a9ULL);
  const auto pool = benign_pool(config.benign);
  const Tick w = config.window_ticks;

  auto benign_window = [&](std::vector<EventRecord>& events) {
    for (Tick t = 1; t <= w; ++t) {
      auto e = gen_benign(config.benign, pool, node, t, rng);
      events.insert(events.end(), e.begin(), e.end());
    }
  };

  for (std::size_t i = 0; i < config.bootstrap_benign_windows; ++i) {
    std::vector<EventRecord> events;
    benign_window(events);
    out.rows.push_back({extract_features(events, w), Label::benign});
    out.benign_events.insert(out.benign_events.end(), events.begin(), events.end());
  }

  for (int c = 0; c < 4; ++c) {
    const auto cls = static_cast<AttackClass>(c);
    double intensity = default_intensity(cls);
    for (const auto& a : config.attacks)
      if (a.attack_class == cls) intensity = a.intensity;
    for (std::size_t i = 0; i < config.bootstrap_attack_windows; ++i) {
      std::vector<EventRecord> benign;
      benign_window(benign);
      const Tick len = w / 4 + rng() % (w - w / 4 + 1);
      AttackSpec spec{cls, w - len + 1, len, node, intensity};
      auto attack = generate_attack(spec, config.benign.rate, benign, rng);
      std::vector<EventRecord> events = benign;
      events.insert(events.end(), attack.begin(), attack.end());
      std::stable_sort(events.begin(), events.end(),
                       [](const EventRecord& a, const EventRecord& b) { return a.sim_time < b.sim_time; });
      const double frac = events.empty() ? 0.0
                                         : static_cast<double>(attack.size()) /
                                               static_cast<double>(events.size());
      out.rows.push_back({extract_features(events, w),
                          frac >= kAttackWindowFraction ? Label::attack : Label::benign});
    }
  }
  return out;
}

SimulationResult run(const ScenarioConfig& config, const RunOptions& options) {
  validate_config(config);
  const auto n = static_cast<std::size_t>(config.n_nodes);
  const Tick W = config.window_ticks;
  const std::size_t n_windows = static_cast<std::size_t>((config.duration + W - 1) / W);

  auto catalog = std::make_shared<const SignatureCatalog>(make_catalog(config.catalog_size));
  const auto pool = benign_pool(config.benign);

  SimulationResult result{{}, Ledger(config.authorities), {}, {}, {}, {}};
  auto& ledger = result.ledger;
  auto& store = result.store;
  auto& nodes = result.nodes;
  auto& trust = result.live_trust;

  std::vector<Rng> traffic_rng;
  std::vector<WindowBook> books(n);
  std::vector<std::deque<EventRecord>> history(n);
  for (NodeId id = 0; id < n; ++id) {
    nodes.emplace_back(id, node_config(config, id), catalog);
    BootstrapData boot = bootstrap_dataset(config, id);
    for (const auto& e : boot.benign_events) nodes.back().label_event(e, std::nullopt);
    nodes.back().learn(boot.rows);
    traffic_rng.emplace_back(config.seed ^ id);
    books[id].windows.resize(n_windows);
  }
  Rng attack_rng(config.seed ^ 0xa77a'c4ULL);

  // Attack traffic keyed by (target, tick); generated when each attack starts.
  std::map<std::pair<NodeId, Tick>, std::vector<EventRecord>> scheduled;
  std::map<std::pair<NodeId, Tick>, std::vector<AttackClass>> scheduled_truth;

  std::vector<TickInput> inputs(n);
  std::vector<std::vector<Alarm>> alarms(n);

  for (Tick t = 1; t <= config.duration; ++t) {
    for (const auto& spec : config.attacks) {
      if (spec.start != t) continue;
      std::vector<EventRecord> hist(history[spec.target].begin(), history[spec.target].end());
      for (const auto& e : generate_attack(spec, config.benign.rate, hist, attack_rng)) {
        scheduled[{spec.target, e.sim_time}].push_back(e);
        scheduled_truth[{spec.target, e.sim_time}].push_back(spec.attack_class);
      }
    }

    for (NodeId id = 0; id < n; ++id) {
      auto& in = inputs[id];
      in.events = gen_benign(config.benign, pool, id, t, traffic_rng[id]);
      in.truth.assign(in.events.size(), std::nullopt);
      if (auto it = scheduled.find({id, t}); it != scheduled.end()) {
        const auto& truth = scheduled_truth[{id, t}];
        in.events.insert(in.events.end(), it->second.begin(), it->second.end());
        in.truth.insert(in.truth.end(), truth.begin(), truth.end());
        scheduled.erase(it);
        scheduled_truth.erase({id, t});
      }
    }

    const std::size_t widx = static_cast<std::size_t>((t - 1) / W);
    auto step_node = [&](std::size_t id) {
      Node& node = nodes[id];
      const auto& in = inputs[id];
      alarms[id] = node.observe(in.events);
      auto& win = books[id].windows[widx];
      for (std::size_t i = 0; i < in.events.size(); ++i) {
        node.label_event(in.events[i], in.truth[i]);
        ++win.total;
        if (in.truth[i]) ++win.attack[static_cast<std::size_t>(*in.truth[i])];
      }
      if (!alarms[id].empty()) {
        win.alarmed = true;
        books[id].alarm_ticks.push_back(t);
      }
      if (t % W == 0) {
        std::uint64_t attack = 0;
        for (auto a : win.attack) attack += a;
        const bool is_attack =
            win.total > 0 && static_cast<double>(attack) >= kAttackWindowFraction * static_cast<double>(win.total);
        node.learn({{node.current_features(), is_attack ? Label::attack : Label::benign}});
      }
    };
    const auto nn = static_cast<std::int64_t>(n);
    if (options.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t id = 0; id < nn; ++id) step_node(static_cast<std::size_t>(id));
    } else {
      for (std::int64_t id = 0; id < nn; ++id) step_node(static_cast<std::size_t>(id));
    }

    std::uint64_t tick_alarms = 0;
    for (NodeId id = 0; id < n; ++id) {
      for (const auto& a : alarms[id]) ledger.submit({id, a});
      tick_alarms += alarms[id].size();
      for (std::size_t i = 0; i < inputs[id].events.size(); ++i) {
        if (inputs[id].truth[i]) continue;
        history[id].push_back(inputs[id].events[i]);
        if (history[id].size() > kReplayHistory) history[id].pop_front();
      }
    }

    if (t % config.contribution_interval == 0)
      for (const auto& node : nodes)
        for (auto& tx : node.contribute(store)) ledger.submit(std::move(tx));

    if (t % config.block_interval == 0) {
      const NodeId proposer = ledger.select_proposer(ledger.height());
      std::vector<Transaction> included;
      std::vector<Transaction> updates;
      for (auto& tx : ledger.take_pending()) {
        const bool is_model = tx.kind() == TxKind::model_contribution;
        if (!is_model && tx.kind() != TxKind::signature_contribution) {
          included.push_back(std::move(tx));
          continue;
        }
        ValidationRecord rec;
        rec.sim_time = t;
        rec.contributor = tx.sender;
        rec.kind = is_model ? ContributionKind::model : ContributionKind::filter;
        rec.digest = is_model ? std::get<ModelContribution>(tx.payload).model_digest
                              : std::get<SignatureContribution>(tx.payload).filter_digest;
        for (NodeId v : config.authorities)
          if (auto verdict = nodes[v].validate(tx, store, config.thresholds))
            rec.verdicts.emplace_back(v, *verdict);
        rec.accepted = !rec.verdicts.empty() && quorum(rec.verdicts, trust);
        updates.push_back(outcome_from_quorum(proposer, tx.sender, rec.kind, rec.accepted));
        auto& report = result.report;
        if (rec.accepted) {
          (is_model ? report.accepted_models : report.accepted_filters) += 1;
          included.push_back(std::move(tx));
        } else {
          (is_model ? report.rejected_models : report.rejected_filters) += 1;
        }
        result.validations.push_back(std::move(rec));
      }
      for (const auto& u : updates) {
        const auto& tu = std::get<TrustUpdate>(u.payload);
        auto [it, _] = trust.try_emplace(tu.subject, TrustRecord{tu.subject});
        it->second = apply_outcome(it->second, tu.outcome);
        included.push_back(u);
      }
      ledger.seal_block(proposer, t, std::move(included));
    }

    auto sync_node = [&](std::size_t id) { nodes[id].sync(ledger, store, trust, t); };
    if (options.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t id = 0; id < nn; ++id) sync_node(static_cast<std::size_t>(id));
    } else {
      for (std::int64_t id = 0; id < nn; ++id) sync_node(static_cast<std::size_t>(id));
    }

    if (options.trace) {
      std::uint64_t events = 0;
      for (const auto& in : inputs) events += in.events.size();
      nlohmann::json line{{"tick", t}, {"events", events}, {"alarms", tick_alarms},
                          {"height", ledger.height()}, {"pending", ledger.pending().size()}};
      *options.trace << line.dump() << '\n';
    }
  }

  // -- metrics ---------------------------------------------------------------
  auto& r = result.report;
  r.seed = config.seed;
  for (int c = 0; c < 4; ++c) r.per_class[static_cast<AttackClass>(c)] = {};

  for (NodeId id = 0; id < n; ++id) {
    for (const auto& win : books[id].windows) {
      std::uint64_t attack = 0;
      for (auto a : win.attack) attack += a;
      if (attack == 0) {
        ++r.benign_windows;
        if (win.alarmed) ++r.false_alarm_windows;
      } else if (static_cast<double>(attack) >= kAttackWindowFraction * static_cast<double>(win.total)) {
        const auto cls = static_cast<AttackClass>(
            std::max_element(win.attack.begin(), win.attack.end()) - win.attack.begin());
        auto& m = r.per_class[cls];
        ++m.injected_windows;
        if (win.alarmed) ++m.detected_windows;
      }
    }
  }
  r.false_alarm_rate = r.benign_windows ? static_cast<double>(r.false_alarm_windows) /
                                              static_cast<double>(r.benign_windows)
                                        : 0.0;

  std::map<AttackClass, std::vector<double>> latencies;
  for (const auto& spec : config.attacks) {
    const auto& ticks = books[spec.target].alarm_ticks;
    auto it = std::lower_bound(ticks.begin(), ticks.end(), spec.start);
    if (it != ticks.end() && *it < spec.start + spec.length)
      latencies[spec.attack_class].push_back(static_cast<double>(*it - spec.start));
  }
  for (auto& [cls, m] : r.per_class) {
    m.detection_rate = m.injected_windows ? static_cast<double>(m.detected_windows) /
                                                static_cast<double>(m.injected_windows)
                                          : 0.0;
    if (const auto& l = latencies[cls]; !l.empty()) {
      double s = 0;
      for (double v : l) s += v;
      m.mean_detection_latency_ticks = s / static_cast<double>(l.size());
    }
  }

  for (const auto& [h, tx] : ledger.scan(TxKind::signature_contribution, 0)) {
    const auto& sc = std::get<SignatureContribution>(tx.payload);
    r.bytes_filters_exchanged += store.get(sc.filter_digest).size();
    r.bytes_raw_baseline += baseline_bytes(sc.n_items);
  }
  r.compression_ratio = r.bytes_filters_exchanged
                            ? static_cast<double>(r.bytes_raw_baseline) /
                                  static_cast<double>(r.bytes_filters_exchanged)
                            : 0.0;

  r.ledger_blocks = ledger.height();
  for (const auto& b : ledger.blocks()) r.ledger_bytes += canonical_encode(b).size() + 32;

  const auto sealed_alarms = ledger.scan(TxKind::alarm, 0);
  r.alarms_sealed = sealed_alarms.size();
  double lat_sum = 0;
  for (std::size_t i = 0; i < sealed_alarms.size(); ++i) {
    const Tick raised = std::get<Alarm>(sealed_alarms[i].second.payload).sim_time;
    Tick known_by_all = raised;
    for (const auto& node : nodes) known_by_all = std::max(known_by_all, node.known_alarms()[i].recorded_at);
    lat_sum += static_cast<double>(known_by_all - raised);
    r.dissemination_latency_max = std::max<std::uint64_t>(r.dissemination_latency_max, known_by_all - raised);
  }
  r.dissemination_latency_mean =
      sealed_alarms.empty() ? 0.0 : lat_sum / static_cast<double>(sealed_alarms.size());
  for (const auto& node : nodes) r.sync_faults += node.sync_faults();
  return result;
}

std::string report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  nlohmann::ordered_json per_class;
  for (const auto& [cls, m] : r.per_class) {
    nlohmann::ordered_json c;
    c["injected_windows"] = m.injected_windows;
    c["detected_windows"] = m.detected_windows;
    c["detection_rate"] = m.detection_rate;
    c["mean_detection_latency_ticks"] =
        m.mean_detection_latency_ticks ? nlohmann::ordered_json(*m.mean_detection_latency_ticks)
                                       : nlohmann::ordered_json(nullptr);
    per_class[std::string(to_string(cls))] = c;
  }
  j["per_class"] = per_class;
  j["benign_windows"] = r.benign_windows;
  j["false_alarm_windows"] = r.false_alarm_windows;
  j["false_alarm_rate"] = r.false_alarm_rate;
  j["bytes_filters_exchanged"] = r.bytes_filters_exchanged;
  j["bytes_raw_baseline"] = r.bytes_raw_baseline;
  j["compression_ratio"] = r.compression_ratio;
  j["ledger_blocks"] = r.ledger_blocks;
  j["ledger_bytes"] = r.ledger_bytes;
  j["alarms_sealed"] = r.alarms_sealed;
  j["alarm_dissemination_latency"] = {{"mean", r.dissemination_latency_mean},
                                      {"max", r.dissemination_latency_max}};
  j["accepted_contributions"] = {{"model", r.accepted_models}, {"filter", r.accepted_filters}};
  j["rejected_contributions"] = {{"model", r.rejected_models}, {"filter", r.rejected_filters}};
  j["sync_faults"] = r.sync_faults;
  return j.dump(2);
}

}  // namespace cids
