#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cids/content_store.hpp"
#include "cids/exec.hpp"
#include "cids/ledger.hpp"
#include "cids/node.hpp"
#include "cids/traffic.hpp"
#include "cids/trust.hpp"

namespace cids {

struct AdversarySpec {
  NodeId node = 0;
  AdversaryBehavior behavior = AdversaryBehavior::none;
};

struct ScenarioConfig {
  std::uint64_t n_nodes = 6;
  std::vector<NodeId> authorities{0, 1, 2};
  Tick duration = 2000;
  Tick block_interval = 10;
  Tick contribution_interval = 100;
  std::uint64_t seed = 42;
  BenignProfile benign{};
  std::vector<AttackSpec> attacks;
  std::optional<AdversarySpec> adversary;
  TrustThresholds thresholds{};
  bool adopt_peers = true;

  Tick window_ticks = 20;
  std::size_t train_min = 50;
  double svm_lambda = 0.01;
  std::uint64_t svm_epochs = 10;
  std::uint64_t bloom_m = 10000;
  std::uint64_t bloom_k = 7;
  std::size_t catalog_size = 1000;
  std::size_t bootstrap_benign_windows = 120;
  std::size_t bootstrap_attack_windows = 20;
};

/// Throws Error(config_invalid) describing the first violated invariant.
void validate_config(const ScenarioConfig& config);

/// 6 nodes (authorities 0-2), 2000 ticks, block every 10 ticks, 20-tick
/// windows, one attack of each class on a different gateway, seed 42, and a
/// model-poisoning adversary on node 5.
ScenarioConfig standard_scenario();

struct ClassMetrics {
  std::uint64_t injected_windows = 0;
  std::uint64_t detected_windows = 0;
  double detection_rate = 0.0;
  std::optional<double> mean_detection_latency_ticks;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  std::map<AttackClass, ClassMetrics> per_class;
  std::uint64_t benign_windows = 0;
  std::uint64_t false_alarm_windows = 0;
  double false_alarm_rate = 0.0;
  std::uint64_t bytes_filters_exchanged = 0;
  std::uint64_t bytes_raw_baseline = 0;
  double compression_ratio = 0.0;
  std::uint64_t ledger_blocks = 0;
  std::uint64_t ledger_bytes = 0;
  std::uint64_t alarms_sealed = 0;
  double dissemination_latency_mean = 0.0;
  std::uint64_t dissemination_latency_max = 0;
  std::uint64_t accepted_models = 0;
  std::uint64_t accepted_filters = 0;
  std::uint64_t rejected_models = 0;
  std::uint64_t rejected_filters = 0;
  std::uint64_t sync_faults = 0;
};

/// One consensus-time inspection of a contribution.
struct ValidationRecord {
  Tick sim_time = 0;
  NodeId contributor = 0;
  ContributionKind kind = ContributionKind::model;
  Digest digest{};
  std::vector<std::pair<NodeId, ValidationVerdict>> verdicts;
  bool accepted = false;
};

struct SimulationResult {
  MetricsReport report;
  Ledger ledger;
  ContentStore store;
  std::vector<Node> nodes;
  std::vector<ValidationRecord> validations;
  TrustTable live_trust;
};

struct RunOptions {
  /// Parallel steps the per-node observe/learn and sync phases with OpenMP;
  /// serial is the reference order. Reports must be identical.
  Exec exec = Exec::parallel;
  std::ostream* trace = nullptr;
};

SimulationResult run(const ScenarioConfig& config, const RunOptions& options = {});

/// Raw signature-list exchange baseline: 64 bytes per signature.
constexpr std::uint64_t baseline_bytes(std::uint64_t n_signatures) { return n_signatures * 64; }

/// Labeled pre-deployment windows for one node, plus the benign events they
/// contained (used to seed the node's benign-key list).
struct BootstrapData {
  LabeledDataset rows;
  std::vector<EventRecord> benign_events;
};
BootstrapData bootstrap_dataset(const ScenarioConfig& config, NodeId node);

std::string report_to_json(const MetricsReport& report);

// Scenario files use the ScenarioConfig field names in snake_case.
ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);

}  // namespace cids
