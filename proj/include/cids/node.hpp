#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "cids/bloom.hpp"
#include "cids/content_store.hpp"
#include "cids/detection.hpp"
#include "cids/ledger.hpp"
#include "cids/trust.hpp"

namespace cids {

enum class AdversaryBehavior { none, poison_model, poison_filter };

struct NodeConfig {
  Tick window_ticks = 20;
  std::size_t train_min = 50;
  SvmParams svm{};
  std::uint64_t bloom_m = 10000;
  std::uint64_t bloom_k = 7;
  bool adopt_peers = true;
  AdversaryBehavior behavior = AdversaryBehavior::none;
};

/// Known attack signatures every node ships with; the reference set validators
/// use to measure a contributed filter's coverage.
struct SignatureCatalog {
  std::vector<Bytes> keys;
  std::vector<AttackClass> classes;
};

/// 1000-style synthetic catalog; deterministic and seed-independent.
SignatureCatalog make_catalog(std::size_t size);

/// An alarm a node learned about from the ledger.
struct KnownAlarm {
  std::uint64_t height = 0;
  NodeId raised_by = 0;
  Alarm alarm;
  Tick recorded_at = 0;
};

class Node {
 public:
  Node(NodeId id, NodeConfig config, std::shared_ptr<const SignatureCatalog> catalog);

  NodeId id() const { return id_; }
  const NodeConfig& config() const { return config_; }

  /// Signature engine first, anomaly engine second. At most one alarm per
  /// attack class per tick; alarms are returned for ledger submission and
  /// kept in raised_alarms().
  std::vector<Alarm> observe(const std::vector<EventRecord>& events);

  /// Ground-truth supervision. Attack events add their signature unless the
  /// key is known benign; benign events extend the suppression list.
  void label_event(const EventRecord& e, std::optional<AttackClass> attack_class);

  /// Appends rows and retrains once the buffer holds train_min rows of both
  /// classes.
  void learn(const LabeledDataset& rows);

  /// Features of the current sliding window.
  FeatureVector current_features() const;

  /// Stores the current filter (and model, if any) and returns the
  /// contribution transactions. Adversarial behaviours substitute a negated
  /// model or a saturated filter here.
  std::vector<Transaction> contribute(ContentStore& store) const;

  /// Local-data validation of a peer contribution; nullopt when this node
  /// lacks the reference data to judge it.
  std::optional<ValidationVerdict> validate(const Transaction& tx, const ContentStore& store,
                                            const TrustThresholds& thresholds) const;

  /// Pulls every block above last_synced_height: merges accepted filters,
  /// adopts better-trusted models, records alarms.
  void sync(const Ledger& ledger, const ContentStore& store, const TrustTable& trust, Tick now);

  const BloomFilter& local_filter() const { return local_filter_; }
  const BloomFilter& merged_filter() const { return merged_filter_; }
  const std::optional<LinearModel>& model() const { return model_; }
  NodeId model_source() const { return model_source_; }
  const std::vector<Digest>& adopted_model_digests() const { return adopted_; }
  const LabeledDataset& training_buffer() const { return training_buffer_; }
  std::uint64_t last_synced_height() const { return last_synced_height_; }
  const std::vector<Alarm>& raised_alarms() const { return raised_alarms_; }
  const std::vector<KnownAlarm>& known_alarms() const { return known_alarms_; }
  const std::map<Bytes, AttackClass>& local_signatures() const { return local_signatures_; }
  std::size_t benign_key_count() const { return benign_keys_.size(); }
  std::uint64_t sync_faults() const { return sync_faults_; }

  /// Inserts a signature directly (catalog seeding, tests).
  void add_signature(const Bytes& key, AttackClass cls);

 private:
  void push_window(const EventRecord& e);
  AttackClass class_for_key(const Bytes& key) const;

  NodeId id_;
  NodeConfig config_;
  std::shared_ptr<const SignatureCatalog> catalog_;

  std::map<Bytes, AttackClass> local_signatures_;
  std::set<Bytes> benign_keys_;
  BloomFilter local_filter_;
  BloomFilter merged_filter_;
  std::map<Digest, AttackClass> evidence_class_;

  std::optional<LinearModel> model_;
  NodeId model_source_ = 0;
  std::vector<Digest> adopted_;
  LabeledDataset training_buffer_;

  std::deque<EventRecord> window_;
  Tick last_alarm_tick_ = 0;
  std::set<AttackClass> alarmed_this_tick_;
  std::vector<Alarm> raised_alarms_;

  std::uint64_t last_synced_height_ = 0;
  std::vector<KnownAlarm> known_alarms_;
  std::uint64_t sync_faults_ = 0;
};

}  // namespace cids
