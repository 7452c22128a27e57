#include "cids/node.hpp"

#include <algorithm>

#include "cids/encoding.hpp"
#include "cids/error.hpp"

namespace cids {

SignatureCatalog make_catalog(std::size_t size) {
  SignatureCatalog cat;
  cat.keys.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    EventRecord e;
    e.dst_port = static_cast<std::uint16_t>(1024 + i % 4096);
    e.payload_digest = sha256("catalog-signature-" + std::to_string(i));
    e.flags = flag::syn;
    cat.keys.push_back(signature_key(e));
    cat.classes.push_back(static_cast<AttackClass>(i % 4));
  }
  return cat;
}

Node::Node(NodeId id, NodeConfig config, std::shared_ptr<const SignatureCatalog> catalog)
    : id_(id),
      config_(config),
      catalog_(std::move(catalog)),
      local_filter_(config.bloom_m, config.bloom_k),
      merged_filter_(config.bloom_m, config.bloom_k),
      model_source_(id) {
  for (std::size_t i = 0; i < catalog_->keys.size(); ++i)
    add_signature(catalog_->keys[i], catalog_->classes[i]);
}

void Node::add_signature(const Bytes& key, AttackClass cls) {
  if (!local_signatures_.emplace(key, cls).second) return;
  local_filter_.insert(key);
  merged_filter_.insert(key);
}

void Node::push_window(const EventRecord& e) {
  window_.push_back(e);
  while (!window_.empty() && window_.front().sim_time + config_.window_ticks <= e.sim_time)
    window_.pop_front();
}

FeatureVector Node::current_features() const {
  std::vector<EventRecord> w(window_.begin(), window_.end());
  return extract_features(w, config_.window_ticks);
}

AttackClass Node::class_for_key(const Bytes& key) const {
  if (auto it = local_signatures_.find(key); it != local_signatures_.end()) return it->second;
  if (auto it = evidence_class_.find(sha256(key)); it != evidence_class_.end()) return it->second;
  // Peer signature whose class has not been disseminated yet.
  return AttackClass::anomaly;
}

std::vector<Alarm> Node::observe(const std::vector<EventRecord>& events) {
  std::vector<Alarm> out;
  for (const auto& e : events) {
    push_window(e);
    if (e.sim_time != last_alarm_tick_) {
      last_alarm_tick_ = e.sim_time;
      alarmed_this_tick_.clear();
    }

    std::optional<Alarm> alarm;
    const Bytes key = signature_key(e);
    if (merged_filter_.query(key) && !benign_keys_.contains(key)) {
      alarm = Alarm{class_for_key(key), sha256(key), e.sim_time};
    } else if (model_) {
      const FeatureVector f = current_features();
      if (svm_predict(*model_, f).label == Label::attack) {
        ByteWriter w;
        for (double v : f) w.f64(v);
        alarm = Alarm{AttackClass::anomaly, sha256(w.bytes()), e.sim_time};
      }
    }
    if (alarm && alarmed_this_tick_.insert(alarm->attack_class).second) {
      raised_alarms_.push_back(*alarm);
      out.push_back(*alarm);
    }
  }
  return out;
}

void Node::label_event(const EventRecord& e, std::optional<AttackClass> attack_class) {
  Bytes key = signature_key(e);
  if (!attack_class) {
    benign_keys_.insert(std::move(key));
  } else if (!benign_keys_.contains(key)) {
    add_signature(key, *attack_class);
  }
}

void Node::learn(const LabeledDataset& rows) {
  training_buffer_.insert(training_buffer_.end(), rows.begin(), rows.end());
  if (training_buffer_.size() < config_.train_min) return;
  const bool pos = std::any_of(training_buffer_.begin(), training_buffer_.end(),
                               [](const LabeledRow& r) { return r.label == Label::attack; });
  const bool neg = std::any_of(training_buffer_.begin(), training_buffer_.end(),
                               [](const LabeledRow& r) { return r.label == Label::benign; });
  if (!pos || !neg) return;
  model_ = svm_train(training_buffer_, config_.svm);
  model_source_ = id_;
}

std::vector<Transaction> Node::contribute(ContentStore& store) const {
  std::vector<Transaction> txs;
  if (model_) {
    LinearModel published =
        config_.behavior == AdversaryBehavior::poison_model ? negated(*model_) : *model_;
    ModelContribution mc;
    mc.model_digest = store.put(model_serialize(published));
    mc.holdout_claimed_accuracy =
        training_buffer_.empty() ? 0.0 : evaluate(published, training_buffer_).accuracy;
    txs.push_back({id_, mc});
  }
  const BloomFilter published =
      config_.behavior == AdversaryBehavior::poison_filter
          ? BloomFilter::saturated(local_filter_.m_bits(), local_filter_.k_hashes())
          : local_filter_;
  SignatureContribution sc;
  sc.filter_digest = store.put(published.serialize());
  sc.n_items = published.n_inserted();
  sc.m_bits = published.m_bits();
  sc.k_hashes = published.k_hashes();
  txs.push_back({id_, sc});
  return txs;
}

std::optional<ValidationVerdict> Node::validate(const Transaction& tx, const ContentStore& store,
                                                const TrustThresholds& thresholds) const {
  if (const auto* mc = std::get_if<ModelContribution>(&tx.payload)) {
    const bool pos = std::any_of(training_buffer_.begin(), training_buffer_.end(),
                                 [](const LabeledRow& r) { return r.label == Label::attack; });
    const bool neg = std::any_of(training_buffer_.begin(), training_buffer_.end(),
                                 [](const LabeledRow& r) { return r.label == Label::benign; });
    if (!pos || !neg) return std::nullopt;
    try {
      return validate_model(model_deserialize(store.get(mc->model_digest)), training_buffer_,
                            thresholds.accuracy);
    } catch (const Error&) {
      return ValidationVerdict{false, 0.0, thresholds.accuracy, VerdictReason::below_accuracy};
    }
  }
  if (const auto* sc = std::get_if<SignatureContribution>(&tx.payload)) {
    if (benign_keys_.empty() || catalog_->keys.empty()) return std::nullopt;
    try {
      BloomFilter f = BloomFilter::deserialize(store.get(sc->filter_digest));
      if (f.m_bits() != sc->m_bits || f.k_hashes() != sc->k_hashes || f.n_inserted() != sc->n_items)
        return ValidationVerdict{false, 0.0, thresholds.coverage, VerdictReason::low_coverage};
      std::vector<Bytes> benign(benign_keys_.begin(), benign_keys_.end());
      return validate_signature_filter(f, catalog_->keys, benign, thresholds.coverage,
                                       thresholds.filter_fpr);
    } catch (const Error&) {
      return ValidationVerdict{false, 0.0, thresholds.coverage, VerdictReason::low_coverage};
    }
  }
  return std::nullopt;
}

void Node::sync(const Ledger& ledger, const ContentStore& store, const TrustTable& trust,
                Tick now) {
  const auto& blocks = ledger.blocks();
  struct Candidate {
    NodeId sender;
    Digest digest;
  };
  std::optional<Candidate> best;

  for (std::uint64_t h = last_synced_height_; h < blocks.size(); ++h) {
    for (const auto& tx : blocks[h].txs) {
      if (const auto* alarm = std::get_if<Alarm>(&tx.payload)) {
        known_alarms_.push_back({h, tx.sender, *alarm, now});
        if (alarm->attack_class != AttackClass::anomaly)
          evidence_class_.emplace(alarm->evidence_digest, alarm->attack_class);
      } else if (tx.sender == id_) {
        continue;
      } else if (const auto* sc = std::get_if<SignatureContribution>(&tx.payload)) {
        try {
          merged_filter_.merge_from(BloomFilter::deserialize(store.get(sc->filter_digest)));
        } catch (const Error&) {
          ++sync_faults_;
        }
      } else if (const auto* mc = std::get_if<ModelContribution>(&tx.payload)) {
        if (!config_.adopt_peers) continue;
        const double s = trust_score(trust, tx.sender);
        if (!best || s > trust_score(trust, best->sender) ||
            (s == trust_score(trust, best->sender) && tx.sender <= best->sender))
          best = Candidate{tx.sender, mc->model_digest};
      }
    }
  }
  last_synced_height_ = blocks.size();

  if (!best) return;
  if (model_ && trust_score(trust, best->sender) <= trust_score(trust, model_source_)) return;
  try {
    model_ = model_deserialize(store.get(best->digest));
    model_source_ = best->sender;
    adopted_.push_back(best->digest);
  } catch (const Error&) {
    ++sync_faults_;
  }
}

}  // namespace cids
