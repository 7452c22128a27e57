#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cids/bloom.hpp"
#include "cids/detection.hpp"
#include "cids/ledger.hpp"

namespace cids {

/// Reputation as the mean of a Beta(1 + positives, 1 + negatives) posterior.
struct TrustRecord {
  NodeId node = 0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;

  double score() const {
    return (1.0 + static_cast<double>(positives)) /
           (2.0 + static_cast<double>(positives) + static_cast<double>(negatives));
  }
  friend bool operator==(const TrustRecord&, const TrustRecord&) = default;
};

TrustRecord apply_outcome(TrustRecord r, Outcome outcome);

using TrustTable = std::map<NodeId, TrustRecord>;

/// Score for a node, 0.5 for nodes with no record yet.
double trust_score(const TrustTable& table, NodeId node);

enum class VerdictReason : std::uint8_t { below_accuracy, low_coverage, high_fpr, ok };

struct ValidationVerdict {
  bool accepted = false;
  double measured = 0.0;
  double threshold = 0.0;
  VerdictReason reason = VerdictReason::below_accuracy;
};

struct TrustThresholds {
  double accuracy = 0.7;
  double coverage = 0.8;
  double filter_fpr = 0.05;
};

/// Accepts iff holdout accuracy >= threshold. Throws EmptyHoldout unless the
/// holdout is non-empty with both labels.
ValidationVerdict validate_model(const LinearModel& model, const LabeledDataset& holdout,
                                 double accuracy_threshold);

/// Coverage over known attack keys is checked before the benign false-positive
/// estimate. On a coverage failure measured/threshold describe coverage, else
/// they describe the FPR check. Throws EmptyReference on an empty key list.
ValidationVerdict validate_signature_filter(const BloomFilter& filter,
                                            const std::vector<Bytes>& known_attack_keys,
                                            const std::vector<Bytes>& benign_sample_keys,
                                            double coverage_threshold, double fpr_threshold);

/// Strict trust-weighted majority: sum of accepting scores > half the total.
bool quorum(const std::vector<std::pair<NodeId, ValidationVerdict>>& verdicts,
            const TrustTable& trust);

enum class ContributionKind { model, filter };

Transaction outcome_from_quorum(NodeId proposer, NodeId contributor, ContributionKind kind,
                                bool accepted);

/// Reputation state as a pure fold over every TrustUpdate on the chain. Nodes
/// that appear on the chain (authorities, senders, subjects) but never
/// received an update get a fresh record.
TrustTable fold_trust(const Ledger& ledger);

}  // namespace cids
