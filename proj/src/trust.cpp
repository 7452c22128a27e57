#include "cids/trust.hpp"

#include "cids/error.hpp"

namespace cids {

TrustRecord apply_outcome(TrustRecord r, Outcome outcome) {
  (outcome == Outcome::positive ? r.positives : r.negatives) += 1;
  return r;
}

double trust_score(const TrustTable& table, NodeId node) {
  auto it = table.find(node);
  return it == table.end() ? TrustRecord{node}.score() : it->second.score();
}

ValidationVerdict validate_model(const LinearModel& model, const LabeledDataset& holdout,
                                 double accuracy_threshold) {
  bool pos = false, neg = false;
  for (const auto& r : holdout) (r.label == Label::attack ? pos : neg) = true;
  if (!pos || !neg) throw Error(ErrorCode::empty_holdout, "holdout needs both labels");
  ValidationVerdict v;
  v.measured = evaluate(model, holdout).accuracy;
  v.threshold = accuracy_threshold;
  v.accepted = v.measured >= accuracy_threshold;
  v.reason = v.accepted ? VerdictReason::ok : VerdictReason::below_accuracy;
  return v;
}

ValidationVerdict validate_signature_filter(const BloomFilter& filter,
                                            const std::vector<Bytes>& known_attack_keys,
                                            const std::vector<Bytes>& benign_sample_keys,
                                            double coverage_threshold, double fpr_threshold) {
  if (known_attack_keys.empty() || benign_sample_keys.empty())
    throw Error(ErrorCode::empty_reference, "validation needs attack and benign reference keys");
  const double coverage = static_cast<double>(count_matches(filter, known_attack_keys)) /
                          static_cast<double>(known_attack_keys.size());
  if (coverage < coverage_threshold) return {false, coverage, coverage_threshold, VerdictReason::low_coverage};
  const double fpr = static_cast<double>(count_matches(filter, benign_sample_keys)) /
                     static_cast<double>(benign_sample_keys.size());
  if (fpr > fpr_threshold) return {false, fpr, fpr_threshold, VerdictReason::high_fpr};
  return {true, fpr, fpr_threshold, VerdictReason::ok};
}

bool quorum(const std::vector<std::pair<NodeId, ValidationVerdict>>& verdicts,
            const TrustTable& trust) {
  double total = 0, yes = 0;
  for (const auto& [validator, verdict] : verdicts) {
    const double s = trust_score(trust, validator);
    total += s;
    if (verdict.accepted) yes += s;
  }
  return yes > 0.5 * total;
}

Transaction outcome_from_quorum(NodeId proposer, NodeId contributor, ContributionKind kind,
                                bool accepted) {
  TrustUpdate u;
  u.subject = contributor;
  u.outcome = accepted ? Outcome::positive : Outcome::negative;
  if (kind == ContributionKind::model)
    u.reason = accepted ? TrustReason::model_accepted : TrustReason::model_rejected;
  else
    u.reason = accepted ? TrustReason::filter_accepted : TrustReason::filter_rejected;
  return Transaction{proposer, u};
}

TrustTable fold_trust(const Ledger& ledger) {
  TrustTable table;
  auto touch = [&table](NodeId n) { table.try_emplace(n, TrustRecord{n}); };
  for (NodeId a : ledger.authorities()) touch(a);
  for (const auto& block : ledger.blocks()) {
    for (const auto& tx : block.txs) {
      touch(tx.sender);
      if (const auto* u = std::get_if<TrustUpdate>(&tx.payload)) {
        touch(u->subject);
        table[u->subject] = apply_outcome(table[u->subject], u->outcome);
      }
    }
  }
  return table;
}

}  // namespace cids
