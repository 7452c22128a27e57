#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "cids/digest.hpp"
#include "cids/exec.hpp"

namespace cids {

using NodeId = std::uint64_t;
using Tick = std::uint64_t;

enum class TxKind : std::uint8_t { model_contribution, signature_contribution, alarm, trust_update };
enum class ModelKind : std::uint8_t { svm };
enum class AttackClass : std::uint8_t { dos, spoof, recon, replay, anomaly };
enum class Outcome : std::uint8_t { positive, negative };
enum class TrustReason : std::uint8_t {
  model_accepted,
  model_rejected,
  filter_accepted,
  filter_rejected,
  alarm_confirmed,
  alarm_false,
};

struct ModelContribution {
  Digest model_digest{};
  ModelKind model_kind = ModelKind::svm;
  double holdout_claimed_accuracy = 0.0;
  friend bool operator==(const ModelContribution&, const ModelContribution&) = default;
};

struct SignatureContribution {
  Digest filter_digest{};
  std::uint64_t n_items = 0;
  std::uint64_t m_bits = 0;
  std::uint64_t k_hashes = 0;
  friend bool operator==(const SignatureContribution&, const SignatureContribution&) = default;
};

struct Alarm {
  AttackClass attack_class = AttackClass::anomaly;
  Digest evidence_digest{};
  Tick sim_time = 0;
  friend bool operator==(const Alarm&, const Alarm&) = default;
};

struct TrustUpdate {
  NodeId subject = 0;
  Outcome outcome = Outcome::positive;
  TrustReason reason = TrustReason::model_accepted;
  friend bool operator==(const TrustUpdate&, const TrustUpdate&) = default;
};

using TxPayload = std::variant<ModelContribution, SignatureContribution, Alarm, TrustUpdate>;

struct Transaction {
  NodeId sender = 0;
  TxPayload payload;

  TxKind kind() const { return static_cast<TxKind>(payload.index()); }
  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Block {
  std::uint64_t index = 0;
  Digest prev_hash{};
  NodeId proposer = 0;
  Tick sim_time = 0;
  std::vector<Transaction> txs;
  Digest hash{};
  friend bool operator==(const Block&, const Block&) = default;
};

/// Canonical byte encoding of a block, hash field excluded.
Bytes canonical_encode(const Block& block);
void encode_transaction(class ByteWriter& w, const Transaction& tx);

/// Inverse of canonical_encode. Throws Error(malformed_bytes) for bytes that
/// do not describe a valid block (bad tag, fraction outside [0,1], trailing
/// data). The returned block's hash field is zero.
Block canonical_decode(ByteView bytes);

Digest block_hash(const Block& block);

/// Proof-of-authority chain over a fixed consortium. Single writer; the type
/// holds no locks.
class Ledger {
 public:
  /// Creates the chain with its genesis block, proposed by authorities[0].
  /// Throws NoAuthorities on an empty list, InvalidParameter on duplicates.
  explicit Ledger(std::vector<NodeId> authorities, Tick genesis_time = 0);

  /// Rebuilds a ledger from already-committed blocks without re-validating;
  /// use verify_chain to check them.
  static Ledger from_blocks(std::vector<NodeId> authorities, std::vector<Block> blocks);

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<NodeId>& authorities() const { return authorities_; }
  const std::vector<Transaction>& pending() const { return pending_; }
  std::uint64_t height() const { return blocks_.size(); }
  const Block& tip() const { return blocks_.back(); }

  NodeId select_proposer(std::uint64_t height) const;

  void submit(Transaction tx) { pending_.push_back(std::move(tx)); }
  std::vector<Transaction> take_pending() { return std::exchange(pending_, {}); }

  /// Appends a block at the next height. Throws WrongProposer unless proposer
  /// is the scheduled authority. Included transactions are removed from the
  /// pending pool.
  const Block& seal_block(NodeId proposer, Tick sim_time, std::vector<Transaction> txs);

  std::vector<std::pair<std::uint64_t, Transaction>> scan(TxKind kind,
                                                          std::uint64_t since_height) const;

  /// Test hook for tamper experiments; bypasses every invariant.
  std::vector<Block>& mutable_blocks_for_testing() { return blocks_; }

 private:
  Ledger() = default;

  std::vector<NodeId> authorities_;
  std::vector<Block> blocks_;
  std::vector<Transaction> pending_;
};

struct ChainCheck {
  bool valid = true;
  std::optional<std::uint64_t> first_invalid_height;
};

/// Re-checks hash links, recomputed hashes, indices, the genesis shape and the
/// proposer rotation.
ChainCheck check_chain(const Ledger& ledger);
bool verify_chain(const Ledger& ledger);

struct TamperSweep {
  std::uint64_t mutations = 0;
  std::uint64_t undetected = 0;
};

/// Applies every single-byte substitution (all 255 alternatives) to the
/// canonical encoding of every committed block, re-decodes, splices the result
/// into a copy of the chain and counts mutations that verify_chain fails to
/// flag. Undecodable mutants count as detected.
TamperSweep tamper_sweep(const Ledger& ledger, Exec exec = Exec::parallel);

}  // namespace cids
