#include "cids/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cids/encoding.hpp"
#include "cids/error.hpp"

namespace cids {

namespace {

template <typename E>
E read_tag(ByteReader& r, std::uint8_t count) {
  std::uint8_t t = r.u8();
  if (t >= count) throw Error(ErrorCode::malformed_bytes, "enum tag out of range");
  return static_cast<E>(t);
}

double read_fraction(ByteReader& r) {
  double v = r.f64();
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::malformed_bytes, "fraction outside [0,1]");
  return v;
}

Transaction decode_transaction(ByteReader& r) {
  Transaction tx;
  auto kind = read_tag<TxKind>(r, 4);
  tx.sender = r.u64();
  switch (kind) {
    case TxKind::model_contribution: {
      ModelContribution p;
      p.model_digest = r.digest();
      p.model_kind = read_tag<ModelKind>(r, 1);
      p.holdout_claimed_accuracy = read_fraction(r);
      tx.payload = p;
      break;
    }
    case TxKind::signature_contribution: {
      SignatureContribution p;
      p.filter_digest = r.digest();
      p.n_items = r.u64();
      p.m_bits = r.u64();
      p.k_hashes = r.u64();
      tx.payload = p;
      break;
    }
    case TxKind::alarm: {
      Alarm p;
      p.attack_class = read_tag<AttackClass>(r, 5);
      p.evidence_digest = r.digest();
      p.sim_time = r.u64();
      tx.payload = p;
      break;
    }
    case TxKind::trust_update: {
      TrustUpdate p;
      p.subject = r.u64();
      p.outcome = read_tag<Outcome>(r, 2);
      p.reason = read_tag<TrustReason>(r, 6);
      tx.payload = p;
      break;
    }
  }
  return tx;
}

// Checks everything about blocks[i] that depends on its neighbours and its own
// content. verify_chain is the conjunction over all i.
bool block_ok(const std::vector<Block>& blocks, const std::vector<NodeId>& authorities,
              std::size_t i, const Block& b) {
  if (b.index != i) return false;
  if (authorities.empty() || b.proposer != authorities[i % authorities.size()]) return false;
  if (i == 0) {
    if (b.prev_hash != zero_digest() || !b.txs.empty()) return false;
  } else if (b.prev_hash != blocks[i - 1].hash) {
    return false;
  }
  for (const auto& tx : b.txs) {
    if (const auto* m = std::get_if<ModelContribution>(&tx.payload)) {
      if (!(m->holdout_claimed_accuracy >= 0.0 && m->holdout_claimed_accuracy <= 1.0)) return false;
    }
  }
  return block_hash(b) == b.hash;
}

}  // namespace

void encode_transaction(ByteWriter& w, const Transaction& tx) {
  w.u8(static_cast<std::uint8_t>(tx.kind()));
  w.u64(tx.sender);
  std::visit(
      [&w](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ModelContribution>) {
          w.digest(p.model_digest);
          w.u8(static_cast<std::uint8_t>(p.model_kind));
          w.f64(p.holdout_claimed_accuracy);
        } else if constexpr (std::is_same_v<T, SignatureContribution>) {
          w.digest(p.filter_digest);
          w.u64(p.n_items);
          w.u64(p.m_bits);
          w.u64(p.k_hashes);
        } else if constexpr (std::is_same_v<T, Alarm>) {
          w.u8(static_cast<std::uint8_t>(p.attack_class));
          w.digest(p.evidence_digest);
          w.u64(p.sim_time);
        } else {
          w.u64(p.subject);
          w.u8(static_cast<std::uint8_t>(p.outcome));
          w.u8(static_cast<std::uint8_t>(p.reason));
        }
      },
      tx.payload);
}

Bytes canonical_encode(const Block& block) {
  ByteWriter w;
  w.u64(block.index);
  w.digest(block.prev_hash);
  w.u64(block.proposer);
  w.u64(block.sim_time);
  w.u64(block.txs.size());
  for (const auto& tx : block.txs) encode_transaction(w, tx);
  return std::move(w).take();
}

Block canonical_decode(ByteView bytes) {
  ByteReader r(bytes);
  Block b;
  b.index = r.u64();
  b.prev_hash = r.digest();
  b.proposer = r.u64();
  b.sim_time = r.u64();
  std::uint64_t n = r.u64();
  // Smallest transaction is 1 + 8 + 8 + 1 + 1 bytes.
  if (n > r.remaining() / 19) throw Error(ErrorCode::malformed_bytes, "transaction count too large");
  b.txs.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) b.txs.push_back(decode_transaction(r));
  r.expect_done();
  return b;
}

Digest block_hash(const Block& block) { return sha256(canonical_encode(block)); }

Ledger::Ledger(std::vector<NodeId> authorities, Tick genesis_time)
    : authorities_(std::move(authorities)) {
  if (authorities_.empty()) throw Error(ErrorCode::no_authorities, "authority list is empty");
  std::set<NodeId> seen(authorities_.begin(), authorities_.end());
  if (seen.size() != authorities_.size())
    throw Error(ErrorCode::invalid_parameter, "duplicate authority");
  Block genesis;
  genesis.proposer = authorities_.front();
  genesis.sim_time = genesis_time;
  genesis.hash = block_hash(genesis);
  blocks_.push_back(std::move(genesis));
}

Ledger Ledger::from_blocks(std::vector<NodeId> authorities, std::vector<Block> blocks) {
  Ledger l;
  l.authorities_ = std::move(authorities);
  l.blocks_ = std::move(blocks);
  return l;
}

NodeId Ledger::select_proposer(std::uint64_t height) const {
  if (authorities_.empty()) throw Error(ErrorCode::no_authorities, "authority list is empty");
  return authorities_[height % authorities_.size()];
}

const Block& Ledger::seal_block(NodeId proposer, Tick sim_time, std::vector<Transaction> txs) {
  const std::uint64_t next = height();
  if (proposer != select_proposer(next))
    throw Error(ErrorCode::wrong_proposer, "node " + std::to_string(proposer) +
                                               " is not the proposer for height " +
                                               std::to_string(next));
  for (const auto& tx : txs) {
    auto it = std::find(pending_.begin(), pending_.end(), tx);
    if (it != pending_.end()) pending_.erase(it);
  }
  Block b;
  b.index = next;
  b.prev_hash = tip().hash;
  b.proposer = proposer;
  b.sim_time = sim_time;
  b.txs = std::move(txs);
  b.hash = block_hash(b);
  blocks_.push_back(std::move(b));
  return blocks_.back();
}

std::vector<std::pair<std::uint64_t, Transaction>> Ledger::scan(TxKind kind,
                                                                std::uint64_t since_height) const {
  std::vector<std::pair<std::uint64_t, Transaction>> out;
  for (std::uint64_t h = since_height; h < blocks_.size(); ++h)
    for (const auto& tx : blocks_[h].txs)
      if (tx.kind() == kind) out.emplace_back(h, tx);
  return out;
}

ChainCheck check_chain(const Ledger& ledger) {
  const auto& blocks = ledger.blocks();
  if (blocks.empty()) return {false, 0};
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (!block_ok(blocks, ledger.authorities(), i, blocks[i])) return {false, i};
  return {};
}

bool verify_chain(const Ledger& ledger) { return check_chain(ledger).valid; }

namespace {

// Outcome of verify_chain on the chain with blocks[i] replaced by mutant.
// Only positions i and i + 1 can change, so only they are re-checked.
bool spliced_chain_valid(const std::vector<Block>& blocks, const std::vector<NodeId>& authorities,
                         std::size_t i, const Block& mutant) {
  if (!block_ok(blocks, authorities, i, mutant)) return false;
  if (i + 1 < blocks.size() && blocks[i + 1].prev_hash != mutant.hash) return false;
  return true;
}

std::uint64_t undetected_at(const std::vector<Block>& blocks, const std::vector<NodeId>& auth,
                            std::size_t bi, const Bytes& enc, std::size_t pos) {
  std::uint64_t missed = 0;
  Bytes m = enc;
  for (int delta = 1; delta < 256; ++delta) {
    m[pos] = static_cast<std::uint8_t>(enc[pos] ^ delta);
    try {
      Block mutant = canonical_decode(m);
      mutant.hash = blocks[bi].hash;
      if (spliced_chain_valid(blocks, auth, bi, mutant)) ++missed;
    } catch (const Error&) {
      // undecodable: detected
    }
  }
  return missed;
}

std::uint64_t undetected_hash_byte(const std::vector<Block>& blocks,
                                   const std::vector<NodeId>& auth, std::size_t bi,
                                   std::size_t pos) {
  std::uint64_t missed = 0;
  Block mutant = blocks[bi];
  for (int delta = 1; delta < 256; ++delta) {
    mutant.hash[pos] = static_cast<std::uint8_t>(blocks[bi].hash[pos] ^ delta);
    if (spliced_chain_valid(blocks, auth, bi, mutant)) ++missed;
  }
  return missed;
}

}  // namespace

TamperSweep tamper_sweep(const Ledger& ledger, Exec exec) {
  const auto& blocks = ledger.blocks();
  const auto& auth = ledger.authorities();

  // Flatten (block, byte) sites so the parallel loop is a single range.
  struct Site {
    std::size_t block;
    std::size_t pos;
    bool hash_field;
  };
  std::vector<Bytes> encodings;
  std::vector<Site> sites;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    encodings.push_back(canonical_encode(blocks[bi]));
    for (std::size_t p = 0; p < encodings.back().size(); ++p) sites.push_back({bi, p, false});
    for (std::size_t p = 0; p < 32; ++p) sites.push_back({bi, p, true});
  }

  auto run_site = [&](const Site& s) {
    return s.hash_field ? undetected_hash_byte(blocks, auth, s.block, s.pos)
                        : undetected_at(blocks, auth, s.block, encodings[s.block], s.pos);
  };

  std::uint64_t missed = 0;
  const auto n = static_cast<std::int64_t>(sites.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(+ : missed) schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) missed += run_site(sites[i]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) missed += run_site(sites[i]);
  }
  return {static_cast<std::uint64_t>(sites.size()) * 255, missed};
}

}  // namespace cids
