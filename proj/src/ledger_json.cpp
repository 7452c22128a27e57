#include "cids/ledger_json.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>

#include "cids/error.hpp"
#include "json.hpp"

namespace cids {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kKinds = {"model_contribution", "signature_contribution",
                                                    "alarm", "trust_update"};
constexpr std::array<std::string_view, 5> kClasses = {"dos", "spoof", "recon", "replay", "anomaly"};
constexpr std::array<std::string_view, 2> kOutcomes = {"positive", "negative"};
constexpr std::array<std::string_view, 6> kReasons = {"model_accepted",  "model_rejected",
                                                      "filter_accepted", "filter_rejected",
                                                      "alarm_confirmed", "alarm_false"};

template <typename E, std::size_t N>
E parse_enum(const std::array<std::string_view, N>& names, const json& j) {
  const auto& s = j.get_ref<const std::string&>();
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  throw Error(ErrorCode::malformed_bytes, "unknown enum value '" + s + "'");
}

json tx_to_json(const Transaction& tx) {
  json j;
  j["kind"] = to_string(tx.kind());
  j["sender"] = tx.sender;
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ModelContribution>) {
          j["model_digest"] = to_hex(p.model_digest);
          j["model_kind"] = "svm";
          j["holdout_claimed_accuracy"] = p.holdout_claimed_accuracy;
        } else if constexpr (std::is_same_v<T, SignatureContribution>) {
          j["filter_digest"] = to_hex(p.filter_digest);
          j["n_items"] = p.n_items;
          j["m_bits"] = p.m_bits;
          j["k_hashes"] = p.k_hashes;
        } else if constexpr (std::is_same_v<T, Alarm>) {
          j["attack_class"] = to_string(p.attack_class);
          j["evidence_digest"] = to_hex(p.evidence_digest);
          j["sim_time"] = p.sim_time;
        } else {
          j["subject"] = p.subject;
          j["outcome"] = to_string(p.outcome);
          j["reason"] = to_string(p.reason);
        }
      },
      tx.payload);
  return j;
}

Transaction tx_from_json(const json& j) {
  Transaction tx;
  tx.sender = j.at("sender").get<std::uint64_t>();
  switch (parse_enum<TxKind>(kKinds, j.at("kind"))) {
    case TxKind::model_contribution: {
      ModelContribution p;
      p.model_digest = digest_from_hex(j.at("model_digest").get<std::string>());
      if (j.at("model_kind").get<std::string>() != "svm")
        throw Error(ErrorCode::malformed_bytes, "unknown model_kind");
      p.holdout_claimed_accuracy = j.at("holdout_claimed_accuracy").get<double>();
      tx.payload = p;
      break;
    }
    case TxKind::signature_contribution: {
      SignatureContribution p;
      p.filter_digest = digest_from_hex(j.at("filter_digest").get<std::string>());
      p.n_items = j.at("n_items").get<std::uint64_t>();
      p.m_bits = j.at("m_bits").get<std::uint64_t>();
      p.k_hashes = j.at("k_hashes").get<std::uint64_t>();
      tx.payload = p;
      break;
    }
    case TxKind::alarm: {
      Alarm p;
      p.attack_class = parse_enum<AttackClass>(kClasses, j.at("attack_class"));
      p.evidence_digest = digest_from_hex(j.at("evidence_digest").get<std::string>());
      p.sim_time = j.at("sim_time").get<std::uint64_t>();
      tx.payload = p;
      break;
    }
    case TxKind::trust_update: {
      TrustUpdate p;
      p.subject = j.at("subject").get<std::uint64_t>();
      p.outcome = parse_enum<Outcome>(kOutcomes, j.at("outcome"));
      p.reason = parse_enum<TrustReason>(kReasons, j.at("reason"));
      tx.payload = p;
      break;
    }
  }
  return tx;
}

}  // namespace

std::string_view to_string(TxKind k) { return kKinds[static_cast<std::size_t>(k)]; }
std::string_view to_string(AttackClass c) { return kClasses[static_cast<std::size_t>(c)]; }
std::string_view to_string(Outcome o) { return kOutcomes[static_cast<std::size_t>(o)]; }
std::string_view to_string(TrustReason r) { return kReasons[static_cast<std::size_t>(r)]; }

void export_ledger(const Ledger& ledger, std::ostream& out) {
  for (const auto& b : ledger.blocks()) {
    json j;
    j["index"] = b.index;
    j["prev_hash"] = to_hex(b.prev_hash);
    j["proposer"] = b.proposer;
    j["sim_time"] = b.sim_time;
    j["txs"] = json::array();
    for (const auto& tx : b.txs) j["txs"].push_back(tx_to_json(tx));
    j["hash"] = to_hex(b.hash);
    if (b.index == 0) j["authorities"] = ledger.authorities();
    out << j.dump() << '\n';
  }
}

Ledger import_ledger(std::istream& in) {
  std::vector<Block> blocks;
  std::vector<NodeId> authorities;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      Block b;
      b.index = j.at("index").get<std::uint64_t>();
      b.prev_hash = digest_from_hex(j.at("prev_hash").get<std::string>());
      b.proposer = j.at("proposer").get<std::uint64_t>();
      b.sim_time = j.at("sim_time").get<std::uint64_t>();
      for (const auto& t : j.at("txs")) b.txs.push_back(tx_from_json(t));
      b.hash = digest_from_hex(j.at("hash").get<std::string>());
      if (blocks.empty()) authorities = j.at("authorities").get<std::vector<NodeId>>();
      blocks.push_back(std::move(b));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_bytes, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (blocks.empty()) throw Error(ErrorCode::malformed_bytes, "ledger file contains no blocks");
  return Ledger::from_blocks(std::move(authorities), std::move(blocks));
}

std::string export_ledger(const Ledger& ledger) {
  std::ostringstream out;
  export_ledger(ledger, out);
  return out.str();
}

Ledger import_ledger(const std::string& text) {
  std::istringstream in(text);
  return import_ledger(in);
}

}  // namespace cids
