#include <set>

#include "cids/error.hpp"
#include "cids/ledger_json.hpp"
#include "cids/simnet.hpp"
#include "doctest.h"

using namespace cids;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig c = standard_scenario();
  c.duration = 600;
  c.attacks = {{AttackClass::dos, 201, 100, 1, 20.0}, {AttackClass::recon, 401, 100, 3, 2.0}};
  return c;
}

const SimulationResult& standard_result() {
  static const SimulationResult r = run(standard_scenario());
  return r;
}

void expect_invalid(const ScenarioConfig& c) {
  try {
    validate_config(c);
    FAIL("config accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_invalid);
  }
  CHECK_THROWS_AS(run(c), Error);
}

}  // namespace

TEST_CASE("invalid scenarios are rejected") {
  auto c = small_scenario();
  c.duration = 0;
  expect_invalid(c);

  c = small_scenario();
  c.block_interval = 0;
  expect_invalid(c);

  c = small_scenario();
  c.contribution_interval = 0;
  expect_invalid(c);

  c = small_scenario();
  c.authorities = {0, 9};
  expect_invalid(c);

  c = small_scenario();
  c.authorities = {};
  expect_invalid(c);

  c = small_scenario();
  c.attacks.push_back({AttackClass::dos, 590, 20, 0, 1.0});
  expect_invalid(c);

  c = small_scenario();
  c.attacks.push_back({AttackClass::dos, 10, 20, 6, 1.0});
  expect_invalid(c);

  c = small_scenario();
  c.attacks.push_back({AttackClass::spoof, 10, 20, 0, 0.0});
  expect_invalid(c);

  c = small_scenario();
  c.adversary = AdversarySpec{1, AdversaryBehavior::poison_model};
  expect_invalid(c);

  c = small_scenario();
  c.thresholds.accuracy = 1.5;
  expect_invalid(c);

  validate_config(small_scenario());
  validate_config(standard_scenario());
}

TEST_CASE("baseline bytes") {
  CHECK(baseline_bytes(0) == 0);
  CHECK(baseline_bytes(1000) == 64000);
  CHECK(static_cast<double>(baseline_bytes(1000)) / static_cast<double>(serialized_size(10000)) ==
        doctest::Approx(50.2).epsilon(0.001));
}

TEST_CASE("runs are deterministic and serial equals parallel") {
  const auto cfg = small_scenario();
  const auto a = run(cfg, {Exec::parallel, nullptr});
  const auto b = run(cfg, {Exec::parallel, nullptr});
  const auto s = run(cfg, {Exec::serial, nullptr});
  CHECK(report_to_json(a.report) == report_to_json(b.report));
  CHECK(report_to_json(a.report) == report_to_json(s.report));
  CHECK(export_ledger(a.ledger) == export_ledger(s.ledger));

  auto reseeded = cfg;
  reseeded.seed = 43;
  const auto c = run(reseeded);
  CHECK(c.report.seed == 43);
  CHECK(report_to_json(c.report) != report_to_json(a.report));
}

TEST_CASE("ledger grows one block per interval and verifies") {
  const auto cfg = small_scenario();
  const auto r = run(cfg);
  CHECK(r.report.ledger_blocks == cfg.duration / cfg.block_interval + 1);
  CHECK(r.ledger.height() == r.report.ledger_blocks);
  CHECK(verify_chain(r.ledger));
  for (std::size_t i = 0; i < r.ledger.blocks().size(); ++i) CHECK(r.ledger.blocks()[i].index == i);

  auto odd = cfg;
  odd.duration = 605;
  odd.block_interval = 7;
  CHECK(run(odd).report.ledger_blocks == 605 / 7 + 1);
}

TEST_CASE("standard scenario metrics") {
  const auto& r = standard_result();
  const auto& rep = r.report;
  CHECK(rep.seed == 42);
  for (const auto& [cls, m] : rep.per_class) {
    const std::string cls_name(to_string(cls));
    CAPTURE(cls_name);
    CHECK(m.injected_windows > 0);
    CHECK(m.detected_windows <= m.injected_windows);
    CHECK(m.detection_rate >= 0.0);
    CHECK(m.detection_rate <= 1.0);
  }
  CHECK(rep.per_class.at(AttackClass::dos).detection_rate >= 0.9);
  CHECK(rep.false_alarm_rate <= 0.05);
  CHECK(rep.false_alarm_rate >= 0.0);
  CHECK(rep.compression_ratio == doctest::Approx(static_cast<double>(rep.bytes_raw_baseline) /
                                                 static_cast<double>(rep.bytes_filters_exchanged)));
  CHECK(rep.compression_ratio >= 50.0);
  CHECK(rep.sync_faults == 0);
  CHECK(rep.dissemination_latency_max <= standard_scenario().block_interval);
}

TEST_CASE("every sealed contribution resolves in the store") {
  const auto& r = standard_result();
  CHECK(r.store.self_consistent());
  for (const auto& [h, tx] : r.ledger.scan(TxKind::model_contribution, 0)) {
    const auto& d = std::get<ModelContribution>(tx.payload).model_digest;
    CHECK(sha256(r.store.get(d)) == d);
  }
  for (const auto& [h, tx] : r.ledger.scan(TxKind::signature_contribution, 0)) {
    const auto& d = std::get<SignatureContribution>(tx.payload).filter_digest;
    CHECK(sha256(r.store.get(d)) == d);
  }
}

TEST_CASE("the poisoning adversary is contained") {
  const auto& r = standard_result();
  const NodeId adversary = standard_scenario().adversary->node;
  CHECK(r.report.rejected_models >= 1);
  std::set<Digest> rejected;
  for (const auto& v : r.validations)
    if (v.contributor == adversary && v.kind == ContributionKind::model) {
      CHECK_FALSE(v.accepted);
      rejected.insert(v.digest);
    }
  CHECK_FALSE(rejected.empty());
  for (const auto& [h, tx] : r.ledger.scan(TxKind::model_contribution, 0))
    CHECK(tx.sender != adversary);
  for (const auto& node : r.nodes) {
    for (const auto& d : node.adopted_model_digests()) CHECK_FALSE(rejected.contains(d));
    if (node.id() != adversary) CHECK(node.model_source() != adversary);
  }
  // Every rejected model costs the adversary one negative outcome.
  CHECK(r.live_trust.at(adversary).negatives == rejected.size());
  for (const auto& [id, rec] : r.live_trust)
    if (id != adversary) CHECK(r.live_trust.at(adversary).score() < rec.score());
}

TEST_CASE("trust folded from the ledger equals the live table") {
  const auto& r = standard_result();
  const auto folded = fold_trust(r.ledger);
  for (const auto& [id, rec] : r.live_trust) {
    REQUIRE(folded.contains(id));
    CHECK(folded.at(id).positives == rec.positives);
    CHECK(folded.at(id).negatives == rec.negatives);
  }
  const auto reimported = fold_trust(import_ledger(export_ledger(r.ledger)));
  for (const auto& [id, rec] : folded) CHECK(reimported.at(id).score() == rec.score());
}

TEST_CASE("scenario JSON round-trips") {
  const auto cfg = standard_scenario();
  const auto text = scenario_to_json(cfg);
  CHECK(scenario_to_json(scenario_from_json(text)) == text);
  CHECK_THROWS_AS(scenario_from_json("{\"n_nodez\": 3}"), Error);
  CHECK_THROWS_AS(scenario_from_json("not json"), Error);
}
