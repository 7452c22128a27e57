#include <random>

#include "cids/node.hpp"
#include "cids/simnet.hpp"
#include "cids/traffic.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cids;

namespace {

auto empty_catalog() { return std::make_shared<const SignatureCatalog>(); }

EventRecord flood_event(Tick t) {
  EventRecord e;
  e.sim_time = t;
  e.src = 7;
  e.claimed_src_identity = 7;
  e.dst = 100;
  e.dst_port = 80;
  e.payload_digest = sha256("dos-flood-1");
  e.flags = flag::syn;
  return e;
}

std::vector<EventRecord> benign_ticks(NodeId gw, Tick from, Tick to, std::uint64_t seed) {
  BenignProfile p;
  const auto pool = benign_pool(p);
  Rng rng(seed);
  std::vector<EventRecord> out;
  for (Tick t = from; t <= to; ++t) {
    auto e = gen_benign(p, pool, gw, t, rng);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

bool gained_only(const BloomFilter& before, const BloomFilter& after) {
  for (std::size_t i = 0; i < before.packed_bits().size(); ++i)
    if (before.packed_bits()[i] & ~after.packed_bits()[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("benign traffic with an empty filter and no model raises nothing") {
  Node n(1, {}, empty_catalog());
  CHECK(n.observe(benign_ticks(1, 1, 200, 3)).empty());
  CHECK(n.raised_alarms().empty());
}

TEST_CASE("a known DoS signature raises one dos alarm") {
  Node n(1, {}, empty_catalog());
  n.add_signature(signature_key(flood_event(0)), AttackClass::dos);
  const auto alarms = n.observe({flood_event(5)});
  REQUIRE(alarms.size() == 1);
  CHECK(alarms[0].attack_class == AttackClass::dos);
  CHECK(alarms[0].sim_time == 5);
  CHECK(alarms[0].evidence_digest == sha256(signature_key(flood_event(5))));
  // one alarm per class per tick
  CHECK(n.observe({flood_event(5), flood_event(5)}).empty());
  CHECK(n.observe({flood_event(6)}).size() == 1);
}

TEST_CASE("known-benign keys suppress signature alarms and are never learned as attacks") {
  Node n(1, {}, empty_catalog());
  const auto e = flood_event(1);
  n.label_event(e, std::nullopt);
  n.add_signature(signature_key(e), AttackClass::dos);
  CHECK(n.observe({e}).empty());

  Node m(2, {}, empty_catalog());
  m.label_event(e, std::nullopt);
  m.label_event(e, AttackClass::dos);
  CHECK(m.local_signatures().empty());
  m.label_event(flood_event(2), std::nullopt);
  EventRecord other = flood_event(3);
  other.payload_digest = sha256("fresh");
  m.label_event(other, AttackClass::dos);
  CHECK(m.local_signatures().size() == 1);
  for (const auto& [k, _] : m.local_signatures()) CHECK(m.local_filter().query(k));
}

TEST_CASE("a trained node flags a DoS burst through the anomaly engine") {
  const auto cfg = standard_scenario();
  const auto boot = bootstrap_dataset(cfg, 1);
  NodeConfig nc;
  nc.svm = {cfg.svm_lambda, cfg.svm_epochs, cfg.seed ^ 1};
  Node n(1, nc, empty_catalog());
  n.learn(boot.rows);
  REQUIRE(n.model());
  CHECK(n.observe(benign_ticks(1, 1, 100, 8)).empty());

  Rng rng(5);
  AttackSpec dos{AttackClass::dos, 101, 20, 1, 20.0};
  auto burst = gen_dos(dos, 2.0, rng);
  auto benign = benign_ticks(1, 101, 120, 9);
  burst.insert(burst.end(), benign.begin(), benign.end());
  std::stable_sort(burst.begin(), burst.end(),
                   [](const auto& a, const auto& b) { return a.sim_time < b.sim_time; });
  const auto alarms = n.observe(burst);
  CHECK_FALSE(alarms.empty());
  for (const auto& a : alarms) CHECK(a.attack_class == AttackClass::anomaly);
}

TEST_CASE("learn waits for train_min rows of both classes and is deterministic") {
  NodeConfig nc;
  nc.train_min = 50;
  nc.svm = {0.01, 20, 77};
  const auto rows = testing::two_clusters(50, 3);
  Node n(1, nc, empty_catalog());
  n.learn(LabeledDataset(rows.begin(), rows.begin() + 49));
  CHECK_FALSE(n.model());
  n.learn({rows.back()});
  REQUIRE(n.model());
  CHECK(testing::brute_accuracy(*n.model(), rows) >= 0.97);

  Node twin(1, nc, empty_catalog());
  twin.learn(rows);
  CHECK(model_serialize(*twin.model()) == model_serialize(*n.model()));

  Node one_class(2, nc, empty_catalog());
  LabeledDataset attacks = rows;
  for (auto& r : attacks) r.label = Label::attack;
  one_class.learn(attacks);
  CHECK_FALSE(one_class.model());
}

TEST_CASE("contribute publishes digests that match the store") {
  ContentStore store;
  Node bare(3, {}, empty_catalog());
  auto txs = bare.contribute(store);
  REQUIRE(txs.size() == 1);
  const auto& sc = std::get<SignatureContribution>(txs[0].payload);
  CHECK(sc.n_items == 0);
  CHECK(sha256(store.get(sc.filter_digest)) == sc.filter_digest);
  CHECK(bare.contribute(store) == txs);

  NodeConfig nc;
  nc.svm.seed = 4;
  Node trained(4, nc, std::make_shared<const SignatureCatalog>(make_catalog(100)));
  trained.learn(testing::two_clusters(60, 9));
  auto both = trained.contribute(store);
  REQUIRE(both.size() == 2);
  const auto& mc = std::get<ModelContribution>(both[0].payload);
  CHECK(store.get(mc.model_digest) == model_serialize(*trained.model()));
  CHECK(mc.holdout_claimed_accuracy >= 0.97);
  CHECK(std::get<SignatureContribution>(both[1].payload).n_items == 100);
}

TEST_CASE("adversarial contributions substitute poisoned payloads") {
  ContentStore store;
  NodeConfig nc;
  nc.behavior = AdversaryBehavior::poison_model;
  Node liar(5, nc, empty_catalog());
  liar.learn(testing::two_clusters(60, 9));
  const auto txs = liar.contribute(store);
  const auto published = model_deserialize(store.get(std::get<ModelContribution>(txs[0].payload).model_digest));
  CHECK(published == negated(*liar.model()));

  nc.behavior = AdversaryBehavior::poison_filter;
  Node flooder(5, nc, empty_catalog());
  const auto ftx = flooder.contribute(store);
  const auto f = BloomFilter::deserialize(store.get(std::get<SignatureContribution>(ftx[0].payload).filter_digest));
  CHECK(f.popcount() == f.m_bits());
}

TEST_CASE("sync merges peer filters, records alarms and only ever gains bits") {
  auto catalog = empty_catalog();
  ContentStore store;
  Ledger ledger({0});
  Node a(0, {}, catalog), b(1, {}, catalog);

  const TrustTable trust;
  const BloomFilter before = a.merged_filter();
  a.sync(ledger, store, trust, 0);
  CHECK(a.merged_filter() == before);
  CHECK(a.last_synced_height() == 1);

  const auto key = signature_key(flood_event(0));
  b.add_signature(key, AttackClass::dos);
  CHECK_FALSE(sig_match(a.merged_filter(), flood_event(0)));
  auto txs = b.contribute(store);
  const Alarm alarm{AttackClass::dos, sha256(key), 9};
  txs.push_back({1, alarm});
  ledger.seal_block(0, 10, txs);

  const BloomFilter prior = a.merged_filter();
  a.sync(ledger, store, trust, 10);
  CHECK(sig_match(a.merged_filter(), flood_event(0)));
  CHECK(gained_only(prior, a.merged_filter()));
  REQUIRE(a.known_alarms().size() == 1);
  CHECK(a.known_alarms()[0].alarm == alarm);
  CHECK(a.known_alarms()[0].recorded_at == 10);
  CHECK(a.last_synced_height() == ledger.height());
  // The disseminated alarm tells a the class of the peer signature.
  const auto raised = a.observe({flood_event(11)});
  REQUIRE(raised.size() == 1);
  CHECK(raised[0].attack_class == AttackClass::dos);
}

TEST_CASE("model adoption prefers strictly better-trusted contributors") {
  auto catalog = empty_catalog();
  ContentStore store;
  Ledger ledger({0});
  NodeConfig nc;
  nc.svm.seed = 1;
  Node me(0, nc, catalog), high(1, nc, catalog), low(2, nc, catalog);
  me.learn(testing::two_clusters(60, 1));
  high.learn(testing::two_clusters(60, 2));
  low.learn(testing::two_clusters(60, 3));

  std::vector<Transaction> txs;
  for (const Node* n : {&low, &high}) {
    auto c = n->contribute(store);
    txs.push_back(c[0]);
  }
  ledger.seal_block(0, 10, txs);

  TrustTable trust;
  trust[0] = {0, 1, 0};
  trust[1] = {1, 5, 0};
  trust[2] = {2, 0, 3};
  me.sync(ledger, store, trust, 10);
  CHECK(me.model_source() == 1);
  CHECK(*me.model() == *high.model());
  REQUIRE(me.adopted_model_digests().size() == 1);

  NodeConfig stay = nc;
  stay.adopt_peers = false;
  Node hermit(3, stay, catalog);
  hermit.learn(testing::two_clusters(60, 4));
  const auto own = *hermit.model();
  hermit.sync(ledger, store, trust, 10);
  CHECK(*hermit.model() == own);

  Node equal(4, nc, catalog);
  equal.learn(testing::two_clusters(60, 5));
  TrustTable tied;
  tied[1] = {1, 1, 0};
  tied[2] = {2, 1, 0};
  tied[4] = {4, 1, 0};
  const auto mine = *equal.model();
  equal.sync(ledger, store, tied, 10);
  CHECK(*equal.model() == mine);
}

TEST_CASE("validate uses local reference data") {
  auto catalog = std::make_shared<const SignatureCatalog>(make_catalog(200));
  ContentStore store;
  NodeConfig nc;
  Node validator(0, nc, catalog);
  Node contributor(1, nc, catalog);
  const TrustThresholds th;

  const auto filter_tx = contributor.contribute(store)[0];
  CHECK_FALSE(validator.validate(filter_tx, store, th));  // no benign keys yet
  for (const auto& e : benign_ticks(0, 1, 100, 2)) validator.label_event(e, std::nullopt);
  const auto v = validator.validate(filter_tx, store, th);
  REQUIRE(v);
  CHECK(v->accepted);

  Transaction missing{1, SignatureContribution{sha256("nowhere"), 0, 10000, 7}};
  const auto m = validator.validate(missing, store, th);
  REQUIRE(m);
  CHECK_FALSE(m->accepted);

  validator.learn(testing::two_clusters(60, 11));
  contributor.learn(testing::two_clusters(60, 12));
  const auto model_tx = contributor.contribute(store)[0];
  const auto mv = validator.validate(model_tx, store, th);
  REQUIRE(mv);
  CHECK(mv->accepted);
}
