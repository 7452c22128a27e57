#include <set>

#include "cids/error.hpp"
#include "cids/traffic.hpp"
#include "doctest.h"

using namespace cids;

namespace {

std::vector<EventRecord> benign_run(const BenignProfile& p, Tick ticks, std::uint64_t seed) {
  const auto pool = benign_pool(p);
  Rng rng(seed);
  std::vector<EventRecord> out;
  for (Tick t = 1; t <= ticks; ++t) {
    auto e = gen_benign(p, pool, 0, t, rng);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

}  // namespace

TEST_CASE("benign rate zero emits nothing") {
  BenignProfile p;
  p.rate = 0.0;
  CHECK(benign_run(p, 500, 1).empty());
}

TEST_CASE("benign traffic is deterministic per seed") {
  BenignProfile p;
  CHECK(benign_run(p, 200, 42) == benign_run(p, 200, 42));
  CHECK(benign_run(p, 200, 42) != benign_run(p, 200, 43));
}

TEST_CASE("benign mean rate is within 5% over 10^4 ticks") {
  BenignProfile p;
  const auto events = benign_run(p, 10000, 42);
  const double rate = static_cast<double>(events.size()) / 10000.0;
  CHECK(rate == doctest::Approx(p.rate).epsilon(0.05));
  for (const auto& e : events) {
    CHECK((e.flags & flag::syn) == 0);
    CHECK(e.src == e.claimed_src_identity);
  }
}

TEST_CASE("each benign payload keeps a single service port") {
  const auto pool = benign_pool({});
  REQUIRE(pool.size() == kBenignPoolSize);
  std::set<Digest> digests;
  for (const auto& p : pool) {
    digests.insert(p.digest);
    CHECK(p.length >= 1);
  }
  CHECK(digests.size() == pool.size());
}

TEST_CASE("dos floods carry the syn flag at the requested intensity") {
  Rng rng(3);
  AttackSpec spec{AttackClass::dos, 10, 1000, 2, 20.0};
  const auto ev = gen_dos(spec, 2.0, rng);
  CHECK(static_cast<double>(ev.size()) / 1000.0 == doctest::Approx(40.0).epsilon(0.05));
  std::set<NodeId> targets;
  for (const auto& e : ev) {
    CHECK((e.flags & flag::syn) != 0);
    CHECK(e.sim_time >= 10);
    CHECK(e.sim_time < 1010);
    targets.insert(e.dst);
  }
  CHECK(targets == std::set<NodeId>{device_id(2, 0)});
  CHECK(extract_features(ev, 1000)[3] == 1.0);
}

TEST_CASE("spoofed events conflict on claimed identity") {
  Rng rng(4);
  AttackSpec spec{AttackClass::spoof, 1, 100, 1, 1.0};
  const auto ev = gen_spoof(spec, 2.0, rng);
  REQUIRE_FALSE(ev.empty());
  for (const auto& e : ev) {
    CHECK(e.src != e.claimed_src_identity);
    CHECK(e.flags == flag::arp_reply);
  }
  CHECK(extract_features(ev, 100)[5] == static_cast<double>(ev.size()));
}

TEST_CASE("recon probes strictly ascending, distinct ports") {
  Rng rng(5);
  AttackSpec spec{AttackClass::recon, 1, 200, 3, 2.0};
  const auto ev = gen_recon(spec, 2.0, rng);
  REQUIRE(ev.size() > 1);
  CHECK(ev.front().dst_port == 1);
  for (std::size_t i = 1; i < ev.size(); ++i) CHECK(ev[i].dst_port > ev[i - 1].dst_port);
  CHECK(extract_features(ev, 200)[2] == static_cast<double>(ev.size()));
}

TEST_CASE("replay re-emits captured history") {
  const auto history = benign_run({}, 50, 6);
  REQUIRE_FALSE(history.empty());
  Rng rng(7);
  AttackSpec spec{AttackClass::replay, 100, 100, 0, 2.0};
  const auto ev = gen_replay(spec, 2.0, history, rng);
  REQUIRE_FALSE(ev.empty());
  std::set<Digest> replayed;
  for (const auto& e : ev) {
    replayed.insert(e.payload_digest);
    bool found = false;
    for (const auto& h : history) {
      EventRecord moved = h;
      moved.sim_time = e.sim_time;
      if (moved == e) found = true;
    }
    CHECK(found);
  }
  CHECK(replayed.size() <= 3);
  // Heavy duplication shows up as a high repeated-payload ratio.
  CHECK(extract_features(ev, 100)[4] >= 0.9);

  Rng again(8);
  CHECK_THROWS_AS(gen_replay(spec, 2.0, {}, again), Error);
  try {
    gen_replay(spec, 2.0, {}, again);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_history);
  }
}

TEST_CASE("zero-length attacks emit nothing") {
  Rng rng(1);
  CHECK(gen_dos({AttackClass::dos, 5, 0, 0, 20.0}, 2.0, rng).empty());
  CHECK(gen_spoof({AttackClass::spoof, 5, 0, 0, 1.0}, 2.0, rng).empty());
  CHECK(gen_recon({AttackClass::recon, 5, 0, 0, 2.0}, 2.0, rng).empty());
}

TEST_CASE("attacked windows move their signature features") {
  const Tick W = 50;
  const BenignProfile p;
  const auto benign = benign_run(p, W, 42);
  const auto base = extract_features(benign, W);

  auto mixed = [&](std::vector<EventRecord> attack) {
    attack.insert(attack.end(), benign.begin(), benign.end());
    std::stable_sort(attack.begin(), attack.end(),
                     [](const auto& a, const auto& b) { return a.sim_time < b.sim_time; });
    return extract_features(attack, W);
  };

  Rng rng(42);
  const auto dos = mixed(gen_dos({AttackClass::dos, 1, W, 0, 20.0}, p.rate, rng));
  CHECK(dos[0] >= 10.0 * base[0]);
  CHECK(dos[3] > base[3]);

  const auto spoof = mixed(gen_spoof({AttackClass::spoof, 1, W, 0, 1.0}, p.rate, rng));
  CHECK(base[5] == 0.0);
  CHECK(spoof[5] > 0.0);

  const auto recon_only = gen_recon({AttackClass::recon, 1, W, 0, 20.0}, p.rate, rng);
  const auto recon = mixed(recon_only);
  CHECK(recon[2] >= 10.0 * base[2]);

  const auto replay = extract_features(gen_replay({AttackClass::replay, 1, W, 0, 2.0}, p.rate, benign, rng), W);
  CHECK(replay[4] >= 0.5);
}
