#include "cids/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cids/error.hpp"

namespace cids {

namespace {

constexpr NodeId kServerBase = 1000;
constexpr NodeId kAttackerBase = 5000;
constexpr NodeId kSpoofedSourceBase = 100000;

std::uint64_t poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

// Calls emit(tick) Poisson(rate) times per tick of the attack.
template <typename F>
void per_tick(const AttackSpec& spec, double rate, Rng& rng, F&& emit) {
  for (Tick t = spec.start; t < spec.start + spec.length; ++t) {
    const auto n = poisson(rate, rng);
    for (std::uint64_t i = 0; i < n; ++i) emit(t);
  }
}

}  // namespace

NodeId device_id(NodeId gateway, std::size_t index) { return 100 * (gateway + 1) + index; }

std::vector<BenignPayload> benign_pool(const BenignProfile& profile) {
  Rng rng(0x6265'6e69'676eULL);
  std::normal_distribution<double> len(profile.payload_mean, profile.payload_std);
  std::vector<BenignPayload> pool;
  pool.reserve(kBenignPoolSize);
  for (std::size_t i = 0; i < kBenignPoolSize; ++i) {
    const double l = std::max(1.0, std::round(len(rng)));
    pool.push_back({sha256("benign-payload-" + std::to_string(i)),
                    kBenignPorts[i % kBenignPorts.size()], static_cast<std::uint64_t>(l)});
  }
  return pool;
}

std::vector<EventRecord> gen_benign(const BenignProfile& profile,
                                    std::span<const BenignPayload> pool, NodeId gateway, Tick tick,
                                    Rng& rng) {
  std::vector<EventRecord> out;
  const auto n = poisson(profile.rate, rng);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto& p = pool[rng() % pool.size()];
    EventRecord e;
    e.sim_time = tick;
    e.src = kServerBase + rng() % 4;
    e.claimed_src_identity = e.src;
    e.dst = device_id(gateway, rng() % kDevicesPerGateway);
    e.dst_port = p.port;
    e.payload_digest = p.digest;
    e.payload_len = p.length;
    e.flags = flag::ack;
    out.push_back(e);
  }
  return out;
}

std::vector<EventRecord> gen_dos(const AttackSpec& spec, double base_rate, Rng& rng) {
  std::vector<EventRecord> out;
  per_tick(spec, spec.intensity * base_rate, rng, [&](Tick t) {
    EventRecord e;
    e.sim_time = t;
    e.src = kSpoofedSourceBase + rng() % 1'000'000;
    e.claimed_src_identity = e.src;
    e.dst = device_id(spec.target, 0);
    e.dst_port = 80;
    const auto variant = rng() % 4;
    e.payload_digest = sha256("dos-flood-" + std::to_string(variant));
    e.payload_len = variant * 10;
    e.flags = flag::syn;
    out.push_back(e);
  });
  return out;
}

std::vector<EventRecord> gen_spoof(const AttackSpec& spec, double base_rate, Rng& rng) {
  std::vector<EventRecord> out;
  const NodeId attacker = kAttackerBase + spec.target;
  per_tick(spec, spec.intensity * base_rate, rng, [&](Tick t) {
    EventRecord e;
    e.sim_time = t;
    e.src = attacker;
    e.claimed_src_identity = device_id(spec.target, rng() % kDevicesPerGateway);
    e.dst = device_id(spec.target, rng() % kDevicesPerGateway);
    e.dst_port = 0;
    const auto variant = rng() % 4;
    e.payload_digest = sha256("arp-reply-" + std::to_string(variant));
    e.payload_len = 28;
    e.flags = flag::arp_reply;
    out.push_back(e);
  });
  return out;
}

std::vector<EventRecord> gen_recon(const AttackSpec& spec, double base_rate, Rng& rng) {
  std::vector<EventRecord> out;
  const NodeId scanner = kAttackerBase + 500 + spec.target;
  const NodeId victim = device_id(spec.target, rng() % kDevicesPerGateway);
  const Digest probe = sha256("recon-probe");
  std::uint32_t next_port = 1;
  per_tick(spec, spec.intensity * base_rate, rng, [&](Tick t) {
    if (next_port > 65535) return;
    EventRecord e;
    e.sim_time = t;
    e.src = scanner;
    e.claimed_src_identity = scanner;
    e.dst = victim;
    e.dst_port = static_cast<std::uint16_t>(next_port++);
    e.payload_digest = probe;
    e.payload_len = 0;
    e.flags = flag::syn;
    out.push_back(e);
  });
  return out;
}

std::vector<EventRecord> gen_replay(const AttackSpec& spec, double base_rate,
                                    std::span<const EventRecord> history, Rng& rng) {
  if (history.empty()) throw Error(ErrorCode::empty_history, "no captured traffic to replay");
  constexpr std::size_t kCaptured = 3;
  std::vector<EventRecord> captured;
  for (std::size_t i = 0; i < kCaptured; ++i) captured.push_back(history[rng() % history.size()]);
  std::vector<EventRecord> out;
  per_tick(spec, spec.intensity * base_rate, rng, [&](Tick t) {
    EventRecord e = captured[rng() % captured.size()];
    e.sim_time = t;
    out.push_back(e);
  });
  return out;
}

}  // namespace cids
