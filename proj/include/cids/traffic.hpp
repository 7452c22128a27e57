#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cids/detection.hpp"
#include "cids/ledger.hpp"

namespace cids {

using Rng = std::mt19937_64;

struct BenignProfile {
  double rate = 2.0;  // mean events per tick per gateway
  double payload_mean = 200.0;
  double payload_std = 60.0;
};

struct AttackSpec {
  AttackClass attack_class = AttackClass::dos;
  Tick start = 0;
  Tick length = 0;
  NodeId target = 0;
  double intensity = 1.0;  // multiple of the benign rate
};

inline constexpr std::size_t kBenignPoolSize = 256;
inline constexpr std::array<std::uint16_t, 4> kBenignPorts = {80, 443, 1883, 5683};
inline constexpr std::size_t kDevicesPerGateway = 8;

/// Device addresses behind a gateway.
NodeId device_id(NodeId gateway, std::size_t index);

struct BenignPayload {
  Digest digest;
  std::uint16_t port;
  std::uint64_t length;
};

/// Fixed pool of legitimate payloads; each belongs to one service port and
/// has a fixed length drawn from the profile's distribution.
std::vector<BenignPayload> benign_pool(const BenignProfile& profile);

/// Poisson arrivals at the profile rate for one tick, all ack-flagged, from
/// one of four upstream servers to a device behind the gateway.
std::vector<EventRecord> gen_benign(const BenignProfile& profile,
                                    std::span<const BenignPayload> pool, NodeId gateway, Tick tick,
                                    Rng& rng);

/// SYN flood against one device from randomized sources.
std::vector<EventRecord> gen_dos(const AttackSpec& spec, double base_rate, Rng& rng);

/// ARP replies whose claimed identity impersonates a legitimate device.
std::vector<EventRecord> gen_spoof(const AttackSpec& spec, double base_rate, Rng& rng);

/// Port sweep: one probe per port, ports strictly ascending from 1.
std::vector<EventRecord> gen_recon(const AttackSpec& spec, double base_rate, Rng& rng);

/// Re-emits a handful of captured events at high duplication. Throws
/// EmptyHistory when nothing has been captured.
std::vector<EventRecord> gen_replay(const AttackSpec& spec, double base_rate,
                                    std::span<const EventRecord> history, Rng& rng);

}  // namespace cids
