#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cids/digest.hpp"
#include "cids/exec.hpp"

namespace cids {

/// Bloom filter over byte strings using double hashing of one SHA-256:
/// index_i = (h1 + i*h2) mod m, h1/h2 the first two big-endian 64-bit words
/// of the digest, h2 forced odd.
///
/// Bits are packed little-endian within each byte (bit j lives in byte j/8 at
/// position j%8). n_inserted counts insert calls, so it is an upper bound on
/// the number of distinct members.
class BloomFilter {
 public:
  static constexpr std::uint64_t kMinBits = 8;
  static constexpr std::uint64_t kMaxHashes = 16;

  /// Throws InvalidParameter unless m >= 8 and 1 <= k <= 16.
  BloomFilter(std::uint64_t m_bits, std::uint64_t k_hashes);

  static std::vector<std::uint64_t> positions(std::uint64_t m_bits, std::uint64_t k_hashes,
                                              ByteView item);

  void insert(ByteView item);
  bool query(ByteView item) const;

  /// Throws ShapeMismatch when (m, k) differ.
  void merge_from(const BloomFilter& other);

  std::uint64_t m_bits() const { return m_bits_; }
  std::uint64_t k_hashes() const { return k_hashes_; }
  std::uint64_t n_inserted() const { return n_inserted_; }
  std::uint64_t popcount() const;
  bool test_bit(std::uint64_t j) const { return (bits_[j >> 3] >> (j & 7)) & 1u; }
  const Bytes& packed_bits() const { return bits_; }

  /// Every bit set: the "match everything" filter a malicious contributor
  /// might publish.
  static BloomFilter saturated(std::uint64_t m_bits, std::uint64_t k_hashes);

  Bytes serialize() const;
  /// Throws MalformedBytes on truncation, trailing bytes, bad parameters,
  /// nonzero padding bits, or bit counts impossible for n_inserted.
  static BloomFilter deserialize(ByteView bytes);

  friend bool operator==(const BloomFilter&, const BloomFilter&) = default;

 private:
  void set_bit(std::uint64_t j) { bits_[j >> 3] |= static_cast<std::uint8_t>(1u << (j & 7)); }

  std::uint64_t m_bits_;
  std::uint64_t k_hashes_;
  std::uint64_t n_inserted_ = 0;
  Bytes bits_;
};

BloomFilter merge(const BloomFilter& a, const BloomFilter& b);

/// (1 - e^(-k n / m))^k
double analytic_fpr(std::uint64_t m_bits, std::uint64_t k_hashes, std::uint64_t n_items);

/// round((m / n) ln 2) clamped to [1, 16].
std::uint64_t optimal_k(std::uint64_t m_bits, std::uint64_t n_items);

/// Size of serialize() for the given bit count: 24-byte header plus packed bits.
constexpr std::uint64_t serialized_size(std::uint64_t m_bits) { return 24 + (m_bits + 7) / 8; }

/// Number of items the filter reports as members. The parallel kernel and
/// serial reference must agree exactly.
std::uint64_t count_matches(const BloomFilter& filter, const std::vector<Bytes>& items,
                            Exec exec = Exec::parallel);

}  // namespace cids
