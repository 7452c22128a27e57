#include "cids/bloom.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "cids/encoding.hpp"
#include "cids/error.hpp"

namespace cids {

namespace {

std::uint64_t load_be64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

void check_shape(std::uint64_t m, std::uint64_t k, ErrorCode code) {
  if (m < BloomFilter::kMinBits || k < 1 || k > BloomFilter::kMaxHashes)
    throw Error(code, "bloom parameters out of range (m=" + std::to_string(m) +
                          ", k=" + std::to_string(k) + ")");
}

}  // namespace

BloomFilter::BloomFilter(std::uint64_t m_bits, std::uint64_t k_hashes)
    : m_bits_(m_bits), k_hashes_(k_hashes) {
  check_shape(m_bits, k_hashes, ErrorCode::invalid_parameter);
  bits_.assign((m_bits + 7) / 8, 0);
}

std::vector<std::uint64_t> BloomFilter::positions(std::uint64_t m_bits, std::uint64_t k_hashes,
                                                  ByteView item) {
  const Digest d = sha256(item);
  const std::uint64_t h1 = load_be64(d.data());
  const std::uint64_t h2 = load_be64(d.data() + 8) | 1u;
  std::vector<std::uint64_t> out(k_hashes);
  for (std::uint64_t i = 0; i < k_hashes; ++i) {
    // Exact (h1 + i*h2) mod m; 128-bit intermediate avoids wraparound.
    unsigned __int128 v = static_cast<unsigned __int128>(h1) +
                          static_cast<unsigned __int128>(i) * static_cast<unsigned __int128>(h2);
    out[i] = static_cast<std::uint64_t>(v % m_bits);
  }
  return out;
}

void BloomFilter::insert(ByteView item) {
  for (auto j : positions(m_bits_, k_hashes_, item)) set_bit(j);
  ++n_inserted_;
}

bool BloomFilter::query(ByteView item) const {
  for (auto j : positions(m_bits_, k_hashes_, item))
    if (!test_bit(j)) return false;
  return true;
}

void BloomFilter::merge_from(const BloomFilter& other) {
  if (other.m_bits_ != m_bits_ || other.k_hashes_ != k_hashes_)
    throw Error(ErrorCode::shape_mismatch, "cannot merge filters of different shape");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  n_inserted_ += other.n_inserted_;
}

BloomFilter merge(const BloomFilter& a, const BloomFilter& b) {
  BloomFilter out = a;
  out.merge_from(b);
  return out;
}

std::uint64_t BloomFilter::popcount() const {
  std::uint64_t n = 0;
  for (auto b : bits_) n += static_cast<std::uint64_t>(std::popcount(b));
  return n;
}

BloomFilter BloomFilter::saturated(std::uint64_t m_bits, std::uint64_t k_hashes) {
  BloomFilter f(m_bits, k_hashes);
  for (std::uint64_t j = 0; j < m_bits; ++j) f.set_bit(j);
  // Keep the popcount <= k*n invariant satisfiable so the blob deserializes.
  f.n_inserted_ = (m_bits + k_hashes - 1) / k_hashes;
  return f;
}

Bytes BloomFilter::serialize() const {
  ByteWriter w;
  w.u64(m_bits_);
  w.u64(k_hashes_);
  w.u64(n_inserted_);
  w.raw(bits_);
  return std::move(w).take();
}

BloomFilter BloomFilter::deserialize(ByteView bytes) {
  ByteReader r(bytes);
  const std::uint64_t m = r.u64();
  const std::uint64_t k = r.u64();
  const std::uint64_t n = r.u64();
  check_shape(m, k, ErrorCode::malformed_bytes);
  if (r.remaining() != (m + 7) / 8)
    throw Error(ErrorCode::malformed_bytes, "bit-array length does not match m_bits");
  BloomFilter f(m, k);
  f.n_inserted_ = n;
  ByteView packed = r.raw(f.bits_.size());
  std::copy(packed.begin(), packed.end(), f.bits_.begin());
  if (m % 8 != 0 && (f.bits_.back() >> (m % 8)) != 0)
    throw Error(ErrorCode::malformed_bytes, "nonzero padding bits");
  const std::uint64_t pc = f.popcount();
  // k*n may overflow for absurd n; only a lower bound matters here.
  const bool within = n >= (pc + k - 1) / k;
  if (!within) throw Error(ErrorCode::malformed_bytes, "more bits set than k * n_inserted");
  return f;
}

double analytic_fpr(std::uint64_t m_bits, std::uint64_t k_hashes, std::uint64_t n_items) {
  if (n_items == 0) return 0.0;
  const double k = static_cast<double>(k_hashes);
  const double fill = -std::expm1(-k * static_cast<double>(n_items) / static_cast<double>(m_bits));
  return std::pow(fill, k);
}

std::uint64_t optimal_k(std::uint64_t m_bits, std::uint64_t n_items) {
  const double raw = std::round(static_cast<double>(m_bits) / static_cast<double>(n_items) *
                                std::numbers::ln2);
  if (raw < 1.0) return 1;
  if (raw > static_cast<double>(BloomFilter::kMaxHashes)) return BloomFilter::kMaxHashes;
  return static_cast<std::uint64_t>(raw);
}

std::uint64_t count_matches(const BloomFilter& filter, const std::vector<Bytes>& items,
                            Exec exec) {
  std::uint64_t hits = 0;
  const auto n = static_cast<std::int64_t>(items.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(+ : hits) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) hits += filter.query(items[i]) ? 1 : 0;
  } else {
    for (std::int64_t i = 0; i < n; ++i) hits += filter.query(items[i]) ? 1 : 0;
  }
  return hits;
}

}  // namespace cids
