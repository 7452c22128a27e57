#include "cids/encoding.hpp"

#include <bit>
#include <cstring>

#include "cids/error.hpp"

namespace cids {

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteReader::need(std::size_t n) const {
  if (remaining() < n) throw Error(ErrorCode::malformed_bytes, "truncated input");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

Digest ByteReader::digest() {
  need(32);
  Digest d{};
  std::memcpy(d.data(), in_.data() + pos_, 32);
  pos_ += 32;
  return d;
}

ByteView ByteReader::raw(std::size_t n) {
  need(n);
  ByteView v = in_.subspan(pos_, n);
  pos_ += n;
  return v;
}

void ByteReader::expect_done() const {
  if (!done()) throw Error(ErrorCode::malformed_bytes, "trailing bytes");
}

}  // namespace cids
