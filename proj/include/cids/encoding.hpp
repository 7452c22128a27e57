#pragma once

#include <cstddef>
#include <cstdint>

#include "cids/digest.hpp"

namespace cids {

// Canonical wire rules shared by every module: integers are 8-byte big-endian,
// enum tags one byte, reals IEEE-754 binary64 big-endian, digests raw.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u64(std::uint64_t v);
  void f64(double v);
  void digest(const Digest& d) { out_.insert(out_.end(), d.begin(), d.end()); }
  void raw(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }
  std::size_t size() const { return out_.size(); }

 private:
  Bytes out_;
};

// Reads the same layout back; every accessor throws Error(malformed_bytes)
// on truncation.
class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint64_t u64();
  double f64();
  Digest digest();
  ByteView raw(std::size_t n);

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }
  void expect_done() const;

 private:
  void need(std::size_t n) const;

  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace cids
