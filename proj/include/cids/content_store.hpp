#pragma once

#include <cstddef>
#include <filesystem>
#include <map>

#include "cids/digest.hpp"

namespace cids {

// Content-addressed blob store standing in for the IPFS cluster: every key is
// the SHA-256 of its value. Shared by all simulated nodes.
class ContentStore {
 public:
  /// Stores payload under its digest; idempotent. Throws EmptyPayload.
  Digest put(ByteView payload);

  /// Throws NotFound if the digest is absent.
  const Bytes& get(const Digest& digest) const;

  bool contains(const Digest& digest) const { return entries_.contains(digest); }
  std::size_t size() const { return entries_.size(); }
  std::size_t total_bytes() const;

  /// True iff every stored payload re-hashes to its key.
  bool self_consistent() const;

  const std::map<Digest, Bytes>& entries() const { return entries_; }

  /// Writes one `<hex digest>.bin` file per entry into dir (created if needed).
  void dump(const std::filesystem::path& dir) const;

 private:
  std::map<Digest, Bytes> entries_;
};

}  // namespace cids
