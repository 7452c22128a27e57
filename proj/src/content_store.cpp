#include "cids/content_store.hpp"

#include <fstream>

#include "cids/error.hpp"

namespace cids {

Digest ContentStore::put(ByteView payload) {
  if (payload.empty()) throw Error(ErrorCode::empty_payload, "refusing to store an empty blob");
  Digest d = sha256(payload);
  entries_.try_emplace(d, payload.begin(), payload.end());
  return d;
}

const Bytes& ContentStore::get(const Digest& digest) const {
  auto it = entries_.find(digest);
  if (it == entries_.end()) throw Error(ErrorCode::not_found, to_hex(digest));
  return it->second;
}

std::size_t ContentStore::total_bytes() const {
  std::size_t n = 0;
  for (const auto& [_, v] : entries_) n += v.size();
  return n;
}

bool ContentStore::self_consistent() const {
  for (const auto& [d, v] : entries_)
    if (sha256(v) != d) return false;
  return true;
}

void ContentStore::dump(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [d, v] : entries_) {
    std::ofstream f(dir / (to_hex(d) + ".bin"), std::ios::binary);
    f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
  }
}

}  // namespace cids
