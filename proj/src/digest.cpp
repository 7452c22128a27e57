#include "cids/digest.hpp"

#include <openssl/evp.h>

#include <memory>

#include "cids/error.hpp"

namespace cids {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::wrong_proposer: return "WrongProposer";
    case ErrorCode::no_authorities: return "NoAuthorities";
    case ErrorCode::empty_payload: return "EmptyPayload";
    case ErrorCode::not_found: return "NotFound";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::malformed_bytes: return "MalformedBytes";
    case ErrorCode::invalid_parameter: return "InvalidParameter";
    case ErrorCode::degenerate_dataset: return "DegenerateDataset";
    case ErrorCode::bad_hyperparameter: return "BadHyperparameter";
    case ErrorCode::empty_holdout: return "EmptyHoldout";
    case ErrorCode::empty_reference: return "EmptyReference";
    case ErrorCode::empty_history: return "EmptyHistory";
    case ErrorCode::config_invalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Digest sha256(ByteView data) {
  Digest out{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("sha256: libcrypto failure");
  }
  return out;
}

Digest sha256(std::string_view text) { return sha256(as_bytes(text)); }

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0x0f]);
  }
  return s;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::malformed_bytes, "odd-length hex");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::malformed_bytes, "non-hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  Bytes b = from_hex(hex);
  if (b.size() != 32) throw Error(ErrorCode::malformed_bytes, "digest must be 32 bytes");
  Digest d{};
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

}  // namespace cids
