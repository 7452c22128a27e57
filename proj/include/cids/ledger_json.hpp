#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "cids/ledger.hpp"

namespace cids {

std::string_view to_string(TxKind k);
std::string_view to_string(AttackClass c);
std::string_view to_string(Outcome o);
std::string_view to_string(TrustReason r);

/// One JSON object per line, one line per block, digests lowercase hex. The
/// genesis line also carries the consortium's "authorities" list.
void export_ledger(const Ledger& ledger, std::ostream& out);

/// Parses an export without validating the chain. Throws Error(malformed_bytes)
/// on empty input, invalid JSON, or missing/ill-typed fields.
Ledger import_ledger(std::istream& in);

std::string export_ledger(const Ledger& ledger);
Ledger import_ledger(const std::string& text);

}  // namespace cids
