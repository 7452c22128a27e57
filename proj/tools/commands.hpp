#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cids::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsage = 2;

struct RunArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;         // empty: stdout
  std::string trace_path;       // empty: no trace
  std::string ledger_out_path;  // empty: no export
  std::string store_dump_dir;   // empty: no dump
  bool serial = false;
};

/// Seed precedence: --seed, then the config file, then CIDS_SEED.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_ledger_verify(const std::string& path, std::ostream& out, std::ostream& err);
int cmd_bloom_calc(std::int64_t m, std::int64_t n, std::optional<std::int64_t> k, std::ostream& out,
                   std::ostream& err);
int cmd_trust_report(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace cids::cli
