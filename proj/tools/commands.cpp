#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cids/bloom.hpp"
#include "cids/error.hpp"
#include "cids/ledger_json.hpp"
#include "cids/simnet.hpp"
#include "cids/trust.hpp"
#include "json.hpp"

namespace cids::cli {

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("CIDS_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used == std::string(v).size()) return s;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  auto text = slurp(args.config_path);
  if (!text) {
    err << "cids run: cannot read config '" << args.config_path << "'\n";
    return kUsage;
  }
  ScenarioConfig config;
  bool file_has_seed = false;
  try {
    config = scenario_from_json(*text);
    file_has_seed = nlohmann::json::parse(*text).contains("seed");
  } catch (const Error& e) {
    err << "cids run: " << e.what() << '\n';
    return kUsage;
  }
  if (args.seed) {
    config.seed = *args.seed;
  } else if (!file_has_seed) {
    if (auto s = env_seed()) config.seed = *s;
  }

  std::ofstream trace;
  RunOptions opts;
  opts.exec = args.serial ? Exec::serial : Exec::parallel;
  if (!args.trace_path.empty()) {
    trace.open(args.trace_path);
    if (!trace) {
      err << "cids run: cannot open trace file '" << args.trace_path << "'\n";
      return kUsage;
    }
    opts.trace = &trace;
  }

  std::optional<SimulationResult> ran;
  try {
    ran = run(config, opts);
  } catch (const Error& e) {
    err << "cids run: " << e.what() << '\n';
    return kUsage;
  }
  SimulationResult& result = *ran;
  const std::string report = report_to_json(result.report) + "\n";
  if (args.out_path.empty()) {
    out << report;
  } else {
    std::ofstream f(args.out_path, std::ios::binary);
    if (!f) {
      err << "cids run: cannot write '" << args.out_path << "'\n";
      return kUsage;
    }
    f << report;
  }
  if (!args.ledger_out_path.empty()) {
    std::ofstream f(args.ledger_out_path, std::ios::binary);
    export_ledger(result.ledger, f);
  }
  if (!args.store_dump_dir.empty()) result.store.dump(args.store_dump_dir);

  const auto& r = result.report;
  err << "seed " << r.seed << ": " << r.ledger_blocks << " blocks, false alarm rate "
      << r.false_alarm_rate << ", rejected model/filter " << r.rejected_models << "/"
      << r.rejected_filters << '\n';
  return kOk;
}

int cmd_ledger_verify(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    err << "cids ledger verify: cannot read '" << path << "'\n";
    return kUsage;
  }
  std::optional<Ledger> parsed;
  try {
    parsed = import_ledger(f);
  } catch (const Error& e) {
    err << "cids ledger verify: " << e.what() << '\n';
    return kUsage;
  }
  const Ledger& ledger = *parsed;
  const ChainCheck check = check_chain(ledger);
  nlohmann::ordered_json j;
  j["valid"] = check.valid;
  j["blocks"] = ledger.height();
  if (check.first_invalid_height) j["first_invalid_height"] = *check.first_invalid_height;
  out << j.dump() << '\n';
  if (!check.valid) err << "chain invalid at height " << *check.first_invalid_height << '\n';
  return check.valid ? kOk : kCheckFailed;
}

int cmd_bloom_calc(std::int64_t m, std::int64_t n, std::optional<std::int64_t> k, std::ostream& out,
                   std::ostream& err) {
  if (m < 1 || n < 0 || (k && *k < 1)) {
    err << "cids bloom-calc: need m >= 1, n >= 0, k >= 1\n";
    return kUsage;
  }
  const auto mu = static_cast<std::uint64_t>(m);
  const auto nu = static_cast<std::uint64_t>(n);
  // With no items the optimum (m/n) ln 2 is unbounded, so it clamps to the cap.
  const std::uint64_t kk =
      k ? static_cast<std::uint64_t>(*k) : (nu == 0 ? BloomFilter::kMaxHashes : optimal_k(mu, nu));
  nlohmann::ordered_json j;
  j["m"] = mu;
  j["n"] = nu;
  j["k"] = kk;
  j["analytic_fpr"] = analytic_fpr(mu, kk, nu);
  out << j.dump() << '\n';
  return kOk;
}

int cmd_trust_report(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    err << "cids trust report: cannot read '" << path << "'\n";
    return kUsage;
  }
  std::optional<Ledger> parsed;
  try {
    parsed = import_ledger(f);
  } catch (const Error& e) {
    err << "cids trust report: " << e.what() << '\n';
    return kUsage;
  }
  const Ledger& ledger = *parsed;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& [id, rec] : fold_trust(ledger))
    rows.push_back({{"node", id},
                    {"positives", rec.positives},
                    {"negatives", rec.negatives},
                    {"score", rec.score()}});
  out << rows.dump() << '\n';
  return kOk;
}

}  // namespace cids::cli
