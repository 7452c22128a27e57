#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cids/ledger_json.hpp"
#include "cids/simnet.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cids;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cids-cli-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string short_config(bool with_seed) {
  ScenarioConfig c = standard_scenario();
  c.duration = 400;
  c.attacks = {{AttackClass::dos, 201, 100, 1, 20.0}};
  auto j = nlohmann::json::parse(scenario_to_json(c));
  if (!with_seed) j.erase("seed");
  return j.dump(2);
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cmd(const cli::RunArgs& args) {
  std::ostringstream out, err;
  const int code = cli::cmd_run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("run writes a JSON report and echoes the seed") {
  TempDir dir;
  const auto cfg = dir.file("scenario.json");
  write_file(cfg, short_config(true));
  cli::RunArgs args;
  args.config_path = cfg;
  const auto a = run_cmd(args);
  REQUIRE(a.code == cli::kOk);
  const auto report = nlohmann::json::parse(a.out);
  CHECK(report["seed"] == 42);
  CHECK(report.contains("per_class"));
  CHECK(report.contains("alarm_dissemination_latency"));
  CHECK_FALSE(a.err.empty());

  args.seed = 7;
  const auto b = run_cmd(args);
  CHECK(nlohmann::json::parse(b.out)["seed"] == 7);

  args.out_path = dir.file("report.json");
  args.trace_path = dir.file("trace.jsonl");
  args.ledger_out_path = dir.file("ledger.jsonl");
  args.store_dump_dir = dir.file("store");
  args.serial = true;
  const auto c = run_cmd(args);
  CHECK(c.code == cli::kOk);
  CHECK(c.out.empty());
  CHECK(read_file(args.out_path) == b.out);
  std::istringstream trace(read_file(args.trace_path));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(trace, line)) {
    CHECK(nlohmann::json::parse(line).contains("tick"));
    ++lines;
  }
  CHECK(lines == 400);
  CHECK(fs::is_directory(args.store_dump_dir));
  std::ostringstream vout, verr;
  CHECK(cli::cmd_ledger_verify(args.ledger_out_path, vout, verr) == cli::kOk);
}

TEST_CASE("seed precedence is flag, then file, then environment") {
  TempDir dir;
  const auto seeded = dir.file("seeded.json");
  const auto unseeded = dir.file("unseeded.json");
  write_file(seeded, short_config(true));
  write_file(unseeded, short_config(false));

  ::setenv("CIDS_SEED", "99", 1);
  cli::RunArgs args;
  args.config_path = unseeded;
  CHECK(nlohmann::json::parse(run_cmd(args).out)["seed"] == 99);
  args.config_path = seeded;
  CHECK(nlohmann::json::parse(run_cmd(args).out)["seed"] == 42);
  args.seed = 5;
  CHECK(nlohmann::json::parse(run_cmd(args).out)["seed"] == 5);
  ::unsetenv("CIDS_SEED");
  args.seed.reset();
  args.config_path = unseeded;
  CHECK(nlohmann::json::parse(run_cmd(args).out)["seed"] == 42);
}

TEST_CASE("run rejects missing and invalid configs with exit 2") {
  TempDir dir;
  cli::RunArgs args;
  args.config_path = dir.file("absent.json");
  auto r = run_cmd(args);
  CHECK(r.code == cli::kUsage);
  CHECK_FALSE(r.err.empty());
  CHECK(r.out.empty());

  const auto bad = dir.file("bad.json");
  auto j = nlohmann::json::parse(short_config(true));
  j["duration"] = 0;
  write_file(bad, j.dump());
  args.config_path = bad;
  CHECK(run_cmd(args).code == cli::kUsage);

  write_file(bad, "{\"unknown_field\": 1}");
  CHECK(run_cmd(args).code == cli::kUsage);
  write_file(bad, "{");
  CHECK(run_cmd(args).code == cli::kUsage);
}

TEST_CASE("bloom-calc") {
  std::ostringstream out, err;
  REQUIRE(cli::cmd_bloom_calc(10000, 1000, std::nullopt, out, err) == cli::kOk);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["m"] == 10000);
  CHECK(j["n"] == 1000);
  CHECK(j["k"] == 7);
  CHECK(j["analytic_fpr"].get<double>() == doctest::Approx(0.008193722065862417).epsilon(1e-12));

  out.str("");
  REQUIRE(cli::cmd_bloom_calc(10000, 0, std::nullopt, out, err) == cli::kOk);
  CHECK(nlohmann::json::parse(out.str())["analytic_fpr"] == 0.0);

  out.str("");
  REQUIRE(cli::cmd_bloom_calc(1024, 10, 3, out, err) == cli::kOk);
  CHECK(nlohmann::json::parse(out.str())["k"] == 3);

  CHECK(cli::cmd_bloom_calc(0, 10, std::nullopt, out, err) == cli::kUsage);
  CHECK(cli::cmd_bloom_calc(100, -1, std::nullopt, out, err) == cli::kUsage);
  CHECK(cli::cmd_bloom_calc(100, 1, 0, out, err) == cli::kUsage);
}

TEST_CASE("ledger verify detects a single edited hex digit") {
  TempDir dir;
  Ledger l({0, 1});
  l.seal_block(1, 10, {{0, Alarm{AttackClass::dos, sha256("e"), 9}}});
  l.seal_block(0, 20, {});
  const auto path = dir.file("ledger.jsonl");
  const std::string honest = export_ledger(l);
  write_file(path, honest);
  std::ostringstream out, err;
  REQUIRE(cli::cmd_ledger_verify(path, out, err) == cli::kOk);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["valid"] == true);
  CHECK(j["blocks"] == 3);

  // Flip one hex digit of the alarm's evidence digest in block 1.
  std::string edited = honest;
  const auto hex = to_hex(sha256("e"));
  const auto at = edited.find(hex);
  REQUIRE(at != std::string::npos);
  edited[at] = edited[at] == '0' ? '1' : '0';
  write_file(path, edited);
  out.str("");
  CHECK(cli::cmd_ledger_verify(path, out, err) == cli::kCheckFailed);
  j = nlohmann::json::parse(out.str());
  CHECK(j["valid"] == false);
  CHECK(j["first_invalid_height"] == 1);

  write_file(path, "");
  CHECK(cli::cmd_ledger_verify(path, out, err) == cli::kUsage);
  write_file(path, "{not json\n");
  CHECK(cli::cmd_ledger_verify(path, out, err) == cli::kUsage);
  CHECK(cli::cmd_ledger_verify(dir.file("absent"), out, err) == cli::kUsage);
}

TEST_CASE("trust report folds updates into Beta-mean scores") {
  TempDir dir;
  const auto path = dir.file("ledger.jsonl");
  Ledger quiet({0, 1, 2});
  write_file(path, export_ledger(quiet));
  std::ostringstream out, err;
  REQUIRE(cli::cmd_trust_report(path, out, err) == cli::kOk);
  auto rows = nlohmann::json::parse(out.str());
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r["score"] == 0.5);

  Ledger l({0});
  std::vector<Transaction> txs;
  for (int i = 0; i < 3; ++i)
    txs.push_back({0, TrustUpdate{2, cids::Outcome::positive, TrustReason::model_accepted}});
  txs.push_back({0, TrustUpdate{2, cids::Outcome::negative, TrustReason::model_rejected}});
  l.seal_block(0, 10, txs);
  write_file(path, export_ledger(l));
  out.str("");
  REQUIRE(cli::cmd_trust_report(path, out, err) == cli::kOk);
  rows = nlohmann::json::parse(out.str());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["node"] == 0);
  CHECK(rows[1]["node"] == 2);
  CHECK(rows[1]["positives"] == 3);
  CHECK(rows[1]["negatives"] == 1);
  CHECK(rows[1]["score"].get<double>() == doctest::Approx(4.0 / 6.0).epsilon(1e-12));

  write_file(path, "garbage");
  CHECK(cli::cmd_trust_report(path, out, err) == cli::kUsage);
}
