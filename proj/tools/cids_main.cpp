#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace cids::cli;
  CLI::App app{"Blockchain-backed collaborative intrusion detection simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and print its metrics report");
  run->add_option("--config", run_args.config_path, "Scenario JSON file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", run_args.out_path, "Write the report here instead of stdout");
  run->add_option("--trace", run_args.trace_path, "Write a per-tick JSON-lines trace");
  run->add_option("--ledger-out", run_args.ledger_out_path, "Export the ledger (JSON lines)");
  run->add_option("--store-dump", run_args.store_dump_dir, "Dump content-store blobs here");
  run->add_flag("--serial", run_args.serial, "Use the serial reference for per-node steps");

  std::string ledger_path;
  auto* ledger = app.add_subcommand("ledger", "Ledger tools");
  ledger->require_subcommand(1);
  auto* verify = ledger->add_subcommand("verify", "Re-check an exported ledger");
  verify->add_option("file", ledger_path)->required();
  auto* verify_alias = app.add_subcommand("ledger-verify", "Alias of 'ledger verify'");
  verify_alias->add_option("file", ledger_path)->required();

  std::int64_t m = 0, n = 0, k = 0;
  auto* bloom = app.add_subcommand("bloom-calc", "Analytic false-positive rate and optimal k");
  bloom->add_option("--m", m, "Filter size in bits")->required();
  bloom->add_option("--n", n, "Expected items")->required();
  auto* k_opt = bloom->add_option("--k", k, "Hash count (default: optimal)");

  std::string trust_path;
  auto* trust = app.add_subcommand("trust", "Trust tools");
  trust->require_subcommand(1);
  auto* report = trust->add_subcommand("report", "Fold trust updates from an exported ledger");
  report->add_option("file", trust_path)->required();
  auto* report_alias = app.add_subcommand("trust-report", "Alias of 'trust report'");
  report_alias->add_option("file", trust_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (run->parsed()) {
    if (seed_opt->count() > 0) run_args.seed = seed;
    return cmd_run(run_args, std::cout, std::cerr);
  }
  if (verify->parsed() || verify_alias->parsed()) return cmd_ledger_verify(ledger_path, std::cout, std::cerr);
  if (bloom->parsed())
    return cmd_bloom_calc(m, n, k_opt->count() ? std::optional<std::int64_t>(k) : std::nullopt,
                          std::cout, std::cerr);
  if (report->parsed() || report_alias->parsed()) return cmd_trust_report(trust_path, std::cout, std::cerr);
  return kUsage;
}
