// Serial vs OpenMP timings for the parallel kernels.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "cids/bloom.hpp"
#include "cids/detection.hpp"
#include "cids/ledger.hpp"
#include "cids/simnet.hpp"

using namespace cids;

namespace {

double time_best(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void row(const char* name, int reps, const std::function<void(Exec)>& kernel) {
  const double serial = time_best(reps, [&] { kernel(Exec::serial); });
  const double parallel = time_best(reps, [&] { kernel(Exec::parallel); });
  std::printf("%-22s %10.4f %10.4f %8.2fx\n", name, serial, parallel, serial / parallel);
}

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

}  // namespace

int main() {
  std::mt19937_64 rng(1);
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-22s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");

  BloomFilter filter(10000, 7);
  for (int i = 0; i < 1000; ++i) filter.insert(random_bytes(rng, 41));
  std::vector<Bytes> queries;
  for (int i = 0; i < 200000; ++i) queries.push_back(random_bytes(rng, 41));
  volatile std::uint64_t sink = 0;
  row("bloom count_matches", 5, [&](Exec e) { sink = count_matches(filter, queries, e); });

  std::normal_distribution<double> g;
  LabeledDataset data(500000);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].label = i % 2 ? Label::attack : Label::benign;
    for (auto& v : data[i].x) v = g(rng) + (i % 2 ? 2.0 : -2.0);
  }
  const auto model = svm_train(LabeledDataset(data.begin(), data.begin() + 2000), {0.01, 10, 1});
  volatile double acc = 0;
  row("svm evaluate", 5, [&](Exec e) { acc = evaluate(model, data, e).accuracy; });

  Ledger ledger({0, 1, 2});
  while (ledger.height() < 10) {
    std::vector<Transaction> txs;
    for (int i = 0; i < 4; ++i) txs.push_back({1, Alarm{AttackClass::dos, sha256(random_bytes(rng, 8)), 1}});
    ledger.seal_block(ledger.select_proposer(ledger.height()), ledger.height(), txs);
  }
  row("ledger tamper_sweep", 3, [&](Exec e) { sink = tamper_sweep(ledger, e).undetected; });

  const auto scenario = standard_scenario();
  row("standard scenario run", 2, [&](Exec e) { sink = run(scenario, {e, nullptr}).report.ledger_blocks; });
  (void)sink;
  (void)acc;
  return 0;
}
