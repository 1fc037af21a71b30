#include <benchmark/benchmark.h>

#include "bandx/credential/signature.hpp"
#include "bandx/kernels/batch_verify.hpp"
#include "bandx/payments/instruments.hpp"

using namespace bandx;

namespace {

const std::vector<credential::Credential>& checks(std::size_t n) {
  static std::map<std::size_t, std::vector<credential::Credential>> cache;
  auto& v = cache[n];
  if (v.empty()) {
    auto payer = credential::SigningKey::derive("bench:payer");
    auto merchant = credential::SigningKey::derive("bench:merchant").id();
    payments::Checkbook book(payer);
    for (std::size_t i = 0; i < n; ++i) {
      char nonce[32];
      std::snprintf(nonce, sizeof nonce, "%016zx", i);
      v.push_back(book.write(merchant, Money{100 + static_cast<std::int64_t>(i % 400), "USD"}, nonce,
                             Date::parse("20031119")));
    }
  }
  return v;
}

void run(benchmark::State& state, kernels::Execution exec) {
  const auto& creds = checks(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::verify_credentials(creds, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_VerifySerial(benchmark::State& s) { run(s, kernels::Execution::Serial); }
void BM_VerifyParallel(benchmark::State& s) { run(s, kernels::Execution::Parallel); }

}  // namespace

BENCHMARK(BM_VerifySerial)->RangeMultiplier(4)->Range(16, 4096);
BENCHMARK(BM_VerifyParallel)->RangeMultiplier(4)->Range(16, 4096);
BENCHMARK_MAIN();
