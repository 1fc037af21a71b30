#include <random>

#include "doctest.h"
#include "support/golden.hpp"

#include "bandx/kernels/batch_verify.hpp"

using namespace bandx;
using namespace bandx::kernels;

TEST_CASE("parallel evaluation matches the serial reference") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {0ul, 1ul, 7ul, 8ul, 9ul, 100ul, 1000ul}) {
    std::vector<int> data(n);
    for (auto& d : data) d = static_cast<int>(rng() % 7);
    auto pred = [&](std::size_t i) {
      if (data[i] == 6) throw std::runtime_error("bad item");
      return data[i] % 2 == 0;
    };
    auto s = evaluate_serial(n, pred);
    auto p = evaluate_parallel(n, pred);
    CHECK(s == p);
    for (std::size_t i = 0; i < n; ++i) CHECK(s[i] == (data[i] != 6 && data[i] % 2 == 0));
  }
}

TEST_CASE("batch signature verification flags exactly the tampered credentials") {
  std::vector<credential::Credential> creds;
  std::vector<std::uint8_t> expect;
  for (int i = 0; i < 40; ++i) {
    auto c = golden::signed_from(golden::check_text("4.25", "eb2c3dfc8e" + std::to_string(10 + i)), golden::alice());
    bool tamper = i % 3 == 0;
    if (tamper) c = credential::parse_credential(
        [&] {
          auto t = credential::render_credential(c);
          t.replace(t.find("4.25"), 4, "0.25");
          return t;
        }());
    creds.push_back(c);
    expect.push_back(tamper ? 0 : 1);
  }
  CHECK(verify_credentials(creds, Execution::Serial) == expect);
  CHECK(verify_credentials(creds, Execution::Parallel) == expect);
}
