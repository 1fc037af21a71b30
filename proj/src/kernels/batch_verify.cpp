#include "bandx/kernels/batch_verify.hpp"

#include <omp.h>

#include "bandx/common/crypto.hpp"
#include "bandx/credential/signature.hpp"

namespace bandx::kernels {
namespace {

std::uint8_t safe_eval(const std::function<bool(std::size_t)>& pred, std::size_t i) noexcept {
  try {
    return pred(i) ? 1 : 0;
  } catch (...) {
    return 0;
  }
}

}  // namespace

std::vector<std::uint8_t> evaluate_serial(std::size_t n, const std::function<bool(std::size_t)>& pred) {
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) out[i] = safe_eval(pred, i);
  return out;
}

std::vector<std::uint8_t> evaluate_parallel(std::size_t n, const std::function<bool(std::size_t)>& pred) {
  if (n < kParallelThreshold) return evaluate_serial(n, pred);
  crypto::ensure_initialized();
  std::vector<std::uint8_t> out(n, 0);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = safe_eval(pred, static_cast<std::size_t>(i));
  return out;
}

std::vector<std::uint8_t> evaluate(std::size_t n, const std::function<bool(std::size_t)>& pred, Execution exec) {
  return exec == Execution::Parallel ? evaluate_parallel(n, pred) : evaluate_serial(n, pred);
}

std::vector<std::uint8_t> verify_credentials(std::span<const credential::Credential> creds, Execution exec) {
  return evaluate(creds.size(), [&](std::size_t i) { return credential::verify_signature(creds[i]); }, exec);
}

}  // namespace bandx::kernels
