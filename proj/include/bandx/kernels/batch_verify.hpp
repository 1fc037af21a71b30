#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bandx/credential/credential.hpp"

namespace bandx::kernels {

enum class Execution { Serial, Parallel };

// Evaluates pred(i) for i in [0, n). A predicate that throws counts as false.
// The serial form is the reference the parallel form is tested against.
std::vector<std::uint8_t> evaluate_serial(std::size_t n, const std::function<bool(std::size_t)>& pred);
std::vector<std::uint8_t> evaluate_parallel(std::size_t n, const std::function<bool(std::size_t)>& pred);
std::vector<std::uint8_t> evaluate(std::size_t n, const std::function<bool(std::size_t)>& pred, Execution exec);

// verify_signature over every credential.
std::vector<std::uint8_t> verify_credentials(std::span<const credential::Credential> creds, Execution exec);

// Below this many items the parallel form runs serially.
inline constexpr std::size_t kParallelThreshold = 8;

}  // namespace bandx::kernels
