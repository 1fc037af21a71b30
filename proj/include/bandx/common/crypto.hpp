#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bandx::crypto {

using Bytes = std::vector<std::uint8_t>;

// Idempotent; every entry point below calls it.
void ensure_initialized();

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> base64_decode(std::string_view text);

std::string hex_encode(std::span<const std::uint8_t> bytes);
Bytes sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

constexpr std::size_t kPublicKeyBytes = 32;
constexpr std::size_t kSecretKeyBytes = 64;
constexpr std::size_t kSignatureBytes = 64;
constexpr std::size_t kSeedBytes = 32;

struct Ed25519KeyPair {
  std::array<std::uint8_t, kPublicKeyBytes> public_key{};
  std::array<std::uint8_t, kSecretKeyBytes> secret_key{};
};

Ed25519KeyPair ed25519_from_seed(std::span<const std::uint8_t, kSeedBytes> seed);
Bytes ed25519_sign(const Ed25519KeyPair& key, std::string_view message);
bool ed25519_verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> signature,
                    std::string_view message);

// Source of nonces and challenge ids. Simulation runs use SeededRandom so
// transcripts are reproducible; services use SystemRandom.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::string hex(std::size_t nbytes);
};

// Deterministic stream: SHA-256(label || counter) blocks.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::string label) : label_(std::move(label)) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::string label_;
  std::uint64_t counter_ = 0;
};

class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

std::unique_ptr<RandomSource> make_random(std::optional<std::uint64_t> seed, std::string_view stream_name);

}  // namespace bandx::crypto
