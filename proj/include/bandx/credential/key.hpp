#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "bandx/common/crypto.hpp"

namespace bandx::credential {

inline constexpr std::string_view kPolicyLiteral = "POLICY";
inline constexpr std::string_view kKeyAlgorithm = "ed25519-base64";
inline constexpr std::string_view kSignatureAlgorithm = "sig-ed25519-base64";

// Public key identifier rendered as `<algorithm>:<base64>`. Equality is
// byte equality of that rendering.
class PublicKeyId {
 public:
  PublicKeyId() = default;
  PublicKeyId(std::string algorithm, std::string material);

  // Shape check only: non-empty algorithm and material, no whitespace, no
  // quote characters. The material is not base64-decoded here.
  static std::optional<PublicKeyId> try_parse(std::string_view text);

  const std::string& algorithm() const { return algorithm_; }
  const std::string& material() const { return material_; }
  std::string str() const { return algorithm_ + ":" + material_; }

  auto operator<=>(const PublicKeyId& other) const { return str() <=> other.str(); }
  bool operator==(const PublicKeyId& other) const { return str() == other.str(); }

 private:
  std::string algorithm_;
  std::string material_;
};

// Private Ed25519 signing key plus its public id.
class SigningKey {
 public:
  static SigningKey from_seed(std::span<const std::uint8_t, crypto::kSeedBytes> seed);
  // Deterministic key for simulations: seed = SHA-256("bandx-key:" + label).
  static SigningKey derive(std::string_view label);
  static SigningKey generate(crypto::RandomSource& rng);

  const PublicKeyId& id() const { return id_; }
  crypto::Bytes sign(std::string_view message) const;
  // Base64 of the 32-byte seed, the on-disk form written by `bandx keygen`.
  std::string seed_base64() const { return crypto::base64_encode(seed_); }
  static SigningKey from_seed_base64(std::string_view text);

 private:
  SigningKey() = default;
  std::array<std::uint8_t, crypto::kSeedBytes> seed_{};
  crypto::Ed25519KeyPair pair_;
  PublicKeyId id_;
};

}  // namespace bandx::credential
