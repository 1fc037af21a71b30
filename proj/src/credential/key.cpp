#include "bandx/credential/key.hpp"

#include <algorithm>

#include "bandx/common/error.hpp"

namespace bandx::credential {

PublicKeyId::PublicKeyId(std::string algorithm, std::string material)
    : algorithm_(std::move(algorithm)), material_(std::move(material)) {}

std::optional<PublicKeyId> PublicKeyId::try_parse(std::string_view text) {
  if (text == kPolicyLiteral) return std::nullopt;
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) return std::nullopt;
  auto bad = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '"'; };
  if (std::any_of(text.begin(), text.end(), bad)) return std::nullopt;
  return PublicKeyId(std::string(text.substr(0, colon)), std::string(text.substr(colon + 1)));
}

SigningKey SigningKey::from_seed(std::span<const std::uint8_t, crypto::kSeedBytes> seed) {
  SigningKey k;
  std::copy(seed.begin(), seed.end(), k.seed_.begin());
  k.pair_ = crypto::ed25519_from_seed(seed);
  k.id_ = PublicKeyId(std::string(kKeyAlgorithm), crypto::base64_encode(k.pair_.public_key));
  return k;
}

SigningKey SigningKey::derive(std::string_view label) {
  auto digest = crypto::sha256("bandx-key:" + std::string(label));
  return from_seed(std::span<const std::uint8_t, crypto::kSeedBytes>(digest.data(), crypto::kSeedBytes));
}

SigningKey SigningKey::generate(crypto::RandomSource& rng) {
  std::array<std::uint8_t, crypto::kSeedBytes> seed{};
  rng.fill(seed);
  return from_seed(seed);
}

SigningKey SigningKey::from_seed_base64(std::string_view text) {
  auto bytes = crypto::base64_decode(text);
  if (!bytes || bytes->size() != crypto::kSeedBytes) throw Error(ErrorCode::ConfigError, "bad signing key seed");
  return from_seed(std::span<const std::uint8_t, crypto::kSeedBytes>(bytes->data(), crypto::kSeedBytes));
}

crypto::Bytes SigningKey::sign(std::string_view message) const { return crypto::ed25519_sign(pair_, message); }

}  // namespace bandx::credential
