#include "bandx/common/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

namespace bandx::crypto {

void ensure_initialized() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialisation failed");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  ensure_initialized();
  const auto variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_encoded_len(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
  out.resize(out.size() - 1);  // trailing NUL
  return out;
}

std::optional<Bytes> base64_decode(std::string_view text) {
  ensure_initialized();
  Bytes out(text.size());
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0)
    return std::nullopt;
  if (end != text.data() + text.size()) return std::nullopt;
  out.resize(len);
  return out;
}

std::string hex_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes sha256(std::string_view data) {
  ensure_initialized();
  Bytes out(crypto_hash_sha256_BYTES);
  crypto_hash_sha256(out.data(), reinterpret_cast<const unsigned char*>(data.data()), data.size());
  return out;
}

std::string sha256_hex(std::string_view data) { return hex_encode(sha256(data)); }

Ed25519KeyPair ed25519_from_seed(std::span<const std::uint8_t, kSeedBytes> seed) {
  ensure_initialized();
  Ed25519KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
  return kp;
}

Bytes ed25519_sign(const Ed25519KeyPair& key, std::string_view message) {
  ensure_initialized();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, reinterpret_cast<const unsigned char*>(message.data()), message.size(),
                       key.secret_key.data());
  return sig;
}

bool ed25519_verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> signature,
                    std::string_view message) {
  ensure_initialized();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), reinterpret_cast<const unsigned char*>(message.data()),
                                     message.size(), public_key.data()) == 0;
}

std::string RandomSource::hex(std::size_t nbytes) {
  Bytes buf(nbytes);
  fill(buf);
  return hex_encode(buf);
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    Bytes block = sha256(label_ + "#" + std::to_string(counter_++));
    for (std::size_t i = 0; i < block.size() && pos < out.size(); ++i) out[pos++] = block[i];
  }
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  ensure_initialized();
  randombytes_buf(out.data(), out.size());
}

std::unique_ptr<RandomSource> make_random(std::optional<std::uint64_t> seed, std::string_view stream_name) {
  if (seed) return std::make_unique<SeededRandom>("bandx-rng:" + std::to_string(*seed) + ":" + std::string(stream_name));
  return std::make_unique<SystemRandom>();
}

}  // namespace bandx::crypto
