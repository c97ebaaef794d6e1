#pragma once

#include <array>
#include <string>
#include <string_view>

#include <sodium.h>

#include "dsm/error.hpp"

namespace dsm {

enum class hash_strength {
  interactive,
  // Minimal work factor; for tests and bulk replays only.
  fast,
};

inline void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw error("libsodium failed to initialise");
}

// Argon2id encoded string with its own random salt.
inline std::string hash_password(std::string_view password, hash_strength strength = hash_strength::interactive) {
  ensure_sodium();
  char out[crypto_pwhash_STRBYTES];
  auto ops = strength == hash_strength::fast ? crypto_pwhash_OPSLIMIT_MIN : crypto_pwhash_OPSLIMIT_INTERACTIVE;
  auto mem = strength == hash_strength::fast ? crypto_pwhash_MEMLIMIT_MIN : crypto_pwhash_MEMLIMIT_INTERACTIVE;
  if (crypto_pwhash_str(out, password.data(), password.size(), ops, mem) != 0)
    throw error("password hashing ran out of memory");
  return out;
}

inline bool verify_password(const std::string& hash, std::string_view password) {
  ensure_sodium();
  return crypto_pwhash_str_verify(hash.c_str(), password.data(), password.size()) == 0;
}

inline std::string random_token() {
  ensure_sodium();
  std::array<unsigned char, 24> raw{};
  randombytes_buf(raw.data(), raw.size());
  char hex[raw.size() * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, raw.data(), raw.size());
  return hex;
}

}  // namespace dsm
