// Copyright 2026 The neuronlock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "neuronlock/rng.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <array>
#include <cmath>
#include <cstring>

#include "neuronlock/error.hpp"

namespace neuronlock {

struct Rng::State {
  EVP_CIPHER_CTX* ctx = nullptr;
  std::array<std::uint8_t, 4096> buf{};
  std::size_t used = sizeof(buf);
  bool have_spare = false;
  double spare = 0.0;

  ~State() { EVP_CIPHER_CTX_free(ctx); }

  void refill() {
    static const std::array<std::uint8_t, sizeof(buf)> kZeros{};
    int len = 0;
    if (EVP_EncryptUpdate(ctx, buf.data(), &len, kZeros.data(), static_cast<int>(kZeros.size())) != 1) {
      throw Error(Errc::kCrypto, "rng keystream");
    }
    used = 0;
  }
};

Rng::Rng(std::span<const std::uint8_t> key_material) : state_(std::make_unique<State>()) {
  std::array<std::uint8_t, 32> key{};
  SHA256(key_material.data(), key_material.size(), key.data());
  const std::array<std::uint8_t, 16> iv{};
  state_->ctx = EVP_CIPHER_CTX_new();
  if (!state_->ctx || EVP_EncryptInit_ex(state_->ctx, EVP_aes_256_ctr(), nullptr, key.data(), iv.data()) != 1) {
    throw Error(Errc::kCrypto, "rng init");
  }
}

Rng::Rng(std::uint64_t seed)
    : Rng([&] {
        std::array<std::uint8_t, 24> m{'n', 'e', 'u', 'r', 'o', 'n', 'l', 'o', 'c', 'k', '/', 'r', 'n', 'g', '/', '1'};
        for (int i = 0; i < 8; ++i) m[16 + i] = static_cast<std::uint8_t>(seed >> (8 * i));
        return m;
      }()) {}

Rng Rng::from_entropy() {
  std::array<std::uint8_t, 32> seed{};
  if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1) {
    throw Error(Errc::kCrypto, "OS entropy unavailable");
  }
  return Rng(std::span<const std::uint8_t>(seed));
}

Rng::Rng(Rng&&) noexcept = default;
Rng& Rng::operator=(Rng&&) noexcept = default;
Rng::~Rng() = default;

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (state_->used == state_->buf.size()) state_->refill();
    const std::size_t n = std::min(out.size() - pos, state_->buf.size() - state_->used);
    std::memcpy(out.data() + pos, state_->buf.data() + state_->used, n);
    state_->used += n;
    pos += n;
  }
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (state_->have_spare) {
    state_->have_spare = false;
    return state_->spare;
  }
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  state_->spare = radius * std::sin(2.0 * M_PI * u2);
  state_->have_spare = true;
  return radius * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

}  // namespace neuronlock
