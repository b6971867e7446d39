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

// Symmetric bilinear group on the supersingular curve E: y^2 = x^3 + x over
// F_q, q = 3 mod 4 (512-bit q, 160-bit prime subgroup order r, the widely
// deployed "type A" parameters). G1 is the order-r subgroup of E(F_q); GT is
// the order-r subgroup of F_q^2* with F_q^2 = F_q[i]/(i^2 + 1).
//
// e(P, Q) = Tate(P, psi(Q))^((q^2 - 1) / r), psi(x, y) = (-x, i*y).

#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "neuronlock/bytes.hpp"
#include "neuronlock/rng.hpp"

namespace neuronlock::pairing {

struct Params {
  mpz_class q;  // field prime
  mpz_class r;  // group order
  mpz_class h;  // cofactor, q + 1 = h * r
  mpz_class sqrt_exp;  // (q + 1) / 4
};

const Params& params();

inline constexpr std::size_t kFieldBytes = 64;
inline constexpr std::size_t kScalarBytes = 20;
inline constexpr std::size_t kG1Bytes = 1 + kFieldBytes;
inline constexpr std::size_t kGTBytes = 1 + kFieldBytes;

using Zr = mpz_class;

struct Fq2 {
  mpz_class a = 0;  // real part
  mpz_class b = 0;  // coefficient of i

  static Fq2 one() { return Fq2{1, 0}; }
  bool operator==(const Fq2& o) const { return a == o.a && b == o.b; }
};

Fq2 mul(const Fq2& x, const Fq2& y);
Fq2 sqr(const Fq2& x);
Fq2 inv(const Fq2& x);
Fq2 conj(const Fq2& x);
Fq2 pow(const Fq2& x, const mpz_class& e);

struct G1 {
  mpz_class x = 0;
  mpz_class y = 0;
  bool infinity = true;

  bool operator==(const G1& o) const {
    return infinity == o.infinity && (infinity || (x == o.x && y == o.y));
  }
};

G1 add(const G1& p, const G1& q);
G1 neg(const G1& p);
// Scalar multiplication by a non-negative integer (not reduced mod r).
G1 mul(const G1& p, const mpz_class& k);
bool on_curve(const G1& p);
bool in_subgroup(const G1& p);

// Elements of GT are unitary (norm 1), so inversion is conjugation.
struct GT {
  Fq2 v = Fq2::one();

  bool operator==(const GT& o) const { return v == o.v; }
};

GT gt_mul(const GT& x, const GT& y);
GT gt_div(const GT& x, const GT& y);
GT gt_pow(const GT& x, const mpz_class& e);

GT pair(const G1& p, const G1& q);

// Deterministic hash onto G1 \ {O} under a domain-separation tag.
G1 hash_to_g1(std::string_view domain, std::span<const std::uint8_t> msg);

Zr random_zr(Rng& rng);  // uniform in [1, r)
G1 random_g1(Rng& rng);

// Compressed encodings: tag byte (0 = identity, 2 | parity of the implied
// coordinate) followed by the 64-byte big-endian x (G1) or real part (GT).
std::array<std::uint8_t, kG1Bytes> to_bytes(const G1& p);
std::array<std::uint8_t, kGTBytes> to_bytes(const GT& x);
std::array<std::uint8_t, kScalarBytes> to_bytes_zr(const Zr& z);
// Throw kCrypto for encodings that are off-curve or outside the subgroup.
G1 g1_from_bytes(std::span<const std::uint8_t> b);
GT gt_from_bytes(std::span<const std::uint8_t> b);
Zr zr_from_bytes(std::span<const std::uint8_t> b);

}  // namespace neuronlock::pairing
