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

#include "neuronlock/pairing.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <vector>

#include "neuronlock/error.hpp"

namespace neuronlock::pairing {
namespace {

const mpz_class& Q() { return params().q; }


mpz_class modq(const mpz_class& x) {
  mpz_class out;
  mpz_mod(out.get_mpz_t(), x.get_mpz_t(), Q().get_mpz_t());
  return out;
}

mpz_class invq(const mpz_class& x) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), x.get_mpz_t(), Q().get_mpz_t()) == 0) {
    throw Error(Errc::kCrypto, "inversion of zero in F_q");
  }
  return out;
}

mpz_class powq(const mpz_class& b, const mpz_class& e) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), Q().get_mpz_t());
  return out;
}

// Square root in F_q for a quadratic residue (q = 3 mod 4).
bool sqrt_q(const mpz_class& v, mpz_class& root) {
  if (v == 0) {
    root = 0;
    return true;
  }
  if (mpz_legendre(v.get_mpz_t(), Q().get_mpz_t()) != 1) return false;
  root = powq(v, params().sqrt_exp);
  return true;
}

mpz_class curve_rhs(const mpz_class& x) { return modq(x * x * x + x); }

struct Jacobian {
  mpz_class X = 1, Y = 1, Z = 0;

  bool infinity() const { return Z == 0; }
};

Jacobian dbl(const Jacobian& p) {
  if (p.infinity() || p.Y == 0) return {};
  mpz_class XX = modq(p.X * p.X);
  mpz_class YY = modq(p.Y * p.Y);
  mpz_class YYYY = modq(YY * YY);
  mpz_class ZZ = modq(p.Z * p.Z);
  mpz_class S = modq(4 * p.X * YY);
  mpz_class M = modq(3 * XX + ZZ * ZZ);
  Jacobian out;
  out.X = modq(M * M - 2 * S);
  out.Y = modq(M * (S - out.X) - 8 * YYYY);
  out.Z = modq(2 * p.Y * p.Z);
  return out;
}

// Mixed addition with an affine point.
Jacobian madd(const Jacobian& p, const G1& q) {
  if (q.infinity) return p;
  if (p.infinity()) return Jacobian{q.x, q.y, 1};
  mpz_class Z1Z1 = modq(p.Z * p.Z);
  mpz_class U2 = modq(q.x * Z1Z1);
  mpz_class S2 = modq(q.y * p.Z * Z1Z1);
  mpz_class H = modq(U2 - p.X);
  mpz_class R = modq(S2 - p.Y);
  if (H == 0) return R == 0 ? dbl(p) : Jacobian{};
  mpz_class HH = modq(H * H);
  mpz_class HHH = modq(H * HH);
  mpz_class V = modq(p.X * HH);
  Jacobian out;
  out.X = modq(R * R - HHH - 2 * V);
  out.Y = modq(R * (V - out.X) - p.Y * HHH);
  out.Z = modq(p.Z * H);
  return out;
}

G1 to_affine(const Jacobian& p) {
  if (p.infinity()) return {};
  mpz_class zi = invq(p.Z);
  mpz_class zi2 = modq(zi * zi);
  return G1{modq(p.X * zi2), modq(p.Y * zi2 * zi), false};
}

void export_be(const mpz_class& v, std::uint8_t* out, std::size_t width) {
  std::fill(out, out + width, 0);
  const std::size_t need = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (v == 0) return;
  if (need > width) throw Error(Errc::kCrypto, "integer wider than its encoding");
  std::size_t count = 0;
  mpz_export(out + (width - need), &count, 1, 1, 1, 0, v.get_mpz_t());
}

mpz_class import_be(std::span<const std::uint8_t> b) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

}  // namespace

const Params& params() {
  static const Params p = [] {
    Params out;
    out.q = mpz_class(
        "8780710799663312522437781984754049815806883199414208211028653399266475630880222957078625179422662"
        "221423155858769582317459277713367317481324925129998224791");
    out.r = mpz_class("730750818665451621361119245571504901405976559617");
    out.h = mpz_class(
        "12016012264891146079388821366740534204802954401251311822919615131047207289359704531102844802183906"
        "537786776");
    out.sqrt_exp = (out.q + 1) / 4;
    return out;
  }();
  return p;
}

Fq2 mul(const Fq2& x, const Fq2& y) {
  mpz_class t0 = x.a * y.a;
  mpz_class t1 = x.b * y.b;
  mpz_class t2 = (x.a + x.b) * (y.a + y.b);
  return Fq2{modq(t0 - t1), modq(t2 - t0 - t1)};
}

Fq2 sqr(const Fq2& x) { return Fq2{modq((x.a + x.b) * (x.a - x.b)), modq(2 * x.a * x.b)}; }

Fq2 inv(const Fq2& x) {
  mpz_class n = invq(modq(x.a * x.a + x.b * x.b));
  return Fq2{modq(x.a * n), modq(-x.b * n)};
}

Fq2 conj(const Fq2& x) { return Fq2{x.a, modq(-x.b)}; }

Fq2 pow(const Fq2& x, const mpz_class& e) {
  Fq2 out = Fq2::one();
  if (e <= 0) return out;
  for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    out = sqr(out);
    if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) out = mul(out, x);
  }
  return out;
}

G1 add(const G1& p, const G1& q) {
  if (p.infinity) return q;
  if (q.infinity) return p;
  mpz_class lambda;
  if (p.x == q.x) {
    if (modq(p.y + q.y) == 0) return {};
    lambda = modq((3 * p.x * p.x + 1) * invq(modq(2 * p.y)));
  } else {
    lambda = modq((q.y - p.y) * invq(modq(q.x - p.x)));
  }
  G1 out;
  out.infinity = false;
  out.x = modq(lambda * lambda - p.x - q.x);
  out.y = modq(lambda * (p.x - out.x) - p.y);
  return out;
}

G1 neg(const G1& p) {
  if (p.infinity) return p;
  return G1{p.x, modq(-p.y), false};
}

G1 mul(const G1& p, const mpz_class& k) {
  if (p.infinity || k <= 0) return {};
  Jacobian acc;
  for (long i = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    acc = dbl(acc);
    if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = madd(acc, p);
  }
  return to_affine(acc);
}

bool on_curve(const G1& p) {
  if (p.infinity) return true;
  return p.x >= 0 && p.x < Q() && p.y >= 0 && p.y < Q() && modq(p.y * p.y) == curve_rhs(p.x);
}

bool in_subgroup(const G1& p) { return on_curve(p) && mul(p, params().r).infinity; }

GT gt_mul(const GT& x, const GT& y) { return GT{mul(x.v, y.v)}; }
GT gt_div(const GT& x, const GT& y) { return GT{mul(x.v, conj(y.v))}; }
GT gt_pow(const GT& x, const mpz_class& e) {
  mpz_class er;
  mpz_mod(er.get_mpz_t(), e.get_mpz_t(), params().r.get_mpz_t());
  return GT{pow(x.v, er)};
}

GT pair(const G1& p, const G1& q) {
  if (p.infinity || q.infinity) return GT{};
  const mpz_class& r = params().r;
  mpz_class tx = p.x, ty = p.y;
  bool t_inf = false;
  Fq2 f = Fq2::one();
  // Lines are evaluated at psi(q) = (-q.x, i*q.y): l = lambda*(q.x + tx) - ty + i*q.y.
  // Vertical lines lie in F_q and vanish under the final exponentiation.
  for (long i = static_cast<long>(mpz_sizeinbase(r.get_mpz_t(), 2)) - 2; i >= 0 && !t_inf; --i) {
    mpz_class lambda = modq((3 * tx * tx + 1) * invq(modq(2 * ty)));
    f = mul(sqr(f), Fq2{modq(lambda * (q.x + tx) - ty), q.y});
    mpz_class x3 = modq(lambda * lambda - 2 * tx);
    ty = modq(lambda * (tx - x3) - ty);
    tx = x3;
    if (mpz_tstbit(r.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
      if (tx == p.x) {
        t_inf = true;
        break;
      }
      lambda = modq((ty - p.y) * invq(modq(tx - p.x)));
      f = mul(f, Fq2{modq(lambda * (q.x + tx) - ty), q.y});
      x3 = modq(lambda * lambda - tx - p.x);
      ty = modq(lambda * (tx - x3) - ty);
      tx = x3;
    }
  }
  // f^((q^2 - 1) / r) = (f^(q - 1))^h, and f^q is the conjugate.
  Fq2 unitary = mul(conj(f), inv(f));
  return GT{pow(unitary, params().h)};
}

G1 hash_to_g1(std::string_view domain, std::span<const std::uint8_t> msg) {
  std::vector<std::uint8_t> input(domain.begin(), domain.end());
  input.push_back(0);
  const std::size_t header = input.size();
  input.resize(header + 5);
  input.insert(input.end(), msg.begin(), msg.end());
  for (std::uint32_t ctr = 0;; ++ctr) {
    for (int i = 0; i < 4; ++i) input[header + i] = static_cast<std::uint8_t>(ctr >> (8 * i));
    std::array<std::uint8_t, 3 * SHA256_DIGEST_LENGTH> wide{};
    for (std::uint8_t j = 0; j < 3; ++j) {
      input[header + 4] = j;
      SHA256(input.data(), input.size(), wide.data() + j * SHA256_DIGEST_LENGTH);
    }
    mpz_class x = modq(import_be(wide));
    mpz_class y;
    if (!sqrt_q(curve_rhs(x), y) || y == 0) continue;
    if ((wide[0] & 1) != mpz_tstbit(y.get_mpz_t(), 0)) y = modq(-y);
    G1 p = mul(G1{x, y, false}, params().h);
    if (!p.infinity) return p;
  }
}

Zr random_zr(Rng& rng) {
  std::array<std::uint8_t, 32> b{};
  for (;;) {
    rng.fill(b);
    mpz_class z = import_be(b);
    mpz_mod(z.get_mpz_t(), z.get_mpz_t(), params().r.get_mpz_t());
    if (z != 0) return z;
  }
}

G1 random_g1(Rng& rng) {
  std::array<std::uint8_t, 32> b{};
  rng.fill(b);
  return hash_to_g1("neuronlock/random-g1", b);
}

std::array<std::uint8_t, kG1Bytes> to_bytes(const G1& p) {
  std::array<std::uint8_t, kG1Bytes> out{};
  if (p.infinity) return out;
  out[0] = static_cast<std::uint8_t>(2 | mpz_tstbit(p.y.get_mpz_t(), 0));
  export_be(p.x, out.data() + 1, kFieldBytes);
  return out;
}

std::array<std::uint8_t, kGTBytes> to_bytes(const GT& x) {
  std::array<std::uint8_t, kGTBytes> out{};
  out[0] = static_cast<std::uint8_t>(2 | mpz_tstbit(x.v.b.get_mpz_t(), 0));
  export_be(x.v.a, out.data() + 1, kFieldBytes);
  return out;
}

std::array<std::uint8_t, kScalarBytes> to_bytes_zr(const Zr& z) {
  std::array<std::uint8_t, kScalarBytes> out{};
  export_be(z, out.data(), kScalarBytes);
  return out;
}

G1 g1_from_bytes(std::span<const std::uint8_t> b) {
  NL_ENFORCE(b.size() == kG1Bytes, Errc::kCrypto, "G1 encoding length");
  if (b[0] == 0) {
    NL_ENFORCE(std::all_of(b.begin() + 1, b.end(), [](std::uint8_t v) { return v == 0; }), Errc::kCrypto,
               "malformed G1 identity");
    return {};
  }
  NL_ENFORCE(b[0] == 2 || b[0] == 3, Errc::kCrypto, "G1 encoding tag");
  mpz_class x = import_be(b.subspan(1));
  NL_ENFORCE(x < Q(), Errc::kCrypto, "G1 coordinate out of range");
  mpz_class y;
  NL_ENFORCE(sqrt_q(curve_rhs(x), y), Errc::kCrypto, "G1 point not on curve");
  if (static_cast<int>(mpz_tstbit(y.get_mpz_t(), 0)) != (b[0] & 1)) y = modq(-y);
  G1 p{x, y, false};
  NL_ENFORCE(in_subgroup(p), Errc::kCrypto, "G1 point outside the prime-order subgroup");
  return p;
}

GT gt_from_bytes(std::span<const std::uint8_t> b) {
  NL_ENFORCE(b.size() == kGTBytes, Errc::kCrypto, "GT encoding length");
  NL_ENFORCE(b[0] == 2 || b[0] == 3, Errc::kCrypto, "GT encoding tag");
  mpz_class a = import_be(b.subspan(1));
  NL_ENFORCE(a < Q(), Errc::kCrypto, "GT coordinate out of range");
  mpz_class bb;
  NL_ENFORCE(sqrt_q(modq(1 - a * a), bb), Errc::kCrypto, "GT element not unitary");
  if (static_cast<int>(mpz_tstbit(bb.get_mpz_t(), 0)) != (b[0] & 1)) bb = modq(-bb);
  GT out{Fq2{a, bb}};
  NL_ENFORCE(pow(out.v, params().r) == Fq2::one(), Errc::kCrypto, "GT element outside the subgroup");
  return out;
}

Zr zr_from_bytes(std::span<const std::uint8_t> b) {
  NL_ENFORCE(b.size() == kScalarBytes, Errc::kCrypto, "scalar encoding length");
  mpz_class z = import_be(b);
  NL_ENFORCE(z < params().r, Errc::kCrypto, "scalar out of range");
  return z;
}

}  // namespace neuronlock::pairing
