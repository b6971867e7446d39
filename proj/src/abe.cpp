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

#include "neuronlock/abe.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cstring>

namespace neuronlock::abe {
namespace {

using pairing::params;

constexpr std::string_view kAttrDomain = "neuronlock/abe-attr";
constexpr std::string_view kCheckDomain = "neuronlock/abe-check";
constexpr char kSkMagic[8] = {'S', 'N', 'A', 'S', 'K', '0', '0', '1'};
constexpr char kMskMagic[8] = {'S', 'N', 'M', 'S', 'K', '0', '0', '1'};

Zr mod_r(const Zr& v) {
  Zr out = v % params().r;
  if (out < 0) out += params().r;
  return out;
}

Zr inverse_r(const Zr& v) {
  Zr out;
  if (mpz_invert(out.get_mpz_t(), mod_r(v).get_mpz_t(), params().r.get_mpz_t()) == 0) {
    throw Error(Errc::kCrypto, "non-invertible scalar");
  }
  return out;
}

class AttributeHasher {
 public:
  const G1& operator()(const std::string& attr) {
    auto it = cache_.find(attr);
    if (it == cache_.end()) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(attr.data());
      it = cache_.emplace(attr, pairing::hash_to_g1(kAttrDomain, {p, attr.size()})).first;
    }
    return it->second;
  }

 private:
  std::map<std::string, G1> cache_;
};

void share(const G1& g, const PolicyNode& node, const Zr& secret, Rng& rng, AttributeHasher& hash,
           std::vector<LeafCiphertext>& out) {
  if (node.kind == PolicyNode::Kind::kLeaf) {
    out.push_back({pairing::mul(g, secret), pairing::mul(hash(node.attribute), secret)});
    return;
  }
  // Degree k-1 polynomial with q(0) = secret; child i receives q(i).
  const std::uint32_t k = node.required();
  std::vector<Zr> coeff(k);
  coeff[0] = secret;
  for (std::uint32_t i = 1; i < k; ++i) coeff[i] = pairing::random_zr(rng);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    const Zr x = static_cast<unsigned long>(i + 1);
    Zr v = 0;
    for (std::uint32_t d = k; d-- > 0;) v = mod_r(v * x + coeff[d]);
    share(g, node.children[i], v, rng, hash, out);
  }
}

// Lagrange basis at 0 for index i over the set `xs`.
Zr lagrange_at_zero(long i, const std::vector<long>& xs) {
  Zr num = 1;
  Zr den = 1;
  for (long j : xs) {
    if (j == i) continue;
    num = mod_r(num * Zr(-j));
    den = mod_r(den * Zr(i - j));
  }
  return mod_r(num * inverse_r(den));
}

struct Plan {
  bool ok = false;
  std::size_t cost = 0;
  std::vector<std::pair<std::size_t, Zr>> terms;  // (leaf index, exponent)
};

Plan plan(const PolicyNode& node, std::size_t& leaf, const AttributeSet& attrs) {
  if (node.kind == PolicyNode::Kind::kLeaf) {
    Plan p;
    if (attrs.count(node.attribute)) {
      p.ok = true;
      p.cost = 1;
      p.terms.push_back({leaf, Zr(1)});
    }
    ++leaf;
    return p;
  }
  std::vector<Plan> kids;
  kids.reserve(node.children.size());
  for (const auto& c : node.children) kids.push_back(plan(c, leaf, attrs));

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (kids[i].ok) order.push_back(i);
  }
  const std::uint32_t k = node.required();
  if (order.size() < k) return {};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return kids[a].cost < kids[b].cost; });
  order.resize(k);
  std::sort(order.begin(), order.end());

  std::vector<long> xs;
  for (auto i : order) xs.push_back(static_cast<long>(i + 1));
  Plan p;
  p.ok = true;
  for (auto i : order) {
    const Zr delta = lagrange_at_zero(static_cast<long>(i + 1), xs);
    p.cost += kids[i].cost;
    for (auto& [idx, e] : kids[i].terms) p.terms.push_back({idx, mod_r(e * delta)});
  }
  return p;
}

void collect_attributes(const PolicyNode& node, std::vector<const std::string*>& out) {
  if (node.kind == PolicyNode::Kind::kLeaf) {
    out.push_back(&node.attribute);
    return;
  }
  for (const auto& c : node.children) collect_attributes(c, out);
}

void put(ByteWriter& w, const G1& p) { w.raw(pairing::to_bytes(p)); }
void put(ByteWriter& w, const GT& x) { w.raw(pairing::to_bytes(x)); }
G1 get_g1(ByteReader& r) { return pairing::g1_from_bytes(r.raw(pairing::kG1Bytes)); }
GT get_gt(ByteReader& r) { return pairing::gt_from_bytes(r.raw(pairing::kGTBytes)); }

void expect_magic(std::span<const std::uint8_t> bytes, const char (&magic)[8], const char* what) {
  NL_ENFORCE(bytes.size() >= 8 && std::memcmp(bytes.data(), magic, 8) == 0, Errc::kBadMagic,
             std::string("not a ") + what + " file");
}

}  // namespace

AttributeSet SecretKey::attributes() const {
  AttributeSet out;
  for (const auto& [name, _] : components) out.insert(name);
  return out;
}

void setup(Rng& rng, PublicKey& pk, MasterKey& msk) {
  const Zr alpha = pairing::random_zr(rng);
  msk.beta = pairing::random_zr(rng);
  pk.g = pairing::random_g1(rng);
  pk.h = pairing::mul(pk.g, msk.beta);
  pk.f = pairing::mul(pk.g, inverse_r(msk.beta));
  msk.g_alpha = pairing::mul(pk.g, alpha);
  pk.egg_alpha = pairing::gt_pow(pairing::pair(pk.g, pk.g), alpha);
}

SecretKey keygen(const PublicKey& pk, const MasterKey& msk, const AttributeSet& attributes, Rng& rng) {
  NL_ENFORCE(!attributes.empty(), Errc::kEmptyAttributeSet, "key requested for no attributes");
  const Zr r = pairing::random_zr(rng);
  const G1 g_r = pairing::mul(pk.g, r);
  SecretKey sk;
  sk.d = pairing::mul(pairing::add(msk.g_alpha, g_r), inverse_r(msk.beta));
  AttributeHasher hash;
  for (const auto& a : attributes) {
    NL_ENFORCE(!a.empty(), Errc::kInvalidArgument, "empty attribute name");
    const Zr rj = pairing::random_zr(rng);
    sk.components[a] = {pairing::add(g_r, pairing::mul(hash(a), rj)), pairing::mul(pk.g, rj)};
  }
  return sk;
}

Ciphertext encrypt(const PublicKey& pk, const GT& message, const PolicyNode& policy, Rng& rng) {
  validate_policy(policy);
  const Zr s = pairing::random_zr(rng);
  Ciphertext ct;
  ct.policy = policy;
  ct.c_tilde = pairing::gt_mul(message, pairing::gt_pow(pk.egg_alpha, s));
  ct.c = pairing::mul(pk.h, s);
  ct.check = check_tag(message);
  AttributeHasher hash;
  ct.leaves.reserve(policy.leaf_count());
  share(pk.g, policy, s, rng, hash, ct.leaves);
  return ct;
}

std::optional<GT> decrypt(const PublicKey& /*pk*/, const Ciphertext& ct, const SecretKey& sk) {
  NL_ENFORCE(ct.leaves.size() == ct.policy.leaf_count(), Errc::kCrypto, "ciphertext leaf count mismatch");
  std::size_t leaf = 0;
  const Plan p = plan(ct.policy, leaf, sk.attributes());
  if (!p.ok) return std::nullopt;

  std::vector<const std::string*> attrs;
  collect_attributes(ct.policy, attrs);
  GT a;  // e(g,g)^(r s)
  for (const auto& [idx, e] : p.terms) {
    const KeyComponent& kc = sk.components.at(*attrs[idx]);
    const LeafCiphertext& lc = ct.leaves[idx];
    const GT share = pairing::gt_div(pairing::pair(kc.d, lc.c), pairing::pair(kc.d_prime, lc.c_prime));
    a = pairing::gt_mul(a, pairing::gt_pow(share, e));
  }
  const GT blind = pairing::gt_div(pairing::pair(ct.c, sk.d), a);  // e(g,g)^(alpha s)
  GT m = pairing::gt_div(ct.c_tilde, blind);
  if (check_tag(m) != ct.check) return std::nullopt;
  return m;
}

GT random_gt(const PublicKey& pk, Rng& rng) { return pairing::gt_pow(pk.egg_alpha, pairing::random_zr(rng)); }

CheckTag check_tag(const GT& m) {
  const auto enc = pairing::to_bytes(m);
  Bytes input(kCheckDomain.begin(), kCheckDomain.end());
  input.insert(input.end(), enc.begin(), enc.end());
  std::uint8_t digest[SHA256_DIGEST_LENGTH];
  SHA256(input.data(), input.size(), digest);
  CheckTag tag;
  std::memcpy(tag.data(), digest, tag.size());
  return tag;
}

AesKey derive_aes_key(const GT& m) {
  const auto enc = pairing::to_bytes(m);
  std::uint8_t digest[SHA256_DIGEST_LENGTH];
  SHA256(enc.data(), enc.size(), digest);
  AesKey key;
  std::memcpy(key.data(), digest, key.size());
  return key;
}

void verify_master_key(const PublicKey& pk, const MasterKey& msk) {
  NL_ENFORCE(pairing::mul(pk.g, msk.beta) == pk.h, Errc::kBadMasterKey, "beta does not match the public key");
  NL_ENFORCE(pairing::pair(pk.g, msk.g_alpha) == pk.egg_alpha, Errc::kBadMasterKey,
             "g^alpha does not match the public key");
}

void write_public_key(ByteWriter& w, const PublicKey& pk) {
  put(w, pk.g);
  put(w, pk.h);
  put(w, pk.f);
  put(w, pk.egg_alpha);
}

PublicKey read_public_key(ByteReader& r) {
  PublicKey pk;
  pk.g = get_g1(r);
  pk.h = get_g1(r);
  pk.f = get_g1(r);
  pk.egg_alpha = get_gt(r);
  return pk;
}

void write_ciphertext_body(ByteWriter& w, const Ciphertext& ct) {
  put(w, ct.c_tilde);
  put(w, ct.c);
  w.raw(ct.check);
  w.u32(static_cast<std::uint32_t>(ct.leaves.size()));
  for (const auto& l : ct.leaves) {
    put(w, l.c);
    put(w, l.c_prime);
  }
}

Ciphertext read_ciphertext_body(ByteReader& r, PolicyNode policy) {
  Ciphertext ct;
  ct.c_tilde = get_gt(r);
  ct.c = get_g1(r);
  auto tag = r.raw(ct.check.size());
  std::copy(tag.begin(), tag.end(), ct.check.begin());
  const std::uint32_t n = r.u32();
  NL_ENFORCE(n == policy.leaf_count(), Errc::kInvalidPolicy,
             "ciphertext has " + std::to_string(n) + " leaves, policy has " +
                 std::to_string(policy.leaf_count()));
  ct.leaves.resize(n);
  for (auto& l : ct.leaves) {
    l.c = get_g1(r);
    l.c_prime = get_g1(r);
  }
  ct.policy = std::move(policy);
  return ct;
}

Bytes write_secret_key(const SecretKey& sk) {
  ByteWriter w;
  w.raw(std::string_view(kSkMagic, 8));
  w.u32(static_cast<std::uint32_t>(sk.components.size()));
  put(w, sk.d);
  for (const auto& [name, kc] : sk.components) {
    w.str(name);
    put(w, kc.d);
    put(w, kc.d_prime);
  }
  return w.take();
}

SecretKey read_secret_key(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kSkMagic, "SNASK001");
  ByteReader r(bytes, Errc::kTruncatedTensor, "attribute secret key");
  r.raw(8);
  const std::uint32_t n = r.u32();
  SecretKey sk;
  sk.d = get_g1(r);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    KeyComponent kc;
    kc.d = get_g1(r);
    kc.d_prime = get_g1(r);
    sk.components[std::move(name)] = kc;
  }
  NL_ENFORCE(r.done(), Errc::kInvalidArgument, "trailing bytes in attribute secret key");
  return sk;
}

Bytes write_master_key(const PublicKey& pk, const MasterKey& msk) {
  ByteWriter w;
  w.raw(std::string_view(kMskMagic, 8));
  write_public_key(w, pk);
  w.raw(pairing::to_bytes_zr(msk.beta));
  put(w, msk.g_alpha);
  return w.take();
}

std::pair<PublicKey, MasterKey> read_master_key(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kMskMagic, "SNMSK001");
  ByteReader r(bytes, Errc::kTruncatedTensor, "master key");
  r.raw(8);
  PublicKey pk = read_public_key(r);
  MasterKey msk;
  msk.beta = pairing::zr_from_bytes(r.raw(pairing::kScalarBytes));
  msk.g_alpha = get_g1(r);
  verify_master_key(pk, msk);
  return {pk, msk};
}

}  // namespace neuronlock::abe
