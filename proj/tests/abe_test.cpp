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

#include "doctest.h"

#include <chrono>
#include <set>

#include "neuronlock/abe.hpp"
#include "neuronlock/bundle.hpp"

using namespace neuronlock;
using namespace neuronlock::abe;

namespace {

struct Fixture {
  Rng rng{21};
  PublicKey pk;
  MasterKey msk;
  Fixture() { setup(rng, pk, msk); }
};

double ms_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

TEST_CASE("decrypt succeeds exactly when the policy is satisfied") {
  Fixture f;
  const PolicyNode policy = parse_policy("or(and(hospital,doctor),th(2,lab,nurse,admin))");
  const GT m = random_gt(f.pk, f.rng);
  const Ciphertext ct = encrypt(f.pk, m, policy, f.rng);
  const std::vector<std::pair<AttributeSet, bool>> cases = {
      {{"hospital", "doctor"}, true},  {{"hospital"}, false},          {{"lab", "admin"}, true},
      {{"nurse"}, false},              {{"nurse", "lab", "x"}, true},  {{"doctor", "nurse"}, false},
  };
  for (const auto& [attrs, ok] : cases) {
    const SecretKey sk = keygen(f.pk, f.msk, attrs, f.rng);
    const auto got = decrypt(f.pk, ct, sk);
    CHECK(got.has_value() == ok);
    if (got) CHECK(*got == m);
  }
}

TEST_CASE("threshold gates use Lagrange interpolation") {
  Fixture f;
  const PolicyNode policy = parse_policy("th(3,a,b,c,d,e)");
  const GT m = random_gt(f.pk, f.rng);
  const Ciphertext ct = encrypt(f.pk, m, policy, f.rng);
  CHECK(decrypt(f.pk, ct, keygen(f.pk, f.msk, {"b", "d", "e"}, f.rng)) == m);
  CHECK(decrypt(f.pk, ct, keygen(f.pk, f.msk, {"a", "b", "c", "d", "e"}, f.rng)) == m);
  CHECK(!decrypt(f.pk, ct, keygen(f.pk, f.msk, {"a", "e"}, f.rng)));
}

TEST_CASE("spliced key components do not decrypt") {
  Fixture f;
  const Ciphertext ct = encrypt(f.pk, random_gt(f.pk, f.rng), parse_policy("and(doctor,writer)"), f.rng);
  const SecretKey a = keygen(f.pk, f.msk, {"doctor"}, f.rng);
  const SecretKey b = keygen(f.pk, f.msk, {"writer"}, f.rng);
  SecretKey mixed = a;
  mixed.components.insert(b.components.begin(), b.components.end());
  CHECK(satisfies(ct.policy, mixed.attributes()));
  CHECK(!decrypt(f.pk, ct, mixed));
  mixed.d = b.d;
  CHECK(!decrypt(f.pk, ct, mixed));
}

TEST_CASE("keygen is randomized and fast") {
  Fixture f;
  const AttributeSet attrs{"hospital", "doctor", "cardiology", "region-eu", "tier-2", "research"};
  const auto t0 = std::chrono::steady_clock::now();
  const SecretKey a = keygen(f.pk, f.msk, attrs, f.rng);
  const double ms = ms_since(t0);
  MESSAGE("keygen (6 attributes): " << ms << " ms, " << write_secret_key(a).size() << " B");
  CHECK(ms < 50.0);
  const SecretKey b = keygen(f.pk, f.msk, attrs, f.rng);
  CHECK(write_secret_key(a) != write_secret_key(b));
  CHECK(write_secret_key(a).size() < 1024);
  const GT m = random_gt(f.pk, f.rng);
  const Ciphertext ct = encrypt(f.pk, m, parse_policy("and(doctor,research)"), f.rng);
  CHECK(decrypt(f.pk, ct, a) == m);
  CHECK(decrypt(f.pk, ct, b) == m);
  CHECK_THROWS_WITH_AS(keygen(f.pk, f.msk, {}, f.rng), doctest::Contains("EmptyAttributeSet"), Error);
}

TEST_CASE("key files round trip") {
  Fixture f;
  const SecretKey sk = keygen(f.pk, f.msk, {"x", "y"}, f.rng);
  const SecretKey back = read_secret_key(write_secret_key(sk));
  CHECK(write_secret_key(back) == write_secret_key(sk));

  const auto [pk, msk] = read_master_key(write_master_key(f.pk, f.msk));
  CHECK(pk.egg_alpha == f.pk.egg_alpha);
  CHECK(msk.beta == f.msk.beta);

  MasterKey wrong = f.msk;
  wrong.beta += 1;
  CHECK_THROWS_WITH_AS(read_master_key(write_master_key(f.pk, wrong)), doctest::Contains("BadMasterKey"), Error);
}

TEST_CASE("ciphertext body round trip") {
  Fixture f;
  const GT m = random_gt(f.pk, f.rng);
  const Ciphertext ct = encrypt(f.pk, m, parse_policy("or(a,and(b,c))"), f.rng);
  ByteWriter w;
  write_ciphertext_body(w, ct);
  ByteReader r(w.bytes(), Errc::kTruncatedTensor, "ct");
  const Ciphertext back = read_ciphertext_body(r, ct.policy);
  CHECK(r.done());
  CHECK(decrypt(f.pk, back, keygen(f.pk, f.msk, {"b", "c"}, f.rng)) == m);
  ByteReader r2(w.bytes(), Errc::kTruncatedTensor, "ct");
  CHECK_THROWS_AS(read_ciphertext_body(r2, parse_policy("or(a,b)")), Error);
}

TEST_CASE("aes key derivation is a function of the group element") {
  Fixture f;
  const GT a = random_gt(f.pk, f.rng);
  const GT b = random_gt(f.pk, f.rng);
  CHECK(derive_aes_key(a) == derive_aes_key(a));
  CHECK(derive_aes_key(a) != derive_aes_key(b));
  CHECK(check_tag(a) != check_tag(b));
}

TEST_CASE("bundle seals one key per subset") {
  Fixture f;
  const SubsetPartition part = decompose_subsets(
      std::map<std::string, std::vector<std::uint64_t>>{{"Code", {0, 1, 2}}, {"Health", {2, 3}}, {"Story", {5}}}, 10);
  const TaskPolicies user = parse_policy_file(
      "Code := and(company,developer)\nHealth := or(hospital,doctor)\n# comment\nStory := publisher\n");
  const auto policies = build_policies(part, user);
  const SealedBundle sealed = seal_subset_keys(f.pk, part, policies, 99, DetectionThresholds{}, f.rng);
  CHECK(sealed.bundle.entries.size() == part.subsets.size());
  const Bytes bytes = write_bundle(sealed.bundle);
  const AbeBundle back = read_bundle(bytes);
  CHECK(write_bundle(back) == bytes);
  CHECK(back.model_nonce == 99);

  const auto keys = recover_keys(back, keygen(f.pk, f.msk, {"hospital"}, f.rng));
  // Health-only subset, the Code+Health subset and the common subset.
  std::set<std::uint32_t> expected;
  for (const auto& s : part.subsets) {
    const bool health = std::find(s.owners.begin(), s.owners.end(), "Health") != s.owners.end();
    if (health || s.common()) expected.insert(s.id);
  }
  std::set<std::uint32_t> got;
  for (const auto& [id, k] : keys) {
    got.insert(id);
    CHECK(k == sealed.keys.at(id));
  }
  CHECK(got == expected);
  CHECK(bundle_attributes(back) == AttributeSet{"company", "developer", "doctor", "hospital", "publisher"});
}

TEST_CASE("independent authorities do not interoperate") {
  Fixture f;
  Rng rng(77);
  PublicKey pk2;
  MasterKey msk2;
  setup(rng, pk2, msk2);
  CHECK(!(pk2.egg_alpha == f.pk.egg_alpha));
  const GT m = random_gt(f.pk, f.rng);
  const Ciphertext ct = encrypt(f.pk, m, parse_policy("doctor"), f.rng);
  CHECK(!decrypt(f.pk, ct, keygen(pk2, msk2, {"doctor"}, rng)));
  CHECK(decrypt(f.pk, ct, keygen(f.pk, f.msk, {"doctor"}, rng)) == m);
}

TEST_CASE("encryption is randomized") {
  Fixture f;
  const GT m = random_gt(f.pk, f.rng);
  const PolicyNode p = parse_policy("or(a,b)");
  const Ciphertext x = encrypt(f.pk, m, p, f.rng);
  const Ciphertext y = encrypt(f.pk, m, p, f.rng);
  ByteWriter wx, wy;
  write_ciphertext_body(wx, x);
  write_ciphertext_body(wy, y);
  CHECK(wx.bytes() != wy.bytes());
  CHECK(x.check == y.check);
}

TEST_CASE("derived aes keys do not collide") {
  Fixture f;
  // Walk a chain of distinct group elements; 10^4 keys, no repeats.
  const GT step = random_gt(f.pk, f.rng);
  GT cur = random_gt(f.pk, f.rng);
  std::set<AesKey> seen;
  for (int i = 0; i < 10000; ++i) {
    seen.insert(derive_aes_key(cur));
    cur = pairing::gt_mul(cur, step);
  }
  CHECK(seen.size() == 10000);
}

TEST_CASE("resealing changes policies but keeps subset keys") {
  Fixture f;
  const SubsetPartition part = decompose_subsets(
      std::map<std::string, std::vector<std::uint64_t>>{{"Code", {0, 1}}, {"Health", {1, 2}}}, 4);
  const auto before = build_policies(part, parse_policy_file("Code := dev\nHealth := doctor\n"));
  const auto after = build_policies(part, parse_policy_file("Code := and(dev,senior)\nHealth := nurse\n"));
  const SealedBundle a = seal_subset_keys(f.pk, part, before, 7, {}, f.rng);
  const SealedBundle b = reseal_subset_keys(f.pk, part, after, 7, {}, a.secrets, f.rng);
  CHECK(a.keys == b.keys);
  const SecretKey doctor = keygen(f.pk, f.msk, {"doctor"}, f.rng);
  CHECK(recover_keys(a.bundle, doctor).size() == 3);
  CHECK(recover_keys(b.bundle, doctor).empty());
  const SecretKey nurse = keygen(f.pk, f.msk, {"nurse"}, f.rng);
  const auto got = recover_keys(b.bundle, nurse);
  CHECK(got.size() == 3);
  for (const auto& [id, k] : got) CHECK(a.keys.at(id) == k);
  CHECK_THROWS_WITH_AS(reseal_subset_keys(f.pk, part, after, 7, {}, {}, f.rng), doctest::Contains("MissingSubsetKey"),
                       Error);
}
