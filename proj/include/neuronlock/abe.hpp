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

// Ciphertext-policy attribute-based encryption (Bethencourt-Sahai-Waters)
// over the symmetric pairing in pairing.hpp.
//
//   PK  = (g, h = g^beta, f = g^(1/beta), e(g,g)^alpha)
//   MSK = (beta, g^alpha)
//   SK  = (D = g^((alpha + r) / beta), {D_j = g^r H(j)^r_j, D'_j = g^r_j})
//   CT  = (policy, M e(g,g)^(alpha s), C = h^s, {C_y = g^q_y(0), C'_y = H(att(y))^q_y(0)})
//
// Each ciphertext also carries a 16-byte tag of M so that decryption with an
// unsatisfying or spliced key is reported as failure instead of yielding an
// unrelated group element.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neuronlock/bytes.hpp"
#include "neuronlock/cipher.hpp"
#include "neuronlock/pairing.hpp"
#include "neuronlock/policy.hpp"
#include "neuronlock/rng.hpp"

namespace neuronlock::abe {

using pairing::G1;
using pairing::GT;
using pairing::Zr;

using CheckTag = std::array<std::uint8_t, 16>;

struct PublicKey {
  G1 g;
  G1 h;
  G1 f;
  GT egg_alpha;
};

struct MasterKey {
  Zr beta;
  G1 g_alpha;
};

struct KeyComponent {
  G1 d;        // g^r H(j)^r_j
  G1 d_prime;  // g^r_j
};

// Fields are public so tests can splice components across keys.
struct SecretKey {
  G1 d;
  std::map<std::string, KeyComponent> components;

  AttributeSet attributes() const;
};

struct LeafCiphertext {
  G1 c;
  G1 c_prime;
};

struct Ciphertext {
  PolicyNode policy;
  GT c_tilde;
  G1 c;
  CheckTag check{};
  std::vector<LeafCiphertext> leaves;  // depth-first leaf order of `policy`
};

void setup(Rng& rng, PublicKey& pk, MasterKey& msk);

// Throws kEmptyAttributeSet.
SecretKey keygen(const PublicKey& pk, const MasterKey& msk, const AttributeSet& attributes, Rng& rng);

// Throws kInvalidPolicy.
Ciphertext encrypt(const PublicKey& pk, const GT& message, const PolicyNode& policy, Rng& rng);

// nullopt when the key does not satisfy the policy or the recovered element
// fails the check tag.
std::optional<GT> decrypt(const PublicKey& pk, const Ciphertext& ct, const SecretKey& sk);

// Uniform element of GT.
GT random_gt(const PublicKey& pk, Rng& rng);
CheckTag check_tag(const GT& m);
AesKey derive_aes_key(const GT& m);

// Checks g^alpha and beta against PK; throws kBadMasterKey.
void verify_master_key(const PublicKey& pk, const MasterKey& msk);

inline constexpr std::size_t kPublicKeyBytes = 3 * pairing::kG1Bytes + pairing::kGTBytes;

void write_public_key(ByteWriter& w, const PublicKey& pk);
PublicKey read_public_key(ByteReader& r);

// Body only; the policy travels separately and fixes the leaf count.
void write_ciphertext_body(ByteWriter& w, const Ciphertext& ct);
Ciphertext read_ciphertext_body(ByteReader& r, PolicyNode policy);

// `.ask`: magic | attribute count u32 | D | {name str, D_j, D'_j} sorted by name.
Bytes write_secret_key(const SecretKey& sk);
SecretKey read_secret_key(std::span<const std::uint8_t> bytes);

// `.msk`: magic | PK | beta | g^alpha.
Bytes write_master_key(const PublicKey& pk, const MasterKey& msk);
std::pair<PublicKey, MasterKey> read_master_key(std::span<const std::uint8_t> bytes);

}  // namespace neuronlock::abe
