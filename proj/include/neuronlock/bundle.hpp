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

// The ABE bundle (`.abk`) wraps one AES key per neuron subset under that
// subset's access policy.
//
//   magic "SNABE001" | model nonce u64 | m_max f64 | v_split f64 |
//   hist_bins u32 | task count u32 | task names (str) | public key |
//   entry count u32 | entries
//   entry: subset id u32 | owner bitmap u32 | policy (str) | body (blob)
//
// The body is abe::write_ciphertext_body output. Its size depends on the
// policies only, never on the neuron count.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "neuronlock/abe.hpp"
#include "neuronlock/cipher.hpp"
#include "neuronlock/detect.hpp"
#include "neuronlock/policy.hpp"

namespace neuronlock {

struct BundleEntry {
  std::uint32_t subset_id = 0;
  std::uint32_t owner_bitmap = 0;  // bit i = tasks[i]
  abe::Ciphertext ct;
};

struct AbeBundle {
  std::uint64_t model_nonce = 0;
  DetectionThresholds thresholds;
  std::vector<std::string> tasks;
  abe::PublicKey pk;
  std::vector<BundleEntry> entries;  // ascending subset id
};

struct SealedBundle {
  AbeBundle bundle;
  std::map<std::uint32_t, AesKey> keys;
  std::map<std::uint32_t, abe::GT> secrets;  // the group elements behind `keys`
};

// Draws a fresh GT element per subset, derives its AES key, and encrypts it
// under the subset policy.
SealedBundle seal_subset_keys(const abe::PublicKey& pk, const SubsetPartition& partition,
                              const std::map<std::uint32_t, PolicyNode>& policies,
                              std::uint64_t model_nonce, const DetectionThresholds& thresholds, Rng& rng);

// Policy update: re-encrypts existing subset secrets under new policies so
// the encrypted model and key map stay valid.
SealedBundle reseal_subset_keys(const abe::PublicKey& pk, const SubsetPartition& partition,
                                const std::map<std::uint32_t, PolicyNode>& policies,
                                std::uint64_t model_nonce, const DetectionThresholds& thresholds,
                                const std::map<std::uint32_t, abe::GT>& secrets, Rng& rng);

// AES keys of every entry the secret key opens.
std::map<std::uint32_t, AesKey> recover_keys(const AbeBundle& bundle, const abe::SecretKey& sk);

// Union of attributes named by the entry policies.
AttributeSet bundle_attributes(const AbeBundle& bundle);

Bytes write_bundle(const AbeBundle& bundle);
AbeBundle read_bundle(std::span<const std::uint8_t> bytes);

}  // namespace neuronlock
