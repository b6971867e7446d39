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

// End-to-end flows behind the CLI: encrypt (developer), keygen (developer),
// decrypt (deployer), inspect. The in-memory variants are what the tests
// drive; the file variants add parsing and atomic writes.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neuronlock/abe.hpp"
#include "neuronlock/bundle.hpp"
#include "neuronlock/decryptor.hpp"
#include "neuronlock/detect.hpp"
#include "neuronlock/policy.hpp"
#include "neuronlock/selector.hpp"

namespace neuronlock {

struct Authority {
  abe::PublicKey pk;
  abe::MasterKey msk;
};

Authority new_authority(Rng& rng);

struct EncryptInputs {
  ModelContainer model;
  std::vector<ActivationTrace> traces;
  TaskPolicies policies;
  std::map<std::string, SelectionParams> params;
  SelectionParams defaults;
  std::size_t calibration_samples = 4096;
  // Reuse an existing key authority; a fresh one is drawn otherwise.
  std::optional<Authority> authority;
};

struct EncryptOutputs {
  ModelContainer encrypted;
  AbeBundle bundle;
  KeyMap key_map;
  Authority authority;
  SelectionResult selection;
  SubsetPartition partition;
  CalibrationReport calibration;
  std::map<std::uint32_t, AesKey> subset_keys;     // developer-side only
  std::map<std::uint32_t, abe::GT> subset_secrets;  // kept for policy updates
  double seconds = 0;
};

// selection -> partition -> policies -> subset keys -> model encryption ->
// calibration. Every traced task must have a policy (kMissingTaskPolicy) and
// every policy must validate before any key material is drawn.
EncryptOutputs encrypt_pipeline(const EncryptInputs& in, Rng& rng);

struct DecryptInputs {
  DecryptMode mode = DecryptMode::kTransmissionEfficient;
  std::optional<KeyMap> key_map;                    // required for CE
  std::optional<DetectionThresholds> thresholds;    // overrides the bundle's
};

struct DecryptOutputs {
  ModelContainer model;
  DecryptReport report;
  std::size_t keys_recovered = 0;
};

// Throws kArtifactMismatch when the bundle belongs to another model.
DecryptOutputs decrypt_pipeline(const ModelContainer& encrypted, const AbeBundle& bundle,
                                const abe::SecretKey& sk, const DecryptInputs& in);

// File-level job; writes <out>.snm, .abk, .kmap, .thr, .msk and
// .selection.json next to `out_prefix`.
struct EncryptJob {
  std::filesystem::path model;
  std::vector<std::filesystem::path> traces;
  std::filesystem::path policy_file;
  std::map<std::string, SelectionParams> params;
  SelectionParams defaults;
  std::filesystem::path out_prefix;
  std::optional<std::filesystem::path> master_key;  // reuse an authority
  std::optional<std::uint64_t> seed;
  std::size_t calibration_samples = 4096;
};

struct EncryptArtifacts {
  std::filesystem::path model, bundle, key_map, thresholds, master_key, report;
};

EncryptArtifacts artifact_paths(const std::filesystem::path& out_prefix);
// Returns a JSON summary.
std::string run_encrypt_job(const EncryptJob& job);

struct KeygenResult {
  std::size_t bytes = 0;
  double seconds = 0;
  AttributeSet attributes;
};

// Throws kBadMasterKey, kEmptyAttributeSet.
KeygenResult run_keygen(const std::filesystem::path& master_key, const AttributeSet& attributes,
                        const std::filesystem::path& out, std::optional<std::uint64_t> seed);

struct DecryptJob {
  std::filesystem::path model, bundle, secret_key, out;
  DecryptMode mode = DecryptMode::kTransmissionEfficient;
  std::optional<std::filesystem::path> key_map;
  std::optional<std::filesystem::path> thresholds;
  std::optional<std::filesystem::path> report;
};

DecryptReport run_decrypt(const DecryptJob& job);

// Describes any artifact by its magic, as JSON. Secret material is never printed.
std::string inspect_file(const std::filesystem::path& path);

}  // namespace neuronlock
