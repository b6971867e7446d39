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

// Client-side model decryption.
//
// Transmission-efficient (TE) mode receives no key map: every neuron is
// trial-decrypted with each recovered key (ascending subset id) on its input
// row only, and the first key whose output passes detection is applied to the
// whole neuron. Computation-efficient (CE) mode reads the subset of each
// neuron from the `.kmap` and decrypts it directly.
//
// Neurons that stay encrypted are zeroized and pruned, and the container's
// encrypted flag is cleared, so a fully authorized decryption reproduces the
// plaintext model byte for byte.

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "neuronlock/cipher.hpp"
#include "neuronlock/detect.hpp"
#include "neuronlock/model.hpp"

namespace neuronlock {

enum class DecryptMode : std::uint8_t { kTransmissionEfficient, kComputationEfficient };
enum class DecryptStatus : std::uint8_t { kFull, kPartial, kZero };

struct DecryptReport {
  DecryptMode mode = DecryptMode::kTransmissionEfficient;
  DecryptStatus status = DecryptStatus::kZero;
  std::uint64_t total_neurons = 0;
  std::uint64_t decrypted = 0;
  std::uint64_t pruned = 0;
  std::size_t keys = 0;
  // Row decryptions attempted; TE counts every try, CE one per decrypted neuron.
  std::uint64_t trials = 0;
  // CE only: neurons whose decrypted row failed detection (pruned).
  std::uint64_t detection_mismatches = 0;
  std::map<std::uint32_t, std::uint64_t> per_subset;
  double seconds = 0;
};

// Both throw kEncryptedModel if the model is not encrypted; decrypt_ce throws
// kKeyMapLengthMismatch.
DecryptReport decrypt_te(ModelContainer& model, const std::map<std::uint32_t, AesKey>& keys,
                         const DetectionThresholds& thresholds);
DecryptReport decrypt_ce(ModelContainer& model, const std::map<std::uint32_t, AesKey>& keys,
                         const KeyMap& key_map, const DetectionThresholds& thresholds);

// Zeroizes every neuron with keep[g] == false, installs the prune mask, and
// clears the encrypted flag.
void adaptive_prune(ModelContainer& model, const std::vector<bool>& keep);

std::string_view decrypt_status_name(DecryptStatus s);
std::string decrypt_report_json(const DecryptReport& r);

}  // namespace neuronlock
