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

// Per-neuron AES-128-CTR.
//
// The 128-bit counter block is nonce (8 bytes, big-endian) followed by a
// 64-bit big-endian block counter. Neuron g owns counters
// [g * kNeuronBlockBudget, (g + 1) * kNeuronBlockBudget), and its three spans
// are enciphered as one stream W_IN || B_IN || W_OUT_T starting at the first
// counter of that range.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "neuronlock/model.hpp"
#include "neuronlock/policy.hpp"

namespace neuronlock {

using AesKey = std::array<std::uint8_t, 16>;

inline constexpr std::uint64_t kNeuronBlockBudget = std::uint64_t{1} << 16;
inline constexpr std::size_t kAesBlock = 16;
inline constexpr char kKeyMapMagic[8] = {'S', 'N', 'K', 'M', 'A', 'P', '0', '1'};

struct NeuronCipherConfig {
  AesKey key{};
  std::uint64_t nonce = 0;
  std::uint64_t counter_base = 0;  // global neuron index
};

// XORs `data` with the keystream whose first block uses `counter`.
void xor_keystream(const AesKey& key, std::uint64_t nonce, std::uint64_t counter,
                   std::span<std::uint8_t> data);

// Applies the neuron's keystream to its spans inside `payload`. Throws
// kSpanTooLarge when the spans exceed the per-neuron counter budget. Spans
// may be empty.
void crypt_neuron_spans(const NeuronCipherConfig& cfg, std::span<std::uint8_t> payload,
                        const NeuronSpans& spans);

// In place; encryption and decryption are the same operation.
void encrypt_neuron(const NeuronCipherConfig& cfg, ModelContainer& model, const NeuronRef& n);
void decrypt_neuron(const NeuronCipherConfig& cfg, ModelContainer& model, const NeuronRef& n);

// Neuron -> subset id, shipped for computation-efficient decryption.
using KeyMap = std::vector<std::uint32_t>;

struct EncryptedModel {
  ModelContainer model;
  KeyMap key_map;
};

// Encrypts every MLP neuron under its subset's key and marks the container
// encrypted with `nonce`. Throws kMissingSubsetKey, kEncryptedModel,
// kMismatchedNeuronCount.
EncryptedModel encrypt_model(const ModelContainer& model, const SubsetPartition& partition,
                             const std::map<std::uint32_t, AesKey>& keys, std::uint64_t nonce);

// `.kmap`: magic | neuron count u64 | subset id u32 per neuron.
Bytes write_kmap(const KeyMap& map);
KeyMap read_kmap(std::span<const std::uint8_t> bytes);

// Runs fn(begin, end) over [0, n) on up to hardware_concurrency threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace neuronlock
