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

// Neuron-structured MLP weight container (`.snm`).
//
// File layout, all integers little-endian:
//
//   magic "SNMODEL1" | version u16 | dtype u8 | encrypted u8 |
//   layer_count u16 | activation u8 | [nonce u64, only when encrypted] |
//   layer table: layer_count x (d_in u32, d_hidden u32, d_out u32, scale f32) |
//   per layer: W_IN (d_hidden x d_in) | B_IN (d_hidden) | W_OUT_T (d_hidden x d_out) |
//   optional head: section_len u64 | d_in u32 | d_out u32 |
//                  W_HEAD f32 (d_out x d_in) | B_HEAD f32 (d_out)
//
// W_OUT is stored transposed so that neuron n owns three contiguous spans:
// row n of W_IN, element n of B_IN and row n of W_OUT_T. The head is always
// float32 and is never encrypted.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "neuronlock/bytes.hpp"
#include "neuronlock/dtype.hpp"

namespace neuronlock {

inline constexpr char kModelMagic[8] = {'S', 'N', 'M', 'O', 'D', 'E', 'L', '1'};
inline constexpr std::uint16_t kModelVersion = 1;

enum class Activation : std::uint8_t { kRelu = 0 };

struct LayerSpec {
  std::uint32_t d_in = 0;
  std::uint32_t d_hidden = 0;
  std::uint32_t d_out = 0;
  // Dequantization scale for INT8 payloads; 1.0 for float dtypes.
  float scale = 1.0f;

  bool operator==(const LayerSpec&) const = default;
};

struct Head {
  std::uint32_t d_in = 0;
  std::uint32_t d_out = 0;
  std::vector<float> weight;  // d_out x d_in, row-major
  std::vector<float> bias;    // d_out

  bool operator==(const Head&) const = default;
};

struct NeuronRef {
  std::uint32_t layer = 0;
  std::uint32_t index = 0;
  std::uint64_t global = 0;

  bool operator==(const NeuronRef&) const = default;
};

// Offsets are relative to ModelContainer::payload().
struct ByteRange {
  std::size_t offset = 0;
  std::size_t length = 0;

  std::size_t end() const { return offset + length; }
  bool operator==(const ByteRange&) const = default;
};

struct NeuronSpans {
  ByteRange w_in;
  ByteRange b_in;
  ByteRange w_out;

  std::size_t total() const { return w_in.length + b_in.length + w_out.length; }
};

class ModelContainer {
 public:
  ModelContainer() = default;

  // Zero-filled container. Throws kShapeMismatch if the layer chain or head
  // widths are inconsistent.
  static ModelContainer create(Dtype dtype, std::vector<LayerSpec> layers,
                               std::optional<Head> head = std::nullopt);

  Dtype dtype() const { return dtype_; }
  Activation activation() const { return activation_; }
  bool encrypted() const { return encrypted_; }
  std::uint64_t nonce() const { return nonce_; }
  void set_encrypted(std::uint64_t nonce) {
    encrypted_ = true;
    nonce_ = nonce;
  }
  void clear_encrypted() {
    encrypted_ = false;
    nonce_ = 0;
  }

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::optional<Head>& head() const { return head_; }
  std::optional<Head>& head() { return head_; }

  std::uint64_t neuron_count() const { return total_neurons_; }
  // Global index of the first neuron of `layer`.
  std::uint64_t layer_first(std::uint32_t layer) const { return layer_first_.at(layer); }

  NeuronRef neuron(std::uint64_t global) const;
  NeuronRef neuron(std::uint32_t layer, std::uint32_t index) const;
  // Throws kOutOfRange for an invalid reference.
  NeuronSpans spans(const NeuronRef& n) const;

  ByteRange w_in_tensor(std::uint32_t layer) const;
  ByteRange b_in_tensor(std::uint32_t layer) const;
  ByteRange w_out_tensor(std::uint32_t layer) const;

  std::span<std::uint8_t> payload() { return payload_; }
  std::span<const std::uint8_t> payload() const { return payload_; }
  std::span<std::uint8_t> bytes(ByteRange r) { return std::span(payload_).subspan(r.offset, r.length); }
  std::span<const std::uint8_t> bytes(ByteRange r) const {
    return std::span(payload_).subspan(r.offset, r.length);
  }

  // Scalar access in the container's dtype; INT8 is (de)quantized through the
  // layer scale.
  float get(std::uint32_t layer, ByteRange tensor, std::size_t element) const;
  void set(std::uint32_t layer, ByteRange tensor, std::size_t element, float value);

  // Pruned neurons are skipped by forward(). Empty mask means nothing pruned.
  const std::vector<bool>& prune_mask() const { return pruned_; }
  void set_prune_mask(std::vector<bool> mask);
  bool is_pruned(std::uint64_t global) const { return !pruned_.empty() && pruned_[global]; }

  std::size_t mlp_bytes() const { return mlp_bytes_; }

 private:
  void layout();

  Dtype dtype_ = Dtype::kFloat32;
  Activation activation_ = Activation::kRelu;
  bool encrypted_ = false;
  std::uint64_t nonce_ = 0;
  std::vector<LayerSpec> layers_;
  std::optional<Head> head_;
  Bytes payload_;
  std::vector<std::size_t> layer_offset_;
  std::vector<std::uint64_t> layer_first_;
  std::uint64_t total_neurons_ = 0;
  std::size_t mlp_bytes_ = 0;
  std::vector<bool> pruned_;

  friend ModelContainer read_container(std::span<const std::uint8_t> bytes);
};

ModelContainer read_container(std::span<const std::uint8_t> bytes);
Bytes write_container(const ModelContainer& model);

ModelContainer load_container(const std::filesystem::path& path);
void save_container(const std::filesystem::path& path, const ModelContainer& model);

struct ForwardResult {
  std::vector<float> output;
  // |post-activation| per global neuron; filled only when capture is set.
  std::vector<float> activations;
};

// Runs each layer as W_OUT * relu(W_IN * x + B_IN), then the head if present.
// Pruned neurons contribute nothing.
ForwardResult forward(const ModelContainer& model, std::span<const float> x, bool capture = false);

}  // namespace neuronlock
