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

#include "neuronlock/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace neuronlock {
namespace {

void validate_shapes(const std::vector<LayerSpec>& layers, const std::optional<Head>& head) {
  NL_ENFORCE(!layers.empty(), Errc::kShapeMismatch, "container has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    NL_ENFORCE(l.d_in > 0 && l.d_hidden > 0 && l.d_out > 0, Errc::kShapeMismatch,
               "layer " + std::to_string(i) + " has a zero dimension");
    NL_ENFORCE(l.scale > 0.0f, Errc::kShapeMismatch,
               "layer " + std::to_string(i) + " has a non-positive scale");
    if (i + 1 < layers.size()) {
      NL_ENFORCE(l.d_out == layers[i + 1].d_in, Errc::kShapeMismatch,
                 "layer " + std::to_string(i) + " d_out does not feed layer " +
                     std::to_string(i + 1));
    }
  }
  if (head) {
    NL_ENFORCE(head->d_in == layers.back().d_out && head->d_out > 0, Errc::kShapeMismatch,
               "head width does not match the last layer");
    NL_ENFORCE(head->weight.size() == std::size_t{head->d_in} * head->d_out &&
                   head->bias.size() == head->d_out,
               Errc::kShapeMismatch, "head tensor sizes do not match its shape");
  }
}

std::size_t layer_bytes(const LayerSpec& l, std::size_t es) {
  const std::size_t h = l.d_hidden;
  return (h * l.d_in + h + h * l.d_out) * es;
}

}  // namespace

void ModelContainer::layout() {
  const std::size_t es = element_size(dtype_);
  layer_offset_.clear();
  layer_first_.clear();
  std::size_t off = 0;
  std::uint64_t first = 0;
  for (const auto& l : layers_) {
    layer_offset_.push_back(off);
    layer_first_.push_back(first);
    off += layer_bytes(l, es);
    first += l.d_hidden;
  }
  mlp_bytes_ = off;
  total_neurons_ = first;
}

ModelContainer ModelContainer::create(Dtype dtype, std::vector<LayerSpec> layers,
                                      std::optional<Head> head) {
  validate_shapes(layers, head);
  ModelContainer m;
  m.dtype_ = dtype;
  m.layers_ = std::move(layers);
  m.head_ = std::move(head);
  m.layout();
  m.payload_.assign(m.mlp_bytes_, 0);
  return m;
}

NeuronRef ModelContainer::neuron(std::uint64_t global) const {
  NL_ENFORCE(global < total_neurons_, Errc::kOutOfRange,
             "neuron " + std::to_string(global) + " of " + std::to_string(total_neurons_));
  auto it = std::upper_bound(layer_first_.begin(), layer_first_.end(), global);
  auto layer = static_cast<std::uint32_t>(std::distance(layer_first_.begin(), it) - 1);
  return NeuronRef{layer, static_cast<std::uint32_t>(global - layer_first_[layer]), global};
}

NeuronRef ModelContainer::neuron(std::uint32_t layer, std::uint32_t index) const {
  NL_ENFORCE(layer < layers_.size() && index < layers_[layer].d_hidden, Errc::kOutOfRange,
             "neuron (" + std::to_string(layer) + "," + std::to_string(index) + ")");
  return NeuronRef{layer, index, layer_first_[layer] + index};
}

ByteRange ModelContainer::w_in_tensor(std::uint32_t layer) const {
  const auto& l = layers_.at(layer);
  return {layer_offset_[layer], std::size_t{l.d_hidden} * l.d_in * element_size(dtype_)};
}

ByteRange ModelContainer::b_in_tensor(std::uint32_t layer) const {
  const auto& l = layers_.at(layer);
  return {w_in_tensor(layer).end(), std::size_t{l.d_hidden} * element_size(dtype_)};
}

ByteRange ModelContainer::w_out_tensor(std::uint32_t layer) const {
  const auto& l = layers_.at(layer);
  return {b_in_tensor(layer).end(), std::size_t{l.d_hidden} * l.d_out * element_size(dtype_)};
}

NeuronSpans ModelContainer::spans(const NeuronRef& n) const {
  NL_ENFORCE(n.layer < layers_.size() && n.index < layers_[n.layer].d_hidden &&
                 n.global == layer_first_[n.layer] + n.index,
             Errc::kOutOfRange, "invalid neuron reference");
  const auto& l = layers_[n.layer];
  const std::size_t es = element_size(dtype_);
  const std::size_t in_row = std::size_t{l.d_in} * es;
  const std::size_t out_row = std::size_t{l.d_out} * es;
  return NeuronSpans{
      {w_in_tensor(n.layer).offset + n.index * in_row, in_row},
      {b_in_tensor(n.layer).offset + n.index * es, es},
      {w_out_tensor(n.layer).offset + n.index * out_row, out_row},
  };
}

float ModelContainer::get(std::uint32_t layer, ByteRange tensor, std::size_t element) const {
  const std::size_t es = element_size(dtype_);
  NL_ENFORCE((element + 1) * es <= tensor.length, Errc::kOutOfRange, "tensor element");
  auto v = decode_scalars(std::span(payload_).subspan(tensor.offset + element * es, es), dtype_,
                          layers_.at(layer).scale);
  return v[0];
}

void ModelContainer::set(std::uint32_t layer, ByteRange tensor, std::size_t element, float value) {
  const std::size_t es = element_size(dtype_);
  NL_ENFORCE((element + 1) * es <= tensor.length, Errc::kOutOfRange, "tensor element");
  encode_scalar(value, dtype_, layers_.at(layer).scale,
                payload_.data() + tensor.offset + element * es);
}

void ModelContainer::set_prune_mask(std::vector<bool> mask) {
  NL_ENFORCE(mask.empty() || mask.size() == total_neurons_, Errc::kShapeMismatch,
             "prune mask length");
  pruned_ = std::move(mask);
}

ModelContainer read_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, Errc::kTruncatedTensor, "model container");
  NL_ENFORCE(bytes.size() >= sizeof(kModelMagic) &&
                 std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) == 0,
             Errc::kBadMagic, "not an SNMODEL1 container");
  r.raw(sizeof(kModelMagic));
  const std::uint16_t version = r.u16();
  NL_ENFORCE(version == kModelVersion, Errc::kUnsupportedVersion,
             "container version " + std::to_string(version));

  ModelContainer m;
  m.dtype_ = dtype_from_tag(r.u8());
  const std::uint8_t enc = r.u8();
  const std::uint16_t layer_count = r.u16();
  const std::uint8_t act = r.u8();
  NL_ENFORCE(act == static_cast<std::uint8_t>(Activation::kRelu), Errc::kUnsupportedVersion,
             "activation tag " + std::to_string(act));
  m.encrypted_ = enc != 0;
  if (m.encrypted_) m.nonce_ = r.u64();
  for (std::uint16_t i = 0; i < layer_count; ++i) {
    LayerSpec l;
    l.d_in = r.u32();
    l.d_hidden = r.u32();
    l.d_out = r.u32();
    l.scale = r.f32();
    m.layers_.push_back(l);
  }
  validate_shapes(m.layers_, std::nullopt);
  m.layout();
  auto payload = r.raw(m.mlp_bytes_);
  m.payload_.assign(payload.begin(), payload.end());

  if (!r.done()) {
    const std::uint64_t section = r.u64();
    NL_ENFORCE(section == r.remaining(), Errc::kTruncatedTensor,
               "head section declares " + std::to_string(section) + " bytes, file has " +
                   std::to_string(r.remaining()));
    Head h;
    h.d_in = r.u32();
    h.d_out = r.u32();
    const std::size_t n = std::size_t{h.d_in} * h.d_out;
    NL_ENFORCE(section == 8 + 4 * (n + h.d_out), Errc::kTruncatedTensor,
               "head section length does not match its shape");
    h.weight.resize(n);
    h.bias.resize(h.d_out);
    for (auto& w : h.weight) w = r.f32();
    for (auto& b : h.bias) b = r.f32();
    m.head_ = std::move(h);
    validate_shapes(m.layers_, m.head_);
  }
  return m;
}

Bytes write_container(const ModelContainer& m) {
  ByteWriter w;
  w.raw(std::string_view(kModelMagic, sizeof(kModelMagic)));
  w.u16(kModelVersion);
  w.u8(static_cast<std::uint8_t>(m.dtype()));
  w.u8(m.encrypted() ? 1 : 0);
  w.u16(static_cast<std::uint16_t>(m.layers().size()));
  w.u8(static_cast<std::uint8_t>(m.activation()));
  if (m.encrypted()) w.u64(m.nonce());
  for (const auto& l : m.layers()) {
    w.u32(l.d_in);
    w.u32(l.d_hidden);
    w.u32(l.d_out);
    w.f32(l.scale);
  }
  w.raw(m.payload());
  if (const auto& h = m.head()) {
    w.u64(8 + 4 * (h->weight.size() + h->bias.size()));
    w.u32(h->d_in);
    w.u32(h->d_out);
    for (float v : h->weight) w.f32(v);
    for (float v : h->bias) w.f32(v);
  }
  return w.take();
}

ModelContainer load_container(const std::filesystem::path& path) {
  Bytes data = read_file(path);
  return read_container(data);
}

void save_container(const std::filesystem::path& path, const ModelContainer& model) {
  write_file_atomic(path, write_container(model));
}

ForwardResult forward(const ModelContainer& model, std::span<const float> x, bool capture) {
  NL_ENFORCE(!model.encrypted(), Errc::kEncryptedModel, "forward on an encrypted container");
  const auto& layers = model.layers();
  NL_ENFORCE(x.size() == layers.front().d_in, Errc::kShapeMismatch,
             "input has " + std::to_string(x.size()) + " values, model expects " +
                 std::to_string(layers.front().d_in));

  ForwardResult res;
  if (capture) res.activations.assign(model.neuron_count(), 0.0f);

  std::vector<double> cur(x.begin(), x.end());
  for (std::uint32_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    const auto w_in = decode_scalars(model.bytes(model.w_in_tensor(li)), model.dtype(), l.scale);
    const auto b_in = decode_scalars(model.bytes(model.b_in_tensor(li)), model.dtype(), l.scale);
    const auto w_out = decode_scalars(model.bytes(model.w_out_tensor(li)), model.dtype(), l.scale);
    std::vector<double> next(l.d_out, 0.0);
    const std::uint64_t first = model.layer_first(li);
    for (std::uint32_t n = 0; n < l.d_hidden; ++n) {
      if (model.is_pruned(first + n)) continue;
      double z = b_in[n];
      const float* row = w_in.data() + std::size_t{n} * l.d_in;
      for (std::uint32_t i = 0; i < l.d_in; ++i) z += double{row[i]} * cur[i];
      const double a = z > 0.0 ? z : 0.0;
      if (capture) res.activations[first + n] = static_cast<float>(std::abs(a));
      if (a == 0.0) continue;
      const float* out_row = w_out.data() + std::size_t{n} * l.d_out;
      for (std::uint32_t o = 0; o < l.d_out; ++o) next[o] += a * out_row[o];
    }
    cur = std::move(next);
  }
  if (const auto& h = model.head()) {
    std::vector<double> out(h->d_out);
    for (std::uint32_t o = 0; o < h->d_out; ++o) {
      double acc = h->bias[o];
      for (std::uint32_t i = 0; i < h->d_in; ++i) acc += double{h->weight[std::size_t{o} * h->d_in + i]} * cur[i];
      out[o] = acc;
    }
    cur = std::move(out);
  }
  res.output.assign(cur.begin(), cur.end());
  return res;
}

}  // namespace neuronlock
