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

#include "neuronlock/synth.hpp"

#include <algorithm>
#include <cmath>

namespace neuronlock::synth {
namespace {

constexpr double kInt8Sigma = 6.0;  // quantization levels per std dev

std::uint8_t int8_code(double levels) {
  const double c = std::clamp(std::round(levels), -127.0, 127.0);
  return static_cast<std::uint8_t>(static_cast<std::int8_t>(c));
}

// Fills a tensor with N(0, sigma^2) values (or codes for INT8).
void fill_gaussian(std::span<std::uint8_t> out, Dtype dtype, double sigma, Rng& rng) {
  const std::size_t es = element_size(dtype);
  for (std::size_t i = 0; i < out.size(); i += es) {
    const double z = rng.normal();
    if (dtype == Dtype::kInt8) {
      out[i] = int8_code(kInt8Sigma * z);
    } else {
      encode_scalar(static_cast<float>(sigma * z), dtype, 1.0f, out.data() + i);
    }
  }
}

std::vector<float> unit_gaussian(std::uint32_t d, Rng& rng) {
  std::vector<float> v(d);
  double norm = 0;
  for (auto& x : v) {
    x = static_cast<float>(rng.normal());
    norm += double{x} * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x = static_cast<float>(x / norm);
  return v;
}

}  // namespace

ModelContainer random_model(Dtype dtype, std::uint32_t d_model, std::uint32_t d_hidden,
                            std::uint32_t layers, Rng& rng) {
  NL_ENFORCE(layers > 0, Errc::kInvalidArgument, "need at least one layer");
  const float scale = dtype == Dtype::kInt8 ? static_cast<float>(1.0 / (kInt8Sigma * std::sqrt(double(d_model))))
                                            : 1.0f;
  std::vector<LayerSpec> specs(layers, LayerSpec{d_model, d_hidden, d_model, scale});
  ModelContainer m = ModelContainer::create(dtype, specs);
  for (std::uint32_t l = 0; l < layers; ++l) {
    fill_gaussian(m.bytes(m.w_in_tensor(l)), dtype, 1.0 / std::sqrt(double(d_model)), rng);
    fill_gaussian(m.bytes(m.b_in_tensor(l)), dtype, 0.01, rng);
    fill_gaussian(m.bytes(m.w_out_tensor(l)), dtype, 1.0 / std::sqrt(double(d_hidden)), rng);
  }
  return m;
}

std::size_t TaskSuite::task_index(std::string_view task) const {
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    if (spec.tasks[i] == task) return i;
  }
  throw Error(Errc::kUnknownTask, std::string(task));
}

double TaskSuite::accuracy(const ModelContainer& m, std::size_t task) const {
  const LabeledSet& set = test.at(task);
  if (set.inputs.empty()) return 0;
  std::size_t correct = 0;
  const std::size_t lo = task * spec.classes;
  for (std::size_t i = 0; i < set.inputs.size(); ++i) {
    const auto out = forward(m, set.inputs[i]).output;
    const auto first = out.begin() + static_cast<std::ptrdiff_t>(lo);
    const auto best = std::max_element(first, first + spec.classes);
    if (static_cast<std::uint32_t>(best - first) == set.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.inputs.size());
}

std::vector<ActivationTrace> TaskSuite::traces() const {
  std::vector<ActivationTrace> out;
  for (std::size_t t = 0; t < spec.tasks.size(); ++t) {
    out.push_back(accumulate_trace(model, spec.tasks[t], train[t].inputs));
  }
  return out;
}

TaskSuite make_task_suite(const TaskSuiteSpec& spec, Rng& rng) {
  NL_ENFORCE(!spec.tasks.empty() && spec.classes >= 2 && spec.d_in > 0 && spec.per_class > 0,
             Errc::kInvalidArgument, "degenerate task suite");
  const std::uint32_t T = static_cast<std::uint32_t>(spec.tasks.size());
  const std::uint32_t C = spec.classes;
  const std::uint32_t D = spec.d_in;
  const std::uint32_t planted = T * C * spec.per_class;
  const std::uint32_t H = planted + spec.shared;
  const std::uint32_t O = T * C;
  constexpr double kSignal = 3.0;      // input prototype gain
  constexpr double kPlantGain = 1.6;   // planted unit pre-activation on a match is ~4.8 - 1
  constexpr double kPlantBias = -1.0;
  constexpr double kSharedBias = 0.5;

  std::vector<std::vector<float>> proto(O);
  for (auto& p : proto) p = unit_gaussian(D, rng);

  // Shared units feed every logit through one common weight per logit, so
  // with the planted units gone a task's argmax no longer depends on the class.
  std::vector<double> shared_out(O);
  for (auto& w : shared_out) w = 0.01 * rng.normal();

  // Float weights first; quantized below for INT8.
  std::vector<float> w_in(std::size_t{H} * D), b_in(H), w_out(std::size_t{H} * O);
  for (std::uint32_t j = 0; j < H; ++j) {
    float* row = &w_in[std::size_t{j} * D];
    float* out = &w_out[std::size_t{j} * O];
    if (j < planted) {
      const std::uint32_t k = j % O;  // (task, class) slot
      for (std::uint32_t i = 0; i < D; ++i) {
        row[i] = static_cast<float>(kPlantGain * proto[k][i] + 0.02 * rng.normal() / std::sqrt(double(D)));
      }
      b_in[j] = static_cast<float>(kPlantBias);
      out[k] = 2.0f;
    } else {
      for (std::uint32_t i = 0; i < D; ++i) row[i] = static_cast<float>(rng.normal() / std::sqrt(double(D)));
      b_in[j] = static_cast<float>(kSharedBias);
      for (std::uint32_t o = 0; o < O; ++o) out[o] = static_cast<float>(shared_out[o] + 0.001 * rng.normal());
    }
  }

  float scale = 1.0f;
  if (spec.dtype == Dtype::kInt8) {
    float peak = 0;
    for (const auto* v : {&w_in, &b_in, &w_out}) {
      for (float x : *v) peak = std::max(peak, std::fabs(x));
    }
    scale = peak / 127.0f;
  }
  TaskSuite suite;
  suite.spec = spec;
  suite.model = ModelContainer::create(spec.dtype, {LayerSpec{D, H, O, scale}});
  ModelContainer& m = suite.model;
  auto store = [&](ByteRange tensor, const std::vector<float>& values) {
    auto bytes = m.bytes(tensor);
    const std::size_t es = element_size(spec.dtype);
    for (std::size_t i = 0; i < values.size(); ++i) encode_scalar(values[i], spec.dtype, scale, bytes.data() + i * es);
  };
  store(m.w_in_tensor(0), w_in);
  store(m.b_in_tensor(0), b_in);
  store(m.w_out_tensor(0), w_out);

  auto draw = [&](std::size_t t) {
    LabeledSet set;
    for (std::uint32_t c = 0; c < C; ++c) {
      const auto& p = proto[t * C + c];
      for (std::uint32_t s = 0; s < spec.samples_per_class; ++s) {
        std::vector<float> x(D);
        for (std::uint32_t i = 0; i < D; ++i) {
          x[i] = static_cast<float>(kSignal * p[i] + spec.noise * rng.normal() / std::sqrt(double(D)));
        }
        set.inputs.push_back(std::move(x));
        set.labels.push_back(c);
      }
    }
    return set;
  };
  for (std::size_t t = 0; t < T; ++t) {
    suite.train.push_back(draw(t));
    suite.test.push_back(draw(t));
  }
  return suite;
}

}  // namespace neuronlock::synth
