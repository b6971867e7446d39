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

// Synthetic fixtures for tests, benchmarks and demos.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neuronlock/model.hpp"
#include "neuronlock/rng.hpp"
#include "neuronlock/selector.hpp"

namespace neuronlock::synth {

// Stack of `layers` MLP blocks, each d_model -> d_hidden -> d_model, with
// trained-looking weights: float rows ~ N(0, 1/d_model), INT8 codes
// ~ round(N(0, 6^2)) with a matching dequantization scale.
ModelContainer random_model(Dtype dtype, std::uint32_t d_model, std::uint32_t d_hidden,
                            std::uint32_t layers, Rng& rng);

// Multi-task classification fixture with a single MLP block whose output
// slice [t * classes, (t + 1) * classes) holds task t's logits. Each
// (task, class) pair owns `per_class` planted hidden units tuned to its
// prototype; the remaining units are shared and respond to every input.
struct TaskSuiteSpec {
  std::vector<std::string> tasks;
  std::uint32_t classes = 4;
  std::uint32_t d_in = 256;
  std::uint32_t per_class = 8;
  std::uint32_t shared = 1024;
  std::uint32_t samples_per_class = 32;
  double noise = 0.3;
  Dtype dtype = Dtype::kFloat32;
};

struct LabeledSet {
  std::vector<std::vector<float>> inputs;
  std::vector<std::uint32_t> labels;
};

struct TaskSuite {
  TaskSuiteSpec spec;
  ModelContainer model;
  std::vector<LabeledSet> train;  // per task, used for traces
  std::vector<LabeledSet> test;   // per task, disjoint draws

  std::size_t task_index(std::string_view task) const;
  double chance() const { return 1.0 / spec.classes; }
  // Fraction of task t's test inputs whose argmax over the task's logit
  // slice matches the label.
  double accuracy(const ModelContainer& m, std::size_t task) const;
  std::vector<ActivationTrace> traces() const;
};

TaskSuite make_task_suite(const TaskSuiteSpec& spec, Rng& rng);

}  // namespace neuronlock::synth
