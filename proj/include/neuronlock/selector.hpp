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

// Task-specific neuron selection.
//
// Importance of neuron n for task t is the mean |activation| over the task's
// samples. The task-specific score subtracts lambda times the largest
// importance the neuron has for any other task. Selection walks neurons in
// descending normalized score and stops before the cumulative mass would
// reach tau.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuronlock/bytes.hpp"
#include "neuronlock/model.hpp"

namespace neuronlock {

inline constexpr char kTraceMagic[8] = {'S', 'N', 'T', 'R', 'A', 'C', 'E', '1'};

struct ActivationTrace {
  std::string task;
  std::vector<double> sums;  // accumulated |activation| per global neuron
  std::uint64_t count = 0;   // samples accumulated
};

// `.trace`: magic | task name (u32 len + bytes) | neuron count u64 |
// sums f64[count] | sample count u64.
Bytes write_trace(const ActivationTrace& trace);
ActivationTrace read_trace(std::span<const std::uint8_t> bytes);
ActivationTrace load_trace(const std::filesystem::path& path);
void save_trace(const std::filesystem::path& path, const ActivationTrace& trace);

// Runs forward with capture over `inputs` (each of width d_in) and sums the
// captured activations.
ActivationTrace accumulate_trace(const ModelContainer& model, std::string task,
                                 std::span<const std::vector<float>> inputs);

struct ImportanceMatrix {
  std::vector<std::string> tasks;
  std::vector<std::vector<double>> values;  // tasks x neurons

  std::size_t neuron_count() const { return values.empty() ? 0 : values.front().size(); }
  // Throws kUnknownTask.
  std::size_t row_of(std::string_view task) const;
};

// Throws kMismatchedNeuronCount, kDuplicateTask, kInvalidArgument (zero count
// or negative sums).
ImportanceMatrix compute_importance(std::span<const ActivationTrace> traces);

// S(t, n) = I(t, n) - lambda * max_{t' != t} I(t', n); the max over no other
// tasks is 0.
std::vector<double> task_specific_scores(const ImportanceMatrix& importance, std::string_view task,
                                         double lambda);

struct TaskSelection {
  double lambda = 0.5;
  double tau = 0.15;
  std::vector<std::uint64_t> neurons;  // descending score, ties by ascending index
  std::vector<double> mass;            // normalized score of each selected neuron
  double cumulative = 0.0;             // sum of `mass`
};

// Shifts scores by -min(score, 0), normalizes them to unit mass, and selects
// greedily while cumulative + next < tau. Throws kAllZeroScores and
// kInvalidArgument for tau outside (0, 1).
TaskSelection select_neurons(std::span<const double> scores, double tau);

struct SelectionParams {
  double lambda = 0.5;
  double tau = 0.15;
};

struct SelectionResult {
  std::uint64_t total_neurons = 0;
  std::map<std::string, TaskSelection> sets;
};

// Runs scoring and selection for every task of `importance`. Tasks missing
// from `per_task` use `defaults`.
SelectionResult select_all(const ImportanceMatrix& importance,
                           const std::map<std::string, SelectionParams>& per_task,
                           SelectionParams defaults = {});

std::string selection_report_json(const SelectionResult& result);

// Neuron indices ordered by descending I(t, .), ties by ascending index.
std::vector<std::uint64_t> importance_order(const ImportanceMatrix& importance, std::string_view task);

using AccuracyFn = std::function<double(const ModelContainer&)>;

struct CriticalSetOptions {
  // 0 selects max(1, N / 256).
  std::size_t batch = 0;
};

// Greedy estimate of the minimal critical set: prunes `order` prefixes in
// batches until accuracy drops below delta, then binary-searches the last
// batch for the shortest such prefix. Throws kThresholdUnreachable.
std::vector<std::uint64_t> estimate_critical_set(const ModelContainer& model, const AccuracyFn& eval,
                                                 double delta, std::span<const std::uint64_t> order,
                                                 CriticalSetOptions options = {});

// Necessary condition only: sum |C_t| <= N.
bool capacity_check(std::span<const std::size_t> critical_sizes, std::uint64_t total_neurons);

}  // namespace neuronlock
