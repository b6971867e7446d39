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

#include "neuronlock/selector.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <set>

#include "json.hpp"

namespace neuronlock {

Bytes write_trace(const ActivationTrace& trace) {
  ByteWriter w;
  w.raw(std::string_view(kTraceMagic, sizeof(kTraceMagic)));
  w.str(trace.task);
  w.u64(trace.sums.size());
  for (double s : trace.sums) w.f64(s);
  w.u64(trace.count);
  return w.take();
}

ActivationTrace read_trace(std::span<const std::uint8_t> bytes) {
  NL_ENFORCE(bytes.size() >= sizeof(kTraceMagic) &&
                 std::memcmp(bytes.data(), kTraceMagic, sizeof(kTraceMagic)) == 0,
             Errc::kBadMagic, "not an SNTRACE1 file");
  ByteReader r(bytes, Errc::kTruncatedTensor, "trace");
  r.raw(sizeof(kTraceMagic));
  ActivationTrace t;
  t.task = r.str();
  const std::uint64_t n = r.u64();
  NL_ENFORCE(n <= r.remaining() / 8, Errc::kTruncatedTensor, "trace sums truncated");
  t.sums.resize(n);
  for (auto& s : t.sums) s = r.f64();
  t.count = r.u64();
  NL_ENFORCE(r.done(), Errc::kTruncatedTensor, "trailing bytes after trace");
  return t;
}

ActivationTrace load_trace(const std::filesystem::path& path) {
  Bytes data = read_file(path);
  return read_trace(data);
}

void save_trace(const std::filesystem::path& path, const ActivationTrace& trace) {
  write_file_atomic(path, write_trace(trace));
}

ActivationTrace accumulate_trace(const ModelContainer& model, std::string task,
                                 std::span<const std::vector<float>> inputs) {
  ActivationTrace t;
  t.task = std::move(task);
  t.sums.assign(model.neuron_count(), 0.0);
  for (const auto& x : inputs) {
    auto res = forward(model, x, /*capture=*/true);
    for (std::size_t n = 0; n < t.sums.size(); ++n) t.sums[n] += res.activations[n];
  }
  t.count = inputs.size();
  return t;
}

std::size_t ImportanceMatrix::row_of(std::string_view task) const {
  auto it = std::find(tasks.begin(), tasks.end(), task);
  NL_ENFORCE(it != tasks.end(), Errc::kUnknownTask, "task '" + std::string(task) + "'");
  return static_cast<std::size_t>(it - tasks.begin());
}

ImportanceMatrix compute_importance(std::span<const ActivationTrace> traces) {
  ImportanceMatrix m;
  std::set<std::string> seen;
  for (const auto& t : traces) {
    NL_ENFORCE(seen.insert(t.task).second, Errc::kDuplicateTask, "task '" + t.task + "'");
    NL_ENFORCE(traces.front().sums.size() == t.sums.size(), Errc::kMismatchedNeuronCount,
               "trace '" + t.task + "' has " + std::to_string(t.sums.size()) + " neurons, expected " +
                   std::to_string(traces.front().sums.size()));
    NL_ENFORCE(t.count > 0, Errc::kInvalidArgument, "trace '" + t.task + "' has zero samples");
    std::vector<double> row(t.sums.size());
    for (std::size_t n = 0; n < row.size(); ++n) {
      NL_ENFORCE(t.sums[n] >= 0.0, Errc::kInvalidArgument, "negative activation sum");
      row[n] = t.sums[n] / static_cast<double>(t.count);
    }
    m.tasks.push_back(t.task);
    m.values.push_back(std::move(row));
  }
  return m;
}

std::vector<double> task_specific_scores(const ImportanceMatrix& importance, std::string_view task,
                                         double lambda) {
  NL_ENFORCE(lambda >= 0.0, Errc::kInvalidArgument, "lambda must be non-negative");
  const std::size_t row = importance.row_of(task);
  const std::size_t n_neurons = importance.neuron_count();
  std::vector<double> scores(n_neurons);
  for (std::size_t n = 0; n < n_neurons; ++n) {
    double other = 0.0;
    for (std::size_t t = 0; t < importance.tasks.size(); ++t) {
      if (t != row) other = std::max(other, importance.values[t][n]);
    }
    scores[n] = importance.values[row][n] - lambda * other;
  }
  return scores;
}

TaskSelection select_neurons(std::span<const double> scores, double tau) {
  NL_ENFORCE(tau > 0.0 && tau < 1.0, Errc::kInvalidArgument, "tau must lie in (0, 1)");
  TaskSelection sel;
  sel.tau = tau;
  if (scores.empty()) throw Error(Errc::kAllZeroScores, "no neurons to select from");

  const double shift = std::min(0.0, *std::min_element(scores.begin(), scores.end()));
  std::vector<double> mass(scores.size());
  double total = 0.0;
  for (std::size_t n = 0; n < scores.size(); ++n) {
    mass[n] = scores[n] - shift;
    total += mass[n];
  }
  NL_ENFORCE(total > 0.0, Errc::kAllZeroScores, "all task-specific scores are zero");
  for (auto& v : mass) v /= total;

  std::vector<std::uint64_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return mass[a] > mass[b]; });

  for (std::uint64_t n : order) {
    if (!(sel.cumulative + mass[n] < tau)) break;
    sel.cumulative += mass[n];
    sel.neurons.push_back(n);
    sel.mass.push_back(mass[n]);
  }
  return sel;
}

SelectionResult select_all(const ImportanceMatrix& importance,
                           const std::map<std::string, SelectionParams>& per_task,
                           SelectionParams defaults) {
  for (const auto& [task, _] : per_task) importance.row_of(task);
  SelectionResult res;
  res.total_neurons = importance.neuron_count();
  for (const auto& task : importance.tasks) {
    auto it = per_task.find(task);
    const SelectionParams p = it == per_task.end() ? defaults : it->second;
    auto scores = task_specific_scores(importance, task, p.lambda);
    TaskSelection sel = select_neurons(scores, p.tau);
    sel.lambda = p.lambda;
    res.sets.emplace(task, std::move(sel));
  }
  return res;
}

std::string selection_report_json(const SelectionResult& result) {
  nlohmann::ordered_json doc;
  doc["total_neurons"] = result.total_neurons;
  auto& tasks = doc["tasks"];
  tasks = nlohmann::ordered_json::object();
  for (const auto& [task, sel] : result.sets) {
    nlohmann::ordered_json t;
    t["lambda"] = sel.lambda;
    t["tau"] = sel.tau;
    t["selected"] = sel.neurons.size();
    t["cumulative_mass"] = sel.cumulative;
    t["indices"] = sel.neurons;
    t["scores"] = sel.mass;
    tasks[task] = std::move(t);
  }
  return doc.dump(2) + "\n";
}

std::vector<std::uint64_t> importance_order(const ImportanceMatrix& importance, std::string_view task) {
  const auto& row = importance.values[importance.row_of(task)];
  std::vector<std::uint64_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return row[a] > row[b]; });
  return order;
}

std::vector<std::uint64_t> estimate_critical_set(const ModelContainer& model, const AccuracyFn& eval,
                                                 double delta, std::span<const std::uint64_t> order,
                                                 CriticalSetOptions options) {
  NL_ENFORCE(delta >= 0.0 && delta < 1.0, Errc::kInvalidArgument, "delta must lie in [0, 1)");
  for (auto n : order) {
    NL_ENFORCE(n < model.neuron_count(), Errc::kIndexOutOfRange, "neuron " + std::to_string(n));
  }
  ModelContainer work = model;
  std::vector<bool> mask(model.neuron_count(), false);
  std::size_t applied = 0;
  auto accuracy_at = [&](std::size_t k) {
    // The mask is moved incrementally in either direction.
    while (applied < k) mask[order[applied++]] = true;
    while (applied > k) mask[order[--applied]] = false;
    work.set_prune_mask(mask);
    return eval(work);
  };

  if (accuracy_at(0) < delta) return {};

  const std::size_t batch =
      options.batch ? options.batch
                    : std::max<std::size_t>(1, static_cast<std::size_t>(model.neuron_count() / 256));
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (;;) {
    NL_ENFORCE(lo < order.size(), Errc::kThresholdUnreachable,
               "accuracy stays at or above " + std::to_string(delta) + " with " +
                   std::to_string(order.size()) + " neurons pruned");
    hi = std::min(lo + batch, order.size());
    if (accuracy_at(hi) < delta) break;
    lo = hi;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (accuracy_at(mid) < delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(hi)};
}

bool capacity_check(std::span<const std::size_t> critical_sizes, std::uint64_t total_neurons) {
  std::uint64_t sum = 0;
  for (auto s : critical_sizes) sum += s;
  return sum <= total_neurons;
}

}  // namespace neuronlock
