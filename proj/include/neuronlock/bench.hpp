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

// Deployment cost benchmark over synthetic models of growing size.
//
// For each size the scenario encrypts a random model for a set of tasks,
// issues one task key, decrypts in both modes, then performs a policy update
// two ways: resealing the subset secrets (the bundle is the only new
// artifact) and the naive alternative of re-encrypting and re-shipping the
// whole model.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neuronlock/dtype.hpp"

namespace neuronlock {

struct BenchScenario {
  Dtype dtype = Dtype::kFloat32;
  std::vector<std::uint32_t> hidden_sizes{256, 2560, 25600};  // per layer
  std::uint32_t d_model = 64;
  std::uint32_t layers = 2;
  std::vector<std::string> tasks{"Code", "Health", "Story"};
  double block_fraction = 0.01;  // neurons per task-combination block
  std::size_t calibration_samples = 1024;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::uint64_t neurons = 0;
  std::size_t model_bytes = 0;
  std::size_t bundle_bytes = 0;
  std::size_t key_map_bytes = 0;
  std::size_t secret_key_bytes = 0;
  std::size_t subsets = 0;
  // Bytes shipped to a deployer.
  std::size_t first_te_bytes = 0;  // model + bundle
  std::size_t first_ce_bytes = 0;  // model + bundle + key map
  std::size_t update_bytes = 0;    // new bundle only
  std::size_t naive_update_bytes = 0;
  // Wall-clock seconds.
  double encrypt_s = 0;
  double keygen_s = 0;
  double te_s = 0;
  double ce_s = 0;
  double update_s = 0;
  double naive_update_s = 0;
  std::uint64_t te_trials = 0;
  std::uint64_t ce_trials = 0;
  bool te_equals_ce = false;
};

std::vector<BenchRow> run_bench(const BenchScenario& scenario);

// Scenario files are JSON objects with any of the BenchScenario field names;
// missing fields keep their defaults. Throws kInvalidArgument.
BenchScenario bench_scenario_from_json(std::string_view text);
std::string bench_json(const BenchScenario& scenario, const std::vector<BenchRow>& rows);

}  // namespace neuronlock
