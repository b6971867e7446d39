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

#include "doctest.h"

#include "neuronlock/bench.hpp"
#include "neuronlock/error.hpp"

using namespace neuronlock;

TEST_CASE("update cost is independent of model size") {
  BenchScenario sc;
  sc.hidden_sizes = {64, 640, 6400};
  sc.calibration_samples = 256;
  const auto rows = run_bench(sc);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CAPTURE(r.neurons);
    CHECK(r.te_equals_ce);
    CHECK(r.naive_update_bytes == r.model_bytes);
    CHECK(r.subsets == 8);
    CHECK(r.update_bytes == rows.front().update_bytes);
    CHECK(r.bundle_bytes == rows.front().bundle_bytes);
    CHECK(r.ce_trials <= r.te_trials);
    CHECK(r.secret_key_bytes == rows.front().secret_key_bytes);
    CHECK(r.first_ce_bytes == r.first_te_bytes + r.key_map_bytes);
  }
  CHECK(rows[2].model_bytes > 50 * rows[0].model_bytes);
  const std::string json = bench_json(sc, rows);
  CHECK(json.find("naive_update") != std::string::npos);
}

TEST_CASE("scenario json") {
  const BenchScenario sc = bench_scenario_from_json(R"({"dtype":"int8","hidden_sizes":[8,16],"seed":9})");
  CHECK(sc.dtype == Dtype::kInt8);
  CHECK(sc.hidden_sizes == std::vector<std::uint32_t>{8, 16});
  CHECK(sc.seed == 9);
  CHECK(sc.d_model == BenchScenario{}.d_model);
  CHECK_THROWS_WITH_AS(bench_scenario_from_json("[1]"), doctest::Contains("InvalidArgument"), Error);
  CHECK_THROWS_WITH_AS(bench_scenario_from_json(R"({"layers":"x"})"), doctest::Contains("InvalidArgument"), Error);
}
