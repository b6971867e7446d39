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

#include "neuronlock/bench.hpp"

#include <algorithm>
#include <chrono>
#include <type_traits>

#include "json.hpp"
#include "neuronlock/pipeline.hpp"
#include "neuronlock/synth.hpp"

namespace neuronlock {
namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Every non-empty combination of tasks gets a block of neurons at the end of
// the index range that all of its tasks rely on. Importance is 1 everywhere
// and 1.8 inside a task's blocks, so with the default selection parameters
// each task selects all of its blocks and the partition has the same
// 2^T - 1 owned subsets (plus the common one) at every model size.
std::vector<ActivationTrace> synthetic_traces(const BenchScenario& sc, std::uint64_t n) {
  const std::size_t T = sc.tasks.size();
  const std::uint64_t combos = (std::uint64_t{1} << T) - 1;
  const std::uint64_t block =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(sc.block_fraction * static_cast<double>(n)));
  NL_ENFORCE(combos * block < n, Errc::kInvalidArgument, "model too small for the bench task structure");
  std::vector<ActivationTrace> out;
  for (std::size_t t = 0; t < T; ++t) {
    ActivationTrace tr{sc.tasks[t], std::vector<double>(n, 1.0), 1};
    for (std::uint64_t c = 1; c <= combos; ++c) {
      if (!(c >> t & 1)) continue;
      const std::uint64_t first = n - c * block;
      for (std::uint64_t i = first; i < first + block; ++i) tr.sums[i] = 1.8;
    }
    out.push_back(std::move(tr));
  }
  return out;
}

std::string attribute_for(const std::string& task) { return "role-" + task; }

}  // namespace

std::vector<BenchRow> run_bench(const BenchScenario& sc) {
  NL_ENFORCE(!sc.tasks.empty() && !sc.hidden_sizes.empty(), Errc::kInvalidArgument, "empty bench scenario");
  Rng rng(sc.seed);
  const Authority authority = new_authority(rng);
  std::string policy_text, updated_text;
  for (const auto& t : sc.tasks) {
    policy_text += t + " := " + attribute_for(t) + "\n";
    updated_text += t + " := and(" + attribute_for(t) + ",licensed)\n";
  }
  const TaskPolicies policies = parse_policy_file(policy_text);
  const TaskPolicies updated = parse_policy_file(updated_text);

  std::vector<BenchRow> rows;
  for (std::uint32_t hidden : sc.hidden_sizes) {
    EncryptInputs in;
    in.model = synth::random_model(sc.dtype, sc.d_model, hidden, sc.layers, rng);
    in.traces = synthetic_traces(sc, in.model.neuron_count());
    in.policies = policies;
    in.calibration_samples = sc.calibration_samples;
    in.authority = authority;
    const EncryptOutputs enc = encrypt_pipeline(in, rng);

    BenchRow row;
    row.neurons = enc.encrypted.neuron_count();
    row.model_bytes = write_container(enc.encrypted).size();
    row.bundle_bytes = write_bundle(enc.bundle).size();
    row.key_map_bytes = write_kmap(enc.key_map).size();
    row.subsets = enc.partition.subsets.size();
    row.first_te_bytes = row.model_bytes + row.bundle_bytes;
    row.first_ce_bytes = row.first_te_bytes + row.key_map_bytes;
    row.encrypt_s = enc.seconds;

    auto t = Clock::now();
    const abe::SecretKey sk = abe::keygen(authority.pk, authority.msk, {attribute_for(sc.tasks.front())}, rng);
    row.keygen_s = since(t);
    row.secret_key_bytes = abe::write_secret_key(sk).size();

    t = Clock::now();
    const DecryptOutputs te = decrypt_pipeline(enc.encrypted, enc.bundle, sk, {});
    row.te_s = since(t);
    t = Clock::now();
    const DecryptOutputs ce =
        decrypt_pipeline(enc.encrypted, enc.bundle, sk, {DecryptMode::kComputationEfficient, enc.key_map, {}});
    row.ce_s = since(t);
    row.te_trials = te.report.trials;
    row.ce_trials = ce.report.trials;
    row.te_equals_ce = write_container(te.model) == write_container(ce.model);

    t = Clock::now();
    const SealedBundle resealed =
        reseal_subset_keys(authority.pk, enc.partition, build_policies(enc.partition, updated), enc.bundle.model_nonce,
                           enc.bundle.thresholds, enc.subset_secrets, rng);
    row.update_bytes = write_bundle(resealed.bundle).size();
    row.update_s = since(t);

    // Naive update: fresh keys, whole model re-encrypted and shipped again.
    t = Clock::now();
    std::map<std::uint32_t, AesKey> fresh;
    for (const auto& [id, key] : enc.subset_keys) {
      AesKey k;
      rng.fill(k);
      fresh[id] = k;
    }
    const EncryptedModel naive = encrypt_model(in.model, enc.partition, fresh, rng.next_u64());
    row.naive_update_bytes = write_container(naive.model).size();
    row.naive_update_s = since(t);
    rows.push_back(row);
  }
  return rows;
}

BenchScenario bench_scenario_from_json(std::string_view text) {
  BenchScenario sc;
  try {
    const Json j = Json::parse(text);
    NL_ENFORCE(j.is_object(), Errc::kInvalidArgument, "bench scenario must be a JSON object");
    auto count = [&](const char* key, auto& field) {
      if (!j.contains(key)) return;
      NL_ENFORCE(j.at(key).is_number_unsigned(), Errc::kInvalidArgument, std::string(key) + " must be a count");
      field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    if (j.contains("dtype")) sc.dtype = parse_dtype(j.at("dtype").get<std::string>());
    if (j.contains("hidden_sizes")) {
      sc.hidden_sizes.clear();
      for (const auto& v : j.at("hidden_sizes")) {
        NL_ENFORCE(v.is_number_unsigned(), Errc::kInvalidArgument, "hidden_sizes must hold counts");
        sc.hidden_sizes.push_back(v.get<std::uint32_t>());
      }
    }
    count("d_model", sc.d_model);
    count("layers", sc.layers);
    count("calibration_samples", sc.calibration_samples);
    count("seed", sc.seed);
    if (j.contains("tasks")) sc.tasks = j.at("tasks").get<std::vector<std::string>>();
    if (j.contains("block_fraction")) sc.block_fraction = j.at("block_fraction").get<double>();
  } catch (const Json::exception& e) {
    throw Error(Errc::kInvalidArgument, std::string("bench scenario: ") + e.what());
  }
  NL_ENFORCE(sc.block_fraction > 0 && sc.block_fraction < 1, Errc::kInvalidArgument, "block_fraction must be in (0, 1)");
  NL_ENFORCE(!sc.tasks.empty() && sc.tasks.size() <= 8, Errc::kInvalidArgument, "bench needs 1 to 8 tasks");
  NL_ENFORCE(sc.layers >= 1 && sc.layers <= 64, Errc::kInvalidArgument, "layers must be in [1, 64]");
  NL_ENFORCE(sc.d_model >= 1 && sc.d_model <= 65536, Errc::kInvalidArgument, "d_model must be in [1, 65536]");
  NL_ENFORCE(!sc.hidden_sizes.empty(), Errc::kInvalidArgument, "hidden_sizes is empty");
  for (auto h : sc.hidden_sizes) NL_ENFORCE(h >= 1 && h <= (1u << 24), Errc::kInvalidArgument, "hidden size out of range");
  NL_ENFORCE(sc.calibration_samples >= 1, Errc::kInvalidArgument, "calibration_samples must be positive");
  return sc;
}

std::string bench_json(const BenchScenario& sc, const std::vector<BenchRow>& rows) {
  Json j;
  j["dtype"] = std::string(dtype_name(sc.dtype));
  j["d_model"] = sc.d_model;
  j["layers"] = sc.layers;
  j["tasks"] = sc.tasks;
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"neurons", r.neurons},
                   {"subsets", r.subsets},
                   {"bytes",
                    {{"model", r.model_bytes},
                     {"bundle", r.bundle_bytes},
                     {"key_map", r.key_map_bytes},
                     {"secret_key", r.secret_key_bytes},
                     {"first_deployment_te", r.first_te_bytes},
                     {"first_deployment_ce", r.first_ce_bytes},
                     {"update", r.update_bytes},
                     {"naive_update", r.naive_update_bytes}}},
                   {"seconds",
                    {{"encrypt", r.encrypt_s},
                     {"keygen", r.keygen_s},
                     {"decrypt_te", r.te_s},
                     {"decrypt_ce", r.ce_s},
                     {"update", r.update_s},
                     {"naive_update", r.naive_update_s}}},
                   {"trials", {{"te", r.te_trials}, {"ce", r.ce_trials}}},
                   {"te_equals_ce", r.te_equals_ce}});
  }
  j["rows"] = out;
  return j.dump(2) + "\n";
}

}  // namespace neuronlock
