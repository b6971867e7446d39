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

// extern "C" surface over the C++ core. Exceptions never cross this boundary.

#include "neuronlock/neuronlock.h"

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "json.hpp"
#include "neuronlock/bench.hpp"
#include "neuronlock/pipeline.hpp"
#include "neuronlock/synth.hpp"

struct nl_model {
  neuronlock::ModelContainer m;
};

namespace {

namespace nl = neuronlock;
using Json = nlohmann::ordered_json;

thread_local std::string g_last_error;

char* dup(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void hand_out(char** dst, std::string_view s) {
  if (dst) *dst = dup(s);
}

std::string str(const char* s, const char* what) {
  NL_ENFORCE(s != nullptr, nl::Errc::kInvalidArgument, std::string(what) + " is required");
  return s;
}

template <typename F>
nl_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return NL_OK;
  } catch (const nl::Error& e) {
    g_last_error = e.what();
    return static_cast<nl_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
  } catch (...) {
    g_last_error = "Internal: unknown exception";
  }
  return NL_INTERNAL;
}

nl::Dtype to_dtype(nl_dtype d) {
  switch (d) {
    case NL_FLOAT32: return nl::Dtype::kFloat32;
    case NL_FLOAT16: return nl::Dtype::kFloat16;
    case NL_INT8: return nl::Dtype::kInt8;
  }
  throw nl::Error(nl::Errc::kUnknownDtype, "dtype tag " + std::to_string(static_cast<int>(d)));
}

nl::Rng rng_from(const std::uint64_t* seed) { return seed ? nl::Rng(*seed) : nl::Rng::from_entropy(); }

}  // namespace

extern "C" {

const char* nl_version(void) { return "0.1.0"; }

const char* nl_status_name(nl_status status) {
  if (status == NL_OK) return "Ok";
  if (status == NL_INTERNAL) return "Internal";
  if (status < NL_BAD_MAGIC || status > NL_CRYPTO) return "Unknown";
  return nl::errc_name(static_cast<nl::Errc>(status)).data();
}

const char* nl_last_error(void) { return g_last_error.c_str(); }

void nl_string_free(char* s) { std::free(s); }

nl_status nl_model_load(const char* path, nl_model** out) {
  return guard([&] {
    NL_ENFORCE(out != nullptr, nl::Errc::kInvalidArgument, "out handle is required");
    *out = nullptr;
    auto* h = new nl_model{nl::load_container(str(path, "path"))};
    *out = h;
  });
}

nl_status nl_model_save(const nl_model* model, const char* path) {
  return guard([&] {
    NL_ENFORCE(model != nullptr, nl::Errc::kInvalidArgument, "model handle is required");
    nl::save_container(str(path, "path"), model->m);
  });
}

void nl_model_free(nl_model* model) { delete model; }

nl_status nl_model_info_get(const nl_model* model, nl_model_info* out) {
  return guard([&] {
    NL_ENFORCE(model != nullptr && out != nullptr, nl::Errc::kInvalidArgument, "null argument");
    const nl::ModelContainer& m = model->m;
    out->dtype = static_cast<nl_dtype>(m.dtype());
    out->layers = static_cast<std::uint32_t>(m.layers().size());
    out->neurons = m.neuron_count();
    out->d_in = m.layers().front().d_in;
    out->d_out = m.head() ? m.head()->d_out : m.layers().back().d_out;
    out->encrypted = m.encrypted() ? 1 : 0;
    out->nonce = m.encrypted() ? m.nonce() : 0;
    out->mlp_bytes = m.mlp_bytes();
  });
}

nl_status nl_model_forward(const nl_model* model, const float* x, size_t x_len, float* out, size_t out_cap,
                           size_t* out_len) {
  return guard([&] {
    NL_ENFORCE(model != nullptr && (x != nullptr || x_len == 0), nl::Errc::kInvalidArgument, "null argument");
    NL_ENFORCE(out != nullptr || out_cap == 0, nl::Errc::kInvalidArgument, "null output buffer");
    const auto y = nl::forward(model->m, std::span<const float>(x, x_len)).output;
    std::memcpy(out, y.data(), std::min(out_cap, y.size()) * sizeof(float));
    if (out_len) *out_len = y.size();
  });
}

nl_status nl_trace(const nl_model* model, const char* task, const float* x, size_t rows, const char* out_path) {
  return guard([&] {
    NL_ENFORCE(model != nullptr && (x != nullptr || rows == 0), nl::Errc::kInvalidArgument, "null argument");
    const std::size_t width = model->m.layers().front().d_in;
    std::vector<std::vector<float>> inputs(rows);
    for (std::size_t r = 0; r < rows; ++r) inputs[r].assign(x + r * width, x + (r + 1) * width);
    nl::save_trace(str(out_path, "out_path"), nl::accumulate_trace(model->m, str(task, "task"), inputs));
  });
}

nl_status nl_encrypt(const nl_encrypt_options* opts, char** summary) {
  return guard([&] {
    NL_ENFORCE(opts != nullptr, nl::Errc::kInvalidArgument, "options are required");
    nl::EncryptJob job;
    job.model = str(opts->model, "model");
    NL_ENFORCE(opts->traces != nullptr || opts->trace_count == 0, nl::Errc::kInvalidArgument, "null trace list");
    for (std::size_t i = 0; i < opts->trace_count; ++i) job.traces.emplace_back(str(opts->traces[i], "trace path"));
    job.policy_file = str(opts->policy_file, "policy_file");
    job.out_prefix = str(opts->out_prefix, "out_prefix");
    if (opts->master_key) job.master_key = opts->master_key;
    if (opts->lambda > 0) job.defaults.lambda = opts->lambda;
    if (opts->tau > 0) job.defaults.tau = opts->tau;
    for (std::size_t i = 0; i < opts->task_param_count; ++i) {
      const nl_task_params& p = opts->task_params[i];
      job.params[str(p.task, "task")] = {p.lambda > 0 ? p.lambda : job.defaults.lambda,
                                         p.tau > 0 ? p.tau : job.defaults.tau};
    }
    if (opts->calibration_samples) job.calibration_samples = opts->calibration_samples;
    if (opts->seed) job.seed = *opts->seed;
    hand_out(summary, nl::run_encrypt_job(job));
  });
}

nl_status nl_keygen(const char* master_key, const char* const* attributes, size_t attribute_count,
                    const char* out_path, const uint64_t* seed, char** summary) {
  return guard([&] {
    NL_ENFORCE(attributes != nullptr || attribute_count == 0, nl::Errc::kInvalidArgument, "null attribute list");
    nl::AttributeSet attrs;
    for (std::size_t i = 0; i < attribute_count; ++i) attrs.insert(str(attributes[i], "attribute"));
    std::optional<std::uint64_t> s;
    if (seed) s = *seed;
    const nl::KeygenResult r = nl::run_keygen(str(master_key, "master_key"), attrs, str(out_path, "out_path"), s);
    Json j;
    j["path"] = out_path;
    j["attributes"] = r.attributes;
    j["bytes"] = r.bytes;
    j["seconds"] = r.seconds;
    hand_out(summary, j.dump(2) + "\n");
  });
}

nl_status nl_calibrate(const char* model, size_t samples, const uint64_t* seed, const char* out_path, char** report) {
  return guard([&] {
    const nl::ModelContainer m = nl::load_container(str(model, "model"));
    nl::Rng rng = rng_from(seed);
    const std::string json = nl::calibration_json(nl::calibrate_thresholds(m, samples ? samples : 4096, rng));
    if (out_path) nl::write_file_atomic(out_path, json);
    hand_out(report, json);
  });
}

nl_status nl_decrypt(const nl_decrypt_options* opts, nl_decrypt_result* result, char** report) {
  return guard([&] {
    NL_ENFORCE(opts != nullptr, nl::Errc::kInvalidArgument, "options are required");
    nl::DecryptJob job;
    job.model = str(opts->model, "model");
    job.bundle = str(opts->bundle, "bundle");
    job.secret_key = str(opts->secret_key, "secret_key");
    job.out = str(opts->out, "out");
    switch (opts->mode) {
      case NL_MODE_TRANSMISSION_EFFICIENT: job.mode = nl::DecryptMode::kTransmissionEfficient; break;
      case NL_MODE_COMPUTATION_EFFICIENT: job.mode = nl::DecryptMode::kComputationEfficient; break;
      default: throw nl::Error(nl::Errc::kInvalidArgument, "unknown decrypt mode");
    }
    if (opts->key_map) job.key_map = opts->key_map;
    if (opts->thresholds) job.thresholds = opts->thresholds;
    if (opts->report) job.report = opts->report;
    const nl::DecryptReport r = nl::run_decrypt(job);
    if (result) {
      result->status = static_cast<nl_decrypt_status>(r.status);
      result->total_neurons = r.total_neurons;
      result->decrypted = r.decrypted;
      result->pruned = r.pruned;
      result->trials = r.trials;
      result->detection_mismatches = r.detection_mismatches;
      result->keys = r.keys;
      result->seconds = r.seconds;
    }
    hand_out(report, nl::decrypt_report_json(r));
  });
}

nl_status nl_inspect(const char* path, char** json) {
  return guard([&] { hand_out(json, nl::inspect_file(str(path, "path"))); });
}

nl_status nl_bench(const char* scenario_json, char** json) {
  return guard([&] {
    const nl::BenchScenario sc = scenario_json ? nl::bench_scenario_from_json(scenario_json) : nl::BenchScenario{};
    hand_out(json, nl::bench_json(sc, nl::run_bench(sc)));
  });
}

nl_status nl_synth_suite(const char* out_dir, nl_dtype dtype, const char* const* tasks, size_t task_count,
                         uint64_t seed, char** summary) {
  return guard([&] {
    NL_ENFORCE(tasks != nullptr && task_count > 0, nl::Errc::kInvalidArgument, "at least one task is required");
    const std::filesystem::path dir = str(out_dir, "out_dir");
    std::filesystem::create_directories(dir);
    nl::synth::TaskSuiteSpec spec;
    for (std::size_t i = 0; i < task_count; ++i) spec.tasks.push_back(str(tasks[i], "task"));
    spec.dtype = to_dtype(dtype);
    nl::Rng rng(seed);
    const nl::synth::TaskSuite suite = nl::synth::make_task_suite(spec, rng);
    nl::save_container(dir / "model.snm", suite.model);
    std::string policies;
    Json j;
    j["model"] = (dir / "model.snm").string();
    Json traces = Json::array();
    Json accuracy = Json::object();
    for (const auto& t : suite.traces()) {
      const auto path = dir / (t.task + ".trace");
      nl::save_trace(path, t);
      traces.push_back(path.string());
      std::string attr = t.task;
      for (auto& c : attr) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      policies += t.task + " := " + attr + "\n";
      accuracy[t.task] = suite.accuracy(suite.model, suite.task_index(t.task));
    }
    nl::write_file_atomic(dir / "policies.txt", policies);
    j["traces"] = traces;
    j["policies"] = (dir / "policies.txt").string();
    j["neurons"] = suite.model.neuron_count();
    j["accuracy"] = accuracy;
    hand_out(summary, j.dump(2) + "\n");
  });
}

}  // extern "C"
