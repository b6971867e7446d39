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

// Command-line front end. Talks to the library only through the C API.
//
// Exit codes: 0 success (full decryption), 2 partial decryption, 3 nothing
// decrypted, 4 any error.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neuronlock/neuronlock.h"

namespace {

constexpr int kExitError = 4;

int fail() {
  std::cerr << "error: " << nl_last_error() << "\n";
  return kExitError;
}

// Prints and frees a string handed out by the library.
void emit(char* s, const std::string& out_path = {}) {
  if (!s) return;
  if (out_path.empty()) {
    std::fputs(s, stdout);
  } else {
    std::ofstream(out_path, std::ios::binary) << s;
  }
  nl_string_free(s);
}

std::vector<const char*> c_strs(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

const std::map<std::string, nl_dtype> kDtypes{
    {"float32", NL_FLOAT32}, {"f32", NL_FLOAT32}, {"float16", NL_FLOAT16},
    {"f16", NL_FLOAT16},     {"int8", NL_INT8},   {"i8", NL_INT8}};

// "task:lambda:tau"; either number may be left empty for the default.
std::optional<nl_task_params> parse_task_param(const std::string& spec, std::string& task_storage) {
  const auto a = spec.find(':');
  if (a == std::string::npos || a == 0) return std::nullopt;
  const auto b = spec.find(':', a + 1);
  if (b == std::string::npos) return std::nullopt;
  task_storage = spec.substr(0, a);
  nl_task_params p{nullptr, 0, 0};
  try {
    const std::string l = spec.substr(a + 1, b - a - 1), t = spec.substr(b + 1);
    if (!l.empty()) p.lambda = std::stod(l);
    if (!t.empty()) p.tau = std::stod(t);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective neuron encryption for multi-task model deployment"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nl_version()));

  // synth
  auto* synth = app.add_subcommand("synth", "Write a planted multi-task demo model, traces and policies");
  std::string synth_out;
  std::string synth_dtype = "float32";
  std::vector<std::string> synth_tasks{"Code", "Health", "Story"};
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--dtype", synth_dtype, "float32 | float16 | int8")
      ->check(CLI::IsMember({"float32", "f32", "float16", "f16", "int8", "i8"}));
  synth->add_option("--tasks", synth_tasks, "Task names")->delimiter(',');
  synth->add_option("--seed", synth_seed, "RNG seed");

  // trace
  auto* trace = app.add_subcommand("trace", "Accumulate a task activation trace from raw float32 inputs");
  std::string trace_model, trace_task, trace_inputs, trace_out;
  trace->add_option("--model", trace_model, "Plaintext model (.snm)")->required()->check(CLI::ExistingFile);
  trace->add_option("--task", trace_task, "Task name")->required();
  trace->add_option("--inputs", trace_inputs, "Little-endian float32 rows of width d_in")
      ->required()
      ->check(CLI::ExistingFile);
  trace->add_option("--out", trace_out, "Output .trace")->required();

  // encrypt
  auto* enc = app.add_subcommand("encrypt", "Select, partition and encrypt a model for per-task access");
  std::string enc_model, enc_policies, enc_out, enc_msk;
  std::vector<std::string> enc_traces, enc_task_params;
  double enc_lambda = 0, enc_tau = 0;
  std::size_t enc_samples = 0;
  std::optional<std::uint64_t> enc_seed;
  enc->add_option("--model", enc_model, "Plaintext model (.snm)")->required()->check(CLI::ExistingFile);
  enc->add_option("--trace", enc_traces, "Task trace (.trace), repeatable")->required()->check(CLI::ExistingFile);
  enc->add_option("--policies", enc_policies, "Policy file: one 'Task := policy' per line")
      ->required()
      ->check(CLI::ExistingFile);
  enc->add_option("--out", enc_out, "Output prefix for .snm/.abk/.kmap/.thr/.msk")->required();
  enc->add_option("--master-key", enc_msk, "Reuse an existing authority (.msk)")->check(CLI::ExistingFile);
  enc->add_option("--lambda", enc_lambda, "Specificity weight (default 0.5)")->check(CLI::PositiveNumber);
  enc->add_option("--tau", enc_tau, "Selected importance mass (default 0.15)")->check(CLI::PositiveNumber);
  enc->add_option("--task-param", enc_task_params, "Per-task override task:lambda:tau, repeatable");
  enc->add_option("--calibration-samples", enc_samples, "Wrong-key rows sampled for calibration");
  enc->add_option("--seed", enc_seed, "Deterministic RNG seed (tests only)");

  // keygen
  auto* kg = app.add_subcommand("keygen", "Issue an attribute key");
  std::string kg_msk, kg_out;
  std::vector<std::string> kg_attrs;
  std::optional<std::uint64_t> kg_seed;
  kg->add_option("--master-key", kg_msk, "Master key (.msk)")->required();
  kg->add_option("--attr", kg_attrs, "Attribute, repeatable or comma separated")->delimiter(',');
  kg->add_option("--out", kg_out, "Output key (.ask)")->required();
  kg->add_option("--seed", kg_seed, "Deterministic RNG seed (tests only)");

  // decrypt
  auto* dec = app.add_subcommand("decrypt", "Recover authorized neurons and prune the rest");
  std::string dec_model, dec_bundle, dec_key, dec_out, dec_mode = "te", dec_kmap, dec_thr, dec_report;
  dec->add_option("--model", dec_model, "Encrypted model (.snm)")->required();
  dec->add_option("--bundle", dec_bundle, "Key bundle (.abk)")->required();
  dec->add_option("--key", dec_key, "Attribute key (.ask)")->required();
  dec->add_option("--out", dec_out, "Output model (.snm)")->required();
  dec->add_option("--mode", dec_mode, "te (trial decryption) | ce (key map)")->check(CLI::IsMember({"te", "ce"}));
  dec->add_option("--kmap", dec_kmap, "Neuron-to-subset map (.kmap), required for ce");
  dec->add_option("--thresholds", dec_thr, "Detection threshold override (JSON)");
  dec->add_option("--report", dec_report, "Write the JSON report here as well");

  // inspect
  auto* insp = app.add_subcommand("inspect", "Describe any artifact");
  std::string insp_path;
  insp->add_option("path", insp_path, "Artifact path")->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Measure detection thresholds on a plaintext model");
  std::string cal_model, cal_out;
  std::size_t cal_samples = 4096;
  std::optional<std::uint64_t> cal_seed;
  cal->add_option("--model", cal_model, "Plaintext model (.snm)")->required();
  cal->add_option("--samples", cal_samples, "Wrong-key rows to sample");
  cal->add_option("--out", cal_out, "Write the report here");
  cal->add_option("--seed", cal_seed, "Deterministic RNG seed");

  // bench
  auto* bench = app.add_subcommand("bench", "Deployment and update cost across model sizes");
  std::string bench_scenario, bench_out;
  bench->add_option("--scenario", bench_scenario, "Scenario JSON")->check(CLI::ExistingFile);
  bench->add_option("--out", bench_out, "Write results here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  char* json = nullptr;
  nl_status s = NL_OK;

  if (*synth) {
    const auto tasks = c_strs(synth_tasks);
    s = nl_synth_suite(synth_out.c_str(), kDtypes.at(synth_dtype), tasks.data(), tasks.size(), synth_seed, &json);
    if (s != NL_OK) return fail();
    emit(json);
    return 0;
  }

  if (*trace) {
    nl_model* m = nullptr;
    if ((s = nl_model_load(trace_model.c_str(), &m)) != NL_OK) return fail();
    nl_model_info info{};
    nl_model_info_get(m, &info);
    std::ifstream in(trace_inputs, std::ios::binary);
    const std::vector<char> raw{std::istreambuf_iterator<char>(in), {}};
    const std::size_t row_bytes = std::size_t{info.d_in} * sizeof(float);
    if (raw.empty() || raw.size() % row_bytes != 0) {
      nl_model_free(m);
      std::cerr << "error: " << trace_inputs << " is not a whole number of float32 rows of width " << info.d_in
                << "\n";
      return kExitError;
    }
    std::vector<float> rows(raw.size() / sizeof(float));
    std::memcpy(rows.data(), raw.data(), raw.size());
    s = nl_trace(m, trace_task.c_str(), rows.data(), raw.size() / row_bytes, trace_out.c_str());
    nl_model_free(m);
    if (s != NL_OK) return fail();
    return 0;
  }

  if (*enc) {
    const auto traces = c_strs(enc_traces);
    std::vector<std::string> names(enc_task_params.size());
    std::vector<nl_task_params> params;
    for (std::size_t i = 0; i < enc_task_params.size(); ++i) {
      auto p = parse_task_param(enc_task_params[i], names[i]);
      if (!p) {
        std::cerr << "error: --task-param expects task:lambda:tau, got '" << enc_task_params[i] << "'\n";
        return kExitError;
      }
      params.push_back(*p);
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i].task = names[i].c_str();
    nl_encrypt_options o{};
    o.model = enc_model.c_str();
    o.traces = traces.data();
    o.trace_count = traces.size();
    o.policy_file = enc_policies.c_str();
    o.out_prefix = enc_out.c_str();
    o.master_key = enc_msk.empty() ? nullptr : enc_msk.c_str();
    o.lambda = enc_lambda;
    o.tau = enc_tau;
    o.task_params = params.data();
    o.task_param_count = params.size();
    o.calibration_samples = enc_samples;
    o.seed = enc_seed ? &*enc_seed : nullptr;
    if ((s = nl_encrypt(&o, &json)) != NL_OK) return fail();
    emit(json);
    return 0;
  }

  if (*kg) {
    const auto attrs = c_strs(kg_attrs);
    s = nl_keygen(kg_msk.c_str(), attrs.data(), attrs.size(), kg_out.c_str(), kg_seed ? &*kg_seed : nullptr, &json);
    if (s != NL_OK) return fail();
    emit(json);
    return 0;
  }

  if (*dec) {
    nl_decrypt_options o{};
    o.model = dec_model.c_str();
    o.bundle = dec_bundle.c_str();
    o.secret_key = dec_key.c_str();
    o.out = dec_out.c_str();
    o.mode = dec_mode == "ce" ? NL_MODE_COMPUTATION_EFFICIENT : NL_MODE_TRANSMISSION_EFFICIENT;
    o.key_map = dec_kmap.empty() ? nullptr : dec_kmap.c_str();
    o.thresholds = dec_thr.empty() ? nullptr : dec_thr.c_str();
    o.report = dec_report.empty() ? nullptr : dec_report.c_str();
    nl_decrypt_result r{};
    if ((s = nl_decrypt(&o, &r, &json)) != NL_OK) return fail();
    emit(json);
    switch (r.status) {
      case NL_DECRYPT_FULL: return 0;
      case NL_DECRYPT_PARTIAL: return 2;
      case NL_DECRYPT_ZERO: return 3;
    }
    return kExitError;
  }

  if (*insp) {
    if ((s = nl_inspect(insp_path.c_str(), &json)) != NL_OK) return fail();
    emit(json);
    return 0;
  }

  if (*cal) {
    s = nl_calibrate(cal_model.c_str(), cal_samples, cal_seed ? &*cal_seed : nullptr,
                     cal_out.empty() ? nullptr : cal_out.c_str(), &json);
    if (s != NL_OK) return fail();
    emit(json);
    return 0;
  }

  if (*bench) {
    std::string text;
    if (!bench_scenario.empty()) {
      std::ifstream in(bench_scenario, std::ios::binary);
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    if ((s = nl_bench(bench_scenario.empty() ? nullptr : text.c_str(), &json)) != NL_OK) return fail();
    emit(json, bench_out);
    return 0;
  }
  return kExitError;
}
