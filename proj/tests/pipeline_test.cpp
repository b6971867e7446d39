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

#include <filesystem>

#include "neuronlock/pipeline.hpp"
#include "neuronlock/synth.hpp"

using namespace neuronlock;

namespace {

synth::TaskSuite suite_for(std::vector<std::string> tasks, Dtype dtype, std::uint64_t seed) {
  Rng rng(seed);
  synth::TaskSuiteSpec spec;
  spec.tasks = std::move(tasks);
  spec.dtype = dtype;
  return synth::make_task_suite(spec, rng);
}

TaskPolicies three_task_policies() {
  return parse_policy_file(
      "Code := and(company,developer)\n"
      "Health := or(hospital,and(clinic,doctor))\n"
      "Story := publisher\n");
}

EncryptInputs inputs_for(const synth::TaskSuite& suite, TaskPolicies policies) {
  EncryptInputs in;
  in.model = suite.model;
  in.traces = suite.traces();
  in.policies = std::move(policies);
  return in;
}

}  // namespace

TEST_CASE("capability control on the planted suite") {
  for (Dtype dtype : {Dtype::kFloat32, Dtype::kFloat16, Dtype::kInt8}) {
    CAPTURE(dtype_name(dtype));
    const auto suite = suite_for({"Code", "Health", "Story"}, dtype, 5);
    for (std::size_t t = 0; t < 3; ++t) CHECK(suite.accuracy(suite.model, t) >= 0.95);

    Rng rng(6);
    const EncryptOutputs enc = encrypt_pipeline(inputs_for(suite, three_task_policies()), rng);
    for (const auto& [task, sel] : enc.selection.sets) MESSAGE(task << " selected " << sel.neurons.size());

    const abe::SecretKey health = abe::keygen(enc.authority.pk, enc.authority.msk, {"hospital"}, rng);
    const DecryptOutputs dec = decrypt_pipeline(enc.encrypted, enc.bundle, health, {});
    CHECK(dec.report.status == DecryptStatus::kPartial);
    const double acc_code = suite.accuracy(dec.model, 0);
    const double acc_health = suite.accuracy(dec.model, 1);
    const double acc_story = suite.accuracy(dec.model, 2);
    MESSAGE("health-key accuracy code/health/story " << acc_code << " " << acc_health << " " << acc_story);
    CHECK(acc_health >= suite.accuracy(suite.model, 1) - 0.05);
    CHECK(acc_code <= suite.chance() + 0.15);
    CHECK(acc_story <= suite.chance() + 0.15);

    const abe::SecretKey nobody = abe::keygen(enc.authority.pk, enc.authority.msk, {"stranger"}, rng);
    const DecryptOutputs none = decrypt_pipeline(enc.encrypted, enc.bundle, nobody, {});
    CHECK(none.report.status == DecryptStatus::kZero);
    for (std::size_t t = 0; t < 3; ++t) CHECK(suite.accuracy(none.model, t) <= suite.chance() + 0.15);
  }
}

TEST_CASE("policies are validated before any encryption") {
  const auto suite = suite_for({"Code", "Health"}, Dtype::kFloat32, 8);
  Rng rng(1);
  EncryptInputs in = inputs_for(suite, parse_policy_file("Health := hospital\n"));
  CHECK_THROWS_WITH_AS(encrypt_pipeline(in, rng), doctest::Contains("MissingTaskPolicy"), Error);
  in.policies["Code"] = PolicyNode::threshold(3, {PolicyNode::leaf("a"), PolicyNode::leaf("b")});
  CHECK_THROWS_WITH_AS(encrypt_pipeline(in, rng), doctest::Contains("InvalidPolicy"), Error);
  // Neither failure consumed randomness.
  Rng fresh(1);
  CHECK(rng.next_u64() == fresh.next_u64());
}

TEST_CASE("seeded encryption is reproducible") {
  const auto suite = suite_for({"Code", "Health"}, Dtype::kFloat16, 9);
  auto run = [&] {
    Rng rng(77);
    return encrypt_pipeline(inputs_for(suite, three_task_policies()), rng);
  };
  const EncryptOutputs a = run();
  const EncryptOutputs b = run();
  CHECK(write_container(a.encrypted) == write_container(b.encrypted));
  CHECK(write_bundle(a.bundle) == write_bundle(b.bundle));
  CHECK(write_kmap(a.key_map) == write_kmap(b.key_map));
  CHECK(write_container(a.encrypted).size() == write_container(suite.model).size() + 8);
}

TEST_CASE("decrypt rejects foreign bundles and CE without a key map") {
  const auto suite = suite_for({"Code", "Health"}, Dtype::kInt8, 10);
  Rng rng(2);
  const EncryptOutputs a = encrypt_pipeline(inputs_for(suite, three_task_policies()), rng);
  const EncryptOutputs b = encrypt_pipeline(inputs_for(suite, three_task_policies()), rng);
  const abe::SecretKey sk = abe::keygen(a.authority.pk, a.authority.msk, {"hospital"}, rng);
  CHECK_THROWS_WITH_AS(decrypt_pipeline(a.encrypted, b.bundle, sk, {}), doctest::Contains("ArtifactMismatch"), Error);
  DecryptInputs ce;
  ce.mode = DecryptMode::kComputationEfficient;
  CHECK_THROWS_AS(decrypt_pipeline(a.encrypted, a.bundle, sk, ce), Error);
  ce.key_map = KeyMap(3, 0);
  CHECK_THROWS_WITH_AS(decrypt_pipeline(a.encrypted, a.bundle, sk, ce), doctest::Contains("KeyMapLengthMismatch"),
                       Error);
}

TEST_CASE("file-level encrypt, keygen, decrypt and inspect") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "neuronlock_pipeline_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto suite = suite_for({"Code", "Health", "Story"}, Dtype::kFloat32, 11);
  save_container(dir / "plain.snm", suite.model);
  EncryptJob job;
  job.model = dir / "plain.snm";
  for (const auto& t : suite.traces()) {
    save_trace(dir / (t.task + ".trace"), t);
    job.traces.push_back(dir / (t.task + ".trace"));
  }
  write_file_atomic(dir / "policies.txt", std::string_view("Code := and(company,developer)\n"
                                                           "Health := or(hospital,and(clinic,doctor))\n"
                                                           "Story := publisher\n"));
  job.policy_file = dir / "policies.txt";
  job.out_prefix = dir / "enc";
  job.seed = 5;
  const std::string summary = run_encrypt_job(job);
  CHECK(summary.find("\"subsets\"") != std::string::npos);
  const EncryptArtifacts paths = artifact_paths(job.out_prefix);
  for (const auto& p : {paths.model, paths.bundle, paths.key_map, paths.thresholds, paths.master_key, paths.report}) {
    CHECK(fs::exists(p));
  }
  const Bytes first = read_file(paths.model);
  run_encrypt_job(job);
  CHECK(read_file(paths.model) == first);

  const KeygenResult kg = run_keygen(paths.master_key, {"clinic", "doctor"}, dir / "user.ask", 3);
  CHECK(kg.bytes == fs::file_size(dir / "user.ask"));
  CHECK_THROWS_WITH_AS(run_keygen(paths.bundle, {"x"}, dir / "bad.ask", 3), doctest::Contains("BadMasterKey"), Error);
  CHECK_THROWS_WITH_AS(run_keygen(paths.master_key, {}, dir / "bad.ask", 3), doctest::Contains("EmptyAttributeSet"),
                       Error);

  DecryptJob te{paths.model, paths.bundle, dir / "user.ask", dir / "te.snm"};
  te.report = dir / "te.json";
  const DecryptReport r1 = run_decrypt(te);
  DecryptJob ce = te;
  ce.out = dir / "ce.snm";
  ce.mode = DecryptMode::kComputationEfficient;
  ce.key_map = paths.key_map;
  const DecryptReport r2 = run_decrypt(ce);
  CHECK(r1.status == DecryptStatus::kPartial);
  CHECK(r1.decrypted == r2.decrypted);
  CHECK(read_file(dir / "te.snm") == read_file(dir / "ce.snm"));
  CHECK(r2.trials == r2.decrypted);

  for (const auto& p : {paths.model, paths.bundle, paths.key_map, paths.master_key, fs::path(dir / "user.ask"),
                        fs::path(dir / "Code.trace")}) {
    CHECK_NOTHROW(inspect_file(p));
  }
  CHECK(inspect_file(dir / "user.ask").find("doctor") != std::string::npos);
  CHECK_THROWS_WITH_AS(inspect_file(paths.thresholds), doctest::Contains("BadMagic"), Error);
  fs::remove_all(dir);
}
