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

#include <cfloat>
#include <cmath>

#include "neuronlock/decryptor.hpp"
#include "neuronlock/pipeline.hpp"
#include "neuronlock/synth.hpp"

using namespace neuronlock;

namespace {

Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes b(n);
  rng.fill(b);
  return b;
}

struct Deployment {
  synth::TaskSuite suite;
  EncryptOutputs enc;
  Rng rng{90};

  Deployment(Dtype dtype, std::uint64_t seed) {
    Rng r(seed);
    synth::TaskSuiteSpec spec;
    spec.tasks = {"Code", "Health", "Story"};
    spec.dtype = dtype;
    suite = synth::make_task_suite(spec, r);
    EncryptInputs in;
    in.model = suite.model;
    in.traces = suite.traces();
    in.policies = parse_policy_file("Code := dev\nHealth := hospital\nStory := writer\n");
    enc = encrypt_pipeline(in, r);
  }

  std::map<std::uint32_t, AesKey> keys_for(const AttributeSet& attrs) {
    return recover_keys(enc.bundle, abe::keygen(enc.authority.pk, enc.authority.msk, attrs, rng));
  }
};

}  // namespace

TEST_CASE("magnitude metric") {
  std::vector<float> v{0.5f, -2.0f, 1.0f};
  Bytes b(v.size() * 4);
  std::memcpy(b.data(), v.data(), b.size());
  CHECK(magnitude_metric(b, Dtype::kFloat32) == 2.0);
  v[1] = NAN;
  std::memcpy(b.data(), v.data(), b.size());
  CHECK(std::isinf(magnitude_metric(b, Dtype::kFloat32)));
  CHECK_THROWS_WITH_AS(magnitude_metric(b, Dtype::kInt8), doctest::Contains("UnsupportedDtype"), Error);

  Rng rng(1);
  const DetectionThresholds t;
  for (int i = 0; i < 200; ++i) {
    CHECK(magnitude_metric(random_bytes(rng, 1024), Dtype::kFloat32) > 1e30);
    CHECK(!detect_decrypted(random_bytes(rng, 512), Dtype::kFloat16, t));
  }
}

TEST_CASE("histogram variance separates trained int8 rows from noise") {
  Rng rng(2);
  const ModelContainer m = synth::random_model(Dtype::kInt8, 256, 64, 1, rng);
  double trained_min = INFINITY, noise_max = 0;
  for (std::uint64_t g = 0; g < m.neuron_count(); ++g) {
    trained_min = std::min(trained_min, histogram_variance(m.bytes(m.spans(m.neuron(g)).w_in), 256));
    noise_max = std::max(noise_max, histogram_variance(random_bytes(rng, 256), 256));
  }
  MESSAGE("trained min " << trained_min << ", uniform max " << noise_max);
  CHECK(trained_min > 3 * noise_max);
  // A single repeated code has the largest possible variance.
  const Bytes flat(256, 0);
  CHECK(histogram_variance(flat, 256) == doctest::Approx((1.0 - 1.0 / 256) / 256));
}

TEST_CASE("calibration") {
  Rng rng(3);
  SUBCASE("int8") {
    const ModelContainer m = synth::random_model(Dtype::kInt8, 256, 64, 1, rng);
    const CalibrationReport r = calibrate_thresholds(m, 512, rng);
    CHECK(r.gap > 0);
    CHECK(r.thresholds.v_split > r.undecrypted_max);
    CHECK(r.thresholds.v_split < r.decrypted_min);
    CHECK(calibration_json(r).find("v_split") != std::string::npos);
  }
  SUBCASE("float16") {
    const ModelContainer m = synth::random_model(Dtype::kFloat16, 128, 64, 2, rng);
    const CalibrationReport r = calibrate_thresholds(m, 512, rng);
    CHECK(r.thresholds.m_max == doctest::Approx(10 * r.decrypted_max));
    CHECK(r.thresholds.m_max < 65536.0);
  }
  SUBCASE("huge trained weights overlap") {
    ModelContainer m = synth::random_model(Dtype::kFloat32, 64, 64, 1, rng);
    m.set(0, m.w_in_tensor(0), 5, FLT_MAX);
    CHECK_THROWS_WITH_AS(calibrate_thresholds(m, 512, rng), doctest::Contains("RangesOverlap"), Error);
  }
  SUBCASE("thresholds json round trip") {
    const DetectionThresholds t{12.5, 3e-5, 128};
    CHECK(thresholds_from_json(thresholds_json(t)) == t);
    CHECK_THROWS_AS(thresholds_from_json("{\"m_max\": -1}"), Error);
  }
}

TEST_CASE("wrong key or wrong counter is flagged") {
  Rng rng(4);
  const ModelContainer m = synth::random_model(Dtype::kFloat32, 128, 32, 1, rng);
  const DetectionThresholds t = calibrate_thresholds(m, 256, rng).thresholds;
  AesKey key;
  rng.fill(key);
  for (std::uint64_t g = 1; g + 1 < m.neuron_count(); ++g) {
    const auto row = m.bytes(m.spans(m.neuron(g)).w_in);
    Bytes enc(row.begin(), row.end());
    xor_keystream(key, 5, g * kNeuronBlockBudget, enc);
    for (std::uint64_t wrong : {g - 1, g + 1}) {
      Bytes trial = enc;
      xor_keystream(key, 5, wrong * kNeuronBlockBudget, trial);
      CHECK(!detect_decrypted(trial, m.dtype(), t));
    }
    Bytes right = enc;
    xor_keystream(key, 5, g * kNeuronBlockBudget, right);
    CHECK(detect_decrypted(right, m.dtype(), t));
  }
}

TEST_CASE("decryption modes") {
  for (Dtype dtype : {Dtype::kFloat32, Dtype::kFloat16, Dtype::kInt8}) {
    CAPTURE(dtype_name(dtype));
    Deployment d(dtype, 40 + static_cast<int>(dtype));
    const DetectionThresholds th = d.enc.bundle.thresholds;

    // Admin keys restore the plaintext exactly.
    const auto all = d.keys_for({"dev", "hospital", "writer"});
    CHECK(all.size() == d.enc.partition.subsets.size());
    ModelContainer te = d.enc.encrypted;
    const DecryptReport r = decrypt_te(te, all, th);
    CHECK(r.status == DecryptStatus::kFull);
    CHECK(write_container(te) == write_container(d.suite.model));

    // No keys: everything pruned and zeroed.
    ModelContainer none = d.enc.encrypted;
    const DecryptReport rn = decrypt_te(none, {}, th);
    CHECK(rn.status == DecryptStatus::kZero);
    CHECK(std::all_of(none.payload().begin(), none.payload().end(), [](std::uint8_t b) { return b == 0; }));
    for (std::size_t t = 0; t < 3; ++t) CHECK(d.suite.accuracy(none, t) <= d.suite.chance() + 1e-9);

    // Health-only: pruned set equals the neurons outside Health-owned and common subsets.
    const auto health = d.keys_for({"hospital"});
    ModelContainer te_h = d.enc.encrypted;
    ModelContainer ce_h = d.enc.encrypted;
    const DecryptReport rt = decrypt_te(te_h, health, th);
    const DecryptReport rc = decrypt_ce(ce_h, health, d.enc.key_map, th);
    CHECK(write_container(te_h) == write_container(ce_h));
    CHECK(te_h.prune_mask() == ce_h.prune_mask());
    std::uint64_t authorized = 0;
    for (const auto& s : d.enc.partition.subsets) {
      const bool open = health.count(s.id) > 0;
      const bool should = s.common() || std::find(s.owners.begin(), s.owners.end(), "Health") != s.owners.end();
      CHECK(open == should);
      for (auto n : s.neurons) CHECK(te_h.is_pruned(n) == !open);
      if (open) authorized += s.neurons.size();
    }
    CHECK(rc.trials == authorized);
    CHECK(rc.decrypted == authorized);
    CHECK(rt.decrypted == authorized);
    CHECK(rt.trials >= rc.trials);
    CHECK(rc.detection_mismatches == 0);

    // Monotonicity: more attributes never decrypt fewer neurons.
    ModelContainer two = d.enc.encrypted;
    const DecryptReport r2 = decrypt_te(two, d.keys_for({"hospital", "writer"}), th);
    CHECK(r2.decrypted >= rt.decrypted);
    for (std::uint64_t n = 0; n < two.neuron_count(); ++n) {
      if (!te_h.is_pruned(n)) CHECK(!two.is_pruned(n));
    }
  }
}

TEST_CASE("corrupted key map entries are caught by detection") {
  Deployment d(Dtype::kFloat32, 50);
  const auto all = d.keys_for({"dev", "hospital", "writer"});
  KeyMap bad = d.enc.key_map;
  std::uint64_t victim = 0;
  while (bad[victim] == bad[0] && victim + 1 < bad.size()) ++victim;
  bad[victim] = d.enc.key_map[0];  // a different, existing subset
  REQUIRE(bad[victim] != d.enc.key_map[victim]);
  ModelContainer m = d.enc.encrypted;
  const DecryptReport r = decrypt_ce(m, all, bad, d.enc.bundle.thresholds);
  CHECK(r.detection_mismatches == 1);
  CHECK(m.is_pruned(victim));
  CHECK(r.status == DecryptStatus::kPartial);
  ModelContainer m2 = d.enc.encrypted;
  CHECK_THROWS_WITH_AS(decrypt_ce(m2, all, KeyMap(2, 0), d.enc.bundle.thresholds),
                       doctest::Contains("KeyMapLengthMismatch"), Error);
  ModelContainer plain = d.suite.model;
  CHECK_THROWS_WITH_AS(decrypt_te(plain, all, {}), doctest::Contains("EncryptedModel"), Error);
}

TEST_CASE("adaptive prune") {
  Rng rng(6);
  ModelContainer m = synth::random_model(Dtype::kFloat32, 8, 4, 2, rng);
  m.set_encrypted(3);
  ModelContainer unchanged = m;
  adaptive_prune(unchanged, std::vector<bool>(m.neuron_count(), true));
  CHECK(!unchanged.encrypted());
  CHECK(unchanged.prune_mask().empty());
  CHECK(std::equal(unchanged.payload().begin(), unchanged.payload().end(), m.payload().begin()));

  std::vector<bool> keep(m.neuron_count(), true);
  for (std::uint32_t i = 0; i < 4; ++i) keep[m.layer_first(1) + i] = false;
  adaptive_prune(m, keep);
  const std::vector<float> x(8, 1.0f);
  const auto out = forward(m, x).output;
  CHECK(std::all_of(out.begin(), out.end(), [](float v) { return v == 0.0f; }));
  const auto row = m.bytes(m.spans(m.neuron(m.layer_first(1))).w_in);
  CHECK(std::all_of(row.begin(), row.end(), [](std::uint8_t b) { return b == 0; }));
}
