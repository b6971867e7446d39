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

#include "neuronlock/decryptor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <mutex>

#include "json.hpp"

namespace neuronlock {
namespace {

using Clock = std::chrono::steady_clock;

// Per-neuron outcome: subset id that opened it, or kNone.
constexpr std::uint32_t kNone = UINT32_MAX;

DecryptReport finish(ModelContainer& model, DecryptMode mode, std::size_t key_count,
                     const std::vector<std::uint32_t>& opened, std::uint64_t trials,
                     std::uint64_t mismatches, Clock::time_point start) {
  DecryptReport rep;
  rep.mode = mode;
  rep.total_neurons = model.neuron_count();
  rep.keys = key_count;
  rep.trials = trials;
  rep.detection_mismatches = mismatches;
  std::vector<bool> keep(opened.size());
  for (std::size_t g = 0; g < opened.size(); ++g) {
    keep[g] = opened[g] != kNone;
    if (keep[g]) {
      ++rep.decrypted;
      ++rep.per_subset[opened[g]];
    }
  }
  rep.pruned = rep.total_neurons - rep.decrypted;
  adaptive_prune(model, keep);
  rep.status = rep.pruned == 0 ? DecryptStatus::kFull
               : rep.decrypted == 0 ? DecryptStatus::kZero
                                    : DecryptStatus::kPartial;
  rep.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return rep;
}

}  // namespace

DecryptReport decrypt_te(ModelContainer& model, const std::map<std::uint32_t, AesKey>& keys,
                         const DetectionThresholds& thresholds) {
  const auto start = Clock::now();
  NL_ENFORCE(model.encrypted(), Errc::kEncryptedModel, "model is not encrypted");
  const std::uint64_t n = model.neuron_count();
  const std::uint64_t nonce = model.nonce();
  std::vector<std::uint32_t> opened(n, kNone);
  std::atomic<std::uint64_t> trials{0};

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    Bytes row;
    std::uint64_t local_trials = 0;
    for (std::size_t g = begin; g < end; ++g) {
      const NeuronRef ref = model.neuron(g);
      const NeuronSpans spans = model.spans(ref);
      const auto cipher_row = model.bytes(spans.w_in);
      for (const auto& [id, key] : keys) {
        ++local_trials;
        // W_IN leads the neuron's stream, so its keystream starts at the
        // neuron's first counter.
        row.assign(cipher_row.begin(), cipher_row.end());
        xor_keystream(key, nonce, g * kNeuronBlockBudget, row);
        if (detect_decrypted(row, model.dtype(), thresholds)) {
          crypt_neuron_spans({key, nonce, g}, model.payload(), spans);
          opened[g] = id;
          break;
        }
      }
    }
    trials += local_trials;
  });
  return finish(model, DecryptMode::kTransmissionEfficient, keys.size(), opened, trials.load(), 0, start);
}

DecryptReport decrypt_ce(ModelContainer& model, const std::map<std::uint32_t, AesKey>& keys,
                         const KeyMap& key_map, const DetectionThresholds& thresholds) {
  const auto start = Clock::now();
  NL_ENFORCE(model.encrypted(), Errc::kEncryptedModel, "model is not encrypted");
  const std::uint64_t n = model.neuron_count();
  NL_ENFORCE(key_map.size() == n, Errc::kKeyMapLengthMismatch,
             "key map has " + std::to_string(key_map.size()) + " entries, model has " +
                 std::to_string(n) + " neurons");
  const std::uint64_t nonce = model.nonce();
  std::vector<std::uint32_t> opened(n, kNone);
  std::atomic<std::uint64_t> trials{0};
  std::atomic<std::uint64_t> mismatches{0};

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::uint64_t local_trials = 0;
    std::uint64_t local_mismatch = 0;
    for (std::size_t g = begin; g < end; ++g) {
      auto it = keys.find(key_map[g]);
      if (it == keys.end()) continue;
      ++local_trials;
      const NeuronSpans spans = model.spans(model.neuron(g));
      crypt_neuron_spans({it->second, nonce, g}, model.payload(), spans);
      // A key map pointing at the wrong subset shows up here.
      if (!detect_decrypted(model.bytes(spans.w_in), model.dtype(), thresholds)) {
        ++local_mismatch;
        continue;
      }
      opened[g] = key_map[g];
    }
    trials += local_trials;
    mismatches += local_mismatch;
  });
  return finish(model, DecryptMode::kComputationEfficient, keys.size(), opened, trials.load(),
                mismatches.load(), start);
}

void adaptive_prune(ModelContainer& model, const std::vector<bool>& keep) {
  NL_ENFORCE(keep.size() == model.neuron_count(), Errc::kShapeMismatch, "keep mask length");
  std::vector<bool> mask(keep.size());
  bool any = false;
  for (std::size_t g = 0; g < keep.size(); ++g) {
    if (keep[g]) continue;
    const NeuronSpans s = model.spans(model.neuron(g));
    for (const ByteRange& r : {s.w_in, s.b_in, s.w_out}) {
      auto b = model.bytes(r);
      std::fill(b.begin(), b.end(), std::uint8_t{0});
    }
    mask[g] = true;
    any = true;
  }
  model.set_prune_mask(any ? std::move(mask) : std::vector<bool>{});
  model.clear_encrypted();
}

std::string_view decrypt_status_name(DecryptStatus s) {
  switch (s) {
    case DecryptStatus::kFull:
      return "full";
    case DecryptStatus::kPartial:
      return "partial";
    case DecryptStatus::kZero:
      return "zero";
  }
  return "unknown";
}

std::string decrypt_report_json(const DecryptReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = r.mode == DecryptMode::kTransmissionEfficient ? "te" : "ce";
  j["status"] = std::string(decrypt_status_name(r.status));
  j["total_neurons"] = r.total_neurons;
  j["decrypted"] = r.decrypted;
  j["pruned"] = r.pruned;
  j["keys"] = r.keys;
  j["trials"] = r.trials;
  j["detection_mismatches"] = r.detection_mismatches;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [id, count] : r.per_subset) per[std::to_string(id)] = count;
  j["per_subset"] = per;
  j["seconds"] = r.seconds;
  return j.dump(2) + "\n";
}

}  // namespace neuronlock
