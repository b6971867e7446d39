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

// Decryption detection on a neuron's input weights.
//
// Float dtypes: m = max |w| (NaN and infinities count as +inf); decrypted iff
// m <= m_max. INT8: v = population variance of the normalized histogram of
// the raw int8 codes; decrypted iff v >= v_split.

#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "neuronlock/dtype.hpp"
#include "neuronlock/model.hpp"
#include "neuronlock/rng.hpp"

namespace neuronlock {

struct DetectionThresholds {
  double m_max = 1e4;
  double v_split = 5e-5;
  std::uint32_t hist_bins = 256;

  bool operator==(const DetectionThresholds&) const = default;
};

double magnitude_metric(std::span<const std::uint8_t> w_in, Dtype dtype);
double histogram_variance(std::span<const std::uint8_t> w_in, std::uint32_t bins);
// Dispatches on dtype.
double detection_metric(std::span<const std::uint8_t> w_in, Dtype dtype, const DetectionThresholds& t);
bool detect_decrypted(std::span<const std::uint8_t> w_in, Dtype dtype, const DetectionThresholds& t);

struct CalibrationReport {
  DetectionThresholds thresholds;
  Dtype dtype = Dtype::kFloat32;
  std::size_t samples = 0;
  // Observed metric ranges over plaintext rows and rows under a wrong key.
  double decrypted_min = 0;
  double decrypted_max = 0;
  double undecrypted_min = 0;
  double undecrypted_max = 0;
  // Distance between the two ranges; positive when they separate.
  double gap = 0;
};

// Measures every row of a plaintext model in clear and `samples` random rows
// under fresh random keys, then places the threshold in the gap: float
// m_max = 10x the largest clear magnitude, pulled down to the geometric mean
// of the boundary values if that would reach the undecrypted range; INT8
// v_split = geometric mean of the boundary values. Throws kRangesOverlap,
// kEncryptedModel.
CalibrationReport calibrate_thresholds(const ModelContainer& model, std::size_t samples, Rng& rng);

std::string thresholds_json(const DetectionThresholds& t);
DetectionThresholds thresholds_from_json(std::string_view text);
std::string calibration_json(const CalibrationReport& r);

}  // namespace neuronlock
