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

#include "neuronlock/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "json.hpp"
#include "neuronlock/cipher.hpp"

namespace neuronlock {

double magnitude_metric(std::span<const std::uint8_t> w_in, Dtype dtype) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double m = 0;
  if (dtype == Dtype::kFloat32) {
    for (std::size_t i = 0; i + 4 <= w_in.size(); i += 4) {
      float v;
      std::memcpy(&v, w_in.data() + i, 4);
      const double a = std::isfinite(v) ? std::fabs(static_cast<double>(v)) : kInf;
      m = std::max(m, a);
    }
  } else if (dtype == Dtype::kFloat16) {
    for (std::size_t i = 0; i + 2 <= w_in.size(); i += 2) {
      const auto bits = static_cast<std::uint16_t>(w_in[i] | (w_in[i + 1] << 8));
      const float v = half_to_float(bits);
      const double a = std::isfinite(v) ? std::fabs(static_cast<double>(v)) : kInf;
      m = std::max(m, a);
    }
  } else {
    throw Error(Errc::kUnsupportedDtype, "magnitude metric needs a float dtype");
  }
  return m;
}

double histogram_variance(std::span<const std::uint8_t> w_in, std::uint32_t bins) {
  NL_ENFORCE(bins >= 1 && bins <= 256, Errc::kInvalidArgument, "histogram bins must be in [1, 256]");
  if (w_in.empty()) return 0;
  std::vector<double> hist(bins, 0.0);
  for (std::uint8_t b : w_in) {
    const int code = static_cast<int>(static_cast<std::int8_t>(b)) + 128;  // [0, 256)
    hist[static_cast<std::size_t>(code) * bins / 256] += 1.0;
  }
  const double n = static_cast<double>(w_in.size());
  const double mean = 1.0 / bins;
  double var = 0;
  for (double c : hist) {
    const double d = c / n - mean;
    var += d * d;
  }
  return var / bins;
}

double detection_metric(std::span<const std::uint8_t> w_in, Dtype dtype, const DetectionThresholds& t) {
  return is_float(dtype) ? magnitude_metric(w_in, dtype) : histogram_variance(w_in, t.hist_bins);
}

bool detect_decrypted(std::span<const std::uint8_t> w_in, Dtype dtype, const DetectionThresholds& t) {
  const double m = detection_metric(w_in, dtype, t);
  return is_float(dtype) ? m <= t.m_max : m >= t.v_split;
}

CalibrationReport calibrate_thresholds(const ModelContainer& model, std::size_t samples, Rng& rng) {
  NL_ENFORCE(!model.encrypted(), Errc::kEncryptedModel, "calibration needs the plaintext model");
  const std::uint64_t n = model.neuron_count();
  NL_ENFORCE(n > 0 && samples > 0, Errc::kInvalidArgument, "nothing to calibrate");

  CalibrationReport rep;
  rep.dtype = model.dtype();
  rep.samples = samples;
  rep.decrypted_min = rep.undecrypted_min = std::numeric_limits<double>::infinity();
  rep.decrypted_max = rep.undecrypted_max = -std::numeric_limits<double>::infinity();
  DetectionThresholds t;
  for (std::uint64_t g = 0; g < n; ++g) {
    const double clear = detection_metric(model.bytes(model.spans(model.neuron(g)).w_in), rep.dtype, t);
    rep.decrypted_min = std::min(rep.decrypted_min, clear);
    rep.decrypted_max = std::max(rep.decrypted_max, clear);
  }
  Bytes scratch;
  for (std::size_t i = 0; i < samples; ++i) {
    const std::uint64_t g = rng.below(n);
    const auto w_in = model.bytes(model.spans(model.neuron(g)).w_in);
    scratch.assign(w_in.begin(), w_in.end());
    AesKey key;
    rng.fill(key);
    xor_keystream(key, rng.next_u64(), g * kNeuronBlockBudget, scratch);
    const double wrong = detection_metric(scratch, rep.dtype, t);
    rep.undecrypted_min = std::min(rep.undecrypted_min, wrong);
    rep.undecrypted_max = std::max(rep.undecrypted_max, wrong);
  }

  if (is_float(rep.dtype)) {
    const double lo = rep.decrypted_max;
    const double hi = rep.undecrypted_min;
    rep.gap = hi - lo;
    NL_ENFORCE(lo < hi, Errc::kRangesOverlap,
               "clear magnitudes reach " + std::to_string(lo) + ", wrong-key magnitudes start at " +
                   std::to_string(hi));
    t.m_max = 10.0 * lo;
    if (t.m_max >= hi || t.m_max == 0) t.m_max = lo > 0 ? std::sqrt(lo * hi) : hi / 2;
    if (!std::isfinite(t.m_max)) t.m_max = std::numeric_limits<double>::max();
  } else {
    const double lo = rep.undecrypted_max;
    const double hi = rep.decrypted_min;
    rep.gap = hi - lo;
    NL_ENFORCE(lo < hi, Errc::kRangesOverlap,
               "clear histogram variance falls to " + std::to_string(hi) +
                   ", wrong-key variance reaches " + std::to_string(lo));
    t.v_split = lo > 0 ? std::sqrt(lo * hi) : hi / 2;
  }
  rep.thresholds = t;
  return rep;
}

std::string thresholds_json(const DetectionThresholds& t) {
  nlohmann::ordered_json j;
  j["m_max"] = t.m_max;
  j["v_split"] = t.v_split;
  j["hist_bins"] = t.hist_bins;
  return j.dump(2) + "\n";
}

DetectionThresholds thresholds_from_json(std::string_view text) {
  DetectionThresholds t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.m_max = j.value("m_max", t.m_max);
    t.v_split = j.value("v_split", t.v_split);
    t.hist_bins = j.value("hist_bins", t.hist_bins);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidArgument, std::string("thresholds: ") + e.what());
  }
  NL_ENFORCE(t.m_max > 0 && t.v_split > 0 && t.hist_bins >= 1 && t.hist_bins <= 256,
             Errc::kInvalidArgument, "thresholds out of range");
  return t;
}

std::string calibration_json(const CalibrationReport& r) {
  nlohmann::ordered_json j;
  j["dtype"] = std::string(dtype_name(r.dtype));
  j["samples"] = r.samples;
  j["m_max"] = r.thresholds.m_max;
  j["v_split"] = r.thresholds.v_split;
  j["hist_bins"] = r.thresholds.hist_bins;
  auto finite = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json("inf"); };
  j["decrypted_range"] = {finite(r.decrypted_min), finite(r.decrypted_max)};
  j["undecrypted_range"] = {finite(r.undecrypted_min), finite(r.undecrypted_max)};
  j["gap"] = finite(r.gap);
  return j.dump(2) + "\n";
}

}  // namespace neuronlock
