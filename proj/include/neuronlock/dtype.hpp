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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace neuronlock {

enum class Dtype : std::uint8_t {
  kFloat32 = 0,
  kFloat16 = 1,
  kInt8 = 2,
};

constexpr std::size_t element_size(Dtype t) {
  switch (t) {
    case Dtype::kFloat32:
      return 4;
    case Dtype::kFloat16:
      return 2;
    case Dtype::kInt8:
      return 1;
  }
  return 0;
}

constexpr bool is_float(Dtype t) { return t == Dtype::kFloat32 || t == Dtype::kFloat16; }

std::string_view dtype_name(Dtype t);
// Accepts "float32", "f32", "float16", "f16", "int8", "i8". Throws kUnknownDtype.
Dtype parse_dtype(std::string_view name);
// Throws kUnknownDtype for tags outside the enumeration.
Dtype dtype_from_tag(std::uint8_t tag);

// IEEE 754 binary16 conversions; float_to_half rounds to nearest even.
float half_to_float(std::uint16_t h);
std::uint16_t float_to_half(float f);

// Decodes `bytes` as little-endian scalars of `t`; INT8 values are multiplied
// by `scale`.
std::vector<float> decode_scalars(std::span<const std::uint8_t> bytes, Dtype t, float scale = 1.0f);
void encode_scalar(float value, Dtype t, float scale, std::uint8_t* out);

}  // namespace neuronlock
