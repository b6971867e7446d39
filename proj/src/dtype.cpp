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

#include "neuronlock/dtype.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "neuronlock/error.hpp"

namespace neuronlock {

std::string_view dtype_name(Dtype t) {
  switch (t) {
    case Dtype::kFloat32:
      return "float32";
    case Dtype::kFloat16:
      return "float16";
    case Dtype::kInt8:
      return "int8";
  }
  return "unknown";
}

Dtype parse_dtype(std::string_view name) {
  if (name == "float32" || name == "f32") return Dtype::kFloat32;
  if (name == "float16" || name == "f16") return Dtype::kFloat16;
  if (name == "int8" || name == "i8") return Dtype::kInt8;
  throw Error(Errc::kUnknownDtype, "unknown dtype name '" + std::string(name) + "'");
}

Dtype dtype_from_tag(std::uint8_t tag) {
  if (tag > static_cast<std::uint8_t>(Dtype::kInt8)) {
    throw Error(Errc::kUnknownDtype, "dtype tag " + std::to_string(tag));
  }
  return static_cast<Dtype>(tag);
}

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = std::uint32_t{h & 0x8000u} << 16;
  const std::uint32_t exp = (h >> 10) & 0x1fu;
  const std::uint32_t mant = h & 0x3ffu;
  std::uint32_t bits;
  if (exp == 0) {
    float v = std::ldexp(static_cast<float>(mant), -24);
    return sign ? -v : v;
  }
  if (exp == 31) {
    bits = sign | 0x7f800000u | (mant << 13);
  } else {
    bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
  }
  float out;
  std::memcpy(&out, &bits, 4);
  return out;
}

std::uint16_t float_to_half(float f) {
  std::uint32_t x;
  std::memcpy(&x, &f, 4);
  const auto sign = static_cast<std::uint16_t>((x >> 16) & 0x8000u);
  const std::uint32_t absx = x & 0x7fffffffu;

  if (absx >= 0x7f800000u) {
    if (absx == 0x7f800000u) return sign | 0x7c00u;
    return static_cast<std::uint16_t>(sign | 0x7e00u | ((absx >> 13) & 0x3ffu));
  }
  // 65520 and above round to infinity.
  if (absx >= 0x477ff000u) return sign | 0x7c00u;
  if (absx < 0x38800000u) {
    float mag;
    std::memcpy(&mag, &absx, 4);
    // nearbyint rounds half to even under the default rounding mode.
    auto units = static_cast<std::uint16_t>(std::nearbyint(std::ldexp(mag, 24)));
    return sign | units;
  }
  const std::uint32_t mant = absx & 0x7fffffu;
  const std::uint32_t exp = (absx >> 23) - 127 + 15;
  auto h = static_cast<std::uint16_t>((exp << 10) | (mant >> 13));
  const std::uint32_t rem = mant & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (h & 1u))) ++h;
  return sign | h;
}

std::vector<float> decode_scalars(std::span<const std::uint8_t> bytes, Dtype t, float scale) {
  const std::size_t es = element_size(t);
  std::vector<float> out(bytes.size() / es);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t* p = bytes.data() + i * es;
    switch (t) {
      case Dtype::kFloat32: {
        std::uint32_t bits = std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 |
                             std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
        std::memcpy(&out[i], &bits, 4);
        break;
      }
      case Dtype::kFloat16:
        out[i] = half_to_float(static_cast<std::uint16_t>(p[0] | p[1] << 8));
        break;
      case Dtype::kInt8:
        out[i] = static_cast<float>(static_cast<std::int8_t>(p[0])) * scale;
        break;
    }
  }
  return out;
}

void encode_scalar(float value, Dtype t, float scale, std::uint8_t* out) {
  switch (t) {
    case Dtype::kFloat32: {
      std::uint32_t bits;
      std::memcpy(&bits, &value, 4);
      for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(bits >> (8 * i));
      break;
    }
    case Dtype::kFloat16: {
      std::uint16_t h = float_to_half(value);
      out[0] = static_cast<std::uint8_t>(h);
      out[1] = static_cast<std::uint8_t>(h >> 8);
      break;
    }
    case Dtype::kInt8: {
      float q = std::nearbyint(value / scale);
      if (q > 127.0f) q = 127.0f;
      if (q < -128.0f) q = -128.0f;
      out[0] = static_cast<std::uint8_t>(static_cast<std::int8_t>(q));
      break;
    }
  }
}

}  // namespace neuronlock
