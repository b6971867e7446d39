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

#include <cstdint>
#include <memory>
#include <span>

namespace neuronlock {

// AES-256-CTR keystream generator. Seeded instances are reproducible across
// runs; from_entropy() keys it from the OS CSPRNG.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng from_entropy();

  Rng(Rng&&) noexcept;
  Rng& operator=(Rng&&) noexcept;
  ~Rng();

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double normal();
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  struct State;
  explicit Rng(std::span<const std::uint8_t> key_material);

  std::unique_ptr<State> state_;
};

}  // namespace neuronlock
