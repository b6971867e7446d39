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

#include "neuronlock/cipher.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

namespace neuronlock {
namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};

EVP_CIPHER_CTX* thread_ctx() {
  thread_local std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error(Errc::kCrypto, "EVP_CIPHER_CTX_new");
  return ctx.get();
}

std::vector<std::uint8_t>& thread_scratch() {
  thread_local std::vector<std::uint8_t> buf;
  return buf;
}

}  // namespace

void xor_keystream(const AesKey& key, std::uint64_t nonce, std::uint64_t counter,
                   std::span<std::uint8_t> data) {
  if (data.empty()) return;
  std::array<std::uint8_t, kAesBlock> iv{};
  for (int i = 0; i < 8; ++i) {
    iv[i] = static_cast<std::uint8_t>(nonce >> (56 - 8 * i));
    iv[8 + i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
  }
  EVP_CIPHER_CTX* ctx = thread_ctx();
  int len = 0;
  if (EVP_EncryptInit_ex(ctx, EVP_aes_128_ctr(), nullptr, key.data(), iv.data()) != 1 ||
      EVP_EncryptUpdate(ctx, data.data(), &len, data.data(), static_cast<int>(data.size())) != 1) {
    throw Error(Errc::kCrypto, "AES-CTR keystream");
  }
}

void crypt_neuron_spans(const NeuronCipherConfig& cfg, std::span<std::uint8_t> payload,
                        const NeuronSpans& spans) {
  const std::size_t total = spans.total();
  NL_ENFORCE(total <= kNeuronBlockBudget * kAesBlock, Errc::kSpanTooLarge,
             "neuron spans " + std::to_string(total) + " bytes exceed the counter budget");
  NL_ENFORCE(spans.w_in.end() <= payload.size() && spans.b_in.end() <= payload.size() &&
                 spans.w_out.end() <= payload.size(),
             Errc::kOutOfRange, "neuron span outside payload");
  auto& stream = thread_scratch();
  stream.resize(total);
  auto gather = [&](const ByteRange& r, std::size_t at) {
    std::memcpy(stream.data() + at, payload.data() + r.offset, r.length);
  };
  gather(spans.w_in, 0);
  gather(spans.b_in, spans.w_in.length);
  gather(spans.w_out, spans.w_in.length + spans.b_in.length);
  xor_keystream(cfg.key, cfg.nonce, cfg.counter_base * kNeuronBlockBudget, stream);
  auto scatter = [&](const ByteRange& r, std::size_t at) {
    std::memcpy(payload.data() + r.offset, stream.data() + at, r.length);
  };
  scatter(spans.w_in, 0);
  scatter(spans.b_in, spans.w_in.length);
  scatter(spans.w_out, spans.w_in.length + spans.b_in.length);
}

void encrypt_neuron(const NeuronCipherConfig& cfg, ModelContainer& model, const NeuronRef& n) {
  NL_ENFORCE(cfg.counter_base == n.global, Errc::kInvalidArgument, "counter base must equal the global index");
  crypt_neuron_spans(cfg, model.payload(), model.spans(n));
}

void decrypt_neuron(const NeuronCipherConfig& cfg, ModelContainer& model, const NeuronRef& n) {
  encrypt_neuron(cfg, model, n);
}

EncryptedModel encrypt_model(const ModelContainer& model, const SubsetPartition& partition,
                             const std::map<std::uint32_t, AesKey>& keys, std::uint64_t nonce) {
  NL_ENFORCE(!model.encrypted(), Errc::kEncryptedModel, "model is already encrypted");
  NL_ENFORCE(partition.total_neurons == model.neuron_count(), Errc::kMismatchedNeuronCount,
             "partition covers " + std::to_string(partition.total_neurons) + " neurons, model has " +
                 std::to_string(model.neuron_count()));
  for (const auto& s : partition.subsets) {
    NL_ENFORCE(keys.count(s.id), Errc::kMissingSubsetKey, "subset " + std::to_string(s.id));
  }
  EncryptedModel out{model, partition.neuron_to_subset()};
  out.model.set_prune_mask({});
  std::vector<const AesKey*> key_of(out.key_map.size());
  for (std::size_t n = 0; n < key_of.size(); ++n) key_of[n] = &keys.at(out.key_map[n]);

  parallel_for(out.key_map.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const NeuronRef ref = out.model.neuron(g);
      crypt_neuron_spans({*key_of[g], nonce, g}, out.model.payload(), out.model.spans(ref));
    }
  });
  out.model.set_encrypted(nonce);
  return out;
}

Bytes write_kmap(const KeyMap& map) {
  ByteWriter w;
  w.raw(std::string_view(kKeyMapMagic, sizeof(kKeyMapMagic)));
  w.u64(map.size());
  for (auto id : map) w.u32(id);
  return w.take();
}

KeyMap read_kmap(std::span<const std::uint8_t> bytes) {
  NL_ENFORCE(bytes.size() >= sizeof(kKeyMapMagic) &&
                 std::memcmp(bytes.data(), kKeyMapMagic, sizeof(kKeyMapMagic)) == 0,
             Errc::kBadMagic, "not an SNKMAP01 file");
  ByteReader r(bytes, Errc::kTruncatedTensor, "key map");
  r.raw(sizeof(kKeyMapMagic));
  const std::uint64_t n = r.u64();
  NL_ENFORCE(r.remaining() == n * 4, Errc::kTruncatedTensor,
             "key map declares " + std::to_string(n) + " entries but holds " +
                 std::to_string(r.remaining()) + " bytes");
  KeyMap map(n);
  for (auto& id : map) id = r.u32();
  return map;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, n / 4096 + 1);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::exception_ptr failure;
  std::mutex mu;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace neuronlock
