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

#include "neuronlock/bundle.hpp"

#include <cstring>

namespace neuronlock {
namespace {

constexpr char kBundleMagic[8] = {'S', 'N', 'A', 'B', 'E', '0', '0', '1'};

void collect(const PolicyNode& n, AttributeSet& out) {
  if (n.kind == PolicyNode::Kind::kLeaf) {
    out.insert(n.attribute);
    return;
  }
  for (const auto& c : n.children) collect(c, out);
}

SealedBundle seal(const abe::PublicKey& pk, const SubsetPartition& partition,
                  const std::map<std::uint32_t, PolicyNode>& policies, std::uint64_t model_nonce,
                  const DetectionThresholds& thresholds, const std::map<std::uint32_t, abe::GT>* secrets,
                  Rng& rng) {
  NL_ENFORCE(partition.tasks.size() <= kMaxTasks, Errc::kInvalidArgument, "too many tasks");
  SealedBundle out;
  out.bundle.model_nonce = model_nonce;
  out.bundle.thresholds = thresholds;
  out.bundle.tasks = partition.tasks;
  out.bundle.pk = pk;
  for (const auto& s : partition.subsets) {
    auto it = policies.find(s.id);
    NL_ENFORCE(it != policies.end(), Errc::kMissingTaskPolicy, "no policy for subset " + std::to_string(s.id));
    abe::GT m;
    if (secrets) {
      auto sec = secrets->find(s.id);
      NL_ENFORCE(sec != secrets->end(), Errc::kMissingSubsetKey, "no secret for subset " + std::to_string(s.id));
      m = sec->second;
    } else {
      m = abe::random_gt(pk, rng);
    }
    out.keys[s.id] = abe::derive_aes_key(m);
    out.secrets[s.id] = m;
    out.bundle.entries.push_back({s.id, partition.owner_bitmap(s), abe::encrypt(pk, m, it->second, rng)});
  }
  return out;
}

}  // namespace

SealedBundle seal_subset_keys(const abe::PublicKey& pk, const SubsetPartition& partition,
                              const std::map<std::uint32_t, PolicyNode>& policies,
                              std::uint64_t model_nonce, const DetectionThresholds& thresholds, Rng& rng) {
  return seal(pk, partition, policies, model_nonce, thresholds, nullptr, rng);
}

SealedBundle reseal_subset_keys(const abe::PublicKey& pk, const SubsetPartition& partition,
                                const std::map<std::uint32_t, PolicyNode>& policies,
                                std::uint64_t model_nonce, const DetectionThresholds& thresholds,
                                const std::map<std::uint32_t, abe::GT>& secrets, Rng& rng) {
  return seal(pk, partition, policies, model_nonce, thresholds, &secrets, rng);
}

std::map<std::uint32_t, AesKey> recover_keys(const AbeBundle& bundle, const abe::SecretKey& sk) {
  std::map<std::uint32_t, AesKey> keys;
  const AttributeSet attrs = sk.attributes();
  for (const auto& e : bundle.entries) {
    if (!satisfies(e.ct.policy, attrs)) continue;
    if (auto m = abe::decrypt(bundle.pk, e.ct, sk)) keys[e.subset_id] = abe::derive_aes_key(*m);
  }
  return keys;
}

AttributeSet bundle_attributes(const AbeBundle& bundle) {
  AttributeSet out;
  for (const auto& e : bundle.entries) collect(e.ct.policy, out);
  return out;
}

Bytes write_bundle(const AbeBundle& b) {
  ByteWriter w;
  w.raw(std::string_view(kBundleMagic, sizeof(kBundleMagic)));
  w.u64(b.model_nonce);
  w.f64(b.thresholds.m_max);
  w.f64(b.thresholds.v_split);
  w.u32(b.thresholds.hist_bins);
  w.u32(static_cast<std::uint32_t>(b.tasks.size()));
  for (const auto& t : b.tasks) w.str(t);
  abe::write_public_key(w, b.pk);
  w.u32(static_cast<std::uint32_t>(b.entries.size()));
  for (const auto& e : b.entries) {
    w.u32(e.subset_id);
    w.u32(e.owner_bitmap);
    w.str(to_string(e.ct.policy));
    ByteWriter body;
    abe::write_ciphertext_body(body, e.ct);
    w.blob(body.bytes());
  }
  return w.take();
}

AbeBundle read_bundle(std::span<const std::uint8_t> bytes) {
  NL_ENFORCE(bytes.size() >= sizeof(kBundleMagic) &&
                 std::memcmp(bytes.data(), kBundleMagic, sizeof(kBundleMagic)) == 0,
             Errc::kBadMagic, "not an SNABE001 bundle");
  ByteReader r(bytes, Errc::kTruncatedTensor, "ABE bundle");
  r.raw(sizeof(kBundleMagic));
  AbeBundle b;
  b.model_nonce = r.u64();
  b.thresholds.m_max = r.f64();
  b.thresholds.v_split = r.f64();
  b.thresholds.hist_bins = r.u32();
  const std::uint32_t tasks = r.u32();
  NL_ENFORCE(tasks <= kMaxTasks, Errc::kInvalidArgument, "bundle lists too many tasks");
  for (std::uint32_t i = 0; i < tasks; ++i) b.tasks.push_back(r.str());
  b.pk = abe::read_public_key(r);
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    BundleEntry e;
    e.subset_id = r.u32();
    e.owner_bitmap = r.u32();
    PolicyNode policy = parse_policy(r.str());
    ByteReader body(r.blob(), Errc::kTruncatedTensor, "bundle entry");
    e.ct = abe::read_ciphertext_body(body, std::move(policy));
    NL_ENFORCE(body.done(), Errc::kInvalidArgument, "trailing bytes in bundle entry");
    NL_ENFORCE(b.entries.empty() || b.entries.back().subset_id < e.subset_id, Errc::kInvalidArgument,
               "bundle entries out of order");
    b.entries.push_back(std::move(e));
  }
  NL_ENFORCE(r.done(), Errc::kInvalidArgument, "trailing bytes in bundle");
  return b;
}

}  // namespace neuronlock
