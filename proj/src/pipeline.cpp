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

#include "neuronlock/pipeline.hpp"

#include <chrono>
#include <cstring>
#include <set>

#include "json.hpp"

namespace neuronlock {
namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string text_of(const std::filesystem::path& p) {
  const Bytes b = read_file(p);
  return std::string(b.begin(), b.end());
}

Rng make_rng(std::optional<std::uint64_t> seed) { return seed ? Rng(*seed) : Rng::from_entropy(); }

std::filesystem::path with_suffix(const std::filesystem::path& prefix, std::string_view suffix) {
  std::filesystem::path p = prefix;
  p += suffix;
  return p;
}

std::string magic_of(std::span<const std::uint8_t> b) {
  return b.size() >= 8 ? std::string(b.begin(), b.begin() + 8) : std::string();
}

}  // namespace

Authority new_authority(Rng& rng) {
  Authority a;
  abe::setup(rng, a.pk, a.msk);
  return a;
}

EncryptOutputs encrypt_pipeline(const EncryptInputs& in, Rng& rng) {
  const auto start = Clock::now();
  NL_ENFORCE(!in.model.encrypted(), Errc::kEncryptedModel, "input model is already encrypted");
  NL_ENFORCE(!in.traces.empty(), Errc::kInvalidArgument, "no activation traces");
  for (const auto& t : in.traces) {
    NL_ENFORCE(in.policies.count(t.task), Errc::kMissingTaskPolicy, "no policy for task '" + t.task + "'");
  }
  for (const auto& [task, policy] : in.policies) validate_policy(policy);

  EncryptOutputs out;
  const ImportanceMatrix importance = compute_importance(in.traces);
  NL_ENFORCE(importance.neuron_count() == in.model.neuron_count(), Errc::kMismatchedNeuronCount,
             "traces cover " + std::to_string(importance.neuron_count()) + " neurons, model has " +
                 std::to_string(in.model.neuron_count()));
  out.selection = select_all(importance, in.params, in.defaults);
  out.partition = decompose_subsets(out.selection, in.model.neuron_count());
  const auto policies = build_policies(out.partition, in.policies);

  out.authority = in.authority ? *in.authority : new_authority(rng);
  const std::uint64_t nonce = rng.next_u64();
  out.calibration = calibrate_thresholds(in.model, in.calibration_samples, rng);
  SealedBundle sealed =
      seal_subset_keys(out.authority.pk, out.partition, policies, nonce, out.calibration.thresholds, rng);
  EncryptedModel enc = encrypt_model(in.model, out.partition, sealed.keys, nonce);

  out.encrypted = std::move(enc.model);
  out.key_map = std::move(enc.key_map);
  out.bundle = std::move(sealed.bundle);
  out.subset_keys = std::move(sealed.keys);
  out.subset_secrets = std::move(sealed.secrets);
  out.seconds = since(start);
  return out;
}

DecryptOutputs decrypt_pipeline(const ModelContainer& encrypted, const AbeBundle& bundle,
                                const abe::SecretKey& sk, const DecryptInputs& in) {
  NL_ENFORCE(encrypted.encrypted(), Errc::kEncryptedModel, "model is not encrypted");
  NL_ENFORCE(encrypted.nonce() == bundle.model_nonce, Errc::kArtifactMismatch,
             "bundle was issued for model nonce " + std::to_string(bundle.model_nonce) +
                 ", model carries " + std::to_string(encrypted.nonce()));
  const auto keys = recover_keys(bundle, sk);
  const DetectionThresholds th = in.thresholds.value_or(bundle.thresholds);
  DecryptOutputs out{encrypted, {}, keys.size()};
  if (in.mode == DecryptMode::kComputationEfficient) {
    NL_ENFORCE(in.key_map.has_value(), Errc::kInvalidArgument, "computation-efficient mode needs a key map");
    out.report = decrypt_ce(out.model, keys, *in.key_map, th);
  } else {
    out.report = decrypt_te(out.model, keys, th);
  }
  return out;
}

EncryptArtifacts artifact_paths(const std::filesystem::path& out_prefix) {
  return {with_suffix(out_prefix, ".snm"),  with_suffix(out_prefix, ".abk"),
          with_suffix(out_prefix, ".kmap"), with_suffix(out_prefix, ".thr"),
          with_suffix(out_prefix, ".msk"),  with_suffix(out_prefix, ".selection.json")};
}

std::string run_encrypt_job(const EncryptJob& job) {
  EncryptInputs in;
  in.model = load_container(job.model);
  for (const auto& p : job.traces) in.traces.push_back(load_trace(p));
  in.policies = parse_policy_file(text_of(job.policy_file));
  in.params = job.params;
  in.defaults = job.defaults;
  in.calibration_samples = job.calibration_samples;
  if (job.master_key) {
    auto [pk, msk] = abe::read_master_key(read_file(*job.master_key));
    in.authority = Authority{pk, msk};
  }
  Rng rng = make_rng(job.seed);
  const EncryptOutputs out = encrypt_pipeline(in, rng);

  const EncryptArtifacts paths = artifact_paths(job.out_prefix);
  const Bytes model_bytes = write_container(out.encrypted);
  const Bytes bundle_bytes = write_bundle(out.bundle);
  const Bytes kmap_bytes = write_kmap(out.key_map);
  write_file_atomic(paths.model, model_bytes);
  write_file_atomic(paths.bundle, bundle_bytes);
  write_file_atomic(paths.key_map, kmap_bytes);
  write_file_atomic(paths.thresholds, calibration_json(out.calibration));
  write_file_atomic(paths.master_key, abe::write_master_key(out.authority.pk, out.authority.msk));
  write_file_atomic(paths.report, selection_report_json(out.selection));

  Json j;
  j["neurons"] = out.encrypted.neuron_count();
  j["tasks"] = out.partition.tasks;
  Json subsets = Json::array();
  for (const auto& e : out.bundle.entries) {
    const Subset* s = nullptr;
    for (const auto& cand : out.partition.subsets) {
      if (cand.id == e.subset_id) s = &cand;
    }
    subsets.push_back({{"id", e.subset_id},
                       {"owners", s ? s->owners : std::vector<std::string>{}},
                       {"neurons", s ? s->neurons.size() : 0},
                       {"policy", to_string(e.ct.policy)}});
  }
  j["subsets"] = subsets;
  j["thresholds"] = Json::parse(thresholds_json(out.bundle.thresholds));
  j["bytes"] = {{"model", model_bytes.size()}, {"bundle", bundle_bytes.size()}, {"key_map", kmap_bytes.size()}};
  j["artifacts"] = {paths.model.string(), paths.bundle.string(), paths.key_map.string(),
                    paths.thresholds.string()};
  j["master_key"] = paths.master_key.string();
  j["seconds"] = out.seconds;
  return j.dump(2) + "\n";
}

KeygenResult run_keygen(const std::filesystem::path& master_key, const AttributeSet& attributes,
                        const std::filesystem::path& out, std::optional<std::uint64_t> seed) {
  NL_ENFORCE(!attributes.empty(), Errc::kEmptyAttributeSet, "no attributes given");
  std::pair<abe::PublicKey, abe::MasterKey> keys;
  try {
    keys = abe::read_master_key(read_file(master_key));
  } catch (const Error& e) {
    if (e.code() == Errc::kIo) throw;
    throw Error(Errc::kBadMasterKey, master_key.string() + ": " + e.what());
  }
  Rng rng = make_rng(seed);
  const auto start = Clock::now();
  const abe::SecretKey sk = abe::keygen(keys.first, keys.second, attributes, rng);
  const Bytes bytes = abe::write_secret_key(sk);
  KeygenResult r{bytes.size(), since(start), attributes};
  write_file_atomic(out, bytes);
  return r;
}

DecryptReport run_decrypt(const DecryptJob& job) {
  const ModelContainer model = load_container(job.model);
  const AbeBundle bundle = read_bundle(read_file(job.bundle));
  const abe::SecretKey sk = abe::read_secret_key(read_file(job.secret_key));
  DecryptInputs in;
  in.mode = job.mode;
  if (job.key_map) in.key_map = read_kmap(read_file(*job.key_map));
  if (job.thresholds) in.thresholds = thresholds_from_json(text_of(*job.thresholds));
  DecryptOutputs out = decrypt_pipeline(model, bundle, sk, in);
  save_container(job.out, out.model);
  if (job.report) write_file_atomic(*job.report, decrypt_report_json(out.report));
  return out.report;
}

std::string inspect_file(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  const std::string magic = magic_of(b);
  Json j;
  j["path"] = path.string();
  j["bytes"] = b.size();
  j["magic"] = magic;
  if (magic == std::string(kModelMagic, 8)) {
    const ModelContainer m = read_container(b);
    j["kind"] = "model";
    j["dtype"] = std::string(dtype_name(m.dtype()));
    j["encrypted"] = m.encrypted();
    if (m.encrypted()) j["nonce"] = m.nonce();
    j["neurons"] = m.neuron_count();
    j["mlp_bytes"] = m.mlp_bytes();
    Json layers = Json::array();
    for (const auto& l : m.layers()) {
      layers.push_back({{"d_in", l.d_in}, {"d_hidden", l.d_hidden}, {"d_out", l.d_out}, {"scale", l.scale}});
    }
    j["layers"] = layers;
    j["head"] = m.head().has_value();
  } else if (magic == "SNABE001") {
    const AbeBundle bundle = read_bundle(b);
    j["kind"] = "abe-bundle";
    j["model_nonce"] = bundle.model_nonce;
    j["tasks"] = bundle.tasks;
    j["thresholds"] = Json::parse(thresholds_json(bundle.thresholds));
    Json entries = Json::array();
    for (const auto& e : bundle.entries) {
      std::vector<std::string> owners;
      for (std::size_t i = 0; i < bundle.tasks.size(); ++i) {
        if (e.owner_bitmap & (1u << i)) owners.push_back(bundle.tasks[i]);
      }
      entries.push_back({{"subset", e.subset_id},
                         {"owners", owners},
                         {"policy", to_string(e.ct.policy)},
                         {"leaves", e.ct.leaves.size()}});
    }
    j["entries"] = entries;
  } else if (magic == "SNASK001") {
    const abe::SecretKey sk = abe::read_secret_key(b);
    j["kind"] = "attribute-key";
    j["attributes"] = sk.attributes();
  } else if (magic == "SNMSK001") {
    abe::read_master_key(b);
    j["kind"] = "master-key";
  } else if (magic == std::string(kKeyMapMagic, 8)) {
    const KeyMap map = read_kmap(b);
    j["kind"] = "key-map";
    j["neurons"] = map.size();
    std::map<std::uint32_t, std::uint64_t> counts;
    for (auto id : map) ++counts[id];
    Json per = Json::object();
    for (auto [id, n] : counts) per[std::to_string(id)] = n;
    j["per_subset"] = per;
  } else if (magic == std::string(kTraceMagic, 8)) {
    const ActivationTrace t = read_trace(b);
    j["kind"] = "trace";
    j["task"] = t.task;
    j["neurons"] = t.sums.size();
    j["samples"] = t.count;
  } else {
    throw Error(Errc::kBadMagic, path.string() + ": unrecognized artifact");
  }
  return j.dump(2) + "\n";
}

}  // namespace neuronlock
