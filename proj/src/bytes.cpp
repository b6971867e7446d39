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

#include "neuronlock/bytes.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

namespace neuronlock {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kUnsupportedVersion: return "UnsupportedVersion";
    case Errc::kTruncatedTensor: return "TruncatedTensor";
    case Errc::kUnknownDtype: return "UnknownDtype";
    case Errc::kOutOfRange: return "OutOfRange";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kEncryptedModel: return "EncryptedModel";
    case Errc::kMismatchedNeuronCount: return "MismatchedNeuronCount";
    case Errc::kDuplicateTask: return "DuplicateTask";
    case Errc::kUnknownTask: return "UnknownTask";
    case Errc::kAllZeroScores: return "AllZeroScores";
    case Errc::kThresholdUnreachable: return "ThresholdUnreachable";
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kMissingTaskPolicy: return "MissingTaskPolicy";
    case Errc::kEmptyAttributeSet: return "EmptyAttributeSet";
    case Errc::kInvalidPolicy: return "InvalidPolicy";
    case Errc::kMissingSubsetKey: return "MissingSubsetKey";
    case Errc::kSpanTooLarge: return "SpanTooLarge";
    case Errc::kUnsupportedDtype: return "UnsupportedDtype";
    case Errc::kRangesOverlap: return "RangesOverlap";
    case Errc::kKeyMapLengthMismatch: return "KeyMapLengthMismatch";
    case Errc::kArtifactMismatch: return "ArtifactMismatch";
    case Errc::kBadMasterKey: return "BadMasterKey";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kIo: return "Io";
    case Errc::kCrypto: return "Crypto";
  }
  return "Unknown";
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIo, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(Errc::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::kIo, "cannot rename onto " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

}  // namespace neuronlock
