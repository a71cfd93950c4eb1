// Copyright 2026 The resloco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian binary containers with a magic header, a format version and
// a CRC32 trailer. Shared by the kernel model and policy checkpoints.

#ifndef RESLOCO_BINIO_HPP_
#define RESLOCO_BINIO_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace resloco::io {

enum class FormatError {
  kIo,
  kBadMagic,
  kVersionMismatch,
  kChecksumMismatch,
  kTruncated,
  kVariantMismatch,
  kCorrupt,
};

const char* to_string(FormatError e);

class FormatException : public std::runtime_error {
 public:
  FormatException(FormatError code, const std::string& what) : std::runtime_error(what), code_(code) {}
  FormatError code() const { return code_; }

 private:
  FormatError code_;
};

std::uint32_t crc32(const std::uint8_t* data, std::size_t n);

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void f32s(const float* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) f32(p[i]);
  }
  const std::vector<std::uint8_t>& data() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t n) : p_(data), n_(n) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  void f32s(float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f32();
  }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  void need(std::size_t k) const;
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

/// Writes magic, version, payload and a CRC32 over everything before it.
void write_container(const std::string& path, std::string_view magic, std::uint32_t version,
                     const std::vector<std::uint8_t>& payload);

/// Reads and verifies a container; returns the payload. Checks run in the
/// order magic, version, checksum, so a truncated file reports a checksum
/// mismatch.
std::vector<std::uint8_t> read_container(const std::string& path, std::string_view magic, std::uint32_t version);

}  // namespace resloco::io

#endif  // RESLOCO_BINIO_HPP_
