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

#include "resloco/binio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <zlib.h>

namespace resloco::io {

namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T out;
    auto* src = reinterpret_cast<const std::uint8_t*>(&v);
    auto* dst = reinterpret_cast<std::uint8_t*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  } else {
    return v;
  }
}

template <typename T>
void put(std::vector<std::uint8_t>& buf, T v) {
  const T le = to_little(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&le);
  buf.insert(buf.end(), p, p + sizeof(T));
}

}  // namespace

const char* to_string(FormatError e) {
  switch (e) {
    case FormatError::kIo: return "io";
    case FormatError::kBadMagic: return "bad-magic";
    case FormatError::kVersionMismatch: return "version-mismatch";
    case FormatError::kChecksumMismatch: return "checksum-mismatch";
    case FormatError::kTruncated: return "truncated";
    case FormatError::kVariantMismatch: return "variant-mismatch";
    case FormatError::kCorrupt: return "corrupt";
  }
  return "unknown";
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t n) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(::crc32(c, data, static_cast<uInt>(n)));
}

void ByteWriter::u32(std::uint32_t v) { put(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put(buf_, v); }
void ByteWriter::f32(float v) { put(buf_, std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { put(buf_, std::bit_cast<std::uint64_t>(v)); }

void ByteReader::need(std::size_t k) const {
  if (n_ - pos_ < k) throw FormatException(FormatError::kTruncated, "unexpected end of data");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return p_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, p_ + pos_, 4);
  pos_ += 4;
  return to_little(v);
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v;
  std::memcpy(&v, p_ + pos_, 8);
  pos_ += 8;
  return to_little(v);
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void write_container(const std::string& path, std::string_view magic, std::uint32_t version,
                     const std::vector<std::uint8_t>& payload) {
  ByteWriter w;
  w.bytes(magic);
  w.u32(version);
  std::vector<std::uint8_t> all = w.data();
  all.insert(all.end(), payload.begin(), payload.end());
  put(all, crc32(all.data(), all.size()));
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatException(FormatError::kIo, fmt::format("cannot open {} for writing", path));
  os.write(reinterpret_cast<const char*>(all.data()), static_cast<std::streamsize>(all.size()));
  if (!os) throw FormatException(FormatError::kIo, fmt::format("write failed: {}", path));
}

std::vector<std::uint8_t> read_container(const std::string& path, std::string_view magic, std::uint32_t version) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatException(FormatError::kIo, fmt::format("cannot open {}", path));
  std::vector<std::uint8_t> all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const std::size_t header = magic.size() + 4;
  if (all.size() < magic.size() || std::memcmp(all.data(), magic.data(), magic.size()) != 0) {
    throw FormatException(FormatError::kBadMagic, fmt::format("{}: not a {} file", path, magic));
  }
  if (all.size() < header + 4) throw FormatException(FormatError::kTruncated, fmt::format("{}: truncated", path));
  ByteReader hdr(all.data() + magic.size(), 4);
  const std::uint32_t found = hdr.u32();
  if (found != version) {
    throw FormatException(FormatError::kVersionMismatch,
                          fmt::format("{}: format version {} (expected {})", path, found, version));
  }
  ByteReader tail(all.data() + all.size() - 4, 4);
  const std::uint32_t stored = tail.u32();
  if (crc32(all.data(), all.size() - 4) != stored) {
    throw FormatException(FormatError::kChecksumMismatch, fmt::format("{}: checksum mismatch", path));
  }
  return {all.begin() + static_cast<std::ptrdiff_t>(header), all.end() - 4};
}

}  // namespace resloco::io
