// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Self-describing binary container for named tensors plus a JSON header.
//
//   magic      8 bytes  "TSECKPT\0"
//   version    u32
//   header     u64 length + UTF-8 JSON
//   count      u32
//   tensors    count x { u32 name_len, name, u8 dtype, u32 ndim,
//                        i64 dims[ndim], u64 nbytes, raw little-endian data }
//   checksum   u64 FNV-1a over every preceding byte
//   end magic  8 bytes  "TSEEND\0\0"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tse/core.hpp"

namespace tse::ckpt {

inline constexpr char kMagic[8] = {'T', 'S', 'E', 'C', 'K', 'P', 'T', '\0'};
inline constexpr char kEndMagic[8] = {'T', 'S', 'E', 'E', 'N', 'D', '\0', '\0'};
inline constexpr uint32_t kVersion = 1;

struct Container {
  nlohmann::json header;
  std::vector<std::pair<std::string, torch::Tensor>> tensors;

  const torch::Tensor& at(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
      if (n == name) return t;
    }
    throw IoError("checkpoint has no tensor '" + name + "'");
  }
};

inline uint64_t fnv1a(const char* data, std::size_t n) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline uint8_t dtype_code(torch::Dtype d) {
  switch (d) {
    case torch::kFloat32: return 0;
    case torch::kFloat64: return 1;
    case torch::kInt64: return 2;
    case torch::kUInt8: return 3;
    default: throw InvalidInput("checkpoint: unsupported tensor dtype");
  }
}

inline torch::Dtype dtype_from_code(uint8_t c) {
  switch (c) {
    case 0: return torch::kFloat32;
    case 1: return torch::kFloat64;
    case 2: return torch::kInt64;
    case 3: return torch::kUInt8;
    default: throw IoError("checkpoint: unknown dtype code " + std::to_string(c));
  }
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (n > limit_ - pos_) throw IoError("checkpoint is truncated or corrupt");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode(const Container& c) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  std::string out(kMagic, 8);
  detail::put<uint32_t>(out, kVersion);
  const std::string header = c.header.dump();
  detail::put<uint64_t>(out, header.size());
  out += header;
  detail::put<uint32_t>(out, static_cast<uint32_t>(c.tensors.size()));
  for (const auto& [name, tensor] : c.tensors) {
    auto t = tensor.detach().cpu().contiguous();
    detail::put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out += name;
    detail::put<uint8_t>(out, detail::dtype_code(t.scalar_type()));
    detail::put<uint32_t>(out, static_cast<uint32_t>(t.dim()));
    for (auto d : t.sizes()) detail::put<int64_t>(out, d);
    const uint64_t nbytes = t.numel() * t.element_size();
    detail::put<uint64_t>(out, nbytes);
    out.append(static_cast<const char*>(t.data_ptr()), nbytes);
  }
  detail::put<uint64_t>(out, fnv1a(out.data(), out.size()));
  out.append(kEndMagic, 8);
  return out;
}

inline Container decode(const std::string& bytes) {
  constexpr std::size_t kTrailer = 16;
  if (bytes.size() < 8 + 4 + 8 + 4 + kTrailer) throw IoError("checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw IoError("not a tse checkpoint (bad magic)");
  if (std::memcmp(bytes.data() + bytes.size() - 8, kEndMagic, 8) != 0) {
    throw IoError("checkpoint is truncated (missing end marker)");
  }
  const std::size_t body = bytes.size() - kTrailer;
  uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (stored != fnv1a(bytes.data(), body)) throw IoError("checkpoint checksum mismatch");

  detail::Reader r(bytes, body);
  r.take(8);
  const auto version = r.get<uint32_t>();
  if (version != kVersion) {
    throw IoError("checkpoint schema version " + std::to_string(version) + " is not supported (expected " +
                  std::to_string(kVersion) + ")");
  }
  Container c;
  const auto header_len = r.get<uint64_t>();
  const char* header = r.take(header_len);
  try {
    c.header = nlohmann::json::parse(header, header + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  const auto count = r.get<uint32_t>();
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<uint32_t>();
    std::string name(r.take(name_len), name_len);
    const auto dtype = detail::dtype_from_code(r.get<uint8_t>());
    const auto ndim = r.get<uint32_t>();
    std::vector<int64_t> dims(ndim);
    for (auto& d : dims) d = r.get<int64_t>();
    const auto nbytes = r.get<uint64_t>();
    auto t = torch::empty(dims, torch::TensorOptions().dtype(dtype));
    if (static_cast<uint64_t>(t.numel() * t.element_size()) != nbytes) {
      throw IoError("checkpoint tensor '" + name + "' has inconsistent size");
    }
    std::memcpy(t.data_ptr(), r.take(nbytes), nbytes);
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (r.pos() != body) throw IoError("checkpoint has trailing bytes");
  return c;
}

inline void save(const std::filesystem::path& path, const Container& c) {
  const std::string bytes = encode(c);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

inline Container load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open checkpoint");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace tse::ckpt
