// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tse/core.hpp"

namespace tse::wav {

namespace detail {

inline uint32_t read_u32(const unsigned char* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}
inline uint16_t read_u16(const unsigned char* p) {
  return uint16_t(p[0] | (p[1] << 8));
}
inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}
inline void put_u16(std::string& out, uint16_t v) {
  out.push_back(char(v & 0xFF));
  out.push_back(char((v >> 8) & 0xFF));
}

}  // namespace detail

/// Maps [-1, 1] to int16 with rounding and saturation.
inline int16_t quantize(double v) {
  double s = std::round(std::clamp(v, -1.0, 1.0) * 32767.0);
  return static_cast<int16_t>(s);
}

inline double dequantize(int16_t v) { return static_cast<double>(v) / 32767.0; }

/// Decodes a 16-bit PCM mono RIFF/WAVE byte buffer.
inline Waveform decode(const std::string& bytes, const std::string& name) {
  auto fail = [&](const std::string& why) {
    return IoError(name + ": " + why);
  };
  if (bytes.size() < 12) throw fail("file too short for a RIFF header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  int channels = 0, rate = 0, bits = 0;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = p + pos;
    uint32_t len = detail::read_u32(chunk + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || body + 16 > bytes.size()) throw fail("truncated fmt chunk");
      uint16_t format = detail::read_u16(p + body);
      channels = detail::read_u16(p + body + 2);
      rate = static_cast<int>(detail::read_u32(p + body + 4));
      bits = detail::read_u16(p + body + 14);
      if (format != 1) throw fail("only PCM (format 1) is supported");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      if (channels != 1) throw fail("expected mono, got " + std::to_string(channels) + " channels");
      if (bits != 16) throw fail("expected 16-bit samples, got " + std::to_string(bits));
      if (!is_supported_rate(rate)) throw fail("unsupported sample rate " + std::to_string(rate));
      if (body + len > bytes.size()) throw fail("truncated data chunk");
      std::size_t n = len / 2;
      std::vector<double> samples(n);
      for (std::size_t i = 0; i < n; ++i) {
        samples[i] = dequantize(static_cast<int16_t>(detail::read_u16(p + body + 2 * i)));
      }
      return Waveform(std::move(samples), rate);
    }
    pos = body + len + (len & 1);
  }
  throw fail("no data chunk");
}

inline std::string encode(const Waveform& w) {
  TSE_REQUIRE(is_supported_rate(w.sample_rate), "unsupported sample rate ", w.sample_rate);
  const uint32_t data_bytes = static_cast<uint32_t>(w.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  detail::put_u32(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<uint32_t>(w.sample_rate));
  detail::put_u32(out, static_cast<uint32_t>(w.sample_rate * 2));
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out.append("data");
  detail::put_u32(out, data_bytes);
  for (double v : w.samples) {
    detail::put_u16(out, static_cast<uint16_t>(quantize(v)));
  }
  return out;
}

inline Waveform read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes, path.string());
}

/// Writes via a temporary file and rename so readers never see a partial file.
inline void write(const std::filesystem::path& path, const Waveform& w) {
  const std::string bytes = encode(w);
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

/// Round-trips samples through 16-bit quantization, i.e. what a reader
/// of the written file will see.
inline Waveform quantized(const Waveform& w) {
  Waveform q = w;
  for (double& v : q.samples) v = dequantize(quantize(v));
  return q;
}

}  // namespace tse::wav
