// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tse {

/// Thrown when an input can never satisfy an operation's preconditions
/// (too short, wrong rate, wrong shape).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown for file-level failures: missing files, bad headers, corrupt
/// checkpoints.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when training or inference produces NaN/Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << std::forward<Args>(args));
  return os.str();
}
}  // namespace detail

#define TSE_REQUIRE(cond, ...)                                   \
  do {                                                           \
    if (!(cond)) {                                               \
      throw ::tse::InvalidInput(::tse::detail::concat(__VA_ARGS__)); \
    }                                                            \
  } while (0)

inline constexpr int kSeparatorRate = 8000;
inline constexpr int kEncoderRate = 16000;

inline bool is_supported_rate(int rate) {
  return rate == kSeparatorRate || rate == kEncoderRate;
}

/// Mono audio at 8 or 16 kHz. Samples are kept at 64-bit precision.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSeparatorRate;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate)
      : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  /// Enforces the type invariants: non-empty, finite, supported rate.
  void validate() const {
    TSE_REQUIRE(!samples.empty(), "waveform is empty");
    TSE_REQUIRE(is_supported_rate(sample_rate),
                "unsupported sample rate ", sample_rate);
    for (double v : samples) {
      TSE_REQUIRE(std::isfinite(v), "waveform contains non-finite samples");
    }
  }

  /// [n] tensor of the requested dtype.
  torch::Tensor to_tensor(torch::Dtype dtype = torch::kFloat64) const {
    auto t = torch::from_blob(const_cast<double*>(samples.data()),
                              {static_cast<int64_t>(samples.size())},
                              torch::kFloat64);
    return t.to(dtype).clone();
  }

  static Waveform from_tensor(const torch::Tensor& t, int rate) {
    TSE_REQUIRE(t.dim() == 1, "expected a 1-D tensor, got ", t.dim(), "-D");
    auto c = t.detach().to(torch::kFloat64).contiguous();
    const double* p = c.data_ptr<double>();
    return Waveform(std::vector<double>(p, p + c.numel()), rate);
  }

  bool operator==(const Waveform&) const = default;
};

inline double peak(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// Throws NumericalError naming `what` if `t` has any NaN/Inf entry.
inline void check_finite(const torch::Tensor& t, const std::string& what) {
  if (!torch::isfinite(t).all().item<bool>()) {
    throw NumericalError("non-finite values in " + what);
  }
}

/// splitmix64 finalizer; used to derive independent per-item RNG streams.
inline uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  return mix64(mix64(seed) ^ (index * 0xD1B54A32D192ED03ULL));
}

/// Small deterministic generator with bit-stable uniform draws; the
/// std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n;
  }
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

}  // namespace tse
