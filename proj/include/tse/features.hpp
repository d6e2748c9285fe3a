// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "tse/core.hpp"

namespace tse {

struct LogMelConfig {
  int sample_rate = kEncoderRate;
  int win_length = 400;  // 25 ms
  int hop_length = 160;  // 10 ms
  int n_fft = 512;
  int n_mels = 40;
  double f_min = 0.0;
  double f_max = 8000.0;
  double floor = 1e-6;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular HTK-scale filterbank, [n_mels, n_fft/2 + 1].
inline torch::Tensor mel_filterbank(const LogMelConfig& cfg) {
  const int n_bins = cfg.n_fft / 2 + 1;
  auto fb = torch::zeros({cfg.n_mels, n_bins}, torch::kFloat64);
  auto acc = fb.accessor<double, 2>();
  const double lo = hz_to_mel(cfg.f_min);
  const double hi = hz_to_mel(cfg.f_max);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (cfg.n_mels + 1));
  }
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
    for (int b = 0; b < n_bins; ++b) {
      const double f = double(b) * cfg.sample_rate / cfg.n_fft;
      double v = 0.0;
      if (f > l && f <= c) v = (f - l) / (c - l);
      else if (f > c && f < r) v = (r - f) / (r - c);
      acc[m][b] = v;
    }
  }
  return fb;
}

inline int64_t log_mel_frames(int64_t n_samples, const LogMelConfig& cfg = {}) {
  if (n_samples < cfg.win_length) return 0;
  return (n_samples - cfg.win_length) / cfg.hop_length + 1;
}

/// Differentiable log-mel front end. Input [n] or [B, n] at 16 kHz;
/// output [frames, n_mels] or [B, frames, n_mels].
class LogMel {
 public:
  explicit LogMel(LogMelConfig cfg = {})
      : cfg_(cfg),
        window_(torch::hann_window(cfg.win_length, /*periodic=*/true,
                                   torch::TensorOptions().dtype(torch::kFloat64))),
        filters_(mel_filterbank(cfg)) {}

  const LogMelConfig& config() const { return cfg_; }

  torch::Tensor operator()(const torch::Tensor& wave) const {
    TSE_REQUIRE(wave.dim() == 1 || wave.dim() == 2, "log-mel expects [n] or [B, n]");
    TSE_REQUIRE(wave.size(-1) >= cfg_.win_length, "log-mel needs at least ",
                cfg_.win_length, " samples, got ", wave.size(-1));
    auto frames = wave.unfold(-1, cfg_.win_length, cfg_.hop_length);
    frames = frames * window_.to(wave.dtype());
    auto spec = torch::fft::rfft(frames, cfg_.n_fft);
    // |X|^2 via real/imag parts keeps the gradient defined at zero.
    auto power = torch::view_as_real(spec).pow(2).sum(-1);
    auto mel = torch::matmul(power, filters_.to(wave.dtype()).t());
    return torch::log(mel + cfg_.floor);
  }

 private:
  LogMelConfig cfg_;
  torch::Tensor window_;
  torch::Tensor filters_;
};

/// Convenience wrapper on a Waveform; the waveform must be at 16 kHz.
inline torch::Tensor log_mel(const Waveform& w, const LogMelConfig& cfg = {}) {
  TSE_REQUIRE(w.sample_rate == cfg.sample_rate, "log-mel expects ", cfg.sample_rate,
              " Hz input, got ", w.sample_rate);
  return LogMel(cfg)(w.to_tensor(torch::kFloat64));
}

}  // namespace tse
