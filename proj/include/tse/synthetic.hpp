// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Procedural voiced-speech corpus for tests and desk-scale runs when no
// recorded corpus is available. Each speaker has a fixed pitch range,
// vocal-tract scale and spectral tilt; utterances are sequences of
// vowel-like syllables rendered by additive synthesis under a formant
// envelope.

#include <array>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "tse/core.hpp"
#include "tse/wav.hpp"

namespace tse::synthetic {

struct Voice {
  double f0 = 120.0;         // Hz
  double tract_scale = 1.0;  // multiplies formant frequencies
  double tilt = 1.0;         // harmonic amplitude ~ h^-tilt
  double vibrato_hz = 5.0;
  double vibrato_depth = 0.01;
  double breathiness = 0.01;
};

inline Voice make_voice(uint64_t seed) {
  Rng rng(seed);
  Voice v;
  v.f0 = std::exp(rng.uniform(std::log(85.0), std::log(280.0)));
  v.tract_scale = rng.uniform(0.85, 1.2);
  v.tilt = rng.uniform(0.7, 1.4);
  v.vibrato_hz = rng.uniform(4.0, 6.5);
  v.vibrato_depth = rng.uniform(0.005, 0.02);
  v.breathiness = rng.uniform(0.002, 0.02);
  return v;
}

namespace detail {

// (F1, F2, F3) of a handful of vowels, Hz.
inline constexpr std::array<std::array<double, 3>, 6> kVowels{{
    {730, 1090, 2440}, {270, 2290, 3010}, {530, 1840, 2480},
    {570, 840, 2410},  {300, 870, 2240},  {640, 1190, 2390},
}};

inline double formant_gain(double f, const std::array<double, 3>& formants, double scale) {
  double g = 0.05;
  const std::array<double, 3> bw{90.0, 110.0, 170.0};
  for (int i = 0; i < 3; ++i) {
    const double fc = formants[i] * scale;
    const double d = (f - fc) / bw[i];
    g += 1.0 / (1.0 + d * d) / (1.0 + i);
  }
  return g;
}

}  // namespace detail

/// Renders `seconds` of speech-like audio for `voice` at `rate`.
inline Waveform render_utterance(const Voice& voice, double seconds, int rate, uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> out(n, 0.0);
  const double nyquist_guard = 0.45 * rate;
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.0, 0.1) * rate);
  double phase_base = 0.0;
  while (pos < n) {
    const auto syl = static_cast<std::size_t>(rng.uniform(0.12, 0.32) * rate);
    const auto& vowel = detail::kVowels[rng.below(detail::kVowels.size())];
    const auto& next_vowel = detail::kVowels[rng.below(detail::kVowels.size())];
    const double pitch_a = voice.f0 * rng.uniform(0.85, 1.2);
    const double pitch_b = voice.f0 * rng.uniform(0.85, 1.2);
    const double loud = rng.uniform(0.6, 1.0);
    const int n_harm = std::max(1, int(std::min(4000.0, nyquist_guard) / std::max(pitch_a, pitch_b)));
    std::vector<double> amp_a(n_harm), amp_b(n_harm);
    for (int h = 1; h <= n_harm; ++h) {
      amp_a[h - 1] = detail::formant_gain(h * pitch_a, vowel, voice.tract_scale) / std::pow(h, voice.tilt);
      amp_b[h - 1] = detail::formant_gain(h * pitch_b, next_vowel, voice.tract_scale) / std::pow(h, voice.tilt);
    }
    double phase = phase_base;
    for (std::size_t k = 0; k < syl && pos + k < n; ++k) {
      const double u = double(k) / syl;
      const double env = std::sin(M_PI * u);
      const double t = double(pos + k) / rate;
      const double f = (pitch_a + (pitch_b - pitch_a) * u) *
                       (1.0 + voice.vibrato_depth * std::sin(2 * M_PI * voice.vibrato_hz * t));
      phase += 2 * M_PI * f / rate;
      double s = 0.0;
      for (int h = 1; h <= n_harm; ++h) {
        if (h * f > nyquist_guard) break;
        s += (amp_a[h - 1] + (amp_b[h - 1] - amp_a[h - 1]) * u) * std::sin(h * phase);
      }
      out[pos + k] += loud * env * (s + voice.breathiness * rng.normal());
    }
    phase_base = phase;
    pos += syl + static_cast<std::size_t>(rng.uniform(0.02, 0.12) * rate);
  }
  const double p = peak(out);
  if (p > 0) {
    for (double& v : out) v *= 0.5 / p;
  }
  return Waveform(std::move(out), rate);
}

/// Writes `<dir>/spkNN/uttNN.wav` for a synthetic multi-speaker corpus.
inline void write_corpus(const std::filesystem::path& dir, int n_speakers, int utts_per_speaker,
                         double seconds, uint64_t seed, int rate = kEncoderRate) {
  for (int s = 0; s < n_speakers; ++s) {
    const Voice voice = make_voice(derive_seed(seed, 1000 + s));
    std::ostringstream spk;
    spk << "spk" << std::setw(2) << std::setfill('0') << s;
    const auto spk_dir = dir / spk.str();
    std::filesystem::create_directories(spk_dir);
    for (int u = 0; u < utts_per_speaker; ++u) {
      std::ostringstream utt;
      utt << "utt" << std::setw(2) << std::setfill('0') << u << ".wav";
      wav::write(spk_dir / utt.str(),
                 render_utterance(voice, seconds, rate, derive_seed(seed, 100000 + 1000 * s + u)));
    }
  }
}

}  // namespace tse::synthetic
