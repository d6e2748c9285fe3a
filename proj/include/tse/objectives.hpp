// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "tse/core.hpp"
#include "tse/discriminator.hpp"
#include "tse/resample.hpp"
#include "tse/separator.hpp"
#include "tse/speaker_encoder.hpp"

namespace tse {

inline constexpr double kSnrEps = 1e-8;
inline constexpr double kSnrCapDb = 80.0;

// ---------------------------------------------------------------------------
// Reconstruction quality

/// Scale-invariant SNR in dB for [t] or [B, t] tensors (per row). Both
/// signals are made zero-mean first. The ratio is regularised with eps
/// and clamped to +-80 dB so the perfect-estimate case stays finite.
inline torch::Tensor si_snr(const torch::Tensor& target, const torch::Tensor& estimate) {
  TSE_REQUIRE(target.sizes() == estimate.sizes(), "si_snr: shape mismatch ", target.sizes(),
              " vs ", estimate.sizes());
  auto s = target - target.mean(-1, true);
  auto e = estimate - estimate.mean(-1, true);
  auto s_energy = s.pow(2).sum(-1, true);
  TSE_REQUIRE((s_energy > 0).all().item<bool>(), "si_snr: target has zero energy");
  auto s_target = (e * s).sum(-1, true) / s_energy * s;
  auto e_noise = e - s_target;
  auto ratio = (s_target.pow(2).sum(-1) + kSnrEps) / (e_noise.pow(2).sum(-1) + kSnrEps);
  return (10.0 * torch::log10(ratio)).clamp(-kSnrCapDb, kSnrCapDb);
}

inline double si_snr(const Waveform& target, const Waveform& estimate) {
  TSE_REQUIRE(target.size() == estimate.size(), "si_snr: length mismatch ", target.size(), " vs ",
              estimate.size());
  return si_snr(target.to_tensor(), estimate.to_tensor()).item<double>();
}

/// Waveform reconstruction quality loss: negative SI-SNR, batch mean.
inline torch::Tensor wrql(const torch::Tensor& target, const torch::Tensor& estimate) {
  return -si_snr(target, estimate).mean();
}

// ---------------------------------------------------------------------------
// Speaker embedding consistency

/// ||SE(r) - SE(up(s_hat))||^2, batch mean. `estimate8k` is upsampled to
/// the encoder rate with the (differentiable) band-limited resampler, so
/// gradients reach both the encoder and the separator.
inline torch::Tensor secl(SpeakerEncoder& encoder, const torch::Tensor& reference16k,
                          const torch::Tensor& estimate8k) {
  static const Resampler up(kSeparatorRate, kEncoderRate);
  TSE_REQUIRE(reference16k.dim() == 2 && estimate8k.dim() == 2 &&
                  reference16k.size(0) == estimate8k.size(0),
              "secl expects batched [B, n] inputs of equal batch size");
  auto e_ref = encoder->forward(reference16k);
  auto e_est = encoder->forward(up(estimate8k));
  return (e_ref - e_est).pow(2).sum(1).mean();
}

// ---------------------------------------------------------------------------
// Encoder/decoder inverse consistency

/// mean((m - WE(WD(m)))^2) over all entries.
inline torch::Tensor icl(const torch::Tensor& masked, WaveformEncoder& encoder,
                         WaveformDecoder& decoder) {
  auto round_trip = encoder->forward(decoder->forward(masked));
  if (round_trip.sizes() != masked.sizes()) {
    throw NumericalError(detail::concat("icl: round trip changed shape ", masked.sizes(), " -> ",
                                        round_trip.sizes()));
  }
  return (masked - round_trip).pow(2).mean();
}

// ---------------------------------------------------------------------------
// Least-squares adversarial losses on discriminator scores [B, scales]

inline torch::Tensor disc_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores) {
  return ((real_scores - 1.0).pow(2) + fake_scores.pow(2)).mean();
}

inline torch::Tensor gen_adv_loss(const torch::Tensor& fake_scores) {
  return (fake_scores - 1.0).pow(2).mean();
}

/// Discriminator objective; the estimate is detached so no gradient
/// reaches the generator.
inline torch::Tensor disc_loss(MultiScaleDiscriminator& d, const torch::Tensor& target,
                               const torch::Tensor& estimate) {
  return disc_loss(d->forward(target), d->forward(estimate.detach()));
}

/// Generator objective; discriminator parameters are frozen while the
/// graph is built, so gradients only flow back through the estimate.
inline torch::Tensor gen_adv_loss(MultiScaleDiscriminator& d, const torch::Tensor& estimate) {
  FreezeGuard frozen(*d);
  return gen_adv_loss(d->forward(estimate));
}

// ---------------------------------------------------------------------------
// Weighted sum

struct LossWeights {
  double wrql = 1.0;
  double secl = 1.0;
  double icl = 1.0;
  double adv_g = 1.0;

  LossWeights() = default;
  LossWeights(double w, double s, double i, double g) : wrql(w), secl(s), icl(i), adv_g(g) {
    validate();
  }

  void validate() const {
    TSE_REQUIRE(wrql >= 0 && secl >= 0 && icl >= 0 && adv_g >= 0,
                "loss weights must be non-negative");
  }
};

/// Component losses; undefined tensors are components that were not
/// computed (their toggle is off).
struct LossParts {
  torch::Tensor wrql;
  torch::Tensor secl;
  torch::Tensor icl;
  torch::Tensor adv_g;
};

struct LossValue {
  torch::Tensor total;
  /// Unweighted component values, keyed wrql/secl/icl/adv_g.
  std::map<std::string, double> breakdown;
  std::map<std::string, double> weights;

  double value() const { return total.item<double>(); }
};

inline LossValue total_generator_loss(const LossParts& parts, const LossWeights& w) {
  w.validate();
  LossValue out;
  const std::pair<const char*, std::pair<const torch::Tensor*, double>> items[] = {
      {"wrql", {&parts.wrql, w.wrql}},
      {"secl", {&parts.secl, w.secl}},
      {"icl", {&parts.icl, w.icl}},
      {"adv_g", {&parts.adv_g, w.adv_g}},
  };
  for (const auto& [name, pw] : items) {
    const auto& [tensor, weight] = pw;
    if (!tensor->defined()) continue;
    const double v = tensor->item<double>();
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite loss component: ") + name);
    out.breakdown[name] = v;
    out.weights[name] = weight;
    auto term = weight * *tensor;
    out.total = out.total.defined() ? out.total + term : term;
  }
  TSE_REQUIRE(out.total.defined(), "no loss components were provided");
  return out;
}

}  // namespace tse
