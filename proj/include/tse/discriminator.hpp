// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "tse/core.hpp"

namespace tse {

struct DiscriminatorConfig {
  int base_channels = 64;
  double leaky_slope = 0.1;

  static DiscriminatorConfig toy() { return {16, 0.1}; }

  void validate() const {
    TSE_REQUIRE(base_channels > 0 && base_channels % 8 == 0,
                "discriminator base_channels must be a positive multiple of 8");
  }
};

/// One waveform discriminator: strided grouped convolutions with leaky
/// ReLU, a pointwise head and temporal mean pooling to a scalar score.
class ScaleDiscriminatorImpl : public torch::nn::Module {
 public:
  struct Layer {
    int in, out, kernel, stride, groups;
  };

  static std::array<Layer, 4> layers(int b) {
    return {{{1, b, 15, 1, 1}, {b, 2 * b, 41, 4, 4}, {2 * b, 4 * b, 41, 4, 16}, {4 * b, 4 * b, 5, 1, 1}}};
  }

  /// Input samples seen by one output of the stack.
  static int64_t receptive_field(int b) {
    int64_t rf = 1, jump = 1;
    for (const auto& l : layers(b)) {
      rf += (l.kernel - 1) * jump;
      jump *= l.stride;
    }
    return rf + 2 * jump;  // head, kernel 3
  }

  ScaleDiscriminatorImpl(const DiscriminatorConfig& cfg) : slope_(cfg.leaky_slope) {
    int i = 0;
    for (const auto& l : layers(cfg.base_channels)) {
      convs_.push_back(register_module(
          "conv" + std::to_string(i++),
          torch::nn::Conv1d(torch::nn::Conv1dOptions(l.in, l.out, l.kernel)
                                .stride(l.stride)
                                .groups(l.groups)
                                .padding(l.kernel / 2))));
    }
    head_ = register_module(
        "head", torch::nn::Conv1d(torch::nn::Conv1dOptions(4 * cfg.base_channels, 1, 3).padding(1)));
  }

  /// [B, t] -> [B]
  torch::Tensor forward(const torch::Tensor& wave) {
    auto x = wave.unsqueeze(1);
    for (auto& c : convs_) x = torch::leaky_relu(c->forward(x), slope_);
    return head_->forward(x).mean({1, 2});
  }

 private:
  double slope_;
  std::vector<torch::nn::Conv1d> convs_;
  torch::nn::Conv1d head_{nullptr};
};
TORCH_MODULE(ScaleDiscriminator);

/// Three discriminators at x1, x2 and x4 average-pooled resolutions.
class MultiScaleDiscriminatorImpl : public torch::nn::Module {
 public:
  static constexpr int kScales = 3;

  explicit MultiScaleDiscriminatorImpl(DiscriminatorConfig cfg = {})
      : cfg_((cfg.validate(), cfg)),
        pool_(torch::nn::AvgPool1dOptions(4).stride(2).padding(2)) {
    for (int s = 0; s < kScales; ++s) {
      discs_.push_back(register_module("scale" + std::to_string(s), ScaleDiscriminator(cfg_)));
    }
  }

  int64_t min_length() const { return ScaleDiscriminatorImpl::receptive_field(cfg_.base_channels); }

  /// [B, t] at 8 kHz -> scores [B, 3] (unbounded).
  torch::Tensor forward(const torch::Tensor& wave) {
    TSE_REQUIRE(wave.dim() == 2, "discriminator expects [B, t]");
    TSE_REQUIRE(wave.size(1) >= min_length(), "input of ", wave.size(1),
                " samples is shorter than the discriminator receptive field (", min_length(), ")");
    std::vector<torch::Tensor> scores;
    auto x = wave;
    for (int s = 0; s < kScales; ++s) {
      if (s > 0) x = pool_->forward(x.unsqueeze(1)).squeeze(1);
      scores.push_back(discs_[s]->forward(x));
    }
    return torch::stack(scores, 1);
  }

 private:
  DiscriminatorConfig cfg_;
  torch::nn::AvgPool1d pool_;
  std::vector<ScaleDiscriminator> discs_;
};
TORCH_MODULE(MultiScaleDiscriminator);

/// Disables gradient tracking on a module's parameters for its lifetime.
class FreezeGuard {
 public:
  explicit FreezeGuard(torch::nn::Module& m) {
    for (auto& p : m.parameters()) {
      saved_.emplace_back(p, p.requires_grad());
      p.set_requires_grad(false);
    }
  }
  ~FreezeGuard() {
    for (auto& [p, flag] : saved_) p.set_requires_grad(flag);
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<std::pair<torch::Tensor, bool>> saved_;
};

}  // namespace tse
