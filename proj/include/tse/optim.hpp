// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "tse/core.hpp"

namespace tse {

enum class WeightDecayMode {
  Coupled,    // L2 term added to the gradient (Adam)
  Decoupled,  // parameters shrunk directly (AdamW)
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  WeightDecayMode decay_mode = WeightDecayMode::Coupled;
};

/// Adam / AdamW with explicit, serialisable state. Update rule matches
/// torch.optim.Adam and torch.optim.AdamW.
class Adam {
 public:
  Adam(std::vector<torch::Tensor> params, AdamOptions opts)
      : params_(std::move(params)), opts_(opts) {
    for (const auto& p : params_) {
      exp_avg_.push_back(torch::zeros_like(p));
      exp_avg_sq_.push_back(torch::zeros_like(p));
    }
  }

  const AdamOptions& options() const { return opts_; }
  int64_t step_count() const { return step_; }
  void set_step_count(int64_t s) { step_ = s; }
  std::vector<torch::Tensor>& params() { return params_; }
  std::vector<torch::Tensor>& exp_avg() { return exp_avg_; }
  std::vector<torch::Tensor>& exp_avg_sq() { return exp_avg_sq_; }

  void zero_grad() {
    for (auto& p : params_) {
      if (p.grad().defined()) p.mutable_grad().zero_();
    }
  }

  void step() {
    torch::NoGradGuard no_grad;
    ++step_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, double(step_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, double(step_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      if (!p.grad().defined()) continue;
      auto g = p.grad();
      if (opts_.weight_decay != 0.0) {
        if (opts_.decay_mode == WeightDecayMode::Coupled) {
          g = g + opts_.weight_decay * p;
        } else {
          p.mul_(1.0 - opts_.lr * opts_.weight_decay);
        }
      }
      exp_avg_[i].mul_(opts_.beta1).add_(g, 1.0 - opts_.beta1);
      exp_avg_sq_[i].mul_(opts_.beta2).addcmul_(g, g, 1.0 - opts_.beta2);
      auto denom = (exp_avg_sq_[i].sqrt() / std::sqrt(bc2)).add_(opts_.eps);
      p.addcdiv_(exp_avg_[i], denom, -opts_.lr / bc1);
    }
  }

 private:
  std::vector<torch::Tensor> params_;
  AdamOptions opts_;
  std::vector<torch::Tensor> exp_avg_;
  std::vector<torch::Tensor> exp_avg_sq_;
  int64_t step_ = 0;
};

/// Scales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
inline double clip_grad_norm(const std::vector<torch::Tensor>& params, double max_norm) {
  torch::NoGradGuard no_grad;
  double total = 0.0;
  for (const auto& p : params) {
    if (p.grad().defined()) total += p.grad().to(torch::kFloat64).pow(2).sum().item<double>();
  }
  total = std::sqrt(total);
  if (max_norm > 0.0 && total > max_norm) {
    const double scale = max_norm / (total + 1e-6);
    for (const auto& p : params) {
      if (p.grad().defined()) p.grad().mul_(scale);
    }
  }
  return total;
}

}  // namespace tse
