// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace tse;
using namespace tse::testing;

// --- si_snr / wrql ---------------------------------------------------------

TEST(SiSnr, HandDerivedZeroDb) {
  // <s_hat, s> = 2, s_target = s / 2, |s_target|^2 = |e_noise|^2 = 1.
  const Waveform s({1, -1, 1, -1}, 8000), e({1, -1, 0, 0}, 8000);
  EXPECT_NEAR(si_snr(s, e), 0.0, 1e-6);
  auto t = torch::tensor({1.0, -1.0, 1.0, -1.0}, f64()).view({1, 4});
  auto h = torch::tensor({1.0, -1.0, 0.0, 0.0}, f64()).view({1, 4});
  EXPECT_NEAR(wrql(t, h).item<double>(), 0.0, 1e-6);
}

TEST(SiSnr, PerfectEstimateHitsCap) {
  auto s = torch::randn({3, 500}, f64());
  EXPECT_TRUE(torch::equal(si_snr(s, s), torch::full({3}, kSnrCapDb, f64())));
  EXPECT_EQ(wrql(s, s).item<double>(), -kSnrCapDb);
}

TEST(SiSnr, MatchesOracle) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 100; ++i) {
    auto s = random_vector(gen, 64 + i);
    auto e = random_vector(gen, 64 + i);
    const double got = si_snr(Waveform(s, 8000), Waveform(e, 8000));
    EXPECT_NEAR(got, si_snr_oracle(s, e), 1e-6);
  }
}

TEST(SiSnr, ScaleAndOffsetInvariance) {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 50; ++i) {
    auto s = torch::tensor(random_vector(gen, 400), f64());
    auto e = s + torch::tensor(random_vector(gen, 400, 0.7), f64());
    const double base = si_snr(s, e).item<double>();
    for (double a : {0.1, 1.0, 10.0}) {
      for (double b : {0.0, 0.3}) EXPECT_NEAR(si_snr(s, a * e + b).item<double>(), base, 1e-6);
    }
  }
}

TEST(SiSnr, Errors) {
  EXPECT_THROW(si_snr(torch::zeros({10}, f64()), torch::ones({10}, f64())), InvalidInput);
  EXPECT_THROW(si_snr(torch::ones({10}, f64()), torch::ones({11}, f64())), InvalidInput);
  EXPECT_THROW(si_snr(Waveform({1, 2}, 8000), Waveform({1, 2, 3}, 8000)), InvalidInput);
}

// --- gradient checks -------------------------------------------------------

namespace {

void expect_gradients_match(const std::function<torch::Tensor()>& loss, torch::Tensor x, uint64_t seed,
                            std::size_t probes = 20) {
  if (x.grad().defined()) x.mutable_grad().zero_();
  loss().backward();
  const auto grad = x.grad().clone();
  std::mt19937_64 gen(seed);
  auto scalar = [&] {
    torch::NoGradGuard no_grad;
    return loss().item<double>();
  };
  for (auto idx : probe_indices(grad, probes, gen)) {
    auto p = probe_gradient(scalar, x, grad, idx);
    EXPECT_LT(p.rel_error, 1e-3) << "index " << idx << " analytic " << p.analytic << " numeric " << p.numeric;
  }
}

}  // namespace

TEST(GradCheck, Wrql) {
  torch::manual_seed(0);
  auto s = torch::randn({2, 300}, f64());
  auto e = (s + 0.5 * torch::randn({2, 300}, f64())).requires_grad_(true);
  expect_gradients_match([&] { return wrql(s, e); }, e, 1);
}

TEST(GradCheck, Secl) {
  torch::manual_seed(1);
  SpeakerEncoder enc(SpeakerEncoderConfig{16, 2, 256});
  enc->to(torch::kFloat64);
  auto ref = torch::randn({2, 1600}, f64()) * 0.3;
  auto est = (torch::randn({2, 800}, f64()) * 0.3).requires_grad_(true);
  expect_gradients_match([&] { return secl(enc, ref, est); }, est, 2);
  // Gradient into theta through both embedding branches.
  auto w = enc->named_parameters()["proj.weight"];
  expect_gradients_match([&] { return secl(enc, ref, est.detach()); }, w, 3);
}

TEST(GradCheck, Icl) {
  torch::manual_seed(2);
  SeparatorConfig cfg = tiny_separator();
  WaveformEncoder enc(cfg);
  WaveformDecoder dec(cfg);
  enc->to(torch::kFloat64);
  dec->to(torch::kFloat64);
  auto m = torch::rand({1, 64, 20}, f64()).requires_grad_(true);
  expect_gradients_match([&] { return icl(m, enc, dec); }, m, 4);
  expect_gradients_match([&] { return icl(m.detach(), enc, dec); }, dec->deconv()->weight, 5);
}

TEST(GradCheck, GenAdvLoss) {
  torch::manual_seed(3);
  MultiScaleDiscriminator d(DiscriminatorConfig{8, 0.1});
  d->to(torch::kFloat64);
  auto est = (torch::randn({2, 600}, f64()) * 0.3).requires_grad_(true);
  expect_gradients_match([&] { return gen_adv_loss(d, est); }, est, 6);
  for (auto& p : d->parameters()) {
    EXPECT_TRUE(p.requires_grad());
    EXPECT_FALSE(p.grad().defined());
  }
}

// --- secl cases --------------------------------------------------------------

TEST(Secl, IdenticalWaveformGivesZero) {
  torch::manual_seed(4);
  SpeakerEncoder enc(SpeakerEncoderConfig{16, 1, 256});
  enc->to(torch::kFloat64);
  auto est = torch::randn({1, 800}, f64()) * 0.3;
  Resampler up(8000, 16000);
  EXPECT_NEAR(secl(enc, up(est), est).item<double>(), 0.0, 1e-12);
}

TEST(Secl, EmbeddingDistanceCases) {
  auto e1 = torch::zeros({1, 256}, f64());
  e1[0][0] = 1;
  auto e2 = torch::zeros({1, 256}, f64());
  e2[0][1] = 1;
  EXPECT_DOUBLE_EQ((e1 - e2).pow(2).sum().item<double>(), 2.0);
  EXPECT_DOUBLE_EQ((e1 + e1).pow(2).sum().item<double>(), 4.0);
}

// --- icl ---------------------------------------------------------------------

TEST(Icl, ZeroLatentZeroBiases) {
  SeparatorConfig cfg = tiny_separator();
  WaveformEncoder enc(cfg);
  WaveformDecoder dec(cfg);
  enc->to(torch::kFloat64);
  dec->to(torch::kFloat64);
  {
    torch::NoGradGuard g;
    enc->conv()->bias.zero_();
    dec->deconv()->bias.zero_();
  }
  EXPECT_EQ(icl(torch::zeros({1, 64, 10}, f64()), enc, dec).item<double>(), 0.0);
}

TEST(Icl, IdentityRoundTripWeights) {
  // 8 channels, kernel 16, stride 8. Channel c is written to and read from
  // offset c of its frame; kernel taps 8..15 are zero so frames do not mix.
  SeparatorConfig cfg;
  cfg.n_filters = 8;
  WaveformEncoder enc(cfg);
  WaveformDecoder dec(cfg);
  enc->to(torch::kFloat64);
  dec->to(torch::kFloat64);
  {
    torch::NoGradGuard g;
    enc->conv()->weight.zero_();
    enc->conv()->bias.zero_();
    dec->deconv()->weight.zero_();
    dec->deconv()->bias.zero_();
    for (int c = 0; c < 8; ++c) {
      enc->conv()->weight[c][0][c] = 1.0;
      dec->deconv()->weight[c][0][c] = 1.0;
    }
  }
  auto m = torch::rand({2, 8, 30}, f64());
  EXPECT_EQ(icl(m, enc, dec).item<double>(), 0.0);
}

TEST(Icl, MatchesOracle) {
  for (int draw = 0; draw < 50; ++draw) {
    torch::manual_seed(100 + draw);
    SeparatorConfig cfg = tiny_separator();
    cfg.n_filters = 8;
    WaveformEncoder enc(cfg);
    WaveformDecoder dec(cfg);
    enc->to(torch::kFloat64);
    dec->to(torch::kFloat64);
    auto m = torch::rand({1, 8, 12}, f64()) * (1 + draw % 3);
    const double got = icl(m, enc, dec).item<double>();
    const double want = icl_oracle(enc->conv()->weight, enc->conv()->bias, dec->deconv()->weight,
                                   dec->deconv()->bias, m[0], 8);
    EXPECT_NEAR(got, want, 1e-6);
  }
}

// --- adversarial -------------------------------------------------------------

TEST(Adversarial, FixedPoints) {
  auto ones = torch::ones({4, 3}, f64()), zeros = torch::zeros({4, 3}, f64());
  EXPECT_EQ(disc_loss(ones, zeros).item<double>(), 0.0);
  EXPECT_EQ(disc_loss(0.5 * ones, 0.5 * ones).item<double>(), 0.5);
  EXPECT_EQ(gen_adv_loss(ones).item<double>(), 0.0);
  EXPECT_EQ(gen_adv_loss(zeros).item<double>(), 1.0);
  EXPECT_EQ(gen_adv_loss(-ones).item<double>(), 4.0);
  auto r = torch::randn({5, 3}, f64()), f = torch::randn({5, 3}, f64());
  EXPECT_GE(disc_loss(r, f).item<double>(), 0.0);
  EXPECT_GE(gen_adv_loss(f).item<double>(), 0.0);
}

TEST(Adversarial, DiscLossDoesNotReachGenerator) {
  MultiScaleDiscriminator d(DiscriminatorConfig{8, 0.1});
  d->to(torch::kFloat64);
  auto est = torch::randn({1, 500}, f64()).requires_grad_(true);
  disc_loss(d, torch::randn({1, 500}, f64()), est).backward();
  EXPECT_FALSE(est.grad().defined());
  bool any = false;
  for (auto& p : d->parameters()) any |= p.grad().defined();
  EXPECT_TRUE(any);
}

// --- total loss --------------------------------------------------------------

TEST(TotalLoss, WeightedSum) {
  LossParts p;
  p.wrql = torch::tensor(2.0, f64());
  p.secl = torch::tensor(0.5, f64());
  p.icl = torch::tensor(0.1, f64());
  p.adv_g = torch::tensor(0.4, f64());
  auto v = total_generator_loss(p, LossWeights{});
  EXPECT_NEAR(v.value(), 3.0, 1e-15);
  EXPECT_EQ(v.breakdown.size(), 4u);
  auto base = total_generator_loss(p, LossWeights(1, 0, 0, 0));
  EXPECT_EQ(base.value(), 2.0);
  EXPECT_THROW(LossWeights(1, -1, 0, 0), InvalidInput);
}

TEST(TotalLoss, NonFiniteComponentIsNamed) {
  LossParts p;
  p.wrql = torch::tensor(1.0, f64());
  p.icl = torch::tensor(std::numeric_limits<double>::quiet_NaN(), f64());
  try {
    total_generator_loss(p, LossWeights{});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("icl"), std::string::npos);
  }
}
