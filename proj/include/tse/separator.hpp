// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>

#include "tse/core.hpp"

namespace tse {

enum class Backbone { DualPath, ConvTasNet };

inline std::string to_string(Backbone b) {
  return b == Backbone::DualPath ? "dual_path" : "conv_tasnet";
}

inline Backbone backbone_from_string(const std::string& s) {
  if (s == "dual_path") return Backbone::DualPath;
  if (s == "conv_tasnet") return Backbone::ConvTasNet;
  throw InvalidInput("unknown backbone '" + s + "'");
}

struct SeparatorConfig {
  int n_filters = 64;
  int kernel = 16;
  int stride = 8;
  int embed_dim = 256;
  int n_heads = 8;
  int n_blocks = 6;
  int chunk = 100;
  int ff_hidden = 128;  // per direction of the feed-forward LSTM
  bool bidirectional = true;
  Backbone backbone = Backbone::DualPath;

  static SeparatorConfig toy() {
    SeparatorConfig c;
    c.n_blocks = 2;
    c.chunk = 16;
    c.ff_hidden = 64;
    return c;
  }

  void validate() const {
    TSE_REQUIRE(n_filters > 0 && kernel > 0 && stride > 0, "separator sizes must be positive");
    TSE_REQUIRE(kernel > stride, "kernel (", kernel, ") must exceed stride (", stride, ")");
    TSE_REQUIRE(n_heads > 0 && n_filters % n_heads == 0, "n_heads (", n_heads,
                ") must divide the model dimension (", n_filters, ")");
    TSE_REQUIRE(chunk >= 2 && chunk % 2 == 0, "chunk size must be even, got ", chunk);
    TSE_REQUIRE(n_blocks >= 1 && ff_hidden >= 1, "need at least one block and a positive ff size");
    TSE_REQUIRE(embed_dim > 0, "embed_dim must be positive");
  }

  int64_t frames(int64_t samples) const {
    return samples < kernel ? 0 : (samples - kernel) / stride + 1;
  }
  int64_t decoded_length(int64_t frames) const { return (frames - 1) * stride + kernel; }
};

// ---------------------------------------------------------------------------
// Segmentation into 50%-overlapping chunks

/// Number of chunks for a sequence of length T with chunk size C.
inline int64_t chunk_count(int64_t T, int64_t C) {
  const int64_t hop = C / 2;
  return (T + hop - 1) / hop + 1;
}

/// [B, N, T] -> [B, N, C, S]. The sequence is padded with `hop` zeros in
/// front and zeros at the back up to (S + 1) * hop, so every original
/// frame is covered by exactly two chunks.
inline torch::Tensor chunk(const torch::Tensor& x, int64_t C) {
  TSE_REQUIRE(x.dim() == 3, "chunk expects [B, N, T]");
  TSE_REQUIRE(C >= 2 && C % 2 == 0, "chunk size must be even, got ", C);
  const int64_t hop = C / 2;
  const int64_t T = x.size(2);
  const int64_t S = chunk_count(T, C);
  const int64_t padded = (S + 1) * hop;
  auto xp = torch::constant_pad_nd(x, {hop, padded - hop - T}, 0.0);
  return xp.unfold(2, C, hop).permute({0, 1, 3, 2});
}

/// Inverse of chunk(): overlap-adds [B, N, C, S] with a 0.5 weight and
/// crops back to T frames.
inline torch::Tensor overlap_add(const torch::Tensor& chunks, int64_t T) {
  TSE_REQUIRE(chunks.dim() == 4, "overlap_add expects [B, N, C, S]");
  const int64_t B = chunks.size(0), N = chunks.size(1), C = chunks.size(2), S = chunks.size(3);
  const int64_t hop = C / 2;
  TSE_REQUIRE(S == chunk_count(T, C), "chunk count ", S, " does not match T=", T);
  auto first = chunks.narrow(2, 0, hop).permute({0, 1, 3, 2}).reshape({B, N, S * hop});
  auto second = chunks.narrow(2, hop, hop).permute({0, 1, 3, 2}).reshape({B, N, S * hop});
  auto sum = torch::constant_pad_nd(first, {0, hop}, 0.0) +
             torch::constant_pad_nd(second, {hop, 0}, 0.0);
  return 0.5 * sum.narrow(2, hop, T);
}

// ---------------------------------------------------------------------------
// Transformer block with a recurrent feed-forward

class MultiHeadAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadAttentionImpl(int dim, int heads)
      : heads_(heads), in_proj_(dim, 3 * dim), out_proj_(dim, dim) {
    register_module("in_proj", in_proj_);
    register_module("out_proj", out_proj_);
  }

  /// [B, L, D] -> [B, L, D]
  torch::Tensor forward(const torch::Tensor& x) {
    const int64_t B = x.size(0), L = x.size(1), D = x.size(2);
    const int64_t hd = D / heads_;
    auto qkv = in_proj_->forward(x).reshape({B, L, 3, heads_, hd}).permute({2, 0, 3, 1, 4});
    auto q = qkv[0], k = qkv[1], v = qkv[2];  // [B, H, L, hd]
    auto ctx = at::scaled_dot_product_attention(q, k, v);  // softmax(q k^T / sqrt(hd)) v
    return out_proj_->forward(ctx.permute({0, 2, 1, 3}).reshape({B, L, D}));
  }

 private:
  int64_t heads_;
  torch::nn::Linear in_proj_;
  torch::nn::Linear out_proj_;
};
TORCH_MODULE(MultiHeadAttention);

/// Self-attention + residual + LayerNorm, then an LSTM -> ReLU -> Linear
/// feed-forward + residual + LayerNorm. Operates on [B, L, D].
class TransformerBlockImpl : public torch::nn::Module {
 public:
  TransformerBlockImpl(int dim, int heads, int ff_hidden, bool bidirectional)
      : attn_(dim, heads),
        norm1_(torch::nn::LayerNormOptions({dim})),
        lstm_(torch::nn::LSTMOptions(dim, ff_hidden).batch_first(true).bidirectional(bidirectional)),
        ff_out_((bidirectional ? 2 : 1) * ff_hidden, dim),
        norm2_(torch::nn::LayerNormOptions({dim})) {
    register_module("attn", attn_);
    register_module("norm1", norm1_);
    register_module("lstm", lstm_);
    register_module("ff_out", ff_out_);
    register_module("norm2", norm2_);
    for (auto& p : lstm_->named_parameters()) {
      if (p.key().rfind("weight", 0) == 0) torch::nn::init::orthogonal_(p.value());
      else torch::nn::init::zeros_(p.value());
    }
  }

  torch::Tensor forward(const torch::Tensor& x) {
    auto z = norm1_->forward(x + attn_->forward(x));
    auto h = std::get<0>(lstm_->forward(z));
    return norm2_->forward(z + ff_out_->forward(torch::relu(h)));
  }

 private:
  MultiHeadAttention attn_;
  torch::nn::LayerNorm norm1_;
  torch::nn::LSTM lstm_;
  torch::nn::Linear ff_out_;
  torch::nn::LayerNorm norm2_;
};
TORCH_MODULE(TransformerBlock);

/// Runs `block` over the chunk axis (intra) of [B, N, C, S].
inline torch::Tensor apply_intra(TransformerBlock& block, const torch::Tensor& x) {
  const int64_t B = x.size(0), N = x.size(1), C = x.size(2), S = x.size(3);
  auto seq = x.permute({0, 3, 2, 1}).reshape({B * S, C, N});
  return block->forward(seq).reshape({B, S, C, N}).permute({0, 3, 2, 1});
}

/// Runs `block` across chunks (inter) of [B, N, C, S].
inline torch::Tensor apply_inter(TransformerBlock& block, const torch::Tensor& x) {
  const int64_t B = x.size(0), N = x.size(1), C = x.size(2), S = x.size(3);
  auto seq = x.permute({0, 2, 3, 1}).reshape({B * C, S, N});
  return block->forward(seq).reshape({B, C, S, N}).permute({0, 3, 1, 2});
}

// ---------------------------------------------------------------------------
// Separator core: dual-path transformer producing a sigmoid mask

class DualPathCoreImpl : public torch::nn::Module {
 public:
  explicit DualPathCoreImpl(const SeparatorConfig& cfg)
      : chunk_(cfg.chunk),
        norm_(torch::nn::GroupNormOptions(1, cfg.n_filters)),
        prelu_(),
        proj_(torch::nn::Conv1dOptions(cfg.n_filters, cfg.n_filters, 1)) {
    register_module("norm", norm_);
    for (int b = 0; b < cfg.n_blocks; ++b) {
      intra_.push_back(register_module(
          "intra" + std::to_string(b),
          TransformerBlock(cfg.n_filters, cfg.n_heads, cfg.ff_hidden, cfg.bidirectional)));
      inter_.push_back(register_module(
          "inter" + std::to_string(b),
          TransformerBlock(cfg.n_filters, cfg.n_heads, cfg.ff_hidden, cfg.bidirectional)));
    }
    register_module("prelu", prelu_);
    register_module("proj", proj_);
  }

  std::size_t n_blocks() const { return intra_.size(); }
  TransformerBlock& intra(std::size_t i) { return intra_.at(i); }
  TransformerBlock& inter(std::size_t i) { return inter_.at(i); }

  /// [B, N, T] -> mask [B, N, T] in [0, 1].
  torch::Tensor forward(const torch::Tensor& cond) {
    const int64_t T = cond.size(2);
    auto x = tse::chunk(norm_->forward(cond), chunk_);
    for (std::size_t b = 0; b < intra_.size(); ++b) {
      x = apply_intra(intra_[b], x);
      x = apply_inter(inter_[b], x);
    }
    x = prelu_->forward(x);
    auto y = overlap_add(x, T);
    return torch::sigmoid(proj_->forward(y));
  }

 private:
  int64_t chunk_;
  torch::nn::GroupNorm norm_;
  std::vector<TransformerBlock> intra_;
  std::vector<TransformerBlock> inter_;
  torch::nn::PReLU prelu_;
  torch::nn::Conv1d proj_;
};
TORCH_MODULE(DualPathCore);

// ---------------------------------------------------------------------------
// Waveform encoder / decoder (parameter sets gamma / delta)

class WaveformEncoderImpl : public torch::nn::Module {
 public:
  explicit WaveformEncoderImpl(const SeparatorConfig& cfg)
      : kernel_(cfg.kernel),
        conv_(torch::nn::Conv1dOptions(1, cfg.n_filters, cfg.kernel).stride(cfg.stride)) {
    register_module("conv", conv_);
  }

  torch::nn::Conv1d& conv() { return conv_; }

  /// [B, t] -> [B, N, T], non-negative.
  torch::Tensor forward(const torch::Tensor& wave) {
    TSE_REQUIRE(wave.dim() == 2, "waveform encoder expects [B, t]");
    TSE_REQUIRE(wave.size(1) >= kernel_, "input of ", wave.size(1),
                " samples is shorter than the encoder kernel (", kernel_, ")");
    return torch::relu(conv_->forward(wave.unsqueeze(1)));
  }

 private:
  int64_t kernel_;
  torch::nn::Conv1d conv_;
};
TORCH_MODULE(WaveformEncoder);

class WaveformDecoderImpl : public torch::nn::Module {
 public:
  explicit WaveformDecoderImpl(const SeparatorConfig& cfg)
      : n_filters_(cfg.n_filters),
        deconv_(torch::nn::ConvTranspose1dOptions(cfg.n_filters, 1, cfg.kernel).stride(cfg.stride)) {
    register_module("deconv", deconv_);
  }

  torch::nn::ConvTranspose1d& deconv() { return deconv_; }

  /// [B, N, T] -> [B, (T - 1) * stride + kernel]
  torch::Tensor forward(const torch::Tensor& latent) {
    TSE_REQUIRE(latent.dim() == 3 && latent.size(1) == n_filters_,
                "waveform decoder expects [B, ", n_filters_, ", T]");
    return deconv_->forward(latent).squeeze(1);
  }

 private:
  int64_t n_filters_;
  torch::nn::ConvTranspose1d deconv_;
};
TORCH_MODULE(WaveformDecoder);

/// Concatenates the broadcast speaker embedding to the latent and maps the
/// N + E channels back to N with a pointwise convolution.
class ConditionBlenderImpl : public torch::nn::Module {
 public:
  explicit ConditionBlenderImpl(const SeparatorConfig& cfg)
      : n_filters_(cfg.n_filters),
        embed_dim_(cfg.embed_dim),
        conv_(torch::nn::Conv1dOptions(cfg.n_filters + cfg.embed_dim, cfg.n_filters, 1)) {
    register_module("conv", conv_);
  }

  torch::nn::Conv1d& conv() { return conv_; }

  torch::Tensor forward(const torch::Tensor& latent, const torch::Tensor& embedding) {
    TSE_REQUIRE(latent.dim() == 3 && latent.size(1) == n_filters_, "blender expects latent [B, ",
                n_filters_, ", T]");
    TSE_REQUIRE(embedding.dim() == 2 && embedding.size(1) == embed_dim_ &&
                    embedding.size(0) == latent.size(0),
                "blender expects embedding [B, ", embed_dim_, "]");
    auto e = embedding.unsqueeze(2).expand({-1, -1, latent.size(2)});
    return conv_->forward(torch::cat({latent, e}, 1));
  }

 private:
  int64_t n_filters_;
  int64_t embed_dim_;
  torch::nn::Conv1d conv_;
};
TORCH_MODULE(ConditionBlender);

inline torch::Tensor apply_mask(const torch::Tensor& latent, const torch::Tensor& mask) {
  TSE_REQUIRE(latent.sizes() == mask.sizes(), "mask shape ", mask.sizes(),
              " does not match latent shape ", latent.sizes());
  return latent * mask;
}

/// Crops the tail, or zero-pads it, to exactly `length` samples.
inline torch::Tensor fit_length(const torch::Tensor& wave, int64_t length) {
  const int64_t n = wave.size(-1);
  if (n == length) return wave;
  if (n > length) return wave.narrow(-1, 0, length);
  return torch::constant_pad_nd(wave, {0, length - n}, 0.0);
}

struct SeparatorOutput {
  torch::Tensor estimate;  // [B, t]
  torch::Tensor masked;    // [B, N, T]; the ICL input
  torch::Tensor mask;      // [B, N, T]
  torch::Tensor latent;    // [B, N, T]
};

/// Conditional extractor: (mixture @ 8 kHz, speaker embedding) -> target.
class SeparatorImpl : public torch::nn::Module {
 public:
  explicit SeparatorImpl(SeparatorConfig cfg = {})
      : cfg_((cfg.validate(), cfg)),
        encoder_(cfg_),
        blender_(cfg_),
        core_(nullptr),
        decoder_(cfg_) {
    if (cfg_.backbone != Backbone::DualPath) {
      throw InvalidInput("backbone '" + to_string(cfg_.backbone) + "' is reserved but not implemented");
    }
    core_ = DualPathCore(cfg_);
    register_module("encoder", encoder_);
    register_module("blender", blender_);
    register_module("core", core_);
    register_module("decoder", decoder_);
  }

  const SeparatorConfig& config() const { return cfg_; }
  WaveformEncoder& encoder() { return encoder_; }
  ConditionBlender& blender() { return blender_; }
  DualPathCore& core() { return core_; }
  WaveformDecoder& decoder() { return decoder_; }

  SeparatorOutput forward(const torch::Tensor& mixture, const torch::Tensor& embedding) {
    TSE_REQUIRE(mixture.dim() == 2, "separator expects mixture [B, t]");
    const int64_t t = mixture.size(1);
    SeparatorOutput out;
    out.latent = encoder_->forward(mixture);
    const int64_t T = out.latent.size(2);
    TSE_REQUIRE(T == cfg_.frames(t) && out.latent.size(1) == cfg_.n_filters, "latent shape ",
                out.latent.sizes(), " does not match ", t, " input samples");
    auto cond = blender_->forward(out.latent, embedding);
    out.mask = core_->forward(cond);
    check_finite(out.mask, "separator mask");
    TSE_REQUIRE(out.mask.sizes() == out.latent.sizes(), "mask shape mismatch");
    out.masked = apply_mask(out.latent, out.mask);
    auto decoded = decoder_->forward(out.masked);
    TSE_REQUIRE(decoded.size(1) == cfg_.decoded_length(T), "decoder length arithmetic");
    out.estimate = fit_length(decoded, t);
    TSE_REQUIRE(out.estimate.size(1) == t, "estimate length mismatch");
    return out;
  }

 private:
  SeparatorConfig cfg_;
  WaveformEncoder encoder_;
  ConditionBlender blender_;
  DualPathCore core_;
  WaveformDecoder decoder_;
};
TORCH_MODULE(Separator);

}  // namespace tse
