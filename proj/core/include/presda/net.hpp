#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "presda/tensor.hpp"

namespace presda::net {

// Fixed fully convolutional architecture: three feature blocks of three
// kernel-3/stride-1 convolutions (ReLU) + batch norm + 4/3 average pooling,
// then a 2-map classification conv, global pooling (mean over time, max over
// EEG channels) and softmax. Ten conv layers in total. The per-block map
// count is 32 for the real model; gradient tests use a small variant.

inline constexpr int kInputLen = 256;  // 8 s at 32 Hz
inline constexpr int kConvKernel = 3;
inline constexpr int kPoolSize = 4;
inline constexpr int kPoolStride = 3;
inline constexpr int kNumBlocks = 3;
inline constexpr int kConvsPerBlock = 3;
inline constexpr int kNumConvLayers = 10;
inline constexpr int kClassMaps = 2;
inline constexpr int kDefaultFeatureMaps = 32;
inline constexpr double kBnEpsilon = 1e-5;
inline constexpr double kBnMomentum = 0.9;

enum class Mode { Train, Infer };

struct ConvLayer {
    int maps_in = 0;
    int maps_out = 0;
    std::vector<double> w;  // [kernel][maps_in][maps_out]
    std::vector<double> b;  // [maps_out]

    std::size_t widx(int k, int fi, int g) const {
        return (static_cast<std::size_t>(k) * maps_in + fi) * maps_out + g;
    }
};

struct BnLayer {
    std::vector<double> gamma, beta, running_mean, running_var;
};

struct NetworkParams {
    int feature_maps = kDefaultFeatureMaps;
    std::vector<ConvLayer> convs;  // 10: blocks 0..8, classifier 9
    std::vector<BnLayer> bns;      // 3, one per feature block
    std::int64_t bn_batches_seen = 0;

    std::uint64_t arch_hash() const;

    // Fixed tensor ordering used by checkpoints and the optimizer:
    // conv0.w, conv0.b, ..., conv9.w, conv9.b,
    // bn0.gamma, bn0.beta, bn0.running_mean, bn0.running_var, bn1..., bn2...
    template <typename F>
    void for_each_tensor(F&& f) {
        for (std::size_t i = 0; i < convs.size(); ++i) {
            f("conv" + std::to_string(i) + ".w", convs[i].w);
            f("conv" + std::to_string(i) + ".b", convs[i].b);
        }
        for (std::size_t i = 0; i < bns.size(); ++i) {
            const std::string p = "bn" + std::to_string(i);
            f(p + ".gamma", bns[i].gamma);
            f(p + ".beta", bns[i].beta);
            f(p + ".running_mean", bns[i].running_mean);
            f(p + ".running_var", bns[i].running_var);
        }
    }
    template <typename F>
    void for_each_tensor(F&& f) const {
        const_cast<NetworkParams*>(this)->for_each_tensor(
            [&](const std::string& n, std::vector<double>& v) {
                f(n, static_cast<const std::vector<double>&>(v));
            });
    }
};

// Uniform(-b, b) conv weights with b = sqrt(6 / (kernel * maps_in)), zero
// biases, unit gamma, zero beta. Deterministic in the seed.
NetworkParams init_params(std::uint64_t seed,
                          int feature_maps = kDefaultFeatureMaps);

// Architecture hash of the standard layer map at a given width, without
// building parameters.
std::uint64_t arch_hash_for(int feature_maps);

// Gradients of the trainable tensors (running stats are not trainable).
struct ParamGrads {
    struct Conv {
        std::vector<double> w, b;
    };
    struct Bn {
        std::vector<double> gamma, beta;
    };
    std::vector<Conv> convs;
    std::vector<Bn> bns;

    static ParamGrads zeros_like(const NetworkParams& p);
    bool all_finite() const;
    void scale(double c);

    template <typename F>
    void for_each_tensor(F&& f) {
        for (std::size_t i = 0; i < convs.size(); ++i) {
            f("conv" + std::to_string(i) + ".w", convs[i].w);
            f("conv" + std::to_string(i) + ".b", convs[i].b);
        }
        for (std::size_t i = 0; i < bns.size(); ++i) {
            const std::string p = "bn" + std::to_string(i);
            f(p + ".gamma", bns[i].gamma);
            f(p + ".beta", bns[i].beta);
        }
    }
};

// ---- layer primitives (exposed for gradient tests) ----

// out[n,t,g] = b[g] + sum_{k,f} w[k,f,g] * x[n,t+k-1,f], zero "same" padding.
Tensor3 conv1d_forward(const Tensor3& x, const ConvLayer& layer);
void conv1d_backward(const Tensor3& x, const ConvLayer& layer,
                     const Tensor3& grad_out, Tensor3* grad_x,
                     std::vector<double>* grad_w, std::vector<double>* grad_b);

Tensor3 relu_forward(const Tensor3& x);
// Mask taken from the forward output: passes gradient where y > 0 (so the
// subgradient at exactly 0 is 0).
Tensor3 relu_backward_from_output(const Tensor3& relu_out,
                                  const Tensor3& grad_out);

struct BnStats {
    std::vector<double> mean, var, inv_std;  // per map, biased variance
};

// Train mode normalizes with batch statistics over (rows, time) per map and
// reports them; infer mode uses the layer's running statistics.
Tensor3 batchnorm_forward_train(const Tensor3& x, const BnLayer& bn,
                                BnStats* stats);
Tensor3 batchnorm_forward_infer(const Tensor3& x, const BnLayer& bn);
Tensor3 batchnorm_backward(const Tensor3& x, const BnLayer& bn,
                           const BnStats& stats, const Tensor3& grad_out,
                           std::vector<double>* grad_gamma,
                           std::vector<double>* grad_beta);

Tensor3 avgpool_forward(const Tensor3& x);  // size 4, stride 3
Tensor3 avgpool_backward(int input_len, const Tensor3& grad_out);

inline int pooled_len(int len) { return (len - kPoolSize) / kPoolStride + 1; }

// Mean over time per (row, map), then max over the rows of each window
// (first index wins ties). x has n_windows * rows_per_window rows.
void global_head_forward(const Tensor3& x, int rows_per_window,
                         std::vector<std::array<double, 2>>* logits,
                         std::vector<std::array<int, 2>>* argmax_rows);
Tensor3 global_head_backward(const Tensor3& x_shape_like, int rows_per_window,
                             const std::vector<std::array<double, 2>>& grad_logits,
                             const std::vector<std::array<int, 2>>& argmax_rows);

std::array<double, 2> softmax2(const std::array<double, 2>& logits);

// ---- whole-model passes ----

struct ForwardCache {
    int rows_per_window = 0;
    int n_windows = 0;
    std::array<Tensor3, kNumConvLayers> conv_in;  // input of each conv
    std::array<Tensor3, kNumBlocks> bn_in;
    std::array<BnStats, kNumBlocks> bn_stats;
    Tensor3 head_in;  // classifier ReLU output
    std::vector<std::array<int, 2>> head_argmax;
    std::vector<std::array<double, 2>> probs;
    std::vector<std::array<double, 2>> logits;
};

struct BatchOutput {
    std::vector<double> seizure_probs;             // probs[..][1]
    std::vector<std::array<double, 2>> probs;
    std::array<BnStats, kNumBlocks> bn_stats;      // train mode only
};

// `stacked` holds n_windows blocks of rows_per_window EEG channels each,
// len 256, maps 1. Train mode fills `cache` (required for backward) and the
// batch statistics; infer mode uses running statistics and needs
// bn_batches_seen > 0.
BatchOutput model_forward_batch(const NetworkParams& params,
                                const Tensor3& stacked, int rows_per_window,
                                Mode mode, ForwardCache* cache = nullptr);

// Gradient of sum_i weights[i] * CE(probs_i, labels_i) over the batch.
ParamGrads model_backward_batch(const NetworkParams& params,
                                const ForwardCache& cache,
                                std::span<const int> labels,
                                std::span<const double> weights);

// Single-window convenience: seizure probability of one N x 256 window.
double model_forward(const NetworkParams& params, const double* window,
                     int n_channels, Mode mode = Mode::Infer,
                     ForwardCache* cache = nullptr);

// running <- momentum * running + (1 - momentum) * batch, once per batch.
void update_running_stats(NetworkParams& params,
                          const std::array<BnStats, kNumBlocks>& stats);

}  // namespace presda::net
