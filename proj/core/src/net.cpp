#include "presda/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "presda/parallel.hpp"
#include "presda/rng.hpp"

namespace presda::net {

namespace {

constexpr int kMaxMaps = 64;
constexpr std::size_t kRowChunk = 16;  // fixed => thread-count-independent sums

void relu_inplace(Tensor3& x) {
    for (double& v : x.d)
        if (v < 0.0) v = 0.0;
}

}  // namespace

namespace {

std::uint64_t hash_arch_desc(int feature_maps,
                             const std::vector<std::pair<int, int>>& conv_dims) {
    std::string desc = "fcn10;fm=" + std::to_string(feature_maps) +
                       ";k=" + std::to_string(kConvKernel) +
                       ";pool=" + std::to_string(kPoolSize) + "/" +
                       std::to_string(kPoolStride) +
                       ";cls=" + std::to_string(kClassMaps);
    for (const auto& [in, out] : conv_dims)
        desc += ";" + std::to_string(in) + ">" + std::to_string(out);
    return fnv1a(desc.data(), desc.size());
}

std::vector<std::pair<int, int>> standard_conv_dims(int feature_maps) {
    std::vector<std::pair<int, int>> dims;
    for (int b = 0; b < kNumBlocks; ++b)
        for (int c = 0; c < kConvsPerBlock; ++c)
            dims.emplace_back(b == 0 && c == 0 ? 1 : feature_maps, feature_maps);
    dims.emplace_back(feature_maps, kClassMaps);
    return dims;
}

}  // namespace

std::uint64_t NetworkParams::arch_hash() const {
    std::vector<std::pair<int, int>> dims;
    for (const auto& c : convs) dims.emplace_back(c.maps_in, c.maps_out);
    return hash_arch_desc(feature_maps, dims);
}

std::uint64_t arch_hash_for(int feature_maps) {
    return hash_arch_desc(feature_maps, standard_conv_dims(feature_maps));
}

NetworkParams init_params(std::uint64_t seed, int feature_maps) {
    if (feature_maps < 1 || feature_maps > kMaxMaps)
        throw std::invalid_argument("init_params: feature_maps out of range");

    NetworkParams p;
    p.feature_maps = feature_maps;
    Rng rng(seed, /*tag=*/0x696e6974);  // "init" stream

    auto make_conv = [&](int maps_in, int maps_out) {
        ConvLayer c;
        c.maps_in = maps_in;
        c.maps_out = maps_out;
        c.w.resize(static_cast<std::size_t>(kConvKernel) * maps_in * maps_out);
        c.b.assign(maps_out, 0.0);
        const double bound = std::sqrt(6.0 / (kConvKernel * maps_in));
        for (double& w : c.w) w = rng.uniform(-bound, bound);
        return c;
    };

    for (const auto& [in, out] : standard_conv_dims(feature_maps))
        p.convs.push_back(make_conv(in, out));

    for (int b = 0; b < kNumBlocks; ++b) {
        BnLayer bn;
        bn.gamma.assign(feature_maps, 1.0);
        bn.beta.assign(feature_maps, 0.0);
        bn.running_mean.assign(feature_maps, 0.0);
        bn.running_var.assign(feature_maps, 1.0);
        p.bns.push_back(std::move(bn));
    }
    return p;
}

ParamGrads ParamGrads::zeros_like(const NetworkParams& p) {
    ParamGrads g;
    g.convs.resize(p.convs.size());
    for (std::size_t i = 0; i < p.convs.size(); ++i) {
        g.convs[i].w.assign(p.convs[i].w.size(), 0.0);
        g.convs[i].b.assign(p.convs[i].b.size(), 0.0);
    }
    g.bns.resize(p.bns.size());
    for (std::size_t i = 0; i < p.bns.size(); ++i) {
        g.bns[i].gamma.assign(p.bns[i].gamma.size(), 0.0);
        g.bns[i].beta.assign(p.bns[i].beta.size(), 0.0);
    }
    return g;
}

bool ParamGrads::all_finite() const {
    bool ok = true;
    const_cast<ParamGrads*>(this)->for_each_tensor(
        [&](const std::string&, std::vector<double>& v) {
            for (double x : v)
                if (!std::isfinite(x)) ok = false;
        });
    return ok;
}

void ParamGrads::scale(double c) {
    for_each_tensor([&](const std::string&, std::vector<double>& v) {
        for (double& x : v) x *= c;
    });
}

// ---- conv ----

Tensor3 conv1d_forward(const Tensor3& x, const ConvLayer& c) {
    if (x.maps != c.maps_in)
        throw std::invalid_argument("conv1d_forward: input map count mismatch");
    if (c.maps_out > kMaxMaps)
        throw std::invalid_argument("conv1d_forward: too many output maps");

    Tensor3 out(x.rows, x.len, c.maps_out);
    const int L = x.len, Fin = c.maps_in, Fout = c.maps_out;
    const double* W = c.w.data();
    const double* B = c.b.data();

    parallel_for(static_cast<std::size_t>(x.rows), kRowChunk,
                 [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            const double* xr = x.d.data() + r * static_cast<std::size_t>(L) * Fin;
            double* yr = out.d.data() + r * static_cast<std::size_t>(L) * Fout;
            for (int t = 0; t < L; ++t) {
                double acc[kMaxMaps];
                for (int g = 0; g < Fout; ++g) acc[g] = B[g];
                const int k_lo = (t == 0) ? 1 : 0;
                const int k_hi = (t == L - 1) ? 2 : 3;
                for (int k = k_lo; k < k_hi; ++k) {
                    const double* xp = xr + static_cast<std::size_t>(t + k - 1) * Fin;
                    const double* wp = W + static_cast<std::size_t>(k) * Fin * Fout;
                    for (int fi = 0; fi < Fin; ++fi) {
                        const double xv = xp[fi];
                        const double* wrow = wp + static_cast<std::size_t>(fi) * Fout;
                        for (int g = 0; g < Fout; ++g) acc[g] += xv * wrow[g];
                    }
                }
                double* yo = yr + static_cast<std::size_t>(t) * Fout;
                for (int g = 0; g < Fout; ++g) yo[g] = acc[g];
            }
        }
    });
    return out;
}

void conv1d_backward(const Tensor3& x, const ConvLayer& c, const Tensor3& grad_out,
                     Tensor3* grad_x, std::vector<double>* grad_w,
                     std::vector<double>* grad_b) {
    if (grad_out.rows != x.rows || grad_out.len != x.len ||
        grad_out.maps != c.maps_out || x.maps != c.maps_in)
        throw std::invalid_argument("conv1d_backward: shape mismatch");

    const int L = x.len, Fin = c.maps_in, Fout = c.maps_out;
    const std::size_t n_rows = static_cast<std::size_t>(x.rows);

    if (grad_x) {
        // x[s] feeds out[s - k + 1]; transpose weights so the map-in loop is
        // innermost and contiguous.
        std::vector<double> wt(static_cast<std::size_t>(kConvKernel) * Fout * Fin);
        for (int k = 0; k < kConvKernel; ++k)
            for (int fi = 0; fi < Fin; ++fi)
                for (int g = 0; g < Fout; ++g)
                    wt[(static_cast<std::size_t>(k) * Fout + g) * Fin + fi] =
                        c.w[c.widx(k, fi, g)];

        *grad_x = Tensor3(x.rows, L, Fin);
        parallel_for(n_rows, kRowChunk, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                const double* gr =
                    grad_out.d.data() + r * static_cast<std::size_t>(L) * Fout;
                double* xr = grad_x->d.data() + r * static_cast<std::size_t>(L) * Fin;
                for (int s = 0; s < L; ++s) {
                    double acc[kMaxMaps];
                    for (int fi = 0; fi < Fin; ++fi) acc[fi] = 0.0;
                    for (int k = 0; k < kConvKernel; ++k) {
                        const int t = s - k + 1;
                        if (t < 0 || t >= L) continue;
                        const double* gp = gr + static_cast<std::size_t>(t) * Fout;
                        const double* wp =
                            wt.data() + static_cast<std::size_t>(k) * Fout * Fin;
                        for (int g = 0; g < Fout; ++g) {
                            const double gv = gp[g];
                            const double* wrow = wp + static_cast<std::size_t>(g) * Fin;
                            for (int fi = 0; fi < Fin; ++fi) acc[fi] += gv * wrow[fi];
                        }
                    }
                    double* xo = xr + static_cast<std::size_t>(s) * Fin;
                    for (int fi = 0; fi < Fin; ++fi) xo[fi] = acc[fi];
                }
            }
        });
    }

    if (grad_w || grad_b) {
        const std::size_t w_size = c.w.size();
        const std::size_t n_chunks = (n_rows + kRowChunk - 1) / kRowChunk;
        std::vector<std::vector<double>> pw(n_chunks);
        std::vector<std::vector<double>> pb(n_chunks);

        parallel_for(n_rows, kRowChunk, [&](std::size_t lo, std::size_t hi) {
            const std::size_t chunk = lo / kRowChunk;
            pw[chunk].assign(w_size, 0.0);
            pb[chunk].assign(static_cast<std::size_t>(Fout), 0.0);
            double* cw = pw[chunk].data();
            double* cb = pb[chunk].data();
            for (std::size_t r = lo; r < hi; ++r) {
                const double* xr = x.d.data() + r * static_cast<std::size_t>(L) * Fin;
                const double* gr =
                    grad_out.d.data() + r * static_cast<std::size_t>(L) * Fout;
                for (int t = 0; t < L; ++t) {
                    const double* gp = gr + static_cast<std::size_t>(t) * Fout;
                    for (int g = 0; g < Fout; ++g) cb[g] += gp[g];
                    const int k_lo = (t == 0) ? 1 : 0;
                    const int k_hi = (t == L - 1) ? 2 : 3;
                    for (int k = k_lo; k < k_hi; ++k) {
                        const double* xp =
                            xr + static_cast<std::size_t>(t + k - 1) * Fin;
                        double* wk = cw + static_cast<std::size_t>(k) * Fin * Fout;
                        for (int fi = 0; fi < Fin; ++fi) {
                            const double xv = xp[fi];
                            double* wrow = wk + static_cast<std::size_t>(fi) * Fout;
                            for (int g = 0; g < Fout; ++g) wrow[g] += xv * gp[g];
                        }
                    }
                }
            }
        });

        // merge partials in chunk order: identical for any thread count
        if (grad_w) {
            grad_w->assign(w_size, 0.0);
            for (std::size_t ch = 0; ch < n_chunks; ++ch)
                for (std::size_t i = 0; i < w_size; ++i)
                    (*grad_w)[i] += pw[ch][i];
        }
        if (grad_b) {
            grad_b->assign(static_cast<std::size_t>(Fout), 0.0);
            for (std::size_t ch = 0; ch < n_chunks; ++ch)
                for (int g = 0; g < Fout; ++g) (*grad_b)[g] += pb[ch][g];
        }
    }
}

// ---- relu ----

Tensor3 relu_forward(const Tensor3& x) {
    Tensor3 out = x;
    relu_inplace(out);
    return out;
}

Tensor3 relu_backward_from_output(const Tensor3& relu_out, const Tensor3& grad_out) {
    if (!relu_out.same_shape(grad_out))
        throw std::invalid_argument("relu_backward: shape mismatch");
    Tensor3 g(relu_out.rows, relu_out.len, relu_out.maps);
    for (std::size_t i = 0; i < g.size(); ++i)
        g.d[i] = relu_out.d[i] > 0.0 ? grad_out.d[i] : 0.0;
    return g;
}

// ---- batch norm ----

Tensor3 batchnorm_forward_train(const Tensor3& x, const BnLayer& bn, BnStats* stats) {
    const int F = x.maps;
    const std::size_t cells = static_cast<std::size_t>(x.rows) * x.len;
    if (cells == 0) throw std::invalid_argument("batchnorm: empty input");

    std::vector<double> mean(F, 0.0), var(F, 0.0), inv_std(F);
    const double* p = x.d.data();
    for (std::size_t i = 0; i < cells; ++i, p += F)
        for (int f = 0; f < F; ++f) mean[f] += p[f];
    for (int f = 0; f < F; ++f) mean[f] /= static_cast<double>(cells);
    p = x.d.data();
    for (std::size_t i = 0; i < cells; ++i, p += F)
        for (int f = 0; f < F; ++f) {
            const double d = p[f] - mean[f];
            var[f] += d * d;
        }
    for (int f = 0; f < F; ++f) {
        var[f] /= static_cast<double>(cells);  // biased, as running stats expect
        inv_std[f] = 1.0 / std::sqrt(var[f] + kBnEpsilon);
    }

    Tensor3 out(x.rows, x.len, F);
    const double* src = x.d.data();
    double* dst = out.d.data();
    for (std::size_t i = 0; i < cells; ++i, src += F, dst += F)
        for (int f = 0; f < F; ++f)
            dst[f] = bn.gamma[f] * (src[f] - mean[f]) * inv_std[f] + bn.beta[f];

    if (stats) {
        stats->mean = std::move(mean);
        stats->var = std::move(var);
        stats->inv_std = std::move(inv_std);
    }
    return out;
}

Tensor3 batchnorm_forward_infer(const Tensor3& x, const BnLayer& bn) {
    const int F = x.maps;
    const std::size_t cells = static_cast<std::size_t>(x.rows) * x.len;
    Tensor3 out(x.rows, x.len, F);
    std::vector<double> scale(F), shift(F);
    for (int f = 0; f < F; ++f) {
        scale[f] = bn.gamma[f] / std::sqrt(bn.running_var[f] + kBnEpsilon);
        shift[f] = bn.beta[f] - scale[f] * bn.running_mean[f];
    }
    const double* src = x.d.data();
    double* dst = out.d.data();
    for (std::size_t i = 0; i < cells; ++i, src += F, dst += F)
        for (int f = 0; f < F; ++f) dst[f] = scale[f] * src[f] + shift[f];
    return out;
}

Tensor3 batchnorm_backward(const Tensor3& x, const BnLayer& bn, const BnStats& stats,
                           const Tensor3& grad_out, std::vector<double>* grad_gamma,
                           std::vector<double>* grad_beta) {
    if (!x.same_shape(grad_out))
        throw std::invalid_argument("batchnorm_backward: shape mismatch");
    const int F = x.maps;
    const std::size_t cells = static_cast<std::size_t>(x.rows) * x.len;
    const double inv_m = 1.0 / static_cast<double>(cells);

    std::vector<double> s1(F, 0.0), s2(F, 0.0);
    {
        const double* xp = x.d.data();
        const double* gp = grad_out.d.data();
        for (std::size_t i = 0; i < cells; ++i, xp += F, gp += F)
            for (int f = 0; f < F; ++f) {
                const double xhat = (xp[f] - stats.mean[f]) * stats.inv_std[f];
                s1[f] += gp[f];
                s2[f] += gp[f] * xhat;
            }
    }
    if (grad_gamma) *grad_gamma = s2;
    if (grad_beta) *grad_beta = s1;

    Tensor3 gx(x.rows, x.len, F);
    const double* xp = x.d.data();
    const double* gp = grad_out.d.data();
    double* op = gx.d.data();
    for (std::size_t i = 0; i < cells; ++i, xp += F, gp += F, op += F)
        for (int f = 0; f < F; ++f) {
            const double xhat = (xp[f] - stats.mean[f]) * stats.inv_std[f];
            op[f] = bn.gamma[f] * stats.inv_std[f] *
                    (gp[f] - inv_m * s1[f] - xhat * inv_m * s2[f]);
        }
    return gx;
}

// ---- average pooling ----

Tensor3 avgpool_forward(const Tensor3& x) {
    if (x.len < kPoolSize)
        throw std::invalid_argument("avgpool: input shorter than pool size");
    const int Lo = pooled_len(x.len);
    const int F = x.maps;
    Tensor3 out(x.rows, Lo, F);
    for (int r = 0; r < x.rows; ++r)
        for (int to = 0; to < Lo; ++to) {
            const int ti = to * kPoolStride;
            for (int f = 0; f < F; ++f)
                out.at(r, to, f) = 0.25 * (x.at(r, ti, f) + x.at(r, ti + 1, f) +
                                           x.at(r, ti + 2, f) + x.at(r, ti + 3, f));
        }
    return out;
}

Tensor3 avgpool_backward(int input_len, const Tensor3& grad_out) {
    if (grad_out.len != pooled_len(input_len))
        throw std::invalid_argument("avgpool_backward: length mismatch");
    const int F = grad_out.maps;
    Tensor3 gx(grad_out.rows, input_len, F);
    for (int r = 0; r < grad_out.rows; ++r)
        for (int to = 0; to < grad_out.len; ++to) {
            const int ti = to * kPoolStride;
            for (int f = 0; f < F; ++f) {
                const double g = 0.25 * grad_out.at(r, to, f);
                for (int j = 0; j < kPoolSize; ++j) gx.at(r, ti + j, f) += g;
            }
        }
    return gx;
}

// ---- global pooling head ----

void global_head_forward(const Tensor3& x, int rows_per_window,
                         std::vector<std::array<double, 2>>* logits,
                         std::vector<std::array<int, 2>>* argmax_rows) {
    if (x.maps != kClassMaps)
        throw std::invalid_argument("global_head: expected 2 feature maps");
    if (rows_per_window <= 0 || x.rows % rows_per_window != 0)
        throw std::invalid_argument("global_head: rows not divisible into windows");
    const int n_windows = x.rows / rows_per_window;
    const double inv_len = 1.0 / static_cast<double>(x.len);

    logits->assign(n_windows, {0.0, 0.0});
    if (argmax_rows) argmax_rows->assign(n_windows, {0, 0});
    for (int w = 0; w < n_windows; ++w) {
        std::array<double, 2> best{};
        std::array<int, 2> best_row{};
        for (int n = 0; n < rows_per_window; ++n) {
            const int r = w * rows_per_window + n;
            double a0 = 0.0, a1 = 0.0;
            const double* p = x.d.data() + x.idx(r, 0, 0);
            for (int t = 0; t < x.len; ++t, p += 2) {
                a0 += p[0];
                a1 += p[1];
            }
            a0 *= inv_len;
            a1 *= inv_len;
            if (n == 0 || a0 > best[0]) {  // strict: first row wins ties
                best[0] = a0;
                best_row[0] = r;
            }
            if (n == 0 || a1 > best[1]) {
                best[1] = a1;
                best_row[1] = r;
            }
        }
        (*logits)[w] = best;
        if (argmax_rows) (*argmax_rows)[w] = best_row;
    }
}

Tensor3 global_head_backward(const Tensor3& x_shape_like, int rows_per_window,
                             const std::vector<std::array<double, 2>>& grad_logits,
                             const std::vector<std::array<int, 2>>& argmax_rows) {
    Tensor3 gx(x_shape_like.rows, x_shape_like.len, x_shape_like.maps);
    const double inv_len = 1.0 / static_cast<double>(x_shape_like.len);
    for (std::size_t w = 0; w < grad_logits.size(); ++w)
        for (int f = 0; f < 2; ++f) {
            const double g = grad_logits[w][f] * inv_len;
            const int r = argmax_rows[w][f];
            for (int t = 0; t < x_shape_like.len; ++t) gx.at(r, t, f) += g;
        }
    return gx;
}

std::array<double, 2> softmax2(const std::array<double, 2>& logits) {
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double z = e0 + e1;
    return {e0 / z, e1 / z};
}

// ---- whole model ----

BatchOutput model_forward_batch(const NetworkParams& params, const Tensor3& stacked,
                                int rows_per_window, Mode mode, ForwardCache* cache) {
    if (stacked.maps != 1)
        throw std::invalid_argument("model_forward: input must have one feature map");
    if (rows_per_window <= 0 || stacked.rows % rows_per_window != 0)
        throw std::invalid_argument("model_forward: bad rows_per_window");
    if (params.convs.size() != kNumConvLayers || params.bns.size() != kNumBlocks)
        throw std::invalid_argument("model_forward: malformed parameters");
    if (mode == Mode::Infer && params.bn_batches_seen == 0)
        throw std::runtime_error(
            "model_forward: batch-norm running statistics not initialized "
            "(train at least one batch first)");

    const bool train = mode == Mode::Train;
    if (cache) {
        cache->rows_per_window = rows_per_window;
        cache->n_windows = stacked.rows / rows_per_window;
    }

    BatchOutput out;
    Tensor3 cur = stacked;
    int ci = 0;
    for (int b = 0; b < kNumBlocks; ++b) {
        for (int c = 0; c < kConvsPerBlock; ++c, ++ci) {
            const Tensor3* in = &cur;
            if (train && cache) {
                cache->conv_in[ci] = std::move(cur);
                in = &cache->conv_in[ci];
            }
            cur = conv1d_forward(*in, params.convs[ci]);
            relu_inplace(cur);
        }
        const Tensor3* bn_in = &cur;
        if (train && cache) {
            cache->bn_in[b] = std::move(cur);
            bn_in = &cache->bn_in[b];
        }
        Tensor3 bn_out;
        if (train) {
            BnStats stats;
            bn_out = batchnorm_forward_train(*bn_in, params.bns[b], &stats);
            out.bn_stats[b] = stats;
            if (cache) cache->bn_stats[b] = std::move(stats);
        } else {
            bn_out = batchnorm_forward_infer(*bn_in, params.bns[b]);
        }
        cur = avgpool_forward(bn_out);
    }

    const Tensor3* cls_in = &cur;
    if (train && cache) {
        cache->conv_in[ci] = std::move(cur);
        cls_in = &cache->conv_in[ci];
    }
    Tensor3 head = conv1d_forward(*cls_in, params.convs[ci]);
    relu_inplace(head);

    std::vector<std::array<double, 2>> logits;
    std::vector<std::array<int, 2>> argmax;
    global_head_forward(head, rows_per_window, &logits, &argmax);

    const int n_windows = stacked.rows / rows_per_window;
    out.probs.resize(n_windows);
    out.seizure_probs.resize(n_windows);
    for (int w = 0; w < n_windows; ++w) {
        out.probs[w] = softmax2(logits[w]);
        out.seizure_probs[w] = out.probs[w][1];
    }
    if (cache) {
        cache->head_in = std::move(head);
        cache->head_argmax = std::move(argmax);
        cache->logits = std::move(logits);
        cache->probs = out.probs;
    }
    return out;
}

ParamGrads model_backward_batch(const NetworkParams& params, const ForwardCache& cache,
                                std::span<const int> labels,
                                std::span<const double> weights) {
    const int n_windows = cache.n_windows;
    if (static_cast<int>(labels.size()) != n_windows ||
        static_cast<int>(weights.size()) != n_windows)
        throw std::invalid_argument("model_backward: label/weight size mismatch");
    if (cache.head_in.size() == 0)
        throw std::invalid_argument("model_backward: cache missing (train-mode forward required)");

    // d(weight * CE)/d(logit) = weight * (softmax - onehot)
    std::vector<std::array<double, 2>> dlogits(n_windows);
    for (int w = 0; w < n_windows; ++w) {
        const int y = labels[w];
        if (y != 0 && y != 1)
            throw std::invalid_argument("model_backward: labels must be 0/1");
        dlogits[w][0] = weights[w] * (cache.probs[w][0] - (y == 0 ? 1.0 : 0.0));
        dlogits[w][1] = weights[w] * (cache.probs[w][1] - (y == 1 ? 1.0 : 0.0));
    }

    ParamGrads grads = ParamGrads::zeros_like(params);

    Tensor3 g = global_head_backward(cache.head_in, cache.rows_per_window, dlogits,
                                     cache.head_argmax);
    g = relu_backward_from_output(cache.head_in, g);

    Tensor3 gx;
    conv1d_backward(cache.conv_in[9], params.convs[9], g, &gx, &grads.convs[9].w,
                    &grads.convs[9].b);
    g = std::move(gx);

    for (int b = kNumBlocks - 1; b >= 0; --b) {
        g = avgpool_backward(cache.bn_in[b].len, g);
        g = batchnorm_backward(cache.bn_in[b], params.bns[b], cache.bn_stats[b], g,
                               &grads.bns[b].gamma, &grads.bns[b].beta);
        g = relu_backward_from_output(cache.bn_in[b], g);
        for (int c = kConvsPerBlock - 1; c >= 0; --c) {
            const int ci = b * kConvsPerBlock + c;
            const bool need_gx = ci > 0;
            conv1d_backward(cache.conv_in[ci], params.convs[ci], g,
                            need_gx ? &gx : nullptr, &grads.convs[ci].w,
                            &grads.convs[ci].b);
            if (!need_gx) break;
            g = std::move(gx);
            if (c > 0) g = relu_backward_from_output(cache.conv_in[ci], g);
        }
    }
    return grads;
}

double model_forward(const NetworkParams& params, const double* window,
                     int n_channels, Mode mode, ForwardCache* cache) {
    Tensor3 x(n_channels, kInputLen, 1);
    std::memcpy(x.d.data(), window, x.size() * sizeof(double));
    BatchOutput out = model_forward_batch(params, x, n_channels, mode, cache);
    return out.seizure_probs[0];
}

void update_running_stats(NetworkParams& params,
                          const std::array<BnStats, kNumBlocks>& stats) {
    for (int b = 0; b < kNumBlocks; ++b) {
        auto& bn = params.bns[b];
        for (std::size_t f = 0; f < bn.running_mean.size(); ++f) {
            bn.running_mean[f] = kBnMomentum * bn.running_mean[f] +
                                 (1.0 - kBnMomentum) * stats[b].mean[f];
            bn.running_var[f] = kBnMomentum * bn.running_var[f] +
                                (1.0 - kBnMomentum) * stats[b].var[f];
        }
    }
    ++params.bn_batches_seen;
}

}  // namespace presda::net
