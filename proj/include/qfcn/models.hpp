// Copyright 2026 The QFCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// End-to-end networks: the QFCN image classifier (quantum Fourier conv /
// cap / max-pool / dense / softmax) with its classical direct-convolution
// twin, and the qf temporal forecaster (gated temporal quantum convolution +
// graph mixing) with a synthetic spatio-temporal dataset generator and a
// procedural digit renderer for environments without the MNIST files.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <utility>
#include <string>
#include <vector>

#include "fourier_conv.hpp"
#include "io.hpp"
#include "reference.hpp"
#include "rng.hpp"
#include "train.hpp"

namespace qfcn {

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    return z ^ (z >> 31);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Shared layer plumbing
// ---------------------------------------------------------------------------

/// Lifts all-zero channel planes by a small floor so amplitude encoding stays
/// defined (background-only image patches).
inline Tensor3 lift_zero_planes(const Tensor3 &x, double floor = 1e-6) {
    Tensor3 out = x;
    for (int k = 0; k < out.c; ++k) {
        double *p = out.plane(k);
        const std::size_t n = static_cast<std::size_t>(out.h) * out.w;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += p[i] * p[i];
        }
        if (s == 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = floor;
            }
        }
    }
    return out;
}

/// Decodes a 2-D layer's kernel bank into an explicit Kernel4.
inline Kernel4 decode_kernels(const FourierConvLayer &layer) {
    check(layer.kernel_dims.size() == 2, "decode_kernels: layer is not 2-D");
    Kernel4 k(layer.kernel_dims[0], layer.kernel_dims[1], layer.cin,
              layer.cout);
    for (int co = 0; co < layer.cout; ++co) {
        for (int ci = 0; ci < layer.cin; ++ci) {
            const std::vector<double> kv = layer.kernel_values(ci, co);
            std::copy(kv.begin(), kv.end(), k.plane(ci, co));
        }
    }
    return k;
}

/**
 * Full-overlap ("valid") region of the true 2-D convolution, computed either
 * by the quantum pipeline or by its direct classical twin with the same
 * decoded weights. The full linear output is cropped to rows/cols
 * [k-1, extent).
 */
inline Tensor3 conv2d_valid(const Tensor3 &x, const FourierConvLayer &layer,
                            bool quantum, const NoiseModel &noise) {
    const int kh = layer.kernel_dims[0];
    const int kw = layer.kernel_dims[1];
    const int vh = x.h - kh + 1;
    const int vw = x.w - kw + 1;
    check(vh > 0 && vw > 0, "conv2d_valid: kernel larger than input");

    Tensor3 full;
    if (quantum) {
        full = qconv_2d(x, layer, noise).output;
    } else {
        full = direct_conv_2d(x, decode_kernels(layer), ConvMode::Linear);
    }
    Tensor3 out(vh, vw, layer.cout);
    for (int co = 0; co < layer.cout; ++co) {
        for (int i = 0; i < vh; ++i) {
            for (int j = 0; j < vw; ++j) {
                out.at(i, j, co) = full.at(i + kh - 1, j + kw - 1, co);
            }
        }
    }
    return out;
}

/// 2x2 max pooling with argmax cache (flat full-input index per output cell).
inline Tensor3 max_pool_2x2(const Tensor3 &x, std::vector<std::size_t> &argmax) {
    check(x.h % 2 == 0 && x.w % 2 == 0, "max_pool_2x2: odd extent");
    Tensor3 out(x.h / 2, x.w / 2, x.c);
    argmax.assign(out.size(), 0);
    std::size_t o = 0;
    for (int k = 0; k < x.c; ++k) {
        for (int i = 0; i < out.h; ++i) {
            for (int j = 0; j < out.w; ++j) {
                double best = -1e300;
                std::size_t best_idx = 0;
                for (int di = 0; di < 2; ++di) {
                    for (int dj = 0; dj < 2; ++dj) {
                        const std::size_t idx =
                            (static_cast<std::size_t>(k) * x.h + 2 * i + di) *
                                x.w +
                            2 * j + dj;
                        if (x.data[idx] > best) {
                            best = x.data[idx];
                            best_idx = idx;
                        }
                    }
                }
                out.data[o] = best;
                argmax[o] = best_idx;
                ++o;
            }
        }
    }
    return out;
}

inline Tensor3 cap_tensor(const Tensor3 &x, double cap_c) {
    Tensor3 out = x;
    for (double &v : out.data) {
        v = cap_scalar(v, cap_c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// QFCN classifier
// ---------------------------------------------------------------------------

struct ClassifierConfig {
    int image_size = 28;
    int k1 = 5;
    int c1 = 8;
    int k2 = 5;
    int c2 = 16;
    int n_classes = 10;
    double cap_c = 10.0;
    double eps = 0.0;
    std::uint64_t seed = 0;
};

/**
 * The QFCN image classifier:
 * qconv(k1, 1 -> c1) -> cap -> 2x2 pool -> qconv(k2, c1 -> c2) -> cap ->
 * 2x2 pool -> dense -> softmax. `use_quantum = false` swaps every Fourier
 * layer for its direct-convolution twin with identical decoded weights.
 */
struct QfcnClassifier {
    ClassifierConfig cfg;
    FourierConvLayer conv1;
    FourierConvLayer conv2;
    std::vector<double> dense_w; // n_classes x feat, row-major
    std::vector<double> dense_b;
    NoiseModel noise;
    bool use_quantum = true;

    int valid1() const { return cfg.image_size - cfg.k1 + 1; }
    int pooled1() const { return valid1() / 2; }
    int valid2() const { return pooled1() - cfg.k2 + 1; }
    int pooled2() const { return valid2() / 2; }
    int feat() const { return pooled2() * pooled2() * cfg.c2; }
};

inline QfcnClassifier build_mnist_qfcn(const ClassifierConfig &cfg) {
    check(cfg.image_size > cfg.k1 && cfg.k1 >= 1 && cfg.k2 >= 1,
          "build_mnist_qfcn: bad kernel sizes");
    QfcnClassifier model;
    model.cfg = cfg;
    model.noise.eps = cfg.eps;
    model.noise.cap_c = cfg.cap_c;
    model.noise.seed = cfg.seed;

    CounterRng rng(cfg.seed, 0x696e6974ULL);
    auto random_kernel4 = [&](int k, int cin, int cout) {
        Kernel4 bank(k, k, cin, cout);
        const double std_dev = std::sqrt(2.0 / (k * k * cin));
        for (double &v : bank.data) {
            v = std_dev * rng.gaussian();
        }
        return bank;
    };

    const std::size_t pad1 = next_pow2(cfg.image_size + cfg.k1 - 1);
    model.conv1 = FourierConvLayer::from_kernel_2d(
        random_kernel4(cfg.k1, 1, cfg.c1), pad1, pad1, ConvMode::Linear);
    model.conv1.backend = ConvBackend::Fast;

    const int p1 = model.pooled1();
    const std::size_t pad2 = next_pow2(p1 + cfg.k2 - 1);
    model.conv2 = FourierConvLayer::from_kernel_2d(
        random_kernel4(cfg.k2, cfg.c1, cfg.c2), pad2, pad2, ConvMode::Linear);
    model.conv2.backend = ConvBackend::Fast;

    const int feat = model.feat();
    model.dense_w.resize(static_cast<std::size_t>(cfg.n_classes) * feat);
    const double d_std = std::sqrt(1.0 / feat);
    for (double &v : model.dense_w) {
        v = d_std * rng.gaussian();
    }
    model.dense_b.assign(cfg.n_classes, 0.0);
    return model;
}

struct ClassifierCache {
    Tensor3 x;  // lifted input
    Tensor3 y1; // conv1 valid output, pre-cap
    Tensor3 c1;
    Tensor3 m1;
    std::vector<std::size_t> arg1;
    Tensor3 y2;
    Tensor3 c2;
    Tensor3 m2;
    std::vector<std::size_t> arg2;
    std::vector<double> logits;
    std::vector<double> probs;
};

/// Full forward pass; `sample_seed` decorrelates injected noise per image.
inline ClassifierCache classifier_forward(const QfcnClassifier &model,
                                          const Tensor3 &image,
                                          std::uint64_t sample_seed = 0) {
    check(image.h == model.cfg.image_size && image.w == model.cfg.image_size &&
              image.c == 1,
          "classifier_forward: wrong input shape");
    ClassifierCache cache;
    cache.x = lift_zero_planes(image);

    NoiseModel nm1 = model.noise;
    nm1.seed = detail::mix_seed(model.noise.seed, 2 * sample_seed);
    cache.y1 = conv2d_valid(cache.x, model.conv1, model.use_quantum, nm1);
    cache.c1 = cap_tensor(cache.y1, model.cfg.cap_c);
    cache.m1 = max_pool_2x2(cache.c1, cache.arg1);

    NoiseModel nm2 = model.noise;
    nm2.seed = detail::mix_seed(model.noise.seed, 2 * sample_seed + 1);
    cache.y2 = conv2d_valid(lift_zero_planes(cache.m1), model.conv2,
                            model.use_quantum, nm2);
    cache.c2 = cap_tensor(cache.y2, model.cfg.cap_c);
    cache.m2 = max_pool_2x2(cache.c2, cache.arg2);

    const int feat = model.feat();
    const int nc = model.cfg.n_classes;
    cache.logits.assign(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
        double s = model.dense_b[c];
        const double *w = model.dense_w.data() + static_cast<std::size_t>(c) * feat;
        for (int i = 0; i < feat; ++i) {
            s += w[i] * cache.m2.data[i];
        }
        cache.logits[c] = s;
    }
    cache.probs = softmax(cache.logits);
    return cache;
}

inline std::vector<double> classify(const QfcnClassifier &model,
                                    const Tensor3 &image,
                                    std::uint64_t sample_seed = 0) {
    return classifier_forward(model, image, sample_seed).probs;
}

// ---------------------------------------------------------------------------
// Classifier parameters and gradients
// ---------------------------------------------------------------------------

namespace detail {

inline void append_layer_params(const FourierConvLayer &layer,
                                std::vector<double> &out) {
    for (const SliceParams &sp : layer.slices) {
        out.insert(out.end(), sp.tree.angles.begin(), sp.tree.angles.end());
        out.push_back(sp.scale);
    }
}

inline std::size_t read_layer_params(FourierConvLayer &layer,
                                     const std::vector<double> &v,
                                     std::size_t pos) {
    for (SliceParams &sp : layer.slices) {
        for (double &a : sp.tree.angles) {
            a = v[pos++];
        }
        sp.scale = v[pos++];
        if (std::abs(sp.scale) < 1e-12) {
            sp.scale = 1e-12; // keep the slice encodable
        }
    }
    return pos;
}

/// Chains dL/d(kernel values) of every slice into dL/d(angles, scale).
inline void append_layer_grads(const FourierConvLayer &layer,
                               const Kernel4 &dk, std::vector<double> &out) {
    const std::size_t klen = layer.kernel_len();
    for (int co = 0; co < layer.cout; ++co) {
        for (int ci = 0; ci < layer.cin; ++ci) {
            const SliceParams &sp = layer.slice(ci, co);
            const double *dkp = dk.plane(ci, co);
            const std::vector<double> leaves = angles_to_kernel(sp.tree);
            const std::vector<std::vector<double>> jac = tree_jacobian(sp.tree);
            for (std::size_t a = 0; a < sp.tree.angles.size(); ++a) {
                double s = 0.0;
                for (std::size_t i = 0; i < klen; ++i) {
                    s += jac[a][i] * sp.scale * dkp[i];
                }
                out.push_back(s);
            }
            double ds = 0.0;
            for (std::size_t i = 0; i < klen; ++i) {
                ds += leaves[i] * dkp[i];
            }
            out.push_back(ds);
        }
    }
}

} // namespace detail

inline std::vector<double> classifier_params(const QfcnClassifier &model) {
    std::vector<double> v;
    detail::append_layer_params(model.conv1, v);
    detail::append_layer_params(model.conv2, v);
    v.insert(v.end(), model.dense_w.begin(), model.dense_w.end());
    v.insert(v.end(), model.dense_b.begin(), model.dense_b.end());
    return v;
}

inline void set_classifier_params(QfcnClassifier &model,
                                  const std::vector<double> &v) {
    std::size_t pos = detail::read_layer_params(model.conv1, v, 0);
    pos = detail::read_layer_params(model.conv2, v, pos);
    check(v.size() == pos + model.dense_w.size() + model.dense_b.size(),
          "set_classifier_params: parameter count mismatch");
    std::copy(v.begin() + pos, v.begin() + pos + model.dense_w.size(),
              model.dense_w.begin());
    pos += model.dense_w.size();
    std::copy(v.begin() + pos, v.end(), model.dense_b.begin());
}

namespace detail {

/// dK and dX of a valid-cropped true convolution given upstream dY.
inline void conv2d_valid_backward(const Tensor3 &x, const Kernel4 &k,
                                  const Tensor3 &dy, Kernel4 &dk, Tensor3 *dx) {
    const int kh = k.h;
    const int kw = k.w;
    for (int co = 0; co < k.cout; ++co) {
        const double *dyp = dy.plane(co);
        for (int ci = 0; ci < k.cin; ++ci) {
            const double *xp = x.plane(ci);
            double *dkp = dk.plane(ci, co);
            for (int a = 0; a < kh; ++a) {
                for (int b = 0; b < kw; ++b) {
                    double s = 0.0;
                    for (int m1 = 0; m1 < dy.h; ++m1) {
                        const double *xrow =
                            xp + (m1 + kh - 1 - a) * x.w + (kw - 1 - b);
                        const double *dyrow = dyp + m1 * dy.w;
                        for (int m2 = 0; m2 < dy.w; ++m2) {
                            s += dyrow[m2] * xrow[m2];
                        }
                    }
                    dkp[a * kw + b] += s;
                }
            }
        }
    }
    if (dx != nullptr) {
        for (int ci = 0; ci < k.cin; ++ci) {
            double *dxp = dx->plane(ci);
            for (int co = 0; co < k.cout; ++co) {
                const double *dyp = dy.plane(co);
                const double *kp = k.plane(ci, co);
                for (int a = 0; a < kh; ++a) {
                    for (int b = 0; b < kw; ++b) {
                        const double kv = kp[a * kw + b];
                        if (kv == 0.0) {
                            continue;
                        }
                        for (int m1 = 0; m1 < dy.h; ++m1) {
                            const int i = m1 + kh - 1 - a;
                            double *dxrow = dxp + i * x.w + (kw - 1 - b);
                            const double *dyrow = dyp + m1 * dy.w;
                            for (int m2 = 0; m2 < dy.w; ++m2) {
                                dxrow[m2] += kv * dyrow[m2];
                            }
                        }
                    }
                }
            }
        }
    }
}

} // namespace detail

struct ClassifierGrads {
    Kernel4 dk1;
    Kernel4 dk2;
    std::vector<double> dw;
    std::vector<double> db;
};

/**
 * Reverse pass for one sample: cross-entropy against `label`, gradients of the
 * dense layer and both kernel banks. Convolution layers are differentiated as
 * the linear maps they compute; injected noise is treated straight-through.
 */
inline void classifier_backward(const QfcnClassifier &model,
                                const ClassifierCache &cache, int label,
                                const Kernel4 &k1, const Kernel4 &k2,
                                ClassifierGrads &grads) {
    const int nc = model.cfg.n_classes;
    const int feat = model.feat();
    check(label >= 0 && label < nc, "classifier_backward: label out of range");

    std::vector<double> dlogits = cache.probs;
    dlogits[label] -= 1.0;

    std::vector<double> dflat(feat, 0.0);
    for (int c = 0; c < nc; ++c) {
        const double g = dlogits[c];
        double *dw = grads.dw.data() + static_cast<std::size_t>(c) * feat;
        const double *w =
            model.dense_w.data() + static_cast<std::size_t>(c) * feat;
        for (int i = 0; i < feat; ++i) {
            dw[i] += g * cache.m2.data[i];
            dflat[i] += g * w[i];
        }
        grads.db[c] += g;
    }

    // Unpool and cap-mask back to conv2's valid output.
    Tensor3 dy2(cache.y2.h, cache.y2.w, cache.y2.c);
    for (std::size_t o = 0; o < cache.arg2.size(); ++o) {
        const std::size_t idx = cache.arg2[o];
        const double pre = cache.y2.data[idx];
        if (pre > 0.0 && pre < model.cfg.cap_c) {
            dy2.data[idx] += dflat[o];
        }
    }
    Tensor3 dm1(cache.m1.h, cache.m1.w, cache.m1.c);
    detail::conv2d_valid_backward(cache.m1, k2, dy2, grads.dk2, &dm1);

    Tensor3 dy1(cache.y1.h, cache.y1.w, cache.y1.c);
    for (std::size_t o = 0; o < cache.arg1.size(); ++o) {
        const std::size_t idx = cache.arg1[o];
        const double pre = cache.y1.data[idx];
        if (pre > 0.0 && pre < model.cfg.cap_c) {
            dy1.data[idx] += dm1.data[o];
        }
    }
    detail::conv2d_valid_backward(cache.x, k1, dy1, grads.dk1, nullptr);
}

// ---------------------------------------------------------------------------
// Classifier training
// ---------------------------------------------------------------------------

struct ImageDataset {
    std::vector<Tensor3> images;
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
};

struct EpochMetrics {
    double loss = 0.0;
    double accuracy = 0.0;
    double mae = 0.0;
    double mse = 0.0;
    double wall_seconds = 0.0;
};

inline EpochMetrics evaluate_classifier(const QfcnClassifier &model,
                                        const ImageDataset &data,
                                        std::uint64_t seed_base = 1u << 20) {
    EpochMetrics m;
    std::size_t correct = 0;
    std::vector<std::vector<double>> probs;
    probs.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        probs.push_back(classify(model, data.images[i], seed_base + i));
        const std::size_t arg = static_cast<std::size_t>(
            std::max_element(probs.back().begin(), probs.back().end()) -
            probs.back().begin());
        if (static_cast<int>(arg) == data.labels[i]) {
            ++correct;
        }
    }
    m.loss = cross_entropy(probs, data.labels);
    m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return m;
}

/**
 * One SGD epoch over the dataset: shuffled mini-batches, analytic gradients
 * with the angle-tree chain rule, one optimizer step per batch. Returns mean
 * training loss and accuracy.
 */
inline EpochMetrics train_epoch_classifier(QfcnClassifier &model,
                                           const ImageDataset &data,
                                           const TrainConfig &config,
                                           SgdOptimizer &opt, int epoch) {
    check(data.size() > 0, "train_epoch_classifier: empty dataset");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng shuffle_rng(detail::mix_seed(config.seed, 0x65706f63ULL + epoch),
                           0x73687566ULL);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }

    EpochMetrics metrics;
    std::size_t correct = 0;
    double loss_sum = 0.0;
    const int nc = model.cfg.n_classes;
    const int feat = model.feat();

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t end = std::min(
            order.size(), start + static_cast<std::size_t>(config.batch_size));

        const Kernel4 k1 = decode_kernels(model.conv1);
        const Kernel4 k2 = decode_kernels(model.conv2);
        ClassifierGrads grads;
        grads.dk1 = Kernel4(k1.h, k1.w, k1.cin, k1.cout);
        grads.dk2 = Kernel4(k2.h, k2.w, k2.cin, k2.cout);
        grads.dw.assign(static_cast<std::size_t>(nc) * feat, 0.0);
        grads.db.assign(nc, 0.0);

        for (std::size_t s = start; s < end; ++s) {
            const std::size_t i = order[s];
            const std::uint64_t sample_seed =
                detail::mix_seed(config.seed, (epoch + 1) * 1000003ULL + i);
            const ClassifierCache cache =
                classifier_forward(model, data.images[i], sample_seed);
            loss_sum += -std::log(std::max(cache.probs[data.labels[i]], 1e-12));
            const std::size_t arg = static_cast<std::size_t>(
                std::max_element(cache.probs.begin(), cache.probs.end()) -
                cache.probs.begin());
            if (static_cast<int>(arg) == data.labels[i]) {
                ++correct;
            }
            classifier_backward(model, cache, data.labels[i], k1, k2, grads);
        }

        const double inv = 1.0 / static_cast<double>(end - start);
        for (double &v : grads.dk1.data) {
            v *= inv;
        }
        for (double &v : grads.dk2.data) {
            v *= inv;
        }
        for (double &v : grads.dw) {
            v *= inv;
        }
        for (double &v : grads.db) {
            v *= inv;
        }

        std::vector<double> flat_grad;
        detail::append_layer_grads(model.conv1, grads.dk1, flat_grad);
        detail::append_layer_grads(model.conv2, grads.dk2, flat_grad);
        flat_grad.insert(flat_grad.end(), grads.dw.begin(), grads.dw.end());
        flat_grad.insert(flat_grad.end(), grads.db.begin(), grads.db.end());

        std::vector<double> params = classifier_params(model);
        opt.step(params, flat_grad);
        set_classifier_params(model, params);
    }

    metrics.loss = loss_sum / static_cast<double>(order.size());
    metrics.accuracy =
        static_cast<double>(correct) / static_cast<double>(order.size());
    return metrics;
}

// ---------------------------------------------------------------------------
// Image datasets
// ---------------------------------------------------------------------------

/// IDX bytes to [0,1]-scaled single-channel tensors.
inline ImageDataset mnist_to_tensors(const MnistSet &set, std::size_t offset,
                                     std::size_t count) {
    check(offset + count <= set.count, "mnist_to_tensors: range out of bounds");
    ImageDataset data;
    data.images.reserve(count);
    data.labels.reserve(count);
    for (std::size_t i = offset; i < offset + count; ++i) {
        Tensor3 img(set.rows, set.cols, 1);
        const std::uint8_t *p = set.image(i);
        for (std::size_t j = 0; j < img.size(); ++j) {
            img.data[j] = static_cast<double>(p[j]) / 255.0;
        }
        data.images.push_back(std::move(img));
        data.labels.push_back(static_cast<int>(set.labels[i]));
    }
    return data;
}

namespace detail {

/// Seven-segment stroke table; each segment is a line on a 28x28 canvas.
inline const std::vector<std::array<double, 4>> &digit_segments(int digit) {
    // Segments: A top, B upper right, C lower right, D bottom, E lower left,
    // F upper left, G middle.
    static const std::array<double, 4> seg[7] = {
        {8, 5, 20, 5},   // A
        {20, 5, 20, 14}, // B
        {20, 14, 20, 23},// C
        {8, 23, 20, 23}, // D
        {8, 14, 8, 23},  // E
        {8, 5, 8, 14},   // F
        {8, 14, 20, 14}, // G
    };
    static const std::vector<std::vector<int>> table = {
        {0, 1, 2, 3, 4, 5},    // 0
        {1, 2},                // 1
        {0, 1, 6, 4, 3},       // 2
        {0, 1, 6, 2, 3},       // 3
        {5, 6, 1, 2},          // 4
        {0, 5, 6, 2, 3},       // 5
        {0, 5, 6, 4, 2, 3},    // 6
        {0, 1, 2},             // 7
        {0, 1, 2, 3, 4, 5, 6}, // 8
        {0, 1, 6, 5, 2, 3},    // 9
    };
    static std::vector<std::vector<std::array<double, 4>>> cache = [] {
        std::vector<std::vector<std::array<double, 4>>> out(10);
        for (int d = 0; d < 10; ++d) {
            for (int s : table[d]) {
                out[d].push_back(seg[s]);
            }
        }
        return out;
    }();
    return cache[digit];
}

} // namespace detail

/**
 * Deterministic procedural digit images: jittered, scaled and blurred
 * seven-segment strokes with pixel noise, in the same byte layout as the IDX
 * files. A stand-in corpus for environments without the MNIST download.
 */
inline MnistSet render_digit_set(std::size_t count, std::uint64_t seed) {
    MnistSet set;
    set.count = count;
    set.rows = 28;
    set.cols = 28;
    set.images.assign(count * 28 * 28, 0);
    set.labels.resize(count);

    for (std::size_t idx = 0; idx < count; ++idx) {
        CounterRng rng(detail::mix_seed(seed, idx), 0x64696769ULL);
        const int digit = static_cast<int>(idx % 10);
        set.labels[idx] = static_cast<std::uint8_t>(digit);

        const double scale = rng.uniform(0.8, 1.12);
        const double dx = rng.uniform(-2.2, 2.2);
        const double dy = rng.uniform(-2.2, 2.2);
        const double pen = rng.uniform(0.8, 1.35);
        const double shear = rng.uniform(-0.12, 0.12);

        std::vector<std::array<double, 4>> strokes;
        for (std::array<double, 4> s : detail::digit_segments(digit)) {
            for (int e = 0; e < 2; ++e) {
                double x = s[2 * e];
                double y = s[2 * e + 1];
                x = 14.0 + scale * (x - 14.0) + shear * (y - 14.0) + dx +
                    rng.uniform(-0.8, 0.8);
                y = 14.0 + scale * (y - 14.0) + dy + rng.uniform(-0.8, 0.8);
                s[2 * e] = x;
                s[2 * e + 1] = y;
            }
            strokes.push_back(s);
        }

        std::uint8_t *img = set.images.data() + idx * 28 * 28;
        for (int py = 0; py < 28; ++py) {
            for (int px = 0; px < 28; ++px) {
                double intensity = 0.0;
                for (const std::array<double, 4> &s : strokes) {
                    const double ax = s[0], ay = s[1], bx = s[2], by = s[3];
                    const double vx = bx - ax, vy = by - ay;
                    const double len2 = vx * vx + vy * vy;
                    double t = len2 > 0.0
                                   ? ((px - ax) * vx + (py - ay) * vy) / len2
                                   : 0.0;
                    t = std::clamp(t, 0.0, 1.0);
                    const double ddx = px - (ax + t * vx);
                    const double ddy = py - (ay + t * vy);
                    const double d2 = ddx * ddx + ddy * ddy;
                    intensity = std::max(
                        intensity, std::exp(-d2 / (2.0 * pen * pen)));
                }
                intensity += 0.04 * rng.uniform();
                img[py * 28 + px] = static_cast<std::uint8_t>(
                    std::clamp(intensity, 0.0, 1.0) * 255.0);
            }
        }
    }
    return set;
}

// ---------------------------------------------------------------------------
// Spatio-temporal forecaster
// ---------------------------------------------------------------------------

struct SeriesDataset {
    std::vector<std::vector<double>> values; // steps x nodes
    std::vector<std::vector<double>> adjacency;
    std::size_t train_steps = 0; // first train_steps rows are training

    std::size_t nodes() const { return values.empty() ? 0 : values[0].size(); }
    std::size_t steps() const { return values.size(); }
};

/**
 * Synthetic desk-scale spatio-temporal dataset: random geometric graph,
 * damped graph-diffusion dynamics with per-node sinusoidal forcing and a
 * small process noise. Deterministic per seed; 80/20 train/validation split
 * by time.
 */
inline SeriesDataset synth_st_dataset(std::size_t nodes, std::size_t steps,
                                      std::uint64_t seed) {
    check(nodes >= 2, "synth_st_dataset: need at least 2 nodes");
    check(steps >= 20, "synth_st_dataset: need at least 20 steps");
    CounterRng rng(seed, 0x73796e74ULL);

    std::vector<double> px(nodes), py(nodes);
    for (std::size_t v = 0; v < nodes; ++v) {
        px[v] = rng.uniform();
        py[v] = rng.uniform();
    }
    SeriesDataset ds;
    ds.adjacency.assign(nodes, std::vector<double>(nodes, 0.0));
    for (std::size_t u = 0; u < nodes; ++u) {
        for (std::size_t v = u + 1; v < nodes; ++v) {
            const double d2 = (px[u] - px[v]) * (px[u] - px[v]) +
                              (py[u] - py[v]) * (py[u] - py[v]);
            if (d2 < 0.45 * 0.45) {
                const double w = std::exp(-d2 / 0.1);
                ds.adjacency[u][v] = w;
                ds.adjacency[v][u] = w;
            }
        }
    }

    // Row-normalized adjacency with self loops for the simulation dynamics.
    std::vector<std::vector<double>> wn(nodes, std::vector<double>(nodes, 0.0));
    for (std::size_t u = 0; u < nodes; ++u) {
        double row = 1.0;
        for (std::size_t v = 0; v < nodes; ++v) {
            row += ds.adjacency[u][v];
        }
        for (std::size_t v = 0; v < nodes; ++v) {
            wn[u][v] = ds.adjacency[u][v] / row;
        }
        wn[u][u] += 1.0 / row;
    }

    std::vector<double> phase(nodes), amp(nodes);
    for (std::size_t v = 0; v < nodes; ++v) {
        phase[v] = rng.uniform(0.0, 2.0 * kPi);
        amp[v] = rng.uniform(0.5, 1.1);
    }

    ds.values.assign(steps, std::vector<double>(nodes, 0.0));
    std::vector<double> x(nodes);
    for (std::size_t v = 0; v < nodes; ++v) {
        x[v] = 2.0 + rng.uniform(-0.5, 0.5);
    }
    std::vector<double> drive(nodes);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t v = 0; v < nodes; ++v) {
            const double forcing =
                amp[v] * std::sin(2.0 * kPi * static_cast<double>(t) / 48.0 +
                                  phase[v]);
            // decay 0.9 < 1 keeps the diffusion stationary around
            // 0.3 / (1 - 0.9) = 3 with the sinusoid superimposed
            drive[v] = 0.9 * x[v] + 0.12 * forcing;
        }
        for (std::size_t u = 0; u < nodes; ++u) {
            double mixed = 0.0;
            for (std::size_t v = 0; v < nodes; ++v) {
                mixed += wn[u][v] * drive[v];
            }
            x[u] = std::max(mixed + 0.01 * rng.gaussian() + 0.3, 0.05);
            ds.values[t][u] = x[u];
        }
    }
    ds.train_steps = steps * 8 / 10;
    return ds;
}

struct ForecasterConfig {
    int window = 12;
    int kt = 3;
    double cap_c = 10.0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    bool use_gate = true;
};

/**
 * qf temporal forecaster: per-node gated temporal quantum convolution
 * (P * sigmoid(Q)), graph mixing cap(W_norm X Theta), a second temporal
 * quantum convolution with cap, and a shared dense head predicting the next
 * value per node.
 */
struct QfTemporalForecaster {
    ForecasterConfig cfg;
    FourierConvLayer conv_p;
    FourierConvLayer conv_q;
    FourierConvLayer conv_2;
    std::vector<double> theta; // l1 x l1, row-major
    std::vector<double> head_w;
    double head_b = 0.0;
    std::vector<std::vector<double>> w_norm; // row-normalized adjacency
    NoiseModel noise;
    bool use_quantum = true;

    int l1() const { return cfg.window - cfg.kt + 1; }
    int l2() const { return l1() - cfg.kt + 1; }
};

/// Row-normalized adjacency with self loops.
inline std::vector<std::vector<double>>
normalize_adjacency(const std::vector<std::vector<double>> &adj) {
    const std::size_t n = adj.size();
    std::vector<std::vector<double>> wn(n, std::vector<double>(n, 0.0));
    for (std::size_t u = 0; u < n; ++u) {
        check(adj[u].size() == n, "normalize_adjacency: matrix not square");
        double row = 1.0;
        for (std::size_t v = 0; v < n; ++v) {
            check(adj[u][v] >= 0.0, "normalize_adjacency: negative weight");
            row += adj[u][v];
        }
        for (std::size_t v = 0; v < n; ++v) {
            wn[u][v] = adj[u][v] / row;
        }
        wn[u][u] += 1.0 / row;
    }
    return wn;
}

inline QfTemporalForecaster
build_qf_forecaster(const ForecasterConfig &cfg,
                    const std::vector<std::vector<double>> &adjacency) {
    check(cfg.kt >= 1 && cfg.kt < cfg.window,
          "build_qf_forecaster: kernel width must be below the window");
    QfTemporalForecaster model;
    model.cfg = cfg;
    model.noise.eps = cfg.eps;
    model.noise.cap_c = cfg.cap_c;
    model.noise.seed = cfg.seed;
    model.w_norm = normalize_adjacency(adjacency);

    CounterRng rng(cfg.seed, 0x66637374ULL);
    const std::size_t pad = next_pow2(cfg.window + cfg.kt - 1);
    auto random_layer = [&]() {
        std::vector<double> k(cfg.kt);
        for (double &v : k) {
            v = 0.6 * rng.gaussian();
        }
        FourierConvLayer layer =
            FourierConvLayer::from_kernel_1d(k, pad, ConvMode::Linear);
        layer.backend = ConvBackend::Fast;
        return layer;
    };
    model.conv_p = random_layer();
    model.conv_q = random_layer();
    model.conv_2 = random_layer();

    const int l1 = model.l1();
    model.theta.resize(static_cast<std::size_t>(l1) * l1);
    const double t_std = 0.4 / std::sqrt(static_cast<double>(l1));
    for (double &v : model.theta) {
        v = t_std * rng.gaussian();
    }
    model.head_w.resize(model.l2());
    for (double &v : model.head_w) {
        v = 0.4 * rng.gaussian();
    }
    model.head_b = 0.0;
    return model;
}

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Valid region of the true 1-D convolution via the quantum layer or its twin.
inline std::vector<double> conv1d_valid(const std::vector<double> &x,
                                        const FourierConvLayer &layer,
                                        bool quantum, const NoiseModel &noise) {
    const int kt = layer.kernel_dims[0];
    std::vector<double> full;
    if (quantum) {
        full = qconv_1d(x, layer, noise).output;
    } else {
        full = direct_conv(x, layer.kernel_values(0, 0), ConvMode::Linear);
    }
    return std::vector<double>(full.begin() + (kt - 1),
                               full.begin() + static_cast<long>(x.size()));
}

} // namespace detail

struct ForecasterCache {
    std::vector<std::vector<double>> window; // V x M input rows
    std::vector<std::vector<double>> a;      // conv_p valid outputs
    std::vector<std::vector<double>> b;      // conv_q valid outputs
    std::vector<std::vector<double>> h1;     // gated features, V x l1
    std::vector<std::vector<double>> mixed;  // W_norm h1 Theta, pre-cap
    std::vector<std::vector<double>> h2;     // capped, V x l1
    std::vector<std::vector<double>> y3;     // conv_2 valid, pre-cap
    std::vector<std::vector<double>> h3;     // capped, V x l2
    std::vector<double> pred;                // V
};

inline ForecasterCache forecaster_forward(const QfTemporalForecaster &model,
                                          const std::vector<std::vector<double>> &window,
                                          std::uint64_t sample_seed = 0) {
    const std::size_t v_count = model.w_norm.size();
    check(window.size() == v_count, "forecaster_forward: node count mismatch");
    const int m = model.cfg.window;
    const int l1 = model.l1();
    const int l2 = model.l2();

    ForecasterCache cache;
    cache.window = window;
    cache.a.resize(v_count);
    cache.b.resize(v_count);
    cache.h1.resize(v_count);

    for (std::size_t v = 0; v < v_count; ++v) {
        check(static_cast<int>(window[v].size()) == m,
              "forecaster_forward: window length mismatch");
        std::vector<double> row = window[v];
        if (l2_norm(row) == 0.0) {
            std::fill(row.begin(), row.end(), 1e-6);
        }
        NoiseModel nm = model.noise;
        nm.seed = detail::mix_seed(model.noise.seed, 3 * (sample_seed * v_count + v));
        cache.a[v] = detail::conv1d_valid(row, model.conv_p, model.use_quantum, nm);
        if (model.cfg.use_gate) {
            nm.seed = detail::mix_seed(model.noise.seed,
                                       3 * (sample_seed * v_count + v) + 1);
            cache.b[v] =
                detail::conv1d_valid(row, model.conv_q, model.use_quantum, nm);
            cache.h1[v].resize(l1);
            for (int i = 0; i < l1; ++i) {
                cache.h1[v][i] = cache.a[v][i] * detail::sigmoid(cache.b[v][i]);
            }
        } else {
            cache.h1[v] = cache.a[v];
        }
    }

    // Graph mixing: cap(W_norm * H1 * Theta).
    cache.mixed.assign(v_count, std::vector<double>(l1, 0.0));
    cache.h2.assign(v_count, std::vector<double>(l1, 0.0));
    std::vector<std::vector<double>> spatial(v_count,
                                             std::vector<double>(l1, 0.0));
    for (std::size_t u = 0; u < v_count; ++u) {
        for (std::size_t w = 0; w < v_count; ++w) {
            const double a = model.w_norm[u][w];
            if (a == 0.0) {
                continue;
            }
            for (int i = 0; i < l1; ++i) {
                spatial[u][i] += a * cache.h1[w][i];
            }
        }
    }
    for (std::size_t u = 0; u < v_count; ++u) {
        for (int j = 0; j < l1; ++j) {
            double s = 0.0;
            for (int i = 0; i < l1; ++i) {
                s += spatial[u][i] * model.theta[static_cast<std::size_t>(i) * l1 + j];
            }
            cache.mixed[u][j] = s;
            cache.h2[u][j] = cap_scalar(s, model.cfg.cap_c);
        }
    }

    cache.y3.resize(v_count);
    cache.h3.resize(v_count);
    cache.pred.resize(v_count);
    for (std::size_t v = 0; v < v_count; ++v) {
        std::vector<double> row = cache.h2[v];
        if (l2_norm(row) == 0.0) {
            std::fill(row.begin(), row.end(), 1e-6);
        }
        NoiseModel nm = model.noise;
        nm.seed = detail::mix_seed(model.noise.seed,
                                   3 * (sample_seed * v_count + v) + 2);
        FourierConvLayer c2 = model.conv_2;
        // conv_2 runs on l1-length rows; its padding covers the window size.
        std::vector<double> full = detail::conv1d_valid(row, c2,
                                                        model.use_quantum, nm);
        cache.y3[v] = full;
        cache.h3[v].resize(l2);
        double pred = model.head_b;
        for (int i = 0; i < l2; ++i) {
            cache.h3[v][i] = cap_scalar(full[i], model.cfg.cap_c);
            pred += model.head_w[i] * cache.h3[v][i];
        }
        cache.pred[v] = pred;
    }
    return cache;
}

inline std::vector<double>
forecast(const QfTemporalForecaster &model,
         const std::vector<std::vector<double>> &window,
         std::uint64_t sample_seed = 0) {
    return forecaster_forward(model, window, sample_seed).pred;
}

// ---------------------------------------------------------------------------
// Forecaster parameters and training
// ---------------------------------------------------------------------------

inline std::vector<double>
forecaster_params(const QfTemporalForecaster &model) {
    std::vector<double> v;
    detail::append_layer_params(model.conv_p, v);
    detail::append_layer_params(model.conv_q, v);
    detail::append_layer_params(model.conv_2, v);
    v.insert(v.end(), model.theta.begin(), model.theta.end());
    v.insert(v.end(), model.head_w.begin(), model.head_w.end());
    v.push_back(model.head_b);
    return v;
}

inline void set_forecaster_params(QfTemporalForecaster &model,
                                  const std::vector<double> &v) {
    std::size_t pos = detail::read_layer_params(model.conv_p, v, 0);
    pos = detail::read_layer_params(model.conv_q, v, pos);
    pos = detail::read_layer_params(model.conv_2, v, pos);
    check(v.size() == pos + model.theta.size() + model.head_w.size() + 1,
          "set_forecaster_params: parameter count mismatch");
    std::copy(v.begin() + pos, v.begin() + pos + model.theta.size(),
              model.theta.begin());
    pos += model.theta.size();
    std::copy(v.begin() + pos, v.begin() + pos + model.head_w.size(),
              model.head_w.begin());
    model.head_b = v[pos + model.head_w.size()];
}

namespace detail {

/// dK and dX of a valid-cropped true 1-D convolution.
inline void conv1d_valid_backward(const std::vector<double> &x,
                                  const std::vector<double> &k,
                                  const std::vector<double> &dy,
                                  std::vector<double> &dk,
                                  std::vector<double> *dx) {
    const int kt = static_cast<int>(k.size());
    const int out = static_cast<int>(dy.size());
    for (int a = 0; a < kt; ++a) {
        double s = 0.0;
        for (int m = 0; m < out; ++m) {
            s += dy[m] * x[m + kt - 1 - a];
        }
        dk[a] += s;
    }
    if (dx != nullptr) {
        for (int a = 0; a < kt; ++a) {
            const double kv = k[a];
            for (int m = 0; m < out; ++m) {
                (*dx)[m + kt - 1 - a] += kv * dy[m];
            }
        }
    }
}

} // namespace detail

struct ForecasterGrads {
    std::vector<double> dkp, dkq, dk2;
    std::vector<double> dtheta;
    std::vector<double> dhw;
    double dhb = 0.0;
};

/// Reverse pass for one sample under squared error mean over nodes.
inline void forecaster_backward(const QfTemporalForecaster &model,
                                const ForecasterCache &cache,
                                const std::vector<double> &target,
                                ForecasterGrads &grads) {
    const std::size_t v_count = cache.pred.size();
    check(target.size() == v_count, "forecaster_backward: target size mismatch");
    const int l1 = model.l1();
    const int l2 = model.l2();
    const std::vector<double> kp = model.conv_p.kernel_values(0, 0);
    const std::vector<double> kq = model.conv_q.kernel_values(0, 0);
    const std::vector<double> k2 = model.conv_2.kernel_values(0, 0);

    std::vector<std::vector<double>> dh2(v_count,
                                         std::vector<double>(l1, 0.0));
    for (std::size_t v = 0; v < v_count; ++v) {
        const double dpred =
            2.0 * (cache.pred[v] - target[v]) / static_cast<double>(v_count);
        grads.dhb += dpred;
        std::vector<double> dy3(l2, 0.0);
        for (int i = 0; i < l2; ++i) {
            grads.dhw[i] += dpred * cache.h3[v][i];
            const double pre = cache.y3[v][i];
            if (pre > 0.0 && pre < model.cfg.cap_c) {
                dy3[i] = dpred * model.head_w[i];
            }
        }
        detail::conv1d_valid_backward(cache.h2[v], k2, dy3, grads.dk2,
                                      &dh2[v]);
    }

    // Back through cap(W_norm H1 Theta).
    std::vector<std::vector<double>> dmixed(v_count,
                                            std::vector<double>(l1, 0.0));
    for (std::size_t v = 0; v < v_count; ++v) {
        for (int j = 0; j < l1; ++j) {
            const double pre = cache.mixed[v][j];
            if (pre > 0.0 && pre < model.cfg.cap_c) {
                dmixed[v][j] = dh2[v][j];
            }
        }
    }
    // spatial = W_norm H1; mixed = spatial Theta.
    std::vector<std::vector<double>> spatial(v_count,
                                             std::vector<double>(l1, 0.0));
    for (std::size_t u = 0; u < v_count; ++u) {
        for (std::size_t w = 0; w < v_count; ++w) {
            const double a = model.w_norm[u][w];
            if (a == 0.0) {
                continue;
            }
            for (int i = 0; i < l1; ++i) {
                spatial[u][i] += a * cache.h1[w][i];
            }
        }
    }
    for (int i = 0; i < l1; ++i) {
        for (int j = 0; j < l1; ++j) {
            double s = 0.0;
            for (std::size_t u = 0; u < v_count; ++u) {
                s += spatial[u][i] * dmixed[u][j];
            }
            grads.dtheta[static_cast<std::size_t>(i) * l1 + j] += s;
        }
    }
    std::vector<std::vector<double>> dh1(v_count,
                                         std::vector<double>(l1, 0.0));
    for (std::size_t w = 0; w < v_count; ++w) {
        for (std::size_t u = 0; u < v_count; ++u) {
            const double a = model.w_norm[u][w];
            if (a == 0.0) {
                continue;
            }
            for (int i = 0; i < l1; ++i) {
                double s = 0.0;
                for (int j = 0; j < l1; ++j) {
                    s += model.theta[static_cast<std::size_t>(i) * l1 + j] *
                         dmixed[u][j];
                }
                dh1[w][i] += a * s;
            }
        }
    }

    for (std::size_t v = 0; v < v_count; ++v) {
        std::vector<double> da(l1, 0.0);
        std::vector<double> db(l1, 0.0);
        if (model.cfg.use_gate) {
            for (int i = 0; i < l1; ++i) {
                const double sig = detail::sigmoid(cache.b[v][i]);
                da[i] = dh1[v][i] * sig;
                db[i] = dh1[v][i] * cache.a[v][i] * sig * (1.0 - sig);
            }
        } else {
            da = dh1[v];
        }
        detail::conv1d_valid_backward(cache.window[v], kp, da, grads.dkp,
                                      nullptr);
        if (model.cfg.use_gate) {
            detail::conv1d_valid_backward(cache.window[v], kq, db, grads.dkq,
                                          nullptr);
        }
    }
}

/// Next-step samples (window, target) drawn from a step range of the series.
inline std::vector<std::pair<std::vector<std::vector<double>>, std::vector<double>>>
make_forecast_samples(const SeriesDataset &ds, int window, std::size_t lo,
                      std::size_t hi) {
    check(hi <= ds.steps() && lo + window < hi,
          "make_forecast_samples: bad step range");
    const std::size_t v_count = ds.nodes();
    std::vector<std::pair<std::vector<std::vector<double>>, std::vector<double>>>
        samples;
    for (std::size_t t = lo + window; t < hi; ++t) {
        std::vector<std::vector<double>> win(v_count,
                                             std::vector<double>(window));
        for (std::size_t v = 0; v < v_count; ++v) {
            for (int i = 0; i < window; ++i) {
                win[v][i] = ds.values[t - window + i][v];
            }
        }
        samples.emplace_back(std::move(win), ds.values[t]);
    }
    return samples;
}

inline EpochMetrics evaluate_forecaster(
    const QfTemporalForecaster &model,
    const std::vector<std::pair<std::vector<std::vector<double>>,
                                std::vector<double>>> &samples,
    std::uint64_t seed_base = 1u << 21) {
    EpochMetrics m;
    std::vector<double> preds;
    std::vector<double> truths;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const std::vector<double> p =
            forecast(model, samples[s].first, seed_base + s);
        preds.insert(preds.end(), p.begin(), p.end());
        truths.insert(truths.end(), samples[s].second.begin(),
                      samples[s].second.end());
    }
    m.mae = mae(preds, truths);
    m.mse = mse(preds, truths);
    m.loss = m.mse;
    return m;
}

inline EpochMetrics train_epoch_forecaster(
    QfTemporalForecaster &model,
    const std::vector<std::pair<std::vector<std::vector<double>>,
                                std::vector<double>>> &samples,
    const TrainConfig &config, SgdOptimizer &opt, int epoch) {
    check(!samples.empty(), "train_epoch_forecaster: no samples");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng shuffle_rng(detail::mix_seed(config.seed, 0x74736870ULL + epoch),
                           0x73687566ULL);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }

    const int l1 = model.l1();
    const int l2 = model.l2();
    double loss_sum = 0.0;
    double mae_sum = 0.0;
    std::size_t value_count = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t end = std::min(
            order.size(), start + static_cast<std::size_t>(config.batch_size));
        ForecasterGrads grads;
        grads.dkp.assign(model.cfg.kt, 0.0);
        grads.dkq.assign(model.cfg.kt, 0.0);
        grads.dk2.assign(model.cfg.kt, 0.0);
        grads.dtheta.assign(static_cast<std::size_t>(l1) * l1, 0.0);
        grads.dhw.assign(l2, 0.0);
        grads.dhb = 0.0;

        for (std::size_t s = start; s < end; ++s) {
            const std::size_t i = order[s];
            const std::uint64_t sample_seed =
                detail::mix_seed(config.seed, (epoch + 1) * 7777777ULL + i);
            const ForecasterCache cache =
                forecaster_forward(model, samples[i].first, sample_seed);
            for (std::size_t v = 0; v < cache.pred.size(); ++v) {
                const double d = cache.pred[v] - samples[i].second[v];
                loss_sum += d * d;
                mae_sum += std::abs(d);
                ++value_count;
            }
            forecaster_backward(model, cache, samples[i].second, grads);
        }

        const double inv = 1.0 / static_cast<double>(end - start);
        auto scale_vec = [&](std::vector<double> &v) {
            for (double &x : v) {
                x *= inv;
            }
        };
        scale_vec(grads.dkp);
        scale_vec(grads.dkq);
        scale_vec(grads.dk2);
        scale_vec(grads.dtheta);
        scale_vec(grads.dhw);
        grads.dhb *= inv;

        std::vector<double> flat_grad;
        auto chain_layer = [&](const FourierConvLayer &layer,
                               const std::vector<double> &dk) {
            const SliceParams &sp = layer.slice(0, 0);
            const std::vector<double> leaves = angles_to_kernel(sp.tree);
            const std::vector<std::vector<double>> jac = tree_jacobian(sp.tree);
            for (std::size_t a = 0; a < sp.tree.angles.size(); ++a) {
                double s = 0.0;
                for (std::size_t i = 0; i < dk.size(); ++i) {
                    s += jac[a][i] * sp.scale * dk[i];
                }
                flat_grad.push_back(s);
            }
            double ds = 0.0;
            for (std::size_t i = 0; i < dk.size(); ++i) {
                ds += leaves[i] * dk[i];
            }
            flat_grad.push_back(ds);
        };
        chain_layer(model.conv_p, grads.dkp);
        chain_layer(model.conv_q, grads.dkq);
        chain_layer(model.conv_2, grads.dk2);
        flat_grad.insert(flat_grad.end(), grads.dtheta.begin(),
                         grads.dtheta.end());
        flat_grad.insert(flat_grad.end(), grads.dhw.begin(), grads.dhw.end());
        flat_grad.push_back(grads.dhb);

        std::vector<double> params = forecaster_params(model);
        opt.step(params, flat_grad);
        set_forecaster_params(model, params);
    }

    EpochMetrics metrics;
    metrics.mse = loss_sum / static_cast<double>(value_count);
    metrics.mae = mae_sum / static_cast<double>(value_count);
    metrics.loss = metrics.mse;
    return metrics;
}

/// Persistence baseline (predict the previous value) over a step range.
inline double persistence_mae(const SeriesDataset &ds, std::size_t lo,
                              std::size_t hi) {
    check(lo >= 1 && hi <= ds.steps() && lo < hi, "persistence_mae: bad range");
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t t = lo; t < hi; ++t) {
        for (std::size_t v = 0; v < ds.nodes(); ++v) {
            s += std::abs(ds.values[t][v] - ds.values[t - 1][v]);
            ++n;
        }
    }
    return s / static_cast<double>(n);
}

} // namespace qfcn
