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
// Hybrid optimization: parameter-shift gradients over qRAM-stored angles,
// analytic reverse-mode differentiation through the linear convolution
// pipeline, finite-difference verification, and SGD with momentum.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "angle_tree.hpp"
#include "encode.hpp"
#include "fourier_conv.hpp"
#include "reference.hpp"

namespace qfcn {

enum class GradMode { Analytic, ParameterShift, FiniteDifference };

enum class LossKind { Mse, CrossEntropy };

struct LossSpec {
    LossKind kind = LossKind::Mse;
    // reduction is always the mean
};

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    int epochs = 10;
    std::uint64_t seed = 0;
    GradMode grad_mode = GradMode::Analytic;
    bool layerwise = false; // freeze earlier layers phase by phase
};

/// Ordered parameter angles backed by qRAM addresses.
struct ParamVector {
    QramStore *store = nullptr;
    std::vector<std::string> addresses;

    std::size_t size() const { return addresses.size(); }

    double get(std::size_t j) const { return store->read(addresses[j]); }
    void set(std::size_t j, double v) { store->write(addresses[j], v); }

    std::vector<double> values() const {
        std::vector<double> out(addresses.size());
        for (std::size_t j = 0; j < addresses.size(); ++j) {
            out[j] = store->read(addresses[j]);
        }
        return out;
    }
};

using LossFn = std::function<double()>;

namespace detail {

/// Restores a shifted qRAM parameter on scope exit, even when the loss throws.
class ShiftGuard {
  public:
    ShiftGuard(QramStore &store, const std::string &address, double delta)
        : store_(store), address_(address), delta_(delta) {
        store_.shift(address_, delta_);
    }
    ~ShiftGuard() { store_.shift(address_, -delta_); }
    ShiftGuard(const ShiftGuard &) = delete;
    ShiftGuard &operator=(const ShiftGuard &) = delete;

  private:
    QramStore &store_;
    const std::string &address_;
    double delta_;
};

inline double eval_at_shift(const LossFn &loss_fn, QramStore &store,
                            const std::string &address, double delta) {
    ShiftGuard guard(store, address, delta);
    return loss_fn();
}

} // namespace detail

/**
 * Two-term parameter-shift gradient 0.5 * [L(theta + pi/2) - L(theta - pi/2)],
 * each evaluation performed by shifting the stored parameter in qRAM and
 * re-running the same circuit. Exact when the parameter enters through a
 * single uncontrolled rotation; the parameter is restored on all paths.
 */
inline double parameter_shift_grad(const LossFn &loss_fn, QramStore &store,
                                   const std::string &address) {
    const double plus =
        detail::eval_at_shift(loss_fn, store, address, kPi / 2.0);
    const double minus =
        detail::eval_at_shift(loss_fn, store, address, -kPi / 2.0);
    return 0.5 * (plus - minus);
}

/**
 * Four-term shift rule for parameters entering through controlled rotations,
 * whose generator has eigenvalues {0, +-1/2} and hence loss frequencies
 * {1/2, 1}. Uses shifts +-pi/2 and +-3pi/2 of the same stored parameter:
 * d1 [L(+pi/2) - L(-pi/2)] - d2 [L(+3pi/2) - L(-3pi/2)] with
 * d1 = 1/4 + 1/(4 sqrt 2), d2 = 1/4 - 1/(4 sqrt 2).
 */
inline double parameter_shift_grad_controlled(const LossFn &loss_fn,
                                              QramStore &store,
                                              const std::string &address) {
    const double d1 = 0.25 + 0.25 / std::sqrt(2.0);
    const double d2 = 0.25 - 0.25 / std::sqrt(2.0);
    const double p1 =
        detail::eval_at_shift(loss_fn, store, address, kPi / 2.0);
    const double m1 =
        detail::eval_at_shift(loss_fn, store, address, -kPi / 2.0);
    const double p3 =
        detail::eval_at_shift(loss_fn, store, address, 3.0 * kPi / 2.0);
    const double m3 =
        detail::eval_at_shift(loss_fn, store, address, -3.0 * kPi / 2.0);
    return d1 * (p1 - m1) - d2 * (p3 - m3);
}

/// Central finite difference through the same qRAM shift mechanism.
inline double finite_difference_grad(const LossFn &loss_fn, QramStore &store,
                                     const std::string &address,
                                     double h = 1e-5) {
    const double plus = detail::eval_at_shift(loss_fn, store, address, h);
    const double minus = detail::eval_at_shift(loss_fn, store, address, -h);
    return (plus - minus) / (2.0 * h);
}

/**
 * Full shift-rule gradient of a ParamVector. `controlled[j]` marks parameters
 * whose gate occurrences are controlled rotations (tree angles below the
 * root), differentiated with the four-term rule.
 */
inline std::vector<double>
parameter_shift_gradient(const LossFn &loss_fn, const ParamVector &params,
                         const std::vector<bool> &controlled) {
    check(controlled.size() == params.size(),
          "parameter_shift_gradient: flag count mismatch");
    std::vector<double> grad(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
        grad[j] = controlled[j]
                      ? parameter_shift_grad_controlled(loss_fn, *params.store,
                                                        params.addresses[j])
                      : parameter_shift_grad(loss_fn, *params.store,
                                             params.addresses[j]);
    }
    return grad;
}

inline std::vector<double>
finite_difference_gradient(const LossFn &loss_fn, const ParamVector &params,
                           double h = 1e-5) {
    std::vector<double> grad(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
        grad[j] =
            finite_difference_grad(loss_fn, *params.store, params.addresses[j], h);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Analytic differentiation of the 1-D convolution pipeline
// ---------------------------------------------------------------------------

/**
 * d output / d kernel-value matrix of the noiseless 1-D pipeline for a fixed
 * signal: B[t][i] = d out_t / d k_i. The pipeline is linear in the kernel
 * values (the internal normalization cancels against the reconstruction
 * scale), so columns come from unit-kernel evaluations.
 */
inline std::vector<std::vector<double>>
conv1d_output_jacobian(const std::vector<double> &f,
                       const FourierConvLayer &layer) {
    check(layer.kernel_dims.size() == 1,
          "conv1d_output_jacobian: layer is not 1-D");
    const std::size_t n_padded = layer.padded[0];
    const std::size_t klen = layer.kernel_len();
    const double fnorm = l2_norm(f);
    check(fnorm > 0.0, "conv1d_output_jacobian: zero signal");
    const std::size_t out_len = layer.mode == ConvMode::Circular
                                    ? n_padded
                                    : f.size() + klen - 1;

    std::vector<cplx> fv(n_padded, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        fv[i] = f[i] / fnorm;
    }
    const std::vector<cplx> fh = fft(std::move(fv));

    const double scale = fnorm * std::sqrt(static_cast<double>(n_padded));
    std::vector<std::vector<double>> jac(out_len,
                                         std::vector<double>(klen, 0.0));
    for (std::size_t i = 0; i < klen; ++i) {
        std::vector<cplx> e(n_padded, 0.0);
        e[i] = 1.0;
        std::vector<cplx> eh = fft(std::move(e));
        for (std::size_t t = 0; t < n_padded; ++t) {
            eh[t] *= fh[t];
        }
        const std::vector<cplx> col = ifft(std::move(eh));
        for (std::size_t t = 0; t < out_len; ++t) {
            jac[t][i] = scale * col[t].real();
        }
    }
    return jac;
}

/**
 * Analytic gradient of a weighted quadratic readout loss
 * L = sum_t w_t out_t^2 of the noiseless 1-D pipeline, with respect to the
 * layer's tree angles (slice (0,0)). Chains d out / d kernel through the
 * angle-tree Jacobian; exact reverse-mode through the simulated linear map.
 */
inline std::vector<double>
analytic_grad_conv1d(const std::vector<double> &f,
                     const FourierConvLayer &layer,
                     const std::vector<double> &weights) {
    const std::size_t klen = layer.kernel_len();
    const SliceParams &sp = layer.slice(0, 0);

    const ConvResult fwd = [&] {
        FourierConvLayer fast = layer;
        fast.backend = ConvBackend::Fast;
        return qconv_1d(f, fast, NoiseModel::noiseless());
    }();
    check(weights.size() == fwd.output.size(),
          "analytic_grad_conv1d: weight count mismatch");

    const std::vector<std::vector<double>> out_jac =
        conv1d_output_jacobian(f, layer);

    // dL/dk_i = sum_t 2 w_t out_t B[t][i]
    std::vector<double> dk(klen, 0.0);
    for (std::size_t t = 0; t < fwd.output.size(); ++t) {
        const double r = 2.0 * weights[t] * fwd.output[t];
        for (std::size_t i = 0; i < klen; ++i) {
            dk[i] += r * out_jac[t][i];
        }
    }

    // k_i = scale * leaf_i, so dL/dleaf_i = scale * dL/dk_i for i < klen.
    const std::vector<std::vector<double>> tj = tree_jacobian(sp.tree);
    std::vector<double> grad(sp.tree.angles.size(), 0.0);
    for (std::size_t a = 0; a < grad.size(); ++a) {
        double s = 0.0;
        for (std::size_t i = 0; i < klen; ++i) {
            s += tj[a][i] * sp.scale * dk[i];
        }
        grad[a] = s;
    }
    return grad;
}

// ---------------------------------------------------------------------------
// SGD
// ---------------------------------------------------------------------------

/// SGD with classical momentum: v <- mu v + g, theta <- theta - lr v.
class SgdOptimizer {
  public:
    SgdOptimizer(double learning_rate, double momentum)
        : lr_(learning_rate), mu_(momentum) {
        check(lr_ >= 0.0, "SgdOptimizer: negative learning rate");
        check(mu_ >= 0.0 && mu_ < 1.0, "SgdOptimizer: momentum must be in [0,1)");
    }

    void step(std::vector<double> &params, const std::vector<double> &grads) {
        check(params.size() == grads.size(), "sgd_step: length mismatch");
        if (velocity_.size() != params.size()) {
            velocity_.assign(params.size(), 0.0);
        }
        for (std::size_t j = 0; j < params.size(); ++j) {
            check(std::isfinite(grads[j]),
                  "sgd_step: non-finite gradient at parameter " +
                      std::to_string(j));
            velocity_[j] = mu_ * velocity_[j] + grads[j];
            params[j] -= lr_ * velocity_[j];
        }
    }

    void reset() { velocity_.clear(); }

    double learning_rate() const { return lr_; }

    /// Adjust the step size mid-run, e.g. for a decay schedule.
    void set_learning_rate(double learning_rate) {
        check(learning_rate >= 0.0, "SgdOptimizer: negative learning rate");
        lr_ = learning_rate;
    }

  private:
    double lr_;
    double mu_;
    std::vector<double> velocity_;
};

/// One SGD step on qRAM-backed parameters.
inline void sgd_step(ParamVector &params, const std::vector<double> &grads,
                     SgdOptimizer &opt) {
    std::vector<double> v = params.values();
    opt.step(v, grads);
    for (std::size_t j = 0; j < v.size(); ++j) {
        params.set(j, v[j]);
    }
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean cross-entropy of probability rows against integer labels.
inline double cross_entropy(const std::vector<std::vector<double>> &probs,
                            const std::vector<int> &labels) {
    check(!probs.empty() && probs.size() == labels.size(),
          "cross_entropy: size mismatch or empty batch");
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int y = labels[i];
        check(y >= 0 && y < static_cast<int>(probs[i].size()),
              "cross_entropy: label out of range");
        s += -std::log(std::max(probs[i][y], 1e-12));
    }
    return s / static_cast<double>(probs.size());
}

inline std::vector<double> softmax(const std::vector<double> &logits) {
    check(!logits.empty(), "softmax: empty input");
    double m = logits[0];
    for (double x : logits) {
        m = std::max(m, x);
    }
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        z += out[i];
    }
    for (double &x : out) {
        x /= z;
    }
    return out;
}

} // namespace qfcn
