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
// Classical reference transforms and convolutions. The DFT here is the
// positive-exponent unitary convention y_k = (1/sqrt(N)) sum_j x_j
// e^{+2 pi i jk/N}; every Fourier path in this library (quantum circuit,
// radix-2 FFT, O(N^2) oracle) follows the same convention.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "common.hpp"
#include "tensor.hpp"

namespace qfcn {

/// Literal O(N^2) DFT, the oracle everything else is checked against.
inline std::vector<cplx> dft_oracle(const std::vector<cplx> &x) {
    const std::size_t n = x.size();
    std::vector<cplx> y(n);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = 2.0 * kPi * static_cast<double>(k) *
                               static_cast<double>(j) / static_cast<double>(n);
            s += x[j] * std::polar(1.0, ang);
        }
        y[k] = inv_sqrt * s;
    }
    return y;
}

namespace detail {

/// Unit roots e^{sign 2 pi i j / n} for j < n/2, cached per (n, sign).
inline const cplx *twiddle_table(std::size_t n, int sign) {
    static std::map<std::pair<std::size_t, int>, std::vector<cplx>> cache;
    std::vector<cplx> &t = cache[{n, sign}];
    if (t.empty()) {
        t.resize(std::max<std::size_t>(1, n / 2));
        for (std::size_t j = 0; j < t.size(); ++j) {
            t[j] = std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(j) /
                                       static_cast<double>(n));
        }
    }
    return t.data();
}

/// Bit-reversal permutation indices for length n, cached per n.
inline const std::uint32_t *bitrev_table(std::size_t n) {
    static std::map<std::size_t, std::vector<std::uint32_t>> cache;
    std::vector<std::uint32_t> &t = cache[n];
    if (t.empty()) {
        t.resize(n);
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) {
                j ^= bit;
            }
            j ^= bit;
            t[i] = static_cast<std::uint32_t>(j);
        }
    }
    return t.data();
}

/// In-place radix-2 Cooley-Tukey, exponent sign +-1, no normalization.
inline void fft_raw(cplx *a, std::size_t n, int sign) {
    check(is_pow2(n), "fft: length must be a power of two");
    const std::uint32_t *rev = bitrev_table(n);
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t j = rev[i];
        if (i < j) {
            std::swap(a[i], a[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const cplx *tw = twiddle_table(len, sign); // contiguous, length half
        for (std::size_t i = 0; i < n; i += len) {
            cplx *lo = a + i;
            cplx *hi = a + i + half;
            for (std::size_t j = 0; j < half; ++j) {
                // explicit real arithmetic: the operator* on std::complex
                // carries inf/nan fixups that block vectorization
                const double ur = lo[j].real();
                const double ui = lo[j].imag();
                const double hr = hi[j].real();
                const double hi_ = hi[j].imag();
                const double wr = tw[j].real();
                const double wi = tw[j].imag();
                const double vr = hr * wr - hi_ * wi;
                const double vi = hr * wi + hi_ * wr;
                lo[j] = cplx{ur + vr, ui + vi};
                hi[j] = cplx{ur - vr, ui - vi};
            }
        }
    }
}

inline void fft_raw(std::vector<cplx> &a, int sign) {
    fft_raw(a.data(), a.size(), sign);
}

/// Cache-blocked out-of-place transpose: b[c * rows + r] = a[r * cols + c].
inline void transpose_grid(const cplx *a, cplx *b, std::size_t rows,
                           std::size_t cols) {
    constexpr std::size_t kBlock = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
        const std::size_t r1 = std::min(rows, r0 + kBlock);
        for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
            const std::size_t c1 = std::min(cols, c0 + kBlock);
            for (std::size_t r = r0; r < r1; ++r) {
                for (std::size_t c = c0; c < c1; ++c) {
                    b[c * rows + r] = a[r * cols + c];
                }
            }
        }
    }
}

} // namespace detail

/// Radix-2 FFT with the same convention and normalization as dft_oracle.
inline std::vector<cplx> fft(std::vector<cplx> x) {
    detail::fft_raw(x, +1);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (cplx &v : x) {
        v *= s;
    }
    return x;
}

inline std::vector<cplx> ifft(std::vector<cplx> x) {
    detail::fft_raw(x, -1);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (cplx &v : x) {
        v *= s;
    }
    return x;
}

/// In-place 2-D FFT over a row-major rows x cols grid (both powers of two).
inline void fft2_inplace(std::vector<cplx> &a, std::size_t rows,
                         std::size_t cols, int sign) {
    check(a.size() == rows * cols, "fft2: size mismatch");
    for (std::size_t r = 0; r < rows; ++r) {
        cplx *row = a.data() + r * cols;
        // all-zero rows (common for zero-padded kernels) transform to zero
        bool zero = true;
        for (std::size_t c = 0; c < cols && zero; ++c) {
            zero = (row[c] == cplx{0.0, 0.0});
        }
        if (!zero) {
            detail::fft_raw(row, cols, sign);
        }
    }
    // column transforms as row transforms of the transpose, for locality
    std::vector<cplx> t(a.size());
    detail::transpose_grid(a.data(), t.data(), rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
        detail::fft_raw(t.data() + c * rows, rows, sign);
    }
    detail::transpose_grid(t.data(), a.data(), cols, rows);
    const double s = 1.0 / std::sqrt(static_cast<double>(rows * cols));
    for (cplx &v : a) {
        v *= s;
    }
}

enum class ConvMode {
    Circular, // common length N, indices wrap mod N
    Linear,   // zero-padded, full output of length |f| + |g| - 1
};

/// Literal nested-sum 1-D convolution: out[m] = sum_k f[k] g[m-k].
inline std::vector<double> direct_conv(const std::vector<double> &f,
                                       const std::vector<double> &g,
                                       ConvMode mode) {
    check(all_finite(f) && all_finite(g), "direct_conv: non-finite input");
    if (mode == ConvMode::Circular) {
        const std::size_t n = std::max(f.size(), g.size());
        std::vector<double> out(n, 0.0);
        for (std::size_t m = 0; m < n; ++m) {
            double s = 0.0;
            for (std::size_t k = 0; k < f.size(); ++k) {
                const std::size_t idx = (m + n - (k % n)) % n;
                if (idx < g.size()) {
                    s += f[k] * g[idx];
                }
            }
            out[m] = s;
        }
        return out;
    }
    const std::size_t n = f.size() + g.size() - 1;
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) {
        for (std::size_t l = 0; l < g.size(); ++l) {
            out[k + l] += f[k] * g[l];
        }
    }
    return out;
}

/**
 * Literal multi-channel 2-D convolution:
 * out[:,:,co] = sum_ci conv2(X[:,:,ci], K[:,:,ci,co]).
 * Circular mode wraps indices over the input extent; linear mode produces the
 * full (H+h-1) x (W+w-1) output.
 */
inline Tensor3 direct_conv_2d(const Tensor3 &x, const Kernel4 &k,
                              ConvMode mode) {
    check(x.c == k.cin, "direct_conv_2d: channel mismatch");
    const bool circ = (mode == ConvMode::Circular);
    const int oh = circ ? x.h : x.h + k.h - 1;
    const int ow = circ ? x.w : x.w + k.w - 1;
    Tensor3 out(oh, ow, k.cout);
    for (int co = 0; co < k.cout; ++co) {
        double *op = out.plane(co);
        for (int ci = 0; ci < k.cin; ++ci) {
            const double *xp = x.plane(ci);
            const double *kp = k.plane(ci, co);
            for (int a = 0; a < k.h; ++a) {
                for (int b = 0; b < k.w; ++b) {
                    const double kv = kp[a * k.w + b];
                    if (kv == 0.0) {
                        continue;
                    }
                    for (int i = 0; i < x.h; ++i) {
                        for (int j = 0; j < x.w; ++j) {
                            int oi = i + a;
                            int oj = j + b;
                            if (circ) {
                                oi %= x.h;
                                oj %= x.w;
                            }
                            op[oi * ow + oj] += kv * xp[i * x.w + j];
                        }
                    }
                }
            }
        }
    }
    return out;
}

/**
 * FFT-based multi-channel 2-D convolution (classical path, used by the
 * benchmark and as the transform core of the fast layer backend). Transforms
 * are taken at the padded power-of-two extent per axis, so the result equals
 * direct_conv_2d in either mode.
 */
inline Tensor3 fft_conv_2d(const Tensor3 &x, const Kernel4 &k, ConvMode mode) {
    check(x.c == k.cin, "fft_conv_2d: channel mismatch");
    const bool circ = (mode == ConvMode::Circular);
    const int oh = circ ? x.h : x.h + k.h - 1;
    const int ow = circ ? x.w : x.w + k.w - 1;
    const std::size_t nr = circ ? next_pow2(x.h) : next_pow2(oh);
    const std::size_t nc = circ ? next_pow2(x.w) : next_pow2(ow);
    check(!circ || (is_pow2(static_cast<std::size_t>(x.h)) &&
                    is_pow2(static_cast<std::size_t>(x.w))),
          "fft_conv_2d: circular mode needs power-of-two extents");

    const double scale = std::sqrt(static_cast<double>(nr * nc));
    const std::size_t cells = nr * nc;

    // Two real planes ride in one complex transform (p + i q); the spectra
    // separate through conjugate symmetry: P = (G(t) + conj(G(-t)))/2,
    // Q = (G(t) - conj(G(-t)))/(2i).
    auto embed = [&](std::vector<cplx> &grid, const double *re,
                     const double *im, int ph, int pw) {
        std::fill(grid.begin(), grid.end(), cplx{0.0, 0.0});
        for (int i = 0; i < ph; ++i) {
            for (int j = 0; j < pw; ++j) {
                grid[static_cast<std::size_t>(i) * nc + j] =
                    cplx{re[i * pw + j], im != nullptr ? im[i * pw + j] : 0.0};
            }
        }
    };
    auto split_spectra = [&](const std::vector<cplx> &g, cplx *a, cplx *b) {
        for (std::size_t i = 0; i < nr; ++i) {
            const std::size_t i2 = (nr - i) & (nr - 1);
            for (std::size_t j = 0; j < nc; ++j) {
                const std::size_t j2 = (nc - j) & (nc - 1);
                const cplx g1 = g[i * nc + j];
                const cplx g2 = std::conj(g[i2 * nc + j2]);
                a[i * nc + j] = 0.5 * (g1 + g2);
                const cplx d = g1 - g2;
                b[i * nc + j] = cplx{0.5 * d.imag(), -0.5 * d.real()};
            }
        }
    };

    std::vector<std::vector<cplx>> xhat(x.c, std::vector<cplx>(cells));
    std::vector<cplx> grid(cells);
    std::vector<cplx> solo(cells);
    for (int ci = 0; ci < x.c; ci += 2) {
        const bool pair = ci + 1 < x.c;
        embed(grid, x.plane(ci), pair ? x.plane(ci + 1) : nullptr, x.h, x.w);
        fft2_inplace(grid, nr, nc, +1);
        if (pair) {
            split_spectra(grid, xhat[ci].data(), xhat[ci + 1].data());
        } else {
            xhat[ci] = grid;
        }
    }

    Tensor3 out(oh, ow, k.cout);
    std::vector<std::vector<cplx>> acc(2, std::vector<cplx>(cells));
    std::vector<cplx> ka(cells);
    std::vector<cplx> kb(cells);
    auto accumulate = [&](std::vector<cplx> &dst, const cplx *xh,
                          const cplx *kh) {
        for (std::size_t i = 0; i < cells; ++i) {
            const double xr = xh[i].real();
            const double xi = xh[i].imag();
            const double kr = kh[i].real();
            const double ki = kh[i].imag();
            dst[i] += cplx{xr * kr - xi * ki, xr * ki + xi * kr};
        }
    };
    auto write_plane = [&](int co, const std::vector<cplx> &inv, bool imag) {
        double *op = out.plane(co);
        for (int i = 0; i < oh; ++i) {
            for (int j = 0; j < ow; ++j) {
                const cplx v = inv[static_cast<std::size_t>(i) * nc + j];
                op[i * ow + j] = scale * (imag ? v.imag() : v.real());
            }
        }
    };

    for (int co = 0; co < k.cout; co += 2) {
        const bool co_pair = co + 1 < k.cout;
        std::fill(acc[0].begin(), acc[0].end(), cplx{0.0, 0.0});
        std::fill(acc[1].begin(), acc[1].end(), cplx{0.0, 0.0});
        for (int ci = 0; ci < k.cin; ++ci) {
            embed(grid, k.plane(ci, co),
                  co_pair ? k.plane(ci, co + 1) : nullptr, k.h, k.w);
            fft2_inplace(grid, nr, nc, +1);
            if (co_pair) {
                split_spectra(grid, ka.data(), kb.data());
                accumulate(acc[0], xhat[ci].data(), ka.data());
                accumulate(acc[1], xhat[ci].data(), kb.data());
            } else {
                accumulate(acc[0], xhat[ci].data(), grid.data());
            }
        }
        if (co_pair) {
            // both outputs are real, so one inverse transform of
            // acc0 + i acc1 carries them in its real and imaginary parts
            for (std::size_t i = 0; i < cells; ++i) {
                solo[i] = acc[0][i] +
                          cplx{-acc[1][i].imag(), acc[1][i].real()};
            }
            fft2_inplace(solo, nr, nc, -1);
            write_plane(co, solo, false);
            write_plane(co + 1, solo, true);
        } else {
            fft2_inplace(acc[0], nr, nc, -1);
            write_plane(co, acc[0], false);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline double mae(const std::vector<double> &pred,
                  const std::vector<double> &truth) {
    check(!pred.empty() && pred.size() == truth.size(),
          "mae: length mismatch or empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        s += std::abs(pred[i] - truth[i]);
    }
    return s / static_cast<double>(pred.size());
}

inline double mse(const std::vector<double> &pred,
                  const std::vector<double> &truth) {
    check(!pred.empty() && pred.size() == truth.size(),
          "mse: length mismatch or empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

} // namespace qfcn
