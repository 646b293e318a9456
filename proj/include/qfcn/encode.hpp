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
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rng.hpp"
#include "statevec.hpp"

namespace qfcn {

/**
 * Simulation noise parameters. `eps` is the std of additive Gaussian noise
 * injected at exactly two points: state preparation and readout. `cap_c` is
 * the bound of the cap nonlinearity. When `shots` is set, readout estimates
 * magnitudes from sampled measurement counts instead of exact expectations.
 */
struct NoiseModel {
    double eps = 0.0;
    double cap_c = 10.0;
    std::optional<std::uint64_t> shots;
    std::uint64_t seed = 0;

    static NoiseModel noiseless() { return NoiseModel{}; }
};

/// Quantum state plus the classical scale divided out during encoding.
struct EncodedVector {
    StateVector state;
    double norm = 1.0;
    std::size_t original_len = 0;
};

namespace detail {
// Fixed stream tags so preparation and readout consume independent,
// reproducible noise streams for the same seed.
inline constexpr std::uint64_t kPrepStream = 0x70726570ULL;
inline constexpr std::uint64_t kReadStream = 0x72656164ULL;
inline constexpr std::uint64_t kShotStream = 0x73686f74ULL;
} // namespace detail

/**
 * Encodes a classical vector as quantum amplitudes: pads with zeros to a
 * power of two (at least `min_len`, at least 2), perturbs each padded entry
 * with Gaussian(0, eps*||v||/sqrt(N)) preparation noise, and normalizes.
 * The stored `norm` is the clean classical l2 norm.
 */
inline EncodedVector amplitude_encode(const std::vector<double> &v,
                                      const NoiseModel &noise,
                                      std::size_t min_len = 2) {
    check(!v.empty(), "amplitude_encode: empty vector");
    check(all_finite(v), "amplitude_encode: non-finite entry");
    const double vnorm = l2_norm(v);
    check(vnorm > 0.0, "amplitude_encode: all-zero vector cannot be encoded");

    const std::size_t n_len = std::max<std::size_t>(
        2, std::max(next_pow2(v.size()), next_pow2(min_len)));
    std::vector<double> padded(n_len, 0.0);
    std::copy(v.begin(), v.end(), padded.begin());

    if (noise.eps > 0.0) {
        CounterRng rng(noise.seed, detail::kPrepStream);
        const double sigma = noise.eps * vnorm / std::sqrt(static_cast<double>(n_len));
        for (double &x : padded) {
            x += sigma * rng.gaussian();
        }
    }
    const double pnorm = l2_norm(padded);
    check(pnorm > 0.0, "amplitude_encode: vector vanished under noise");

    EncodedVector enc;
    enc.state.n_qubits = ilog2(n_len);
    enc.state.amps.resize(n_len);
    for (std::size_t i = 0; i < n_len; ++i) {
        enc.state.amps[i] = padded[i] / pnorm;
    }
    enc.norm = vnorm;
    enc.original_len = v.size();
    return enc;
}

/**
 * Noisy readout of an encoded state, truncated to the original length.
 * Exact mode returns norm * (Re(amp) + Gaussian(0, eps)). Shot mode estimates
 * each magnitude from multinomial counts over `shots` measurement draws and
 * takes the sign from the true amplitude (sign recovery is not modeled).
 */
inline std::vector<double> tomography_read(const EncodedVector &enc,
                                           const NoiseModel &noise) {
    const std::size_t dim = enc.state.dim();
    std::vector<double> vals(dim);

    if (noise.shots.has_value()) {
        const std::uint64_t shots = *noise.shots;
        check(shots > 0, "tomography_read: shots must be positive");
        std::vector<double> cdf(dim);
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            acc += std::norm(enc.state.amps[i]);
            cdf[i] = acc;
        }
        std::vector<std::uint64_t> counts(dim, 0);
        CounterRng rng(noise.seed, detail::kShotStream);
        for (std::uint64_t s = 0; s < shots; ++s) {
            const double r = rng.uniform() * acc;
            const std::size_t idx = static_cast<std::size_t>(
                std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
            ++counts[std::min(idx, dim - 1)];
        }
        for (std::size_t i = 0; i < dim; ++i) {
            const double mag = std::sqrt(static_cast<double>(counts[i]) /
                                         static_cast<double>(shots));
            const double sign = enc.state.amps[i].real() < 0.0 ? -1.0 : 1.0;
            vals[i] = sign * mag;
        }
    } else {
        for (std::size_t i = 0; i < dim; ++i) {
            vals[i] = enc.state.amps[i].real();
        }
    }

    if (noise.eps > 0.0) {
        CounterRng rng(noise.seed, detail::kReadStream);
        for (double &x : vals) {
            x += noise.eps * rng.gaussian();
        }
    }

    const std::size_t out_len =
        enc.original_len > 0 ? std::min(enc.original_len, dim) : dim;
    std::vector<double> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        out[i] = enc.norm * vals[i];
    }
    return out;
}

/// Elementwise min(max(x, 0), cap_c).
inline std::vector<double> cap_activation(const std::vector<double> &x,
                                          double cap_c) {
    check(cap_c > 0.0, "cap_activation: cap must be positive");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::min(std::max(x[i], 0.0), cap_c);
    }
    return out;
}

inline double cap_scalar(double x, double cap_c) {
    return std::min(std::max(x, 0.0), cap_c);
}

/**
 * Keyed parameter store standing in for qRAM. Addresses are plain strings;
 * reads return the last write; shift adds in place and hands back the old
 * value so a caller can re-run the same circuit with a moved parameter.
 */
class QramStore {
  public:
    void write(const std::string &address, double value) {
        map_[address] = value;
    }

    double read(const std::string &address) const {
        auto it = map_.find(address);
        check(it != map_.end(), "QramStore: read of unwritten address " + address);
        return it->second;
    }

    /// Adds delta to the stored value; returns the previous value.
    double shift(const std::string &address, double delta) {
        auto it = map_.find(address);
        check(it != map_.end(), "QramStore: shift of unwritten address " + address);
        const double old = it->second;
        it->second = old + delta;
        return old;
    }

    bool contains(const std::string &address) const {
        return map_.count(address) != 0;
    }

    std::size_t size() const { return map_.size(); }

  private:
    std::map<std::string, double> map_;
};

inline void qram_write(QramStore &s, const std::string &a, double v) {
    s.write(a, v);
}
inline double qram_read(const QramStore &s, const std::string &a) {
    return s.read(a);
}
inline double qram_shift(QramStore &s, const std::string &a, double d) {
    return s.shift(a, d);
}

} // namespace qfcn
