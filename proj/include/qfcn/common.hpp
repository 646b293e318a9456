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

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfcn {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown on any contract violation (bad indices, degenerate inputs, ...).
struct SimError final : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check(bool cond, const std::string &msg) {
    if (!cond) {
        throw SimError(msg);
    }
}

/// Smallest power of two >= x (x >= 1).
inline std::size_t next_pow2(std::size_t x) {
    std::size_t p = 1;
    while (p < x) {
        p <<= 1;
    }
    return p;
}

inline bool is_pow2(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

/// log2 of a power of two.
inline int ilog2(std::size_t x) {
    int n = 0;
    while ((std::size_t{1} << n) < x) {
        ++n;
    }
    return n;
}

inline bool all_finite(const std::vector<double> &v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

inline double l2_norm(const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

} // namespace qfcn
