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
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace qfcn {

/**
 * Dense state vector over n qubits: 2^n complex amplitudes.
 *
 * Qubit indices are 1-based and qubit 1 is the most significant bit of the
 * basis index, so basis index i encodes j = j_1 2^{n-1} + ... + j_n 2^0.
 */
struct StateVector {
    int n_qubits = 0;
    std::vector<cplx> amps;

    StateVector() = default;

    /// All-zeros basis state |0...0> on n qubits.
    explicit StateVector(int n) : n_qubits(n) {
        check(n >= 1 && n <= 30, "StateVector: qubit count out of range");
        amps.assign(std::size_t{1} << n, cplx{0.0, 0.0});
        amps[0] = 1.0;
    }

    StateVector(int n, std::vector<cplx> a) : n_qubits(n), amps(std::move(a)) {
        check(amps.size() == (std::size_t{1} << n),
              "StateVector: amplitude count must be 2^n");
    }

    std::size_t dim() const { return amps.size(); }

    double norm() const {
        double s = 0.0;
        for (const cplx &a : amps) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }

    /// Basis state |j> on n qubits.
    static StateVector basis(int n, std::uint64_t j) {
        StateVector s(n);
        check(j < s.dim(), "StateVector::basis: index out of range");
        s.amps[0] = 0.0;
        s.amps[j] = 1.0;
        return s;
    }

    /// Bit of qubit q (1-based, MSB first) in basis index i.
    static int bit_of(std::uint64_t i, int q, int n) {
        return static_cast<int>((i >> (n - q)) & 1U);
    }
};

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

struct Hadamard {
    int target;
};

/// Controlled phase R_k: multiplies the |11> amplitude by e^{+-2 pi i / 2^k}.
struct ControlledPhase {
    int control;
    int target;
    int k;               // k >= 1, phase angle 2*pi / 2^k
    bool dagger = false; // conjugated phase (used by the inverse transform)
};

struct Swap {
    int a;
    int b;
};

struct PauliX {
    int target;
};

struct ControlledNot {
    int control;
    int target;
};

struct Ry {
    int target;
    double theta;
};

/**
 * Rotation on `target` applied only when every control qubit matches its
 * required value. With a single control fixed to 1 this is the plain
 * controlled-Ry; the general pattern form is what a multiplexed rotation in a
 * state-preparation tree needs.
 */
struct ControlledRy {
    std::vector<int> controls;
    std::vector<int> control_values;
    int target;
    double theta;

    ControlledRy(int control, int target_, double theta_)
        : controls{control}, control_values{1}, target(target_), theta(theta_) {}

    ControlledRy(std::vector<int> controls_, std::vector<int> values_,
                 int target_, double theta_)
        : controls(std::move(controls_)), control_values(std::move(values_)),
          target(target_), theta(theta_) {}
};

/**
 * Basis-permutation unitary given by an explicit bijection on basis indices:
 * out[i] = in[perm[i]]. The permutation must cover the full index space of
 * the register it is applied to.
 */
struct IndexMap {
    std::shared_ptr<const std::vector<std::uint64_t>> perm;
};

using Gate = std::variant<Hadamard, ControlledPhase, Swap, PauliX,
                          ControlledNot, Ry, ControlledRy, IndexMap>;

struct Circuit {
    int n_qubits = 0;
    std::vector<Gate> gates;
};

// ---------------------------------------------------------------------------
// Gate application
// ---------------------------------------------------------------------------

namespace detail {

inline void check_qubit(int q, int n, const char *what) {
    check(q >= 1 && q <= n, std::string(what) + ": qubit index out of range");
}

/// In-place 2x2 update on the target qubit, no control.
inline void apply_1q(std::vector<cplx> &amps, int n, int q, cplx m00, cplx m01,
                     cplx m10, cplx m11) {
    const std::uint64_t mask = std::uint64_t{1} << (n - q);
    const std::uint64_t dim = amps.size();
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & mask) == 0) {
            const cplx a0 = amps[i];
            const cplx a1 = amps[i | mask];
            amps[i] = m00 * a0 + m01 * a1;
            amps[i | mask] = m10 * a0 + m11 * a1;
        }
    }
}

inline void apply_gate_impl(StateVector &state, const Gate &gate, int offset) {
    const int n = state.n_qubits;
    std::vector<cplx> &amps = state.amps;

    if (const auto *g = std::get_if<Hadamard>(&gate)) {
        const int q = g->target + offset;
        check_qubit(q, n, "Hadamard");
        const double s = 1.0 / std::sqrt(2.0);
        apply_1q(amps, n, q, s, s, s, -s);
    } else if (const auto *g = std::get_if<ControlledPhase>(&gate)) {
        const int c = g->control + offset;
        const int t = g->target + offset;
        check_qubit(c, n, "ControlledPhase");
        check_qubit(t, n, "ControlledPhase");
        check(c != t, "ControlledPhase: control equals target");
        check(g->k >= 1, "ControlledPhase: k must be >= 1");
        double angle = 2.0 * kPi / static_cast<double>(std::uint64_t{1} << g->k);
        if (g->dagger) {
            angle = -angle;
        }
        const cplx phase = std::polar(1.0, angle);
        const std::uint64_t cm = std::uint64_t{1} << (n - c);
        const std::uint64_t tm = std::uint64_t{1} << (n - t);
        const std::uint64_t both = cm | tm;
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if ((i & both) == both) {
                amps[i] *= phase;
            }
        }
    } else if (const auto *g = std::get_if<Swap>(&gate)) {
        const int a = g->a + offset;
        const int b = g->b + offset;
        check_qubit(a, n, "Swap");
        check_qubit(b, n, "Swap");
        check(a != b, "Swap: identical qubits");
        const std::uint64_t am = std::uint64_t{1} << (n - a);
        const std::uint64_t bm = std::uint64_t{1} << (n - b);
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if ((i & am) != 0 && (i & bm) == 0) {
                std::swap(amps[i], amps[(i ^ am) | bm]);
            }
        }
    } else if (const auto *g = std::get_if<PauliX>(&gate)) {
        const int q = g->target + offset;
        check_qubit(q, n, "PauliX");
        const std::uint64_t mask = std::uint64_t{1} << (n - q);
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if ((i & mask) == 0) {
                std::swap(amps[i], amps[i | mask]);
            }
        }
    } else if (const auto *g = std::get_if<ControlledNot>(&gate)) {
        const int c = g->control + offset;
        const int t = g->target + offset;
        check_qubit(c, n, "ControlledNot");
        check_qubit(t, n, "ControlledNot");
        check(c != t, "ControlledNot: control equals target");
        const std::uint64_t cm = std::uint64_t{1} << (n - c);
        const std::uint64_t tm = std::uint64_t{1} << (n - t);
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if ((i & cm) != 0 && (i & tm) == 0) {
                std::swap(amps[i], amps[i | tm]);
            }
        }
    } else if (const auto *g = std::get_if<Ry>(&gate)) {
        const int q = g->target + offset;
        check_qubit(q, n, "Ry");
        const double c = std::cos(g->theta / 2.0);
        const double s = std::sin(g->theta / 2.0);
        apply_1q(amps, n, q, c, -s, s, c);
    } else if (const auto *g = std::get_if<ControlledRy>(&gate)) {
        const int t = g->target + offset;
        check_qubit(t, n, "ControlledRy");
        check(g->controls.size() == g->control_values.size(),
              "ControlledRy: controls/values size mismatch");
        std::uint64_t ctrl_mask = 0;
        std::uint64_t ctrl_want = 0;
        for (std::size_t idx = 0; idx < g->controls.size(); ++idx) {
            const int c = g->controls[idx] + offset;
            check_qubit(c, n, "ControlledRy");
            check(c != t, "ControlledRy: control equals target");
            const std::uint64_t m = std::uint64_t{1} << (n - c);
            ctrl_mask |= m;
            if (g->control_values[idx] != 0) {
                ctrl_want |= m;
            }
        }
        const std::uint64_t tm = std::uint64_t{1} << (n - t);
        const double co = std::cos(g->theta / 2.0);
        const double si = std::sin(g->theta / 2.0);
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            if ((i & tm) == 0 && (i & ctrl_mask) == ctrl_want) {
                const cplx a0 = amps[i];
                const cplx a1 = amps[i | tm];
                amps[i] = co * a0 - si * a1;
                amps[i | tm] = si * a0 + co * a1;
            }
        }
    } else if (const auto *g = std::get_if<IndexMap>(&gate)) {
        check(g->perm != nullptr, "IndexMap: missing permutation");
        const std::vector<std::uint64_t> &perm = *g->perm;
        check(perm.size() == amps.size(),
              "IndexMap: permutation size must match register dimension");
        std::vector<cplx> out(amps.size());
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            check(perm[i] < amps.size(), "IndexMap: index out of range");
            out[i] = amps[perm[i]];
        }
        amps = std::move(out);
    }
}

} // namespace detail

/// Returns U|psi>; the input state is not modified.
inline StateVector apply_gate(const StateVector &state, const Gate &gate) {
    StateVector out = state;
    detail::apply_gate_impl(out, gate, 0);
    return out;
}

/// In-place gate application with exclusive access to `state`.
inline void apply_gate_inplace(StateVector &state, const Gate &gate) {
    detail::apply_gate_impl(state, gate, 0);
}

/// Left-to-right application of every gate in the circuit.
inline StateVector apply_circuit(const StateVector &state,
                                 const Circuit &circuit) {
    check(state.n_qubits == circuit.n_qubits,
          "apply_circuit: qubit count mismatch");
    StateVector out = state;
    for (const Gate &g : circuit.gates) {
        detail::apply_gate_impl(out, g, 0);
    }
    return out;
}

/**
 * Applies a circuit built for a smaller register to qubits
 * [offset+1, offset+circuit.n_qubits] of a wider state.
 */
inline void apply_circuit_embedded(StateVector &state, const Circuit &circuit,
                                   int offset) {
    check(offset >= 0 && offset + circuit.n_qubits <= state.n_qubits,
          "apply_circuit_embedded: register does not fit");
    for (const Gate &g : circuit.gates) {
        detail::apply_gate_impl(state, g, offset);
    }
}

/// |a> tensor |b>; `a` occupies the more significant qubits.
inline StateVector tensor_product(const StateVector &a, const StateVector &b) {
    StateVector out;
    out.n_qubits = a.n_qubits + b.n_qubits;
    out.amps.resize(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        for (std::size_t j = 0; j < b.dim(); ++j) {
            out.amps[i * b.dim() + j] = a.amps[i] * b.amps[j];
        }
    }
    return out;
}

/**
 * True iff the state factorizes across the cut (qubits [1..cut] vs the rest):
 * the reshaped amplitude matrix has numerical rank 1 (second singular value
 * below 1e-8). Singular values come from a short deflated power iteration;
 * the matrices here are at most 2^n/2 on a side for small n.
 */
inline bool is_product_state(const StateVector &state, int cut) {
    const int n = state.n_qubits;
    check(cut >= 1 && cut < n, "is_product_state: cut must be a nontrivial bipartition");
    const std::size_t rows = std::size_t{1} << cut;
    const std::size_t cols = std::size_t{1} << (n - cut);

    // Power iteration for the dominant left/right singular pair of A.
    auto mat = [&](std::size_t r, std::size_t c) -> cplx {
        return state.amps[r * cols + c];
    };
    std::vector<cplx> v(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        v[c] = cplx(1.0 + 0.13 * static_cast<double>(c % 7), 0.11);
    }
    std::vector<cplx> u(rows);
    double sigma1 = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        // u = A v
        for (std::size_t r = 0; r < rows; ++r) {
            cplx s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                s += mat(r, c) * v[c];
            }
            u[r] = s;
        }
        double un = 0.0;
        for (const cplx &x : u) {
            un += std::norm(x);
        }
        un = std::sqrt(un);
        if (un == 0.0) {
            return true; // zero matrix (cannot happen for unit states)
        }
        for (cplx &x : u) {
            x /= un;
        }
        // v = A^H u
        for (std::size_t c = 0; c < cols; ++c) {
            cplx s = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                s += std::conj(mat(r, c)) * u[r];
            }
            v[c] = s;
        }
        double vn = 0.0;
        for (const cplx &x : v) {
            vn += std::norm(x);
        }
        sigma1 = std::sqrt(vn);
        if (sigma1 == 0.0) {
            return true;
        }
        for (cplx &x : v) {
            x /= sigma1;
        }
    }
    // Residual spectral mass after removing the dominant rank-1 part equals
    // sigma_2^2 + ... ; for a unit state sum sigma_i^2 = 1.
    double residual_sq = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const cplx res = mat(r, c) - sigma1 * u[r] * std::conj(v[c]);
            residual_sq += std::norm(res);
        }
    }
    return std::sqrt(residual_sq) < 1e-8;
}

/**
 * Samples the listed qubits with Born probabilities and collapses the state.
 * The outcome packs the measured bits with the first listed qubit as the most
 * significant bit; the collapsed state keeps all qubits and is renormalized.
 */
inline std::pair<std::uint64_t, StateVector>
measure_register(const StateVector &state, const std::vector<int> &qubits,
                 std::uint64_t rng_seed) {
    check(!qubits.empty(), "measure_register: empty qubit list");
    const int n = state.n_qubits;
    const std::size_t k = qubits.size();
    check(k <= 30, "measure_register: too many qubits");
    for (int q : qubits) {
        detail::check_qubit(q, n, "measure_register");
    }

    auto outcome_of = [&](std::uint64_t i) {
        std::uint64_t o = 0;
        for (std::size_t b = 0; b < k; ++b) {
            o = (o << 1) | static_cast<std::uint64_t>(
                               StateVector::bit_of(i, qubits[b], n));
        }
        return o;
    };

    std::vector<double> probs(std::size_t{1} << k, 0.0);
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        probs[outcome_of(i)] += std::norm(state.amps[i]);
    }

    CounterRng rng(rng_seed, /*stream=*/0x6d656173ULL);
    const double r = rng.uniform();
    double acc = 0.0;
    std::uint64_t outcome = probs.size() - 1;
    for (std::uint64_t o = 0; o < probs.size(); ++o) {
        acc += probs[o];
        if (r < acc) {
            outcome = o;
            break;
        }
    }

    StateVector collapsed = state;
    const double p = probs[outcome];
    const double scale = 1.0 / std::sqrt(p);
    for (std::uint64_t i = 0; i < collapsed.dim(); ++i) {
        if (outcome_of(i) == outcome) {
            collapsed.amps[i] *= scale;
        } else {
            collapsed.amps[i] = 0.0;
        }
    }
    return {outcome, collapsed};
}

/**
 * Conditions on the listed qubits reading `value` (bits, MSB first in list
 * order). Returns the renormalized conditional state on the remaining qubits
 * and the pre-selection probability of that branch.
 */
inline std::pair<StateVector, double>
post_select(const StateVector &state, const std::vector<int> &qubits,
            std::uint64_t value) {
    check(!qubits.empty(), "post_select: empty qubit list");
    const int n = state.n_qubits;
    const std::size_t k = qubits.size();
    check(static_cast<int>(k) < n, "post_select: must leave at least one qubit");
    for (int q : qubits) {
        detail::check_qubit(q, n, "post_select");
    }
    check(value < (std::uint64_t{1} << k), "post_select: value out of range");

    std::uint64_t sel_mask = 0;
    std::uint64_t sel_want = 0;
    for (std::size_t b = 0; b < k; ++b) {
        const std::uint64_t m = std::uint64_t{1} << (n - qubits[b]);
        sel_mask |= m;
        if ((value >> (k - 1 - b)) & 1U) {
            sel_want |= m;
        }
    }

    StateVector out;
    out.n_qubits = n - static_cast<int>(k);
    out.amps.reserve(std::size_t{1} << out.n_qubits);
    double p = 0.0;
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        if ((i & sel_mask) == sel_want) {
            out.amps.push_back(state.amps[i]);
            p += std::norm(state.amps[i]);
        }
    }
    check(p >= 1e-14, "post_select: zero-probability branch");
    const double scale = 1.0 / std::sqrt(p);
    for (cplx &a : out.amps) {
        a *= scale;
    }
    return {out, p};
}

} // namespace qfcn
