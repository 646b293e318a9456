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

#include "statevec.hpp"

namespace qfcn {

/**
 * Quantum Fourier transform circuit on n qubits.
 *
 * Convention: the forward transform maps |j> to (1/sqrt(N)) sum_k
 * e^{+2 pi i jk/N} |k>, i.e. the positive-exponent unitary DFT. Per qubit q
 * the circuit applies a Hadamard followed by controlled phase rotations R_k
 * (k = 2..n-q+1) controlled from the later qubits, and a final swap network
 * reverses the qubit order. `counted_gates` counts Hadamard and controlled
 * phase gates only; swaps are bookkept separately.
 */
struct QftCircuit {
    int n = 0;
    Circuit circuit;
    int counted_gates = 0; // H + controlled-phase gates, n(n+1)/2
    int swap_count = 0;    // floor(n/2)
};

inline QftCircuit build_qft(int n, bool with_swaps = true) {
    check(n >= 1, "build_qft: n must be >= 1");
    QftCircuit qc;
    qc.n = n;
    qc.circuit.n_qubits = n;
    for (int q = 1; q <= n; ++q) {
        qc.circuit.gates.push_back(Hadamard{q});
        ++qc.counted_gates;
        for (int k = 2; k <= n - q + 1; ++k) {
            // R_k on qubit q controlled by qubit q+k-1.
            qc.circuit.gates.push_back(ControlledPhase{q + k - 1, q, k, false});
            ++qc.counted_gates;
        }
    }
    if (with_swaps) {
        for (int q = 1; q <= n / 2; ++q) {
            qc.circuit.gates.push_back(Swap{q, n + 1 - q});
            ++qc.swap_count;
        }
    }
    return qc;
}

/// Inverse QFT: the forward gate list reversed with conjugated phases.
inline QftCircuit build_iqft(int n, bool with_swaps = true) {
    QftCircuit fwd = build_qft(n, with_swaps);
    QftCircuit inv;
    inv.n = n;
    inv.circuit.n_qubits = n;
    inv.counted_gates = fwd.counted_gates;
    inv.swap_count = fwd.swap_count;
    inv.circuit.gates.reserve(fwd.circuit.gates.size());
    for (auto it = fwd.circuit.gates.rbegin(); it != fwd.circuit.gates.rend();
         ++it) {
        Gate g = *it;
        if (auto *cp = std::get_if<ControlledPhase>(&g)) {
            cp->dagger = !cp->dagger;
        }
        inv.circuit.gates.push_back(std::move(g));
    }
    return inv;
}

/// Applies the forward QFT circuit to the whole register.
inline StateVector qft_amplitudes(const StateVector &state) {
    return apply_circuit(state, build_qft(state.n_qubits).circuit);
}

inline StateVector iqft_amplitudes(const StateVector &state) {
    return apply_circuit(state, build_iqft(state.n_qubits).circuit);
}

} // namespace qfcn
