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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qfcn/qft.hpp"
#include "qfcn/reference.hpp"
#include "qfcn/rng.hpp"

using namespace qfcn;

namespace {

StateVector random_state(int n, std::uint64_t seed) {
    CounterRng rng(seed, 2);
    std::vector<cplx> amps(std::size_t{1} << n);
    double norm2 = 0.0;
    for (cplx &a : amps) {
        a = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        norm2 += std::norm(a);
    }
    const double s = 1.0 / std::sqrt(norm2);
    for (cplx &a : amps) {
        a *= s;
    }
    return StateVector(n, std::move(amps));
}

double max_abs_diff(const std::vector<cplx> &a, const std::vector<cplx> &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace

TEST_CASE("gate accounting") {
    REQUIRE_THROWS_AS(build_qft(0), SimError);
    for (int n = 1; n <= 16; ++n) {
        const QftCircuit qc = build_qft(n);
        REQUIRE(qc.counted_gates == n * (n + 1) / 2);
        REQUIRE(qc.swap_count == n / 2);
        const QftCircuit inv = build_iqft(n);
        REQUIRE(inv.counted_gates == qc.counted_gates);
        REQUIRE(inv.circuit.gates.size() == qc.circuit.gates.size());
    }
}

TEST_CASE("small transforms") {
    SECTION("n=1 is a Hadamard") {
        const StateVector s = qft_amplitudes(StateVector(1));
        const double r = 1.0 / std::sqrt(2.0);
        REQUIRE(std::abs(s.amps[0] - r) < 1e-12);
        REQUIRE(std::abs(s.amps[1] - r) < 1e-12);
    }
    SECTION("n=2 on |01> gives the j=1 Fourier column") {
        const StateVector s = qft_amplitudes(StateVector::basis(2, 1));
        const cplx expect[4] = {{0.5, 0.0}, {0.0, 0.5}, {-0.5, 0.0}, {0.0, -0.5}};
        for (int k = 0; k < 4; ++k) {
            REQUIRE(std::abs(s.amps[k] - expect[k]) < 1e-12);
        }
    }
    SECTION("delta maps to the uniform state") {
        const StateVector s = qft_amplitudes(StateVector(4));
        for (const cplx &a : s.amps) {
            REQUIRE(std::abs(a - 0.25) < 1e-12);
        }
    }
    SECTION("inverse on the uniform state gives |0...0>") {
        StateVector u(3, std::vector<cplx>(8, 1.0 / std::sqrt(8.0)));
        const StateVector s = iqft_amplitudes(u);
        REQUIRE(std::abs(s.amps[0] - 1.0) < 1e-10);
    }
}

TEST_CASE("circuit equals the DFT oracle") {
    for (int n = 1; n <= 10; ++n) {
        const int trials = n <= 8 ? 10 : 4;
        for (int t = 0; t < trials; ++t) {
            const StateVector s = random_state(n, 100 * n + t);
            const StateVector y = qft_amplitudes(s);
            const std::vector<cplx> oracle = dft_oracle(s.amps);
            INFO("n=" << n << " trial=" << t);
            REQUIRE(max_abs_diff(y.amps, oracle) < 1e-9);
        }
    }
}

TEST_CASE("round trip and unitarity") {
    for (int n = 1; n <= 8; ++n) {
        for (int t = 0; t < 12; ++t) {
            const StateVector s = random_state(n, 7000 + 100 * n + t);
            const StateVector y = qft_amplitudes(s);
            REQUIRE(std::abs(y.norm() - 1.0) < 1e-10);

            // Parseval
            double in2 = 0.0, out2 = 0.0;
            for (std::size_t i = 0; i < s.dim(); ++i) {
                in2 += std::norm(s.amps[i]);
                out2 += std::norm(y.amps[i]);
            }
            REQUIRE(std::abs(in2 - out2) < 1e-10);

            const StateVector back = iqft_amplitudes(y);
            REQUIRE(max_abs_diff(back.amps, s.amps) < 1e-10);
        }
    }
}

TEST_CASE("linearity") {
    const int n = 5;
    const StateVector a = random_state(n, 41);
    const StateVector b = random_state(n, 42);
    const cplx ca(0.3, -0.2), cb(-0.7, 0.5);
    StateVector mix(n);
    for (std::size_t i = 0; i < mix.dim(); ++i) {
        mix.amps[i] = ca * a.amps[i] + cb * b.amps[i];
    }
    const StateVector lhs = qft_amplitudes(mix);
    const StateVector fa = qft_amplitudes(a);
    const StateVector fb = qft_amplitudes(b);
    for (std::size_t i = 0; i < mix.dim(); ++i) {
        REQUIRE(std::abs(lhs.amps[i] - (ca * fa.amps[i] + cb * fb.amps[i])) <
                1e-10);
    }
}

TEST_CASE("no-swap mode accounts for bit reversal manually") {
    const int n = 3;
    const StateVector s = random_state(n, 99);
    const StateVector swapped = apply_circuit(s, build_qft(n).circuit);
    StateVector raw = apply_circuit(s, build_qft(n, false).circuit);
    // reverse the qubit order classically
    std::vector<cplx> reordered(raw.dim());
    for (std::uint64_t i = 0; i < raw.dim(); ++i) {
        std::uint64_t rev = 0;
        for (int b = 0; b < n; ++b) {
            rev = (rev << 1) | ((i >> b) & 1U);
        }
        reordered[rev] = raw.amps[i];
    }
    REQUIRE(max_abs_diff(reordered, swapped.amps) < 1e-12);
}

TEST_CASE("classical FFT agrees with the oracle and the circuit") {
    SECTION("fft equals dft_oracle up to N=1024") {
        CounterRng rng(9, 3);
        for (std::size_t n_len : {2, 8, 64, 256, 1024}) {
            std::vector<cplx> x(n_len);
            for (cplx &v : x) {
                v = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            }
            const std::vector<cplx> a = fft(x);
            const std::vector<cplx> b = dft_oracle(x);
            REQUIRE(max_abs_diff(a, b) < 1e-9);
        }
    }
    SECTION("ifft inverts fft") {
        CounterRng rng(10, 3);
        std::vector<cplx> x(128);
        for (cplx &v : x) {
            v = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        }
        REQUIRE(max_abs_diff(ifft(fft(x)), x) < 1e-10);
    }
    SECTION("non-power-of-two length is rejected") {
        std::vector<cplx> x(6, 1.0);
        REQUIRE_THROWS_AS(fft(x), SimError);
    }
    SECTION("three-way: circuit vs fft vs oracle") {
        for (int n = 2; n <= 10; n += 2) {
            const StateVector s = random_state(n, 12345 + n);
            const StateVector y = qft_amplitudes(s);
            const std::vector<cplx> f = fft(s.amps);
            REQUIRE(max_abs_diff(y.amps, f) < 1e-9);
        }
    }
}
