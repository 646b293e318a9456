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

#include "qfcn/angle_tree.hpp"
#include "qfcn/encode.hpp"
#include "qfcn/rng.hpp"

using namespace qfcn;

TEST_CASE("amplitude encoding basics") {
    SECTION("basis vector") {
        const EncodedVector enc =
            amplitude_encode({1.0, 0.0, 0.0, 0.0}, NoiseModel::noiseless());
        REQUIRE(enc.state.n_qubits == 2);
        REQUIRE(std::abs(enc.state.amps[0] - 1.0) < 1e-12);
        REQUIRE(enc.norm == 1.0);
    }
    SECTION("3-4-5 normalization") {
        const EncodedVector enc =
            amplitude_encode({3.0, 4.0}, NoiseModel::noiseless());
        REQUIRE(std::abs(enc.state.amps[0] - 0.6) < 1e-12);
        REQUIRE(std::abs(enc.state.amps[1] - 0.8) < 1e-12);
        REQUIRE(std::abs(enc.norm - 5.0) < 1e-12);
    }
    SECTION("padding to the next power of two") {
        const EncodedVector enc = amplitude_encode(
            {1.0, 1.0, 1.0, 1.0, 1.0}, NoiseModel::noiseless());
        REQUIRE(enc.state.n_qubits == 3);
        REQUIRE(enc.original_len == 5);
        for (std::size_t i = 5; i < 8; ++i) {
            REQUIRE(std::abs(enc.state.amps[i]) < 1e-15);
        }
    }
    SECTION("degenerate inputs are rejected") {
        REQUIRE_THROWS_AS(amplitude_encode({}, NoiseModel::noiseless()),
                          SimError);
        REQUIRE_THROWS_AS(
            amplitude_encode({0.0, 0.0}, NoiseModel::noiseless()), SimError);
        REQUIRE_THROWS_AS(
            amplitude_encode({1.0, std::nan("")}, NoiseModel::noiseless()),
            SimError);
    }
}

TEST_CASE("round trip at eps=0 for all lengths 1..64") {
    CounterRng rng(21, 4);
    for (std::size_t len = 1; len <= 64; ++len) {
        std::vector<double> v(len);
        for (double &x : v) {
            x = rng.uniform(-2.0, 2.0);
        }
        if (l2_norm(v) < 1e-9) {
            v[0] += 1.0;
        }
        const NoiseModel noiseless = NoiseModel::noiseless();
        const std::vector<double> back =
            tomography_read(amplitude_encode(v, noiseless), noiseless);
        REQUIRE(back.size() == len);
        for (std::size_t i = 0; i < len; ++i) {
            REQUIRE(std::abs(back[i] - v[i]) < 1e-10);
        }
    }
}

TEST_CASE("encoded norm is one under noise") {
    NoiseModel nm;
    nm.eps = 0.02;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        nm.seed = seed;
        const EncodedVector enc = amplitude_encode({0.5, -1.5, 2.5}, nm);
        REQUIRE(std::abs(enc.state.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("readout noise statistics") {
    // Per-entry deviation of the noisy readout has std ~= eps * norm.
    NoiseModel nm;
    nm.eps = 0.01;
    const std::vector<double> v = {1.0, 0.0, 0.0, 0.0};
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::uint64_t rep = 0; rep < 10000; ++rep) {
        nm.seed = rep;
        const EncodedVector clean =
            amplitude_encode(v, NoiseModel::noiseless());
        const std::vector<double> read = tomography_read(clean, nm);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double d = read[i] - v[i];
            sum += d;
            sum2 += d * d;
            ++count;
        }
    }
    const double mean = sum / count;
    const double stdev = std::sqrt(sum2 / count - mean * mean);
    REQUIRE(std::abs(stdev - 0.01) < 0.001);
    REQUIRE(std::abs(mean) < 5e-4);
}

TEST_CASE("noise is deterministic per seed") {
    NoiseModel nm;
    nm.eps = 0.01;
    nm.seed = 77;
    const std::vector<double> v = {0.3, 0.9, -1.2, 0.4, 2.0};
    const EncodedVector a = amplitude_encode(v, nm);
    const EncodedVector b = amplitude_encode(v, nm);
    for (std::size_t i = 0; i < a.state.dim(); ++i) {
        REQUIRE(a.state.amps[i] == b.state.amps[i]);
    }
    const std::vector<double> ra = tomography_read(a, nm);
    const std::vector<double> rb = tomography_read(b, nm);
    REQUIRE(ra == rb);
}

TEST_CASE("shot-mode readout") {
    CounterRng rng(33, 5);
    std::vector<double> v(16);
    for (double &x : v) {
        x = rng.uniform(-1.0, 1.0);
    }
    NoiseModel nm;
    nm.shots = 1000000;
    nm.seed = 5;
    const EncodedVector enc = amplitude_encode(v, NoiseModel::noiseless());
    const std::vector<double> read = tomography_read(enc, nm);
    const double norm = l2_norm(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
        REQUIRE(std::abs(std::abs(read[i]) - std::abs(v[i])) / norm < 5e-3);
        // sign carried from the true amplitude
        if (std::abs(v[i]) > 1e-3) {
            REQUIRE(std::signbit(read[i]) == std::signbit(v[i]));
        }
    }
}

TEST_CASE("cap activation") {
    SECTION("elementwise rule") {
        const std::vector<double> out =
            cap_activation({-1.0, 5.0, 20.0}, 10.0);
        REQUIRE(out == std::vector<double>{0.0, 5.0, 10.0});
    }
    SECTION("identity inside the band and idempotence") {
        const std::vector<double> x = {0.1, 3.0, 9.9};
        REQUIRE(cap_activation(x, 10.0) == x);
        const std::vector<double> y = cap_activation({-5.0, 2.0, 50.0}, 10.0);
        REQUIRE(cap_activation(y, 10.0) == y);
    }
    SECTION("invalid cap is rejected") {
        REQUIRE_THROWS_AS(cap_activation({1.0}, 0.0), SimError);
    }
}

TEST_CASE("qram store") {
    QramStore store;
    SECTION("write then read") {
        qram_write(store, "layer0/theta3", 0.5);
        REQUIRE(qram_read(store, "layer0/theta3") == 0.5);
    }
    SECTION("shift cancellation restores the original") {
        qram_write(store, "a", 1.25);
        qram_shift(store, "a", kPi / 2.0);
        qram_shift(store, "a", -kPi);
        const double old = qram_shift(store, "a", kPi / 2.0);
        REQUIRE(std::abs(old - (1.25 - kPi / 2.0)) < 1e-15);
        REQUIRE(qram_read(store, "a") == 1.25);
    }
    SECTION("shift returns the previous value") {
        qram_write(store, "b", 2.0);
        REQUIRE(qram_shift(store, "b", 0.5) == 2.0);
        REQUIRE(qram_read(store, "b") == 2.5);
    }
    SECTION("missing addresses are errors") {
        REQUIRE_THROWS_AS(qram_read(store, "nope"), SimError);
        REQUIRE_THROWS_AS(qram_shift(store, "nope", 1.0), SimError);
    }
}

TEST_CASE("angle tree state preparation") {
    SECTION("delta kernel gives zero angle") {
        const AngleTree tree = kernel_to_angles({1.0}, 2);
        REQUIRE(tree.angles.size() == 1);
        REQUIRE(std::abs(tree.angles[0]) < 1e-15);
    }
    SECTION("uniform pair gives a pi/2 rotation") {
        const AngleTree tree = kernel_to_angles({1.0, 1.0}, 2);
        REQUIRE(std::abs(tree.angles[0] - kPi / 2.0) < 1e-12);
        const StateVector s =
            apply_circuit(StateVector(1), tree_circuit(tree));
        const double r = 1.0 / std::sqrt(2.0);
        REQUIRE(std::abs(s.amps[0] - r) < 1e-12);
        REQUIRE(std::abs(s.amps[1] - r) < 1e-12);
    }
    SECTION("round trip on random kernels, N=8") {
        CounterRng rng(55, 6);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> k(5 + trial % 4);
            for (double &x : k) {
                x = rng.uniform(-1.0, 1.0);
            }
            if (l2_norm(k) < 1e-9) {
                k[0] += 1.0;
            }
            const double norm = l2_norm(k);
            const AngleTree tree = kernel_to_angles(k, 8);
            const std::vector<double> leaves = angles_to_kernel(tree);
            for (std::size_t i = 0; i < 8; ++i) {
                const double expect = i < k.size() ? k[i] / norm : 0.0;
                REQUIRE(std::abs(leaves[i] - expect) < 1e-10);
            }
            // circuit prepares exactly the leaf amplitudes
            const StateVector s =
                apply_circuit(StateVector(3), tree_circuit(tree));
            for (std::size_t i = 0; i < 8; ++i) {
                REQUIRE(std::abs(s.amps[i] - leaves[i]) < 1e-10);
            }
        }
    }
    SECTION("zero kernel is rejected") {
        REQUIRE_THROWS_AS(kernel_to_angles({0.0, 0.0}, 4), SimError);
    }
    SECTION("jacobian matches finite differences") {
        CounterRng rng(66, 6);
        std::vector<double> k(8);
        for (double &x : k) {
            x = rng.uniform(-1.0, 1.0);
        }
        AngleTree tree = kernel_to_angles(k, 8);
        const std::vector<std::vector<double>> jac = tree_jacobian(tree);
        const double h = 1e-6;
        for (std::size_t a = 0; a < tree.angles.size(); ++a) {
            AngleTree tp = tree;
            tp.angles[a] += h;
            AngleTree tm = tree;
            tm.angles[a] -= h;
            const std::vector<double> lp = angles_to_kernel(tp);
            const std::vector<double> lm = angles_to_kernel(tm);
            for (std::size_t l = 0; l < 8; ++l) {
                const double fd = (lp[l] - lm[l]) / (2.0 * h);
                REQUIRE(std::abs(jac[a][l] - fd) < 1e-6);
            }
        }
    }
}
