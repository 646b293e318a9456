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
#include <complex>
#include <vector>

#include "qfcn/rng.hpp"
#include "qfcn/statevec.hpp"

using namespace qfcn;

namespace {

using Matrix = std::vector<std::vector<cplx>>;

// Dense gate matrix built elementwise from the textbook definitions,
// independent of the stride-based implementation under test. Column x of the
// matrix is the image of basis state |x>.
Matrix gate_matrix(const Gate &gate, int n) {
    const std::size_t dim = std::size_t{1} << n;
    Matrix m(dim, std::vector<cplx>(dim, 0.0));
    auto bit = [&](std::uint64_t i, int q) {
        return static_cast<int>((i >> (n - q)) & 1U);
    };
    auto flip = [&](std::uint64_t i, int q) {
        return i ^ (std::uint64_t{1} << (n - q));
    };

    for (std::uint64_t x = 0; x < dim; ++x) {
        if (const auto *g = std::get_if<Hadamard>(&gate)) {
            const double s = 1.0 / std::sqrt(2.0);
            // |0> -> (|0>+|1>)/sqrt2, |1> -> (|0>-|1>)/sqrt2
            m[x][x] += bit(x, g->target) ? -s : s;
            m[flip(x, g->target)][x] += s;
        } else if (const auto *g = std::get_if<ControlledPhase>(&gate)) {
            cplx coeff = 1.0;
            if (bit(x, g->control) == 1 && bit(x, g->target) == 1) {
                double ang = 2.0 * kPi / std::pow(2.0, g->k);
                if (g->dagger) {
                    ang = -ang;
                }
                coeff = std::polar(1.0, ang);
            }
            m[x][x] = coeff;
        } else if (const auto *g = std::get_if<Swap>(&gate)) {
            std::uint64_t y = x;
            if (bit(x, g->a) != bit(x, g->b)) {
                y = flip(flip(x, g->a), g->b);
            }
            m[y][x] = 1.0;
        } else if (const auto *g = std::get_if<PauliX>(&gate)) {
            m[flip(x, g->target)][x] = 1.0;
        } else if (const auto *g = std::get_if<ControlledNot>(&gate)) {
            m[bit(x, g->control) ? flip(x, g->target) : x][x] = 1.0;
        } else if (const auto *g = std::get_if<Ry>(&gate)) {
            const double c = std::cos(g->theta / 2.0);
            const double s = std::sin(g->theta / 2.0);
            // |0> -> c|0> + s|1>, |1> -> -s|0> + c|1>
            if (bit(x, g->target) == 0) {
                m[x][x] += c;
                m[flip(x, g->target)][x] += s;
            } else {
                m[x][x] += c;
                m[flip(x, g->target)][x] += -s;
            }
        } else if (const auto *g = std::get_if<ControlledRy>(&gate)) {
            bool active = true;
            for (std::size_t i = 0; i < g->controls.size(); ++i) {
                if (bit(x, g->controls[i]) != g->control_values[i]) {
                    active = false;
                }
            }
            if (!active) {
                m[x][x] = 1.0;
            } else {
                const double c = std::cos(g->theta / 2.0);
                const double s = std::sin(g->theta / 2.0);
                if (bit(x, g->target) == 0) {
                    m[x][x] += c;
                    m[flip(x, g->target)][x] += s;
                } else {
                    m[x][x] += c;
                    m[flip(x, g->target)][x] += -s;
                }
            }
        } else if (const auto *g = std::get_if<IndexMap>(&gate)) {
            m[x][(*g->perm)[x]] = 1.0; // out[x] = in[perm[x]]
        }
    }
    return m;
}

std::vector<cplx> mat_vec(const Matrix &m, const std::vector<cplx> &v) {
    std::vector<cplx> out(m.size(), 0.0);
    for (std::size_t r = 0; r < m.size(); ++r) {
        for (std::size_t c = 0; c < v.size(); ++c) {
            out[r] += m[r][c] * v[c];
        }
    }
    return out;
}

StateVector random_state(int n, std::uint64_t seed) {
    CounterRng rng(seed, 1);
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

std::vector<Gate> sample_gates(int n, std::uint64_t seed) {
    CounterRng rng(seed, 7);
    auto q = [&]() { return 1 + static_cast<int>(rng.uniform_int(n)); };
    auto q_not = [&](int other) {
        int v = q();
        while (v == other) {
            v = q();
        }
        return v;
    };
    std::vector<Gate> gates;
    gates.push_back(Hadamard{q()});
    if (n >= 2) {
        const int t = q();
        gates.push_back(ControlledPhase{q_not(t), t,
                                        1 + static_cast<int>(rng.uniform_int(4)),
                                        rng.uniform() < 0.5});
        const int a = q();
        gates.push_back(Swap{a, q_not(a)});
        const int tc = q();
        gates.push_back(ControlledNot{q_not(tc), tc});
        const int t2 = q();
        gates.push_back(
            ControlledRy(q_not(t2), t2, rng.uniform(-kPi, kPi)));
    }
    gates.push_back(PauliX{q()});
    gates.push_back(Ry{q(), rng.uniform(-kPi, kPi)});
    {
        // random permutation as an IndexMap
        const std::size_t dim = std::size_t{1} << n;
        auto perm = std::make_shared<std::vector<std::uint64_t>>(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            (*perm)[i] = i;
        }
        for (std::size_t i = dim; i > 1; --i) {
            std::swap((*perm)[i - 1], (*perm)[rng.uniform_int(i)]);
        }
        gates.push_back(IndexMap{std::move(perm)});
    }
    return gates;
}

} // namespace

TEST_CASE("single gate examples") {
    SECTION("Hadamard on |0>") {
        const StateVector s = apply_gate(StateVector(1), Hadamard{1});
        REQUIRE(std::abs(s.amps[0] - 1.0 / std::sqrt(2.0)) < 1e-12);
        REQUIRE(std::abs(s.amps[1] - 1.0 / std::sqrt(2.0)) < 1e-12);
    }
    SECTION("PauliX flips |0>") {
        const StateVector s = apply_gate(StateVector(1), PauliX{1});
        REQUIRE(std::abs(s.amps[0]) < 1e-15);
        REQUIRE(std::abs(s.amps[1] - 1.0) < 1e-15);
    }
    SECTION("ControlledPhase k=2 on |11> gives i|11>") {
        const StateVector s =
            apply_gate(StateVector::basis(2, 3), ControlledPhase{1, 2, 2});
        REQUIRE(std::abs(s.amps[3] - cplx(0.0, 1.0)) < 1e-12);
    }
    SECTION("index out of range is rejected") {
        REQUIRE_THROWS_AS(apply_gate(StateVector(2), Hadamard{3}), SimError);
        REQUIRE_THROWS_AS(apply_gate(StateVector(2), ControlledNot{1, 1}),
                          SimError);
    }
}

TEST_CASE("circuit composition") {
    SECTION("empty circuit is identity") {
        const StateVector s = random_state(3, 11);
        Circuit c;
        c.n_qubits = 3;
        REQUIRE(max_abs_diff(apply_circuit(s, c).amps, s.amps) == 0.0);
    }
    SECTION("H twice is identity") {
        Circuit c;
        c.n_qubits = 1;
        c.gates = {Hadamard{1}, Hadamard{1}};
        const StateVector s = apply_circuit(StateVector(1), c);
        REQUIRE(std::abs(s.amps[0] - 1.0) < 1e-12);
    }
    SECTION("H then CNOT builds the Bell state") {
        Circuit c;
        c.n_qubits = 2;
        c.gates = {Hadamard{1}, ControlledNot{1, 2}};
        const StateVector s = apply_circuit(StateVector(2), c);
        const double r = 1.0 / std::sqrt(2.0);
        REQUIRE(std::abs(s.amps[0] - r) < 1e-12);
        REQUIRE(std::abs(s.amps[3] - r) < 1e-12);
        REQUIRE(std::abs(s.amps[1]) < 1e-15);
        REQUIRE(std::abs(s.amps[2]) < 1e-15);
    }
    SECTION("qubit count mismatch is rejected") {
        Circuit c;
        c.n_qubits = 3;
        REQUIRE_THROWS_AS(apply_circuit(StateVector(2), c), SimError);
    }
}

TEST_CASE("dense matrix-product oracle, n <= 4") {
    for (int n = 1; n <= 4; ++n) {
        for (std::uint64_t trial = 0; trial < 20; ++trial) {
            const std::vector<Gate> gates = sample_gates(n, 100 * n + trial);
            StateVector s = random_state(n, 999 * n + trial);
            std::vector<cplx> oracle = s.amps;
            for (const Gate &g : gates) {
                s = apply_gate(s, g);
                oracle = mat_vec(gate_matrix(g, n), oracle);
            }
            INFO("n=" << n << " trial=" << trial);
            REQUIRE(max_abs_diff(s.amps, oracle) < 1e-10);
        }
    }
}

TEST_CASE("unitarity of every gate variant") {
    const int n = 3;
    const std::size_t dim = 8;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        for (const Gate &g : sample_gates(n, 5000 + trial)) {
            const Matrix m = gate_matrix(g, n);
            // U^H U = I within 1e-12
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t j = 0; j < dim; ++j) {
                    cplx s = 0.0;
                    for (std::size_t k = 0; k < dim; ++k) {
                        s += std::conj(m[k][i]) * m[k][j];
                    }
                    REQUIRE(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("norm preservation on random states") {
    for (int n = 1; n <= 8; ++n) {
        for (std::uint64_t trial = 0; trial < 15; ++trial) {
            StateVector s = random_state(n, 31 * n + trial);
            for (const Gate &g : sample_gates(n, 17 * n + trial)) {
                s = apply_gate(s, g);
                REQUIRE(std::abs(s.norm() - 1.0) < 1e-10);
            }
        }
    }
}

TEST_CASE("tensor product") {
    SECTION("|0> x |1> = |01>") {
        const StateVector s =
            tensor_product(StateVector::basis(1, 0), StateVector::basis(1, 1));
        REQUIRE(std::abs(s.amps[1] - 1.0) < 1e-15);
    }
    SECTION("uniform x |0>") {
        const StateVector u = apply_gate(StateVector(1), Hadamard{1});
        const StateVector s = tensor_product(u, StateVector(1));
        const double r = 1.0 / std::sqrt(2.0);
        REQUIRE(std::abs(s.amps[0] - r) < 1e-12);
        REQUIRE(std::abs(s.amps[2] - r) < 1e-12);
    }
    SECTION("elementwise definition on random states") {
        const StateVector a = random_state(2, 71);
        const StateVector b = random_state(3, 72);
        const StateVector s = tensor_product(a, b);
        for (std::size_t i = 0; i < a.dim(); ++i) {
            for (std::size_t j = 0; j < b.dim(); ++j) {
                REQUIRE(std::abs(s.amps[i * b.dim() + j] -
                                 a.amps[i] * b.amps[j]) < 1e-14);
            }
        }
    }
}

TEST_CASE("product state detection") {
    SECTION("basis state is product") {
        REQUIRE(is_product_state(StateVector::basis(2, 1), 1));
    }
    SECTION("Bell state is entangled") {
        Circuit c;
        c.n_qubits = 2;
        c.gates = {Hadamard{1}, ControlledNot{1, 2}};
        REQUIRE_FALSE(is_product_state(apply_circuit(StateVector(2), c), 1));
    }
    SECTION("random tensor products are product states") {
        for (std::uint64_t trial = 0; trial < 10; ++trial) {
            const StateVector s = tensor_product(random_state(2, 300 + trial),
                                                 random_state(2, 400 + trial));
            REQUIRE(is_product_state(s, 2));
        }
    }
}

TEST_CASE("measurement") {
    SECTION("deterministic outcome on |1>") {
        auto [outcome, collapsed] =
            measure_register(StateVector::basis(1, 1), {1}, 42);
        REQUIRE(outcome == 1);
        REQUIRE(std::abs(collapsed.amps[1] - 1.0) < 1e-12);
    }
    SECTION("Bell state collapses jointly") {
        Circuit c;
        c.n_qubits = 2;
        c.gates = {Hadamard{1}, ControlledNot{1, 2}};
        const StateVector bell = apply_circuit(StateVector(2), c);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto [outcome, collapsed] = measure_register(bell, {1}, seed);
            const std::uint64_t idx = outcome == 0 ? 0 : 3;
            REQUIRE(std::abs(collapsed.amps[idx] - 1.0) < 1e-10);
        }
    }
    SECTION("empirical frequencies match Born probabilities") {
        const StateVector s = random_state(2, 555);
        std::vector<double> probs(4, 0.0);
        for (std::size_t i = 0; i < 4; ++i) {
            probs[i] = std::norm(s.amps[i]);
        }
        const int draws = 100000;
        std::vector<int> counts(4, 0);
        for (int d = 0; d < draws; ++d) {
            auto [outcome, collapsed] = measure_register(s, {1, 2}, 7000 + d);
            ++counts[outcome];
        }
        for (std::size_t i = 0; i < 4; ++i) {
            const double freq = static_cast<double>(counts[i]) / draws;
            const double sigma =
                std::sqrt(probs[i] * (1.0 - probs[i]) / draws);
            REQUIRE(std::abs(freq - probs[i]) < 3.0 * sigma + 1e-6);
        }
    }
}

TEST_CASE("post-selection") {
    SECTION("selecting the only branch") {
        auto [state, p] = post_select(StateVector::basis(2, 1), {2}, 1);
        REQUIRE(std::abs(p - 1.0) < 1e-12);
        REQUIRE(state.n_qubits == 1);
        REQUIRE(std::abs(state.amps[0] - 1.0) < 1e-12);
    }
    SECTION("Bell state branch has probability one half") {
        Circuit c;
        c.n_qubits = 2;
        c.gates = {Hadamard{1}, ControlledNot{1, 2}};
        auto [state, p] = post_select(apply_circuit(StateVector(2), c), {1}, 0);
        REQUIRE(std::abs(p - 0.5) < 1e-12);
        REQUIRE(std::abs(state.amps[0] - 1.0) < 1e-12);
    }
    SECTION("zero-probability branch is rejected") {
        REQUIRE_THROWS_AS(post_select(StateVector::basis(2, 0), {1}, 1),
                          SimError);
    }
    SECTION("branch probabilities sum to one") {
        const StateVector s = random_state(4, 808);
        double total = 0.0;
        for (std::uint64_t v = 0; v < 4; ++v) {
            auto [state, p] = post_select(s, {1, 3}, v);
            total += p;
        }
        REQUIRE(std::abs(total - 1.0) < 1e-10);
    }
}
