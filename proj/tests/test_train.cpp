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
// Gradient machinery: shift rules on qRAM-stored angles, the analytic
// reverse-mode path through the convolution pipeline, finite differences as
// the neutral referee, and the SGD optimizer.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "qfcn/rng.hpp"
#include "qfcn/train.hpp"

using namespace qfcn;

namespace {

/// Expectation of Z on Ry(theta)|0>, evaluated through the simulator with the
/// angle fetched from qRAM. Equals cos(theta).
double z_expectation(QramStore &store, const std::string &address) {
    Circuit c;
    c.n_qubits = 1;
    c.gates.push_back(Ry{1, store.read(address)});
    const StateVector s = apply_circuit(StateVector(1), c);
    return std::norm(s.amps[0]) - std::norm(s.amps[1]);
}

struct ConvLossSetup {
    QramStore store;
    FourierConvLayer layer;
    std::vector<double> f;
    std::vector<double> weights;
    ParamVector params;
    std::vector<bool> controlled;

    FourierConvLayer layer_from_store() const {
        FourierConvLayer l = layer;
        AngleTree &tree = l.slice(0, 0).tree;
        for (std::size_t a = 0; a < tree.angles.size(); ++a) {
            tree.angles[a] = store.read(params.addresses[a]);
        }
        return l;
    }

    double loss() const {
        const ConvResult res =
            qconv_1d(f, layer_from_store(), NoiseModel::noiseless());
        double s = 0.0;
        for (std::size_t t = 0; t < res.output.size(); ++t) {
            s += weights[t] * res.output[t] * res.output[t];
        }
        return s;
    }
};

/// Random single-slice layer with a quadratic readout loss; angles mirrored
/// into qRAM so the shift rules can drive the same circuit.
ConvLossSetup make_conv_loss(std::uint64_t seed, std::size_t n_padded,
                             std::size_t flen, std::size_t klen) {
    ConvLossSetup s;
    CounterRng rng(seed, 13);
    s.f.resize(flen);
    for (double &x : s.f) {
        x = rng.uniform(-1.0, 1.0);
    }
    if (l2_norm(s.f) < 1e-6) {
        s.f[0] += 1.0;
    }
    std::vector<double> k(klen);
    for (double &x : k) {
        x = rng.uniform(-1.0, 1.0);
    }
    if (l2_norm(k) < 1e-6) {
        k[0] += 1.0;
    }
    s.layer = FourierConvLayer::from_kernel_1d(k, n_padded);
    s.layer.backend = ConvBackend::Fast;
    const AngleTree &tree = s.layer.slice(0, 0).tree;

    s.params.store = &s.store;
    for (std::size_t a = 0; a < tree.angles.size(); ++a) {
        const std::string addr = "conv/theta" + std::to_string(a);
        s.store.write(addr, tree.angles[a]);
        s.params.addresses.push_back(addr);
        // the root rotation is uncontrolled, every deeper level is controlled
        s.controlled.push_back(a != 0);
    }

    const std::size_t out_len = s.layer.mode == ConvMode::Circular
                                    ? n_padded
                                    : flen + klen - 1;
    s.weights.resize(out_len);
    for (double &w : s.weights) {
        w = rng.uniform(0.1, 1.0);
    }
    return s;
}

} // namespace

TEST_CASE("shift rule on a single rotation") {
    QramStore store;
    const std::string addr = "toy/theta";
    auto loss = [&] { return z_expectation(store, addr); };

    SECTION("gradient of cos(theta) is -sin(theta)") {
        for (double theta : {0.0, kPi / 2.0, 1.0, -0.3, 2.7}) {
            store.write(addr, theta);
            const double g = parameter_shift_grad(loss, store, addr);
            REQUIRE(std::abs(g - (-std::sin(theta))) < 1e-9);
            REQUIRE(std::abs(store.read(addr) - theta) < 1e-12);
        }
    }
    SECTION("finite differences agree") {
        store.write(addr, 0.8);
        const double ps = parameter_shift_grad(loss, store, addr);
        const double fd = finite_difference_grad(loss, store, addr);
        REQUIRE(std::abs(ps - fd) < 1e-6);
    }
    SECTION("parameter is restored when the loss throws") {
        store.write(addr, 1.5);
        auto bad = [&]() -> double { throw SimError("loss blew up"); };
        REQUIRE_THROWS_AS(parameter_shift_grad(bad, store, addr), SimError);
        REQUIRE(std::abs(store.read(addr) - 1.5) < 1e-12);
        REQUIRE_THROWS_AS(
            parameter_shift_grad_controlled(bad, store, addr), SimError);
        REQUIRE(std::abs(store.read(addr) - 1.5) < 1e-12);
    }
}

TEST_CASE("analytic, shift-rule, and finite-difference gradients agree") {
    for (int trial = 0; trial < 20; ++trial) {
        CounterRng rng(3000 + trial, 13);
        const std::size_t n_padded = 1ULL << (1 + rng.uniform_int(3)); // 2..16
        const std::size_t flen = 1 + rng.uniform_int(n_padded);
        const std::size_t klen = 1 + rng.uniform_int(n_padded);
        ConvLossSetup s = make_conv_loss(7000 + trial, n_padded, flen, klen);

        const std::vector<double> analytic =
            analytic_grad_conv1d(s.f, s.layer_from_store(), s.weights);
        auto loss = [&s] { return s.loss(); };
        const std::vector<double> shift =
            parameter_shift_gradient(loss, s.params, s.controlled);
        const std::vector<double> fd =
            finite_difference_gradient(loss, s.params);

        REQUIRE(analytic.size() == shift.size());
        double scale = 1e-3;
        for (double g : analytic) {
            scale = std::max(scale, std::abs(g));
        }
        for (std::size_t a = 0; a < analytic.size(); ++a) {
            INFO("trial=" << trial << " angle=" << a << " n_padded=" << n_padded
                          << " klen=" << klen);
            // both rules are exact for this loss family
            REQUIRE(std::abs(shift[a] - analytic[a]) / scale < 1e-9);
            REQUIRE(std::abs(fd[a] - analytic[a]) / scale < 1e-4);
        }

        // qRAM holds the original angles after all evaluations
        const AngleTree &tree = s.layer.slice(0, 0).tree;
        for (std::size_t a = 0; a < tree.angles.size(); ++a) {
            REQUIRE(std::abs(s.store.read(s.params.addresses[a]) -
                             tree.angles[a]) < 1e-12);
        }
    }
}

TEST_CASE("angles feeding only truncated leaves have zero gradient") {
    // Kernel of length 2 inside a tree over 8 leaves: leaves 2..7 are cut off
    // by the readout, so the subtree rotations below the left root branch are
    // the only live parameters.
    ConvLossSetup s = make_conv_loss(99, 8, 6, 2);
    // widen the tree to all 8 leaves while keeping the length-2 kernel
    {
        const std::vector<double> k = s.layer.kernel_values(0, 0);
        SliceParams &sp = s.layer.slice(0, 0);
        sp.tree = kernel_to_angles(k, 8);
        sp.scale = l2_norm(k);
        s.store = QramStore();
        s.params.addresses.clear();
        s.controlled.clear();
        for (std::size_t a = 0; a < sp.tree.angles.size(); ++a) {
            const std::string addr = "conv/theta" + std::to_string(a);
            s.store.write(addr, sp.tree.angles[a]);
            s.params.addresses.push_back(addr);
            s.controlled.push_back(a != 0);
        }
    }
    REQUIRE(s.params.size() == 7);
    const std::vector<double> analytic =
        analytic_grad_conv1d(s.f, s.layer_from_store(), s.weights);
    auto loss = [&s] { return s.loss(); };
    const std::vector<double> shift =
        parameter_shift_gradient(loss, s.params, s.controlled);
    // heap order: angle 2 spans leaves 4..7, angles 4, 5, 6 span pairs
    // (2,3), (4,5), (6,7); all beyond the kernel support
    for (std::size_t a : {std::size_t{2}, std::size_t{4}, std::size_t{5},
                          std::size_t{6}}) {
        REQUIRE(std::abs(analytic[a]) < 1e-9);
        REQUIRE(std::abs(shift[a]) < 1e-9);
    }
}

TEST_CASE("output jacobian matches finite differences on kernel values") {
    CounterRng rng(123, 13);
    std::vector<double> f(6), k(3);
    for (double &x : f) {
        x = rng.uniform(-1.0, 1.0);
    }
    for (double &x : k) {
        x = rng.uniform(-1.0, 1.0);
    }
    FourierConvLayer layer = FourierConvLayer::from_kernel_1d(k, 8);
    layer.backend = ConvBackend::Fast;
    const std::vector<std::vector<double>> jac =
        conv1d_output_jacobian(f, layer);

    const double h = 1e-6;
    for (std::size_t i = 0; i < k.size(); ++i) {
        std::vector<double> kp = k, km = k;
        kp[i] += h;
        km[i] -= h;
        const std::vector<double> op =
            qconv_1d(f, FourierConvLayer::from_kernel_1d(kp, 8),
                     NoiseModel::noiseless())
                .output;
        const std::vector<double> om =
            qconv_1d(f, FourierConvLayer::from_kernel_1d(km, 8),
                     NoiseModel::noiseless())
                .output;
        for (std::size_t t = 0; t < op.size(); ++t) {
            const double fd = (op[t] - om[t]) / (2.0 * h);
            REQUIRE(std::abs(jac[t][i] - fd) < 1e-6);
        }
    }
}

TEST_CASE("sgd optimizer") {
    SECTION("converges on a quadratic") {
        SgdOptimizer opt(0.1, 0.0);
        std::vector<double> theta = {10.0};
        for (int step = 0; step < 200; ++step) {
            opt.step(theta, {2.0 * (theta[0] - 2.0)});
        }
        REQUIRE(std::abs(theta[0] - 2.0) < 1e-6);
    }
    SECTION("momentum accelerates the same quadratic") {
        SgdOptimizer opt(0.05, 0.9);
        std::vector<double> theta = {10.0};
        for (int step = 0; step < 300; ++step) {
            opt.step(theta, {2.0 * (theta[0] - 2.0)});
        }
        REQUIRE(std::abs(theta[0] - 2.0) < 1e-4);
    }
    SECTION("zero learning rate leaves parameters unchanged") {
        SgdOptimizer opt(0.0, 0.9);
        std::vector<double> theta = {1.0, -2.0};
        opt.step(theta, {5.0, -3.0});
        REQUIRE(theta == std::vector<double>{1.0, -2.0});
    }
    SECTION("identical runs are identical") {
        auto run = [] {
            SgdOptimizer opt(0.1, 0.5);
            std::vector<double> theta = {1.0, 2.0};
            for (int step = 0; step < 50; ++step) {
                opt.step(theta, {theta[0] * 0.3, theta[1] * -0.2});
            }
            return theta;
        };
        REQUIRE(run() == run());
    }
    SECTION("non-finite gradients abort the step") {
        SgdOptimizer opt(0.1, 0.0);
        std::vector<double> theta = {1.0};
        REQUIRE_THROWS_AS(opt.step(theta, {std::nan("")}), SimError);
        REQUIRE_THROWS_AS(opt.step(theta, {HUGE_VAL}), SimError);
    }
    SECTION("invalid hyperparameters are rejected") {
        REQUIRE_THROWS_AS(SgdOptimizer(-0.1, 0.0), SimError);
        REQUIRE_THROWS_AS(SgdOptimizer(0.1, 1.0), SimError);
    }
    SECTION("qRAM-backed step writes back updated angles") {
        QramStore store;
        store.write("p0", 4.0);
        store.write("p1", -1.0);
        ParamVector params{&store, {"p0", "p1"}};
        SgdOptimizer opt(0.5, 0.0);
        sgd_step(params, {2.0, -2.0}, opt);
        REQUIRE(store.read("p0") == 3.0);
        REQUIRE(store.read("p1") == 0.0);
    }
}

TEST_CASE("loss helpers") {
    SECTION("softmax is a probability vector") {
        const std::vector<double> p = softmax({1.0, 2.0, 3.0});
        double s = 0.0;
        for (double x : p) {
            REQUIRE(x > 0.0);
            s += x;
        }
        REQUIRE(std::abs(s - 1.0) < 1e-12);
        REQUIRE(p[2] > p[1]);
        REQUIRE(p[1] > p[0]);
    }
    SECTION("softmax is shift invariant and overflow safe") {
        const std::vector<double> a = softmax({1.0, 2.0});
        const std::vector<double> b = softmax({1001.0, 1002.0});
        REQUIRE(std::abs(a[0] - b[0]) < 1e-12);
        REQUIRE(std::abs(a[1] - b[1]) < 1e-12);
    }
    SECTION("cross entropy of a confident correct prediction is small") {
        const double ce = cross_entropy({{0.01, 0.98, 0.01}}, {1});
        REQUIRE(ce < 0.05);
        REQUIRE(ce > 0.0);
    }
    SECTION("cross entropy averages over the batch") {
        const double a = cross_entropy({{0.5, 0.5}}, {0});
        const double b = cross_entropy({{0.5, 0.5}, {0.5, 0.5}}, {0, 1});
        REQUIRE(std::abs(a - b) < 1e-12);
        REQUIRE(std::abs(a - std::log(2.0)) < 1e-12);
    }
    SECTION("bad labels are rejected") {
        REQUIRE_THROWS_AS(cross_entropy({{1.0, 0.0}}, {2}), SimError);
        REQUIRE_THROWS_AS(cross_entropy({}, {}), SimError);
    }
}
