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
// Rotation-angle tree for amplitude state preparation. A binary tree of
// N-1 Ry angles maps |0...0> on log2(N) qubits to an arbitrary real unit
// vector of length N: each internal node splits probability mass between its
// two subtrees via cos(theta/2) / sin(theta/2), and the bottom level carries
// the signs. These angles are the trainable parameters of a Fourier
// convolution layer's kernel.
#pragma once

#include <cmath>
#include <vector>

#include "statevec.hpp"

namespace qfcn {

struct AngleTree {
    std::size_t n_leaves = 0;        // power of two
    std::vector<double> angles;      // n_leaves - 1, heap order (root first)

    int n_qubits() const { return ilog2(n_leaves); }
};

namespace detail {

inline void angles_from_range(const std::vector<double> &v, std::size_t lo,
                              std::size_t hi, std::size_t node,
                              std::vector<double> &angles) {
    if (hi - lo == 2) {
        // Bottom level: the pair's signs live in this angle.
        angles[node] = 2.0 * std::atan2(v[lo + 1], v[lo]);
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    double l2 = 0.0;
    double r2 = 0.0;
    for (std::size_t i = lo; i < mid; ++i) {
        l2 += v[i] * v[i];
    }
    for (std::size_t i = mid; i < hi; ++i) {
        r2 += v[i] * v[i];
    }
    angles[node] = 2.0 * std::atan2(std::sqrt(r2), std::sqrt(l2));
    angles_from_range(v, lo, mid, 2 * node + 1, angles);
    angles_from_range(v, mid, hi, 2 * node + 2, angles);
}

inline void leaves_from_angles(const std::vector<double> &angles,
                               std::size_t lo, std::size_t hi,
                               std::size_t node, double factor,
                               std::vector<double> &out) {
    const double c = std::cos(angles[node] / 2.0);
    const double s = std::sin(angles[node] / 2.0);
    if (hi - lo == 2) {
        out[lo] = factor * c;
        out[lo + 1] = factor * s;
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    leaves_from_angles(angles, lo, mid, 2 * node + 1, factor * c, out);
    leaves_from_angles(angles, mid, hi, 2 * node + 2, factor * s, out);
}

} // namespace detail

/**
 * Angles whose preparation circuit produces the normalized zero-padded
 * kernel as amplitudes. N must be a power of two >= len(k) (and >= 2).
 */
inline AngleTree kernel_to_angles(const std::vector<double> &k, std::size_t n) {
    check(!k.empty(), "kernel_to_angles: empty kernel");
    check(is_pow2(n) && n >= k.size() && n >= 2,
          "kernel_to_angles: N must be a power of two >= len(k)");
    check(all_finite(k), "kernel_to_angles: non-finite kernel entry");
    const double norm = l2_norm(k);
    check(norm > 0.0, "kernel_to_angles: zero kernel");

    std::vector<double> padded(n, 0.0);
    for (std::size_t i = 0; i < k.size(); ++i) {
        padded[i] = k[i] / norm;
    }
    AngleTree tree;
    tree.n_leaves = n;
    tree.angles.assign(n - 1, 0.0);
    detail::angles_from_range(padded, 0, n, 0, tree.angles);
    return tree;
}

/// Leaf amplitudes of the tree: a unit vector of length N (signs included).
inline std::vector<double> angles_to_kernel(const AngleTree &tree) {
    check(is_pow2(tree.n_leaves) && tree.n_leaves >= 2 &&
              tree.angles.size() == tree.n_leaves - 1,
          "angles_to_kernel: malformed tree");
    std::vector<double> out(tree.n_leaves, 0.0);
    detail::leaves_from_angles(tree.angles, 0, tree.n_leaves, 0, 1.0, out);
    return out;
}

/**
 * State-preparation circuit of the tree: level d applies a rotation on qubit
 * d+1 multiplexed over the basis pattern of qubits 1..d. Applied to |0...0>
 * it produces exactly the leaf amplitudes.
 */
inline Circuit tree_circuit(const AngleTree &tree) {
    const int n = tree.n_qubits();
    Circuit circ;
    circ.n_qubits = n;
    for (int d = 0; d < n; ++d) {
        const std::size_t level_base = (std::size_t{1} << d) - 1;
        const std::size_t level_count = std::size_t{1} << d;
        for (std::size_t off = 0; off < level_count; ++off) {
            const double theta = tree.angles[level_base + off];
            if (theta == 0.0 && d > 0) {
                continue; // identity rotation
            }
            if (d == 0) {
                circ.gates.push_back(Ry{1, theta});
            } else {
                std::vector<int> controls(d);
                std::vector<int> values(d);
                for (int b = 0; b < d; ++b) {
                    controls[b] = b + 1;
                    values[b] = static_cast<int>((off >> (d - 1 - b)) & 1U);
                }
                circ.gates.push_back(
                    ControlledRy(std::move(controls), std::move(values), d + 1,
                                 theta));
            }
        }
    }
    return circ;
}

/**
 * Jacobian of the leaf amplitudes with respect to the tree angles:
 * J[a][l] = d leaf_l / d angle_a. Each angle touches only the leaves under
 * its node, through a single cos/sin factor of the path product.
 */
inline std::vector<std::vector<double>> tree_jacobian(const AngleTree &tree) {
    const std::size_t n = tree.n_leaves;
    std::vector<std::vector<double>> jac(n - 1,
                                         std::vector<double>(n, 0.0));

    // Walk every root-to-leaf path once, keeping the factors along the path.
    std::vector<std::pair<std::size_t, double>> path; // (node, factor)
    std::vector<double> dfactor_path;                 // d factor / d angle

    auto recurse = [&](auto &&self, std::size_t lo, std::size_t hi,
                       std::size_t node) -> void {
        const double c = std::cos(tree.angles[node] / 2.0);
        const double s = std::sin(tree.angles[node] / 2.0);
        auto descend = [&](bool right, std::size_t nlo, std::size_t nhi,
                           std::size_t child) {
            path.emplace_back(node, right ? s : c);
            dfactor_path.push_back(right ? 0.5 * c : -0.5 * s);
            if (nhi - nlo == 1) {
                // Leaf reached: fill column nlo of the Jacobian.
                for (std::size_t a = 0; a < path.size(); ++a) {
                    double prod = dfactor_path[a];
                    for (std::size_t b = 0; b < path.size(); ++b) {
                        if (b != a) {
                            prod *= path[b].second;
                        }
                    }
                    jac[path[a].first][nlo] = prod;
                }
            } else {
                self(self, nlo, nhi, child);
            }
            path.pop_back();
            dfactor_path.pop_back();
        };
        const std::size_t mid = lo + (hi - lo) / 2;
        if (hi - lo == 2) {
            descend(false, lo, lo + 1, 0);
            descend(true, lo + 1, hi, 0);
        } else {
            descend(false, lo, mid, 2 * node + 1);
            descend(true, mid, hi, 2 * node + 2);
        }
    };
    recurse(recurse, 0, n, 0);
    return jac;
}

} // namespace qfcn
