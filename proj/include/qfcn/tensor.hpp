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

#include <vector>

#include "common.hpp"

namespace qfcn {

/// H x W x C real tensor, stored as C contiguous H*W planes.
struct Tensor3 {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int h_, int w_, int c_)
        : h(h_), w(w_), c(c_),
          data(static_cast<std::size_t>(h_) * w_ * c_, 0.0) {}

    double &at(int i, int j, int k) {
        return data[(static_cast<std::size_t>(k) * h + i) * w + j];
    }
    double at(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(k) * h + i) * w + j];
    }

    /// Pointer to channel plane k (row-major H x W).
    double *plane(int k) { return data.data() + static_cast<std::size_t>(k) * h * w; }
    const double *plane(int k) const {
        return data.data() + static_cast<std::size_t>(k) * h * w;
    }

    std::size_t size() const { return data.size(); }
};

/// h x w x C_in x C_out kernel bank, one h*w plane per (c_in, c_out) pair.
struct Kernel4 {
    int h = 0;
    int w = 0;
    int cin = 0;
    int cout = 0;
    std::vector<double> data;

    Kernel4() = default;
    Kernel4(int h_, int w_, int cin_, int cout_)
        : h(h_), w(w_), cin(cin_), cout(cout_),
          data(static_cast<std::size_t>(h_) * w_ * cin_ * cout_, 0.0) {}

    double &at(int i, int j, int ci, int co) {
        return data[((static_cast<std::size_t>(co) * cin + ci) * h + i) * w + j];
    }
    double at(int i, int j, int ci, int co) const {
        return data[((static_cast<std::size_t>(co) * cin + ci) * h + i) * w + j];
    }

    double *plane(int ci, int co) {
        return data.data() + (static_cast<std::size_t>(co) * cin + ci) * h * w;
    }
    const double *plane(int ci, int co) const {
        return data.data() + (static_cast<std::size_t>(co) * cin + ci) * h * w;
    }
};

} // namespace qfcn
