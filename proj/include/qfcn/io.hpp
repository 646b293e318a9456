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
// File formats: MNIST IDX ingestion (bit-exact big-endian headers), CSV
// series/adjacency readers and writers, flat binary parameter checkpoints,
// and the key = value run configuration parser.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace qfcn {

// ---------------------------------------------------------------------------
// MNIST IDX
// ---------------------------------------------------------------------------

struct MnistSet {
    std::size_t count = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> images; // count * rows * cols
    std::vector<std::uint8_t> labels; // count

    const std::uint8_t *image(std::size_t i) const {
        return images.data() + i * static_cast<std::size_t>(rows) * cols;
    }
};

namespace detail {

inline std::uint32_t read_u32_be(std::istream &in, const std::string &path) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char *>(b), 4);
    check(in.gcount() == 4, "load_idx: truncated header in " + path);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

inline void write_u32_be(std::ostream &out, std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24),
                               static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 8),
                               static_cast<std::uint8_t>(v)};
    out.write(reinterpret_cast<const char *>(b), 4);
}

inline std::vector<std::uint8_t> read_exact(std::istream &in, std::size_t n,
                                            const std::string &path) {
    std::vector<std::uint8_t> buf(n);
    in.read(reinterpret_cast<char *>(buf.data()),
            static_cast<std::streamsize>(n));
    check(static_cast<std::size_t>(in.gcount()) == n,
          "load_idx: " + path + " truncated, expected " + std::to_string(n) +
              " data bytes, got " + std::to_string(in.gcount()));
    return buf;
}

} // namespace detail

/// Parses an IDX image/label pair (magics 2051 / 2049, big-endian headers).
inline MnistSet load_idx(const std::string &images_path,
                         const std::string &labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    check(img.good(), "load_idx: cannot open " + images_path);
    const std::uint32_t img_magic = detail::read_u32_be(img, images_path);
    check(img_magic == 2051, "load_idx: " + images_path +
                                 " has magic " + std::to_string(img_magic) +
                                 ", expected 2051 (IDX image file)");
    MnistSet set;
    set.count = detail::read_u32_be(img, images_path);
    set.rows = static_cast<int>(detail::read_u32_be(img, images_path));
    set.cols = static_cast<int>(detail::read_u32_be(img, images_path));
    check(set.rows > 0 && set.cols > 0, "load_idx: bad image dimensions");
    set.images = detail::read_exact(
        img, set.count * static_cast<std::size_t>(set.rows) * set.cols,
        images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    check(lab.good(), "load_idx: cannot open " + labels_path);
    const std::uint32_t lab_magic = detail::read_u32_be(lab, labels_path);
    check(lab_magic == 2049, "load_idx: " + labels_path +
                                 " has magic " + std::to_string(lab_magic) +
                                 ", expected 2049 (IDX label file)");
    const std::uint32_t lab_count = detail::read_u32_be(lab, labels_path);
    check(lab_count == set.count,
          "load_idx: image count " + std::to_string(set.count) +
              " != label count " + std::to_string(lab_count));
    set.labels = detail::read_exact(lab, set.count, labels_path);
    return set;
}

/// Writes an IDX pair; the reader round-trips it byte-identically.
inline void save_idx(const MnistSet &set, const std::string &images_path,
                     const std::string &labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    check(img.good(), "save_idx: cannot open " + images_path);
    detail::write_u32_be(img, 2051);
    detail::write_u32_be(img, static_cast<std::uint32_t>(set.count));
    detail::write_u32_be(img, static_cast<std::uint32_t>(set.rows));
    detail::write_u32_be(img, static_cast<std::uint32_t>(set.cols));
    img.write(reinterpret_cast<const char *>(set.images.data()),
              static_cast<std::streamsize>(set.images.size()));

    std::ofstream lab(labels_path, std::ios::binary);
    check(lab.good(), "save_idx: cannot open " + labels_path);
    detail::write_u32_be(lab, 2049);
    detail::write_u32_be(lab, static_cast<std::uint32_t>(set.count));
    lab.write(reinterpret_cast<const char *>(set.labels.data()),
              static_cast<std::streamsize>(set.labels.size()));
}

// ---------------------------------------------------------------------------
// Checkpoints: magic "QFCN", u32 version, u64 count, little-endian f64 values
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32_le(std::ostream &out, std::uint32_t v) {
    const std::uint8_t b[4] = {
        static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
        static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char *>(b), 4);
}

inline void write_u64_le(std::ostream &out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    out.write(reinterpret_cast<const char *>(b), 8);
}

inline std::uint32_t read_u32_le(std::istream &in, const std::string &path) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char *>(b), 4);
    check(in.gcount() == 4, "load_checkpoint: truncated " + path);
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) |
           (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
}

inline std::uint64_t read_u64_le(std::istream &in, const std::string &path) {
    std::uint8_t b[8];
    in.read(reinterpret_cast<char *>(b), 8);
    check(in.gcount() == 8, "load_checkpoint: truncated " + path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= std::uint64_t{b[i]} << (8 * i);
    }
    return v;
}

} // namespace detail

inline void save_checkpoint(const std::vector<double> &params,
                            const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "save_checkpoint: cannot open " + path);
    out.write("QFCN", 4);
    detail::write_u32_le(out, kCheckpointVersion);
    detail::write_u64_le(out, params.size());
    for (double v : params) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        detail::write_u64_le(out, bits);
    }
    check(out.good(), "save_checkpoint: write failed for " + path);
}

inline std::vector<double> load_checkpoint(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "load_checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    check(in.gcount() == 4 && std::memcmp(magic, "QFCN", 4) == 0,
          "load_checkpoint: bad magic in " + path);
    const std::uint32_t version = detail::read_u32_le(in, path);
    check(version == kCheckpointVersion,
          "load_checkpoint: unsupported version " + std::to_string(version));
    const std::uint64_t count = detail::read_u64_le(in, path);
    std::vector<double> params(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t bits = detail::read_u64_le(in, path);
        std::memcpy(&params[i], &bits, 8);
    }
    return params;
}

// ---------------------------------------------------------------------------
// CSV series and adjacency
// ---------------------------------------------------------------------------

/// Node series CSV: header `node_0,...,node_{V-1}`, one row per time step.
inline void save_series_csv(const std::vector<std::vector<double>> &series,
                            const std::string &path) {
    check(!series.empty(), "save_series_csv: empty series");
    std::ofstream out(path);
    check(out.good(), "save_series_csv: cannot open " + path);
    out.precision(17);
    const std::size_t v = series[0].size();
    for (std::size_t j = 0; j < v; ++j) {
        out << (j ? "," : "") << "node_" << j;
    }
    out << "\n";
    for (const auto &row : series) {
        check(row.size() == v, "save_series_csv: ragged rows");
        for (std::size_t j = 0; j < v; ++j) {
            out << (j ? "," : "") << row[j];
        }
        out << "\n";
    }
}

inline std::vector<std::vector<double>>
load_series_csv(const std::string &path) {
    std::ifstream in(path);
    check(in.good(), "load_series_csv: cannot open " + path);
    std::string line;
    check(static_cast<bool>(std::getline(in, line)),
          "load_series_csv: empty file " + path);
    check(line.rfind("node_0", 0) == 0,
          "load_series_csv: missing node_* header in " + path);
    std::size_t v = 1;
    for (char c : line) {
        if (c == ',') {
            ++v;
        }
    }
    std::vector<std::vector<double>> series;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        check(row.size() == v, "load_series_csv: row width mismatch in " + path);
        check(all_finite(row), "load_series_csv: non-finite value in " + path);
        series.push_back(std::move(row));
    }
    return series;
}

/// V x V adjacency CSV, no header.
inline void save_adjacency_csv(const std::vector<std::vector<double>> &adj,
                               const std::string &path) {
    std::ofstream out(path);
    check(out.good(), "save_adjacency_csv: cannot open " + path);
    out.precision(17);
    for (const auto &row : adj) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j ? "," : "") << row[j];
        }
        out << "\n";
    }
}

inline std::vector<std::vector<double>>
load_adjacency_csv(const std::string &path) {
    std::ifstream in(path);
    check(in.good(), "load_adjacency_csv: cannot open " + path);
    std::vector<std::vector<double>> adj;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        adj.push_back(std::move(row));
    }
    for (const auto &row : adj) {
        check(row.size() == adj.size(),
              "load_adjacency_csv: matrix is not square in " + path);
    }
    return adj;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/**
 * Plain-text `key = value` configuration. Keys must come from the allowed
 * set supplied by the command; unknown keys are rejected. Precedence:
 * command-line override > config file > built-in defaults.
 */
class RunConfig {
  public:
    void set_default(const std::string &key, const std::string &value) {
        allowed_.insert(key);
        if (values_.find(key) == values_.end()) {
            values_[key] = value;
        }
    }

    void set(const std::string &key, const std::string &value) {
        check(allowed_.count(key) != 0, "config: unknown key '" + key + "'");
        values_[key] = value;
    }

    void load_file(const std::string &path) {
        std::ifstream in(path);
        check(in.good(), "config: cannot open " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) {
                line.resize(hash);
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                std::string trimmed = trim(line);
                check(trimmed.empty(), "config: malformed line " +
                                           std::to_string(lineno) + " in " +
                                           path);
                continue;
            }
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    /// Applies a `key=value` command-line override.
    void apply_override(const std::string &assignment) {
        const std::size_t eq = assignment.find('=');
        check(eq != std::string::npos,
              "config: override must be key=value, got '" + assignment + "'");
        set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
    }

    const std::string &str(const std::string &key) const {
        auto it = values_.find(key);
        check(it != values_.end(), "config: missing key '" + key + "'");
        return it->second;
    }

    double num(const std::string &key) const {
        try {
            return std::stod(str(key));
        } catch (const std::exception &) {
            throw SimError("config: key '" + key + "' is not numeric: " +
                           str(key));
        }
    }

    long integer(const std::string &key) const {
        try {
            return std::stol(str(key));
        } catch (const std::exception &) {
            throw SimError("config: key '" + key + "' is not an integer: " +
                           str(key));
        }
    }

    /// Echoes the effective configuration, sorted by key.
    void dump(std::ostream &out) const {
        for (const auto &[k, v] : values_) {
            out << k << " = " << v << "\n";
        }
    }

  private:
    static std::string trim(const std::string &s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        std::size_t b = s.find_last_not_of(" \t\r");
        if (a == std::string::npos) {
            return "";
        }
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> allowed_;
};

} // namespace qfcn
