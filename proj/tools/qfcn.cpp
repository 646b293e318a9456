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
// Command-line front end: oracle verification, desk-scale training runs with
// CSV/checkpoint artifacts, and the convolution benchmark.
//
// Exit codes: 0 success, 1 assertion or runtime failure, 2 usage error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfcn/fourier_conv.hpp"
#include "qfcn/io.hpp"
#include "qfcn/models.hpp"
#include "qfcn/qft.hpp"
#include "qfcn/reference.hpp"
#include "qfcn/rng.hpp"
#include "qfcn/train.hpp"

using namespace qfcn;

namespace {

double now_seconds() {
    static const auto t0 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<double> random_signal(std::size_t len, CounterRng &rng) {
    std::vector<double> v(len);
    for (double &x : v) {
        x = rng.uniform(-1.0, 1.0);
    }
    if (l2_norm(v) < 1e-6) {
        v[0] += 1.0;
    }
    return v;
}

std::string join_values(const std::vector<double> &v) {
    std::string s = "[";
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s%.17g", i ? ", " : "", v[i]);
        s += buf;
    }
    return s + "]";
}

// ---------------------------------------------------------------------------
// verify: oracle suites. Each returns std::nullopt on success or a
// description of the first failing case, with its inputs, for reproduction.
// ---------------------------------------------------------------------------

std::optional<std::string> suite_qft() {
    for (int n = 1; n <= 8; ++n) {
        const std::size_t dim = std::size_t{1} << n;
        for (int trial = 0; trial < 20; ++trial) {
            CounterRng rng(100 * n + trial, 0x5157);
            StateVector s(n);
            double norm2 = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                s.amps[i] = cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
                norm2 += std::norm(s.amps[i]);
            }
            for (cplx &a : s.amps) {
                a /= std::sqrt(norm2);
            }
            const StateVector got = qft_amplitudes(s);
            const std::vector<cplx> oracle = dft_oracle(s.amps);
            const std::vector<cplx> fast = fft(s.amps);
            double err_oracle = 0.0;
            double err_fft = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                err_oracle = std::max(err_oracle, std::abs(got.amps[i] - oracle[i]));
                err_fft = std::max(err_fft, std::abs(got.amps[i] - fast[i]));
            }
            const StateVector back = iqft_amplitudes(got);
            double err_rt = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                err_rt = std::max(err_rt, std::abs(back.amps[i] - s.amps[i]));
            }
            if (err_oracle > 1e-9 || err_fft > 1e-9 || err_rt > 1e-10) {
                char buf[256];
                std::snprintf(buf, sizeof(buf),
                              "n=%d trial=%d (CounterRng seed %d): "
                              "|qft-dft|=%.3e |qft-fft|=%.3e round-trip=%.3e",
                              n, trial, 100 * n + trial, err_oracle, err_fft,
                              err_rt);
                return std::string(buf);
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> suite_mmap() {
    for (int n = 1; n <= 5; ++n) {
        const std::size_t len = std::size_t{1} << n;
        CounterRng rng(n, 0x6d6d);
        StateVector joint(2 * n);
        double norm2 = 0.0;
        for (cplx &a : joint.amps) {
            a = cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            norm2 += std::norm(a);
        }
        for (cplx &a : joint.amps) {
            a /= std::sqrt(norm2);
        }
        const StateVector out = m_map(joint);
        for (std::size_t t = 0; t < len; ++t) {
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t src = (t << n) | ((t + j) & (len - 1));
                const std::size_t dst = (t << n) | j;
                if (std::abs(out.amps[dst] - joint.amps[src]) > 1e-12) {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf),
                                  "n=%d t=%zu j=%zu: amp mismatch %.3e",
                                  n, t, j,
                                  std::abs(out.amps[dst] - joint.amps[src]));
                    return std::string(buf);
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> suite_conv() {
    for (std::size_t n_padded : {2, 4, 8, 16, 32}) {
        for (int trial = 0; trial < 10; ++trial) {
            CounterRng rng(100 * n_padded + trial, 0x6376);
            const std::vector<double> f =
                random_signal(1 + rng.uniform_int(n_padded), rng);
            const std::vector<double> k =
                random_signal(1 + rng.uniform_int(n_padded), rng);
            std::vector<double> fp(n_padded, 0.0);
            std::vector<double> kp(n_padded, 0.0);
            std::copy(f.begin(), f.end(), fp.begin());
            std::copy(k.begin(), k.end(), kp.begin());
            const std::vector<double> want =
                direct_conv(fp, kp, ConvMode::Circular);

            FourierConvLayer layer = FourierConvLayer::from_kernel_1d(
                k, n_padded, ConvMode::Circular);
            layer.backend = (n_padded <= 16 && trial % 2 == 0)
                                ? ConvBackend::Exact
                                : ConvBackend::Fast;
            const ConvResult res = qconv_1d(f, layer, NoiseModel::noiseless());
            double scale = 1e-12;
            for (double w : want) {
                scale = std::max(scale, std::abs(w));
            }
            for (std::size_t i = 0; i < want.size(); ++i) {
                if (std::abs(res.output[i] - want[i]) / scale > 1e-6) {
                    return "n_padded=" + std::to_string(n_padded) +
                           " trial=" + std::to_string(trial) +
                           " f=" + join_values(f) + " k=" + join_values(k);
                }
            }
        }
    }
    for (int trial = 0; trial < 5; ++trial) {
        CounterRng rng(9000 + trial, 0x6376);
        const int hw = 4 + static_cast<int>(rng.uniform_int(9));
        Tensor3 x(hw, hw, 2);
        for (double &v : x.data) {
            v = rng.uniform(-1.0, 1.0);
        }
        Kernel4 k(3, 3, 2, 2);
        for (double &v : k.data) {
            v = rng.uniform(-1.0, 1.0);
        }
        FourierConvLayer layer = FourierConvLayer::from_kernel_2d(
            k, next_pow2(hw + 2), next_pow2(hw + 2), ConvMode::Linear);
        layer.backend = ConvBackend::Fast;
        const ConvResult2d res = qconv_2d(x, layer, NoiseModel::noiseless());
        const Tensor3 want = direct_conv_2d(x, k, ConvMode::Linear);
        double scale = 1e-12;
        for (double w : want.data) {
            scale = std::max(scale, std::abs(w));
        }
        for (std::size_t i = 0; i < want.data.size(); ++i) {
            if (std::abs(res.output.data[i] - want.data[i]) / scale > 1e-6) {
                return "2-D trial=" + std::to_string(trial) + " image " +
                       std::to_string(hw) + "x" + std::to_string(hw) +
                       "x2, kernel 3x3x2x2 (CounterRng seed " +
                       std::to_string(9000 + trial) + ")";
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> suite_grad() {
    QramStore store;
    const std::string addr = "toy/theta";
    auto toy = [&] {
        Circuit c;
        c.n_qubits = 1;
        c.gates.push_back(Ry{1, store.read(addr)});
        const StateVector s = apply_circuit(StateVector(1), c);
        return std::norm(s.amps[0]) - std::norm(s.amps[1]);
    };
    for (int i = 0; i < 10; ++i) {
        const double theta = -2.5 + 0.5 * i;
        store.write(addr, theta);
        const double g = parameter_shift_grad(toy, store, addr);
        if (std::abs(g + std::sin(theta)) > 1e-9) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "toy theta=%.3f: |g+sin|=%.3e",
                          theta, std::abs(g + std::sin(theta)));
            return std::string(buf);
        }
    }
    for (int trial = 0; trial < 5; ++trial) {
        CounterRng rng(500 + trial, 0x6772);
        const std::size_t n_padded = 8;
        const std::vector<double> f = random_signal(6, rng);
        const std::vector<double> k = random_signal(3, rng);
        FourierConvLayer layer = FourierConvLayer::from_kernel_1d(k, n_padded);
        layer.backend = ConvBackend::Fast;
        std::vector<double> weights(n_padded);
        for (double &w : weights) {
            w = rng.uniform(0.1, 1.0);
        }

        QramStore qram;
        ParamVector params;
        params.store = &qram;
        std::vector<bool> controlled;
        const AngleTree &tree = layer.slice(0, 0).tree;
        for (std::size_t a = 0; a < tree.angles.size(); ++a) {
            const std::string address = "conv/theta" + std::to_string(a);
            qram.write(address, tree.angles[a]);
            params.addresses.push_back(address);
            controlled.push_back(a != 0);
        }
        auto loss = [&] {
            FourierConvLayer l = layer;
            AngleTree &t = l.slice(0, 0).tree;
            for (std::size_t a = 0; a < t.angles.size(); ++a) {
                t.angles[a] = qram.read(params.addresses[a]);
            }
            const ConvResult res = qconv_1d(f, l, NoiseModel::noiseless());
            double s = 0.0;
            for (std::size_t i = 0; i < res.output.size(); ++i) {
                s += weights[i] * res.output[i] * res.output[i];
            }
            return s;
        };
        const std::vector<double> shift =
            parameter_shift_gradient(loss, params, controlled);
        const std::vector<double> fd =
            finite_difference_gradient(loss, params, 1e-5);
        const std::vector<double> analytic =
            analytic_grad_conv1d(f, layer, weights);
        double scale = 1e-6;
        for (double g : fd) {
            scale = std::max(scale, std::abs(g));
        }
        for (std::size_t j = 0; j < shift.size(); ++j) {
            const double err = std::max(std::abs(shift[j] - fd[j]),
                                        std::abs(analytic[j] - fd[j])) /
                               scale;
            if (err > 1e-4) {
                return "trial=" + std::to_string(trial) + " param " +
                       std::to_string(j) + " f=" + join_values(f) +
                       " k=" + join_values(k);
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> suite_prob() {
    for (int trial = 0; trial < 20; ++trial) {
        CounterRng rng(trial, 0x7072);
        const std::size_t n_padded = std::size_t{1} << (1 + rng.uniform_int(5));
        const std::vector<double> f =
            random_signal(1 + rng.uniform_int(n_padded), rng);
        const std::vector<double> k =
            random_signal(1 + rng.uniform_int(n_padded), rng);
        FourierConvLayer layer =
            FourierConvLayer::from_kernel_1d(k, n_padded, ConvMode::Circular);
        layer.backend = ConvBackend::Fast;
        const ConvResult res = qconv_1d(f, layer, NoiseModel::noiseless());

        std::vector<cplx> fv(n_padded, 0.0);
        std::vector<cplx> kv(n_padded, 0.0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            fv[i] = f[i] / l2_norm(f);
        }
        for (std::size_t i = 0; i < k.size(); ++i) {
            kv[i] = k[i] / l2_norm(k);
        }
        const std::vector<cplx> fh = dft_oracle(fv);
        const std::vector<cplx> kh = dft_oracle(kv);
        double p = 0.0;
        for (std::size_t t = 0; t < n_padded; ++t) {
            p += std::norm(fh[t] * kh[t]);
        }
        if (std::abs(res.success_prob - p) > 1e-9) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "trial=%d n_padded=%zu: success prob %.12f vs "
                          "oracle %.12f",
                          trial, n_padded, res.success_prob, p);
            return std::string(buf);
        }
    }
    return std::nullopt;
}

int cmd_verify(const std::string &suite) {
    struct Suite {
        const char *name;
        std::optional<std::string> (*run)();
    };
    const std::vector<Suite> suites = {
        {"qft", suite_qft},   {"mmap", suite_mmap}, {"conv", suite_conv},
        {"grad", suite_grad}, {"prob", suite_prob},
    };
    bool matched = false;
    int failures = 0;
    for (const Suite &s : suites) {
        if (!suite.empty() && suite != s.name) {
            continue;
        }
        matched = true;
        const std::optional<std::string> fail = s.run();
        if (fail) {
            std::printf("%-6s FAIL  first failing case: %s\n", s.name,
                        fail->c_str());
            ++failures;
        } else {
            std::printf("%-6s PASS\n", s.name);
        }
    }
    if (!matched) {
        std::fprintf(stderr,
                     "unknown suite '%s' (choose qft, mmap, conv, grad, "
                     "prob)\n",
                     suite.c_str());
        return 2;
    }
    return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Shared training plumbing
// ---------------------------------------------------------------------------

std::filesystem::path resolve_output_dir(const RunConfig &cfg) {
    const char *env = std::getenv("QFCN_OUTPUT_DIR");
    const std::filesystem::path dir =
        env != nullptr ? std::filesystem::path(env)
                       : std::filesystem::path(cfg.str("output_dir"));
    std::filesystem::create_directories(dir);
    return dir;
}

void echo_effective_config(const RunConfig &cfg,
                           const std::filesystem::path &dir) {
    std::ofstream out(dir / "effective.conf");
    check(out.good(), "cannot write effective config to " + dir.string());
    cfg.dump(out);
}

/// CSV writer that flushes per row so partial runs keep partial curves.
class CsvLog {
  public:
    CsvLog(const std::filesystem::path &path, const std::string &header) {
        out_.open(path);
        check(out_.good(), "cannot open " + path.string());
        out_ << header << "\n" << std::flush;
    }

    void row(const std::vector<double> &values) {
        char buf[64];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
            out_ << (i ? "," : "") << buf;
        }
        out_ << "\n" << std::flush;
    }

  private:
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// train-mnist
// ---------------------------------------------------------------------------

RunConfig mnist_defaults() {
    RunConfig cfg;
    cfg.set_default("epochs", "10");
    cfg.set_default("learning_rate", "0.01");
    cfg.set_default("momentum", "0.9");
    cfg.set_default("batch_size", "32");
    cfg.set_default("seed", "3");
    cfg.set_default("model_seed", "12");
    cfg.set_default("eps", "0.01");
    cfg.set_default("cap_c", "10");
    cfg.set_default("train_count", "2000");
    cfg.set_default("test_count", "1000");
    cfg.set_default("mnist_dir", "");
    cfg.set_default("use_quantum", "1");
    cfg.set_default("output_dir", "runs/mnist");
    return cfg;
}

int cmd_train_mnist(RunConfig &cfg) {
    const std::filesystem::path dir = resolve_output_dir(cfg);
    echo_effective_config(cfg, dir);

    const std::size_t train_count =
        static_cast<std::size_t>(cfg.integer("train_count"));
    const std::size_t test_count =
        static_cast<std::size_t>(cfg.integer("test_count"));

    MnistSet train_set;
    MnistSet test_set;
    const std::string mnist_dir = cfg.str("mnist_dir");
    if (!mnist_dir.empty()) {
        const std::filesystem::path p(mnist_dir);
        const std::filesystem::path train_images = p / "train-images-idx3-ubyte";
        if (!std::filesystem::exists(train_images)) {
            std::fprintf(
                stderr,
                "dataset missing: %s not found.\n"
                "Download the four MNIST IDX files (train-images-idx3-ubyte, "
                "train-labels-idx1-ubyte, t10k-images-idx3-ubyte, "
                "t10k-labels-idx1-ubyte),\ne.g. from "
                "https://ossci-datasets.s3.amazonaws.com/mnist/ (gunzip them), "
                "and point mnist_dir at that directory.\n",
                train_images.string().c_str());
            return 1;
        }
        train_set = load_idx(train_images.string(),
                             (p / "train-labels-idx1-ubyte").string());
        test_set = load_idx((p / "t10k-images-idx3-ubyte").string(),
                            (p / "t10k-labels-idx1-ubyte").string());
        check(train_set.count >= train_count && test_set.count >= test_count,
              "dataset smaller than requested train/test counts");
    } else {
        // Built-in rendered-digit set; supply mnist_dir for the real files.
        train_set = render_digit_set(train_count, 100);
        test_set = render_digit_set(test_count, 900);
    }

    ClassifierConfig mc;
    mc.eps = cfg.num("eps");
    mc.cap_c = cfg.num("cap_c");
    mc.seed = static_cast<std::uint64_t>(cfg.integer("model_seed"));
    QfcnClassifier model = build_mnist_qfcn(mc);
    model.use_quantum = cfg.integer("use_quantum") != 0;

    const ImageDataset train = mnist_to_tensors(train_set, 0, train_count);
    const ImageDataset test =
        mnist_to_tensors(test_set, 0, std::min(test_count, test_set.count));

    TrainConfig tc;
    tc.learning_rate = cfg.num("learning_rate");
    tc.momentum = cfg.num("momentum");
    tc.batch_size = static_cast<int>(cfg.integer("batch_size"));
    tc.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    SgdOptimizer opt(tc.learning_rate, tc.momentum);

    CsvLog log(dir / "train.csv", "epoch,loss,accuracy,wall_seconds");
    const std::string ckpt = (dir / "checkpoint.qfcn").string();
    save_checkpoint(classifier_params(model), ckpt);

    const int epochs = static_cast<int>(cfg.integer("epochs"));
    const double t0 = now_seconds();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const EpochMetrics m = train_epoch_classifier(model, train, tc, opt,
                                                      epoch);
        if (!std::isfinite(m.loss)) {
            std::fprintf(stderr,
                         "epoch %d: loss is not finite; aborting with the "
                         "last good checkpoint at %s\n",
                         epoch, ckpt.c_str());
            return 1;
        }
        log.row({static_cast<double>(epoch), m.loss, m.accuracy,
                 now_seconds() - t0});
        save_checkpoint(classifier_params(model), ckpt);
        std::printf("epoch %d  loss %.4f  accuracy %.4f\n", epoch, m.loss,
                    m.accuracy);
    }

    const EpochMetrics final = evaluate_classifier(model, test);
    std::printf("final: test loss %.4f  test accuracy %.4f  (%d epochs, "
                "%.1fs, checkpoint %s)\n",
                final.loss, final.accuracy, epochs, now_seconds() - t0,
                ckpt.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train-ts
// ---------------------------------------------------------------------------

RunConfig ts_defaults() {
    RunConfig cfg;
    cfg.set_default("epochs", "150");
    cfg.set_default("learning_rate", "0.003");
    cfg.set_default("lr_decay", "0.99");
    cfg.set_default("momentum", "0.9");
    cfg.set_default("batch_size", "32");
    cfg.set_default("seed", "9");
    cfg.set_default("model_seed", "21");
    cfg.set_default("eps", "0");
    cfg.set_default("nodes", "20");
    cfg.set_default("steps", "2000");
    cfg.set_default("data_seed", "77");
    cfg.set_default("series_csv", "");
    cfg.set_default("adjacency_csv", "");
    cfg.set_default("output_dir", "runs/ts");
    return cfg;
}

int cmd_train_ts(RunConfig &cfg) {
    const std::filesystem::path dir = resolve_output_dir(cfg);
    echo_effective_config(cfg, dir);

    SeriesDataset ds;
    const std::string series_csv = cfg.str("series_csv");
    if (!series_csv.empty()) {
        ds.values = load_series_csv(series_csv);
        ds.adjacency = load_adjacency_csv(cfg.str("adjacency_csv"));
        check(!ds.values.empty() && ds.values[0].size() == ds.adjacency.size(),
              "series and adjacency disagree on the node count");
        ds.train_steps = ds.steps() * 8 / 10;
    } else {
        ds = synth_st_dataset(
            static_cast<std::size_t>(cfg.integer("nodes")),
            static_cast<std::size_t>(cfg.integer("steps")),
            static_cast<std::uint64_t>(cfg.integer("data_seed")));
        save_series_csv(ds.values, (dir / "series.csv").string());
        save_adjacency_csv(ds.adjacency, (dir / "adjacency.csv").string());
    }

    ForecasterConfig fc;
    fc.eps = cfg.num("eps");
    fc.seed = static_cast<std::uint64_t>(cfg.integer("model_seed"));
    QfTemporalForecaster model = build_qf_forecaster(fc, ds.adjacency);

    const auto train = make_forecast_samples(ds, fc.window, 0, ds.train_steps);
    const auto test = make_forecast_samples(
        ds, fc.window, ds.train_steps - fc.window, ds.steps());

    const double untrained = evaluate_forecaster(model, test).mae;
    const double persistence = persistence_mae(ds, ds.train_steps, ds.steps());

    TrainConfig tc;
    tc.learning_rate = cfg.num("learning_rate");
    tc.momentum = cfg.num("momentum");
    tc.batch_size = static_cast<int>(cfg.integer("batch_size"));
    tc.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    const double decay = cfg.num("lr_decay");
    SgdOptimizer opt(tc.learning_rate, tc.momentum);

    CsvLog log(dir / "train.csv", "epoch,mae,mse,wall_seconds");
    const std::string ckpt = (dir / "checkpoint.qfcn").string();
    save_checkpoint(forecaster_params(model), ckpt);

    const int epochs = static_cast<int>(cfg.integer("epochs"));
    const double t0 = now_seconds();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        opt.set_learning_rate(tc.learning_rate * std::pow(decay, epoch));
        const EpochMetrics m =
            train_epoch_forecaster(model, train, tc, opt, epoch);
        if (!std::isfinite(m.mse)) {
            std::fprintf(stderr,
                         "epoch %d: loss is not finite; aborting with the "
                         "last good checkpoint at %s\n",
                         epoch, ckpt.c_str());
            return 1;
        }
        log.row({static_cast<double>(epoch), m.mae, m.mse,
                 now_seconds() - t0});
        save_checkpoint(forecaster_params(model), ckpt);
        if (epoch % 10 == 0 || epoch == epochs - 1) {
            std::printf("epoch %d  mae %.4f  mse %.5f\n", epoch, m.mae, m.mse);
        }
    }

    const EpochMetrics final = evaluate_forecaster(model, test);
    std::printf("final: validation mae %.4f  mse %.5f  (untrained mae %.4f, "
                "persistence mae %.4f, %d epochs, %.1fs, checkpoint %s)\n",
                final.mae, final.mse, untrained, persistence, epochs,
                now_seconds() - t0, ckpt.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// bench-conv
// ---------------------------------------------------------------------------

int cmd_bench_conv(const std::string &scale) {
    const bool paper = (scale == "paper");
    const int hw = paper ? 1024 : 16;
    const int cin = paper ? 3 : 1;
    const int cout = paper ? 2 : 1;
    const int ks = paper ? 5 : 3;

    CounterRng rng(0xbe, 0x636e);
    Tensor3 x(hw, hw, cin);
    for (double &v : x.data) {
        v = rng.uniform(-1.0, 1.0);
    }
    Kernel4 k(ks, ks, cin, cout);
    for (double &v : k.data) {
        v = rng.uniform(-1.0, 1.0);
    }

    volatile double sink = 0.0;
    auto median_time = [&](auto &&fn) {
        fn(); // warm run
        std::vector<double> times;
        for (int rep = 0; rep < 5; ++rep) {
            const double t0 = now_seconds();
            const Tensor3 out = fn();
            times.push_back(now_seconds() - t0);
            sink = sink + out.data[0];
        }
        std::sort(times.begin(), times.end());
        return times[times.size() / 2];
    };

    // Circular mode keeps the transforms at the signal's own power-of-two
    // extent, so the timing contrasts the algorithms rather than the padding.
    const double t_fft =
        median_time([&] { return fft_conv_2d(x, k, ConvMode::Circular); });
    const double t_direct =
        median_time([&] { return direct_conv_2d(x, k, ConvMode::Circular); });

    std::printf("scale=%s kernel %dx%dx%dx%d signal %dx%dx%d\n", scale.c_str(),
                cout, cin, ks, ks, cin, hw, hw);
    std::printf("median over 5 warm reps: fft %.3f ms, direct %.3f ms, "
                "ratio %.3f%s\n",
                1e3 * t_fft, 1e3 * t_direct, t_fft / t_direct,
                paper ? "" : " (tiny scale: overhead regime, report only)");
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum Fourier convolution toolkit"};
    app.require_subcommand(1);

    std::string suite;
    CLI::App *verify = app.add_subcommand(
        "verify", "Check the quantum paths against classical oracles");
    verify->add_option("--suite", suite,
                       "Run one suite: qft, mmap, conv, grad, prob");

    std::string mnist_config;
    std::vector<std::string> mnist_overrides;
    CLI::App *train_mnist = app.add_subcommand(
        "train-mnist", "Train the image classifier at desk scale");
    train_mnist->add_option("--config", mnist_config, "Config file")
        ->check(CLI::ExistingFile);
    train_mnist->add_option("overrides", mnist_overrides,
                            "key=value config overrides");

    std::string ts_config;
    std::vector<std::string> ts_overrides;
    CLI::App *train_ts = app.add_subcommand(
        "train-ts", "Train the spatio-temporal forecaster");
    train_ts->add_option("--config", ts_config, "Config file")
        ->check(CLI::ExistingFile);
    train_ts->add_option("overrides", ts_overrides,
                         "key=value config overrides");

    std::string scale = "paper";
    CLI::App *bench = app.add_subcommand(
        "bench-conv", "Time FFT-based vs direct 2-D convolution");
    bench->add_option("--scale", scale, "paper or tiny")
        ->check(CLI::IsMember({"paper", "tiny"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) {
            return cmd_verify(suite);
        }
        if (train_mnist->parsed()) {
            RunConfig cfg = mnist_defaults();
            try {
                if (!mnist_config.empty()) {
                    cfg.load_file(mnist_config);
                }
                for (const std::string &ov : mnist_overrides) {
                    cfg.apply_override(ov);
                }
            } catch (const SimError &e) {
                std::fprintf(stderr, "configuration error: %s\n", e.what());
                return 2;
            }
            return cmd_train_mnist(cfg);
        }
        if (train_ts->parsed()) {
            RunConfig cfg = ts_defaults();
            try {
                if (!ts_config.empty()) {
                    cfg.load_file(ts_config);
                }
                for (const std::string &ov : ts_overrides) {
                    cfg.apply_override(ov);
                }
            } catch (const SimError &e) {
                std::fprintf(stderr, "configuration error: %s\n", e.what());
                return 2;
            }
            return cmd_train_ts(cfg);
        }
        return cmd_bench_conv(scale);
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
