// Copyright 2026 The evqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Experiment runner: depth, ensemble-size, noise and phase-diagram sweeps
 * written as CSV tables, each with a key=value config echo that reproduces
 * it bit for bit.
 *
 * Sweep cells run on a small thread pool; a single collector writes the
 * files in cell order, so the output does not depend on the thread count.
 */
#pragma once

#include "evqc/data.hpp"
#include "evqc/ensemble.hpp"
#include "evqc/zne.hpp"

#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace evqc {

enum class Task { Digits, Spt };
enum class Mode { Single, Bagging, AdaBoost };

inline std::string to_string(Task t) { return t == Task::Digits ? "digits" : "spt"; }

inline std::string to_string(Mode m) {
    switch (m) {
        case Mode::Single: return "single";
        case Mode::Bagging: return "bagging";
        case Mode::AdaBoost: return "adaboost";
    }
    return "?";
}

inline Task parse_task(const std::string& s) {
    if (s == "digits") return Task::Digits;
    if (s == "spt") return Task::Spt;
    throw ConfigError("unknown task '" + s + "' (digits, spt)");
}

inline Mode parse_mode(const std::string& s) {
    if (s == "single") return Mode::Single;
    if (s == "bagging") return Mode::Bagging;
    if (s == "adaboost") return Mode::AdaBoost;
    throw ConfigError("unknown mode '" + s + "' (single, bagging, adaboost)");
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct ExperimentConfig {
    std::string command;  // subcommand that produced the echo; informational
    Task task = Task::Digits;
    Mode mode = Mode::AdaBoost;
    int depth = 2;                                      // members of single/phase runs
    std::vector<int> depths{1, 2, 3, 4, 5, 6, 8, 10, 12};  // depth sweep
    std::vector<int> ensemble_depths{2, 3};
    std::vector<Mode> ensemble_modes{Mode::Bagging, Mode::AdaBoost};
    int members = 10;
    int num_classes = 0;  // 0 = from task
    double noise = 0.0;
    std::vector<double> noise_grid{0.0, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18};
    bool zne = false;
    bool zne_trace = false;
    bool train_noise_free = false;
    bool loss_trace = false;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    int iterations = 500;        // shallow members
    int deep_depth = 12;
    int deep_iterations = 1500;  // depth sweep and deep noise scenarios
    int spt_iterations = 1000;
    double learning_rate = 5e-3;
    Combination combination = Combination::WeightedProbability;  // adaboost vote
    std::string output_dir = "evqc_out";
    std::string train_path = "data/optdigits.tra";
    std::string test_path = "data/optdigits.tes";
    int train_limit = 0;  // 0 = whole training split
    std::uint64_t subset_seed = 0;
    int spt_qubits = 9;
    double spt_j = 1.0;
    double h1_min = -1.6, h1_max = 1.6, h2_min = 0.0, h2_max = 1.6;
    int spt_samples = 400;
    std::uint64_t spt_seed = 0;
    double spt_threshold = 0.1;
    int resolution = 64;
    int threads = 1;

    [[nodiscard]] int classes() const {
        if (num_classes != 0) return num_classes;
        return task == Task::Digits ? 4 : 2;
    }

    void validate() const {
        auto need = [](bool ok, const std::string& what) {
            if (!ok) throw ConfigError("config: " + what);
        };
        need(depth >= 0 && deep_depth >= 0, "depths must be >= 0");
        need(!depths.empty(), "depths must not be empty");
        for (int d : depths) need(d >= 0, "depths must be >= 0");
        need(!ensemble_depths.empty(), "ensemble_depths must not be empty");
        for (int d : ensemble_depths) need(d >= 0, "ensemble_depths must be >= 0");
        need(!ensemble_modes.empty(), "ensemble_modes must not be empty");
        for (Mode m : ensemble_modes) need(m != Mode::Single, "ensemble_modes takes bagging and adaboost only");
        need(members >= 1, "members must be >= 1");
        need(classes() == (task == Task::Digits ? 4 : 2),
             "num_classes must be 4 for digits and 2 for spt");
        need(noise >= 0.0 && noise <= 1.0, "noise must lie in [0, 1]");
        need(!noise_grid.empty(), "noise_grid must not be empty");
        for (double p : noise_grid) need(p >= 0.0 && p <= 1.0, "noise_grid values must lie in [0, 1]");
        need(!zne || noise > 0.0, "zne requires noise > 0");
        need(!seeds.empty(), "seeds must not be empty");
        need(iterations >= 0 && deep_iterations >= 0 && spt_iterations >= 0, "iterations must be >= 0");
        need(learning_rate > 0.0, "learning_rate must be > 0");
        need(!output_dir.empty(), "output_dir must not be empty");
        need(train_limit >= 0, "train_limit must be >= 0");
        need(resolution >= 2, "resolution must be >= 2");
        need(threads >= 1, "threads must be >= 1");
        spt().validate();
    }

    [[nodiscard]] SptConfig spt() const {
        SptConfig c;
        c.num_qubits = spt_qubits;
        c.coupling_j = spt_j;
        c.h1_min = h1_min;
        c.h1_max = h1_max;
        c.h2_min = h2_min;
        c.h2_max = h2_max;
        c.num_samples = spt_samples;
        c.seed = spt_seed;
        c.threshold = spt_threshold;
        return c;
    }

    [[nodiscard]] TrainConfig train_config(int iters, std::uint64_t seed) const {
        TrainConfig t;
        t.iterations = iters;
        t.learning_rate = learning_rate;
        t.seed = seed;
        return t;
    }
};

namespace detail {

template <class T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + f(xs[i]);
    return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
    }
    return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
    }
    return x;
}

inline double parse_real(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x)) {
        throw ConfigError("config: " + key + " expects a real number, got '" + v + "'");
    }
    return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: " + key + " expects true or false, got '" + v + "'");
}

inline int to_int(const std::string& key, long long x) {
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ConfigError("config: " + key + " out of range");
    }
    return static_cast<int>(x);
}

}  // namespace detail

/// One `key=value` line per field, in a fixed order.
inline std::string to_key_values(const ExperimentConfig& c) {
    using detail::join;
    std::ostringstream os;
    auto line = [&](const std::string& k, const std::string& v) { os << k << "=" << v << "\n"; };
    const std::function<std::string(const int&)> i2s = [](const int& x) { return std::to_string(x); };
    const std::function<std::string(const double&)> d2s = [](const double& x) { return format_double(x); };
    const std::function<std::string(const Mode&)> m2s = [](const Mode& m) { return to_string(m); };
    const std::function<std::string(const std::uint64_t&)> u2s = [](const std::uint64_t& x) {
        return std::to_string(x);
    };
    auto b2s = [](bool b) { return std::string(b ? "true" : "false"); };
    if (!c.command.empty()) line("command", c.command);
    line("task", to_string(c.task));
    line("mode", to_string(c.mode));
    line("depth", std::to_string(c.depth));
    line("depths", join(c.depths, i2s));
    line("ensemble_depths", join(c.ensemble_depths, i2s));
    line("ensemble_modes", join(c.ensemble_modes, m2s));
    line("members", std::to_string(c.members));
    line("num_classes", std::to_string(c.num_classes));
    line("noise", format_double(c.noise));
    line("noise_grid", join(c.noise_grid, d2s));
    line("zne", b2s(c.zne));
    line("zne_trace", b2s(c.zne_trace));
    line("train_noise_free", b2s(c.train_noise_free));
    line("loss_trace", b2s(c.loss_trace));
    line("seeds", join(c.seeds, u2s));
    line("iterations", std::to_string(c.iterations));
    line("deep_depth", std::to_string(c.deep_depth));
    line("deep_iterations", std::to_string(c.deep_iterations));
    line("spt_iterations", std::to_string(c.spt_iterations));
    line("learning_rate", format_double(c.learning_rate));
    line("combination", to_string(c.combination));
    line("output_dir", c.output_dir);
    line("train_path", c.train_path);
    line("test_path", c.test_path);
    line("train_limit", std::to_string(c.train_limit));
    line("subset_seed", std::to_string(c.subset_seed));
    line("spt_qubits", std::to_string(c.spt_qubits));
    line("spt_j", format_double(c.spt_j));
    line("h1_min", format_double(c.h1_min));
    line("h1_max", format_double(c.h1_max));
    line("h2_min", format_double(c.h2_min));
    line("h2_max", format_double(c.h2_max));
    line("spt_samples", std::to_string(c.spt_samples));
    line("spt_seed", std::to_string(c.spt_seed));
    line("spt_threshold", format_double(c.spt_threshold));
    line("resolution", std::to_string(c.resolution));
    line("threads", std::to_string(c.threads));
    return os.str();
}

/// Applies one key=value pair. Unknown keys are errors.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
    using namespace detail;
    auto ints = [&] {
        std::vector<int> out;
        for (const auto& t : split_list(v)) out.push_back(to_int(key, parse_int(key, t)));
        return out;
    };
    if (key == "command") c.command = v;
    else if (key == "task") c.task = parse_task(v);
    else if (key == "mode") c.mode = parse_mode(v);
    else if (key == "depth") c.depth = to_int(key, parse_int(key, v));
    else if (key == "depths") c.depths = ints();
    else if (key == "ensemble_depths") c.ensemble_depths = ints();
    else if (key == "ensemble_modes") {
        c.ensemble_modes.clear();
        for (const auto& t : split_list(v)) c.ensemble_modes.push_back(parse_mode(t));
    } else if (key == "members") c.members = to_int(key, parse_int(key, v));
    else if (key == "num_classes") c.num_classes = to_int(key, parse_int(key, v));
    else if (key == "noise") c.noise = parse_real(key, v);
    else if (key == "noise_grid") {
        c.noise_grid.clear();
        for (const auto& t : split_list(v)) c.noise_grid.push_back(parse_real(key, t));
    } else if (key == "zne") c.zne = parse_bool(key, v);
    else if (key == "zne_trace") c.zne_trace = parse_bool(key, v);
    else if (key == "train_noise_free") c.train_noise_free = parse_bool(key, v);
    else if (key == "loss_trace") c.loss_trace = parse_bool(key, v);
    else if (key == "seeds") {
        c.seeds.clear();
        for (const auto& t : split_list(v)) c.seeds.push_back(parse_u64(key, t));
    } else if (key == "iterations") c.iterations = to_int(key, parse_int(key, v));
    else if (key == "deep_depth") c.deep_depth = to_int(key, parse_int(key, v));
    else if (key == "deep_iterations") c.deep_iterations = to_int(key, parse_int(key, v));
    else if (key == "spt_iterations") c.spt_iterations = to_int(key, parse_int(key, v));
    else if (key == "learning_rate") c.learning_rate = parse_real(key, v);
    else if (key == "combination") c.combination = parse_combination(v);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "train_path") c.train_path = v;
    else if (key == "test_path") c.test_path = v;
    else if (key == "train_limit") c.train_limit = to_int(key, parse_int(key, v));
    else if (key == "subset_seed") c.subset_seed = parse_u64(key, v);
    else if (key == "spt_qubits") c.spt_qubits = to_int(key, parse_int(key, v));
    else if (key == "spt_j") c.spt_j = parse_real(key, v);
    else if (key == "h1_min") c.h1_min = parse_real(key, v);
    else if (key == "h1_max") c.h1_max = parse_real(key, v);
    else if (key == "h2_min") c.h2_min = parse_real(key, v);
    else if (key == "h2_max") c.h2_max = parse_real(key, v);
    else if (key == "spt_samples") c.spt_samples = to_int(key, parse_int(key, v));
    else if (key == "spt_seed") c.spt_seed = parse_u64(key, v);
    else if (key == "spt_threshold") c.spt_threshold = parse_real(key, v);
    else if (key == "resolution") c.resolution = to_int(key, parse_int(key, v));
    else if (key == "threads") c.threads = to_int(key, parse_int(key, v));
    else throw ConfigError("config: unknown key '" + key + "'");
}

/// Reads key=value lines on top of `base`; blank lines and `#` comments are
/// skipped.
inline ExperimentConfig parse_key_values(std::istream& is, ExperimentConfig base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return parse_key_values(is, std::move(base));
}

// ---------------------------------------------------------------------------
// Aggregation and tables

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1); 0 for one value
    std::size_t count = 0;
};

inline Summary summarize(std::span<const double> xs) {
    Summary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& os) const {
        auto emit = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        };
        emit(header);
        for (const auto& r : rows) emit(r);
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot write " + path.string());
        write(os);
    }
};

/// Runs every cell on `threads` workers and returns results in cell order.
template <class R>
std::vector<R> run_cells(const std::vector<std::function<R()>>& cells, int threads) {
    std::vector<std::optional<R>> out(cells.size());
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                out[i] = cells[i]();
            } catch (...) {
                const std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = cells.size();
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<R> result;
    result.reserve(cells.size());
    for (auto& r : out) result.push_back(std::move(*r));
    return result;
}

/// Seed of member `l` in the ensemble started from experiment seed `seed`.
inline std::uint64_t member_seed(std::uint64_t seed, int l) { return seed * 1000 + static_cast<std::uint64_t>(l); }

inline std::vector<std::uint64_t> member_seeds(std::uint64_t seed, int count) {
    std::vector<std::uint64_t> out;
    for (int l = 0; l < count; ++l) out.push_back(member_seed(seed, l));
    return out;
}

struct DigitsData {
    Dataset train;
    Dataset test;
};

/// Encoded digits splits; `train_limit` keeps a seeded random subset of the
/// training split.
inline DigitsData load_digits_data(const ExperimentConfig& cfg) {
    auto [train_raw, test_raw] = load_digits(cfg.train_path, cfg.test_path);
    DigitsData d{encode(train_raw), encode(test_raw)};
    if (cfg.train_limit > 0 && static_cast<std::size_t>(cfg.train_limit) < d.train.size()) {
        std::vector<std::size_t> idx(d.train.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 rng(cfg.subset_seed);
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(static_cast<std::size_t>(cfg.train_limit));
        std::sort(idx.begin(), idx.end());
        Dataset subset;
        for (std::size_t i : idx) subset.push_back(d.train[i]);
        d.train = std::move(subset);
    }
    if (d.train.empty() || d.test.empty()) throw ConfigError("digits: empty split");
    return d;
}

inline void write_config_echo(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream os(std::filesystem::path(cfg.output_dir) / (name + ".config"));
    if (!os) throw ConfigError("cannot write config echo in " + cfg.output_dir);
    os << to_key_values(cfg);
}

namespace detail {

inline std::string seed_path(const ExperimentConfig& cfg, const std::string& stem) {
    return (std::filesystem::path(cfg.output_dir) / (stem + ".csv")).string();
}

inline void maybe_write_trace(const ExperimentConfig& cfg, const std::string& stem,
                              const std::vector<TraceRow>& trace) {
    if (!cfg.loss_trace) return;
    std::ofstream os(seed_path(cfg, stem));
    if (!os) throw ConfigError("cannot write loss trace " + stem);
    write_loss_trace(os, trace);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Depth sweep

struct DepthRecord {
    int depth = 0;
    std::uint64_t seed = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

/// Columns: D_l, seed, train_acc, test_acc; every depth is followed by a
/// `mean` and a `std` row in the seed column.
inline CsvTable depth_sweep_table(const std::vector<DepthRecord>& records) {
    CsvTable t{{"D_l", "seed", "train_acc", "test_acc"}, {}};
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::vector<int> order;
    for (const auto& r : records) {
        t.rows.push_back({std::to_string(r.depth), std::to_string(r.seed), format_double(r.train_accuracy),
                          format_double(r.test_accuracy)});
        if (!groups.count(r.depth)) order.push_back(r.depth);
        groups[r.depth].first.push_back(r.train_accuracy);
        groups[r.depth].second.push_back(r.test_accuracy);
    }
    for (int d : order) {
        const Summary tr = summarize(groups[d].first), te = summarize(groups[d].second);
        t.rows.push_back({std::to_string(d), "mean", format_double(tr.mean), format_double(te.mean)});
        t.rows.push_back({std::to_string(d), "std", format_double(tr.stddev), format_double(te.stddev)});
    }
    return t;
}

/// Single classifiers over `depths` x `seeds` (`deep_iterations` each).
/// With `zne` the test accuracy is measured on mitigated probabilities.
inline std::vector<DepthRecord> run_depth_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.task != Task::Digits) throw ConfigError("depth-sweep runs on the digits task");
    const DigitsData data = load_digits_data(cfg);
    const NoiseModel noise{cfg.noise, 1};
    const NoiseModel fit_noise = cfg.train_noise_free ? NoiseModel{} : noise;
    std::vector<std::function<DepthRecord()>> cells;
    for (int depth : cfg.depths) {
        for (std::uint64_t seed : cfg.seeds) {
            cells.emplace_back([&, depth, seed] {
                std::vector<TraceRow> trace;
                const auto clf = train(make_classifier(6, depth, 4, seed), data.train,
                                       SampleWeights::uniform(data.train.size()), fit_noise,
                                       cfg.train_config(cfg.deep_iterations, seed),
                                       cfg.loss_trace ? &trace : nullptr);
                detail::maybe_write_trace(cfg, "loss_D" + std::to_string(depth) + "_seed" + std::to_string(seed),
                                          trace);
                DepthRecord r{depth, seed, accuracy(predict_all(clf, data.train, noise), data.train), 0.0};
                r.test_accuracy = cfg.zne ? accuracy(predict_mitigated(zne_probabilities(clf, data.test, noise)),
                                                     data.test)
                                          : accuracy(predict_all(clf, data.test, noise), data.test);
                return r;
            });
        }
    }
    write_config_echo(cfg, "depth_sweep");
    auto records = run_cells(cells, cfg.threads);
    depth_sweep_table(records).write(std::filesystem::path(cfg.output_dir) / "depth_sweep.csv");
    return records;
}

// ---------------------------------------------------------------------------
// Ensemble-size sweep

struct EnsembleRecord {
    Mode mode = Mode::Bagging;
    int depth = 0;
    int members = 0;
    std::uint64_t seed = 0;
    double test_accuracy = 0.0;
    std::optional<StageRecord> stage;  // adaboost only; absent past an early stop
};

/// Columns: mode, D_l, L_c, seed, test_acc, then the boosting diagnostics
/// (e_l, alpha_l, gamma_l, Z_l, cumulative_bound, cumulative_train_error),
/// empty for bagging. Each (mode, D_l, L_c) group ends with `mean` and `std`
/// rows.
inline CsvTable ensemble_sweep_table(const std::vector<EnsembleRecord>& records) {
    CsvTable t{{"mode", "D_l", "L_c", "seed", "test_acc", "e_l", "alpha_l", "gamma_l", "Z_l", "cumulative_bound",
                "cumulative_train_error"},
               {}};
    using Key = std::tuple<int, int, int>;
    std::map<Key, std::vector<double>> groups;
    std::vector<Key> order;
    for (const auto& r : records) {
        std::vector<std::string> row{to_string(r.mode), std::to_string(r.depth), std::to_string(r.members),
                                     std::to_string(r.seed), format_double(r.test_accuracy)};
        if (r.stage) {
            for (double v : {r.stage->error, r.stage->alpha, r.stage->gamma, r.stage->normalizer,
                             r.stage->cumulative_bound, r.stage->cumulative_train_error}) {
                row.push_back(format_double(v));
            }
        } else {
            row.resize(t.header.size());
        }
        t.rows.push_back(std::move(row));
        const Key k{static_cast<int>(r.mode), r.depth, r.members};
        if (!groups.count(k)) order.push_back(k);
        groups[k].push_back(r.test_accuracy);
    }
    for (const auto& k : order) {
        const Summary s = summarize(groups[k]);
        const auto [m, d, l] = k;
        for (const auto& [label, v] : {std::pair{"mean", s.mean}, std::pair{"std", s.stddev}}) {
            std::vector<std::string> row{to_string(static_cast<Mode>(m)), std::to_string(d), std::to_string(l),
                                         label, format_double(v)};
            row.resize(t.header.size());
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

/// For each mode x D_l x seed one ensemble of `members` is trained and
/// evaluated on its first L_c = 1..members members.
inline std::vector<EnsembleRecord> run_ensemble_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.task != Task::Digits) throw ConfigError("ensemble-sweep runs on the digits task");
    const DigitsData data = load_digits_data(cfg);
    const NoiseModel noise{cfg.noise, 1};
    const EnsembleOptions opts{cfg.train_noise_free};
    std::vector<std::function<std::vector<EnsembleRecord>()>> cells;
    for (Mode mode : cfg.ensemble_modes) {
        for (int depth : cfg.ensemble_depths) {
            for (std::uint64_t seed : cfg.seeds) {
                cells.emplace_back([&, mode, depth, seed] {
                    const MemberSpec spec{6, depth, 4};
                    const auto seeds = member_seeds(seed, cfg.members);
                    const TrainConfig tc = cfg.train_config(cfg.iterations, seed);
                    EnsembleModel model;
                    BoostDiagnostics diag;
                    if (mode == Mode::Bagging) {
                        model = train_bagging(data.train, spec, noise, tc, seeds, false, opts);
                    } else {
                        auto res = train_adaboost(data.train, spec, noise, tc, seeds, cfg.combination, opts);
                        model = std::move(res.model);
                        diag = std::move(res.diagnostics);
                    }
                    const auto probs = member_probabilities(model, data.test, noise);
                    std::vector<EnsembleRecord> out;
                    for (int l = 1; l <= cfg.members; ++l) {
                        const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(l), model.size());
                        EnsembleRecord r{mode, depth, l, seed, 0.0, std::nullopt};
                        if (used > 0) {
                            r.test_accuracy = accuracy(
                                combine(probs, model.alphas, model.combination, 4, used), data.test);
                        }
                        if (mode == Mode::AdaBoost && static_cast<std::size_t>(l) <= diag.stages.size()) {
                            r.stage = diag.stages[static_cast<std::size_t>(l - 1)];
                        }
                        out.push_back(r);
                    }
                    return out;
                });
            }
        }
    }
    write_config_echo(cfg, "ensemble_sweep");
    std::vector<EnsembleRecord> records;
    for (auto& chunk : run_cells(cells, cfg.threads)) records.insert(records.end(), chunk.begin(), chunk.end());
    // group rows by (mode, D_l, L_c) then seed
    std::stable_sort(records.begin(), records.end(), [](const EnsembleRecord& a, const EnsembleRecord& b) {
        return std::tuple(static_cast<int>(a.mode), a.depth, a.members) <
               std::tuple(static_cast<int>(b.mode), b.depth, b.members);
    });
    ensemble_sweep_table(records).write(std::filesystem::path(cfg.output_dir) / "ensemble_sweep.csv");
    return records;
}

// ---------------------------------------------------------------------------
// Noise sweep

struct NoiseRecord {
    std::string scenario;  // deep, deep_zne, bagging_D<d>, adaboost_D<d>
    double noise = 0.0;
    std::uint64_t seed = 0;
    double test_accuracy = 0.0;
};

/// Columns: scenario, P, seed, test_acc; each (scenario, P) group ends with
/// `mean` and `std` rows.
inline CsvTable noise_sweep_table(const std::vector<NoiseRecord>& records) {
    CsvTable t{{"scenario", "P", "seed", "test_acc"}, {}};
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    std::vector<std::pair<std::string, double>> order;
    for (const auto& r : records) {
        t.rows.push_back({r.scenario, format_double(r.noise), std::to_string(r.seed), format_double(r.test_accuracy)});
        const auto k = std::pair{r.scenario, r.noise};
        if (!groups.count(k)) order.push_back(k);
        groups[k].push_back(r.test_accuracy);
    }
    for (const auto& k : order) {
        const Summary s = summarize(groups[k]);
        t.rows.push_back({k.first, format_double(k.second), "mean", format_double(s.mean)});
        t.rows.push_back({k.first, format_double(k.second), "std", format_double(s.stddev)});
    }
    return t;
}

/// Deep (`deep_depth`) classifier with and without zero-noise extrapolation,
/// plus every ensemble mode x depth with `members` members, over
/// `noise_grid` x `seeds`.
inline std::vector<NoiseRecord> run_noise_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.task != Task::Digits) throw ConfigError("noise-sweep runs on the digits task");
    const DigitsData data = load_digits_data(cfg);
    const EnsembleOptions opts{cfg.train_noise_free};
    std::vector<std::function<std::vector<NoiseRecord>()>> cells;
    for (double p : cfg.noise_grid) {
        for (std::uint64_t seed : cfg.seeds) {
            cells.emplace_back([&, p, seed] {
                const NoiseModel noise{p, 1};
                const auto clf = train(make_classifier(6, cfg.deep_depth, 4, seed), data.train,
                                       SampleWeights::uniform(data.train.size()),
                                       cfg.train_noise_free ? NoiseModel{} : noise,
                                       cfg.train_config(cfg.deep_iterations, seed));
                const double plain = accuracy(predict_all(clf, data.test, noise), data.test);
                const auto est = zne_probabilities(clf, data.test, noise);
                if (cfg.zne_trace) {
                    std::ofstream os(detail::seed_path(cfg, "zne_trace_P" + format_double(p) + "_seed" +
                                                                std::to_string(seed)));
                    if (!os) throw ConfigError("cannot write zne trace");
                    write_zne_trace(os, ZneSchedule{}, est);
                }
                return std::vector<NoiseRecord>{{"deep", p, seed, plain},
                                                {"deep_zne", p, seed, accuracy(predict_mitigated(est), data.test)}};
            });
            for (Mode mode : cfg.ensemble_modes) {
                for (int depth : cfg.ensemble_depths) {
                    cells.emplace_back([&, p, seed, mode, depth] {
                        const NoiseModel noise{p, 1};
                        const MemberSpec spec{6, depth, 4};
                        const auto seeds = member_seeds(seed, cfg.members);
                        const TrainConfig tc = cfg.train_config(cfg.iterations, seed);
                        const EnsembleModel model =
                            mode == Mode::Bagging
                                ? train_bagging(data.train, spec, noise, tc, seeds, false, opts)
                                : train_adaboost(data.train, spec, noise, tc, seeds, cfg.combination, opts).model;
                        const double acc =
                            model.size() == 0 ? 0.0 : accuracy(predict_ensemble(model, data.test, noise), data.test);
                        return std::vector<NoiseRecord>{
                            {to_string(mode) + "_D" + std::to_string(depth), p, seed, acc}};
                    });
                }
            }
        }
    }
    write_config_echo(cfg, "noise_sweep");
    std::vector<NoiseRecord> records;
    for (auto& chunk : run_cells(cells, cfg.threads)) records.insert(records.end(), chunk.begin(), chunk.end());
    std::stable_sort(records.begin(), records.end(), [](const NoiseRecord& a, const NoiseRecord& b) {
        return std::tie(a.scenario, a.noise) < std::tie(b.scenario, b.noise);
    });
    noise_sweep_table(records).write(std::filesystem::path(cfg.output_dir) / "noise_sweep.csv");
    return records;
}

// ---------------------------------------------------------------------------
// Phase diagram

struct PhasePoint {
    double h1_over_j = 0.0;
    double h2_over_j = 0.0;
    double p_spt = 0.0;  // ensemble SPT score averaged over seeds
    int predicted = 0;   // p_spt > 1/2
    double string_order = 0.0;
    int exact_label = 0;
};

struct PhaseDiagram {
    std::vector<PhasePoint> points;  // row-major: h2 outer, h1 inner
    double agreement = 0.0;          // fraction with predicted == exact_label
};

/// SPT score of one ensemble per sample: the alpha-weighted share of class 1
/// in whichever form the combination rule votes with.
inline std::vector<double> spt_scores(const EnsembleModel& model, const std::vector<ProbabilityTable>& probs) {
    const std::size_t m = probs.front().rows;
    std::vector<double> out(m, 0.0);
    double total = 0.0;
    for (std::size_t l = 0; l < model.size(); ++l) total += model.alphas[l];
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t l = 0; l < model.size(); ++l) {
            const auto row = probs[l].row(i);
            const double vote = model.combination == Combination::WeightedProbability
                                    ? row[1]
                                    : (argmax_class(row) == 1 ? 1.0 : 0.0);
            acc += (model.combination == Combination::HardVote ? 1.0 : model.alphas[l]) * vote;
        }
        out[i] = acc / (model.combination == Combination::HardVote ? static_cast<double>(model.size()) : total);
    }
    return out;
}

inline std::vector<double> grid_axis(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    out.back() = hi;
    return out;
}

/// h2/J where the exact string order on the h1 = `h1_over_j` line drops
/// through the threshold, by bisection on [lo, hi].
inline double string_order_crossing(const SptConfig& spt, double h1_over_j, double lo, double hi,
                                    double tol = 1e-6) {
    auto above = [&](double h2) {
        return std::abs(solve_spt_point(spt, h1_over_j, h2).string_order) > spt.threshold;
    };
    if (!above(lo) || above(hi)) throw NumericalError("string order does not cross the threshold in range");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline EnsembleModel train_phase_ensemble(const ExperimentConfig& cfg, const Dataset& train_set,
                                          std::uint64_t seed) {
    const NoiseModel noise{cfg.noise, 1};
    const MemberSpec spec{cfg.spt_qubits, cfg.depth, 2};
    const TrainConfig tc = cfg.train_config(cfg.spt_iterations, seed);
    const EnsembleOptions opts{cfg.train_noise_free};
    switch (cfg.mode) {
        case Mode::Single: return train_bagging(train_set, spec, noise, tc, member_seeds(seed, 1), false, opts);
        case Mode::Bagging:
            return train_bagging(train_set, spec, noise, tc, member_seeds(seed, cfg.members), false, opts);
        case Mode::AdaBoost:
            return train_adaboost(train_set, spec, noise, tc, member_seeds(seed, cfg.members), cfg.combination,
                                  opts)
                .model;
    }
    throw ConfigError("unknown mode");
}

/// Member probabilities for every sample, zero-noise extrapolated with `zne`.
inline std::vector<ProbabilityTable> evaluate_members(const ExperimentConfig& cfg, const EnsembleModel& model,
                                                      const Dataset& data) {
    const NoiseModel noise{cfg.noise, 1};
    if (!cfg.zne) return member_probabilities(model, data, noise);
    std::vector<ProbabilityTable> out;
    for (const auto& clf : model.members) {
        const auto est = zne_probabilities(clf, data, noise);
        ProbabilityTable t(data.size(), static_cast<std::size_t>(model.num_classes));
        for (std::size_t i = 0; i < data.size(); ++i) {
            for (std::size_t k = 0; k < t.cols; ++k) t(i, k) = est[i].probabilities[k];
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline CsvTable phase_table(const PhaseDiagram& pd) {
    CsvTable t{{"h1_over_J", "h2_over_J", "p_SPT", "predicted_label", "exact_string_order", "exact_label"}, {}};
    for (const auto& p : pd.points) {
        t.rows.push_back({format_double(p.h1_over_j), format_double(p.h2_over_j), format_double(p.p_spt),
                          std::to_string(p.predicted), format_double(p.string_order), std::to_string(p.exact_label)});
    }
    return t;
}

/// Trains on `spt_samples` generated ground states and scores the
/// `resolution` x `resolution` grid against exact-diagonalization labels.
inline PhaseDiagram run_phase_diagram(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.task != Task::Spt) throw ConfigError("phase-diagram runs on the spt task");
    const SptConfig spt = cfg.spt();
    write_config_echo(cfg, "phase_diagram");
    const auto samples = generate_spt_dataset(spt);
    const auto dir = std::filesystem::path(cfg.output_dir);
    write_spt_dataset((dir / "spt_train.csv").string(), (dir / "spt_train.bin").string(), spt, samples);
    const Dataset train_set = to_dataset(samples);

    const auto h1s = grid_axis(cfg.h1_min, cfg.h1_max, cfg.resolution);
    const auto h2s = grid_axis(cfg.h2_min, cfg.h2_max, cfg.resolution);
    std::vector<std::function<std::vector<SptSample>()>> rows;
    for (double h2 : h2s) {
        rows.emplace_back([&, h2] {
            std::vector<SptSample> row;
            for (double h1 : h1s) row.push_back(solve_spt_point(spt, h1, h2));
            return row;
        });
    }
    std::vector<SptSample> grid;
    for (auto& r : run_cells(rows, cfg.threads)) {
        for (auto& s : r) grid.push_back(std::move(s));
    }
    const Dataset grid_set = to_dataset(grid);

    std::vector<std::function<std::vector<double>()>> cells;
    for (std::uint64_t seed : cfg.seeds) {
        cells.emplace_back([&, seed] {
            const EnsembleModel model = train_phase_ensemble(cfg, train_set, seed);
            if (model.size() == 0) return std::vector<double>(grid.size(), 0.0);
            return spt_scores(model, evaluate_members(cfg, model, grid_set));
        });
    }
    const auto scores = run_cells(cells, cfg.threads);
    PhaseDiagram pd;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        PhasePoint p{grid[i].h1_over_j, grid[i].h2_over_j, 0.0, 0, grid[i].string_order, grid[i].label};
        for (const auto& s : scores) p.p_spt += s[i];
        p.p_spt /= static_cast<double>(scores.size());
        p.predicted = p.p_spt > 0.5 ? 1 : 0;
        agree += p.predicted == p.exact_label ? 1 : 0;
        pd.points.push_back(p);
    }
    pd.agreement = static_cast<double>(agree) / static_cast<double>(grid.size());
    phase_table(pd).write(dir / "phase_diagram.csv");
    return pd;
}

// ---------------------------------------------------------------------------
// Verification

struct VerifyCheck {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string status;  // pass, fail, info
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;

    [[nodiscard]] bool ok() const {
        return std::none_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.status == "fail"; });
    }
};

inline CsvTable verify_table(const VerifyReport& r) {
    CsvTable t{{"check", "value", "tolerance", "status"}, {}};
    for (const auto& c : r.checks) t.rows.push_back({c.name, format_double(c.value), format_double(c.tolerance), c.status});
    return t;
}

/// Gradient routes against the shift rule, zero-noise extrapolation of a
/// cubic, and the boosting bounds on a digits AdaBoost run (the training
/// split is cut to 200 samples unless `train_limit` is set).
inline VerifyReport run_verify(const ExperimentConfig& cfg) {
    cfg.validate();
    write_config_echo(cfg, "verify");
    VerifyReport rep;
    auto add = [&](std::string name, double value, double tol, bool pass) {
        rep.checks.push_back({std::move(name), value, tol, pass ? "pass" : "fail"});
    };

    std::mt19937_64 rng(cfg.seeds.front());
    for (double p : {0.0, 0.1, 0.2}) {
        const WeakClassifier clf = make_classifier(3, 2, 2, rng());
        Dataset data;
        for (int i = 0; i < 6; ++i) {
            std::vector<double> x(8);
            for (double& v : x) v = uniform01(rng) - 0.5;
            data.push_back({amplitude_encode(x), i % 2});
        }
        const auto w = SampleWeights::uniform(data.size());
        const NoiseModel noise{p, 1};
        const auto shift = parameter_shift_gradient(clf, data, w, noise);
        double scale = 0.0;
        for (double g : shift) scale = std::max(scale, std::abs(g));
        for (GradientMethod m : {GradientMethod::StatevectorAdjoint, GradientMethod::OperatorAdjoint}) {
            if (m == GradientMethod::StatevectorAdjoint && p > 0.0) continue;
            const auto g = gradient(clf, data, w, noise, 1e-12, m);
            double diff = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) diff = std::max(diff, std::abs(g[i] - shift[i]));
            const double rel = diff / std::max(scale, 1e-300);
            add(std::string(m == GradientMethod::StatevectorAdjoint ? "gradient_statevector" : "gradient_operator") +
                    "_P" + format_double(p),
                rel, 1e-6, rel < 1e-6);
        }
    }

    {
        const std::vector<double> xs{1, 3, 5, 7};
        std::vector<double> ys;
        for (double c : xs) ys.push_back(0.5 + 0.1 * c - 0.02 * c * c + 0.001 * c * c * c);
        const double err = std::abs(extrapolate_to_zero(xs, ys) - 0.5);
        add("zne_cubic", err, 1e-10, err <= 1e-10);
    }

    ExperimentConfig dcfg = cfg;
    if (dcfg.train_limit == 0) dcfg.train_limit = 200;
    const DigitsData data = load_digits_data(dcfg);
    const auto res = train_adaboost(data.train, {6, cfg.depth, 4}, NoiseModel{cfg.noise, 1},
                                    cfg.train_config(cfg.iterations, cfg.seeds.front()),
                                    member_seeds(cfg.seeds.front(), cfg.members), cfg.combination);
    double closed = 0.0;
    for (const auto& s : res.diagnostics.stages) {
        if (s.error > kErrorClamp) closed = std::max(closed, std::abs(s.normalizer - s.normalizer_closed_form));
    }
    add("normalizer_closed_form", closed, 1e-10, closed <= 1e-10);
    const BoundReport b = verify_bounds(res.diagnostics);
    if (!b.applicable) {
        rep.checks.push_back({"bounds_applicable", 0.0, 0.0, "info"});
    } else {
        const double bound = res.diagnostics.stages.back().cumulative_bound;
        add("normalizer_bound", b.normalizer_bound ? 1.0 : 0.0, 1e-10, b.normalizer_bound);
        add("exponential_train_error_bound", res.diagnostics.exponential_bound() - res.diagnostics.final_train_error, 1e-10,
            b.exp_bound);
        // the product bound only holds for two classes
        rep.checks.push_back({"product_bound", bound - res.diagnostics.final_train_error, 1e-10,
                              b.product_bound ? "pass" : "info"});
    }
    verify_table(rep).write(std::filesystem::path(cfg.output_dir) / "verify.csv");
    return rep;
}

}  // namespace evqc
