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

// Acceptance gate. Runs criteria 1-11 and prints one PASS/FAIL line each.
//
//   acceptance [--out DIR] [--only 1,5,9]
//
// Exit status is 0 only when every selected criterion passes.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "evqc/evqc.hpp"
#include "oracles.hpp"

using namespace evqc;
namespace o = evqc::oracle;
namespace fs = std::filesystem;

namespace {

const std::string kDataDir = EVQC_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

ExperimentConfig digits_config(const fs::path& out) {
    ExperimentConfig c;
    c.train_path = kDataDir + "/optdigits.tra";
    c.test_path = kDataDir + "/optdigits.tes";
    c.output_dir = out.string();
    return c;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return diff / std::max(scale, 1e-300);
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    int cases = 0;
    for (int n = 1; n <= 4; ++n) {
        for (int depth = 0; depth <= 3; ++depth) {
            for (int rep = 0; rep < 3; ++rep) {
                const Ansatz a = random_ansatz(n, depth, rng());
                const QuantumState psi = o::random_pure(n, rng);
                const o::Mat u = o::ansatz_unitary(a);
                worst = std::max(worst, (o::to_vec(run_ansatz(a, psi)) - u * o::to_vec(psi)).cwiseAbs().maxCoeff());
                const QuantumState rho = o::random_mixed(n, rng);
                worst = std::max(worst, o::max_abs_diff(o::to_mat(run_ansatz(a, rho)),
                                                        u * o::to_mat(rho) * u.adjoint()));
                cases += 2;
                for (double p : {0.05, 0.2, 0.7}) {
                    for (int fold : {1, 3}) {
                        const QuantumState got = run_ansatz(a, rho, NoiseModel{p, fold});
                        const o::Vec ref = o::ansatz_superop(a, p, fold) * o::vec_rowmajor(o::to_mat(rho));
                        const auto d = static_cast<Eigen::Index>(got.dim());
                        worst = std::max(worst, o::max_abs_diff(o::to_mat(got), o::unvec_rowmajor(ref, d)));
                        ++cases;
                    }
                }
            }
        }
    }
    return {worst < 1e-12, std::to_string(cases) + " circuits, max |delta| = " + fmt(worst, 3) + " (< 1e-12)"};
}

Outcome gradient_suite() {
    std::mt19937_64 rng(202);
    double worst = 0.0;
    int instances = 0;
    for (double p : {0.0, 0.1, 0.2}) {
        for (int inst = 0; inst < 20; ++inst) {
            const int n = 1 + inst % 3;
            const int k = n == 1 || inst % 2 == 0 ? 2 : 4;
            WeakClassifier clf = make_classifier(n, 1 + inst % 3, k, rng());
            Dataset data;
            std::vector<double> raw;
            for (int i = 0; i < 5; ++i) {
                const QuantumState s = inst % 4 == 3 ? o::random_mixed(n, rng) : o::random_pure(n, rng);
                data.push_back({s, static_cast<int>(rng() % static_cast<std::uint64_t>(k))});
                raw.push_back(0.1 + uniform01(rng));
            }
            const auto w = SampleWeights::from_values(raw);
            const NoiseModel noise{p, 1};
            const auto shift = parameter_shift_gradient(clf, data, w, noise);
            std::vector<double> fd(shift.size());
            const double h = 1e-5;
            for (std::size_t j = 0; j < fd.size(); ++j) {
                WeakClassifier plus = clf, minus = clf;
                plus.ansatz.theta[j] += h;
                minus.ansatz.theta[j] -= h;
                fd[j] = (weighted_cross_entropy(plus, data, w, noise) - weighted_cross_entropy(minus, data, w, noise)) /
                        (2 * h);
            }
            std::vector<GradientMethod> routes{GradientMethod::Auto, GradientMethod::OperatorAdjoint};
            if (p == 0.0 && inst % 4 != 3) routes.push_back(GradientMethod::StatevectorAdjoint);
            for (GradientMethod m : routes) {
                const auto adj = gradient(clf, data, w, noise, 1e-12, m);
                worst = std::max({worst, max_rel(adj, shift), max_rel(adj, fd)});
            }
            worst = std::max(worst, max_rel(shift, fd));
            ++instances;
        }
    }
    return {worst < 1e-6, std::to_string(instances) + " instances, max relative error = " + fmt(worst, 3) + " (< 1e-6)"};
}

Outcome channel_unraveling() {
    constexpr int kShots = 100000;
    std::mt19937_64 rng(303);
    int elements = 0, outside = 0;
    double worst_sigma = 0.0;
    struct Case {
        int n, control, target;
        double p;
    };
    for (const Case& c : {Case{2, 0, 1, 0.1}, Case{2, 1, 0, 0.5}, Case{3, 1, 2, 0.2}, Case{3, 0, 2, 1.0}}) {
        const QuantumState psi = o::random_pure(c.n, rng);
        QuantumState exact = psi.to_density_matrix();
        apply_cnot(exact, c.control, c.target, NoiseModel{c.p, 1});
        const auto d = static_cast<Eigen::Index>(psi.dim());
        o::Mat mean = o::Mat::Zero(d, d);
        Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(d, d), sq_im = Eigen::MatrixXd::Zero(d, d);
        for (int s = 0; s < kShots; ++s) {
            QuantumState t = psi;
            apply_channel_trajectory(t, c.control, c.target, NoiseModel{c.p, 1}, rng);
            const o::Vec v = o::to_vec(t);
            const o::Mat r = v * v.adjoint();
            mean += r;
            sq_re += r.real().cwiseAbs2();
            sq_im += r.imag().cwiseAbs2();
        }
        mean /= kShots;
        const Eigen::MatrixXd var = (sq_re / kShots - mean.real().cwiseAbs2()) +
                                    (sq_im / kShots - mean.imag().cwiseAbs2());
        const Eigen::MatrixXd sem = (var.cwiseMax(0.0) / kShots).cwiseSqrt();
        const o::Mat diff = mean - o::to_mat(exact);
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index col = 0; col < d; ++col) {
                const double dev = std::abs(diff(r, col));
                ++elements;
                if (dev > 3 * sem(r, col) + 1e-12) ++outside;
                if (sem(r, col) > 0) worst_sigma = std::max(worst_sigma, dev / sem(r, col));
            }
        }
    }
    return {outside == 0, std::to_string(elements) + " elements at 1e5 trajectories, " + std::to_string(outside) +
                              " outside 3 sigma (largest deviation " + fmt(worst_sigma, 3) + " sigma)"};
}

struct BoundTally {
    int runs = 0, skipped = 0, closed_form = 0, product_bound = 0, normalizer_bound = 0, exp_bound = 0;
    void add(const BoostDiagnostics& diag) {
        const BoundReport r = verify_bounds(diag);
        if (!r.applicable) {
            ++skipped;
            return;
        }
        ++runs;
        closed_form += r.closed_form ? 0 : 1;
        product_bound += r.product_bound ? 0 : 1;
        normalizer_bound += r.normalizer_bound ? 0 : 1;
        exp_bound += r.exp_bound ? 0 : 1;
    }
    [[nodiscard]] bool ok() const { return runs > 0 && closed_form + product_bound + normalizer_bound + exp_bound == 0; }
    [[nodiscard]] std::string str() const {
        return std::to_string(runs) + " runs (" + std::to_string(skipped) + " with gamma <= 0 skipped), violations: " +
               "closed form " + std::to_string(closed_form) + ", product bound " + std::to_string(product_bound) +
               ", normalizer bound " + std::to_string(normalizer_bound) + ", exponential bound " +
               std::to_string(exp_bound);
    }
};

Outcome boosting_bounds() {
    BoundTally k2, k4;
    // toy data: class-dependent bumps on random amplitude vectors
    for (int k : {2, 4}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            std::mt19937_64 rng(400 + seed);
            Dataset d;
            for (int i = 0; i < 40; ++i) {
                const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
                std::vector<double> x(8);
                for (double& v : x) v = 0.6 * uniform01(rng);
                x[static_cast<std::size_t>(y)] += 0.5;
                d.push_back({amplitude_encode(x), y});
            }
            TrainConfig cfg;
            cfg.iterations = 60;
            cfg.learning_rate = 0.05;
            const auto res = train_adaboost(d, {3, 1, k}, NoiseModel{seed % 2 ? 0.1 : 0.0, 1}, cfg,
                                            member_seeds(seed, 6));
            (k == 2 ? k2 : k4).add(res.diagnostics);
        }
    }
    // binary SPT phase recognition and four-class digits
    SptConfig spt;
    spt.num_qubits = 5;
    spt.num_samples = 120;
    const Dataset spt_data = to_dataset(generate_spt_dataset(spt));
    const auto [train_raw, test_raw] = load_digits(kDataDir + "/optdigits.tra", kDataDir + "/optdigits.tes");
    const Dataset digits = encode(train_raw);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        TrainConfig cfg;
        cfg.iterations = 200;
        k2.add(train_adaboost(spt_data, {5, 2, 2}, {}, cfg, member_seeds(seed, 7)).diagnostics);
        cfg.iterations = 500;
        k4.add(train_adaboost(digits, {6, 2, 4}, {}, cfg, member_seeds(seed, 6)).diagnostics);
    }
    return {k2.ok() && k4.ok(), "K=2: " + k2.str() + "; K=4: " + k4.str()};
}

Summary test_mean(const std::vector<DepthRecord>& recs, int depth) {
    std::vector<double> xs;
    for (const auto& r : recs) {
        if (r.depth == depth) xs.push_back(r.test_accuracy);
    }
    return summarize(xs);
}

Outcome depth_sweep(const fs::path& out) {
    ExperimentConfig cfg = digits_config(out / "c5_depth_sweep");
    cfg.depths = {6, 12};
    const auto recs = run_depth_sweep(cfg);
    const Summary d12 = test_mean(recs, 12), d6 = test_mean(recs, 6);
    const bool ok12 = d12.mean >= 0.91 && d12.mean <= 0.97, ok6 = d6.mean >= 0.89 && d6.mean <= 0.95;
    return {ok12 && ok6, "D_l=12 mean " + fmt(d12.mean) + " (need [0.91, 0.97]) " + (ok12 ? "ok" : "out") +
                             "; D_l=6 mean " + fmt(d6.mean) + " (need [0.89, 0.95]) " + (ok6 ? "ok" : "out")};
}

double ensemble_mean(const std::vector<EnsembleRecord>& recs, Mode mode, int depth, int members) {
    std::vector<double> xs;
    for (const auto& r : recs) {
        if (r.mode == mode && r.depth == depth && r.members == members) xs.push_back(r.test_accuracy);
    }
    return summarize(xs).mean;
}

Outcome bagging_numbers(const fs::path& out) {
    ExperimentConfig cfg = digits_config(out / "c6_bagging");
    cfg.ensemble_modes = {Mode::Bagging};
    cfg.ensemble_depths = {2, 3};
    cfg.members = 10;
    const auto recs = run_ensemble_sweep(cfg);
    const double d3 = ensemble_mean(recs, Mode::Bagging, 3, 10), d2 = ensemble_mean(recs, Mode::Bagging, 2, 10);
    const bool ok3 = d3 >= 0.89 && d3 <= 0.94, ok2 = d2 >= 0.86 && d2 <= 0.91;
    return {ok3 && ok2, "D_l=3 L_c=10 mean " + fmt(d3) + " (need [0.89, 0.94]) " + (ok3 ? "ok" : "out") +
                            "; D_l=2 L_c=10 mean " + fmt(d2) + " (need [0.86, 0.91]) " + (ok2 ? "ok" : "out")};
}

Outcome adaboost_numbers(const fs::path& out) {
    ExperimentConfig cfg = digits_config(out / "c7_adaboost");
    cfg.ensemble_depths = {3};
    cfg.members = 6;
    const auto recs = run_ensemble_sweep(cfg);
    const double ada = ensemble_mean(recs, Mode::AdaBoost, 3, 6), bag = ensemble_mean(recs, Mode::Bagging, 3, 6);
    return {ada >= 0.93 && ada > bag, "AdaBoost D_l=3 L_c=6 mean " + fmt(ada) + " (need >= 0.93), matched bagging " +
                                          fmt(bag) + " (need adaboost > bagging)"};
}

Outcome noise_ordering(const fs::path& out) {
    ExperimentConfig cfg = digits_config(out / "c8_noise_sweep");
    cfg.noise_grid = {0.06, 0.10, 0.14};
    cfg.ensemble_modes = {Mode::AdaBoost};
    cfg.ensemble_depths = {2};
    cfg.members = 9;
    cfg.train_limit = 400;
    const auto recs = run_noise_sweep(cfg);
    bool ok = true;
    std::string detail;
    for (double p : cfg.noise_grid) {
        std::map<std::string, std::vector<double>> by;
        for (const auto& r : recs) {
            if (r.noise == p) by[r.scenario].push_back(r.test_accuracy);
        }
        const double ada = summarize(by["adaboost_D2"]).mean, zne = summarize(by["deep_zne"]).mean,
                     deep = summarize(by["deep"]).mean;
        const bool here = ada - zne > 0.01 && zne - deep > 0.01;
        ok = ok && here;
        detail += (detail.empty() ? "" : "; ") + std::string("P=") + fmt(p, 2) + ": adaboost " + fmt(ada) +
                  ", deep+ZNE " + fmt(zne) + ", deep " + fmt(deep) + (here ? " ok" : " out of order");
    }
    return {ok, detail};
}

Outcome zne_exactness() {
    const std::vector<double> xs{1, 3, 5, 7};
    double cubic = 0.0;
    std::mt19937_64 rng(909);
    for (int t = 0; t < 100; ++t) {
        const double a = uniform01(rng), b = uniform01(rng) - 0.5, c = 0.1 * (uniform01(rng) - 0.5),
                     d = 0.01 * (uniform01(rng) - 0.5);
        std::vector<double> ys;
        for (double x : xs) ys.push_back(a + b * x + c * x * x + d * x * x * x);
        cubic = std::max(cubic, std::abs(extrapolate_to_zero(xs, ys) - a));
    }
    int better = 0;
    for (int t = 0; t < 100; ++t) {
        const WeakClassifier clf = make_classifier(2, 1 + t % 4, 4, 5000 + static_cast<std::uint64_t>(t));
        const EncodedSample s{o::random_pure(2, rng), 0};
        const auto truth = class_probabilities(clf, s);
        const auto noisy = class_probabilities(clf, s, NoiseModel{0.05, 1});
        const auto est = zne_probabilities(clf, s, NoiseModel{0.05, 1});
        double dn = 0.0, dm = 0.0;
        for (std::size_t k = 0; k < truth.size(); ++k) {
            dn += std::abs(noisy[k] - truth[k]);
            dm += std::abs(est.probabilities[k] - truth[k]);
        }
        better += dm < dn ? 1 : 0;
    }
    return {cubic <= 1e-10 && better >= 95, "cubic recovery error " + fmt(cubic, 3) + " (<= 1e-10); mitigated closer in " +
                                                std::to_string(better) + "/100 circuits (need >= 95)"};
}

Outcome spt_pipeline(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.task = Task::Spt;
    cfg.mode = Mode::AdaBoost;
    cfg.depth = 2;
    cfg.members = 7;
    cfg.seeds = {0};
    cfg.output_dir = (out / "c10_phase_diagram").string();
    const double crossing = string_order_crossing(cfg.spt(), 0.0, 0.2, 1.6);
    const bool cross_ok = std::abs(crossing - 1.0) <= 0.15;
    const PhaseDiagram pd = run_phase_diagram(cfg);
    const bool agree_ok = pd.agreement >= 0.90;
    return {cross_ok && agree_ok, "N_q=9 string-order crossing at h2/J = " + fmt(crossing) + " (need 1.0 +/- 0.15) " +
                                      (cross_ok ? "ok" : "out") + "; AdaBoost D_l=2 L_c=7 grid agreement " +
                                      fmt(pd.agreement) + " (need >= 0.90) " + (agree_ok ? "ok" : "out")};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

Outcome determinism(const fs::path& out) {
    const fs::path first = out / "c11_first", second = out / "c11_rerun";
    fs::remove_all(first);
    fs::remove_all(second);
    ExperimentConfig digits = digits_config(first);
    digits.train_limit = 150;
    digits.depths = {1, 2};
    digits.deep_depth = 2;
    digits.deep_iterations = 40;
    digits.iterations = 20;
    digits.ensemble_depths = {1};
    digits.members = 3;
    digits.seeds = {0, 1};
    digits.noise_grid = {0.0, 0.1};
    digits.zne_trace = true;
    ExperimentConfig spt;
    spt.task = Task::Spt;
    spt.spt_qubits = 5;
    spt.spt_samples = 40;
    spt.spt_iterations = 20;
    spt.resolution = 8;
    spt.members = 3;
    spt.seeds = {0, 1};
    spt.output_dir = first.string();

    run_depth_sweep(digits);
    run_ensemble_sweep(digits);
    run_noise_sweep(digits);
    run_phase_diagram(spt);
    auto rerun = [&](const std::string& echo, auto&& fn) {
        ExperimentConfig c = load_config((first / (echo + ".config")).string());
        c.output_dir = second.string();
        fn(c);
    };
    rerun("depth_sweep", [](const ExperimentConfig& c) { run_depth_sweep(c); });
    rerun("ensemble_sweep", [](const ExperimentConfig& c) { run_ensemble_sweep(c); });
    rerun("noise_sweep", [](const ExperimentConfig& c) { run_noise_sweep(c); });
    rerun("phase_diagram", [](const ExperimentConfig& c) { run_phase_diagram(c); });

    int files = 0, differ = 0;
    for (const auto& entry : fs::directory_iterator(first)) {
        if (entry.path().extension() == ".config") continue;
        ++files;
        const fs::path twin = second / entry.path().filename();
        if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) ++differ;
    }
    return {files > 0 && differ == 0, std::to_string(files) + " output files re-run from config echoes, " +
                                          std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string out = "acceptance_out";
    std::vector<int> only;
    app.add_option("--out", out, "scratch directory for experiment outputs");
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const fs::path dir(out);
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"gradient suite", gradient_suite},
        {"channel unraveling", channel_unraveling},
        {"boosting bounds", boosting_bounds},
        {"depth sweep numbers", [&] { return depth_sweep(dir); }},
        {"bagging numbers", [&] { return bagging_numbers(dir); }},
        {"adaboost numbers", [&] { return adaboost_numbers(dir); }},
        {"noise ordering", [&] { return noise_ordering(dir); }},
        {"ZNE exactness", zne_exactness},
        {"SPT pipeline", [&] { return spt_pipeline(dir); }},
        {"determinism", [&] { return determinism(dir); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %s  %s: %s [%.0fs]\n", id, r.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    r.detail.c_str(), secs);
        std::fflush(stdout);
        failed += r.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
