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
 * Ensembles of variational classifiers: Bagging (independent members,
 * majority vote) and multi-class AdaBoost (SAMME), together with the
 * training-error bound diagnostics of the boosting loop.
 */
#pragma once

#include "evqc/vqc.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace evqc {

enum class Combination { HardVote, WeightedHardVote, WeightedProbability };

inline std::string to_string(Combination c) {
    switch (c) {
        case Combination::HardVote: return "hard_vote";
        case Combination::WeightedHardVote: return "weighted_hard_vote";
        case Combination::WeightedProbability: return "weighted_probability";
    }
    return "?";
}

inline Combination parse_combination(const std::string& s) {
    if (s == "hard_vote") return Combination::HardVote;
    if (s == "weighted_hard_vote") return Combination::WeightedHardVote;
    if (s == "weighted_probability") return Combination::WeightedProbability;
    throw ConfigError("unknown combination mode: " + s);
}

struct EnsembleModel {
    std::vector<WeakClassifier> members;
    std::vector<double> alphas;
    Combination combination = Combination::HardVote;
    int num_classes = 2;

    [[nodiscard]] std::size_t size() const { return members.size(); }

    void validate() const {
        if (members.empty()) throw ConfigError("ensemble has no members");
        if (alphas.size() != members.size()) throw ConfigError("ensemble: one alpha per member required");
        for (std::size_t l = 0; l < members.size(); ++l) {
            members[l].validate();
            if (members[l].num_classes != num_classes) throw ConfigError("ensemble: class count mismatch");
            if (!std::isfinite(alphas[l])) throw ConfigError("ensemble: non-finite alpha");
            if (combination == Combination::WeightedHardVote && !(alphas[l] > 0.0)) {
                throw ConfigError("weighted hard vote requires positive alphas");
            }
        }
    }
};

/// Architecture shared by all members.
struct MemberSpec {
    int num_qubits = 6;
    int depth = 2;
    int num_classes = 4;
};

// ---------------------------------------------------------------------------
// Combination

/// Combines per-member outputs of the first `count` members. `member_probs`
/// holds one (samples x classes) table per member; hard votes use each
/// member's argmax.
inline std::vector<int> combine(const std::vector<ProbabilityTable>& member_probs,
                                std::span<const double> alphas, Combination combination,
                                int num_classes, std::size_t count) {
    if (count == 0 || count > member_probs.size() || alphas.size() < count) {
        throw ConfigError("combine: bad member count");
    }
    const std::size_t m = member_probs[0].rows;
    const auto K = static_cast<std::size_t>(num_classes);
    std::vector<int> out(m);
    std::vector<double> score(K);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(score.begin(), score.end(), 0.0);
        for (std::size_t l = 0; l < count; ++l) {
            const auto row = member_probs[l].row(i);
            switch (combination) {
                case Combination::HardVote:
                    score[static_cast<std::size_t>(argmax_class(row))] += 1.0;
                    break;
                case Combination::WeightedHardVote:
                    score[static_cast<std::size_t>(argmax_class(row))] += alphas[l];
                    break;
                case Combination::WeightedProbability:
                    for (std::size_t k = 0; k < K; ++k) score[k] += alphas[l] * row[k];
                    break;
            }
        }
        out[i] = argmax_class(score);
    }
    return out;
}

inline std::vector<ProbabilityTable> member_probabilities(const EnsembleModel& model, const Dataset& data,
                                                          const NoiseModel& noise = {}) {
    std::vector<ProbabilityTable> out;
    out.reserve(model.size());
    for (const auto& clf : model.members) out.push_back(class_probabilities(clf, data, noise));
    return out;
}

inline std::vector<int> predict_ensemble(const EnsembleModel& model, const Dataset& data,
                                         const NoiseModel& noise = {}) {
    model.validate();
    return combine(member_probabilities(model, data, noise), model.alphas, model.combination,
                   model.num_classes, model.size());
}

inline int predict_ensemble(const EnsembleModel& model, const EncodedSample& sample,
                            const NoiseModel& noise = {}) {
    return predict_ensemble(model, Dataset{sample}, noise).front();
}

// ---------------------------------------------------------------------------
// Bagging

/// Bootstrap resample of size m expressed as multiplicity weights.
inline SampleWeights bootstrap_weights(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xb5ad4eceda1ce2a9ULL);
    std::vector<double> counts(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(m));
        counts[std::min(j, m - 1)] += 1.0;
    }
    return SampleWeights::from_values(std::move(counts));
}

struct EnsembleOptions {
    bool train_noise_free = false;  // fit members without noise, evaluate with it
};

/// L independently trained members, one per seed, combined by majority vote.
/// With `resample` each member sees its own bootstrap replicate.
inline EnsembleModel train_bagging(const Dataset& data, const MemberSpec& spec, const NoiseModel& noise,
                                   const TrainConfig& config, std::span<const std::uint64_t> seeds,
                                   bool resample = false, const EnsembleOptions& options = {}) {
    if (seeds.empty()) throw ConfigError("bagging: need at least one member");
    if (data.empty()) throw ConfigError("bagging: empty dataset");
    const NoiseModel fit_noise = options.train_noise_free ? NoiseModel{} : noise;
    EnsembleModel model;
    model.combination = Combination::HardVote;
    model.num_classes = spec.num_classes;
    for (std::uint64_t seed : seeds) {
        const WeakClassifier init = make_classifier(spec.num_qubits, spec.depth, spec.num_classes, seed);
        const SampleWeights w = resample ? bootstrap_weights(data.size(), seed) : SampleWeights::uniform(data.size());
        WeakClassifier clf = train(init, data, w, fit_noise, config);
        clf.error_rate = error_rate(clf, data, SampleWeights::uniform(data.size()), noise);
        clf.weight = 1.0;
        model.members.push_back(std::move(clf));
        model.alphas.push_back(1.0);
    }
    return model;
}

// ---------------------------------------------------------------------------
// AdaBoost (SAMME)

inline constexpr double kErrorClamp = 1e-10;

/// alpha = log((1 - e) / e) + log(K - 1), with e clamped away from 0.
inline double samme_alpha(double error, int num_classes) {
    const double e = std::max(error, kErrorClamp);
    return std::log((1.0 - e) / e) + std::log(static_cast<double>(num_classes - 1));
}

/// gamma = (K - 1)/K - e.
inline double samme_gamma(double error, int num_classes) {
    const double k = num_classes;
    return (k - 1.0) / k - std::max(error, kErrorClamp);
}

/// Z = (1 - K/(K-1) gamma)^((K-1)/K) (1 + K gamma)^(1/K).
inline double normalizer_closed_form(double gamma, int num_classes) {
    const double k = num_classes;
    return std::pow(1.0 - k / (k - 1.0) * gamma, (k - 1.0) / k) * std::pow(1.0 + k * gamma, 1.0 / k);
}

struct WeightUpdate {
    SampleWeights weights;
    double normalizer = 1.0;
};

/// w_i <- w_i exp(alpha ((1 - K)/K + 1{miss_i})) / Z.
inline WeightUpdate update_weights(const SampleWeights& w, double alpha, const std::vector<bool>& misclassified,
                                   int num_classes) {
    if (!std::isfinite(alpha)) throw NumericalError("update_weights: non-finite alpha");
    if (misclassified.size() != w.size()) throw ConfigError("update_weights: size mismatch");
    const double k = num_classes;
    const double base = (1.0 - k) / k;
    std::vector<double> next(w.size());
    double z = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        next[i] = w[i] * std::exp(alpha * (base + (misclassified[i] ? 1.0 : 0.0)));
        z += next[i];
    }
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("update_weights: zero normalizer");
    for (double& v : next) v /= z;
    WeightUpdate out;
    out.normalizer = z;
    out.weights = SampleWeights::from_values(std::move(next));
    return out;
}

struct StageRecord {
    int stage = 0;  // 1-based
    std::uint64_t seed = 0;
    int attempts = 1;
    double error = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double normalizer = 0.0;              // Z_l by direct summation
    double normalizer_closed_form = 0.0;  // from gamma_l
    double cumulative_bound = 0.0;        // prod_{j<=l} Z_j
    double cumulative_train_error = 0.0;  // unweighted error of the first l members
};

struct BoostDiagnostics {
    int num_classes = 2;
    std::vector<StageRecord> stages;
    double final_train_error = 0.0;
    std::vector<std::string> warnings;

    [[nodiscard]] double gamma_min() const {
        double g = std::numeric_limits<double>::infinity();
        for (const auto& s : stages) g = std::min(g, s.gamma);
        return g;
    }

    /// exp(-K/(K-1) L gamma_min^2).
    [[nodiscard]] double exponential_bound() const {
        const double k = num_classes;
        const double g = gamma_min();
        return std::exp(-k / (k - 1.0) * static_cast<double>(stages.size()) * g * g);
    }
};

struct BoostResult {
    EnsembleModel model;
    BoostDiagnostics diagnostics;
};

/// Deterministic replacement seed for a failed stage.
inline std::uint64_t retry_seed(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Sequential SAMME. A stage whose weighted error reaches (K-1)/K is retrained
/// once from retry_seed(seed); if it fails again the loop stops and keeps the
/// members trained so far.
inline BoostResult train_adaboost(const Dataset& data, const MemberSpec& spec, const NoiseModel& noise,
                                  const TrainConfig& config, std::span<const std::uint64_t> seeds,
                                  Combination combination = Combination::WeightedHardVote,
                                  const EnsembleOptions& options = {}) {
    if (seeds.empty()) throw ConfigError("adaboost: need at least one member");
    if (data.empty()) throw ConfigError("adaboost: empty dataset");
    const int K = spec.num_classes;
    const double chance_error = (K - 1.0) / K;
    const NoiseModel fit_noise = options.train_noise_free ? NoiseModel{} : noise;
    BoostResult result;
    result.model.combination = combination;
    result.model.num_classes = K;
    result.diagnostics.num_classes = K;
    SampleWeights w = SampleWeights::uniform(data.size());
    std::vector<ProbabilityTable> train_probs;
    double prod_z = 1.0;
    for (std::size_t l = 0; l < seeds.size(); ++l) {
        std::uint64_t seed = seeds[l];
        WeakClassifier clf;
        std::vector<int> pred;
        ProbabilityTable probs;
        double e = 1.0;
        int attempts = 0;
        for (; attempts < 2; ++attempts) {
            if (attempts == 1) seed = retry_seed(seed);
            clf = train(make_classifier(spec.num_qubits, spec.depth, K, seed), data, w, fit_noise, config);
            probs = class_probabilities(clf, data, noise);
            pred.assign(data.size(), 0);
            for (std::size_t i = 0; i < data.size(); ++i) pred[i] = argmax_class(probs.row(i));
            e = error_rate(pred, data, w);
            if (e < chance_error) break;
        }
        if (e >= chance_error) {
            std::ostringstream os;
            os << "stage " << (l + 1) << ": weighted error " << e << " >= " << chance_error
               << " after retry; stopping with " << result.model.size() << " members";
            result.diagnostics.warnings.push_back(os.str());
            break;
        }
        std::vector<bool> miss(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) miss[i] = pred[i] != data[i].label;
        const double alpha = samme_alpha(e, K);
        const WeightUpdate upd = update_weights(w, alpha, miss, K);
        prod_z *= upd.normalizer;

        clf.error_rate = e;
        clf.weight = alpha;
        clf.seed = seed;
        result.model.members.push_back(clf);
        result.model.alphas.push_back(alpha);
        train_probs.push_back(std::move(probs));

        StageRecord rec;
        rec.stage = static_cast<int>(l + 1);
        rec.seed = seed;
        rec.attempts = attempts + 1;
        rec.error = e;
        rec.alpha = alpha;
        rec.gamma = samme_gamma(e, K);
        rec.normalizer = upd.normalizer;
        rec.normalizer_closed_form = normalizer_closed_form(rec.gamma, K);
        rec.cumulative_bound = prod_z;
        const auto ens_pred = combine(train_probs, result.model.alphas, Combination::WeightedHardVote, K,
                                      train_probs.size());
        rec.cumulative_train_error = error_rate(ens_pred, data, SampleWeights::uniform(data.size()));
        result.diagnostics.stages.push_back(rec);
        w = upd.weights;
    }
    if (!result.diagnostics.stages.empty()) {
        result.diagnostics.final_train_error = result.diagnostics.stages.back().cumulative_train_error;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Bound verification

struct BoundReport {
    bool applicable = true;        // every gamma_l > 0
    bool product_bound = true;     // e_AB <= prod Z_l
    bool normalizer_bound = true;  // Z_l <= exp(-K/(K-1) gamma_l^2)
    bool closed_form = true;       // direct Z_l == closed form (unclamped stages)
    bool exp_bound = true;         // e_AB <= exp(-K/(K-1) L gamma^2)
    std::vector<std::string> messages;

    [[nodiscard]] bool ok() const { return applicable && product_bound && normalizer_bound && closed_form && exp_bound; }
};

inline BoundReport verify_bounds(const BoostDiagnostics& diag, double slack = 1e-10) {
    BoundReport r;
    if (diag.stages.empty()) {
        r.applicable = false;
        r.messages.push_back("no stages");
        return r;
    }
    const double k = diag.num_classes;
    for (const auto& s : diag.stages) {
        if (!(s.gamma > 0.0)) {
            r.applicable = false;
            r.messages.push_back("stage " + std::to_string(s.stage) + ": gamma <= 0, bound not applicable");
        }
    }
    if (!r.applicable) return r;
    double prod_z = 1.0;
    for (const auto& s : diag.stages) {
        prod_z *= s.normalizer;
        const double normalizer_cap = std::exp(-k / (k - 1.0) * s.gamma * s.gamma);
        if (s.normalizer > normalizer_cap + slack) {
            r.normalizer_bound = false;
            r.messages.push_back("normalizer bound violated at stage " + std::to_string(s.stage));
        }
        if (s.error >= kErrorClamp && std::abs(s.normalizer - s.normalizer_closed_form) > slack) {
            r.closed_form = false;
            r.messages.push_back("closed-form Z mismatch at stage " + std::to_string(s.stage));
        }
    }
    if (diag.final_train_error > prod_z + slack) {
        r.product_bound = false;
        std::ostringstream os;
        os << "product bound violated: train error " << diag.final_train_error << " > prod Z " << prod_z;
        r.messages.push_back(os.str());
    }
    if (diag.final_train_error > diag.exponential_bound() + slack) {
        r.exp_bound = false;
        std::ostringstream os;
        os << "exponential bound violated: train error " << diag.final_train_error << " > " << diag.exponential_bound();
        r.messages.push_back(os.str());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Files

inline void write_diagnostics_csv(std::ostream& os, const BoostDiagnostics& diag) {
    os << "stage,e_l,alpha_l,gamma_l,Z_l,cumulative_bound,cumulative_train_error\n" << std::setprecision(17);
    for (const auto& s : diag.stages) {
        os << s.stage << "," << s.error << "," << s.alpha << "," << s.gamma << "," << s.normalizer << ","
           << s.cumulative_bound << "," << s.cumulative_train_error << "\n";
    }
}

/// Writes member checkpoints next to a manifest and returns the manifest path.
inline std::string write_ensemble(const std::filesystem::path& dir, const std::string& name,
                                  const EnsembleModel& model, double noise_p = 0.0) {
    model.validate();
    std::filesystem::create_directories(dir);
    const auto manifest = dir / (name + ".manifest");
    std::ofstream os(manifest);
    if (!os) throw ConfigError("cannot write " + manifest.string());
    os << "# evqc ensemble manifest v1\n" << std::setprecision(17);
    os << "num_classes=" << model.num_classes << "\n";
    os << "combination=" << to_string(model.combination) << "\n";
    os << "num_members=" << model.size() << "\n";
    for (std::size_t l = 0; l < model.size(); ++l) {
        const auto& m = model.members[l];
        const std::string file = name + "_member" + std::to_string(l) + ".ckpt";
        write_checkpoint((dir / file).string(),
                         CheckpointHeader{m.ansatz.num_qubits, m.ansatz.depth, m.num_classes, m.seed, noise_p},
                         m.ansatz);
        os << "member=" << file << ",alpha=" << model.alphas[l] << ",error=" << m.error_rate << "\n";
    }
    return manifest.string();
}

inline EnsembleModel read_ensemble(const std::string& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw ConfigError("cannot open manifest " + manifest_path);
    const auto dir = std::filesystem::path(manifest_path).parent_path();
    EnsembleModel model;
    std::size_t expected = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("manifest: malformed line " + line);
        const std::string key = line.substr(0, eq);
        if (key == "num_classes") {
            model.num_classes = std::stoi(line.substr(eq + 1));
        } else if (key == "combination") {
            model.combination = parse_combination(line.substr(eq + 1));
        } else if (key == "num_members") {
            expected = std::stoull(line.substr(eq + 1));
        } else if (key == "member") {
            std::stringstream ss(line);
            std::string field, file;
            double alpha = 1.0, err = 0.0;
            while (std::getline(ss, field, ',')) {
                const auto e = field.find('=');
                const std::string k = field.substr(0, e), v = field.substr(e + 1);
                if (k == "member") file = v;
                else if (k == "alpha") alpha = std::stod(v);
                else if (k == "error") err = std::stod(v);
                else throw ConfigError("manifest: unknown member field " + k);
            }
            auto [h, a] = read_checkpoint((dir / file).string());
            WeakClassifier clf = make_classifier(h.num_qubits, h.depth, h.num_classes, h.seed);
            clf.ansatz = std::move(a);
            clf.error_rate = err;
            clf.weight = alpha;
            model.members.push_back(std::move(clf));
            model.alphas.push_back(alpha);
        } else {
            throw ConfigError("manifest: unknown key " + key);
        }
    }
    if (model.size() != expected) throw ConfigError("manifest: member count mismatch");
    model.validate();
    return model;
}

}  // namespace evqc
