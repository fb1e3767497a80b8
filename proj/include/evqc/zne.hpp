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
 * Zero-noise extrapolation: class probabilities are evaluated with every CNOT
 * folded c times and extrapolated per class to c = 0 through the
 * interpolating polynomial, then clipped to [0, 1] and renormalized.
 */
#pragma once

#include "evqc/vqc.hpp"

#include <ostream>
#include <vector>

namespace evqc {

struct ZneSchedule {
    std::vector<int> fold_factors{1, 3, 5, 7};
    int degree = 3;

    void validate() const {
        if (fold_factors.empty()) throw ConfigError("zne: empty fold schedule");
        for (std::size_t i = 0; i < fold_factors.size(); ++i) {
            const int c = fold_factors[i];
            if (c < 1 || c % 2 == 0) throw ConfigError("zne: fold factors must be odd and >= 1");
            if (i > 0 && c <= fold_factors[i - 1]) {
                throw ConfigError("zne: fold factors must be strictly increasing");
            }
        }
        if (degree != static_cast<int>(fold_factors.size()) - 1) {
            throw ConfigError("zne: degree must equal the number of fold factors minus one");
        }
    }
};

/// Value at 0 of the polynomial through (xs[j], ys[j]).
inline double extrapolate_to_zero(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.empty()) throw ConfigError("zne: mismatched sample points");
    double acc = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        double basis = 1.0;
        for (std::size_t m = 0; m < xs.size(); ++m) {
            if (m == j) continue;
            if (xs[j] == xs[m]) throw ConfigError("zne: repeated fold factor");
            basis *= (0.0 - xs[m]) / (xs[j] - xs[m]);
        }
        acc += basis * ys[j];
    }
    return acc;
}

struct ZneEstimate {
    std::vector<std::vector<double>> folded;  // [fold index][class]
    std::vector<double> extrapolated;         // raw polynomial values at c = 0
    std::vector<double> probabilities;        // clipped and renormalized
    bool fallback = false;                    // everything clipped to zero
};

/// Per-class extrapolation of already evaluated folded probabilities.
inline ZneEstimate mitigate(const ZneSchedule& schedule, std::vector<std::vector<double>> folded) {
    schedule.validate();
    if (folded.size() != schedule.fold_factors.size()) throw ConfigError("zne: one vector per fold factor");
    const std::size_t K = folded.front().size();
    std::vector<double> xs(schedule.fold_factors.begin(), schedule.fold_factors.end());
    ZneEstimate est;
    est.extrapolated.resize(K);
    est.probabilities.resize(K);
    std::vector<double> ys(xs.size());
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < xs.size(); ++j) ys[j] = folded[j][k];
        est.extrapolated[k] = extrapolate_to_zero(xs, ys);
        est.probabilities[k] = std::clamp(est.extrapolated[k], 0.0, 1.0);
        total += est.probabilities[k];
    }
    if (total > 0.0) {
        for (double& p : est.probabilities) p /= total;
    } else {
        est.fallback = true;
        std::fill(est.probabilities.begin(), est.probabilities.end(), 1.0 / static_cast<double>(K));
    }
    est.folded = std::move(folded);
    return est;
}

inline ZneEstimate zne_probabilities(const WeakClassifier& clf, const EncodedSample& sample,
                                     const NoiseModel& base_noise, const ZneSchedule& schedule = {}) {
    schedule.validate();
    std::vector<std::vector<double>> folded;
    for (int c : schedule.fold_factors) {
        folded.push_back(class_probabilities(clf, sample, NoiseModel{base_noise.p_depol, c}));
    }
    return mitigate(schedule, std::move(folded));
}

/// Mitigated probabilities for every sample of `data`.
inline std::vector<ZneEstimate> zne_probabilities(const WeakClassifier& clf, const Dataset& data,
                                                  const NoiseModel& base_noise, const ZneSchedule& schedule = {}) {
    schedule.validate();
    std::vector<ProbabilityTable> tables;
    for (int c : schedule.fold_factors) {
        tables.push_back(class_probabilities(clf, data, NoiseModel{base_noise.p_depol, c}));
    }
    std::vector<ZneEstimate> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<std::vector<double>> folded;
        for (const auto& t : tables) {
            const auto row = t.row(i);
            folded.emplace_back(row.begin(), row.end());
        }
        out.push_back(mitigate(schedule, std::move(folded)));
    }
    return out;
}

inline int predict_mitigated(const WeakClassifier& clf, const EncodedSample& sample, const NoiseModel& base_noise,
                             const ZneSchedule& schedule = {}) {
    return argmax_class(zne_probabilities(clf, sample, base_noise, schedule).probabilities);
}

inline std::vector<int> predict_mitigated(const std::vector<ZneEstimate>& estimates) {
    std::vector<int> out;
    out.reserve(estimates.size());
    for (const auto& e : estimates) out.push_back(argmax_class(e.probabilities));
    return out;
}

/// Columns: sample_id, fold_factor, class, probability, extrapolated. Rows
/// with fold_factor 0 carry the mitigated value.
inline void write_zne_trace(std::ostream& os, const ZneSchedule& schedule,
                            const std::vector<ZneEstimate>& estimates) {
    os << "sample_id,fold_factor,class,probability,extrapolated\n" << std::setprecision(17);
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const auto& e = estimates[i];
        for (std::size_t j = 0; j < schedule.fold_factors.size(); ++j) {
            for (std::size_t k = 0; k < e.folded[j].size(); ++k) {
                os << i << "," << schedule.fold_factors[j] << "," << k << "," << e.folded[j][k] << ",0\n";
            }
        }
        for (std::size_t k = 0; k < e.probabilities.size(); ++k) {
            os << i << ",0," << k << "," << e.probabilities[k] << ",1\n";
        }
    }
}

}  // namespace evqc
