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

#include "evqc/zne.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace evqc;
namespace o = evqc::oracle;

TEST(zne, cubic_is_recovered_exactly) {
    auto p = [](double c) { return 0.5 + 0.1 * c - 0.02 * c * c + 0.001 * c * c * c; };
    const std::vector<double> xs{1, 3, 5, 7};
    std::vector<double> ys;
    for (double c : xs) ys.push_back(p(c));
    EXPECT_NEAR(extrapolate_to_zero(xs, ys), 0.5, 1e-10);
}

TEST(zne, random_polynomials_up_to_degree_three) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    const std::vector<double> xs{1, 3, 5, 7};
    for (int trial = 0; trial < 50; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng) * 0.01;
        std::vector<double> ys;
        for (double x : xs) ys.push_back(a + b * x + c * x * x + d * x * x * x);
        EXPECT_NEAR(extrapolate_to_zero(xs, ys), a, 1e-10);
    }
}

TEST(zne, noiseless_circuit_returns_exact_probabilities) {
    const WeakClassifier clf = make_classifier(2, 2, 2, 3);
    std::mt19937_64 rng(1);
    const EncodedSample s{o::random_pure(2, rng), 0};
    const auto exact = class_probabilities(clf, s);
    const auto est = zne_probabilities(clf, s, NoiseModel{0.0, 1});
    for (std::size_t k = 0; k < exact.size(); ++k) EXPECT_NEAR(est.probabilities[k], exact[k], 1e-12);
    EXPECT_EQ(predict_mitigated(clf, s, NoiseModel{0.0, 1}), predict(clf, s));
}

TEST(zne, single_fold_schedule_is_unmitigated) {
    const WeakClassifier clf = make_classifier(3, 2, 4, 4);
    std::mt19937_64 rng(2);
    const EncodedSample s{o::random_pure(3, rng), 0};
    const ZneSchedule one{{1}, 0};
    const auto est = zne_probabilities(clf, s, NoiseModel{0.1, 1}, one);
    const auto plain = class_probabilities(clf, s, NoiseModel{0.1, 1});
    for (std::size_t k = 0; k < plain.size(); ++k) EXPECT_NEAR(est.probabilities[k], plain[k], 1e-14);
}

TEST(zne, folded_points_match_superoperator_oracle) {
    const WeakClassifier clf = make_classifier(2, 2, 2, 6);
    const QuantumState in = QuantumState::zero(2);
    const auto est = zne_probabilities(clf, EncodedSample{in, 0}, NoiseModel{0.05, 1});
    const ZneSchedule sched;
    for (std::size_t j = 0; j < sched.fold_factors.size(); ++j) {
        const o::Vec out = o::ansatz_superop(clf.ansatz, 0.05, sched.fold_factors[j]) * o::vec_rowmajor(o::to_mat(in));
        const auto ref = o::projector_probs(o::unvec_rowmajor(out, 4), 2, clf.measured_qubits);
        for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(est.folded[j][k], ref[k], 1e-12);
    }
}

TEST(zne, mitigation_reduces_l1_error_on_two_qubit_circuits) {
    int better = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const WeakClassifier clf = make_classifier(2, 2, 4, 500 + trial);
        const EncodedSample s{QuantumState::zero(2), 0};
        const auto truth = class_probabilities(clf, s);
        const auto noisy = class_probabilities(clf, s, NoiseModel{0.05, 1});
        const auto est = zne_probabilities(clf, s, NoiseModel{0.05, 1});
        double d_noisy = 0.0, d_mit = 0.0;
        for (std::size_t k = 0; k < truth.size(); ++k) {
            d_noisy += std::abs(noisy[k] - truth[k]);
            d_mit += std::abs(est.probabilities[k] - truth[k]);
        }
        better += d_mit < d_noisy ? 1 : 0;
    }
    EXPECT_GE(better, 95);
}

TEST(zne, output_is_a_distribution) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const WeakClassifier clf = make_classifier(3, 3, 4, 900 + trial);
        const EncodedSample s{o::random_pure(3, rng), 0};
        const auto est = zne_probabilities(clf, s, NoiseModel{0.15, 1});
        double total = 0.0;
        for (double p : est.probabilities) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            total += p;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(zne, all_clipped_falls_back_to_uniform) {
    // linear decrease through zero: every class extrapolates below 0
    const std::vector<std::vector<double>> folded{{0.1, 0.1}, {0.3, 0.3}, {0.5, 0.5}, {0.7, 0.7}};
    const auto est = mitigate(ZneSchedule{}, folded);
    EXPECT_TRUE(est.fallback);
    EXPECT_EQ(est.probabilities, (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(argmax_class(est.probabilities), 0);
    EXPECT_NEAR(est.extrapolated[0], 0.0, 1e-15);
}

TEST(zne, batch_matches_single_sample_path) {
    const WeakClassifier clf = make_classifier(3, 2, 4, 12);
    std::mt19937_64 rng(3);
    Dataset d;
    for (int i = 0; i < 4; ++i) d.push_back({o::random_pure(3, rng), i % 4});
    const auto batch = zne_probabilities(clf, d, NoiseModel{0.08, 1});
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto single = zne_probabilities(clf, d[i], NoiseModel{0.08, 1});
        for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(batch[i].probabilities[k], single.probabilities[k], 1e-12);
    }
    std::ostringstream os;
    write_zne_trace(os, ZneSchedule{}, batch);
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "sample_id,fold_factor,class,probability,extrapolated");
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), 1 + 4 * (4 * 4 + 4));
}

TEST(zne, schedule_validation) {
    EXPECT_THROW((ZneSchedule{{1, 3, 3, 7}, 3}.validate()), ConfigError);
    EXPECT_THROW((ZneSchedule{{1, 2, 5, 7}, 3}.validate()), ConfigError);
    EXPECT_THROW((ZneSchedule{{1, 3, 5, 7}, 2}.validate()), ConfigError);
    const std::vector<double> xs{1, 1}, ys{0.1, 0.2};
    EXPECT_THROW(extrapolate_to_zero(xs, ys), ConfigError);
}
