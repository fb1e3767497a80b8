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

#include "evqc/qstate.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"

using namespace evqc;
namespace o = evqc::oracle;

TEST(qstate, rx_zero_is_identity) {
    std::mt19937_64 rng(1);
    QuantumState s = o::random_pure(3, rng);
    const QuantumState before = s;
    apply_single_qubit_rotation(s, 1, Axis::X, 0.0);
    for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_EQ(s.amplitude(i), before.amplitude(i));
}

TEST(qstate, rx_pi_flips_with_phase) {
    QuantumState s = QuantumState::zero(1);
    apply_single_qubit_rotation(s, 0, Axis::X, std::numbers::pi);
    EXPECT_NEAR(std::abs(s.amplitude(0)), 0.0, 1e-15);
    EXPECT_NEAR(s.amplitude(1).real(), 0.0, 1e-15);
    EXPECT_NEAR(s.amplitude(1).imag(), -1.0, 1e-15);
}

TEST(qstate, rotations_match_kronecker_oracle) {
    QuantumState s = QuantumState::zero(3);
    apply_single_qubit_rotation(s, 1, Axis::X, std::numbers::pi / 2);
    apply_single_qubit_rotation(s, 1, Axis::Z, std::numbers::pi / 2);
    o::Vec ref = o::Vec::Zero(8);
    ref(0) = 1.0;
    ref = o::embed1(3, 1, o::rotation(Axis::Z, std::numbers::pi / 2)) *
          o::embed1(3, 1, o::rotation(Axis::X, std::numbers::pi / 2)) * ref;
    EXPECT_LT((o::to_vec(s) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(qstate, random_gates_match_oracle_on_both_backends) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 3;
        QuantumState psi = o::random_pure(n, rng);
        QuantumState rho = o::random_mixed(n, rng);
        o::Vec vref = o::to_vec(psi);
        o::Mat mref = o::to_mat(rho);
        for (int g = 0; g < 12; ++g) {
            const int q = static_cast<int>(rng() % n);
            o::Mat u;
            if (g % 3 == 2) {
                const int t = (q + 1 + static_cast<int>(rng() % (n - 1))) % n;
                apply_cnot(psi, q, t);
                apply_cnot(rho, q, t);
                u = o::cnot(n, q, t);
            } else {
                const Axis axis = g % 3 == 0 ? Axis::X : Axis::Z;
                const double th = ang(rng);
                apply_single_qubit_rotation(psi, q, axis, th);
                apply_single_qubit_rotation(rho, q, axis, th);
                u = o::embed1(n, q, o::rotation(axis, th));
            }
            vref = u * vref;
            mref = u * mref * u.adjoint();
        }
        EXPECT_LT((o::to_vec(psi) - vref).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(o::max_abs_diff(o::to_mat(rho), mref), 1e-12);
        EXPECT_NEAR(psi.norm_or_trace(), 1.0, 1e-10);
        EXPECT_NO_THROW(rho.validate());
    }
}

TEST(qstate, cnot_on_10_gives_11) {
    QuantumState s = QuantumState::basis(2, 2);
    apply_cnot(s, 0, 1);
    EXPECT_EQ(s.amplitude(3), cplx(1.0));
}

TEST(qstate, full_depolarization_gives_maximally_mixed) {
    std::mt19937_64 rng(3);
    QuantumState rho = o::random_mixed(2, rng);
    apply_cnot(rho, 0, 1, NoiseModel{1.0, 1});
    EXPECT_LT(o::max_abs_diff(o::to_mat(rho), o::eye(4) / 4.0), 1e-14);
}

TEST(qstate, folded_channel_matches_superoperator_oracle) {
    std::mt19937_64 rng(11);
    QuantumState rho = o::random_mixed(2, rng);
    QuantumState seq = rho;
    const o::Mat rho0 = o::to_mat(rho);
    apply_cnot(rho, 0, 1, NoiseModel{0.1, 3});
    const o::Mat ch = o::noisy_cnot_superop(2, 0, 1, 0.1);
    const o::Vec ref = ch * ch * ch * o::vec_rowmajor(rho0);
    EXPECT_LT(o::max_abs_diff(o::to_mat(rho), o::unvec_rowmajor(ref, 4)), 1e-12);

    for (int f = 0; f < 3; ++f) apply_cnot(seq, 0, 1, NoiseModel{0.1, 1});
    EXPECT_LT(o::max_abs_diff(o::to_mat(seq), o::to_mat(rho)), 1e-12);
}

TEST(qstate, channel_on_non_adjacent_pair_matches_oracle) {
    std::mt19937_64 rng(5);
    QuantumState rho = o::random_mixed(4, rng);
    const o::Mat rho0 = o::to_mat(rho);
    apply_cnot(rho, 3, 1, NoiseModel{0.27, 1});
    const o::Vec ref = o::noisy_cnot_superop(4, 3, 1, 0.27) * o::vec_rowmajor(rho0);
    EXPECT_LT(o::max_abs_diff(o::to_mat(rho), o::unvec_rowmajor(ref, 16)), 1e-12);
    EXPECT_NEAR(rho.norm_or_trace(), 1.0, 1e-10);
}

TEST(qstate, channel_is_self_adjoint) {
    std::mt19937_64 rng(9);
    QuantumState a = o::random_mixed(3, rng), b = o::random_mixed(3, rng);
    const o::Mat a0 = o::to_mat(a), b0 = o::to_mat(b);
    apply_cnot(a, 0, 2, NoiseModel{0.3, 1});
    apply_cnot(b, 0, 2, NoiseModel{0.3, 1});
    const cplx lhs = (o::to_mat(a) * b0).trace();
    const cplx rhs = (a0 * o::to_mat(b)).trace();
    EXPECT_LT(std::abs(lhs - rhs), 1e-13);
}

TEST(qstate, noisy_cnot_on_statevector_is_rejected) {
    QuantumState s = QuantumState::zero(2);
    EXPECT_THROW(apply_cnot(s, 0, 1, NoiseModel{0.1, 1}), UnsupportedConfiguration);
    EXPECT_THROW(apply_cnot(s, 0, 0), ConfigError);
    EXPECT_THROW(apply_cnot(s, 0, 2), ConfigError);
    EXPECT_THROW(apply_single_qubit_rotation(s, -1, Axis::X, 0.1), ConfigError);
    EXPECT_THROW(apply_cnot(s, 0, 1, NoiseModel{0.0, 2}), ConfigError);
}

TEST(qstate, trajectory_without_noise_is_plain_cnot) {
    std::mt19937_64 rng(1);
    QuantumState s = QuantumState::basis(2, 2);
    apply_channel_trajectory(s, 0, 1, NoiseModel{0.0, 1}, rng);
    EXPECT_EQ(s.amplitude(3), cplx(1.0));
}

namespace {

/// Trajectory mean and standard error of |psi><psi| over `shots` runs.
void trajectory_moments(const QuantumState& init, const NoiseModel& noise, int shots,
                        std::uint64_t seed, o::Mat& mean, Eigen::MatrixXd& sem) {
    std::mt19937_64 rng(seed);
    const auto d = static_cast<Eigen::Index>(init.dim());
    mean = o::Mat::Zero(d, d);
    Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(d, d), sq_im = Eigen::MatrixXd::Zero(d, d);
    for (int s = 0; s < shots; ++s) {
        QuantumState psi = init;
        apply_channel_trajectory(psi, 0, 1, noise, rng);
        const o::Vec v = o::to_vec(psi);
        const o::Mat r = v * v.adjoint();
        mean += r;
        sq_re += r.real().cwiseAbs2();
        sq_im += r.imag().cwiseAbs2();
    }
    mean /= shots;
    const Eigen::MatrixXd var_re = sq_re / shots - mean.real().cwiseAbs2();
    const Eigen::MatrixXd var_im = sq_im / shots - mean.imag().cwiseAbs2();
    sem = ((var_re + var_im).cwiseMax(0.0) / shots).cwiseSqrt();
}

}  // namespace

TEST(qstate, full_noise_trajectories_average_to_maximally_mixed) {
    o::Mat mean;
    Eigen::MatrixXd sem;
    trajectory_moments(QuantumState::zero(2), NoiseModel{1.0, 1}, 100000, 21, mean, sem);
    const o::Mat diff = mean - o::eye(4) / 4.0;
    for (Eigen::Index r = 0; r < 4; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            EXPECT_LE(std::abs(diff(r, c)), 3 * sem(r, c) + 1e-12) << r << "," << c;
        }
    }
}

TEST(qstate, trajectories_average_to_exact_channel) {
    std::mt19937_64 rng(4);
    const QuantumState psi = o::random_pure(2, rng);
    QuantumState exact = psi.to_density_matrix();
    apply_cnot(exact, 0, 1, NoiseModel{0.1, 1});
    o::Mat mean;
    Eigen::MatrixXd sem;
    trajectory_moments(psi, NoiseModel{0.1, 1}, 100000, 22, mean, sem);
    const o::Mat diff = mean - o::to_mat(exact);
    for (Eigen::Index r = 0; r < 4; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            EXPECT_LE(std::abs(diff(r, c)), 3 * sem(r, c) + 1e-12) << r << "," << c;
        }
    }
}

TEST(qstate, measure_trivial_cases) {
    const std::vector<int> last{1};
    EXPECT_EQ(measure_projectors(QuantumState::zero(2), last), (std::vector<double>{1.0, 0.0}));
    const QuantumState u = QuantumState::from_amplitudes({0.5, 0.5, 0.5, 0.5});
    const std::vector<int> both{0, 1};
    for (double p : measure_projectors(u, both)) EXPECT_NEAR(p, 0.25, 1e-15);
    EXPECT_THROW(measure_projectors(u, std::vector<int>{}), ConfigError);
    EXPECT_THROW(measure_projectors(u, std::vector<int>{0, 0}), ConfigError);
}

TEST(qstate, measure_matches_partial_trace_oracle) {
    std::mt19937_64 rng(8);
    const QuantumState psi = o::random_pure(3, rng);
    const QuantumState rho = o::random_mixed(3, rng);
    const std::vector<int> qs{1, 2};
    for (const QuantumState* s : {&psi, &rho}) {
        const auto got = measure_projectors(*s, qs);
        const auto ref = o::projector_probs(o::to_mat(*s), 3, qs);
        double total = 0.0;
        for (std::size_t k = 0; k < ref.size(); ++k) {
            EXPECT_NEAR(got[k], ref[k], 1e-12);
            total += got[k];
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
    // first listed qubit is the most significant bit of the outcome
    const auto swapped = measure_projectors(psi, std::vector<int>{2, 1});
    const auto ref = o::projector_probs(o::to_mat(psi), 3, {2, 1});
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(swapped[k], ref[k], 1e-12);
}

TEST(qstate, factories_validate_input) {
    EXPECT_THROW(QuantumState::from_amplitudes({1.0, 0.0, 0.0}), ConfigError);
    EXPECT_THROW(QuantumState::zero(0), ConfigError);
    EXPECT_THROW(QuantumState::basis(2, 4), ConfigError);
    EXPECT_THROW(QuantumState::from_amplitudes({1.0, 1.0}).validate(), NumericalError);
}
