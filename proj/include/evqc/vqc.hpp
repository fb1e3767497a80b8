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
 * A single variational quantum classifier: class probabilities from the last
 * ceil(log2 K) qubits, weighted cross-entropy, adjoint gradients, full-batch
 * Adam training and prediction.
 *
 * Two adjoint routes implement gradient():
 *
 *  - statevector: one forward and one backward sweep per sample (noiseless
 *    circuits only);
 *  - operator: the class projectors are propagated backwards through the
 *    channel once (Heisenberg picture), giving p_ik = <psi_i|O_k|psi_i> for
 *    all samples, and the loss-weighted aggregate input
 *    sigma_k = sum_i dL/dp_ik rho_i is swept forward once per class. Its cost
 *    is independent of the sample count and it handles depolarizing noise.
 */
#pragma once

#include "evqc/ansatz.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace evqc {

struct EncodedSample {
    QuantumState state;
    int label = 0;
};

using Dataset = std::vector<EncodedSample>;

/// Non-negative sample weights summing to one.
class SampleWeights {
  public:
    SampleWeights() = default;

    static SampleWeights uniform(std::size_t m) {
        if (m == 0) throw ConfigError("weights: empty dataset");
        SampleWeights w;
        w.w_.assign(m, 1.0 / static_cast<double>(m));
        return w;
    }

    /// Normalizes `values` to unit sum.
    static SampleWeights from_values(std::vector<double> values) {
        if (values.empty()) throw ConfigError("weights: empty dataset");
        double total = 0.0;
        for (double v : values) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("weights must be finite and >= 0");
            total += v;
        }
        if (!(total > 0.0)) throw ConfigError("weights: zero total mass");
        for (double& v : values) v /= total;
        SampleWeights w;
        w.w_ = std::move(values);
        return w;
    }

    [[nodiscard]] std::size_t size() const { return w_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return w_[i]; }
    [[nodiscard]] std::span<const double> values() const { return w_; }

    void validate(double tol = 1e-12) const {
        double total = 0.0;
        for (double v : w_) {
            if (v < 0.0) throw NumericalError("negative sample weight");
            total += v;
        }
        if (std::abs(total - 1.0) > tol) throw NumericalError("sample weights do not sum to 1");
    }

  private:
    std::vector<double> w_;
};

struct TrainConfig {
    double learning_rate = 5e-3;
    int iterations = 500;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    double prob_floor = 1e-12;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (iterations < 0) throw ConfigError("iterations must be >= 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
            throw ConfigError("adam betas must lie in [0,1)");
        }
        if (!(epsilon > 0.0) || !(prob_floor > 0.0)) throw ConfigError("epsilon/prob_floor must be > 0");
    }
};

/// A trained (or initial) member classifier with its boosting metadata.
struct WeakClassifier {
    Ansatz ansatz;
    std::vector<int> measured_qubits;
    int num_classes = 2;
    double error_rate = 0.0;
    double weight = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        ansatz.validate();
        if (num_classes < 2 || (num_classes & (num_classes - 1)) != 0) {
            throw ConfigError("num_classes must be a power of two >= 2");
        }
        if ((std::size_t{1} << measured_qubits.size()) != static_cast<std::size_t>(num_classes)) {
            throw ConfigError("measured qubit count must equal log2(num_classes)");
        }
    }
};

inline int measured_qubit_count(int num_classes) {
    if (num_classes < 2 || (num_classes & (num_classes - 1)) != 0) {
        throw ConfigError("num_classes must be a power of two >= 2, got " +
                          std::to_string(num_classes));
    }
    int m = 0;
    while ((1 << m) < num_classes) ++m;
    return m;
}

/// Randomly initialized classifier measuring the last ceil(log2 K) qubits.
inline WeakClassifier make_classifier(int num_qubits, int depth, int num_classes,
                                      std::uint64_t seed) {
    const int m = measured_qubit_count(num_classes);
    if (m > num_qubits) throw ConfigError("not enough qubits to measure all classes");
    WeakClassifier clf;
    clf.ansatz = random_ansatz(num_qubits, depth, seed);
    for (int q = num_qubits - m; q < num_qubits; ++q) clf.measured_qubits.push_back(q);
    clf.num_classes = num_classes;
    clf.seed = seed;
    return clf;
}

/// Row-major (samples x classes) probability table.
struct ProbabilityTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    ProbabilityTable() = default;
    ProbabilityTable(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t k) { return data[i * cols + k]; }
    double operator()(std::size_t i, std::size_t k) const { return data[i * cols + k]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data).subspan(i * cols, cols);
    }
};

/// argmax with ties going to the smallest index.
inline int argmax_class(std::span<const double> p) {
    int best = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        if (p[k] > p[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    return best;
}

namespace detail {

inline void check_dataset(const WeakClassifier& clf, const Dataset& data) {
    if (data.empty()) throw ConfigError("empty dataset");
    for (const auto& s : data) {
        if (s.state.num_qubits() != clf.ansatz.num_qubits) {
            throw ConfigError("sample qubit count does not match the classifier");
        }
        if (s.label < 0 || s.label >= clf.num_classes) throw ConfigError("label out of range");
    }
}

/// class index of every computational basis state for the measured qubits.
inline std::vector<int> class_of_basis(const WeakClassifier& clf) {
    const int n = clf.ansatz.num_qubits;
    const std::size_t dim = std::size_t{1} << n;
    std::vector<int> out(dim, 0);
    for (std::size_t i = 0; i < dim; ++i) {
        int k = 0;
        for (int q : clf.measured_qubits) k = (k << 1) | ((i & qubit_bit(n, q)) ? 1 : 0);
        out[i] = k;
    }
    return out;
}

/// Derivative of -w log(max(p, floor)) with respect to p.
inline double ce_coefficient(double w, double p, double floor) {
    return p > floor ? -w / p : 0.0;
}

struct LossEval {
    double loss = 0.0;
    std::vector<double> grad;
    ProbabilityTable probs;
};

/// Heisenberg observables O_k = E^dagger(Pi_k) for all classes; when
/// `lambdas` is non-null the backward iterate after each rotation gate is
/// recorded (index: class * num_rotations + rotation ordinal).
inline std::vector<std::vector<cplx>> heisenberg_observables(
    const ExecutionPlan& plan, std::span<const double> theta, double p_depol,
    const std::vector<int>& cls, int num_classes, std::vector<std::vector<cplx>>* lambdas) {
    const int n = plan.num_qubits;
    const std::size_t dim = std::size_t{1} << n;
    std::size_t num_rot = 0;
    for (const Gate& g : plan.gates) num_rot += g.kind == GateKind::Rotation ? 1 : 0;
    if (lambdas != nullptr) lambdas->resize(static_cast<std::size_t>(num_classes) * num_rot);
    std::vector<std::vector<cplx>> obs(static_cast<std::size_t>(num_classes));
    for (int k = 0; k < num_classes; ++k) {
        std::vector<cplx> lam(dim * dim, cplx{0.0});
        for (std::size_t i = 0; i < dim; ++i) {
            if (cls[i] == k) lam[i * dim + i] = 1.0;
        }
        std::size_t r = num_rot;
        for (auto it = plan.gates.rbegin(); it != plan.gates.rend(); ++it) {
            const Gate& g = *it;
            if (g.kind == GateKind::Rotation) {
                --r;
                if (lambdas != nullptr) (*lambdas)[static_cast<std::size_t>(k) * num_rot + r] = lam;
                // lambda <- R^dagger lambda R
                rotation_conj(lam.data(), n, g.q0, g.axis, -theta[g.param]);
            } else {
                for (int f = 0; f < plan.fold_factor; ++f) {
                    noisy_cnot_channel(lam.data(), n, g.q0, g.q1, p_depol);
                }
            }
        }
        obs[static_cast<std::size_t>(k)] = std::move(lam);
    }
    return obs;
}

/// Im Tr(Lambda sigma S) for Hermitian Lambda, S and sigma = X or Z on `q`.
inline double generator_trace_im(const cplx* lam, const cplx* s, int n, int q, Axis axis) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t bit = qubit_bit(n, q);
    double acc = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        const cplx* la = lam + a * dim;
        const cplx* sa = s + a * dim;
        if (axis == Axis::X) {
            for (std::size_t b = 0; b < dim; ++b) {
                const cplx& x = la[b];
                const cplx& y = sa[b ^ bit];
                acc += x.imag() * y.real() - x.real() * y.imag();
            }
        } else {
            for (std::size_t b = 0; b < dim; ++b) {
                const cplx& x = la[b];
                const cplx& y = sa[b];
                const double t = x.imag() * y.real() - x.real() * y.imag();
                acc += (b & bit) ? -t : t;
            }
        }
    }
    return acc;
}

/// Per-sample adjoint differentiation on pure states (noiseless only).
class StatevectorAdjoint {
  public:
    StatevectorAdjoint(const WeakClassifier& clf, const Dataset& data)
        : clf_(&clf), data_(&data), cls_(class_of_basis(clf)) {}

    LossEval evaluate(const ExecutionPlan& plan, std::span<const double> theta,
                      const SampleWeights& weights, double floor, bool want_grad) const {
        const int n = plan.num_qubits;
        const std::size_t dim = std::size_t{1} << n;
        const auto K = static_cast<std::size_t>(clf_->num_classes);
        LossEval out;
        out.probs = ProbabilityTable(data_->size(), K);
        if (want_grad) out.grad.assign(plan.num_params, 0.0);
        std::vector<cplx> phi(dim), lam(dim);
        for (std::size_t i = 0; i < data_->size(); ++i) {
            const EncodedSample& s = (*data_)[i];
            if (s.state.is_density_matrix()) {
                throw UnsupportedConfiguration("statevector adjoint needs pure samples");
            }
            std::copy(s.state.data().begin(), s.state.data().end(), phi.begin());
            for (const Gate& g : plan.gates) {
                if (g.kind == GateKind::Rotation) {
                    rotation_rows(phi.data(), n, 1, g.q0, g.axis, theta[g.param]);
                } else {
                    cnot_rows(phi.data(), n, 1, g.q0, g.q1);
                }
            }
            for (std::size_t b = 0; b < dim; ++b) {
                out.probs(i, static_cast<std::size_t>(cls_[b])) += std::norm(phi[b]);
            }
            const double py = out.probs(i, static_cast<std::size_t>(s.label));
            out.loss -= weights[i] * std::log(std::max(py, floor));
            if (!want_grad) continue;
            const double c = ce_coefficient(weights[i], py, floor);
            if (c == 0.0) continue;
            for (std::size_t b = 0; b < dim; ++b) lam[b] = cls_[b] == s.label ? c * phi[b] : cplx{0.0};
            backward(plan, theta, phi, lam, out.grad);
        }
        return out;
    }

  private:
    static void backward(const ExecutionPlan& plan, std::span<const double> theta,
                         std::vector<cplx>& phi, std::vector<cplx>& lam,
                         std::vector<double>& grad) {
        const int n = plan.num_qubits;
        for (auto it = plan.gates.rbegin(); it != plan.gates.rend(); ++it) {
            const Gate& g = *it;
            if (g.kind == GateKind::Cnot) {
                cnot_rows(phi.data(), n, 1, g.q0, g.q1);
                cnot_rows(lam.data(), n, 1, g.q0, g.q1);
                continue;
            }
            // d<phi|O|phi>/dtheta = Im <lambda| sigma |phi> at the gate output
            const std::size_t bit = qubit_bit(n, g.q0);
            const std::size_t dim = phi.size();
            double acc = 0.0;
            for (std::size_t b = 0; b < dim; ++b) {
                if (b & bit) continue;
                const cplx l0 = lam[b], l1 = lam[b | bit], f0 = phi[b], f1 = phi[b | bit];
                acc += g.axis == Axis::X ? std::imag(std::conj(l0) * f1 + std::conj(l1) * f0)
                                         : std::imag(std::conj(l0) * f0 - std::conj(l1) * f1);
            }
            grad[g.param] += acc;
            rotation_rows(phi.data(), n, 1, g.q0, g.axis, -theta[g.param]);
            rotation_rows(lam.data(), n, 1, g.q0, g.axis, -theta[g.param]);
        }
    }

    const WeakClassifier* clf_;
    const Dataset* data_;
    std::vector<int> cls_;
};

/// Heisenberg-picture adjoint over density operators; works for any noise.
class OperatorAdjoint {
  public:
    OperatorAdjoint(const WeakClassifier& clf, const Dataset& data)
        : clf_(&clf), data_(&data), cls_(class_of_basis(clf)) {
        const std::size_t dim = std::size_t{1} << clf.ansatz.num_qubits;
        const std::size_t m = data.size();
        for (const auto& s : data) {
            if (s.state.is_density_matrix()) {
                mixed_ = true;
                continue;
            }
            for (const cplx& a : s.state.data()) {
                if (a.imag() != 0.0) complex_ = true;
            }
        }
        if (mixed_) return;
        if (complex_) {
            psi_c_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(m));
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t b = 0; b < dim; ++b) psi_c_(b, i) = data[i].state.data()[b];
            }
        } else {
            psi_r_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(m));
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t b = 0; b < dim; ++b) psi_r_(b, i) = data[i].state.data()[b].real();
            }
        }
    }

    LossEval evaluate(const ExecutionPlan& plan, std::span<const double> theta, double p_depol,
                      const SampleWeights& weights, double floor, bool want_grad) {
        const int n = plan.num_qubits;
        const std::size_t dim = std::size_t{1} << n;
        const int K = clf_->num_classes;
        const std::size_t m = data_->size();
        auto obs = heisenberg_observables(plan, theta, p_depol, cls_, K,
                                          want_grad ? &lambdas_ : nullptr);
        LossEval out;
        out.probs = expectation_table(obs, dim);
        for (std::size_t i = 0; i < m; ++i) {
            const double py = out.probs(i, static_cast<std::size_t>((*data_)[i].label));
            out.loss -= weights[i] * std::log(std::max(py, floor));
        }
        if (!want_grad) return out;
        out.grad.assign(plan.num_params, 0.0);
        std::size_t num_rot = 0;
        for (const Gate& g : plan.gates) num_rot += g.kind == GateKind::Rotation ? 1 : 0;
        std::vector<double> coeff(m);
        for (int k = 0; k < K; ++k) {
            bool any = false;
            for (std::size_t i = 0; i < m; ++i) {
                const auto& s = (*data_)[i];
                coeff[i] = s.label == k
                               ? ce_coefficient(weights[i], out.probs(i, static_cast<std::size_t>(k)), floor)
                               : 0.0;
                any = any || coeff[i] != 0.0;
            }
            if (!any) continue;
            std::vector<cplx> sigma = aggregate(coeff, dim);
            std::size_t r = 0;
            for (const Gate& g : plan.gates) {
                if (g.kind == GateKind::Rotation) {
                    rotation_conj(sigma.data(), n, g.q0, g.axis, theta[g.param]);
                    const auto& lam = lambdas_[static_cast<std::size_t>(k) * num_rot + r];
                    out.grad[g.param] += generator_trace_im(lam.data(), sigma.data(), n, g.q0, g.axis);
                    ++r;
                } else {
                    for (int f = 0; f < plan.fold_factor; ++f) {
                        noisy_cnot_channel(sigma.data(), n, g.q0, g.q1, p_depol);
                    }
                }
            }
        }
        return out;
    }

    /// p_ik = Re Tr(O_k rho_i) for all samples.
    ProbabilityTable expectation_table(const std::vector<std::vector<cplx>>& obs,
                                       std::size_t dim) const {
        const std::size_t m = data_->size();
        const auto K = obs.size();
        ProbabilityTable probs(m, K);
        const auto d = static_cast<Eigen::Index>(dim);
        for (std::size_t k = 0; k < K; ++k) {
            using RowMajorC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            Eigen::Map<const RowMajorC> o(obs[k].data(), d, d);
            if (mixed_) {
                for (std::size_t i = 0; i < m; ++i) {
                    const QuantumState st = (*data_)[i].state.to_density_matrix();
                    Eigen::Map<const RowMajorC> rho(st.data().data(), d, d);
                    probs(i, k) = (o.cwiseProduct(rho.transpose())).sum().real();
                }
            } else if (complex_) {
                const Eigen::MatrixXcd y = o * psi_c_;
                for (std::size_t i = 0; i < m; ++i) {
                    probs(i, k) = psi_c_.col(static_cast<Eigen::Index>(i))
                                      .dot(y.col(static_cast<Eigen::Index>(i)))
                                      .real();
                }
            } else {
                // psi real: imaginary part of O is antisymmetric and drops out
                const Eigen::MatrixXd a = o.real();
                const Eigen::MatrixXd y = a * psi_r_;
                const Eigen::VectorXd p = psi_r_.cwiseProduct(y).colwise().sum().transpose();
                for (std::size_t i = 0; i < m; ++i) probs(i, k) = p(static_cast<Eigen::Index>(i));
            }
        }
        for (double& p : probs.data) p = std::max(p, 0.0);
        return probs;
    }

  private:
    /// sigma = sum_i coeff_i rho_i as a row-major Hermitian matrix.
    std::vector<cplx> aggregate(const std::vector<double>& coeff, std::size_t dim) const {
        std::vector<cplx> sigma(dim * dim, cplx{0.0});
        const auto d = static_cast<Eigen::Index>(dim);
        if (mixed_) {
            for (std::size_t i = 0; i < coeff.size(); ++i) {
                if (coeff[i] == 0.0) continue;
                const QuantumState st = (*data_)[i].state.to_density_matrix();
                for (std::size_t e = 0; e < dim * dim; ++e) sigma[e] += coeff[i] * st.data()[e];
            }
            return sigma;
        }
        Eigen::VectorXd c(static_cast<Eigen::Index>(coeff.size()));
        for (std::size_t i = 0; i < coeff.size(); ++i) c(static_cast<Eigen::Index>(i)) = coeff[i];
        if (complex_) {
            const Eigen::MatrixXcd s = psi_c_ * c.asDiagonal() * psi_c_.adjoint();
            for (Eigen::Index r = 0; r < d; ++r) {
                for (Eigen::Index col = 0; col < d; ++col) sigma[static_cast<std::size_t>(r * d + col)] = s(r, col);
            }
        } else {
            const Eigen::MatrixXd s = psi_r_ * c.asDiagonal() * psi_r_.transpose();
            for (Eigen::Index r = 0; r < d; ++r) {
                for (Eigen::Index col = 0; col < d; ++col) sigma[static_cast<std::size_t>(r * d + col)] = s(r, col);
            }
        }
        return sigma;
    }

    const WeakClassifier* clf_;
    const Dataset* data_;
    std::vector<int> cls_;
    bool mixed_ = false;
    bool complex_ = false;
    Eigen::MatrixXd psi_r_;
    Eigen::MatrixXcd psi_c_;
    std::vector<std::vector<cplx>> lambdas_;
};

}  // namespace detail

enum class GradientMethod { Auto, StatevectorAdjoint, OperatorAdjoint };

/// Loss, gradient and probabilities for one parameter vector, reusing the
/// engine's buffers across calls (used by the training loop).
class LossFunction {
  public:
    LossFunction(const WeakClassifier& clf, const Dataset& data, const NoiseModel& noise,
                 double prob_floor, GradientMethod method = GradientMethod::Auto)
        : clf_(clf), data_(&data), noise_(noise), floor_(prob_floor) {
        clf_.validate();
        noise_.validate();
        detail::check_dataset(clf_, data);
        plan_ = fold_circuit(clf_.ansatz, noise_.fold_factor);
        bool any_mixed = false;
        for (const auto& s : data) any_mixed = any_mixed || s.state.is_density_matrix();
        if (method == GradientMethod::Auto) {
            // per-sample sweeps cost ~3 M statevector passes, the operator
            // route ~4 K passes over 2^n-column operators
            const double dim = static_cast<double>(std::size_t{1} << clf_.ansatz.num_qubits);
            const double per_sample = 3.0 * static_cast<double>(data.size());
            const double operator_cost = 4.0 * clf_.num_classes * dim;
            method = (noise_.noisy() || any_mixed || operator_cost < per_sample)
                         ? GradientMethod::OperatorAdjoint
                         : GradientMethod::StatevectorAdjoint;
        }
        if (method == GradientMethod::StatevectorAdjoint && (noise_.noisy() || any_mixed)) {
            throw UnsupportedConfiguration("statevector adjoint cannot differentiate noisy circuits");
        }
        method_ = method;
        if (method_ == GradientMethod::OperatorAdjoint) {
            op_ = std::make_unique<detail::OperatorAdjoint>(clf_, data);
        } else {
            sv_ = std::make_unique<detail::StatevectorAdjoint>(clf_, data);
        }
    }

    [[nodiscard]] GradientMethod method() const { return method_; }

    detail::LossEval operator()(std::span<const double> theta, const SampleWeights& weights,
                                bool want_grad = true) {
        if (weights.size() != data_->size()) throw ConfigError("weights/dataset size mismatch");
        if (op_) return op_->evaluate(plan_, theta, noise_.p_depol, weights, floor_, want_grad);
        return sv_->evaluate(plan_, theta, weights, floor_, want_grad);
    }

  private:
    WeakClassifier clf_;
    const Dataset* data_;
    NoiseModel noise_;
    double floor_;
    ExecutionPlan plan_;
    GradientMethod method_ = GradientMethod::Auto;
    std::unique_ptr<detail::OperatorAdjoint> op_;
    std::unique_ptr<detail::StatevectorAdjoint> sv_;
};

// ---------------------------------------------------------------------------
// Forward pass

/// p_k = <x|U^dagger Pi_k U|x> on the measured qubits.
inline std::vector<double> class_probabilities(const WeakClassifier& clf,
                                               const EncodedSample& sample,
                                               const NoiseModel& noise = {}) {
    clf.validate();
    if (sample.state.num_qubits() != clf.ansatz.num_qubits) {
        throw ConfigError("sample qubit count does not match the classifier");
    }
    const QuantumState out = run_ansatz(clf.ansatz, sample.state, noise);
    return measure_projectors(out, clf.measured_qubits);
}

/// Class probabilities for a whole dataset. Noisy circuits go through the
/// Heisenberg observables so the density-matrix cost is paid once.
inline ProbabilityTable class_probabilities(const WeakClassifier& clf, const Dataset& data,
                                            const NoiseModel& noise = {}) {
    clf.validate();
    noise.validate();
    detail::check_dataset(clf, data);
    const auto K = static_cast<std::size_t>(clf.num_classes);
    if (noise.noisy()) {
        const ExecutionPlan plan = fold_circuit(clf.ansatz, noise.fold_factor);
        const auto cls = detail::class_of_basis(clf);
        auto obs = detail::heisenberg_observables(plan, clf.ansatz.theta, noise.p_depol, cls,
                                                  clf.num_classes, nullptr);
        detail::OperatorAdjoint engine(clf, data);
        return engine.expectation_table(obs, std::size_t{1} << clf.ansatz.num_qubits);
    }
    ProbabilityTable table(data.size(), K);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto p = class_probabilities(clf, data[i], noise);
        std::copy(p.begin(), p.end(), table.data.begin() + static_cast<std::ptrdiff_t>(i * K));
    }
    return table;
}

/// L = -sum_i w_i log max(p_{i,y_i}, prob_floor).
inline double weighted_cross_entropy(const WeakClassifier& clf, const Dataset& data,
                                     const SampleWeights& weights, const NoiseModel& noise = {},
                                     double prob_floor = 1e-12) {
    if (data.size() != weights.size()) throw ConfigError("weights/dataset size mismatch");
    const ProbabilityTable p = class_probabilities(clf, data, noise);
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        loss -= weights[i] * std::log(std::max(p(i, static_cast<std::size_t>(data[i].label)), prob_floor));
    }
    return loss;
}

/// Exact dL/dtheta by adjoint differentiation (same layout as theta).
inline std::vector<double> gradient(const WeakClassifier& clf, const Dataset& data,
                                    const SampleWeights& weights, const NoiseModel& noise = {},
                                    double prob_floor = 1e-12,
                                    GradientMethod method = GradientMethod::Auto) {
    LossFunction f(clf, data, noise, prob_floor, method);
    return f(clf.ansatz.theta, weights, true).grad;
}

/// Parameter-shift oracle: dp/dtheta = (p(theta + pi/2) - p(theta - pi/2)) / 2,
/// chained through dL/dp. Uses only the plain forward simulator.
inline std::vector<double> parameter_shift_gradient(const WeakClassifier& clf, const Dataset& data,
                                                    const SampleWeights& weights,
                                                    const NoiseModel& noise = {},
                                                    double prob_floor = 1e-12) {
    if (data.size() != weights.size()) throw ConfigError("weights/dataset size mismatch");
    clf.validate();
    detail::check_dataset(clf, data);
    auto forward = [&](const WeakClassifier& c) {
        std::vector<std::vector<double>> p;
        for (const auto& s : data) p.push_back(class_probabilities(c, s, noise));
        return p;
    };
    const auto p0 = forward(clf);
    std::vector<double> coeff(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        coeff[i] = detail::ce_coefficient(weights[i], p0[i][static_cast<std::size_t>(data[i].label)],
                                          prob_floor);
    }
    std::vector<double> grad(clf.ansatz.num_params(), 0.0);
    WeakClassifier shifted = clf;
    for (std::size_t j = 0; j < grad.size(); ++j) {
        shifted.ansatz.theta[j] = clf.ansatz.theta[j] + std::numbers::pi / 2;
        const auto plus = forward(shifted);
        shifted.ansatz.theta[j] = clf.ansatz.theta[j] - std::numbers::pi / 2;
        const auto minus = forward(shifted);
        shifted.ansatz.theta[j] = clf.ansatz.theta[j];
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto y = static_cast<std::size_t>(data[i].label);
            grad[j] += coeff[i] * 0.5 * (plus[i][y] - minus[i][y]);
        }
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Training

struct TraceRow {
    int iteration = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
};

inline void write_loss_trace(std::ostream& os, const std::vector<TraceRow>& rows) {
    os << "iteration,loss,train_accuracy\n" << std::setprecision(17);
    for (const auto& r : rows) os << r.iteration << "," << r.loss << "," << r.train_accuracy << "\n";
}

/// Full-batch Adam on the weighted cross-entropy. Each trace row holds the
/// loss and accuracy at the parameters before that iteration's update.
inline WeakClassifier train(const WeakClassifier& init, const Dataset& data,
                            const SampleWeights& weights, const NoiseModel& noise,
                            const TrainConfig& config, std::vector<TraceRow>* trace = nullptr) {
    config.validate();
    WeakClassifier clf = init;
    if (config.iterations == 0) return clf;
    LossFunction loss_fn(clf, data, noise, config.prob_floor);
    std::vector<double>& theta = clf.ansatz.theta;
    std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0);
    double b1t = 1.0, b2t = 1.0;
    for (int it = 0; it < config.iterations; ++it) {
        const auto eval = loss_fn(theta, weights, true);
        if (!std::isfinite(eval.loss)) {
            throw NumericalError("training: non-finite loss at iteration " + std::to_string(it));
        }
        for (double g : eval.grad) {
            if (!std::isfinite(g)) {
                throw NumericalError("training: non-finite gradient at iteration " + std::to_string(it));
            }
        }
        if (trace != nullptr) {
            std::size_t correct = 0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                correct += argmax_class(eval.probs.row(i)) == data[i].label ? 1 : 0;
            }
            trace->push_back({it, eval.loss, static_cast<double>(correct) / static_cast<double>(data.size())});
        }
        b1t *= config.beta1;
        b2t *= config.beta2;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double g = eval.grad[j];
            m1[j] = config.beta1 * m1[j] + (1.0 - config.beta1) * g;
            m2[j] = config.beta2 * m2[j] + (1.0 - config.beta2) * g * g;
            const double mhat = m1[j] / (1.0 - b1t);
            const double vhat = m2[j] / (1.0 - b2t);
            theta[j] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    }
    return clf;
}

// ---------------------------------------------------------------------------
// Prediction

inline int predict(std::span<const double> probabilities) { return argmax_class(probabilities); }

inline int predict(const WeakClassifier& clf, const EncodedSample& sample,
                   const NoiseModel& noise = {}) {
    return argmax_class(class_probabilities(clf, sample, noise));
}

inline std::vector<int> predict_all(const WeakClassifier& clf, const Dataset& data,
                                    const NoiseModel& noise = {}) {
    const ProbabilityTable p = class_probabilities(clf, data, noise);
    std::vector<int> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = argmax_class(p.row(i));
    return out;
}

/// e = sum_i w_i 1(prediction_i != y_i).
inline double error_rate(std::span<const int> predictions, const Dataset& data,
                         const SampleWeights& weights) {
    if (predictions.size() != data.size() || weights.size() != data.size()) {
        throw ConfigError("error_rate: size mismatch");
    }
    double e = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (predictions[i] != data[i].label) e += weights[i];
    }
    return e;
}

inline double error_rate(const WeakClassifier& clf, const Dataset& data,
                         const SampleWeights& weights, const NoiseModel& noise = {}) {
    const auto pred = predict_all(clf, data, noise);
    return error_rate(pred, data, weights);
}

inline double accuracy(std::span<const int> predictions, const Dataset& data) {
    return 1.0 - error_rate(predictions, data, SampleWeights::uniform(data.size()));
}

}  // namespace evqc
