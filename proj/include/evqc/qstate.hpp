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
 * Statevector and density-matrix backends, single-qubit rotations and the
 * depolarizing CNOT channel.
 *
 * Qubit index 0 is the most significant bit of the computational-basis
 * index, i.e. basis state |b_0 b_1 ... b_{n-1}> has index sum_q b_q 2^{n-1-q}.
 */
#pragma once

#include "evqc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace evqc {

using cplx = std::complex<double>;

enum class Backend { Statevector, DensityMatrix };
enum class Axis { X, Z };

/// Per-CNOT depolarizing strength and the number of consecutive noisy CNOTs
/// executed per logical CNOT (gate folding).
struct NoiseModel {
    double p_depol = 0.0;
    int fold_factor = 1;

    [[nodiscard]] bool noisy() const { return p_depol > 0.0; }

    void validate() const {
        if (!(p_depol >= 0.0 && p_depol <= 1.0)) {
            throw ConfigError("noise: p_depol must lie in [0,1], got " +
                              std::to_string(p_depol));
        }
        if (fold_factor < 1 || fold_factor % 2 == 0) {
            throw ConfigError("noise: fold_factor must be an odd integer >= 1, got " +
                              std::to_string(fold_factor));
        }
    }
};

namespace detail {

inline std::size_t qubit_bit(int num_qubits, int qubit) {
    return std::size_t{1} << (num_qubits - 1 - qubit);
}

inline void check_qubit(int num_qubits, int qubit) {
    if (qubit < 0 || qubit >= num_qubits) {
        throw ConfigError("qubit index " + std::to_string(qubit) +
                                " out of range for " + std::to_string(num_qubits) +
                                " qubits");
    }
}

// The kernels below act on a row-major (2^n x ncols) block whose row index is
// the basis index. ncols == 1 is a statevector; ncols == 2^n with the
// column-side variants gives density-matrix conjugation.

template <typename PairOp>
inline void for_each_row_pair(cplx* data, int num_qubits, std::size_t ncols, int qubit,
                              PairOp&& op) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    const std::size_t bit = qubit_bit(num_qubits, qubit);
    for (std::size_t base = 0; base < dim; base += 2 * bit) {
        for (std::size_t off = 0; off < bit; ++off) {
            cplx* a = data + (base + off) * ncols;
            cplx* b = data + (base + off + bit) * ncols;
            for (std::size_t c = 0; c < ncols; ++c) op(a[c], b[c]);
        }
    }
}

// exp(-i theta X / 2) = [[c, -is], [-is, c]]
inline void rx_rows(cplx* data, int n, std::size_t ncols, int q, double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    for_each_row_pair(data, n, ncols, q, [c, s](cplx& a, cplx& b) {
        const double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
        a = cplx(c * ar + s * bi, c * ai - s * br);
        b = cplx(c * br + s * ai, c * bi - s * ar);
    });
}

// exp(-i theta Z / 2) = diag(e^{-i theta/2}, e^{i theta/2})
inline void rz_rows(cplx* data, int n, std::size_t ncols, int q, double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    for_each_row_pair(data, n, ncols, q, [c, s](cplx& a, cplx& b) {
        const double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
        a = cplx(c * ar + s * ai, c * ai - s * ar);
        b = cplx(c * br - s * bi, c * bi + s * br);
    });
}

inline void rotation_rows(cplx* data, int n, std::size_t ncols, int q, Axis axis,
                          double theta) {
    if (axis == Axis::X) {
        rx_rows(data, n, ncols, q, theta);
    } else {
        rz_rows(data, n, ncols, q, theta);
    }
}

inline void cnot_rows(cplx* data, int n, std::size_t ncols, int control, int target) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t cbit = qubit_bit(n, control), tbit = qubit_bit(n, target);
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cbit) && !(i & tbit)) {
            cplx* a = data + i * ncols;
            cplx* b = data + (i | tbit) * ncols;
            for (std::size_t c = 0; c < ncols; ++c) std::swap(a[c], b[c]);
        }
    }
}

/// rho <- U rho U^dagger for a rotation U on `q` (rows by U, columns by conj(U)).
inline void rotation_conj(cplx* rho, int n, int q, Axis axis, double theta) {
    const std::size_t dim = std::size_t{1} << n;
    rotation_rows(rho, n, dim, q, axis, theta);
    // conj(exp(-i theta s/2)) == exp(+i theta s/2) for s in {X, Z}
    for (std::size_t r = 0; r < dim; ++r) rotation_rows(rho + r * dim, n, 1, q, axis, -theta);
}

inline void cnot_conj(cplx* rho, int n, int control, int target) {
    const std::size_t dim = std::size_t{1} << n;
    cnot_rows(rho, n, dim, control, target);
    for (std::size_t r = 0; r < dim; ++r) cnot_rows(rho + r * dim, n, 1, control, target);
}

/// rho <- (1-p) rho + p * (I_4/4 (x) Tr_pair rho) on the (qa, qb) pair.
inline void depolarize_pair(cplx* rho, int n, int qa, int qb, double p) {
    if (p == 0.0) return;
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t ba = qubit_bit(n, qa), bb = qubit_bit(n, qb);
    const std::size_t pair = ba | bb;
    const std::size_t offs[4] = {0, bb, ba, ba | bb};
    for (std::size_t r = 0; r < dim; ++r) {
        if (r & pair) continue;
        for (std::size_t c = 0; c < dim; ++c) {
            if (c & pair) continue;
            cplx tr = 0.0;
            for (std::size_t s : offs) tr += rho[(r | s) * dim + (c | s)];
            const cplx mixed = 0.25 * p * tr;
            for (std::size_t s : offs) {
                for (std::size_t t : offs) {
                    cplx& e = rho[(r | s) * dim + (c | t)];
                    e *= (1.0 - p);
                    if (s == t) e += mixed;
                }
            }
        }
    }
}

/// One application of xi_CX: (1-p) U rho U^dagger + p I/4 (x) Tr_pair rho.
/// The channel is self-adjoint, so the same routine propagates observables.
inline void noisy_cnot_channel(cplx* rho, int n, int control, int target, double p) {
    cnot_conj(rho, n, control, target);
    depolarize_pair(rho, n, control, target, p);
}

/// Pauli index: 0=I, 1=X, 2=Y, 3=Z.
inline void pauli_rows(cplx* data, int n, std::size_t ncols, int q, int pauli) {
    switch (pauli) {
        case 0:
            return;
        case 1:
            for_each_row_pair(data, n, ncols, q, [](cplx& a, cplx& b) { std::swap(a, b); });
            return;
        case 2:  // Y = [[0,-i],[i,0]]
            for_each_row_pair(data, n, ncols, q, [](cplx& a, cplx& b) {
                const cplx na = cplx(b.imag(), -b.real());
                const cplx nb = cplx(-a.imag(), a.real());
                a = na;
                b = nb;
            });
            return;
        case 3:
            for_each_row_pair(data, n, ncols, q, [](cplx&, cplx& b) { b = -b; });
            return;
        default:
            throw std::invalid_argument("pauli index must be 0..3");
    }
}

}  // namespace detail

/// A pure statevector (2^n amplitudes) or a density matrix (2^n x 2^n,
/// row-major).
class QuantumState {
  public:
    QuantumState() = default;

    static QuantumState zero(int num_qubits, Backend backend = Backend::Statevector) {
        return basis(num_qubits, 0, backend);
    }

    static QuantumState basis(int num_qubits, std::size_t index,
                              Backend backend = Backend::Statevector) {
        QuantumState s(num_qubits, backend);
        if (index >= s.dim()) throw ConfigError("basis index out of range");
        if (backend == Backend::Statevector) {
            s.data_[index] = 1.0;
        } else {
            s.data_[index * s.dim() + index] = 1.0;
        }
        return s;
    }

    /// Wraps amplitudes as-is; the length must be a power of two.
    static QuantumState from_amplitudes(std::vector<cplx> amps) {
        const int n = log2_exact(amps.size());
        QuantumState s;
        s.num_qubits_ = n;
        s.backend_ = Backend::Statevector;
        s.data_ = std::move(amps);
        return s;
    }

    static QuantumState from_density_matrix(int num_qubits, std::vector<cplx> rho) {
        QuantumState s;
        s.num_qubits_ = num_qubits;
        s.backend_ = Backend::DensityMatrix;
        const std::size_t d = std::size_t{1} << num_qubits;
        if (rho.size() != d * d) throw ConfigError("density matrix has wrong size");
        s.data_ = std::move(rho);
        return s;
    }

    /// |psi><psi| for a statevector, identity for a density matrix.
    [[nodiscard]] QuantumState to_density_matrix() const {
        if (backend_ == Backend::DensityMatrix) return *this;
        const std::size_t d = dim();
        std::vector<cplx> rho(d * d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) rho[r * d + c] = data_[r] * std::conj(data_[c]);
        }
        return from_density_matrix(num_qubits_, std::move(rho));
    }

    [[nodiscard]] int num_qubits() const { return num_qubits_; }
    [[nodiscard]] Backend backend() const { return backend_; }
    [[nodiscard]] bool is_density_matrix() const { return backend_ == Backend::DensityMatrix; }
    [[nodiscard]] std::size_t dim() const { return std::size_t{1} << num_qubits_; }

    [[nodiscard]] std::span<const cplx> data() const { return data_; }
    [[nodiscard]] std::span<cplx> data() { return data_; }

    [[nodiscard]] const cplx& amplitude(std::size_t i) const { return data_.at(i); }
    [[nodiscard]] const cplx& element(std::size_t r, std::size_t c) const {
        return data_.at(r * dim() + c);
    }

    /// sum |psi|^2 for statevectors, Re Tr(rho) for density matrices.
    [[nodiscard]] double norm_or_trace() const {
        double acc = 0.0;
        if (backend_ == Backend::Statevector) {
            for (const cplx& a : data_) acc += std::norm(a);
        } else {
            for (std::size_t i = 0; i < dim(); ++i) acc += data_[i * dim() + i].real();
        }
        return acc;
    }

    /// Checks the normalization (and Hermiticity for density matrices).
    /// Eigenvalue positivity is left to callers that can afford a dense solve.
    void validate(double tol = 1e-10) const {
        const double nt = norm_or_trace();
        if (std::abs(nt - 1.0) > tol) {
            throw NumericalError("state normalization off by " + std::to_string(nt - 1.0));
        }
        if (backend_ == Backend::DensityMatrix) {
            const std::size_t d = dim();
            for (std::size_t r = 0; r < d; ++r) {
                for (std::size_t c = r; c < d; ++c) {
                    if (std::abs(data_[r * d + c] - std::conj(data_[c * d + r])) > tol) {
                        throw NumericalError("density matrix is not Hermitian");
                    }
                }
            }
        }
    }

  private:
    QuantumState(int num_qubits, Backend backend) : num_qubits_(num_qubits), backend_(backend) {
        if (num_qubits < 1 || num_qubits > 30) {
            throw ConfigError("num_qubits must be in [1,30]");
        }
        const std::size_t d = dim();
        data_.assign(backend == Backend::Statevector ? d : d * d, cplx{0.0});
    }

    static int log2_exact(std::size_t n) {
        if (n < 2 || (n & (n - 1)) != 0) {
            throw ConfigError("amplitude count must be a power of two >= 2");
        }
        int k = 0;
        while ((std::size_t{1} << k) < n) ++k;
        return k;
    }

    int num_qubits_ = 0;
    Backend backend_ = Backend::Statevector;
    std::vector<cplx> data_;
};

/// R_axis(angle) = exp(-i angle sigma_axis / 2) on `qubit`; conjugation for
/// density matrices.
inline void apply_single_qubit_rotation(QuantumState& state, int qubit, Axis axis,
                                        double angle) {
    detail::check_qubit(state.num_qubits(), qubit);
    if (state.is_density_matrix()) {
        detail::rotation_conj(state.data().data(), state.num_qubits(), qubit, axis, angle);
    } else {
        detail::rotation_rows(state.data().data(), state.num_qubits(), 1, qubit, axis, angle);
    }
}

/// Applies the noisy CNOT channel `noise.fold_factor` times in sequence.
/// A statevector only accepts the noiseless gate.
inline void apply_cnot(QuantumState& state, int control, int target,
                       const NoiseModel& noise = {}) {
    const int n = state.num_qubits();
    detail::check_qubit(n, control);
    detail::check_qubit(n, target);
    if (control == target) throw ConfigError("cnot: control and target must differ");
    noise.validate();
    if (!state.is_density_matrix()) {
        if (noise.noisy()) {
            throw UnsupportedConfiguration(
                "depolarizing CNOT needs the density-matrix backend "
                "(use apply_channel_trajectory for Monte-Carlo unraveling)");
        }
        // CNOT^k == CNOT for odd k
        detail::cnot_rows(state.data().data(), n, 1, control, target);
        return;
    }
    for (int f = 0; f < noise.fold_factor; ++f) {
        detail::noisy_cnot_channel(state.data().data(), n, control, target, noise.p_depol);
    }
}

/// Monte-Carlo unraveling of the noisy CNOT on a statevector: each folded copy
/// applies U_CX followed by a uniformly drawn two-qubit Pauli with probability
/// p (the identity Pauli is among the 16, so the identity branch carries
/// weight 1 - p + p/16).
template <typename Rng>
void apply_channel_trajectory(QuantumState& state, int control, int target,
                              const NoiseModel& noise, Rng& rng) {
    static_assert(sizeof(typename Rng::result_type) >= 8, "needs a 64-bit generator");
    const int n = state.num_qubits();
    detail::check_qubit(n, control);
    detail::check_qubit(n, target);
    if (control == target) throw ConfigError("cnot: control and target must differ");
    if (state.is_density_matrix()) {
        throw UnsupportedConfiguration("trajectory unraveling requires a statevector");
    }
    noise.validate();
    cplx* psi = state.data().data();
    for (int f = 0; f < noise.fold_factor; ++f) {
        detail::cnot_rows(psi, n, 1, control, target);
        if (!noise.noisy()) continue;
        // 53-bit uniform in [0,1), portable across standard libraries
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u >= noise.p_depol) continue;
        const auto pick = static_cast<int>((rng() >> 32) & 15u);
        detail::pauli_rows(psi, n, 1, control, pick >> 2);
        detail::pauli_rows(psi, n, 1, target, pick & 3);
    }
}

/// Outcome probabilities of the computational-basis projectors on
/// `measured_qubits`, ordered by binary value with the first listed qubit as
/// the most significant bit.
inline std::vector<double> measure_projectors(const QuantumState& state,
                                              std::span<const int> measured_qubits) {
    const int n = state.num_qubits();
    if (measured_qubits.empty()) throw ConfigError("measure: empty qubit list");
    std::vector<std::size_t> bits;
    for (int q : measured_qubits) {
        detail::check_qubit(n, q);
        const std::size_t b = detail::qubit_bit(n, q);
        for (std::size_t e : bits) {
            if (e == b) throw ConfigError("measure: duplicate qubit index");
        }
        bits.push_back(b);
    }
    const std::size_t m = bits.size();
    std::vector<double> probs(std::size_t{1} << m, 0.0);
    const std::size_t d = state.dim();
    const auto data = state.data();
    for (std::size_t i = 0; i < d; ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < m; ++j) k = (k << 1) | ((i & bits[j]) ? 1u : 0u);
        probs[k] += state.is_density_matrix() ? data[i * d + i].real() : std::norm(data[i]);
    }
    for (double& p : probs) p = std::max(p, 0.0);
    return probs;
}

}  // namespace evqc
