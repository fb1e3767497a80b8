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
 * Dataset pipelines: the optdigits handwritten-digit corpus (digits 1, 3, 5
 * and 7) and ground states of the open cluster-Ising chain
 *
 *   H = -J sum Z_i X_{i+1} Z_{i+2} - h1 sum X_i X_{i+1} - h2 sum X_i
 *
 * labelled by a string order parameter.
 */
#pragma once

#include "evqc/vqc.hpp"

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace evqc {

// ---------------------------------------------------------------------------
// Handwritten digits

enum class Split { Train, Test };

struct DigitSample {
    std::vector<double> features;  // 64 pixels scaled to [0, 1]
    int label = 0;                 // 1, 3, 5, 7 -> 0, 1, 2, 3
};

struct ClassicalDataset {
    std::vector<DigitSample> samples;
    Split split = Split::Train;
};

inline constexpr std::array<int, 4> kDigitClasses = {1, 3, 5, 7};

/// Parses one optdigits file (64 integer pixels in 0..16, then the digit),
/// keeping digits 1, 3, 5 and 7 in file order.
inline ClassicalDataset parse_digits(std::istream& is, Split split) {
    ClassicalDataset out;
    out.split = split;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<int> values;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(tok, &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used == 0 || used != tok.size()) {
                throw ConfigError("digits line " + std::to_string(lineno) + ": bad field '" + tok + "'");
            }
            values.push_back(v);
        }
        if (values.size() != 65) {
            throw ConfigError("digits line " + std::to_string(lineno) + ": expected 65 fields, got " +
                              std::to_string(values.size()));
        }
        const int digit = values[64];
        if (digit < 0 || digit > 9) {
            throw ConfigError("digits line " + std::to_string(lineno) + ": unknown digit " +
                              std::to_string(digit));
        }
        DigitSample s;
        s.features.resize(64);
        for (std::size_t j = 0; j < 64; ++j) {
            if (values[j] < 0 || values[j] > 16) {
                throw ConfigError("digits line " + std::to_string(lineno) + ": pixel out of range");
            }
            s.features[j] = values[j] / 16.0;
        }
        int cls = -1;
        for (std::size_t k = 0; k < kDigitClasses.size(); ++k) {
            if (kDigitClasses[k] == digit) cls = static_cast<int>(k);
        }
        if (cls < 0) continue;
        s.label = cls;
        out.samples.push_back(std::move(s));
    }
    return out;
}

inline ClassicalDataset load_digits_file(const std::string& path, Split split) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open digits file: " + path);
    return parse_digits(is, split);
}

inline std::pair<ClassicalDataset, ClassicalDataset> load_digits(const std::string& train_path,
                                                                 const std::string& test_path) {
    return {load_digits_file(train_path, Split::Train), load_digits_file(test_path, Split::Test)};
}

/// Amplitude-encodes every sample (6 qubits for 64 pixels).
inline Dataset encode(const ClassicalDataset& data) {
    Dataset out;
    out.reserve(data.samples.size());
    for (const auto& s : data.samples) out.push_back({amplitude_encode(s.features), s.label});
    return out;
}

// ---------------------------------------------------------------------------
// Cluster-Ising chain

/// Implicit real-symmetric Hamiltonian; qubit 0 is the most significant bit.
class SptHamiltonian {
  public:
    SptHamiltonian(int num_qubits, double j, double h1, double h2)
        : n_(num_qubits), j_(j), h1_(h1), h2_(h2) {
        if (num_qubits < 3) throw ConfigError("spt hamiltonian needs at least 3 qubits");
        if (num_qubits > 24) throw ConfigError("spt hamiltonian: at most 24 qubits");
        if (!std::isfinite(j) || !std::isfinite(h1) || !std::isfinite(h2)) {
            throw ConfigError("spt hamiltonian: non-finite coupling");
        }
    }

    [[nodiscard]] int num_qubits() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return std::size_t{1} << n_; }

    /// out = H in.
    void apply(std::span<const double> in, std::span<double> out) const {
        const std::size_t d = dim();
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t b = 0; b < d; ++b) {
            const double v = in[b];
            if (v == 0.0) continue;
            for (int i = 0; i + 2 < n_; ++i) {
                const bool z0 = b & bit(i), z2 = b & bit(i + 2);
                out[b ^ bit(i + 1)] -= j_ * ((z0 != z2) ? -v : v);
            }
            for (int i = 0; i + 1 < n_; ++i) out[b ^ bit(i) ^ bit(i + 1)] -= h1_ * v;
            for (int i = 0; i < n_; ++i) out[b ^ bit(i)] -= h2_ * v;
        }
    }

  private:
    [[nodiscard]] std::size_t bit(int q) const { return std::size_t{1} << (n_ - 1 - q); }

    int n_;
    double j_, h1_, h2_;
};

inline SptHamiltonian build_spt_hamiltonian(int num_qubits, double j, double h1, double h2) {
    return SptHamiltonian(num_qubits, j, h1, h2);
}

struct GroundState {
    double energy = 0.0;
    std::vector<double> vector;  // real, unit norm
    double residual = 0.0;
    int iterations = 0;

    [[nodiscard]] QuantumState state() const {
        std::vector<cplx> amps(vector.begin(), vector.end());
        return QuantumState::from_amplitudes(std::move(amps));
    }
};

/// Lowest eigenpair by Lanczos with full reorthogonalization from the
/// normalized all-ones vector. Throws NumericalError unless
/// ||H v - E v|| < tol.
inline GroundState ground_state(const SptHamiltonian& h, double tol = 1e-8, int max_krylov = 400) {
    const std::size_t d = h.dim();
    const int kmax = static_cast<int>(std::min<std::size_t>(d, static_cast<std::size_t>(max_krylov)));
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> w(d);
    basis.emplace_back(d, 1.0 / std::sqrt(static_cast<double>(d)));

    auto ritz = [&](int m, Eigen::VectorXd& coeffs) {
        Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
        for (int i = 0; i < m; ++i) diag(i) = alpha[static_cast<std::size_t>(i)];
        for (int i = 0; i + 1 < m; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) throw NumericalError("lanczos: tridiagonal solve failed");
        coeffs = es.eigenvectors().col(0);
        return es.eigenvalues()(0);
    };

    auto assemble = [&](int m, const Eigen::VectorXd& coeffs) {
        GroundState gs;
        gs.vector.assign(d, 0.0);
        for (int i = 0; i < m; ++i) {
            const double c = coeffs(i);
            const auto& q = basis[static_cast<std::size_t>(i)];
            for (std::size_t b = 0; b < d; ++b) gs.vector[b] += c * q[b];
        }
        double nrm = 0.0;
        for (double x : gs.vector) nrm += x * x;
        nrm = std::sqrt(nrm);
        for (double& x : gs.vector) x /= nrm;
        std::vector<double> hv(d);
        h.apply(gs.vector, hv);
        double e = 0.0;
        for (std::size_t b = 0; b < d; ++b) e += gs.vector[b] * hv[b];
        double r2 = 0.0;
        for (std::size_t b = 0; b < d; ++b) r2 += (hv[b] - e * gs.vector[b]) * (hv[b] - e * gs.vector[b]);
        gs.energy = e;
        gs.residual = std::sqrt(r2);
        gs.iterations = m;
        return gs;
    };

    GroundState best;
    for (int m = 1; m <= kmax; ++m) {
        const auto& q = basis.back();
        h.apply(q, w);
        double a = 0.0;
        for (std::size_t b = 0; b < d; ++b) a += q[b] * w[b];
        alpha.push_back(a);
        // full reorthogonalization (two passes)
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& v : basis) {
                double c = 0.0;
                for (std::size_t b = 0; b < d; ++b) c += v[b] * w[b];
                for (std::size_t b = 0; b < d; ++b) w[b] -= c * v[b];
            }
        }
        double bnorm = 0.0;
        for (double x : w) bnorm += x * x;
        bnorm = std::sqrt(bnorm);
        const bool invariant = bnorm < 1e-12 * std::max(1.0, std::abs(a));
        if (m % 10 == 0 || m == kmax || invariant) {
            Eigen::VectorXd coeffs;
            ritz(m, coeffs);
            // |beta_m s_m| bounds the residual of the Ritz pair
            if (invariant || bnorm * std::abs(coeffs(m - 1)) < 0.1 * tol || m == kmax) {
                best = assemble(m, coeffs);
                if (best.residual < tol) return best;
                if (invariant || m == kmax) break;
            }
        }
        beta.push_back(bnorm);
        for (double& x : w) x /= bnorm;
        basis.push_back(w);
    }
    throw NumericalError("lanczos did not converge: residual " + std::to_string(best.residual) +
                         " after " + std::to_string(best.iterations) + " steps");
}

/// S = <Z_0 X_1 X_3 ... X_{n-2} Z_{n-1}> (odd n; X on every odd site).
inline double string_order_parameter(const QuantumState& state) {
    const int n = state.num_qubits();
    if (state.is_density_matrix()) throw ConfigError("string order: needs a statevector");
    if (n < 3 || n % 2 == 0) throw ConfigError("string order: needs an odd chain of >= 3 qubits");
    std::size_t mask = 0;
    for (int q = 1; q <= n - 2; q += 2) mask |= detail::qubit_bit(n, q);
    const std::size_t zmask = detail::qubit_bit(n, 0) | detail::qubit_bit(n, n - 1);
    const auto psi = state.data();
    double acc = 0.0;
    for (std::size_t b = 0; b < psi.size(); ++b) {
        const double sign = (std::popcount(b & zmask) & 1) ? -1.0 : 1.0;
        acc += sign * (std::conj(psi[b ^ mask]) * psi[b]).real();
    }
    return acc;
}

inline int spt_label(double string_order, double threshold) {
    return std::abs(string_order) > threshold ? 1 : 0;
}

struct SptConfig {
    int num_qubits = 9;
    double coupling_j = 1.0;
    double h1_min = -1.6;
    double h1_max = 1.6;
    double h2_min = 0.0;
    double h2_max = 1.6;
    int num_samples = 400;
    std::uint64_t seed = 0;
    double threshold = 0.1;

    void validate() const {
        if (num_qubits < 3 || num_qubits % 2 == 0) throw ConfigError("spt: num_qubits must be odd and >= 3");
        if (!(h1_max >= h1_min) || !(h2_max >= h2_min)) throw ConfigError("spt: empty coupling rectangle");
        if (num_samples < 1) throw ConfigError("spt: num_samples must be >= 1");
        if (!(threshold >= 0.0)) throw ConfigError("spt: threshold must be >= 0");
        if (!(coupling_j != 0.0)) throw ConfigError("spt: J must be non-zero");
    }
};

struct SptSample {
    double h1_over_j = 0.0;
    double h2_over_j = 0.0;
    QuantumState ground_state;
    double string_order = 0.0;
    int label = 0;  // 1 = SPT
    double energy = 0.0;
};

/// Ground state, string order and label at one coupling point.
inline SptSample solve_spt_point(const SptConfig& cfg, double h1_over_j, double h2_over_j) {
    const SptHamiltonian h(cfg.num_qubits, cfg.coupling_j, h1_over_j * cfg.coupling_j,
                           h2_over_j * cfg.coupling_j);
    GroundState gs;
    try {
        gs = ground_state(h);
    } catch (const NumericalError& e) {
        std::ostringstream os;
        os << e.what() << " at (h1/J, h2/J) = (" << h1_over_j << ", " << h2_over_j << ")";
        throw NumericalError(os.str());
    }
    SptSample s{h1_over_j, h2_over_j, gs.state(), 0.0, 0, gs.energy};
    s.string_order = string_order_parameter(s.ground_state);
    s.label = spt_label(s.string_order, cfg.threshold);
    return s;
}

/// M_s uniform points in the coupling rectangle, deterministic per seed.
inline std::vector<SptSample> generate_spt_dataset(const SptConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::vector<SptSample> out;
    out.reserve(static_cast<std::size_t>(cfg.num_samples));
    for (int i = 0; i < cfg.num_samples; ++i) {
        const double h1 = cfg.h1_min + (cfg.h1_max - cfg.h1_min) * uniform01(rng);
        const double h2 = cfg.h2_min + (cfg.h2_max - cfg.h2_min) * uniform01(rng);
        out.push_back(solve_spt_point(cfg, h1, h2));
    }
    return out;
}

inline Dataset to_dataset(const std::vector<SptSample>& samples) {
    Dataset out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.ground_state, s.label});
    return out;
}

/// CSV with a `# key=value,...` header line; ground states go to a sidecar of
/// little-endian interleaved (re, im) doubles, one sample after another.
inline void write_spt_dataset(const std::string& csv_path, const std::string& bin_path,
                              const SptConfig& cfg, const std::vector<SptSample>& samples) {
    static_assert(std::endian::native == std::endian::little, "sidecar writer assumes little-endian");
    std::ofstream csv(csv_path);
    if (!csv) throw ConfigError("cannot open " + csv_path);
    csv << std::setprecision(17);
    csv << "# N_q=" << cfg.num_qubits << ",seed=" << cfg.seed << ",threshold=" << cfg.threshold
        << ",J=" << cfg.coupling_j << ",h1_range=" << cfg.h1_min << ":" << cfg.h1_max
        << ",h2_range=" << cfg.h2_min << ":" << cfg.h2_max << ",num_samples=" << samples.size() << "\n";
    csv << "h1_over_J,h2_over_J,string_order,label,energy\n";
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw ConfigError("cannot open " + bin_path);
    for (const auto& s : samples) {
        csv << s.h1_over_j << "," << s.h2_over_j << "," << s.string_order << "," << s.label << ","
            << s.energy << "\n";
        for (const cplx& a : s.ground_state.data()) {
            const double re = a.real(), im = a.imag();
            bin.write(reinterpret_cast<const char*>(&re), sizeof re);
            bin.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
    }
}

inline std::pair<SptConfig, std::vector<SptSample>> read_spt_dataset(const std::string& csv_path,
                                                                     const std::string& bin_path) {
    std::ifstream csv(csv_path);
    if (!csv) throw ConfigError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(csv, line) || line.rfind("# ", 0) != 0) throw ConfigError("spt csv: missing header");
    SptConfig cfg;
    std::size_t count = 0;
    {
        std::stringstream ss(line.substr(2));
        std::string kv;
        while (std::getline(ss, kv, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("spt csv: bad header field " + kv);
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            auto range = [&](double& lo, double& hi) {
                const auto colon = val.find(':');
                if (colon == std::string::npos) throw ConfigError("spt csv: bad range " + val);
                lo = std::stod(val.substr(0, colon));
                hi = std::stod(val.substr(colon + 1));
            };
            if (key == "N_q") cfg.num_qubits = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "threshold") cfg.threshold = std::stod(val);
            else if (key == "J") cfg.coupling_j = std::stod(val);
            else if (key == "h1_range") range(cfg.h1_min, cfg.h1_max);
            else if (key == "h2_range") range(cfg.h2_min, cfg.h2_max);
            else if (key == "num_samples") count = std::stoull(val);
            else throw ConfigError("spt csv: unknown header key " + key);
        }
    }
    cfg.num_samples = static_cast<int>(count);
    std::getline(csv, line);  // column names
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw ConfigError("cannot open " + bin_path);
    const std::size_t d = std::size_t{1} << cfg.num_qubits;
    std::vector<SptSample> out;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (auto& x : f) {
            if (!std::getline(ss, x, ',')) throw ConfigError("spt csv: short row");
        }
        std::vector<cplx> amps(d);
        for (auto& a : amps) {
            double re = 0.0, im = 0.0;
            bin.read(reinterpret_cast<char*>(&re), sizeof re);
            bin.read(reinterpret_cast<char*>(&im), sizeof im);
            if (!bin) throw ConfigError("spt sidecar truncated");
            a = {re, im};
        }
        out.push_back({std::stod(f[0]), std::stod(f[1]), QuantumState::from_amplitudes(std::move(amps)),
                       std::stod(f[2]), std::stoi(f[3]), std::stod(f[4])});
    }
    if (out.size() != count) throw ConfigError("spt csv: row count does not match header");
    return {cfg, std::move(out)};
}

}  // namespace evqc
