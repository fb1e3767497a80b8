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
 * Layered hardware-efficient ansatz: every layer applies
 * G(q) = R_x(t1) R_z(t2) R_x(t3) to each qubit and then an open CNOT ladder
 * CNOT(0,1) CNOT(1,2) ... CNOT(n-2,n-1). Amplitude encoding and gate folding
 * live here too.
 */
#pragma once

#include "evqc/qstate.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace evqc {

/// Layered parameterized circuit with a flat parameter vector.
///
/// Layout: theta[(layer * num_qubits + qubit) * 3 + k], k = 0,1,2 holding
/// (t1, t2, t3) of G = R_x(t1) R_z(t2) R_x(t3). R_x(t3) acts first.
struct Ansatz {
    int num_qubits = 0;
    int depth = 0;
    std::vector<double> theta;

    Ansatz() = default;
    Ansatz(int n, int layers) : num_qubits(n), depth(layers) {
        if (n < 1) throw ConfigError("ansatz: num_qubits must be >= 1");
        if (layers < 0) throw ConfigError("ansatz: depth must be >= 0");
        theta.assign(num_params(), 0.0);
    }

    [[nodiscard]] std::size_t num_params() const {
        return static_cast<std::size_t>(3) * static_cast<std::size_t>(num_qubits) *
               static_cast<std::size_t>(depth);
    }

    [[nodiscard]] static std::size_t index(int num_qubits, int layer, int qubit, int k) {
        return (static_cast<std::size_t>(layer) * static_cast<std::size_t>(num_qubits) +
                static_cast<std::size_t>(qubit)) * 3 + static_cast<std::size_t>(k);
    }

    void validate() const {
        if (theta.size() != num_params()) {
            throw ConfigError("ansatz: expected " + std::to_string(num_params()) +
                              " parameters, got " + std::to_string(theta.size()));
        }
    }
};

/// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit generator.
/// Unlike std::uniform_real_distribution this is identical across standard
/// libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// theta ~ Uniform[0, 2 pi) i.i.d., reproducible per seed.
inline Ansatz random_ansatz(int num_qubits, int depth, std::uint64_t seed) {
    Ansatz a(num_qubits, depth);
    std::mt19937_64 rng(seed);
    for (double& t : a.theta) t = 2.0 * std::numbers::pi * uniform01(rng);
    return a;
}

using LayerParams = std::vector<std::vector<std::array<double, 3>>>;

inline LayerParams unflatten(const Ansatz& a) {
    a.validate();
    LayerParams out(static_cast<std::size_t>(a.depth),
                    std::vector<std::array<double, 3>>(static_cast<std::size_t>(a.num_qubits)));
    for (int d = 0; d < a.depth; ++d) {
        for (int q = 0; q < a.num_qubits; ++q) {
            for (int k = 0; k < 3; ++k) {
                out[d][q][k] = a.theta[Ansatz::index(a.num_qubits, d, q, k)];
            }
        }
    }
    return out;
}

inline std::vector<double> flatten(const LayerParams& layers) {
    std::vector<double> theta;
    for (const auto& layer : layers) {
        for (const auto& g : layer) theta.insert(theta.end(), g.begin(), g.end());
    }
    return theta;
}

// ---------------------------------------------------------------------------
// Execution plans

enum class GateKind { Rotation, Cnot };

struct Gate {
    GateKind kind = GateKind::Rotation;
    Axis axis = Axis::X;
    int q0 = 0;             // rotation qubit, or CNOT control
    int q1 = 0;             // CNOT target
    std::size_t param = 0;  // rotation parameter index
};

/// Flat gate list of an ansatz plus the number of noisy CNOT applications
/// per logical CNOT.
struct ExecutionPlan {
    int num_qubits = 0;
    std::size_t num_params = 0;
    int fold_factor = 1;
    std::vector<Gate> gates;
};

/// Compiles `ansatz` into a gate list in which every logical CNOT executes
/// `fold_factor` times. Since CNOT^2 = I, any odd factor leaves the ideal
/// circuit unchanged and only amplifies noise.
inline ExecutionPlan fold_circuit(const Ansatz& ansatz, int fold_factor = 1) {
    if (fold_factor < 1 || fold_factor % 2 == 0) {
        throw ConfigError("fold factor must be an odd integer >= 1, got " +
                          std::to_string(fold_factor));
    }
    ExecutionPlan plan;
    plan.num_qubits = ansatz.num_qubits;
    plan.num_params = ansatz.num_params();
    plan.fold_factor = fold_factor;
    const int n = ansatz.num_qubits;
    for (int d = 0; d < ansatz.depth; ++d) {
        for (int q = 0; q < n; ++q) {
            plan.gates.push_back({GateKind::Rotation, Axis::X, q, 0, Ansatz::index(n, d, q, 2)});
            plan.gates.push_back({GateKind::Rotation, Axis::Z, q, 0, Ansatz::index(n, d, q, 1)});
            plan.gates.push_back({GateKind::Rotation, Axis::X, q, 0, Ansatz::index(n, d, q, 0)});
        }
        for (int q = 0; q + 1 < n; ++q) plan.gates.push_back({GateKind::Cnot, Axis::X, q, q + 1, 0});
    }
    return plan;
}

/// Runs `plan` with parameters `theta` on `input`. A noisy model promotes a
/// statevector input to a density matrix.
inline QuantumState execute(const ExecutionPlan& plan, std::span<const double> theta,
                            QuantumState state, double p_depol) {
    if (state.num_qubits() != plan.num_qubits) {
        throw ConfigError("input has " + std::to_string(state.num_qubits()) +
                          " qubits, circuit expects " + std::to_string(plan.num_qubits));
    }
    if (theta.size() != plan.num_params) throw ConfigError("parameter count mismatch");
    if (p_depol > 0.0 && !state.is_density_matrix()) state = state.to_density_matrix();
    const NoiseModel noise{p_depol, plan.fold_factor};
    for (const Gate& g : plan.gates) {
        if (g.kind == GateKind::Rotation) {
            apply_single_qubit_rotation(state, g.q0, g.axis, theta[g.param]);
        } else {
            apply_cnot(state, g.q0, g.q1, noise);
        }
    }
    return state;
}

/// U(theta) applied to `input`, with every CNOT passed through `noise`.
inline QuantumState run_ansatz(const Ansatz& ansatz, const QuantumState& input,
                               const NoiseModel& noise = {}) {
    ansatz.validate();
    noise.validate();
    return execute(fold_circuit(ansatz, noise.fold_factor), ansatz.theta, input, noise.p_depol);
}

// ---------------------------------------------------------------------------
// Encoding

/// |x> = sum_j x_j |j> / ||x|| on ceil(log2 N_f) qubits (at least one),
/// zero-padded to a power of two.
inline QuantumState amplitude_encode(std::span<const double> features) {
    if (features.empty()) throw ConfigError("amplitude_encode: empty feature vector");
    double norm2 = 0.0;
    for (double x : features) {
        if (!std::isfinite(x)) throw ConfigError("amplitude_encode: non-finite feature");
        norm2 += x * x;
    }
    if (!(norm2 > 0.0)) throw ConfigError("amplitude_encode: all-zero feature vector");
    std::size_t dim = 2;
    while (dim < features.size()) dim <<= 1;
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<cplx> amps(dim, cplx{0.0});
    for (std::size_t j = 0; j < features.size(); ++j) amps[j] = features[j] * inv;
    return QuantumState::from_amplitudes(std::move(amps));
}

// ---------------------------------------------------------------------------
// Parameter checkpoints

struct CheckpointHeader {
    int num_qubits = 0;
    int depth = 0;
    int num_classes = 0;
    std::uint64_t seed = 0;
    double noise_p = 0.0;
};

/// Plain-text checkpoint: a `key=value` header followed by one parameter per
/// line in layout order, printed with 17 significant digits.
inline void write_checkpoint(std::ostream& os, const CheckpointHeader& h, const Ansatz& a) {
    a.validate();
    os << "# evqc parameter checkpoint v1\n";
    os << "num_qubits=" << h.num_qubits << "\n";
    os << "depth=" << h.depth << "\n";
    os << "num_classes=" << h.num_classes << "\n";
    os << "seed=" << h.seed << "\n";
    os << "noise_p=" << std::setprecision(17) << h.noise_p << "\n";
    os << "num_params=" << a.theta.size() << "\n";
    os << std::setprecision(17);
    for (double t : a.theta) os << t << "\n";
}

inline void write_checkpoint(const std::string& path, const CheckpointHeader& h,
                             const Ansatz& a) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
    write_checkpoint(os, h, a);
}

inline std::pair<CheckpointHeader, Ansatz> read_checkpoint(std::istream& is) {
    CheckpointHeader h;
    std::size_t num_params = 0;
    bool have_count = false;
    std::string line;
    while (!have_count && std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("checkpoint: malformed header: " + line);
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        try {
            if (key == "num_qubits") {
                h.num_qubits = std::stoi(val);
            } else if (key == "depth") {
                h.depth = std::stoi(val);
            } else if (key == "num_classes") {
                h.num_classes = std::stoi(val);
            } else if (key == "seed") {
                h.seed = std::stoull(val);
            } else if (key == "noise_p") {
                h.noise_p = std::stod(val);
            } else if (key == "num_params") {
                num_params = std::stoull(val);
                have_count = true;
            } else {
                throw ConfigError("checkpoint: unknown key " + key);
            }
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
            throw ConfigError("checkpoint: bad value for " + key);
        }
    }
    if (!have_count) throw ConfigError("checkpoint: missing num_params");
    Ansatz a(h.num_qubits, h.depth);
    if (a.num_params() != num_params) throw ConfigError("checkpoint: parameter count mismatch");
    for (double& t : a.theta) {
        if (!std::getline(is, line)) throw ConfigError("checkpoint: truncated parameter list");
        try {
            t = std::stod(line);
        } catch (const std::logic_error&) {
            throw ConfigError("checkpoint: bad parameter line: " + line);
        }
    }
    return {h, std::move(a)};
}

inline std::pair<CheckpointHeader, Ansatz> read_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open checkpoint: " + path);
    return read_checkpoint(is);
}

}  // namespace evqc
