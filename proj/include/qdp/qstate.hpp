// Copyright 2026 The QDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qdp/linalg.hpp"

// Exact dense simulation of small quantum systems. Bitstring convention:
// qubit 0 is the leftmost character of the bitstring and the most
// significant bit of the basis index, i.e. basis index i has qubit q in
// state (i >> (n-1-q)) & 1.

namespace qdp::qstate {

using linalg::CMatrix;
using linalg::cx;

inline bool is_power_of_two(std::size_t d) { return d != 0 && (d & (d - 1)) == 0; }

inline int qubit_count_for_dim(std::size_t d) {
    if (!is_power_of_two(d)) {
        throw std::invalid_argument("state dimension must be a power of two");
    }
    int n = 0;
    while ((std::size_t{1} << n) < d) {
        ++n;
    }
    return n;
}

/// Normalized n-qubit statevector.
struct PureState {
    int n = 0;
    std::vector<cx> amps;

    PureState() = default;

    PureState(int n_qubits, std::vector<cx> amplitudes) : n(n_qubits), amps(std::move(amplitudes)) {
        if (amps.size() != (std::size_t{1} << n)) {
            throw std::invalid_argument("PureState: amplitude count != 2^n");
        }
        double norm2 = 0.0;
        for (const auto &a : amps) {
            norm2 += std::norm(a);
        }
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-10) {
            throw std::invalid_argument("PureState: not normalized");
        }
    }

    /// |0...0> on n qubits.
    static PureState zero(int n_qubits) {
        std::vector<cx> a(std::size_t{1} << n_qubits, cx(0.0, 0.0));
        a[0] = 1.0;
        return PureState(n_qubits, std::move(a));
    }

    std::size_t dim() const { return amps.size(); }
};

inline cx inner(const PureState &a, const PureState &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("inner: dimension mismatch");
    }
    cx s(0.0, 0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) {
        s += std::conj(a.amps[i]) * b.amps[i];
    }
    return s;
}

/// Density matrix with validated Hermiticity and unit trace. Positivity is
/// maintained by construction through the channel operations; validate_psd()
/// checks it explicitly where a caller wants the full invariant.
struct MixedState {
    CMatrix rho;

    MixedState() = default;

    explicit MixedState(CMatrix m) : rho(std::move(m)) {
        if (!is_power_of_two(rho.n)) {
            throw std::invalid_argument("MixedState: dimension must be a power of two");
        }
        if (linalg::hermiticity_defect(rho) > 1e-10) {
            throw std::invalid_argument("MixedState: matrix is not Hermitian");
        }
        if (std::abs(linalg::trace(rho) - cx(1.0, 0.0)) > 1e-10) {
            throw std::invalid_argument("MixedState: trace != 1");
        }
    }

    static MixedState from_pure(const PureState &psi) {
        CMatrix m(psi.dim());
        for (std::size_t i = 0; i < psi.dim(); ++i) {
            for (std::size_t j = 0; j < psi.dim(); ++j) {
                m(i, j) = psi.amps[i] * std::conj(psi.amps[j]);
            }
        }
        return MixedState(std::move(m));
    }

    static MixedState maximally_mixed(int n_qubits) {
        const std::size_t d = std::size_t{1} << n_qubits;
        CMatrix m(d);
        for (std::size_t i = 0; i < d; ++i) {
            m(i, i) = 1.0 / static_cast<double>(d);
        }
        return MixedState(std::move(m));
    }

    std::size_t dim() const { return rho.n; }
    int qubits() const { return qubit_count_for_dim(rho.n); }

    double min_eigenvalue() const { return linalg::eig_hermitian(rho).values.front(); }

    void validate_psd(double tol = 1e-9) const {
        if (min_eigenvalue() < -tol) {
            throw std::invalid_argument("MixedState: not positive semidefinite");
        }
    }

    double purity() const {
        double s = 0.0;
        for (std::size_t i = 0; i < rho.n; ++i) {
            for (std::size_t j = 0; j < rho.n; ++j) {
                s += (rho(i, j) * rho(j, i)).real();
            }
        }
        return s;
    }
};

/// Hardware noise parameters (one row of the desk-scale regime table).
struct NoiseRegime {
    double t1_us = std::numeric_limits<double>::infinity();
    double t2_us = std::numeric_limits<double>::infinity();
    double eps_1q = 0.0;
    double eps_2q = 0.0;
    double gate_time_us = 0.1;

    NoiseRegime() = default;
    NoiseRegime(double t1, double t2, double e1, double e2, double gate_time = 0.1)
        : t1_us(t1), t2_us(t2), eps_1q(e1), eps_2q(e2), gate_time_us(gate_time) {
        if (t2_us > 2.0 * t1_us + 1e-12) {
            throw std::invalid_argument("NoiseRegime: requires T2 <= 2*T1");
        }
        if (e1 < 0.0 || e1 > 1.0 || e2 < 0.0 || e2 > 1.0) {
            throw std::invalid_argument("NoiseRegime: probabilities must lie in [0,1]");
        }
    }

    static NoiseRegime ideal() {
        const double inf = std::numeric_limits<double>::infinity();
        return NoiseRegime(inf, inf, 0.0, 0.0);
    }
    static NoiseRegime low() { return NoiseRegime(200.0, 150.0, 1e-4, 5e-3); }
    static NoiseRegime moderate() { return NoiseRegime(100.0, 70.0, 3e-4, 1e-2); }
    static NoiseRegime high() { return NoiseRegime(50.0, 30.0, 1e-3, 3e-2); }
};

/// Probability distribution over n-qubit bitstrings.
struct Distribution {
    int n = 0;
    std::vector<double> probs;

    Distribution() = default;

    Distribution(int n_qubits, std::vector<double> p) : n(n_qubits), probs(std::move(p)) {
        if (probs.size() != (std::size_t{1} << n)) {
            throw std::invalid_argument("Distribution: size != 2^n");
        }
        double sum = 0.0;
        for (double v : probs) {
            if (v < -1e-12) {
                throw std::invalid_argument("Distribution: negative probability");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-10) {
            throw std::invalid_argument("Distribution: probabilities do not sum to 1");
        }
        for (double &v : probs) {
            v = std::max(v, 0.0);
        }
    }
};

inline std::string bitstring(std::size_t index, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int q = 0; q < n; ++q) {
        if ((index >> (n - 1 - q)) & 1U) {
            s[static_cast<std::size_t>(q)] = '1';
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

struct Gate {
    enum class Kind { RY, RZ, H, CZ };
    Kind kind;
    double theta = 0.0;
    int q1 = 0;
    int q2 = 0;

    static Gate ry(double theta, int q) { return Gate{Kind::RY, theta, q, 0}; }
    static Gate rz(double theta, int q) { return Gate{Kind::RZ, theta, q, 0}; }
    static Gate h(int q) { return Gate{Kind::H, 0.0, q, 0}; }
    static Gate cz(int q1, int q2) { return Gate{Kind::CZ, 0.0, q1, q2}; }
};

namespace detail {

inline void check_qubit(const PureState &s, int q) {
    if (q < 0 || q >= s.n) {
        throw std::out_of_range("gate: qubit index out of range");
    }
}

/// Applies the 2x2 unitary [[m00,m01],[m10,m11]] to qubit q in place.
inline void apply_1q(std::vector<cx> &amps, int n, int q, cx m00, cx m01, cx m10, cx m11) {
    const std::size_t stride = std::size_t{1} << (n - 1 - q);
    const std::size_t d = amps.size();
    for (std::size_t base = 0; base < d; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + stride;
            const cx a0 = amps[i0], a1 = amps[i1];
            amps[i0] = m00 * a0 + m01 * a1;
            amps[i1] = m10 * a0 + m11 * a1;
        }
    }
}

} // namespace detail

inline PureState apply_gate(const PureState &state, const Gate &g) {
    PureState out = state;
    const cx i_unit(0.0, 1.0);
    switch (g.kind) {
    case Gate::Kind::RY: {
        detail::check_qubit(state, g.q1);
        const double c = std::cos(g.theta / 2.0), s = std::sin(g.theta / 2.0);
        detail::apply_1q(out.amps, out.n, g.q1, c, -s, s, c);
        break;
    }
    case Gate::Kind::RZ: {
        detail::check_qubit(state, g.q1);
        const cx em = std::exp(-i_unit * (g.theta / 2.0));
        const cx ep = std::exp(i_unit * (g.theta / 2.0));
        detail::apply_1q(out.amps, out.n, g.q1, em, 0.0, 0.0, ep);
        break;
    }
    case Gate::Kind::H: {
        detail::check_qubit(state, g.q1);
        const double r = 1.0 / std::sqrt(2.0);
        detail::apply_1q(out.amps, out.n, g.q1, r, r, r, -r);
        break;
    }
    case Gate::Kind::CZ: {
        detail::check_qubit(state, g.q1);
        detail::check_qubit(state, g.q2);
        if (g.q1 == g.q2) {
            throw std::out_of_range("CZ: control and target must differ");
        }
        const std::size_t b1 = std::size_t{1} << (out.n - 1 - g.q1);
        const std::size_t b2 = std::size_t{1} << (out.n - 1 - g.q2);
        for (std::size_t i = 0; i < out.dim(); ++i) {
            if ((i & b1) && (i & b2)) {
                out.amps[i] = -out.amps[i];
            }
        }
        break;
    }
    }
    return out;
}

inline PureState apply_circuit(PureState state, std::span<const Gate> gates) {
    for (const Gate &g : gates) {
        state = apply_gate(state, g);
    }
    return state;
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// (1-gamma) rho + gamma I/d.
inline MixedState depolarize(const MixedState &rho, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) {
        throw std::invalid_argument("depolarize: gamma must lie in [0,1]");
    }
    const std::size_t d = rho.dim();
    CMatrix m = linalg::scaled(rho.rho, 1.0 - gamma);
    for (std::size_t i = 0; i < d; ++i) {
        m(i, i) += gamma / static_cast<double>(d);
    }
    return MixedState(std::move(m));
}

namespace detail {

/// V = RY(theta) applied to every qubit; columns built by gate application.
inline CMatrix uniform_ry_rotation(int n, double theta) {
    const std::size_t d = std::size_t{1} << n;
    CMatrix v = CMatrix::identity(d);
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    for (std::size_t col = 0; col < d; ++col) {
        std::vector<cx> column(d);
        for (std::size_t i = 0; i < d; ++i) {
            column[i] = v(i, col);
        }
        for (int q = 0; q < n; ++q) {
            apply_1q(column, n, q, c, -s, s, c);
        }
        for (std::size_t i = 0; i < d; ++i) {
            v(i, col) = column[i];
        }
    }
    return v;
}

} // namespace detail

/// Dephasing in the basis obtained by rotating each qubit with RY(theta):
/// off-diagonal elements in that basis are scaled by (1-gamma), populations
/// are preserved. theta = 0 is the computational (Z) basis, theta = pi/2 the
/// X basis.
inline MixedState dephase(const MixedState &rho, double gamma, double basis_angle_theta = 0.0) {
    if (gamma < 0.0 || gamma > 1.0) {
        throw std::invalid_argument("dephase: gamma must lie in [0,1]");
    }
    const std::size_t d = rho.dim();
    const int n = rho.qubits();

    CMatrix work = rho.rho;
    CMatrix v;
    const bool rotated = std::abs(basis_angle_theta) > 1e-15;
    if (rotated) {
        v = detail::uniform_ry_rotation(n, basis_angle_theta);
        work = linalg::mul(linalg::mul(linalg::adjoint(v), work), v);
    }
    const double keep = 1.0 - gamma;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i != j) {
                work(i, j) *= keep;
            }
        }
    }
    if (rotated) {
        work = linalg::mul(linalg::mul(v, work), linalg::adjoint(v));
    }
    return MixedState(std::move(work));
}

namespace detail {

inline void check_channel_qubit(int n, int q) {
    if (q < 0 || q >= n) {
        throw std::out_of_range("channel: qubit index out of range");
    }
}

/// rho' = sum_m K_m rho K_m^dagger for a single-qubit Kraus set on qubit q.
inline CMatrix apply_1q_kraus(const CMatrix &rho, int n, int q,
                              std::span<const std::array<cx, 4>> kraus) {
    check_channel_qubit(n, q);
    const std::size_t d = rho.n;
    const std::size_t bit = std::size_t{1} << (n - 1 - q);
    CMatrix out(d);
    for (const auto &k : kraus) {
        // K rho: rows mix in pairs (i, i|bit).
        CMatrix t(d);
        for (std::size_t i = 0; i < d; ++i) {
            const bool hi = (i & bit) != 0;
            const std::size_t i0 = i & ~bit;
            const std::size_t i1 = i | bit;
            for (std::size_t j = 0; j < d; ++j) {
                t(i, j) = hi ? k[2] * rho(i0, j) + k[3] * rho(i1, j)
                             : k[0] * rho(i0, j) + k[1] * rho(i1, j);
            }
        }
        // (K rho) K^dagger: columns mix in pairs.
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const bool hi = (j & bit) != 0;
                const std::size_t j0 = j & ~bit;
                const std::size_t j1 = j | bit;
                out(i, j) += hi ? t(i, j0) * std::conj(k[2]) + t(i, j1) * std::conj(k[3])
                                : t(i, j0) * std::conj(k[0]) + t(i, j1) * std::conj(k[1]);
            }
        }
    }
    return out;
}

/// Conjugation P rho P for a single-qubit Pauli on qubit q (P in {I,X,Y,Z}).
inline CMatrix apply_pauli_conj(const CMatrix &rho, int n, int q, int pauli) {
    check_channel_qubit(n, q);
    const std::size_t bit = std::size_t{1} << (n - 1 - q);
    const std::size_t d = rho.n;
    CMatrix out(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            std::size_t si = i, sj = j;
            cx f(1.0, 0.0);
            switch (pauli) {
            case 0:
                break;
            case 1: // X
                si = i ^ bit;
                sj = j ^ bit;
                break;
            case 2: { // Y = i X Z as phases
                si = i ^ bit;
                sj = j ^ bit;
                const double pi_ = (i & bit) ? 1.0 : -1.0;
                const double pj_ = (j & bit) ? 1.0 : -1.0;
                f = pi_ * pj_;
                break;
            }
            case 3: { // Z
                const double pi_ = (i & bit) ? -1.0 : 1.0;
                const double pj_ = (j & bit) ? -1.0 : 1.0;
                f = pi_ * pj_;
                break;
            }
            default:
                throw std::invalid_argument("apply_pauli_conj: bad pauli id");
            }
            out(i, j) += f * rho(si, sj);
        }
    }
    return out;
}

} // namespace detail

/// Per-qubit depolarizing: with probability p the qubit is replaced by I/2,
/// realized as the uniform single-qubit Pauli twirl.
inline MixedState depolarize_qubit(const MixedState &rho, int q, double p) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("depolarize_qubit: p must lie in [0,1]");
    }
    const int n = rho.qubits();
    CMatrix acc = linalg::scaled(rho.rho, 1.0 - p);
    for (int pauli = 0; pauli < 4; ++pauli) {
        acc = linalg::add(acc, linalg::scaled(detail::apply_pauli_conj(rho.rho, n, q, pauli), p / 4.0));
    }
    return MixedState(std::move(acc));
}

/// Two-qubit depolarizing: with probability p the pair is replaced by I/4.
inline MixedState depolarize_pair(const MixedState &rho, int q1, int q2, double p) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("depolarize_pair: p must lie in [0,1]");
    }
    if (q1 == q2) {
        throw std::invalid_argument("depolarize_pair: qubits must differ");
    }
    const int n = rho.qubits();
    CMatrix acc = linalg::scaled(rho.rho, 1.0 - p);
    for (int pa = 0; pa < 4; ++pa) {
        const CMatrix first = detail::apply_pauli_conj(rho.rho, n, q1, pa);
        for (int pb = 0; pb < 4; ++pb) {
            acc = linalg::add(acc, linalg::scaled(detail::apply_pauli_conj(first, n, q2, pb), p / 16.0));
        }
    }
    return MixedState(std::move(acc));
}

/// Amplitude damping with probability p on qubit q (|1> decays to |0>).
inline MixedState amplitude_damp(const MixedState &rho, int q, double p) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("amplitude_damp: p must lie in [0,1]");
    }
    const std::array<std::array<cx, 4>, 2> kraus = {{
        {cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(std::sqrt(1.0 - p), 0.0)},
        {cx(0.0, 0.0), cx(std::sqrt(p), 0.0), cx(0.0, 0.0), cx(0.0, 0.0)},
    }};
    return MixedState(detail::apply_1q_kraus(rho.rho, rho.qubits(), q, kraus));
}

/// Pure phase damping with probability p on qubit q.
inline MixedState phase_damp(const MixedState &rho, int q, double p) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("phase_damp: p must lie in [0,1]");
    }
    const std::array<std::array<cx, 4>, 2> kraus = {{
        {cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(std::sqrt(1.0 - p), 0.0)},
        {cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(std::sqrt(p), 0.0)},
    }};
    return MixedState(detail::apply_1q_kraus(rho.rho, rho.qubits(), q, kraus));
}

/// Hardware-style noise: per qubit (ascending index) amplitude damping with
/// p_amp = 1 - exp(-t_gate/T1), pure phase damping with the rate
/// 1/T2 - 1/(2 T1), then single-qubit depolarizing eps_1q. Two-qubit
/// depolarizing eps_2q is applied once per CZ pair supplied by the caller.
inline MixedState thermal_noise(const MixedState &rho, const NoiseRegime &regime,
                                std::span<const std::pair<int, int>> cz_pairs = {}) {
    const int n = rho.qubits();
    const double t = regime.gate_time_us;
    const double p_amp = std::isinf(regime.t1_us) ? 0.0 : 1.0 - std::exp(-t / regime.t1_us);
    double phi_rate = 0.0;
    if (!std::isinf(regime.t2_us)) {
        phi_rate = 1.0 / regime.t2_us;
        if (!std::isinf(regime.t1_us)) {
            phi_rate -= 1.0 / (2.0 * regime.t1_us);
        }
    }
    const double p_phase = phi_rate > 0.0 ? 1.0 - std::exp(-t * phi_rate) : 0.0;

    MixedState out = rho;
    for (int q = 0; q < n; ++q) {
        if (p_amp > 0.0) {
            out = amplitude_damp(out, q, p_amp);
        }
        if (p_phase > 0.0) {
            out = phase_damp(out, q, p_phase);
        }
        if (regime.eps_1q > 0.0) {
            out = depolarize_qubit(out, q, regime.eps_1q);
        }
    }
    if (regime.eps_2q > 0.0) {
        for (const auto &[q1, q2] : cz_pairs) {
            out = depolarize_pair(out, q1, q2, regime.eps_2q);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distances and measurement
// ---------------------------------------------------------------------------

/// Uhlmann fidelity F(a,b) = (Tr sqrt(sqrt(a) b sqrt(a)))^2, the squared
/// convention: for pure inputs this equals |<psi_a|psi_b>|^2. Eigenvalues
/// are clipped at zero before square roots to absorb PSD drift.
inline double fidelity(const MixedState &a, const MixedState &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    const auto ea = linalg::eig_hermitian(a.rho);
    const std::size_t d = a.dim();
    CMatrix sqrt_a(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double s = std::sqrt(std::max(ea.values[k], 0.0));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                sqrt_a(i, j) += s * ea.vectors(i, k) * std::conj(ea.vectors(j, k));
            }
        }
    }
    const CMatrix m = linalg::mul(linalg::mul(sqrt_a, b.rho), sqrt_a);
    const auto em = linalg::eig_hermitian(m);
    double tr = 0.0;
    for (double v : em.values) {
        tr += std::sqrt(std::max(v, 0.0));
    }
    return std::min(tr * tr, 1.0 + 1e-12);
}

inline double fidelity(const PureState &a, const PureState &b) { return std::norm(inner(a, b)); }

inline double fidelity(const PureState &a, const MixedState &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    cx s(0.0, 0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) {
        for (std::size_t j = 0; j < a.dim(); ++j) {
            s += std::conj(a.amps[i]) * b.rho(i, j) * a.amps[j];
        }
    }
    return s.real();
}

/// Computational-basis outcome probabilities (diagonal of rho).
inline Distribution measure_probs(const MixedState &rho) {
    const std::size_t d = rho.dim();
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i) {
        p[i] = std::max(rho.rho(i, i).real(), 0.0);
    }
    double sum = 0.0;
    for (double v : p) {
        sum += v;
    }
    for (double &v : p) {
        v /= sum;
    }
    return Distribution(rho.qubits(), std::move(p));
}

inline Distribution measure_probs(const PureState &psi) {
    std::vector<double> p(psi.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        p[i] = std::norm(psi.amps[i]);
        sum += p[i];
    }
    for (double &v : p) {
        v /= sum;
    }
    return Distribution(psi.n, std::move(p));
}

/// Hellinger distance sqrt(1 - sum sqrt(p q)).
inline double hellinger(const Distribution &p, const Distribution &q) {
    if (p.probs.size() != q.probs.size()) {
        throw std::invalid_argument("hellinger: support size mismatch");
    }
    double bc = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        bc += std::sqrt(p.probs[i] * q.probs[i]);
    }
    return std::sqrt(std::max(0.0, 1.0 - bc));
}

/// Hermitian eigendecomposition with the module's contract (ascending
/// eigenvalues, orthonormal eigenvectors); thin wrapper kept here so the
/// simulation layer exposes the full operation set.
inline linalg::EigResult eig_hermitian(const CMatrix &m) { return linalg::eig_hermitian(m); }

} // namespace qdp::qstate
