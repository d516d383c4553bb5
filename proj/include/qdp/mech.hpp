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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qdp/embed.hpp"
#include "qdp/qfi.hpp"
#include "qdp/qstate.hpp"
#include "qdp/transport.hpp"

// Privacy mechanisms and accounting: the isotropic depolarizing baseline,
// the minimax-optimal anisotropic allocation, the metric-adapted channel,
// subspace projection, the privacy-utility uncertainty relation, layer
// composition and diagonal-Wasserstein bounds.

namespace qdp::mech {

using qfi::QfiMatrix;
using qfi::QfiSpectrum;
using qstate::MixedState;
using qstate::PureState;

struct MechanismConfig {
    double delta = 1.0; // sensitivity radius (data units)
    double c = 1.0;     // calibration constant, dimensionless
    double gamma = 0.01;

    MechanismConfig() = default;
    MechanismConfig(double delta_, double c_, double gamma_) : delta(delta_), c(c_), gamma(gamma_) {
        if (delta <= 0.0) {
            throw std::invalid_argument("MechanismConfig: Delta must be positive");
        }
        if (c <= 0.0 || c > 2.0) {
            throw std::invalid_argument("MechanismConfig: c must lie in (0,2]");
        }
        if (c * gamma >= 1.0) {
            throw std::invalid_argument("MechanismConfig: requires c*gamma < 1");
        }
    }

    double c_gamma() const { return c * gamma; }
};

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

/// Isotropic depolarizing bound ln(1 + d (1 - F_min) / (gamma (1 - gamma))).
inline double eps_isotropic(int d, double f_min, double gamma) {
    if (d < 2) {
        throw std::invalid_argument("eps_isotropic: d must be >= 2");
    }
    if (f_min < 0.0 || f_min > 1.0) {
        throw std::invalid_argument("eps_isotropic: f_min must lie in [0,1]");
    }
    if (gamma <= 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("eps_isotropic: gamma must lie in (0,1)");
    }
    return std::log(1.0 + static_cast<double>(d) * (1.0 - f_min) / (gamma * (1.0 - gamma)));
}

/// Optimal single-mode bound (Delta^2/2) lambda_1 (1 - c gamma).
inline double eps_optimal(double lambda1, const MechanismConfig &cfg) {
    if (lambda1 < 0.0) {
        throw std::invalid_argument("eps_optimal: lambda must be nonnegative");
    }
    return 0.5 * cfg.delta * cfg.delta * lambda1 * (1.0 - cfg.c_gamma());
}

/// Bound achieved by the linear allocation p_k proportional to lambda_k.
inline double eps_linear(const std::vector<double> &lambdas, const MechanismConfig &cfg) {
    double sum = 0.0;
    for (double l : lambdas) {
        sum += l;
    }
    if (sum <= 0.0) {
        throw std::invalid_argument("eps_linear: spectrum must not be all zero");
    }
    double worst = 0.0;
    for (double l : lambdas) {
        worst = std::max(worst, l * (1.0 - cfg.c_gamma() * l / sum));
    }
    return 0.5 * cfg.delta * cfg.delta * worst;
}

inline double advantage_ratio(int d, double f_min, double lambda1, const MechanismConfig &cfg) {
    return eps_isotropic(d, f_min, cfg.gamma) / eps_optimal(lambda1, cfg);
}

// ---------------------------------------------------------------------------
// Optimal allocation
// ---------------------------------------------------------------------------

/// Noise weights on the simplex with shift magnitudes per active mode.
struct NoiseAllocation {
    std::vector<double> weights;       // p_k, sums to 1
    std::vector<double> etas;          // shift magnitudes, 0 for inactive modes
    std::vector<std::size_t> active_set;
    double minimax_value = 0.0;        // t at the selected active set
};

/// KKT active-set enumeration for min_p max_k lambda_k (1 - cg p_k) over the
/// simplex. Candidate active sets are the top-m prefixes of the descending
/// spectrum with t_m = (m - cg) / sum_{k<=m} 1/lambda_k; a candidate is
/// feasible when every resulting p_k is nonnegative. The feasible candidate
/// with minimal t wins, ties toward smaller m. Shift magnitudes follow the
/// default calibration eta_k = sqrt(2 eps_target / (Delta^2 lambda_k)) with
/// eps_target = (Delta^2/2) lambda_1 (1 - cg), i.e. eta_k =
/// sqrt(lambda_1 (1 - cg) / lambda_k).
inline NoiseAllocation optimal_allocation(const std::vector<double> &lambdas, double c_gamma) {
    const std::size_t p = lambdas.size();
    if (p == 0 || lambdas.front() <= 0.0) {
        throw std::invalid_argument("optimal_allocation: need lambda_1 > 0");
    }
    for (std::size_t k = 0; k + 1 < p; ++k) {
        if (lambdas[k] < lambdas[k + 1] - 1e-12) {
            throw std::invalid_argument("optimal_allocation: spectrum must be descending");
        }
    }
    if (c_gamma <= 0.0 || c_gamma >= 1.0) {
        throw std::invalid_argument("optimal_allocation: c*gamma must lie in (0,1)");
    }

    std::size_t best_m = 0;
    double best_t = 0.0;
    std::vector<double> best_p;
    double inv_sum = 0.0;
    for (std::size_t m = 1; m <= p; ++m) {
        if (lambdas[m - 1] <= 0.0) {
            break; // zero modes can never be active
        }
        inv_sum += 1.0 / lambdas[m - 1];
        const double t = (static_cast<double>(m) - c_gamma) / inv_sum;
        std::vector<double> w(p, 0.0);
        bool feasible = true;
        for (std::size_t k = 0; k < m; ++k) {
            w[k] = (1.0 - t / lambdas[k]) / c_gamma;
            if (w[k] < -1e-12) {
                feasible = false;
                break;
            }
            w[k] = std::max(w[k], 0.0);
        }
        if (!feasible) {
            continue;
        }
        if (best_m == 0 || t < best_t - 1e-12) {
            best_m = m;
            best_t = t;
            best_p = std::move(w);
        }
    }
    if (best_m == 0) {
        throw std::runtime_error("optimal_allocation: no feasible active set");
    }
    double weight_sum = 0.0;
    for (double w : best_p) {
        weight_sum += w;
    }
    for (double &w : best_p) {
        w /= weight_sum; // exact simplex normalization
    }

    NoiseAllocation alloc;
    alloc.weights = std::move(best_p);
    alloc.minimax_value = best_t;
    for (std::size_t k = 0; k < best_m; ++k) {
        alloc.active_set.push_back(k);
    }
    alloc.etas.assign(p, 0.0);
    const double eps_target_scaled = lambdas[0] * (1.0 - c_gamma); // 2 eps / Delta^2
    for (std::size_t k : alloc.active_set) {
        alloc.etas[k] = std::sqrt(eps_target_scaled / lambdas[k]);
    }
    return alloc;
}

/// Single-mode allocation along the top eigenmode (the Theorem-1 optimum);
/// with the default calibration eta_1 = sqrt(lambda_1 (1-cg) / lambda_1).
inline NoiseAllocation single_mode_allocation(const std::vector<double> &lambdas, double c_gamma) {
    NoiseAllocation alloc;
    alloc.weights.assign(lambdas.size(), 0.0);
    alloc.weights[0] = 1.0;
    alloc.active_set = {0};
    alloc.minimax_value = lambdas[0] * (1.0 - c_gamma);
    alloc.etas.assign(lambdas.size(), 0.0);
    alloc.etas[0] = std::sqrt(std::max(0.0, 1.0 - c_gamma));
    return alloc;
}

/// Linear allocation p_k proportional to lambda_k (the "geometric" mode).
inline NoiseAllocation linear_allocation(const std::vector<double> &lambdas, double c_gamma) {
    double sum = 0.0;
    for (double l : lambdas) {
        sum += l;
    }
    if (sum <= 0.0) {
        throw std::invalid_argument("linear_allocation: spectrum must not be all zero");
    }
    NoiseAllocation alloc;
    alloc.weights.resize(lambdas.size());
    alloc.etas.assign(lambdas.size(), 0.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        alloc.weights[k] = lambdas[k] / sum;
        if (lambdas[k] > 0.0) {
            alloc.active_set.push_back(k);
            alloc.etas[k] = std::sqrt(lambdas[0] * (1.0 - c_gamma) / lambdas[k]);
        }
        worst = std::max(worst, lambdas[k] * (1.0 - c_gamma * alloc.weights[k]));
    }
    alloc.minimax_value = worst;
    return alloc;
}

// ---------------------------------------------------------------------------
// Metric-adapted channel
// ---------------------------------------------------------------------------

/// Output of the metric-adapted channel at input x:
/// (1-gamma)|psi(x)><psi(x)| + gamma sum_k p_k |psi(x + eta_k u_k)><...|.
/// The shift directions come from `spectrum` (typically evaluated at x or at
/// the dataset centroid); eta values come from the allocation calibration.
inline MixedState metric_channel_apply(const std::vector<double> &x, const NoiseAllocation &alloc,
                                       const QfiSpectrum &spectrum, const embed::EmbeddingSpec &spec,
                                       const MechanismConfig &cfg) {
    if (alloc.weights.size() != spectrum.dim() || x.size() != spectrum.dim()) {
        throw std::invalid_argument("metric_channel_apply: allocation/spectrum mismatch");
    }
    for (std::size_t k : alloc.active_set) {
        if (spectrum.eigenvalues[k] <= 0.0) {
            throw std::invalid_argument("metric_channel_apply: active mode has zero QFI");
        }
    }
    const double gamma = cfg.gamma;
    const MixedState base = MixedState::from_pure(embed::embed_pure(x, spec));
    if (gamma == 0.0) {
        return base;
    }
    linalg::CMatrix acc = linalg::scaled(base.rho, 1.0 - gamma);
    for (std::size_t k : alloc.active_set) {
        const double pk = alloc.weights[k];
        if (pk <= 0.0) {
            continue;
        }
        std::vector<double> shifted = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            shifted[i] += alloc.etas[k] * spectrum.eigenvectors[k][i];
        }
        const MixedState part = MixedState::from_pure(embed::embed_pure(shifted, spec));
        acc = linalg::add(acc, linalg::scaled(part.rho, gamma * pk));
    }
    return MixedState(std::move(acc));
}

/// Effective QFI of the channel-output family (allocation and shift frame
/// frozen at x), plus the calibration constant implied by the measured
/// per-mode contractions r_k = u_k^T F_eff u_k / lambda_k ~ 1 - c gamma p_k.
struct EffectiveQfi {
    QfiMatrix matrix;
    std::vector<double> mode_ratios; // r_k for every mode
    double fitted_c = 0.0;
    double fit_residual = 0.0; // max |r_k - (1 - c gamma p_k)| over active modes
    bool residual_warning = false;
};

inline EffectiveQfi effective_qfi(const NoiseAllocation &alloc, const QfiSpectrum &spectrum,
                                  const embed::EmbeddingSpec &spec, const MechanismConfig &cfg,
                                  const std::vector<double> &x, double step = 1e-4) {
    EffectiveQfi out;
    const auto family = [&](const std::vector<double> &y) {
        return metric_channel_apply(y, alloc, spectrum, spec, cfg);
    };
    out.matrix = qfi::qfi_mixed(x, family, step).f_total;

    const std::size_t p = spectrum.dim();
    out.mode_ratios.assign(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        double quad = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                quad += spectrum.eigenvectors[k][i] * out.matrix.entries(i, j) *
                        spectrum.eigenvectors[k][j];
            }
        }
        out.mode_ratios[k] =
            spectrum.eigenvalues[k] > 1e-12 ? quad / spectrum.eigenvalues[k] : 1.0;
    }

    // Least-squares fit of a single c over the active modes.
    double num = 0.0, den = 0.0;
    for (std::size_t k : alloc.active_set) {
        const double gp = cfg.gamma * alloc.weights[k];
        num += gp * (1.0 - out.mode_ratios[k]);
        den += gp * gp;
    }
    out.fitted_c = den > 0.0 ? num / den : 0.0;
    for (std::size_t k : alloc.active_set) {
        const double predicted = 1.0 - out.fitted_c * cfg.gamma * alloc.weights[k];
        out.fit_residual = std::max(out.fit_residual, std::abs(out.mode_ratios[k] - predicted));
    }
    out.residual_warning = out.fit_residual > 0.10;
    return out;
}

// ---------------------------------------------------------------------------
// Subspace projection
// ---------------------------------------------------------------------------

struct SubspaceResult {
    PureState state;
    double eps = 0.0;          // (Delta^2/2) tau
    double utility_loss = 0.0; // discarded QFI trace fraction
};

/// Parameter-space projection onto the low-QFI eigenmodes {u_k : lambda_k <=
/// tau}: the input's high-QFI eigencoordinates are frozen at the dataset
/// centroid before re-embedding.
inline SubspaceResult subspace_project(const std::vector<double> &x, const QfiSpectrum &spectrum,
                                       double tau, const embed::EmbeddingSpec &spec,
                                       const MechanismConfig &cfg,
                                       const std::vector<double> &centroid) {
    if (tau <= 0.0) {
        throw std::invalid_argument("subspace_project: tau must be positive");
    }
    const std::size_t p = spectrum.dim();
    if (x.size() != p || centroid.size() != p) {
        throw std::invalid_argument("subspace_project: dimension mismatch");
    }
    double kept_count = 0.0;
    double discarded = 0.0, total = 0.0;
    for (double l : spectrum.eigenvalues) {
        total += l;
        if (l <= tau) {
            kept_count += 1.0;
        } else {
            discarded += l;
        }
    }
    if (kept_count == 0.0) {
        throw std::invalid_argument("subspace_project: all modes discarded");
    }

    std::vector<double> projected = centroid;
    for (std::size_t k = 0; k < p; ++k) {
        if (spectrum.eigenvalues[k] > tau) {
            continue;
        }
        double coord = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            coord += spectrum.eigenvectors[k][i] * (x[i] - centroid[i]);
        }
        for (std::size_t i = 0; i < p; ++i) {
            projected[i] += coord * spectrum.eigenvectors[k][i];
        }
    }

    SubspaceResult out;
    out.state = embed::embed_pure(projected, spec);
    out.eps = 0.5 * cfg.delta * cfg.delta * tau;
    out.utility_loss = total > 0.0 ? discarded / total : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Uncertainty relation
// ---------------------------------------------------------------------------

struct UncertaintyCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    double ratio() const { return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity(); }
};

/// eps (1 - F_min) >= (Delta^2/2) Tr(F) / d, up to 1e-9 slack.
inline UncertaintyCheck uncertainty_check(double eps, double min_channel_fidelity,
                                          const QfiMatrix &f, const MechanismConfig &cfg, int d) {
    UncertaintyCheck out;
    out.lhs = eps * (1.0 - min_channel_fidelity);
    out.rhs = 0.5 * cfg.delta * cfg.delta * f.trace() / static_cast<double>(d);
    out.holds = out.lhs >= out.rhs - 1e-9;
    return out;
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Accounting for k aligned layers: per-layer costs contract geometrically
/// with ratio (1 - c gamma).
struct CompositionLedger {
    int k = 0;
    double lambda_max = 0.0;
    std::vector<double> per_layer;
    double total = 0.0;      // (Delta^2/2) lambda (1 - (1-cg)^k) / (cg)
    double eps_seq = 0.0;    // k (Delta^2/2) lambda (1 - cg)
    double ratio = 1.0;      // eps_seq / total
    double saturation = 0.0; // limit of total as k -> infinity
};

inline CompositionLedger compose_qfi(int k, double lambda_max, const MechanismConfig &cfg) {
    if (k < 1) {
        throw std::invalid_argument("compose_qfi: k must be >= 1");
    }
    const double cg = cfg.c_gamma();
    const double base = 0.5 * cfg.delta * cfg.delta * lambda_max;
    CompositionLedger ledger;
    ledger.k = k;
    ledger.lambda_max = lambda_max;
    ledger.per_layer.resize(static_cast<std::size_t>(k));
    if (cg <= 0.0) {
        // No contraction: plain sequential accounting, ratio 1.
        for (int i = 0; i < k; ++i) {
            ledger.per_layer[static_cast<std::size_t>(i)] = base;
        }
        ledger.total = base * k;
        ledger.eps_seq = base * k;
        ledger.ratio = 1.0;
        ledger.saturation = std::numeric_limits<double>::infinity();
        return ledger;
    }
    double layer = base;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        ledger.per_layer[static_cast<std::size_t>(i)] = layer;
        sum += layer;
        layer *= 1.0 - cg;
    }
    ledger.total = base * (1.0 - std::pow(1.0 - cg, k)) / cg;
    ledger.eps_seq = static_cast<double>(k) * base * (1.0 - cg);
    ledger.ratio = ledger.eps_seq / ledger.total;
    ledger.saturation = base / cg;
    // The explicit sum and the closed form agree to rounding; keep the
    // closed form as the reported value.
    if (std::abs(sum - ledger.total) > 1e-9 * std::max(1.0, ledger.total)) {
        throw std::runtime_error("compose_qfi: series/closed-form mismatch");
    }
    return ledger;
}

/// Smallest k with ratio >= target (the composition crossover depth).
inline int composition_crossover(double target_ratio, const MechanismConfig &cfg,
                                 int k_limit = 100000) {
    for (int k = 1; k <= k_limit; ++k) {
        if (compose_qfi(k, 1.0, cfg).ratio >= target_ratio) {
            return k;
        }
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Wasserstein
// ---------------------------------------------------------------------------

using transport::w1_diag;

struct WassersteinReport {
    double l_w = 0.0;            // max of w1 / ||dx|| over the sample pairs
    double sqrt_lambda_max = 0.0;
    double gap = 0.0;            // sqrt_lambda_max / l_w
    // Global bound L_W ||x - x'|| / gamma per pair; the W1-to-max-divergence
    // step behind it is a bound of unverified tightness.
    std::vector<double> per_pair_eps;
};

/// Diagonal-Wasserstein Lipschitz analysis over concrete sample pairs. The
/// QFI reference is the largest per-pair lambda_max among the pair endpoints.
inline WassersteinReport wasserstein_lipschitz(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> &sample_pairs,
    const embed::EmbeddingSpec &spec, double gamma = 0.1) {
    if (sample_pairs.empty()) {
        throw std::invalid_argument("wasserstein_lipschitz: empty pair list");
    }
    WassersteinReport rep;
    double lam = 0.0;
    for (const auto &[a, b] : sample_pairs) {
        double dist2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dist2 += (a[i] - b[i]) * (a[i] - b[i]);
        }
        const double dist = std::sqrt(dist2);
        if (dist <= 1e-6) {
            throw std::invalid_argument("wasserstein_lipschitz: pair too close");
        }
        const auto pa = qstate::measure_probs(embed::embed_pure(a, spec));
        const auto pb = qstate::measure_probs(embed::embed_pure(b, spec));
        const double w1 = w1_diag(pa, pb);
        rep.l_w = std::max(rep.l_w, w1 / dist);
        lam = std::max(lam, qfi::lambda_max(qfi::qfi_pure(a, spec)));
        lam = std::max(lam, qfi::lambda_max(qfi::qfi_pure(b, spec)));
    }
    rep.sqrt_lambda_max = std::sqrt(lam);
    rep.gap = rep.l_w > 0.0 ? rep.sqrt_lambda_max / rep.l_w : 0.0;
    for (const auto &[a, b] : sample_pairs) {
        double dist2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dist2 += (a[i] - b[i]) * (a[i] - b[i]);
        }
        rep.per_pair_eps.push_back(rep.l_w * std::sqrt(dist2) / gamma);
    }
    return rep;
}

} // namespace qdp::mech
