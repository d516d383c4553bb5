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
#include <limits>
#include <stdexcept>
#include <vector>

#include "qdp/embed.hpp"
#include "qdp/qfi.hpp"
#include "qdp/qstate.hpp"
#include "qdp/rng.hpp"

// Attack-side analyses: QFI-aligned evasion, per-mode information leakage,
// centroid poisoning and the dephasing-basis mutual-information experiment.

namespace qdp::adversary {

using qfi::QfiSpectrum;

// ---------------------------------------------------------------------------
// Evasion
// ---------------------------------------------------------------------------

struct EvasionReport {
    std::vector<double> direction_min;
    std::vector<double> direction_max;
    double d_inf_min = 0.0; // nats, along the weakest QFI mode
    double d_inf_max = 0.0; // nats, along the strongest QFI mode
    double ratio = 1.0;     // d_inf_max / d_inf_min
    bool ratio_infinite = false;
};

/// Distinguishability (eps_adv^2/2) lambda along the extreme QFI modes. A
/// vanishing lambda_min flags the ratio as infinite instead of dividing.
inline EvasionReport evasion_analysis(const QfiSpectrum &spectrum, double eps_adv) {
    if (eps_adv <= 0.0) {
        throw std::invalid_argument("evasion_analysis: eps_adv must be positive");
    }
    EvasionReport rep;
    rep.direction_max = spectrum.eigenvectors.front();
    rep.direction_min = spectrum.eigenvectors.back();
    const double half_sq = 0.5 * eps_adv * eps_adv;
    rep.d_inf_max = half_sq * spectrum.lambda_max();
    rep.d_inf_min = half_sq * spectrum.lambda_min();
    if (rep.d_inf_min <= 0.0) {
        rep.ratio_infinite = true;
        rep.ratio = std::numeric_limits<double>::infinity();
    } else {
        rep.ratio = rep.d_inf_max / rep.d_inf_min;
    }
    return rep;
}

/// Direct max-divergence -ln |<psi(x)|psi(x + delta v)>|^2 of the embedded
/// perturbation, used to cross-check the QFI quadratic form.
inline double measured_distinguishability(const std::vector<double> &x,
                                          const std::vector<double> &direction, double eps_adv,
                                          const embed::EmbeddingSpec &spec) {
    std::vector<double> shifted = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        shifted[i] += eps_adv * direction[i];
    }
    const double f =
        qstate::fidelity(embed::embed_pure(x, spec), embed::embed_pure(shifted, spec));
    return -std::log(std::max(f, 1e-300));
}

// ---------------------------------------------------------------------------
// Leakage
// ---------------------------------------------------------------------------

struct LeakageProfile {
    std::vector<double> mode_bounds; // I_k in nats
    std::vector<double> fractions;   // I_k / sum I_k
    double total = 0.0;
};

/// Per-mode mutual-information ceilings I_k = (1/2) ln(1 + lambda_k Var(s)/eps).
inline LeakageProfile leakage_profile(const std::vector<double> &lambdas, double var_s,
                                      double eps) {
    if (var_s <= 0.0 || eps <= 0.0) {
        throw std::invalid_argument("leakage_profile: Var(s) and eps must be positive");
    }
    LeakageProfile prof;
    prof.mode_bounds.reserve(lambdas.size());
    for (double l : lambdas) {
        prof.mode_bounds.push_back(0.5 * std::log(1.0 + l * var_s / eps));
        prof.total += prof.mode_bounds.back();
    }
    prof.fractions.resize(lambdas.size(), 0.0);
    if (prof.total > 0.0) {
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            prof.fractions[k] = prof.mode_bounds[k] / prof.total;
        }
    }
    return prof;
}

// ---------------------------------------------------------------------------
// Poisoning
// ---------------------------------------------------------------------------

struct PoisonReport {
    double beta = 0.0;
    double clean_mean = 0.0;     // lambda_max at the clean centroid
    double poisoned_mean = 0.0;  // lambda_max at the poisoned centroid
    double clean_median = 0.0;   // median of per-sample lambda_max, clean
    double poisoned_median = 0.0;
};

/// Shifts floor(beta n) points (seeded choice without replacement) by
/// delta_x, then compares centroid-based and median-based lambda_max
/// estimation on the clean and poisoned sets.
inline PoisonReport poison_experiment(const embed::Dataset &dataset, double beta,
                                      const std::vector<double> &delta_x,
                                      const embed::EmbeddingSpec &spec, std::uint64_t seed = 42) {
    if (beta < 0.0 || beta >= 0.5) {
        throw std::invalid_argument("poison_experiment: beta must lie in [0, 0.5)");
    }
    const std::size_t n = dataset.size();
    const std::size_t n_poison = static_cast<std::size_t>(beta * static_cast<double>(n));
    if (beta > 0.0 && n_poison == 0) {
        throw std::invalid_argument("poison_experiment: beta*n must be at least 1");
    }

    std::vector<std::vector<double>> poisoned = dataset.points;
    if (n_poison > 0) {
        rng::Xoshiro256pp gen(seed);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        for (std::size_t i = 0; i < n_poison; ++i) {
            const std::size_t j = i + gen.below(n - i);
            std::swap(order[i], order[j]);
        }
        for (std::size_t i = 0; i < n_poison; ++i) {
            auto &pt = poisoned[order[i]];
            for (std::size_t k = 0; k < pt.size(); ++k) {
                pt[k] += delta_x[k];
            }
        }
    }

    auto centroid_of = [](const std::vector<std::vector<double>> &pts) {
        std::vector<double> c(pts.front().size(), 0.0);
        for (const auto &p : pts) {
            for (std::size_t k = 0; k < c.size(); ++k) {
                c[k] += p[k];
            }
        }
        for (double &v : c) {
            v /= static_cast<double>(pts.size());
        }
        return c;
    };

    PoisonReport rep;
    rep.beta = beta;
    rep.clean_mean = qfi::lambda_max(qfi::qfi_pure(centroid_of(dataset.points), spec));
    rep.poisoned_mean = qfi::lambda_max(qfi::qfi_pure(centroid_of(poisoned), spec));
    rep.clean_median = qfi::median_lambda_max(dataset.points, spec);
    rep.poisoned_median = qfi::median_lambda_max(poisoned, spec);
    return rep;
}

// ---------------------------------------------------------------------------
// Dephasing mutual information
// ---------------------------------------------------------------------------

struct DephasingCurve {
    std::vector<double> thetas;
    std::vector<double> gammas;
    std::vector<std::vector<double>> mi_values; // [theta][gamma], nats
    double baseline_mi = 0.0;                   // gamma = 0
};

/// Mutual information (nats) between a discretized sensitive feature and the
/// Z-basis measurement after dephasing in the theta-rotated basis. The
/// feature ranges over a uniform grid (default 32 points on [-1.5, 1.5])
/// with the other coordinates held at `centroid`; the prior is uniform and
/// probabilities are exact, so results are deterministic.
inline double dephasing_mi(double theta, double gamma, const embed::EmbeddingSpec &spec,
                           std::size_t feature_index, int grid_size,
                           const std::vector<double> &centroid, double lo = -1.5,
                           double hi = 1.5) {
    if (grid_size < 8) {
        throw std::invalid_argument("dephasing_mi: grid too coarse");
    }
    if (feature_index >= spec.feature_dim()) {
        throw std::out_of_range("dephasing_mi: feature index out of range");
    }
    if (gamma < 0.0 || gamma > 1.0) {
        throw std::invalid_argument("dephasing_mi: gamma must lie in [0,1]");
    }
    const std::size_t d = std::size_t{1} << spec.n_qubits();
    const double prior = 1.0 / static_cast<double>(grid_size);

    std::vector<std::vector<double>> conditional;
    conditional.reserve(static_cast<std::size_t>(grid_size));
    for (int g = 0; g < grid_size; ++g) {
        std::vector<double> x = centroid;
        x[feature_index] = lo + (hi - lo) * (static_cast<double>(g) + 0.5) / grid_size;
        qstate::MixedState rho = qstate::MixedState::from_pure(embed::embed_pure(x, spec));
        if (gamma > 0.0) {
            rho = qstate::dephase(rho, gamma, theta);
        }
        conditional.push_back(qstate::measure_probs(rho).probs);
    }

    std::vector<double> marginal(d, 0.0);
    for (const auto &row : conditional) {
        for (std::size_t m = 0; m < d; ++m) {
            marginal[m] += prior * row[m];
        }
    }
    double mi = 0.0;
    for (const auto &row : conditional) {
        for (std::size_t m = 0; m < d; ++m) {
            if (row[m] > 1e-300 && marginal[m] > 1e-300) {
                mi += prior * row[m] * std::log(row[m] / marginal[m]);
            }
        }
    }
    return std::max(mi, 0.0);
}

/// Full (theta, gamma) sweep of dephasing_mi.
inline DephasingCurve dephasing_sweep(const std::vector<double> &thetas,
                                      const std::vector<double> &gammas,
                                      const embed::EmbeddingSpec &spec, std::size_t feature_index,
                                      int grid_size, const std::vector<double> &centroid) {
    DephasingCurve curve;
    curve.thetas = thetas;
    curve.gammas = gammas;
    curve.baseline_mi = dephasing_mi(0.0, 0.0, spec, feature_index, grid_size, centroid);
    for (double th : thetas) {
        std::vector<double> row;
        row.reserve(gammas.size());
        for (double g : gammas) {
            row.push_back(dephasing_mi(th, g, spec, feature_index, grid_size, centroid));
        }
        curve.mi_values.push_back(std::move(row));
    }
    return curve;
}

} // namespace qdp::adversary
