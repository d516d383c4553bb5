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

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Soft-margin SVM on a precomputed kernel, solved by SMO-style pairwise
// coordinate ascent on the box-constrained dual (maximal-violating-pair
// selection with the b_up/b_low gap as the stopping criterion).

namespace qdp::svm {

struct Model {
    std::vector<double> alpha; // dual variables, 0 <= alpha_i <= C
    std::vector<double> y;     // labels mapped to {-1, +1}
    double bias = 0.0;
    double dual_objective = 0.0;
    double kkt_gap = 0.0;
    int sweeps = 0;
    bool converged = false;
};

namespace detail {

inline double dual_objective(const std::vector<std::vector<double>> &k, const Model &m) {
    const std::size_t n = m.alpha.size();
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        obj += m.alpha[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (m.alpha[i] == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            obj -= 0.5 * m.alpha[i] * m.alpha[j] * m.y[i] * m.y[j] * k[i][j];
        }
    }
    return obj;
}

} // namespace detail

/// Fits the dual soft-margin SVM on a precomputed kernel. Labels must be
/// binary {0,1} with both classes present. The maximal-violating pair is
/// updated until the KKT gap b_low - b_up drops to 1e-4 or 10^4 sweeps
/// (n pair updates each) elapse; all ties break toward the lowest index,
/// so fits are deterministic.
inline Model svm_fit(const std::vector<std::vector<double>> &kernel, const std::vector<int> &labels,
                     double c_box = 1.0, int max_sweeps = 10000, double kkt_tol = 1e-4) {
    const std::size_t n = labels.size();
    if (kernel.size() != n || n == 0) {
        throw std::invalid_argument("svm_fit: kernel/label size mismatch");
    }
    bool has0 = false, has1 = false;
    for (int l : labels) {
        if (l == 0) {
            has0 = true;
        } else if (l == 1) {
            has1 = true;
        } else {
            throw std::invalid_argument("svm_fit: labels must be 0 or 1");
        }
    }
    if (!has0 || !has1) {
        throw std::invalid_argument("svm_fit: both classes must be present");
    }

    Model m;
    m.alpha.assign(n, 0.0);
    m.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.y[i] = labels[i] == 1 ? 1.0 : -1.0;
    }

    // grad_i = sum_j alpha_j y_j K_ij - y_i (the bias-free margin residual
    // scaled by y_i in the Keerthi formulation: F_i = grad_i / 1).
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = -m.y[i];
    }

    const double tol = kkt_tol;
    const long updates_per_sweep = static_cast<long>(n);
    long updates = 0;

    while (true) {
        // b_up = min F_i over I_up, b_low = max F_i over I_low.
        std::size_t i_up = n, i_low = n;
        double b_up = 0.0, b_low = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool in_up = (m.y[i] > 0.0 && m.alpha[i] < c_box) ||
                               (m.y[i] < 0.0 && m.alpha[i] > 0.0);
            const bool in_low = (m.y[i] > 0.0 && m.alpha[i] > 0.0) ||
                                (m.y[i] < 0.0 && m.alpha[i] < c_box);
            if (in_up && (i_up == n || f[i] < b_up - 1e-15)) {
                b_up = f[i];
                i_up = i;
            }
            if (in_low && (i_low == n || f[i] > b_low + 1e-15)) {
                b_low = f[i];
                i_low = i;
            }
        }
        m.kkt_gap = (i_up == n || i_low == n) ? 0.0 : b_low - b_up;
        m.sweeps = static_cast<int>(updates / updates_per_sweep);
        if (i_up == n || i_low == n || m.kkt_gap <= tol) {
            m.converged = true;
            m.bias = -(b_up + b_low) / 2.0;
            break;
        }
        if (m.sweeps >= max_sweeps) {
            m.bias = -(b_up + b_low) / 2.0;
            break;
        }

        auto try_pair = [&](std::size_t i, std::size_t j) {
            const double eta =
                std::max(kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j], 1e-12);
            const double s = m.y[i] * m.y[j];
            double lo, hi;
            if (s < 0.0) {
                lo = std::max(0.0, m.alpha[j] - m.alpha[i]);
                hi = std::min(c_box, c_box + m.alpha[j] - m.alpha[i]);
            } else {
                lo = std::max(0.0, m.alpha[i] + m.alpha[j] - c_box);
                hi = std::min(c_box, m.alpha[i] + m.alpha[j]);
            }
            double aj = m.alpha[j] + m.y[j] * (f[i] - f[j]) / eta;
            aj = std::min(std::max(aj, lo), hi);
            const double dj = aj - m.alpha[j];
            if (std::abs(dj) < 1e-14) {
                return false;
            }
            const double di = -s * dj;
            m.alpha[i] += di;
            m.alpha[j] = aj;
            for (std::size_t t = 0; t < n; ++t) {
                f[t] += di * m.y[i] * kernel[i][t] + dj * m.y[j] * kernel[j][t];
            }
            return true;
        };

        bool progressed = try_pair(i_up, i_low);
        if (!progressed) {
            // The extreme pair is pinned by the box; fall back to the first
            // violating pair (lexicographic) that can move.
            for (std::size_t i = 0; i < n && !progressed; ++i) {
                const bool in_up = (m.y[i] > 0.0 && m.alpha[i] < c_box) ||
                                   (m.y[i] < 0.0 && m.alpha[i] > 0.0);
                if (!in_up || f[i] > b_low - tol) {
                    continue;
                }
                for (std::size_t j = 0; j < n && !progressed; ++j) {
                    const bool in_low = (m.y[j] > 0.0 && m.alpha[j] > 0.0) ||
                                        (m.y[j] < 0.0 && m.alpha[j] < c_box);
                    if (j == i || !in_low || f[j] - f[i] <= tol) {
                        continue;
                    }
                    progressed = try_pair(i, j);
                }
            }
        }
        if (!progressed) {
            // No pair can move; treat the current point as converged.
            m.converged = true;
            m.bias = -(b_up + b_low) / 2.0;
            break;
        }
        ++updates;
    }
    m.dual_objective = detail::dual_objective(kernel, m);
    return m;
}

inline double decision_value(const Model &m, const std::vector<double> &k_row) {
    if (k_row.size() != m.alpha.size()) {
        throw std::invalid_argument("svm: kernel row width mismatch");
    }
    double v = m.bias;
    for (std::size_t j = 0; j < m.alpha.size(); ++j) {
        if (m.alpha[j] != 0.0) {
            v += m.alpha[j] * m.y[j] * k_row[j];
        }
    }
    return v;
}

/// Predicts {0,1} labels for precomputed kernel rows K(test_i, train_j).
inline std::vector<int> svm_predict(const Model &m,
                                    const std::vector<std::vector<double>> &k_rows) {
    std::vector<int> out;
    out.reserve(k_rows.size());
    for (const auto &row : k_rows) {
        out.push_back(decision_value(m, row) >= 0.0 ? 1 : 0);
    }
    return out;
}

inline double accuracy(const std::vector<int> &pred, const std::vector<int> &truth) {
    if (pred.size() != truth.size() || pred.empty()) {
        throw std::invalid_argument("accuracy: size mismatch");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        hits += pred[i] == truth[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

} // namespace qdp::svm
