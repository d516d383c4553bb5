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
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "qdp/embed.hpp"
#include "qdp/linalg.hpp"
#include "qdp/qstate.hpp"

// Quantum Fisher information: pure-state QFI via central finite differences,
// mixed-state QFI via the symmetric logarithmic derivative decomposition,
// spectral analysis, and online (EMA) tracking of lambda_max.

namespace qdp::qfi {

using linalg::CMatrix;
using linalg::cx;
using linalg::RMatrix;
using qstate::MixedState;
using qstate::PureState;

/// Real symmetric QFI matrix together with the base point it was evaluated at.
struct QfiMatrix {
    RMatrix entries;
    std::vector<double> base_point;

    std::size_t dim() const { return entries.n; }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < entries.n; ++i) {
            t += entries(i, i);
        }
        return t;
    }
};

/// Descending eigenpairs of a QFI matrix.
struct QfiSpectrum {
    std::vector<double> eigenvalues;            // lambda_1 >= ... >= lambda_p
    std::vector<std::vector<double>> eigenvectors; // eigenvectors[k] matches eigenvalues[k]

    std::size_t dim() const { return eigenvalues.size(); }
    double lambda_max() const { return eigenvalues.front(); }
    double lambda_min() const { return eigenvalues.back(); }
    double trace() const {
        double t = 0.0;
        for (double v : eigenvalues) {
            t += v;
        }
        return t;
    }
};

/// Classical/quantum split of a mixed-state QFI (f_total = f_class + f_quant).
struct QfiDecomposition {
    QfiMatrix f_total;
    QfiMatrix f_class;
    QfiMatrix f_quant;
    double quantum_fraction = 0.0; // Tr(f_quant) / Tr(f_total)
};

using PureFamily = std::function<PureState(const std::vector<double> &)>;
using MixedFamily = std::function<MixedState(const std::vector<double> &)>;

namespace detail {

/// Fixes the global phase so the amplitude at `pivot` is real and positive.
inline PureState align_phase(PureState psi, std::size_t pivot) {
    const cx a = psi.amps[pivot];
    const double mag = std::abs(a);
    if (mag < 1e-12) {
        throw std::runtime_error("qfi: phase pivot amplitude vanished");
    }
    const cx rot = std::conj(a) / mag;
    for (auto &v : psi.amps) {
        v *= rot;
    }
    return psi;
}

inline std::size_t dominant_index(const PureState &psi) {
    std::size_t best = 0;
    double mag = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
        const double m = std::abs(psi.amps[i]);
        if (m > mag) {
            mag = m;
            best = i;
        }
    }
    return best;
}

inline RMatrix symmetrized(const RMatrix &m) {
    RMatrix r(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) {
            r(i, j) = 0.5 * (m(i, j) + m(j, i));
        }
    }
    return r;
}

} // namespace detail

/// Pure-state QFI by central finite differences,
/// F_ij = 4 Re(<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>).
///
/// The global phase of every evaluated state is fixed by making the
/// amplitude that dominates the center state real-positive; without this
/// gauge the <d psi|psi> terms pick up the arbitrary phases of the circuit
/// evaluations. With `richardson` the step-halved estimate is combined as
/// (4 F(h/2) - F(h)) / 3.
inline QfiMatrix qfi_pure_family(const std::vector<double> &x, const PureFamily &family,
                                 double step = 1e-4, bool richardson = false) {
    if (step < 1e-10) {
        throw std::invalid_argument("qfi_pure: step too small");
    }
    const std::size_t p = x.size();

    auto evaluate = [&](double h) {
        const PureState center_raw = family(x);
        const std::size_t pivot = detail::dominant_index(center_raw);
        const PureState center = detail::align_phase(center_raw, pivot);

        std::vector<std::vector<cx>> deriv(p);
        for (std::size_t k = 0; k < p; ++k) {
            std::vector<double> xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const PureState plus = detail::align_phase(family(xp), pivot);
            const PureState minus = detail::align_phase(family(xm), pivot);
            std::vector<cx> d(center.dim());
            for (std::size_t i = 0; i < d.size(); ++i) {
                d[i] = (plus.amps[i] - minus.amps[i]) / (2.0 * h);
            }
            deriv[k] = std::move(d);
        }

        std::vector<cx> overlap(p); // <d_k psi | psi>
        for (std::size_t k = 0; k < p; ++k) {
            cx s(0.0, 0.0);
            for (std::size_t i = 0; i < center.dim(); ++i) {
                s += std::conj(deriv[k][i]) * center.amps[i];
            }
            overlap[k] = s;
        }

        RMatrix f(p);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                cx dd(0.0, 0.0);
                for (std::size_t t = 0; t < center.dim(); ++t) {
                    dd += std::conj(deriv[i][t]) * deriv[j][t];
                }
                const cx term = dd - overlap[i] * std::conj(overlap[j]);
                f(i, j) = 4.0 * term.real();
            }
        }
        return detail::symmetrized(f);
    };

    RMatrix f = evaluate(step);
    if (richardson) {
        const RMatrix f2 = evaluate(step / 2.0);
        for (std::size_t i = 0; i < f.a.size(); ++i) {
            f.a[i] = (4.0 * f2.a[i] - f.a[i]) / 3.0;
        }
    }
    return QfiMatrix{std::move(f), x};
}

inline QfiMatrix qfi_pure(const std::vector<double> &x, const embed::EmbeddingSpec &spec,
                          double step = 1e-4, bool richardson = false) {
    return qfi_pure_family(
        x, [&spec](const std::vector<double> &y) { return embed::embed_pure(y, spec); }, step,
        richardson);
}

/// Mixed-state QFI via the SLD formalism, split into the classical
/// (eigenvalue-motion) and quantum (eigenvector-motion) parts:
///   F_class_kl = sum_i (d_k lam_i)(d_l lam_i) / lam_i
///   F_quant_kl = 2 sum_{i != j} Re[(d_k rho)_ij (d_l rho)_ji] / (lam_i + lam_j)
/// evaluated in the eigenbasis of rho(x). Eigenvalues below 1e-8 are
/// excluded from the classical sum; pairs with lam_i + lam_j < 2e-8 or
/// |lam_i - lam_j| < 1e-10 contribute zero to the quantum part (the
/// (lam_i - lam_j)^2 factor in the eigenvector form enforces the latter
/// analytically). If the eigenvalue ordering is not preserved across the
/// difference stencil the step is retried once at step/10.
inline QfiDecomposition qfi_mixed(const std::vector<double> &x, const MixedFamily &family,
                                  double step = 1e-4) {
    if (step < 1e-10) {
        throw std::invalid_argument("qfi_mixed: step too small");
    }
    const std::size_t p = x.size();
    constexpr double eig_floor = 1e-8;
    constexpr double degeneracy_gap = 1e-10;

    auto attempt = [&](double h, bool &crossing) {
        crossing = false;
        const MixedState rho0 = family(x);
        const std::size_t d = rho0.dim();
        const auto eig = linalg::eig_hermitian(rho0.rho);
        // Work in descending order so "crossing" matches spectral ordering.
        std::vector<double> lam(d);
        CMatrix v(d);
        for (std::size_t k = 0; k < d; ++k) {
            lam[k] = eig.values[d - 1 - k];
            for (std::size_t i = 0; i < d; ++i) {
                v(i, k) = eig.vectors(i, d - 1 - k);
            }
        }
        const CMatrix vdag = linalg::adjoint(v);

        std::vector<CMatrix> drho(p);
        for (std::size_t k = 0; k < p; ++k) {
            std::vector<double> xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const MixedState rp = family(xp);
            const MixedState rm = family(xm);

            // Continuity check: eigenvalue estimates at x +/- h, matched via
            // the eigenbasis at x, must preserve the ordering of levels that
            // are separated at x.
            const CMatrix tp = linalg::mul(linalg::mul(vdag, rp.rho), v);
            const CMatrix tm = linalg::mul(linalg::mul(vdag, rm.rho), v);
            for (std::size_t i = 0; i + 1 < d; ++i) {
                if (lam[i] - lam[i + 1] > degeneracy_gap) {
                    if (tp(i, i).real() < tp(i + 1, i + 1).real() - 1e-12 ||
                        tm(i, i).real() < tm(i + 1, i + 1).real() - 1e-12) {
                        crossing = true;
                    }
                }
            }

            CMatrix diff(d);
            for (std::size_t i = 0; i < d * d; ++i) {
                diff.a[i] = (rp.rho.a[i] - rm.rho.a[i]) / (2.0 * h);
            }
            drho[k] = linalg::mul(linalg::mul(vdag, diff), v); // eigenbasis components
        }
        if (crossing) {
            return QfiDecomposition{};
        }

        RMatrix f_class(p), f_quant(p);
        for (std::size_t k = 0; k < p; ++k) {
            for (std::size_t l = k; l < p; ++l) {
                double cls = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    if (lam[i] >= eig_floor) {
                        cls += drho[k](i, i).real() * drho[l](i, i).real() / lam[i];
                    }
                }
                double qnt = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    for (std::size_t j = i + 1; j < d; ++j) {
                        const double denom = lam[i] + lam[j];
                        if (denom < 2.0 * eig_floor) {
                            continue;
                        }
                        if (std::abs(lam[i] - lam[j]) < degeneracy_gap) {
                            continue;
                        }
                        qnt += 4.0 * (drho[k](i, j) * drho[l](j, i)).real() / denom;
                    }
                }
                f_class(k, l) = f_class(l, k) = cls;
                f_quant(k, l) = f_quant(l, k) = qnt;
            }
        }

        QfiDecomposition out;
        out.f_class = QfiMatrix{f_class, x};
        out.f_quant = QfiMatrix{f_quant, x};
        RMatrix total(p);
        for (std::size_t i = 0; i < p * p; ++i) {
            total.a[i] = f_class.a[i] + f_quant.a[i];
        }
        out.f_total = QfiMatrix{total, x};
        const double tr_tot = out.f_total.trace();
        out.quantum_fraction = tr_tot > 0.0 ? out.f_quant.trace() / tr_tot : 0.0;
        return out;
    };

    bool crossing = false;
    QfiDecomposition result = attempt(step, crossing);
    if (crossing) {
        result = attempt(step / 10.0, crossing);
        if (crossing) {
            throw std::invalid_argument("qfi_mixed: eigenvalue crossing within the difference stencil");
        }
    }
    return result;
}

/// Descending spectral decomposition; each eigenvector is sign-fixed so its
/// dominant component (lowest index among magnitude ties) is positive.
inline QfiSpectrum spectral(const QfiMatrix &f) {
    if (linalg::symmetry_defect(f.entries) > 1e-8) {
        throw std::invalid_argument("spectral: matrix is not symmetric");
    }
    const auto eig = linalg::eig_symmetric(f.entries);
    const std::size_t p = f.dim();
    QfiSpectrum s;
    s.eigenvalues.resize(p);
    s.eigenvectors.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t k = 0; k < p; ++k) {
        const std::size_t src = p - 1 - k; // descending
        s.eigenvalues[k] = eig.values[src];
        std::size_t dom = 0;
        double mag = -1.0;
        for (std::size_t i = 0; i < p; ++i) {
            const double m = std::abs(eig.vectors(i, src));
            if (m > mag + 1e-15) {
                mag = m;
                dom = i;
            }
        }
        const double sign = eig.vectors(dom, src) >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < p; ++i) {
            s.eigenvectors[k][i] = sign * eig.vectors(i, src);
        }
    }
    return s;
}

inline double lambda_max(const QfiMatrix &f) { return spectral(f).lambda_max(); }

// ---------------------------------------------------------------------------
// Online estimation
// ---------------------------------------------------------------------------

/// Exponential moving average of lambda_max, updated functionally.
struct EmaTracker {
    double beta = 0.9;
    double lambda_max_hat = 0.0;
    long step_count = 0;

    EmaTracker() = default;
    EmaTracker(double b, double initial = 0.0) : beta(b), lambda_max_hat(initial) {
        if (b < 0.0 || b >= 1.0) {
            throw std::invalid_argument("EmaTracker: beta must lie in [0,1)");
        }
    }
};

inline EmaTracker ema_update(const EmaTracker &tracker, double lambda_max_new) {
    if (lambda_max_new < 0.0) {
        throw std::invalid_argument("ema_update: negative lambda_max");
    }
    EmaTracker t = tracker;
    t.lambda_max_hat = t.beta * t.lambda_max_hat + (1.0 - t.beta) * lambda_max_new;
    t.step_count += 1;
    return t;
}

/// Full-matrix EMA used by the convergence analysis.
struct MatrixEma {
    RMatrix value;
    long step_count = 0;
};

inline MatrixEma matrix_ema_update(const MatrixEma &ema, const RMatrix &sample, double beta) {
    MatrixEma out = ema;
    if (out.value.n == 0) {
        out.value = RMatrix(sample.n);
    }
    if (out.value.n != sample.n) {
        throw std::invalid_argument("matrix_ema_update: dimension mismatch");
    }
    for (std::size_t i = 0; i < sample.a.size(); ++i) {
        out.value.a[i] = beta * out.value.a[i] + (1.0 - beta) * sample.a[i];
    }
    out.step_count += 1;
    return out;
}

/// Adaptive privacy parameter (Delta^2/2) * lambda_hat * (1 - c gamma).
inline double adaptive_epsilon(const EmaTracker &tracker, double delta, double c, double gamma) {
    if (delta <= 0.0) {
        throw std::invalid_argument("adaptive_epsilon: Delta must be positive");
    }
    if (c * gamma >= 1.0) {
        throw std::invalid_argument("adaptive_epsilon: requires c*gamma < 1");
    }
    return 0.5 * delta * delta * tracker.lambda_max_hat * (1.0 - c * gamma);
}

/// Median of per-sample lambda_max(qfi_pure(x_i)); even counts average the
/// two middle order statistics. Robust alternative to centroid estimation.
inline double median_lambda_max(const std::vector<std::vector<double>> &samples,
                                const embed::EmbeddingSpec &spec, double step = 1e-4) {
    if (samples.empty()) {
        throw std::invalid_argument("median_lambda_max: empty sample list");
    }
    std::vector<double> vals;
    vals.reserve(samples.size());
    for (const auto &x : samples) {
        vals.push_back(lambda_max(qfi_pure(x, spec, step)));
    }
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    return n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline void write_csv(const QfiMatrix &f, std::ostream &os) {
    char buf[64];
    for (std::size_t i = 0; i < f.dim(); ++i) {
        for (std::size_t j = 0; j < f.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.14g", f.entries(i, j));
            os << buf << (j + 1 < f.dim() ? "," : "\n");
        }
    }
}

} // namespace qdp::qfi

#include "json.hpp"

namespace qdp::qfi {

/// JSON export with the eigen-spectrum attached.
inline nlohmann::json to_json(const QfiMatrix &f) {
    const auto s = spectral(f);
    nlohmann::json j;
    j["base_point"] = f.base_point;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < f.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < f.dim(); ++k) {
            row.push_back(f.entries(i, k));
        }
        rows.push_back(std::move(row));
    }
    j["entries"] = rows;
    j["eigenvalues"] = s.eigenvalues;
    j["eigenvectors"] = s.eigenvectors;
    return j;
}

} // namespace qdp::qfi
