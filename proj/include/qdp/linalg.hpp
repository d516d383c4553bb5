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
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qdp::linalg {

using cx = std::complex<double>;

/// Dense row-major complex matrix. Dimensions stay tiny (d <= 32) by design,
/// so everything is plain O(n^3) arithmetic with no blocking.
struct CMatrix {
    std::size_t n = 0;
    std::vector<cx> a;

    CMatrix() = default;
    explicit CMatrix(std::size_t dim) : n(dim), a(dim * dim, cx(0.0, 0.0)) {}

    static CMatrix identity(std::size_t dim) {
        CMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    cx &operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    const cx &operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline CMatrix adjoint(const CMatrix &m) {
    CMatrix r(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) {
            r(i, j) = std::conj(m(j, i));
        }
    }
    return r;
}

inline CMatrix mul(const CMatrix &x, const CMatrix &y) {
    if (x.n != y.n) {
        throw std::invalid_argument("linalg: dimension mismatch in mul");
    }
    CMatrix r(x.n);
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t k = 0; k < x.n; ++k) {
            const cx xik = x(i, k);
            if (xik == cx(0.0, 0.0)) {
                continue;
            }
            for (std::size_t j = 0; j < x.n; ++j) {
                r(i, j) += xik * y(k, j);
            }
        }
    }
    return r;
}

inline CMatrix add(const CMatrix &x, const CMatrix &y) {
    if (x.n != y.n) {
        throw std::invalid_argument("linalg: dimension mismatch in add");
    }
    CMatrix r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) {
        r.a[i] += y.a[i];
    }
    return r;
}

inline CMatrix sub(const CMatrix &x, const CMatrix &y) {
    if (x.n != y.n) {
        throw std::invalid_argument("linalg: dimension mismatch in sub");
    }
    CMatrix r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) {
        r.a[i] -= y.a[i];
    }
    return r;
}

inline CMatrix scaled(const CMatrix &x, cx s) {
    CMatrix r = x;
    for (auto &v : r.a) {
        v *= s;
    }
    return r;
}

inline cx trace(const CMatrix &m) {
    cx t(0.0, 0.0);
    for (std::size_t i = 0; i < m.n; ++i) {
        t += m(i, i);
    }
    return t;
}

inline double max_abs(const CMatrix &m) {
    double mx = 0.0;
    for (const auto &v : m.a) {
        mx = std::max(mx, std::abs(v));
    }
    return mx;
}

inline double frobenius(const CMatrix &m) {
    double s = 0.0;
    for (const auto &v : m.a) {
        s += std::norm(v);
    }
    return std::sqrt(s);
}

/// Max elementwise deviation from Hermiticity.
inline double hermiticity_defect(const CMatrix &m) {
    double mx = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i; j < m.n; ++j) {
            mx = std::max(mx, std::abs(m(i, j) - std::conj(m(j, i))));
        }
    }
    return mx;
}

struct EigResult {
    std::vector<double> values; // ascending
    CMatrix vectors;            // column k is the eigenvector of values[k]
};

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Sweeps all off-diagonal pairs with complex Givens rotations until the
/// off-diagonal Frobenius norm drops below 1e-12 relative to the matrix
/// scale, capped at 100 sweeps. Returns eigenvalues in ascending order with
/// orthonormal eigenvectors as columns.
inline EigResult eig_hermitian(const CMatrix &input) {
    const std::size_t n = input.n;
    const double scale = std::max(1.0, frobenius(input));
    if (hermiticity_defect(input) > 1e-10 * scale) {
        throw std::invalid_argument("eig_hermitian: input is not Hermitian");
    }

    CMatrix m = input;
    // Force exact Hermiticity so rotations keep the structure.
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = cx(m(i, i).real(), 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            const cx avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m(i, j) = avg;
            m(j, i) = std::conj(avg);
        }
    }

    CMatrix v = CMatrix::identity(n);
    const double tol = 1e-12 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                off += 2.0 * std::norm(m(i, j));
            }
        }
        if (std::sqrt(off) <= tol) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cx g = m(p, q);
                const double gabs = std::abs(g);
                if (gabs <= tol / (10.0 * static_cast<double>(n))) {
                    continue;
                }
                // Zero the (p,q) entry of the 2x2 block [[alpha, g],[g*, beta]]
                // with U = [[c, -s e^{i phi}],[s e^{-i phi}, c]], g = |g| e^{i phi}.
                const double alpha = m(p, p).real();
                const double beta = m(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * gabs, alpha - beta);
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const cx phase = g / gabs;
                const cx sp = s * phase;

                // Columns p and q of M and of the eigenvector accumulator.
                for (std::size_t i = 0; i < n; ++i) {
                    const cx mp = m(i, p), mq = m(i, q);
                    m(i, p) = c * mp + std::conj(sp) * mq;
                    m(i, q) = -sp * mp + c * mq;
                    const cx vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp + std::conj(sp) * vq;
                    v(i, q) = -sp * vp + c * vq;
                }
                // Rows p and q (U^dagger from the left).
                for (std::size_t j = 0; j < n; ++j) {
                    const cx mp = m(p, j), mq = m(q, j);
                    m(p, j) = c * mp + sp * mq;
                    m(q, j) = std::conj(-sp) * mp + c * mq;
                }
                m(p, q) = cx(0.0, 0.0);
                m(q, p) = cx(0.0, 0.0);
                m(p, p) = cx(m(p, p).real(), 0.0);
                m(q, q) = cx(m(q, q).real(), 0.0);
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = m(i, i).real();
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

    EigResult out;
    out.values.resize(n);
    out.vectors = CMatrix(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = diag[order[k]];
        for (std::size_t i = 0; i < n; ++i) {
            out.vectors(i, k) = v(i, order[k]);
        }
    }
    return out;
}

/// Small dense real symmetric matrix, used for QFI matrices (p <= 8).
struct RMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    RMatrix() = default;
    explicit RMatrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

    double &operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    const double &operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline double symmetry_defect(const RMatrix &m) {
    double mx = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i + 1; j < m.n; ++j) {
            mx = std::max(mx, std::abs(m(i, j) - m(j, i)));
        }
    }
    return mx;
}

struct SymEigResult {
    std::vector<double> values; // ascending
    RMatrix vectors;            // columns
};

/// Real cyclic Jacobi for symmetric matrices (same conventions as the
/// Hermitian solver; separate so eigenvectors come out real).
inline SymEigResult eig_symmetric(const RMatrix &input) {
    const std::size_t n = input.n;
    double scale = 1.0;
    for (double x : input.a) {
        scale = std::max(scale, std::abs(x));
    }
    if (symmetry_defect(input) > 1e-8 * scale) {
        throw std::invalid_argument("eig_symmetric: input is not symmetric");
    }

    RMatrix m = input;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = m(j, i) = avg;
        }
    }
    RMatrix v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v(i, i) = 1.0;
    }

    const double tol = 1e-13 * scale * static_cast<double>(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                off += 2.0 * m(i, j) * m(i, j);
            }
        }
        if (std::sqrt(off) <= tol) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double g = m(p, q);
                if (std::abs(g) <= tol / (10.0 * static_cast<double>(n))) {
                    continue;
                }
                const double theta = 0.5 * std::atan2(2.0 * g, m(p, p) - m(q, q));
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                for (std::size_t i = 0; i < n; ++i) {
                    const double mp = m(i, p), mq = m(i, q);
                    m(i, p) = c * mp + s * mq;
                    m(i, q) = -s * mp + c * mq;
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp + s * vq;
                    v(i, q) = -s * vp + c * vq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double mp = m(p, j), mq = m(q, j);
                    m(p, j) = c * mp + s * mq;
                    m(q, j) = -s * mp + c * mq;
                }
                m(p, q) = m(q, p) = 0.0;
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = m(i, i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

    SymEigResult out;
    out.values.resize(n);
    out.vectors = RMatrix(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = diag[order[k]];
        for (std::size_t i = 0; i < n; ++i) {
            out.vectors(i, k) = v(i, order[k]);
        }
    }
    return out;
}

} // namespace qdp::linalg
