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
#include <cstdio>
#include <cstring>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdp/qstate.hpp"
#include "qdp/rng.hpp"

// Parameterized quantum embeddings of classical data, synthetic dataset
// generation and the quantum kernel K_ij = |<psi(x_i)|psi(x_j)>|^2.

namespace qdp::embed {

using qstate::MixedState;
using qstate::PureState;

/// Rotation-strength specification of the data-embedding circuit: an RY
/// layer with angles alpha_i * x_i, a nearest-neighbor CZ ladder, then an
/// RZ layer with angles rz_factor * alpha_i * x_i.
struct EmbeddingSpec {
    std::vector<double> alpha;
    double rz_factor = 0.5;

    EmbeddingSpec() = default;
    explicit EmbeddingSpec(std::vector<double> alphas, double rz = 0.5)
        : alpha(std::move(alphas)), rz_factor(rz) {
        for (double a : alpha) {
            if (!std::isfinite(a)) {
                throw std::invalid_argument("EmbeddingSpec: alpha must be finite");
            }
        }
        if (alpha.empty()) {
            throw std::invalid_argument("EmbeddingSpec: empty alpha");
        }
    }

    int n_qubits() const { return static_cast<int>(alpha.size()); }
    std::size_t feature_dim() const { return alpha.size(); }

    /// alpha = [3.0, 1.0, 0.3, 0.1]; 100:1 QFI condition number.
    static EmbeddingSpec anisotropic() { return EmbeddingSpec({3.0, 1.0, 0.3, 0.1}); }
    /// Degenerate (RBF-like) embedding with lambda ~ 0.25 per mode.
    static EmbeddingSpec isotropic() { return EmbeddingSpec({0.5, 0.5, 0.5, 0.5}); }
};

inline PureState embed_pure(std::span<const double> x, const EmbeddingSpec &spec) {
    if (x.size() != spec.feature_dim()) {
        throw std::invalid_argument("embed_pure: feature length != spec dimension");
    }
    const int n = spec.n_qubits();
    PureState psi = PureState::zero(n);
    for (int q = 0; q < n; ++q) {
        psi = qstate::apply_gate(psi, qstate::Gate::ry(spec.alpha[q] * x[q], q));
    }
    for (int q = 0; q + 1 < n; ++q) {
        psi = qstate::apply_gate(psi, qstate::Gate::cz(q, q + 1));
    }
    for (int q = 0; q < n; ++q) {
        psi = qstate::apply_gate(psi, qstate::Gate::rz(spec.rz_factor * spec.alpha[q] * x[q], q));
    }
    return psi;
}

inline PureState embed_pure(const std::vector<double> &x, const EmbeddingSpec &spec) {
    return embed_pure(std::span<const double>(x), spec);
}

/// Mixed embedding rho(x) = pure_weight |psi(x)><psi(x)| + noise_weight sigma(x).
struct MixedEmbeddingSpec {
    enum class SigmaRule { DephasedShifted, Thermal };

    EmbeddingSpec base;
    double pure_weight = 0.6;
    double noise_weight = 0.4;
    SigmaRule sigma_rule = SigmaRule::DephasedShifted;
    /// Elementwise input shift used by the DephasedShifted rule.
    double shift = 0.3;

    MixedEmbeddingSpec() = default;
    explicit MixedEmbeddingSpec(EmbeddingSpec b, double pw = 0.6, double nw = 0.4,
                                SigmaRule rule = SigmaRule::DephasedShifted)
        : base(std::move(b)), pure_weight(pw), noise_weight(nw), sigma_rule(rule) {
        if (pw < 0.0 || pw > 1.0 || nw < 0.0 || nw > 1.0 || std::abs(pw + nw - 1.0) > 1e-12) {
            throw std::invalid_argument("MixedEmbeddingSpec: weights must lie in [0,1] and sum to 1");
        }
    }
};

inline MixedState embed_mixed(std::span<const double> x, const MixedEmbeddingSpec &spec) {
    const MixedState pure_part = MixedState::from_pure(embed_pure(x, spec.base));
    if (spec.pure_weight >= 1.0) {
        return pure_part;
    }
    MixedState sigma;
    switch (spec.sigma_rule) {
    case MixedEmbeddingSpec::SigmaRule::DephasedShifted: {
        std::vector<double> shifted(x.begin(), x.end());
        for (double &v : shifted) {
            v += spec.shift;
        }
        const MixedState raw = MixedState::from_pure(embed_pure(shifted, spec.base));
        const double pi_half = 1.5707963267948966;
        sigma = qstate::dephase(raw, 1.0, pi_half);
        break;
    }
    case MixedEmbeddingSpec::SigmaRule::Thermal: {
        const MixedState raw = MixedState::from_pure(embed_pure(x, spec.base));
        std::vector<std::pair<int, int>> ladder;
        for (int q = 0; q + 1 < spec.base.n_qubits(); ++q) {
            ladder.emplace_back(q, q + 1);
        }
        sigma = qstate::thermal_noise(raw, qstate::NoiseRegime::high(), ladder);
        break;
    }
    }
    return MixedState(linalg::add(linalg::scaled(pure_part.rho, spec.pure_weight),
                                  linalg::scaled(sigma.rho, spec.noise_weight)));
}

inline MixedState embed_mixed(const std::vector<double> &x, const MixedEmbeddingSpec &spec) {
    return embed_mixed(std::span<const double>(x), spec);
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// Two-class Gaussian dataset with centers mu_0 = 0 and
/// mu_1 = [s, 0.7 s, 0, ...]; labels in {0, 1}.
struct Dataset {
    std::vector<std::vector<double>> points;
    std::vector<int> labels;
    std::uint64_t seed = 0;

    std::size_t size() const { return points.size(); }
    std::size_t feature_dim() const { return points.empty() ? 0 : points.front().size(); }

    std::vector<double> centroid() const {
        std::vector<double> c(feature_dim(), 0.0);
        for (const auto &p : points) {
            for (std::size_t k = 0; k < c.size(); ++k) {
                c[k] += p[k];
            }
        }
        for (double &v : c) {
            v /= static_cast<double>(size());
        }
        return c;
    }
};

/// Generates n/2 samples per class. The documented parameter ranges are
/// s in [0.8, 1.5] and cluster_sigma in [0.6, 0.8]; values outside are
/// accepted (they only change task difficulty).
inline Dataset gen_dataset(int n, double separation_s, double cluster_sigma, std::uint64_t seed,
                           int dim = 4) {
    if (n <= 0) {
        throw std::invalid_argument("gen_dataset: n must be positive");
    }
    if (n % 2 != 0) {
        throw std::invalid_argument("gen_dataset: n must be even");
    }
    if (dim < 2) {
        throw std::invalid_argument("gen_dataset: need at least two features");
    }
    rng::Xoshiro256pp gen(seed);
    Dataset ds;
    ds.seed = seed;
    std::vector<double> mu1(static_cast<std::size_t>(dim), 0.0);
    mu1[0] = separation_s;
    mu1[1] = 0.7 * separation_s;
    for (int cls = 0; cls < 2; ++cls) {
        for (int i = 0; i < n / 2; ++i) {
            std::vector<double> p(static_cast<std::size_t>(dim));
            for (int k = 0; k < dim; ++k) {
                const double mean = cls == 1 ? mu1[static_cast<std::size_t>(k)] : 0.0;
                p[static_cast<std::size_t>(k)] = mean + cluster_sigma * gen.normal();
            }
            ds.points.push_back(std::move(p));
            ds.labels.push_back(cls);
        }
    }
    return ds;
}

/// Stratified 80/20 split: per class, the first 80% (in generation order)
/// goes to train.
struct TrainTestSplit {
    Dataset train;
    Dataset test;
};

inline TrainTestSplit split_80_20(const Dataset &ds) {
    TrainTestSplit out;
    out.train.seed = out.test.seed = ds.seed;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.labels[i] == cls) {
                idx.push_back(i);
            }
        }
        const std::size_t n_train = idx.size() * 8 / 10;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            Dataset &dst = j < n_train ? out.train : out.test;
            dst.points.push_back(ds.points[idx[j]]);
            dst.labels.push_back(cls);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

inline std::vector<PureState> embed_all(const std::vector<std::vector<double>> &xs,
                                        const EmbeddingSpec &spec) {
    std::vector<PureState> states;
    states.reserve(xs.size());
    for (const auto &x : xs) {
        states.push_back(embed_pure(x, spec));
    }
    return states;
}

/// K_ij = |<psi(x_i)|psi(x_j)>|^2; symmetric with unit diagonal.
inline std::vector<std::vector<double>> kernel_matrix(const std::vector<std::vector<double>> &xs,
                                                      const EmbeddingSpec &spec) {
    const auto states = embed_all(xs, spec);
    const std::size_t n = states.size();
    std::vector<std::vector<double>> k(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        k[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = qstate::fidelity(states[i], states[j]);
            k[i][j] = k[j][i] = v;
        }
    }
    return k;
}

/// Cross-kernel rows K(test_i, train_j).
inline std::vector<std::vector<double>> kernel_cross(const std::vector<std::vector<double>> &test,
                                                     const std::vector<std::vector<double>> &train,
                                                     const EmbeddingSpec &spec) {
    const auto ts = embed_all(test, spec);
    const auto tr = embed_all(train, spec);
    std::vector<std::vector<double>> k(ts.size(), std::vector<double>(tr.size(), 0.0));
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = 0; j < tr.size(); ++j) {
            k[i][j] = qstate::fidelity(ts[i], tr[j]);
        }
    }
    return k;
}

// ---------------------------------------------------------------------------
// CSV import/export
// ---------------------------------------------------------------------------

inline void save_dataset_csv(const Dataset &ds, std::ostream &os) {
    const std::size_t p = ds.feature_dim();
    for (std::size_t k = 0; k < p; ++k) {
        os << "x" << k << ",";
    }
    os << "label\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t k = 0; k < p; ++k) {
            std::snprintf(buf, sizeof(buf), "%.14g", ds.points[i][k]);
            os << buf << ",";
        }
        os << ds.labels[i] << "\n";
    }
}

inline void save_dataset_csv(const Dataset &ds, const std::string &path) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("save_dataset_csv: cannot open " + path);
    }
    save_dataset_csv(ds, f);
}

inline Dataset load_dataset_csv(std::istream &is) {
    Dataset ds;
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error("load_dataset_csv: empty input");
    }
    // Header: x0,...,x{p-1},label
    std::size_t p = 0;
    for (std::size_t pos = 0; (pos = line.find(',', pos)) != std::string::npos; ++pos) {
        ++p;
    }
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::strtod(cell.c_str(), nullptr));
        }
        if (row.size() != p + 1) {
            throw std::runtime_error("load_dataset_csv: bad row width");
        }
        ds.labels.push_back(static_cast<int>(row.back()));
        row.pop_back();
        ds.points.push_back(std::move(row));
    }
    return ds;
}

inline Dataset load_dataset_csv(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("load_dataset_csv: cannot open " + path);
    }
    return load_dataset_csv(f);
}

} // namespace qdp::embed
