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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "qdp/embed.hpp"
#include "qdp/svm.hpp"

using namespace qdp;
using embed::Dataset;
using embed::EmbeddingSpec;
using embed::MixedEmbeddingSpec;

TEST_CASE("embedding at x = 0 is |0...0> up to global phase") {
    const auto spec = EmbeddingSpec::anisotropic();
    const auto psi = embed::embed_pure(std::vector<double>{0, 0, 0, 0}, spec);
    CHECK(std::abs(psi.amps[0]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embedding rejects wrong feature length") {
    const auto spec = EmbeddingSpec::anisotropic();
    CHECK_THROWS_AS((void)embed::embed_pure(std::vector<double>{1.0, 2.0}, spec),
                    std::invalid_argument);
}

TEST_CASE("embedding is periodic when the RZ layer shares the RY period") {
    // With rz_factor = 0.5 (default) the joint period in coordinate k is
    // 4*pi/alpha_k; with rz_factor = 1 it is 2*pi/alpha_k. Both only up to a
    // global phase, so compare fidelities.
    const double pi = 3.14159265358979323846;
    const std::vector<double> x = {0.31, -0.42, 0.55, 0.2};
    {
        const EmbeddingSpec spec({3.0, 1.0, 0.3, 0.1}, 0.5);
        for (std::size_t k = 0; k < 4; ++k) {
            auto shifted = x;
            shifted[k] += 4.0 * pi / spec.alpha[k];
            CHECK(qstate::fidelity(embed::embed_pure(x, spec), embed::embed_pure(shifted, spec)) ==
                  doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    {
        const EmbeddingSpec spec({3.0, 1.0, 0.3, 0.1}, 1.0);
        for (std::size_t k = 0; k < 4; ++k) {
            auto shifted = x;
            shifted[k] += 2.0 * pi / spec.alpha[k];
            CHECK(qstate::fidelity(embed::embed_pure(x, spec), embed::embed_pure(shifted, spec)) ==
                  doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("mixed embedding basics") {
    const std::vector<double> x = {0.4, 0.1, -0.2, 0.3};
    MixedEmbeddingSpec pure_only(EmbeddingSpec::anisotropic(), 1.0, 0.0);
    const auto rank1 = embed::embed_mixed(x, pure_only);
    CHECK(rank1.purity() == doctest::Approx(1.0).epsilon(1e-10));

    MixedEmbeddingSpec mixed(EmbeddingSpec::anisotropic());
    const auto rho = embed::embed_mixed(x, mixed);
    CHECK(rho.purity() < 1.0 - 1e-6);
    CHECK(linalg::hermiticity_defect(rho.rho) < 1e-10);
    CHECK(rho.min_eigenvalue() > -1e-9);

    MixedEmbeddingSpec thermal(EmbeddingSpec::anisotropic(), 0.6, 0.4,
                               MixedEmbeddingSpec::SigmaRule::Thermal);
    const auto rho_t = embed::embed_mixed(x, thermal);
    CHECK(rho_t.purity() < 1.0 - 1e-6);
    CHECK(rho_t.min_eigenvalue() > -1e-9);

    CHECK_THROWS_AS(MixedEmbeddingSpec(EmbeddingSpec::anisotropic(), 0.7, 0.4),
                    std::invalid_argument);
}

TEST_CASE("dataset generation is deterministic and respects the geometry") {
    const auto a = embed::gen_dataset(200, 1.5, 0.6, 42);
    const auto b = embed::gen_dataset(200, 1.5, 0.6, 42);
    REQUIRE(a.size() == 200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.labels[i] == b.labels[i]);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(a.points[i][k] == b.points[i][k]); // bitwise
        }
    }

    // CLT bound: class-1 sample mean within 3 sigma / sqrt(n/2) of
    // mu_1 = [s, 0.7 s, 0, 0] per coordinate.
    const double s = 1.5, sigma = 0.6;
    const double bound = 3.0 * sigma / std::sqrt(100.0);
    const std::vector<double> mu1 = {s, 0.7 * s, 0.0, 0.0};
    std::vector<double> mean(4, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.labels[i] == 1) {
            for (std::size_t k = 0; k < 4; ++k) {
                mean[k] += a.points[i][k] / 100.0;
            }
        }
    }
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(mean[k] - mu1[k]) < bound);
    }

    const auto split = embed::split_80_20(a);
    CHECK(split.train.size() == 160);
    CHECK(split.test.size() == 40);

    CHECK_THROWS_AS((void)embed::gen_dataset(0, 1.0, 0.6, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)embed::gen_dataset(11, 1.0, 0.6, 1), std::invalid_argument);
}

TEST_CASE("kernel matrix properties") {
    const auto spec = EmbeddingSpec::anisotropic();
    const auto data = embed::gen_dataset(24, 1.2, 0.7, 7);
    const auto k = embed::kernel_matrix(data.points, spec);

    SUBCASE("unit diagonal, symmetric, entries in [0,1]") {
        for (std::size_t i = 0; i < k.size(); ++i) {
            CHECK(k[i][i] == doctest::Approx(1.0));
            for (std::size_t j = 0; j < k.size(); ++j) {
                CHECK(k[i][j] == doctest::Approx(k[j][i]).epsilon(1e-12));
                CHECK(k[i][j] >= -1e-12);
                CHECK(k[i][j] <= 1.0 + 1e-12);
            }
        }
    }
    SUBCASE("matches the direct double-loop overlap oracle") {
        const auto states = embed::embed_all(data.points, spec);
        for (std::size_t i = 0; i < k.size(); ++i) {
            for (std::size_t j = 0; j < k.size(); ++j) {
                const double direct = std::norm(qstate::inner(states[i], states[j]));
                CHECK(std::abs(k[i][j] - direct) < 1e-12);
            }
        }
    }
    SUBCASE("PSD within tolerance") {
        linalg::RMatrix m(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) {
            for (std::size_t j = 0; j < k.size(); ++j) {
                m(i, j) = k[i][j];
            }
        }
        CHECK(linalg::eig_symmetric(m).values.front() > -1e-8);
    }
    SUBCASE("identical rows give an all-ones block") {
        std::vector<std::vector<double>> xs = {data.points[0], data.points[0], data.points[0]};
        const auto kk = embed::kernel_matrix(xs, spec);
        for (const auto &row : kk) {
            for (double v : row) {
                CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
    SUBCASE("orthogonal embedded points give zero off-diagonal") {
        const double pi = 3.14159265358979323846;
        const EmbeddingSpec one_qubit({1.0}, 0.0);
        std::vector<std::vector<double>> xs = {{0.0}, {pi}};
        const auto kk = embed::kernel_matrix(xs, one_qubit);
        CHECK(std::abs(kk[0][1]) < 1e-12);
    }
}

TEST_CASE("svm on a block-constant separable kernel reaches 100% train accuracy") {
    const std::size_t n = 10;
    std::vector<std::vector<double>> k(n, std::vector<double>(n, 0.1));
    std::vector<int> lbl(n);
    for (std::size_t i = 0; i < n; ++i) {
        lbl[i] = i < n / 2 ? 0 : 1;
        for (std::size_t j = 0; j < n; ++j) {
            if ((i < n / 2) == (j < n / 2)) {
                k[i][j] = 0.9;
            }
        }
        k[i][i] = 1.0;
    }
    const auto model = svm::svm_fit(k, lbl, 1.0);
    CHECK(model.converged);
    CHECK(svm::accuracy(svm::svm_predict(model, k), lbl) == doctest::Approx(1.0));
}

TEST_CASE("duplicating a non-support training point leaves the decision function unchanged") {
    // Duplicating a point whose dual variable sits strictly inside the box
    // does not move the optimum (the combined mass just redistributes), so
    // the decision function is preserved. Solve to a tight KKT gap so the
    // comparison is limited by the optimum, not the stopping rule.
    const auto spec = EmbeddingSpec::anisotropic();
    const auto data = embed::gen_dataset(30, 1.5, 0.6, 11);
    auto points = data.points;
    auto labels = data.labels;
    const auto k1 = embed::kernel_matrix(points, spec);
    const auto m1 = svm::svm_fit(k1, labels, 1.0, 10000, 1e-9);

    std::size_t dup = points.size();
    for (std::size_t i = 0; i < m1.alpha.size(); ++i) {
        if (m1.alpha[i] < 1e-9) {
            dup = i;
            break;
        }
    }
    REQUIRE(dup < points.size());
    points.push_back(points[dup]);
    labels.push_back(labels[dup]);
    const auto k2 = embed::kernel_matrix(points, spec);
    const auto m2 = svm::svm_fit(k2, labels, 1.0, 10000, 1e-9);

    const auto probe = embed::gen_dataset(12, 1.5, 0.6, 12);
    const auto r1 = embed::kernel_cross(probe.points, data.points, spec);
    const auto r2 = embed::kernel_cross(probe.points, points, spec);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        CHECK(std::abs(svm::decision_value(m1, r1[i]) - svm::decision_value(m2, r2[i])) < 1e-6);
    }
}

TEST_CASE("svm dual objective is monotone nondecreasing across sweeps") {
    const auto spec = EmbeddingSpec::anisotropic();
    const auto data = embed::gen_dataset(40, 1.5, 0.6, 13);
    const auto k = embed::kernel_matrix(data.points, spec);
    double prev = -1e300;
    for (int sweeps = 1; sweeps <= 6; ++sweeps) {
        const auto m = svm::svm_fit(k, data.labels, 1.0, sweeps);
        CHECK(m.dual_objective >= prev - 1e-9);
        prev = m.dual_objective;
    }
}

TEST_CASE("svm rejects degenerate single-class input") {
    std::vector<std::vector<double>> k(4, std::vector<double>(4, 1.0));
    CHECK_THROWS_AS((void)svm::svm_fit(k, {1, 1, 1, 1}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)svm::svm_fit(k, {0, 1, 2, 1}, 1.0), std::invalid_argument);
}

TEST_CASE("dataset CSV roundtrip") {
    const auto ds = embed::gen_dataset(20, 1.2, 0.7, 99);
    std::stringstream ss;
    embed::save_dataset_csv(ds, ss);

    const std::string header = ss.str().substr(0, ss.str().find('\n'));
    CHECK(header == "x0,x1,x2,x3,label");

    std::stringstream in(ss.str());
    const auto back = embed::load_dataset_csv(in);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.labels[i] == ds.labels[i]);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(back.points[i][j] == doctest::Approx(ds.points[i][j]).epsilon(1e-12));
        }
    }
}
