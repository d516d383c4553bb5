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
#include <vector>

#include "qdp/adversary.hpp"
#include "qdp/embed.hpp"
#include "qdp/qfi.hpp"

using namespace qdp;
using embed::EmbeddingSpec;

namespace {

qfi::QfiSpectrum diag_spectrum(std::vector<double> lambdas) {
    qfi::QfiSpectrum s;
    const std::size_t p = lambdas.size();
    s.eigenvalues = std::move(lambdas);
    s.eigenvectors.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t k = 0; k < p; ++k) {
        s.eigenvectors[k][k] = 1.0;
    }
    return s;
}

} // namespace

TEST_CASE("evasion report on synthetic spectra") {
    SUBCASE("isotropic spectrum has ratio 1") {
        const auto rep = adversary::evasion_analysis(diag_spectrum({0.25, 0.25, 0.25, 0.25}), 0.1);
        CHECK(rep.ratio == doctest::Approx(1.0));
        CHECK_FALSE(rep.ratio_infinite);
    }
    SUBCASE("the reference anisotropic spectrum has ratio 100") {
        const auto rep = adversary::evasion_analysis(diag_spectrum({9.0, 9.0, 0.09, 0.09}), 0.1);
        CHECK(rep.ratio == doctest::Approx(100.0).epsilon(1e-10));
        CHECK(rep.d_inf_max == doctest::Approx(0.5 * 0.01 * 9.0));
    }
    SUBCASE("vanishing lambda_min flags an infinite ratio") {
        const auto rep = adversary::evasion_analysis(diag_spectrum({1.0, 0.0}), 0.1);
        CHECK(rep.ratio_infinite);
    }
    SUBCASE("eps_adv must be positive") {
        CHECK_THROWS_AS((void)adversary::evasion_analysis(diag_spectrum({1.0}), 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("QFI quadratic form matches the measured distinguishability") {
    // Eq. 6/7 route: -ln |<psi(x)|psi(x+delta)>|^2 ~ (1/4) delta^T F delta.
    const auto spec = EmbeddingSpec::anisotropic();
    const std::vector<double> x = {0.5, 0.5, 0.5, 0.5};
    const auto s = qfi::spectral(qfi::qfi_pure(x, spec));
    for (double eps_adv : {0.02, 0.05}) {
        for (std::size_t mode : {std::size_t{0}, std::size_t{3}}) {
            const double lambda = s.eigenvalues[mode];
            const double predicted = 0.25 * eps_adv * eps_adv * lambda;
            const double measured =
                adversary::measured_distinguishability(x, s.eigenvectors[mode], eps_adv, spec);
            CHECK(std::abs(measured - predicted) <= 0.10 * predicted);
        }
    }
}

TEST_CASE("leakage profile") {
    SUBCASE("reference spectrum reproduces the per-mode bounds") {
        const auto prof = adversary::leakage_profile({11.2, 1.0, 0.09, 0.01}, 1.0, 1.0);
        CHECK(prof.mode_bounds[0] == doctest::Approx(0.5 * std::log(12.2)).epsilon(1e-12));
        CHECK(prof.mode_bounds[0] == doctest::Approx(1.2509).epsilon(4e-4));
        CHECK(prof.fractions[0] == doctest::Approx(0.760).epsilon(0.005));
        CHECK(prof.fractions[3] == doctest::Approx(0.003).epsilon(0.2));
    }
    SUBCASE("zero mode leaks nothing") {
        const auto prof = adversary::leakage_profile({1.0, 0.0}, 1.0, 1.0);
        CHECK(prof.mode_bounds[1] == doctest::Approx(0.0));
    }
    SUBCASE("degenerate pair splits evenly") {
        const auto prof = adversary::leakage_profile({2.0, 2.0}, 1.0, 1.0);
        CHECK(prof.fractions[0] == doctest::Approx(0.5));
        CHECK(prof.fractions[1] == doctest::Approx(0.5));
    }
    SUBCASE("monotone in lambda") {
        const auto prof = adversary::leakage_profile({5.0, 3.0, 1.0, 0.2, 0.2, 0.01}, 2.0, 0.5);
        for (std::size_t k = 0; k + 1 < prof.mode_bounds.size(); ++k) {
            CHECK(prof.mode_bounds[k] >= prof.mode_bounds[k + 1] - 1e-12);
        }
    }
    SUBCASE("invalid inputs rejected") {
        CHECK_THROWS_AS((void)adversary::leakage_profile({1.0}, 0.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS((void)adversary::leakage_profile({1.0}, 1.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("poisoning experiment") {
    const auto spec = EmbeddingSpec::anisotropic();
    const auto data = embed::gen_dataset(40, 1.2, 0.7, 5);
    const std::vector<double> delta_x = {2.0, 0.0, 0.0, 0.0};

    SUBCASE("beta = 0 changes nothing") {
        const auto rep = adversary::poison_experiment(data, 0.0, delta_x, spec);
        CHECK(rep.poisoned_mean == doctest::Approx(rep.clean_mean));
        CHECK(rep.poisoned_median == doctest::Approx(rep.clean_median));
    }
    SUBCASE("centroid shift is exactly beta * delta_x") {
        // Linearity of the mean: the poisoned centroid equals the clean one
        // plus beta*delta_x, no matter which points were picked, so the
        // mean-based estimate must match lambda_max at that shifted point.
        const double beta = 0.1; // beta*n = 4 exactly
        const auto rep = adversary::poison_experiment(data, beta, delta_x, spec, 9);
        auto shifted = data.centroid();
        for (std::size_t k = 0; k < 4; ++k) {
            shifted[k] += beta * delta_x[k];
        }
        CHECK(rep.poisoned_mean ==
              doctest::Approx(qfi::lambda_max(qfi::qfi_pure(shifted, spec))).epsilon(1e-9));
    }
    SUBCASE("median resists the shift better than the centroid") {
        const auto rep = adversary::poison_experiment(data, 0.1, delta_x, spec, 7);
        const double mean_err = std::abs(rep.poisoned_mean - rep.clean_mean) / rep.clean_mean;
        const double med_err =
            std::abs(rep.poisoned_median - rep.clean_median) / rep.clean_median;
        CHECK(med_err <= mean_err + 1e-12);
    }
    SUBCASE("beta >= 0.5 voids the median guarantee") {
        CHECK_THROWS_AS((void)adversary::poison_experiment(data, 0.5, delta_x, spec),
                        std::invalid_argument);
    }
}

TEST_CASE("dephasing mutual information") {
    const auto spec = EmbeddingSpec::anisotropic();
    const std::vector<double> centroid = {0.0, 0.0, 0.0, 0.0};
    const double pi_half = 1.5707963267948966;

    SUBCASE("gamma = 0 is independent of the basis angle") {
        const double a = adversary::dephasing_mi(0.0, 0.0, spec, 0, 32, centroid);
        const double b = adversary::dephasing_mi(pi_half, 0.0, spec, 0, 32, centroid);
        const double c = adversary::dephasing_mi(0.7, 0.0, spec, 0, 32, centroid);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(a == doctest::Approx(c).epsilon(1e-12));
    }
    SUBCASE("aligned dephasing never falls below the noiseless baseline") {
        const double baseline = adversary::dephasing_mi(0.0, 0.0, spec, 0, 32, centroid);
        for (double g : {0.2, 0.6, 0.9}) {
            CHECK(adversary::dephasing_mi(0.0, g, spec, 0, 32, centroid) >= baseline - 1e-12);
        }
    }
    SUBCASE("misaligned dephasing is nonincreasing in gamma") {
        double prev = 1e300;
        for (double g : {0.0, 0.2, 0.4, 0.6, 0.8}) {
            const double mi = adversary::dephasing_mi(pi_half, g, spec, 0, 32, centroid);
            CHECK(mi <= prev + 1e-12);
            prev = mi;
        }
    }
    SUBCASE("MI respects the channel capacity ceiling") {
        for (double th : {0.0, 0.5, pi_half}) {
            for (double g : {0.0, 0.5}) {
                CHECK(adversary::dephasing_mi(th, g, spec, 0, 32, centroid) <= std::log(32.0));
            }
        }
    }
    SUBCASE("strong dephasing dips below the cos^2 interpolation at mid angles") {
        // The Eq.-16 residual I_theta - I_0 cos^2(theta) is negative at
        // intermediate angles once gamma is large; at theta -> pi/2 the
        // nonnegative MI floor dominates and the residual turns positive.
        const double baseline = adversary::dephasing_mi(0.0, 0.0, spec, 0, 32, centroid);
        for (double deg : {30.0, 45.0, 60.0}) {
            const double th = deg * 3.14159265358979323846 / 180.0;
            const double mi = adversary::dephasing_mi(th, 0.8, spec, 0, 32, centroid);
            CHECK(mi < baseline * std::cos(th) * std::cos(th));
        }
    }
    SUBCASE("degenerate grid rejected") {
        CHECK_THROWS_AS((void)adversary::dephasing_mi(0.0, 0.5, spec, 0, 4, centroid),
                        std::invalid_argument);
    }
}
