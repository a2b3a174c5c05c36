// Copyright 2026 The kerr-herald Authors
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


#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kerr_herald/spectral.hpp"
#include "kerr_herald/steady.hpp"
#include "kerr_herald/wigner.hpp"
#include "test_util.hpp"

using namespace kerr_herald;
using kerr_herald::testing::random_density;
using kerr_herald::testing::semiclassical_params;

namespace {

constexpr double inv_pi = 1.0 / std::numbers::pi;

// Independent route: embed rho in a large space and evaluate
// Tr[rho D(alpha) P D^dag(alpha)] / pi with matrix exponentials.
cplx wigner_by_expm(const DensityMatrix& rho, cplx alpha, int big = 90) {
    const int d = static_cast<int>(rho.rows());
    DensityMatrix r = DensityMatrix::Zero(big, big);
    r.topLeftCorner(d, d) = rho;
    const Operator disp = fock::displacement(big, alpha);
    return (r * disp * fock::parity(big) * disp.adjoint()).trace() * inv_pi;
}

} // namespace

TEST(Wigner, ParityEigenstatesAtOrigin) {
    EXPECT_NEAR(wigner_at(fock::basis_state(10, 0), 0.0), inv_pi, 1e-15);
    EXPECT_NEAR(wigner_at(fock::basis_state(10, 1), 0.0), -inv_pi, 1e-15);
    for (cplx a : {cplx(0.7, 0.0), cplx(0.3, 1.1)}) {
        EXPECT_NEAR(wigner_at(fock::cat_state(30, a, +1), 0.0), inv_pi, 1e-12);
        EXPECT_NEAR(wigner_at(fock::cat_state(30, a, -1), 0.0), -inv_pi, 1e-12);
    }
}

TEST(Wigner, CoherentStateIsGaussian) {
    const cplx beta(0.8, -0.4);
    const StateVector psi = fock::coherent_state(40, beta);
    for (cplx a : {cplx(0, 0), cplx(1, 0), cplx(0.8, -0.2), cplx(-0.5, 0.9)})
        EXPECT_NEAR(wigner_at(psi, a), inv_pi * std::exp(-2.0 * std::norm(a - beta)), 1e-10);
}

TEST(Wigner, RecursionMatchesExponentialRoute) {
    std::mt19937_64 rng(17);
    const DensityMatrix rho = random_density(10, rng);
    for (cplx a : {cplx(0.0, 0.0), cplx(0.4, -0.3), cplx(-1.2, 0.5), cplx(2.0, 1.5)}) {
        const cplx oracle = wigner_by_expm(rho, a);
        EXPECT_NEAR(wigner_at(rho, a), oracle.real(), 1e-10) << a;
        EXPECT_LT(std::abs(oracle.imag()), 1e-10);
    }
}

TEST(Wigner, GridIntegratesToHalfTrace) {
    // with the 1/pi prefactor, integral of W over d^2 alpha is Tr(rho) / 2
    const StateVector cat = fock::cat_state(40, cplx(1.5, 0.0), +1);
    ASSERT_LE(fock::expectation(fock::number(40), cat).real(), 3.0);
    const WignerGrid g = wigner(cat, {0.0, 4.0, 161});
    EXPECT_NEAR(2.0 * g.values.sum() * g.cell_area(), 1.0, 0.02);
    EXPECT_LT(g.min_value, 0.0);
}

TEST(Wigner, DisplacementCovariance) {
    std::mt19937_64 rng(3);
    const DensityMatrix small = random_density(4, rng);
    const int d = 50;
    DensityMatrix rho = DensityMatrix::Zero(d, d);
    rho.topLeftCorner(4, 4) = small;
    const cplx beta(0.6, -0.3);
    const Operator disp = fock::displacement(d, beta);
    const DensityMatrix moved = disp * rho * disp.adjoint();
    const WignerGrid a = wigner(moved, {beta, 1.5, 11});
    const WignerGrid b = wigner(rho, {0.0, 1.5, 11});
    EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Wigner, GridMetadata) {
    const WignerGrid g = wigner(fock::basis_state(10, 1), {cplx(0.1, 0.2), 2.0, 41});
    EXPECT_EQ(g.values.rows(), 41);
    EXPECT_DOUBLE_EQ(g.re_axis.front(), 0.1 - 2.0);
    EXPECT_DOUBLE_EQ(g.im_axis.back(), 0.2 + 2.0);
    EXPECT_NEAR(g.min_value, -inv_pi, 1e-2);
    EXPECT_LT(std::abs(g.argmin), 0.1);
}

TEST(Wigner, ThreadCountDoesNotChangeValues) {
    std::mt19937_64 rng(5);
    const DensityMatrix rho = random_density(12, rng);
    const WignerGrid a = wigner(rho, {0.0, 2.0, 31}, 1);
    const WignerGrid b = wigner(rho, {0.0, 2.0, 31}, 4);
    EXPECT_EQ(a.values, b.values);
}

TEST(Wigner, RejectsInvalidInput) {
    DensityMatrix bad = DensityMatrix::Zero(4, 4);
    bad(0, 1) = 1.0;
    EXPECT_THROW(wigner_at(bad, 0.0), Error);
    try {
        wigner(fock::basis_state(4, 0), {0.0, 10.0, 11});
        FAIL() << "expected truncation-domain";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TruncationDomain);
    }
}

TEST(Negativity, ClassicalAndFockStates) {
    EXPECT_EQ(negativity(fock::coherent_state(30, cplx(0.5, 1.0))).negativity, 0.0);
    EXPECT_EQ(negativity(fock::basis_state(10, 0)).negativity, 0.0);
    const NegativityReport one = negativity(fock::basis_state(10, 1));
    EXPECT_NEAR(one.negativity, inv_pi, 1e-4);
    EXPECT_LT(std::abs(one.argmin), 1e-3);
}

TEST(Negativity, OddCatMinimumAtOrigin) {
    const NegativityReport r = negativity(fock::cat_state(30, cplx(0.0, 1.2), -1));
    EXPECT_NEAR(r.negativity, inv_pi, 1e-4);
}

TEST(Negativity, RotationInvariant) {
    const StateVector psi = stable_pseudo_state(pure_spectrum(effective_nonhermitian(semiclassical_params(30)))).state;
    const double base = negativity(psi).negativity;
    for (double theta : {0.4, 2.0}) {
        const StateVector turned = fock::rotation(30, theta) * psi;
        EXPECT_NEAR(negativity(turned).negativity, base, 1e-6);
    }
}

TEST(Negativity, SteadyStateIsPositive) {
    const SteadyStateResult r = steady_state(semiclassical_params(40));
    EXPECT_LT(negativity(r.rho_ss).negativity, 1e-6);
}

TEST(Negativity, PseudoStateIsNonclassical) {
    const StateVector psi = stable_pseudo_state(pure_spectrum(effective_nonhermitian(semiclassical_params(40)))).state;
    EXPECT_GT(negativity(psi).negativity, 1e-2);
}

TEST(Negativity, LowEfficiencyLocalOscillatorState) {
    SystemParams p = semiclassical_params(20);
    p.xi = std::polar(0.9, 1.8);
    p.eta = 0.25;
    const MixedPseudoState ps = mixed_pseudo_state(mixed_spectrum(p));
    EXPECT_GT(negativity(ps.rho).negativity, 0.0);
}
