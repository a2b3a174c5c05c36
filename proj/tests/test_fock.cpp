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

#include <gtest/gtest.h>

#include "kerr_herald/fock.hpp"

using namespace kerr_herald;

namespace {

// Independent route: truncated Taylor series of exp(G) on a space twice as
// large, restricted to the low-lying block.
Operator series_displacement(int dim, cplx alpha, int terms = 200) {
    const Operator a = fock::annihilation(dim);
    const Operator gen = alpha * a.adjoint() - std::conj(alpha) * a;
    Operator term = Operator::Identity(dim, dim);
    Operator sum = term;
    for (int k = 1; k < terms; ++k) {
        term = term * gen / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

} // namespace

TEST(Fock, AnnihilationLowersFockStates) {
    const Operator a = fock::annihilation(3);
    const StateVector down = a * fock::basis_state(3, 1);
    EXPECT_NEAR(std::abs(down(0) - 1.0), 0.0, 1e-15);
    EXPECT_EQ((a * fock::basis_state(3, 0)).norm(), 0.0);
    const Operator a5 = fock::annihilation(5);
    const Operator num = a5.adjoint() * a5;
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(num(k, k).real(), k, 1e-14);
}

TEST(Fock, InvalidDimensionThrows) {
    EXPECT_THROW(fock::annihilation(1), Error);
    try {
        fock::parity(0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidDimension);
    }
}

TEST(Fock, CommutatorIsIdentityBelowCutoff) {
    const int d = 12;
    const Operator a = fock::annihilation(d);
    const Operator c = a * a.adjoint() - a.adjoint() * a;
    const Operator inner = c.topLeftCorner(d - 1, d - 1) - Operator::Identity(d - 1, d - 1);
    EXPECT_LT(fock::max_abs(inner), 1e-12);
}

TEST(Fock, ParityAnticommutesWithAnnihilation) {
    const int d = 9;
    const Operator pi = fock::parity(d);
    const Operator a = fock::annihilation(d);
    EXPECT_EQ(fock::max_abs(pi * a + a * pi), 0.0);
    EXPECT_EQ(fock::max_abs(pi * pi - Operator::Identity(d, d)), 0.0);
    EXPECT_EQ((pi * fock::basis_state(d, 0) - fock::basis_state(d, 0)).norm(), 0.0);
    EXPECT_EQ((pi * fock::basis_state(d, 3) + fock::basis_state(d, 3)).norm(), 0.0);
}

TEST(Fock, DisplacementIdentityAndVacuumOverlap) {
    EXPECT_EQ(fock::max_abs(fock::displacement(6, 0.0) - Operator::Identity(6, 6)), 0.0);
    const Operator d1 = fock::displacement(40, 1.0);
    EXPECT_NEAR(std::abs(d1(0, 0) - std::exp(-0.5)), 0.0, 1e-8);
    EXPECT_LT(fock::max_abs(d1.adjoint() * d1 - Operator::Identity(40, 40)), 1e-8);
}

TEST(Fock, DisplacementMatchesSeriesOracle) {
    const cplx alpha(0.6, -0.8);
    const Operator expm = fock::displacement(40, alpha);
    const Operator series = series_displacement(80, alpha);
    EXPECT_LT(fock::max_abs(expm.topLeftCorner(15, 15) - series.topLeftCorner(15, 15)), 1e-8);
}

TEST(Fock, DisplacementInverse) {
    const int d = 40;
    const cplx alpha(1.2, 1.5);  // |alpha|^2 = 3.69 < d/8
    const Operator prod = fock::displacement(d, alpha) * fock::displacement(d, -alpha);
    EXPECT_LT(fock::max_abs(prod - Operator::Identity(d, d)), 1e-10);
}

TEST(Fock, TruncationWarning) {
    Warnings w;
    fock::displacement(8, 2.0, &w);
    EXPECT_EQ(w.size(), 1u);
    fock::coherent_state(40, 1.0, &w);
    EXPECT_EQ(w.size(), 1u);
}

TEST(Fock, CoherentStateMoments) {
    EXPECT_NEAR((fock::coherent_state(10, 0.0) - fock::basis_state(10, 0)).norm(), 0.0, 1e-15);
    const Operator a = fock::annihilation(40);
    const StateVector psi = fock::coherent_state(40, cplx(0.0, 0.7));
    EXPECT_NEAR(std::abs(fock::expectation(a, psi) - cplx(0.0, 0.7)), 0.0, 1e-8);
    const StateVector unit = fock::coherent_state(40, std::polar(1.0, 0.3));
    EXPECT_NEAR(fock::expectation(a.adjoint() * a, unit).real(), 1.0, 1e-8);
}

TEST(Fock, CatStateParityAndLimits) {
    const int d = 40;
    const Operator pi = fock::parity(d);
    for (double r : {0.3, 1.0, 1.7}) {
        const cplx alpha = std::polar(r, 0.4);
        const StateVector even = fock::cat_state(d, alpha, +1);
        const StateVector odd = fock::cat_state(d, alpha, -1);
        EXPECT_NEAR(even.norm(), 1.0, 1e-12);
        EXPECT_NEAR(odd.norm(), 1.0, 1e-12);
        EXPECT_NEAR(fock::expectation(pi, even).real(), 1.0, 1e-10);
        EXPECT_NEAR(fock::expectation(pi, odd).real(), -1.0, 1e-10);
    }
    const StateVector tiny = fock::cat_state(d, 1e-9, +1);
    EXPECT_NEAR(std::abs(tiny(0)), 1.0, 1e-12);
    EXPECT_THROW(fock::cat_state(d, 0.0, -1), Error);
}

TEST(Fock, CatPhotonNumbersMatchAnalyticFormula) {
    // even: |a|^2 tanh |a|^2, odd: |a|^2 coth |a|^2
    const int d = 50;
    const Operator n = fock::number(d);
    for (double r : {0.4, 0.8, 1.3}) {
        const double x = r * r;
        const double even = fock::expectation(n, fock::cat_state(d, r, +1)).real();
        const double odd = fock::expectation(n, fock::cat_state(d, r, -1)).real();
        EXPECT_NEAR(even, x * std::tanh(x), 1e-10);
        EXPECT_NEAR(odd, x / std::tanh(x), 1e-10);
        EXPECT_GE(odd, even);
    }
}

TEST(Fock, TraceDistance) {
    const int d = 30;
    const DensityMatrix vac = fock::projector(fock::basis_state(d, 0));
    const DensityMatrix one = fock::projector(fock::basis_state(d, 1));
    EXPECT_NEAR(fock::trace_distance(vac, vac), 0.0, 1e-15);
    EXPECT_NEAR(fock::trace_distance(vac, one), 1.0, 1e-14);
    const StateVector beta = fock::coherent_state(d, 0.5);
    const double expected = std::sqrt(1.0 - std::exp(-0.25));
    EXPECT_NEAR(fock::trace_distance(vac, fock::projector(beta)), expected, 1e-8);
    EXPECT_NEAR(fock::trace_distance(fock::basis_state(d, 0), beta), expected, 1e-8);
    EXPECT_THROW(fock::trace_distance(vac, DensityMatrix(fock::projector(fock::basis_state(5, 0)))), Error);
}

TEST(Fock, PureTraceDistanceKeepsPrecisionForCloseStates) {
    const int d = 10;
    const StateVector a = fock::basis_state(d, 0);
    StateVector b = a;
    b(1) = 1e-11;
    EXPECT_NEAR(fock::trace_distance(a, b), 1e-11, 1e-20);
}
