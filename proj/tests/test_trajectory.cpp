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


#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "kerr_herald/spectral.hpp"
#include "kerr_herald/steady.hpp"
#include "kerr_herald/trajectory.hpp"
#include "test_util.hpp"

using namespace kerr_herald;
using kerr_herald::testing::parametric_params;
using kerr_herald::testing::semiclassical_params;

namespace {

// Asymptotic Kolmogorov-Smirnov p-value for a sample against a continuous CDF.
double ks_pvalue(std::vector<double> x, auto cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    return std::clamp(q, 0.0, 1.0);
}

TrajectoryOptions few_samples(int n = 2) {
    TrajectoryOptions o;
    o.samples = n;
    return o;
}

} // namespace

TEST(Sse, SinglePhotonDecayIsExponential) {
    SystemParams p;
    p.fock_dim = 4;
    const StateVector one = fock::basis_state(4, 1);
    std::vector<double> waits;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const Trajectory tr = simulate_sse(p, one, 60.0, derive_seed(2024, i), few_samples());
        ASSERT_EQ(tr.jump_times.size(), 1u) << i;
        waits.push_back(tr.jump_times[0]);
        EXPECT_NEAR(std::abs(tr.segment_end.back()(0, 0)), 1.0, 1e-12);
    }
    const double p_value = ks_pvalue(waits, [](double t) { return 1.0 - std::exp(-t); });
    EXPECT_GT(p_value, 0.01);
}

TEST(Sse, WaitingTimeMatchesThreshold) {
    // with a single decaying level the click time is exactly -ln(u)
    SystemParams p;
    p.fock_dim = 3;
    const std::uint64_t seed = 99;
    std::mt19937_64 rng(seed);
    const double u = open_uniform(rng);
    const Trajectory tr = simulate_sse(p, fock::basis_state(3, 1), 100.0, seed, few_samples());
    ASSERT_EQ(tr.jump_times.size(), 1u);
    EXPECT_NEAR(tr.jump_times[0], -std::log(u), 1e-8);
}

TEST(Sse, CoherentSteadyStateIsJumpInvariant) {
    SystemParams p;
    p.delta = 0.5;
    p.alpha1 = 0.6;
    p.fock_dim = 25;
    const cplx beta = -I_unit * p.alpha1 / (0.5 - I_unit * p.delta);
    const Trajectory tr = simulate_sse(p, fock::coherent_state(25, beta), 30.0, 5, few_samples(300));
    EXPECT_GT(tr.jump_times.size(), 5u);
    for (const cplx& a : tr.mean_a) EXPECT_LT(std::abs(a - beta), 1e-6);
}

TEST(Sse, RequiresIdealDetection) {
    SystemParams p = semiclassical_params(10);
    p.eta = 0.5;
    try {
        simulate_sse(p, fock::basis_state(10, 0), 1.0, 1);
        FAIL() << "expected use-sme";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UseSme);
    }
}

TEST(Sse, DeterministicForFixedSeed) {
    const SystemParams p = semiclassical_params(20);
    const StateVector vac = fock::basis_state(20, 0);
    const Trajectory a = simulate_sse(p, vac, 50.0, 77, few_samples(100));
    const Trajectory b = simulate_sse(p, vac, 50.0, 77, few_samples(100));
    ASSERT_EQ(a.jump_times.size(), b.jump_times.size());
    for (std::size_t i = 0; i < a.jump_times.size(); ++i) EXPECT_EQ(a.jump_times[i], b.jump_times[i]);
    const Trajectory c = simulate_sse(p, vac, 50.0, 78, few_samples(100));
    EXPECT_NE(a.jump_times, c.jump_times);
}

TEST(Sse, EnsembleIndependentOfThreadCount) {
    const SystemParams p = semiclassical_params(15);
    const StateVector vac = fock::basis_state(15, 0);
    const auto one = simulate_ensemble(p, vac, 20.0, 11, 16, few_samples(50), 1);
    const auto four = simulate_ensemble(p, vac, 20.0, 11, 16, few_samples(50), 4);
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].seed, four[i].seed);
        EXPECT_EQ(one[i].jump_times, four[i].jump_times);
        EXPECT_EQ(one[i].n_expect, four[i].n_expect);
    }
}

TEST(Sse, NormalizedSamplesAndJumpFlags) {
    const SystemParams p = semiclassical_params(20);
    TrajectoryOptions o = few_samples(400);
    o.store_states = true;
    const Trajectory tr = simulate_sse(p, fock::basis_state(20, 0), 40.0, 3, o);
    ASSERT_EQ(tr.times.size(), 400u);
    EXPECT_DOUBLE_EQ(tr.times.back(), 40.0);
    for (const auto& s : tr.states) EXPECT_NEAR(s.norm(), 1.0, 1e-8);
    std::size_t flagged = 0;
    for (auto f : tr.jumped) flagged += f;
    EXPECT_GT(flagged, 0u);
    EXPECT_LE(flagged, tr.jump_times.size());
    EXPECT_TRUE(std::is_sorted(tr.jump_times.begin(), tr.jump_times.end()));
    EXPECT_EQ(std::adjacent_find(tr.jump_times.begin(), tr.jump_times.end()), tr.jump_times.end());
    EXPECT_EQ(tr.segment_end.size(), tr.jump_times.size() + 1);
}

TEST(Sme, AgreesPathwiseWithSse) {
    const SystemParams p = semiclassical_params(20);
    const StateVector vac = fock::basis_state(20, 0);
    TrajectoryOptions o = few_samples(200);
    o.rtol = 1e-10;
    o.atol = 1e-12;
    o.store_states = true;
    const Trajectory pure = simulate_sse(p, vac, 30.0, 123, o);
    const Trajectory mixed = simulate_sme(p, fock::projector(vac), 30.0, 123, o);
    ASSERT_EQ(pure.jump_times.size(), mixed.jump_times.size());
    ASSERT_GT(pure.jump_times.size(), 3u);
    for (std::size_t i = 0; i < pure.jump_times.size(); ++i)
        EXPECT_NEAR(pure.jump_times[i], mixed.jump_times[i], 1e-7);
    for (std::size_t k = 0; k < pure.states.size(); ++k)
        EXPECT_LT(state_distance(pure.states[k], mixed.states[k]), 1e-6) << k;
}

TEST(Sme, UnmonitoredChannelNeverClicks) {
    SystemParams p = semiclassical_params(12);
    p.eta = 0.0;
    const DensityMatrix vac = fock::projector(fock::basis_state(12, 0));
    TrajectoryOptions o = few_samples(11);
    o.store_states = true;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    const Trajectory tr = simulate_sme(p, vac, 5.0, 1, o);
    EXPECT_TRUE(tr.jump_times.empty());
    const Eigen::MatrixXcd l = build_liouvillian(p).matrix;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const DensityMatrix exact = super::unvec((l * tr.times[k]).exp() * super::vec(vac), 12);
        EXPECT_LT(fock::trace_distance(exact, DensityMatrix(tr.states[k])), 1e-7) << k;
    }
}

TEST(Sme, ParityFlipsAtEveryClick) {
    const SystemParams p = parametric_params(20);
    const Trajectory tr = simulate_sse(p, fock::basis_state(20, 0), 100.0, 17, few_samples(1000));
    ASSERT_GT(tr.jump_times.size(), 10u);
    for (std::size_t j = 0; j < tr.jump_times.size(); ++j) {
        EXPECT_LT(tr.parity_before_jump[j] * tr.parity_after_jump[j], 0.0);
        EXPECT_GT(std::abs(tr.parity_after_jump[j]), 1.0 - 1e-6);
    }
    for (double v : tr.parity) EXPECT_GT(std::abs(v), 1.0 - 1e-6);
}

TEST(Sme, RejectsCollapsedState) {
    SystemParams p = semiclassical_params(8);
    EXPECT_THROW(simulate_sme(p, DensityMatrix::Zero(8, 8), 1.0, 1), Error);
}

// ---------------------------------------------------------- reductions

TEST(Ensemble, SingleTrajectoryIsItself) {
    const SystemParams p = semiclassical_params(15);
    const auto trajs = simulate_ensemble(p, fock::basis_state(15, 0), 10.0, 1, 1, few_samples(20));
    const EnsembleAverage avg = ensemble_average(trajs);
    EXPECT_EQ(avg.mean_n, trajs[0].n_expect);
    for (double s : avg.se_n) EXPECT_EQ(s, 0.0);
}

TEST(Ensemble, GridMismatchRaises) {
    const SystemParams p = semiclassical_params(10);
    std::vector<Trajectory> trajs{simulate_sse(p, fock::basis_state(10, 0), 10.0, 1, few_samples(20)),
                                  simulate_sse(p, fock::basis_state(10, 0), 12.0, 2, few_samples(20))};
    try {
        ensemble_average(trajs);
        FAIL() << "expected grid-mismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::GridMismatch);
    }
}

TEST(Ensemble, ReproducesSteadyStatePhotonNumber) {
    for (const SystemParams& p : {semiclassical_params(30), parametric_params(20)}) {
        const double n_ss = steady_state(p).mean_n;
        const auto trajs = simulate_ensemble(p, fock::basis_state(p.fock_dim, 0), 20.0, 500, 500, few_samples(21),
                                             resolve_threads(0));
        const EnsembleAverage avg = ensemble_average(trajs);
        EXPECT_LT(std::abs(avg.mean_n.back() - n_ss), 3.0 * avg.se_n.back()) << n_ss;
    }
}

TEST(Heralds, JumpFreeTrajectoryIsOneInterval) {
    SystemParams p;
    p.fock_dim = 5;
    const Trajectory tr = simulate_sse(p, fock::basis_state(5, 0), 10.0, 1, few_samples());
    const HeraldReport rep = detect_heralds(tr, 1.0, 5.0, {fock::basis_state(5, 0)});
    ASSERT_EQ(rep.intervals.size(), 1u);
    EXPECT_EQ(rep.intervals[0].start, 0.0);
    EXPECT_EQ(rep.intervals[0].end, 10.0);
    EXPECT_NEAR(rep.intervals[0].fidelity_at_end, 1.0, 1e-12);
}

TEST(FitRelaxation, RecoversSyntheticRate) {
    Trajectory tr;
    for (int k = 0; k < 400; ++k) {
        const double t = 0.05 * k;
        tr.times.push_back(t);
        tr.trace_dist_ref.push_back(0.8 * std::exp(-0.37 * t));
        tr.nearest_ref.push_back(0);
        tr.jumped.push_back(0);
    }
    const RelaxationFit fit = fit_relaxation(tr);
    EXPECT_NEAR(fit.rate, 0.37, 0.0037);
    EXPECT_GT(fit.decades, 2.0);

    for (auto& d : tr.trace_dist_ref) d = 0.5;
    try {
        fit_relaxation(tr);
        FAIL() << "expected insufficient-decay";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientDecay);
    }
}

// ------------------------------------------------- semiclassical figure

class SemiclassicalRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        params_ = semiclassical_params(30);
        ps_ = stable_pseudo_state(pure_spectrum(effective_nonhermitian(params_)));
        gamma_jump_ = steady_state(params_).gamma_jump;
        TrajectoryOptions o;
        o.samples = 20001;
        o.references = {ps_.state};
        trajs_ = simulate_ensemble(params_, fock::basis_state(30, 0), 2000.0, 2, 20, o, resolve_threads(0));
    }
    static inline SystemParams params_;
    static inline PseudoState ps_;
    static inline double gamma_jump_ = 0.0;
    static inline std::vector<Trajectory> trajs_;
};

TEST_F(SemiclassicalRun, ClickRateMatchesSteadyState) {
    const ClickRate cr = empirical_click_rate(trajs_[0], 20, 20.0);
    EXPECT_LT(std::abs(cr.rate - gamma_jump_), 3.0 * cr.standard_error);
}

TEST_F(SemiclassicalRun, RelaxationFitMatchesGap) {
    const RelaxationFit fit = fit_relaxation(trajs_[0]);
    EXPECT_NEAR(fit.rate, ps_.rates.gamma_rel, 0.1 * ps_.rates.gamma_rel);
}

TEST_F(SemiclassicalRun, HeraldedStatesHaveHighFidelity) {
    std::size_t intervals = 0;
    double worst = 1.0;
    for (const auto& tr : trajs_) {
        const HeraldReport rep = detect_heralds(tr, ps_.rates.gamma_rel, 5.0, {ps_.state});
        for (const auto& iv : rep.intervals) {
            ++intervals;
            worst = std::min(worst, iv.fidelity_at_end);
        }
    }
    EXPECT_GE(intervals, 100u);
    EXPECT_GT(worst, 0.98);
}

TEST_F(SemiclassicalRun, HeraldCountFollowsSurvivalProbability) {
    // expected count: for every click, the no-click survival of the post-click
    // state up to k / gamma_rel
    const double tau = 5.0 / ps_.rates.gamma_rel;
    const Operator u = (-I_unit * effective_nonhermitian(params_) * tau).exp();
    const Operator c = monitored_jump_operator(params_);
    double expected = 0.0, variance = 0.0, naive = 0.0;
    std::size_t observed = 0;
    for (const auto& tr : trajs_) {
        const HeraldReport rep = detect_heralds(tr, ps_.rates.gamma_rel, 5.0);
        for (std::size_t j = 0; j < tr.jump_times.size(); ++j) {
            if (tr.jump_times[j] + tau > tr.t_final()) continue;
            const StateVector post = (c * StateVector(tr.segment_end[j].col(0))).normalized();
            const double s = (u * post).squaredNorm();
            expected += s;
            variance += s * (1.0 - s);
            naive += std::exp(-tau * gamma_jump_);
        }
        for (const auto& iv : rep.intervals)
            if (iv.start > 0.0 && iv.start + tau <= tr.t_final()) ++observed;
    }
    EXPECT_LT(std::abs(static_cast<double>(observed) - expected), 3.0 * std::sqrt(variance));
    RecordProperty("naive_exponential_prediction", std::to_string(naive));
    RecordProperty("observed", std::to_string(observed));
}

// ------------------------------------------------------ parametric figure

TEST(ParametricRun, PostClickRelaxationFollowsSectorGap) {
    const SystemParams p = parametric_params(20);
    const PureSpectrum s = pure_spectrum(effective_nonhermitian(p));
    const PseudoState ps = parity_rates(s);
    ASSERT_EQ(s.parity_labels[ps.index], Parity::Even);
    TrajectoryOptions o;
    o.samples = 20001;
    o.references = {s.right.col(s.stable_even).normalized(), s.right.col(s.stable_odd).normalized()};
    const Trajectory tr = simulate_sse(p, fock::basis_state(20, 0), 2000.0, 4, o);
    RelaxationFitOptions fo;
    fo.reference = 0;
    const RelaxationFit fit = fit_relaxation(tr, fo);
    EXPECT_NEAR(fit.rate, ps.rates.gamma_rel, 0.1 * ps.rates.gamma_rel);
    EXPECT_GT(std::abs(fit.rate - *ps.rates.gamma_asy), 0.2 * *ps.rates.gamma_asy);
}

TEST(ParametricRun, ThermalHeraldsEndNearMixedPseudoState) {
    SystemParams p = parametric_params(16);
    p.n_th = 0.1;
    const MixedPseudoState ps = mixed_pseudo_state(mixed_spectrum(p));
    TrajectoryOptions o;
    o.samples = 101;
    const Trajectory tr = simulate_sme(p, fock::projector(fock::basis_state(16, 0)), 400.0, 6, o);
    const HeraldReport rep = detect_heralds(tr, ps.rates.gamma_rel, 5.0, {ps.rho});
    ASSERT_FALSE(rep.intervals.empty());
    for (const auto& iv : rep.intervals) EXPECT_LT(iv.distance_at_end, 0.05);
}
