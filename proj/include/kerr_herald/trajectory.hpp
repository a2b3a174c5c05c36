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


// Photon-counting trajectories. Both the state-vector and the density-matrix
// unravelings use the waiting-time method: the unnormalized state follows the
// linear no-click flow and a click fires when its norm (trace) falls below a
// pre-drawn uniform variate.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "kerr_herald/errors.hpp"
#include "kerr_herald/fock.hpp"
#include "kerr_herald/integrator.hpp"
#include "kerr_herald/model.hpp"
#include "kerr_herald/numerics.hpp"

namespace kerr_herald {

/// Uniform variate in the open interval (0, 1) from the top 53 bits.
inline double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

struct TrajectoryOptions {
    int samples = 2000;  // uniform grid over [0, t_final], both ends included
    bool store_states = false;
    // Reference states for trace_dist_ref: column vectors or density matrices.
    // The recorded distance is the smallest over the list.
    std::vector<Eigen::MatrixXcd> references;
    double rtol = 1e-8;
    double atol = 1e-10;
    double jump_time_tolerance = 1e-10;  // relative
    double renormalize_below = 1e-3;
};

struct Trajectory {
    std::uint64_t seed = 0;
    bool mixed = false;
    std::vector<double> times;
    std::vector<double> n_expect;
    std::vector<cplx> mean_a;
    std::vector<double> parity;
    std::vector<double> trace_dist_ref;  // NaN without references
    std::vector<int> nearest_ref;        // -1 without references
    std::vector<std::uint8_t> jumped;    // a click happened in (t_{k-1}, t_k]
    std::vector<double> jump_times;
    std::vector<double> parity_before_jump;
    std::vector<double> parity_after_jump;
    // Normalized state at the end of every click-free segment: the pre-click
    // state for each jump, then the final state.
    std::vector<Eigen::MatrixXcd> segment_end;
    std::vector<Eigen::MatrixXcd> states;  // only with store_states

    double t_final() const { return times.empty() ? 0.0 : times.back(); }
};

/// Trace distance between two states given as column vectors or matrices.
inline double state_distance(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
    const bool xv = x.cols() == 1, yv = y.cols() == 1;
    if (xv && yv) return fock::trace_distance(StateVector(x.col(0)), StateVector(y.col(0)));
    const DensityMatrix rx = xv ? fock::projector(StateVector(x.col(0)).normalized()) : DensityMatrix(x);
    const DensityMatrix ry = yv ? fock::projector(StateVector(y.col(0)).normalized()) : DensityMatrix(y);
    return fock::trace_distance(rx, ry);
}

inline double state_fidelity(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
    const bool xv = x.cols() == 1, yv = y.cols() == 1;
    if (xv && yv) return fock::fidelity(StateVector(x.col(0)), StateVector(y.col(0)));
    if (xv) return fock::fidelity(StateVector(x.col(0)), DensityMatrix(y));
    if (yv) return fock::fidelity(StateVector(y.col(0)), DensityMatrix(x));
    return fock::fidelity(DensityMatrix(x), DensityMatrix(y));
}

namespace detail {

struct PureKind {
    static constexpr bool mixed = false;
    Operator g;  // -i H_eff
    Operator c;
    double measure(const Eigen::MatrixXcd& y) const { return y.squaredNorm(); }
    Eigen::MatrixXcd normalize(const Eigen::MatrixXcd& y) const { return y / y.norm(); }
    Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& y) const { return g * y; }
    Eigen::MatrixXcd jump(const Eigen::MatrixXcd& y) const { return c * y; }
    cplx expect(const Operator& op, const Eigen::MatrixXcd& y) const { return y.col(0).dot(op * y.col(0)); }
    double scale(double m) const { return std::sqrt(m); }
};

struct MixedKind {
    static constexpr bool mixed = true;
    GeneratorForm form;
    Operator c;
    double measure(const Eigen::MatrixXcd& y) const { return y.trace().real(); }
    Eigen::MatrixXcd normalize(const Eigen::MatrixXcd& y) const {
        const Eigen::MatrixXcd h = 0.5 * (y + y.adjoint());
        return h / h.trace().real();
    }
    Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& y) const { return form.apply(y); }
    Eigen::MatrixXcd jump(const Eigen::MatrixXcd& y) const { return c * y * c.adjoint(); }
    cplx expect(const Operator& op, const Eigen::MatrixXcd& y) const { return (op * y).trace(); }
    double scale(double m) const { return m; }
};

template <class Kind>
Trajectory run_trajectory(const Kind& kind, const Eigen::MatrixXcd& initial, double t_final, std::uint64_t seed,
                          const TrajectoryOptions& opt) {
    if (!(t_final > 0.0) || !std::isfinite(t_final))
        throw Error(ErrorKind::InvalidParameter, "t_final must be positive and finite");
    if (opt.samples < 2) throw Error(ErrorKind::InvalidParameter, "need at least two samples");
    const int d = static_cast<int>(initial.rows());
    for (const auto& r : opt.references)
        if (r.rows() != d) throw Error(ErrorKind::DimensionMismatch, "reference state dimension differs");

    const Operator a = fock::annihilation(d);
    const Operator n_op = fock::number(d);
    const Operator pi = fock::parity(d);

    Trajectory tr;
    tr.seed = seed;
    tr.mixed = Kind::mixed;
    const auto n_samples = static_cast<std::size_t>(opt.samples);
    tr.times.reserve(n_samples);
    tr.n_expect.reserve(n_samples);
    tr.mean_a.reserve(n_samples);
    tr.parity.reserve(n_samples);
    tr.trace_dist_ref.reserve(n_samples);
    tr.nearest_ref.reserve(n_samples);
    tr.jumped.reserve(n_samples);

    auto sample_time = [&](int k) {
        return k == opt.samples - 1 ? t_final : t_final * static_cast<double>(k) / (opt.samples - 1);
    };
    bool pending_jump = false;
    auto record = [&](const Eigen::MatrixXcd& raw, double t) {
        const Eigen::MatrixXcd y = kind.normalize(raw);
        tr.times.push_back(t);
        tr.n_expect.push_back(kind.expect(n_op, y).real());
        tr.mean_a.push_back(kind.expect(a, y));
        tr.parity.push_back(kind.expect(pi, y).real());
        double best = std::numeric_limits<double>::quiet_NaN();
        int best_index = -1;
        for (std::size_t i = 0; i < opt.references.size(); ++i) {
            const double dist = state_distance(opt.references[i], y);
            if (best_index < 0 || dist < best) {
                best = dist;
                best_index = static_cast<int>(i);
            }
        }
        tr.trace_dist_ref.push_back(best);
        tr.nearest_ref.push_back(best_index);
        tr.jumped.push_back(pending_jump ? 1 : 0);
        pending_jump = false;
        if (opt.store_states) tr.states.push_back(y);
    };

    std::mt19937_64 rng(seed);
    double threshold = open_uniform(rng);
    IntegratorOptions io;
    io.rtol = opt.rtol;
    io.atol = opt.atol;
    const Eigen::MatrixXcd y0 = kind.normalize(initial);
    DormandPrince ode([&kind](const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd { return kind.rhs(y); }, y0, 0.0, io);
    record(y0, 0.0);
    int next = 1;

    while (next < opt.samples) {
        ode.step(t_final);
        const double m_end = kind.measure(ode.state());
        double t_jump = std::numeric_limits<double>::infinity();
        double theta = 1.0;
        if (m_end <= threshold) {
            // the norm decreases monotonically inside the step: bisect
            const double t0 = ode.step_start(), h = ode.last_step();
            double lo = 0.0, hi = 1.0;
            while ((hi - lo) * h > opt.jump_time_tolerance * std::max(1.0, t0)) {
                const double mid = 0.5 * (lo + hi);
                if (kind.measure(ode.dense(mid)) > threshold)
                    lo = mid;
                else
                    hi = mid;
            }
            theta = hi;
            t_jump = t0 + theta * h;
        }
        const double covered = std::min(t_jump, ode.time());
        while (next < opt.samples && sample_time(next) <= covered) {
            record(ode.dense_at(sample_time(next)), sample_time(next));
            ++next;
        }
        if (std::isfinite(t_jump)) {
            const Eigen::MatrixXcd pre = kind.normalize(ode.dense(theta));
            Eigen::MatrixXcd post = kind.jump(pre);
            const double w = kind.measure(post);
            if (!(w > 1e-12))
                throw Error(ErrorKind::TraceCollapse, "click on a state with vanishing click probability at t = " +
                                                          std::to_string(t_jump));
            post /= kind.scale(w);
            tr.jump_times.push_back(t_jump);
            tr.parity_before_jump.push_back(kind.expect(pi, pre).real());
            tr.parity_after_jump.push_back(kind.expect(pi, post).real());
            tr.segment_end.push_back(pre);
            pending_jump = true;
            threshold = open_uniform(rng);
            ode.reset(post, t_jump);
        } else if (m_end < opt.renormalize_below) {
            // keep the norm away from underflow; the threshold is rescaled with it
            if (!(m_end > 0.0)) throw Error(ErrorKind::TraceCollapse, "state norm vanished");
            ode.reset(ode.state() / kind.scale(m_end), ode.time());
            threshold /= m_end;
        }
    }
    tr.segment_end.push_back(kind.normalize(ode.state()));
    return tr;
}

} // namespace detail

/// State-vector trajectory for an ideal detector (eta = 1, n_th = 0). Clicks
/// apply a + xi; between clicks the state follows the lab-frame no-click
/// generator.
inline Trajectory simulate_sse(const SystemParams& p, const StateVector& initial, double t_final, std::uint64_t seed,
                               const TrajectoryOptions& opt = {}) {
    p.validate();
    if (!p.pure_unraveling())
        throw Error(ErrorKind::UseSme, "imperfect detection or thermal noise needs the density-matrix unraveling");
    if (initial.size() != p.fock_dim) throw Error(ErrorKind::DimensionMismatch, "initial state dimension differs");
    if (!(initial.norm() > 0.0)) throw Error(ErrorKind::InvalidParameter, "initial state is zero");
    detail::PureKind kind{-I_unit * effective_nonhermitian(p), monitored_jump_operator(p)};
    return detail::run_trajectory(kind, initial, t_final, seed, opt);
}

/// Density-matrix trajectory: no-click evolution under L + N, clicks apply
/// rho -> (a + xi) rho (a + xi)^dag / Tr.
inline Trajectory simulate_sme(const SystemParams& p, const DensityMatrix& initial, double t_final, std::uint64_t seed,
                               const TrajectoryOptions& opt = {}) {
    p.validate();
    if (initial.rows() != p.fock_dim || initial.cols() != p.fock_dim)
        throw Error(ErrorKind::DimensionMismatch, "initial state dimension differs");
    if (!(initial.trace().real() > 1e-12)) throw Error(ErrorKind::TraceCollapse, "initial state has no trace");
    detail::MixedKind kind{conditioned_form(p), monitored_jump_operator(p)};
    return detail::run_trajectory(kind, initial, t_final, seed, opt);
}

/// `count` trajectories with seeds derive_seed(master, i), run on `threads`
/// workers. The result does not depend on the thread count.
inline std::vector<Trajectory> simulate_ensemble(const SystemParams& p, const StateVector& initial, double t_final,
                                                 std::uint64_t master_seed, int count,
                                                 const TrajectoryOptions& opt = {}, unsigned threads = 1) {
    std::vector<Trajectory> out(static_cast<std::size_t>(std::max(count, 0)));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = simulate_sse(p, initial, t_final, derive_seed(master_seed, i), opt);
    });
    return out;
}

inline std::vector<Trajectory> simulate_ensemble(const SystemParams& p, const DensityMatrix& initial, double t_final,
                                                 std::uint64_t master_seed, int count,
                                                 const TrajectoryOptions& opt = {}, unsigned threads = 1) {
    std::vector<Trajectory> out(static_cast<std::size_t>(std::max(count, 0)));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = simulate_sme(p, initial, t_final, derive_seed(master_seed, i), opt);
    });
    return out;
}

// ------------------------------------------------------------ reductions

struct EnsembleAverage {
    std::size_t count = 0;
    std::vector<double> times;
    std::vector<double> mean_n, se_n;
    std::vector<cplx> mean_a;
    std::vector<double> se_re_a, se_im_a;
};

/// Pointwise mean and standard error over trajectories sharing a time grid.
inline EnsembleAverage ensemble_average(std::span<const Trajectory> trajs) {
    if (trajs.empty()) throw Error(ErrorKind::InvalidParameter, "empty ensemble");
    const auto& grid = trajs.front().times;
    for (const auto& t : trajs) {
        if (t.times.size() != grid.size()) throw Error(ErrorKind::GridMismatch, "trajectories differ in sample count");
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (std::abs(t.times[k] - grid[k]) > 1e-12 * std::max(1.0, std::abs(grid[k])))
                throw Error(ErrorKind::GridMismatch, "trajectories use different time grids");
    }
    const std::size_t n = trajs.size();
    EnsembleAverage avg;
    avg.count = n;
    avg.times = grid;
    std::vector<double> buf(n);
    auto mean_se = [&](auto&& value, std::size_t k, double& mean, double& se) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = value(trajs[i], k);
        mean = pairwise_sum(buf) / static_cast<double>(n);
        if (n < 2) {
            se = 0.0;
            return;
        }
        for (std::size_t i = 0; i < n; ++i) buf[i] = (value(trajs[i], k) - mean) * (value(trajs[i], k) - mean);
        se = std::sqrt(pairwise_sum(buf) / static_cast<double>(n - 1) / static_cast<double>(n));
    };
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double mn, sn, mr, sr, mi, si;
        mean_se([](const Trajectory& t, std::size_t j) { return t.n_expect[j]; }, k, mn, sn);
        mean_se([](const Trajectory& t, std::size_t j) { return t.mean_a[j].real(); }, k, mr, sr);
        mean_se([](const Trajectory& t, std::size_t j) { return t.mean_a[j].imag(); }, k, mi, si);
        avg.mean_n.push_back(mn);
        avg.se_n.push_back(sn);
        avg.mean_a.emplace_back(mr, mi);
        avg.se_re_a.push_back(sr);
        avg.se_im_a.push_back(si);
    }
    return avg;
}

struct HeraldInterval {
    double start = 0.0;
    double end = 0.0;
    double fidelity_at_end = std::numeric_limits<double>::quiet_NaN();
    double distance_at_end = std::numeric_limits<double>::quiet_NaN();
    int reference = -1;  // closest reference at the end of the interval
};

struct HeraldReport {
    double k = 5.0;
    double min_length = 0.0;  // k / gamma_rel
    std::size_t segments = 0; // click-free segments inspected
    std::vector<HeraldInterval> intervals;
};

/// Click-free intervals longer than k / gamma_rel, with the fidelity of the
/// state at the end of each interval to the closest of `references`.
inline HeraldReport detect_heralds(const Trajectory& tr, double gamma_rel, double k = 5.0,
                                   const std::vector<Eigen::MatrixXcd>& references = {}) {
    if (!(gamma_rel > 0.0)) throw Error(ErrorKind::InvalidParameter, "gamma_rel must be > 0");
    if (!(k > 0.0)) throw Error(ErrorKind::InvalidParameter, "k must be > 0");
    HeraldReport rep;
    rep.k = k;
    rep.min_length = k / gamma_rel;
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), tr.jump_times.begin(), tr.jump_times.end());
    edges.push_back(tr.t_final());
    rep.segments = edges.size() - 1;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        if (edges[s + 1] - edges[s] <= rep.min_length) continue;
        HeraldInterval iv;
        iv.start = edges[s];
        iv.end = edges[s + 1];
        if (s < tr.segment_end.size()) {
            const Eigen::MatrixXcd& state = tr.segment_end[s];
            for (std::size_t r = 0; r < references.size(); ++r) {
                const double f = state_fidelity(references[r], state);
                if (iv.reference < 0 || f > iv.fidelity_at_end) {
                    iv.fidelity_at_end = f;
                    iv.distance_at_end = state_distance(references[r], state);
                    iv.reference = static_cast<int>(r);
                }
            }
        }
        rep.intervals.push_back(iv);
    }
    return rep;
}

struct RelaxationFitOptions {
    double decades = 2.0;       // required decay span of the chosen segment
    double skip_factor = 10.0;  // fit starts once d <= d_start / skip_factor
    double floor = 1e-6;        // integration noise level; fit stops here
    std::size_t min_points = 5;
    int reference = -1;         // restrict to segments ending nearest this reference
};

struct RelaxationFit {
    double rate = 0.0;
    double r_squared = 0.0;
    double segment_start = 0.0;
    double decades = 0.0;
    std::size_t points = 0;
};

/// Exponential fit of the post-jump decay of trace_dist_ref over the sampled
/// click-free segment with the longest clean decay.
inline RelaxationFit fit_relaxation(const Trajectory& tr, const RelaxationFitOptions& opt = {}) {
    if (tr.trace_dist_ref.empty() || std::isnan(tr.trace_dist_ref.front()))
        throw Error(ErrorKind::InvalidParameter, "trajectory was recorded without a reference state");
    const std::size_t n = tr.times.size();
    std::vector<std::size_t> starts{0};
    for (std::size_t k = 1; k < n; ++k)
        if (tr.jumped[k]) starts.push_back(k);
    starts.push_back(n);

    RelaxationFit best;
    bool found = false;
    for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
        const std::size_t b = starts[s], e = starts[s + 1];
        if (e - b < opt.min_points) continue;
        if (opt.reference >= 0 && tr.nearest_ref[e - 1] != opt.reference) continue;
        const double d0 = tr.trace_dist_ref[b];
        if (!(d0 > opt.floor)) continue;
        std::vector<double> t, y;
        for (std::size_t k = b; k < e; ++k) {
            const double dk = tr.trace_dist_ref[k];
            if (dk < opt.floor) break;
            if (dk <= d0 / opt.skip_factor) {
                t.push_back(tr.times[k]);
                y.push_back(dk);
            }
        }
        if (t.size() < opt.min_points) continue;
        const double span = std::log10(d0 / y.back());
        if (span < opt.decades || (found && span <= best.decades)) continue;
        const ExponentialFit fit = fit_exponential(t, y);
        best.rate = fit.rate;
        best.r_squared = fit.r_squared;
        best.segment_start = tr.times[b];
        best.decades = span;
        best.points = fit.points;
        found = true;
    }
    if (!found)
        throw Error(ErrorKind::InsufficientDecay, "no click-free segment decays over " +
                                                      std::to_string(opt.decades) + " decades");
    return best;
}

/// Click count per unit time with a batch-means standard error (the clicks of
/// a single trajectory are correlated, so a Poisson error would be optimistic).
struct ClickRate {
    double rate = 0.0;
    double standard_error = 0.0;
    std::size_t clicks = 0;
};

inline ClickRate empirical_click_rate(const Trajectory& tr, int batches = 20, double burn_in = 0.0) {
    const double t1 = tr.t_final();
    if (!(t1 > burn_in) || batches < 2) throw Error(ErrorKind::InvalidParameter, "invalid click-rate window");
    const double width = (t1 - burn_in) / batches;
    std::vector<double> counts(static_cast<std::size_t>(batches), 0.0);
    ClickRate cr;
    for (double t : tr.jump_times) {
        if (t < burn_in) continue;
        const auto b = std::min<std::size_t>(static_cast<std::size_t>((t - burn_in) / width), counts.size() - 1);
        counts[b] += 1.0;
        ++cr.clicks;
    }
    cr.rate = static_cast<double>(cr.clicks) / (t1 - burn_in);
    double var = 0.0;
    for (double c : counts) var += (c / width - cr.rate) * (c / width - cr.rate);
    var /= (batches - 1);
    cr.standard_error = std::sqrt(var / batches);
    return cr;
}

} // namespace kerr_herald
