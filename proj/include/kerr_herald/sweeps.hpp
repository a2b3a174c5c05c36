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


// Parameter sweeps for the maximum observable negativity and the
// local-oscillator optimization.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "kerr_herald/errors.hpp"
#include "kerr_herald/model.hpp"
#include "kerr_herald/numerics.hpp"
#include "kerr_herald/spectral.hpp"
#include "kerr_herald/steady.hpp"
#include "kerr_herald/wigner.hpp"

namespace kerr_herald {

/// Everything the sweeps record about one parameter point.
struct PointEvaluation {
    double kerr = 0.0;
    cplx alpha1{}, alpha2{}, xi{};
    double gamma_rel = 0.0;
    double gamma_jump = 0.0;
    std::optional<double> gamma_asy;  // parametric (parity-resolved) case
    double negativity = std::numeric_limits<double>::quiet_NaN();  // NaN when skipped
    double mean_n_ps = 0.0;
    bool mixed = false;
    bool admissible = false;  // gamma_asy (parity case) or gamma_rel >= gamma_jump

    /// The rate compared with gamma_jump for heralding.
    double heralding_rate() const { return gamma_asy ? *gamma_asy : gamma_rel; }
};

struct EvaluateOptions {
    NegativityOptions negativity;
    SpectralOptions spectral;
    MixedOptions mixed;
    bool negativity_when_inadmissible = true;
};

/// Pseudo-steady state, rates and negativity at one point. Ideal detection
/// without thermal noise uses the state-vector spectrum, anything else the
/// density-matrix one. A local oscillator is handled in the lab frame, so the
/// state whose negativity is reported is the physical cavity state.
/// `rho_ss` may carry a steady state already solved for the same cavity; it
/// does not depend on xi, so xi scans pass one in.
inline PointEvaluation evaluate_point(const SystemParams& p, const EvaluateOptions& opt = {},
                                      const DensityMatrix* rho_ss = nullptr) {
    p.validate();
    PointEvaluation ev;
    ev.kerr = p.kerr;
    ev.alpha1 = p.alpha1;
    ev.alpha2 = p.alpha2;
    ev.xi = p.xi;
    ev.gamma_jump = rho_ss ? jump_rate(*rho_ss, p) : steady_state(p).gamma_jump;
    DensityMatrix rho;
    if (p.pure_unraveling()) {
        const PureSpectrum s = pure_spectrum(effective_nonhermitian(p), opt.spectral);
        PseudoState ps;
        if (s.parity_resolved && s.stable_even >= 0 && s.stable_odd >= 0) {
            ps = parity_rates(s, ev.gamma_jump, opt.spectral);
            ev.gamma_asy = ps.rates.gamma_asy;
        } else {
            ps = stable_pseudo_state(s, opt.spectral);
        }
        ev.gamma_rel = ps.rates.gamma_rel;
        rho = fock::projector(ps.state);
    } else {
        const MixedPseudoState ps = mixed_pseudo_state(mixed_spectrum(p, opt.spectral), opt.mixed, opt.spectral);
        ev.mixed = true;
        ev.gamma_rel = ps.rates.gamma_rel;
        rho = ps.rho;
    }
    ev.mean_n_ps = fock::expectation(fock::number(p.fock_dim), rho).real();
    ev.admissible = ev.heralding_rate() >= ev.gamma_jump;
    if (ev.admissible || opt.negativity_when_inadmissible) ev.negativity = negativity(rho, opt.negativity).negativity;
    return ev;
}

/// n points log-spaced over [10^lo, 10^hi].
inline std::vector<double> logspace(double lo, double hi, int n) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "logspace needs at least one point");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(std::pow(10.0, n == 1 ? lo : lo + (hi - lo) * i / (n - 1)));
    return out;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "linspace needs at least one point");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return out;
}

struct SweepResult {
    std::vector<PointEvaluation> points;
    double n_max = 0.0;
    int best = -1;  // index into points, -1 when nothing is admissible

    /// Throws empty-admissible-set when no point satisfies the constraint.
    const PointEvaluation& best_point() const {
        if (best < 0) throw Error(ErrorKind::EmptyAdmissibleSet, "no admissible point in the sweep");
        return points[static_cast<std::size_t>(best)];
    }
};

namespace detail {

inline void select_best(SweepResult& r) {
    r.best = -1;
    r.n_max = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& ev = r.points[i];
        if (!ev.admissible || std::isnan(ev.negativity)) continue;
        if (r.best < 0 || ev.negativity > r.n_max) {
            r.best = static_cast<int>(i);
            r.n_max = ev.negativity;
        }
    }
}

inline SweepResult run_points(const std::vector<SystemParams>& params, const EvaluateOptions& opt,
                              unsigned threads, const DensityMatrix* rho_ss = nullptr) {
    SweepResult r;
    r.points.resize(params.size());
    EvaluateOptions inner = opt;
    inner.negativity.threads = 1;
    parallel_for(params.size(), threads, [&](std::size_t i) { r.points[i] = evaluate_point(params[i], inner, rho_ss); });
    select_best(r);
    return r;
}

} // namespace detail

/// Semiclassical scan over K / kappa at fixed detuning and rescaled drive
/// power |alpha1|^2 K / kappa^3; alpha1 is recomputed at every K.
inline SweepResult n_max_sweep(const SystemParams& base, double drive_power, const std::vector<double>& kerr_grid,
                               const EvaluateOptions& opt = {}, unsigned threads = 1) {
    std::vector<SystemParams> params;
    for (double k : kerr_grid) {
        SystemParams p = base;
        p.kerr = k;
        params.push_back(with_drive_power(p, drive_power));
    }
    return detail::run_points(params, opt, threads);
}

/// Parametric scan over alpha2 at fixed K; admissibility uses gamma_asy.
inline SweepResult parametric_sweep(const SystemParams& base, const std::vector<double>& alpha2_grid,
                                    const EvaluateOptions& opt = {}, unsigned threads = 1) {
    std::vector<SystemParams> params;
    for (double a2 : alpha2_grid) {
        SystemParams p = base;
        p.alpha2 = a2;
        params.push_back(p);
    }
    return detail::run_points(params, opt, threads);
}

struct XiGridSpec {
    int resolution = 41;  // points per axis of the square grid clipped to the disc
    double radius = 0.0;  // 0 selects 2 |<a>_ss|
};

struct XiOptimization {
    double radius = 0.0;
    SweepResult sweep;      // points[i].xi holds the grid position
    PointEvaluation baseline;  // xi = 0
    cplx best_xi{};
};

/// Grid search for the local oscillator that maximizes the negativity among
/// admissible points. xi = 0 is always part of the grid.
inline XiOptimization optimize_xi(const SystemParams& p, const XiGridSpec& grid = {}, const EvaluateOptions& opt = {},
                                  unsigned threads = 1) {
    if (grid.resolution < 1) throw Error(ErrorKind::InvalidParameter, "xi grid resolution must be >= 1");
    XiOptimization out;
    SystemParams base = p;
    base.xi = 0.0;
    const SteadyStateResult ss = steady_state(base);
    out.radius = grid.radius > 0.0 ? grid.radius : 2.0 * std::abs(ss.mean_a);
    std::vector<SystemParams> params{base};
    const int r = grid.resolution;
    for (int i = 0; i < r && out.radius > 0.0; ++i) {
        for (int j = 0; j < r; ++j) {
            const double x = r == 1 ? 0.0 : -out.radius + 2.0 * out.radius * i / (r - 1);
            const double y = r == 1 ? 0.0 : -out.radius + 2.0 * out.radius * j / (r - 1);
            const cplx xi(x, y);
            if (std::abs(xi) > out.radius * (1.0 + 1e-12) || xi == cplx{}) continue;
            SystemParams q = base;
            q.xi = xi;
            params.push_back(q);
        }
    }
    out.sweep = detail::run_points(params, opt, threads, &ss.rho_ss);
    out.baseline = out.sweep.points.front();
    if (out.sweep.best >= 0) out.best_xi = out.sweep.points[static_cast<std::size_t>(out.sweep.best)].xi;
    return out;
}

struct NMaxCell {
    double delta = 0.0;
    double drive_power = 0.0;
    double n_max_plain = 0.0;      // xi = 0
    double n_max_optimized = 0.0;  // best over K and admissible xi
    double k_plain = std::numeric_limits<double>::quiet_NaN();
    double k_optimized = std::numeric_limits<double>::quiet_NaN();
    cplx xi_optimized{};
    bool admissible = false;
};

/// N_max over a K grid at one (Delta, drive power) point, without and with
/// the xi optimization. Points where nothing is admissible report zero.
inline NMaxCell n_max_cell(const SystemParams& base, double delta, double drive_power,
                           const std::vector<double>& kerr_grid, const XiGridSpec& xi_grid,
                           const EvaluateOptions& opt = {}, unsigned threads = 1) {
    NMaxCell cell;
    cell.delta = delta;
    cell.drive_power = drive_power;
    EvaluateOptions quick = opt;
    quick.negativity_when_inadmissible = false;
    for (double k : kerr_grid) {
        SystemParams p = base;
        p.delta = delta;
        p.kerr = k;
        p = with_drive_power(p, drive_power);
        const XiOptimization xo = optimize_xi(p, xi_grid, quick, threads);
        if (xo.baseline.admissible && xo.baseline.negativity >= cell.n_max_plain) {
            cell.n_max_plain = xo.baseline.negativity;
            cell.k_plain = k;
        }
        if (xo.sweep.best >= 0) {
            cell.admissible = true;
            if (xo.sweep.n_max >= cell.n_max_optimized) {
                cell.n_max_optimized = xo.sweep.n_max;
                cell.k_optimized = k;
                cell.xi_optimized = xo.best_xi;
            }
        }
    }
    return cell;
}

} // namespace kerr_herald
