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


// Wigner function W(alpha) = Tr[rho D(alpha) P D^dag(alpha)] / pi and the
// negativity N = |min W|.
//
// D(alpha) P D^dag(alpha) = D(2 alpha) P, whose Fock matrix elements are
// Laguerre polynomials. They are generated by a three-term recursion, so the
// result is exact for the truncated state at any alpha; no matrix exponential
// is involved.

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "kerr_herald/errors.hpp"
#include "kerr_herald/fock.hpp"
#include "kerr_herald/numerics.hpp"

namespace kerr_herald {

struct WignerGridSpec {
    cplx center{};
    double half_width = 3.0;
    int resolution = 101;  // points per axis, endpoints included
};

struct WignerGrid {
    cplx center{};
    double half_width = 0.0;
    int resolution = 0;
    std::vector<double> re_axis, im_axis;
    Eigen::MatrixXd values;  // values(i, j) at re_axis[i] + i im_axis[j]
    double min_value = 0.0;
    cplx argmin{};

    double cell_area() const {
        const double h = resolution > 1 ? 2.0 * half_width / (resolution - 1) : 0.0;
        return h * h;
    }
};

namespace detail {

inline void require_density(const DensityMatrix& rho) {
    fock::require_dim(static_cast<int>(rho.rows()));
    if (rho.rows() != rho.cols()) throw Error(ErrorKind::DimensionMismatch, "density matrix must be square");
    if (fock::max_abs(rho - rho.adjoint()) > 1e-10 * std::max(1.0, fock::max_abs(rho)))
        throw Error(ErrorKind::InvalidParameter, "density matrix is not Hermitian");
}

/// The recursion loses nothing at large |alpha|, but the truncated state stops
/// representing the physical one long before; beyond |alpha|^2 = 2 dim the
/// grid cannot carry information about a state of that cutoff.
inline void check_domain(int dim, double max_abs_alpha) {
    if (max_abs_alpha * max_abs_alpha > 2.0 * dim)
        throw Error(ErrorKind::TruncationDomain,
                    "grid reaches |alpha|^2 = " + std::to_string(max_abs_alpha * max_abs_alpha) +
                        " beyond 2 * fock_dim = " + std::to_string(2 * dim));
}

/// W(alpha) with a caller-provided scratch buffer of size dim.
inline double wigner_point(const DensityMatrix& rho, cplx alpha, std::vector<cplx>& w) {
    const int d = static_cast<int>(rho.rows());
    const cplx a2 = 2.0 * alpha;
    w.assign(static_cast<std::size_t>(d), cplx{});
    w[0] = std::exp(-2.0 * std::norm(alpha)) / std::numbers::pi;
    double acc = rho(0, 0).real() * w[0].real();
    for (int n = 1; n < d; ++n) {
        w[n] = a2 * w[n - 1] / std::sqrt(static_cast<double>(n));
        acc += 2.0 * std::real(rho(0, n) * w[n]);
    }
    for (int m = 1; m < d; ++m) {
        const double sm = std::sqrt(static_cast<double>(m));
        cplx temp = w[m];
        w[m] = (std::conj(a2) * temp - sm * w[m - 1]) / sm;
        acc += std::real(rho(m, m) * w[m]);
        for (int n = m + 1; n < d; ++n) {
            const cplx next = (a2 * w[n - 1] - sm * temp) / std::sqrt(static_cast<double>(n));
            temp = w[n];
            w[n] = next;
            acc += 2.0 * std::real(rho(m, n) * w[n]);
        }
    }
    return acc;
}

} // namespace detail

/// Single-point evaluation.
inline double wigner_at(const DensityMatrix& rho, cplx alpha) {
    detail::require_density(rho);
    detail::check_domain(static_cast<int>(rho.rows()), std::abs(alpha));
    std::vector<cplx> scratch;
    return detail::wigner_point(rho, alpha, scratch);
}

inline double wigner_at(const StateVector& psi, cplx alpha) {
    return wigner_at(DensityMatrix(fock::projector(psi.normalized())), alpha);
}

inline WignerGrid wigner(const DensityMatrix& rho, const WignerGridSpec& spec, unsigned threads = 1) {
    detail::require_density(rho);
    if (spec.resolution < 2) throw Error(ErrorKind::InvalidParameter, "grid resolution must be >= 2");
    if (!(spec.half_width > 0.0) || !std::isfinite(spec.half_width))
        throw Error(ErrorKind::InvalidParameter, "grid half width must be positive");
    const int d = static_cast<int>(rho.rows());
    detail::check_domain(d, std::abs(spec.center) + std::sqrt(2.0) * spec.half_width);

    WignerGrid g;
    g.center = spec.center;
    g.half_width = spec.half_width;
    g.resolution = spec.resolution;
    const int r = spec.resolution;
    for (int i = 0; i < r; ++i) {
        const double s = -spec.half_width + 2.0 * spec.half_width * i / (r - 1);
        g.re_axis.push_back(spec.center.real() + s);
        g.im_axis.push_back(spec.center.imag() + s);
    }
    g.values.resize(r, r);
    parallel_for(static_cast<std::size_t>(r), threads, [&](std::size_t i) {
        std::vector<cplx> scratch;
        for (int j = 0; j < r; ++j)
            g.values(static_cast<Eigen::Index>(i), j) =
                detail::wigner_point(rho, cplx(g.re_axis[i], g.im_axis[j]), scratch);
    });
    Eigen::Index bi = 0, bj = 0;
    g.min_value = g.values.minCoeff(&bi, &bj);
    g.argmin = cplx(g.re_axis[bi], g.im_axis[bj]);
    return g;
}

inline WignerGrid wigner(const StateVector& psi, const WignerGridSpec& spec, unsigned threads = 1) {
    return wigner(DensityMatrix(fock::projector(psi.normalized())), spec, threads);
}

struct NegativityOptions {
    int coarse_resolution = 101;
    int refine_levels = 3;
    int refine_resolution = 21;
    double zero_tolerance = 1e-9;  // refined minima above -tol count as zero
    unsigned threads = 1;
};

struct NegativityReport {
    double negativity = 0.0;  // max(0, -min W) after refinement
    double min_value = 0.0;
    cplx argmin{};
    cplx center{};
    double half_width = 0.0;  // of the coarse scan
};

/// Coarse scan centred at <a> with half width 2 + 2 sqrt(<n> - |<a>|^2),
/// then nested grids around the running minimum, each 5 times finer.
inline NegativityReport negativity(const DensityMatrix& rho_in, const NegativityOptions& opt = {}) {
    detail::require_density(rho_in);
    const double tr = rho_in.trace().real();
    if (!(tr > 0.0)) throw Error(ErrorKind::InvalidParameter, "state has no trace");
    const DensityMatrix rho = rho_in / tr;
    const int d = static_cast<int>(rho.rows());
    const cplx mean_a = fock::expectation(fock::annihilation(d), rho);
    const double mean_n = fock::expectation(fock::number(d), rho).real();
    const double spread = std::max(0.0, mean_n - std::norm(mean_a));

    NegativityReport rep;
    rep.center = mean_a;
    rep.half_width = 2.0 + 2.0 * std::sqrt(spread);
    // stay inside the representable domain
    const double limit = std::sqrt(2.0 * d);
    // (shaved so the grid corner does not round past the guard)
    const double room = (limit - std::abs(mean_a)) / std::sqrt(2.0) * (1.0 - 1e-12);
    if (room <= 0.0) throw Error(ErrorKind::TruncationDomain, "state is centred outside the representable domain");
    rep.half_width = std::min(rep.half_width, room);

    WignerGrid g = wigner(rho, {mean_a, rep.half_width, opt.coarse_resolution}, opt.threads);
    double best = g.min_value;
    cplx where = g.argmin;
    double spacing = 2.0 * rep.half_width / (opt.coarse_resolution - 1);
    for (int level = 0; level < opt.refine_levels; ++level) {
        const double hw = 2.0 * spacing;
        if (std::abs(where) + std::sqrt(2.0) * hw > limit) break;
        const WignerGrid fine = wigner(rho, {where, hw, opt.refine_resolution}, opt.threads);
        if (fine.min_value < best) {
            best = fine.min_value;
            where = fine.argmin;
        }
        spacing = 2.0 * hw / (opt.refine_resolution - 1);
    }
    rep.min_value = best;
    rep.argmin = where;
    rep.negativity = best < -opt.zero_tolerance ? -best : 0.0;
    return rep;
}

inline NegativityReport negativity(const StateVector& psi, const NegativityOptions& opt = {}) {
    return negativity(DensityMatrix(fock::projector(psi.normalized())), opt);
}

} // namespace kerr_herald
