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

// steady.hpp: unconditional steady state, ensemble jump rate, and the
// mean-field fixed points of the coherently driven Kerr oscillator.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "kerr_herald/errors.hpp"
#include "kerr_herald/fock.hpp"
#include "kerr_herald/model.hpp"

namespace kerr_herald {

struct SteadyStateResult {
    DensityMatrix rho_ss;
    double gamma_jump = 0.0;  // detected click rate, units of kappa
    cplx mean_a{};
    double mean_n = 0.0;
    int fock_dim = 0;
    bool converged = true;    // false only when a cutoff check ran and drifted
    double cutoff_drift = 0.0;
};

struct SteadyStateOptions {
    bool check_convergence = false;
    int cutoff_step = 10;
    double drift_tolerance = 1e-6;
    bool throw_on_drift = false;
};

/// 2 Tr(M rho).
inline double jump_rate(const DensityMatrix& rho, const Operator& m) {
    return 2.0 * std::real((m * rho).trace()) / std::real(rho.trace());
}

/// Detected click rate -Tr(N rho) = kappa (n_th+1) eta Tr[(a^dag+xi^*)(a+xi) rho].
inline double jump_rate(const DensityMatrix& rho, const SystemParams& p) {
    const Operator c = monitored_jump_operator(p);
    return p.detected_rate() * std::real((c.adjoint() * c * rho).trace()) / std::real(rho.trace());
}

/// Hermitize, normalize, and clip eigenvalues in [-tol, 0). Larger negativity
/// throws not-psd.
inline DensityMatrix repair_density(const DensityMatrix& raw, double tol) {
    DensityMatrix rho = 0.5 * (raw + raw.adjoint());
    const cplx tr = rho.trace();
    if (std::abs(tr) < 1e-300) throw Error(ErrorKind::NonNormalizable, "zero trace");
    rho /= tr.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    Eigen::VectorXd w = es.eigenvalues();
    if (w.minCoeff() < -tol)
        throw Error(ErrorKind::NotPositive, "minimum eigenvalue " + std::to_string(w.minCoeff()));
    if (w.minCoeff() < 0.0) {
        w = w.cwiseMax(0.0);
        rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
        rho /= rho.trace().real();
    }
    return rho;
}

namespace detail {

inline SteadyStateResult steady_state_at(const SystemParams& p) {
    const int d = p.fock_dim;
    const Superoperator l = build_liouvillian(p);
    // The trace row replaces the (0,0) balance equation, which is redundant
    // because the Liouvillian preserves the trace.
    Eigen::MatrixXcd bordered = l.matrix;
    bordered.row(0) = super::vec(Operator::Identity(d, d)).transpose();
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
    rhs(0) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(bordered);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-13))
        throw Error(ErrorKind::DegenerateSteadyState,
                    "Liouvillian null space is not one-dimensional (rcond " + std::to_string(rcond) + ")");
    const Eigen::VectorXcd v = lu.solve(rhs);

    SteadyStateResult r;
    r.fock_dim = d;
    r.rho_ss = repair_density(super::unvec(v, d), 1e-8);
    const Operator a = fock::annihilation(d);
    r.mean_a = (a * r.rho_ss).trace();
    r.mean_n = std::real((a.adjoint() * a * r.rho_ss).trace());
    r.gamma_jump = jump_rate(r.rho_ss, p);
    return r;
}

} // namespace detail

/// Unique null vector of the Liouvillian as a unit-trace density matrix.
inline SteadyStateResult steady_state(const SystemParams& p, const SteadyStateOptions& opt = {}) {
    p.validate();
    SteadyStateResult r = detail::steady_state_at(p);
    if (opt.check_convergence) {
        const SteadyStateResult wider = detail::steady_state_at(with_fock_dim(p, p.fock_dim + opt.cutoff_step));
        r.cutoff_drift = std::abs(wider.mean_n - r.mean_n);
        r.converged = r.cutoff_drift <= opt.drift_tolerance * std::max(1.0, r.mean_n);
        if (!r.converged && opt.throw_on_drift)
            throw Error(ErrorKind::NoConvergence, "steady-state photon number drifts by " +
                                                      std::to_string(r.cutoff_drift) + " under cutoff increase");
    }
    return r;
}

struct FixedPoint {
    cplx alpha{};
    double photons = 0.0;
    bool stable = false;
    Eigen::Vector2cd jacobian_eigenvalues;
};

namespace detail {

/// Mean-field flow d alpha/dt for H0 with alpha2 = 0.
inline cplx mean_field_flow(const SystemParams& p, cplx alpha) {
    return -I_unit * (-p.delta * alpha + 2.0 * p.kerr * std::norm(alpha) * alpha + p.alpha1) -
           0.5 * p.kappa * alpha;
}

} // namespace detail

/// Jacobian of the mean-field flow in (Re alpha, Im alpha) coordinates.
inline Eigen::Matrix2d mean_field_jacobian(const SystemParams& p, cplx alpha) {
    const cplx da = -I_unit * (-p.delta + 4.0 * p.kerr * std::norm(alpha)) - 0.5 * p.kappa;
    const cplx dac = -I_unit * (2.0 * p.kerr * alpha * alpha);
    const cplx col_x = da + dac;
    const cplx col_y = I_unit * (da - dac);
    Eigen::Matrix2d j;
    j << col_x.real(), col_y.real(), col_x.imag(), col_y.imag();
    return j;
}

/// All stationary amplitudes of the mean-field equation
///   (-Delta + 2K|alpha|^2 - i kappa/2) alpha = -alpha1,
/// i.e. roots n = |alpha|^2 of 4K^2 n^3 - 4K Delta n^2 + (Delta^2 + kappa^2/4) n - |alpha1|^2,
/// each flagged by the sign of the Jacobian eigenvalues.
inline std::vector<FixedPoint> semiclassical_fixed_points(const SystemParams& p) {
    if (p.alpha2 != cplx{})
        throw Error(ErrorKind::InvalidParameter, "semiclassical fixed points require alpha2 = 0");
    const double k = p.kerr;
    const double c1 = p.delta * p.delta + 0.25 * p.kappa * p.kappa;
    const double drive = std::norm(p.alpha1);

    std::vector<double> photons;
    if (k == 0.0) {
        photons.push_back(drive / c1);
    } else {
        // monic cubic n^3 + b n^2 + c n + d
        const double b = -p.delta / k;
        const double c = c1 / (4.0 * k * k);
        const double d = -drive / (4.0 * k * k);
        Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
        companion(1, 0) = 1.0;
        companion(2, 1) = 1.0;
        companion(0, 2) = -d;
        companion(1, 2) = -c;
        companion(2, 2) = -b;
        const Eigen::Vector3cd roots = companion.eigenvalues();
        const double scale = std::max({1.0, std::abs(b), std::sqrt(std::abs(c))});
        for (int i = 0; i < 3; ++i) {
            if (std::abs(roots(i).imag()) > 1e-9 * scale) continue;
            double n = roots(i).real();
            if (n < -1e-12 * scale) continue;
            n = std::max(n, 0.0);
            // polish against the residual of the monic cubic
            for (int it = 0; it < 3; ++it) {
                const double f = ((n + b) * n + c) * n + d;
                const double df = (3.0 * n + 2.0 * b) * n + c;
                if (df == 0.0) break;
                n -= f / df;
            }
            photons.push_back(std::max(n, 0.0));
        }
        std::sort(photons.begin(), photons.end());
        photons.erase(std::unique(photons.begin(), photons.end(),
                                  [&](double x, double y) { return std::abs(x - y) <= 1e-12 * scale; }),
                      photons.end());
    }

    std::vector<FixedPoint> out;
    for (double n : photons) {
        FixedPoint fp;
        fp.alpha = -p.alpha1 / cplx(-p.delta + 2.0 * k * n, -0.5 * p.kappa);
        fp.photons = std::norm(fp.alpha);
        const Eigen::Matrix2d j = mean_field_jacobian(p, fp.alpha);
        fp.jacobian_eigenvalues = j.eigenvalues();
        fp.stable = fp.jacobian_eigenvalues(0).real() < 0.0 && fp.jacobian_eigenvalues(1).real() < 0.0;
        out.push_back(fp);
    }
    return out;
}

/// Cutoff heuristic ceil(4 max(<n>_estimate, |xi|^2, |alpha2/K|) + 20). The
/// photon estimate is the largest mean-field root of the coherent drive.
inline int auto_fock_dim(const SystemParams& p) {
    SystemParams coherent = p;
    coherent.alpha2 = 0.0;
    double n_est = 0.0;
    for (const auto& fp : semiclassical_fixed_points(coherent)) n_est = std::max(n_est, fp.photons);
    double parametric = 0.0;
    if (p.alpha2 != cplx{}) parametric = p.kerr > 0.0 ? std::abs(p.alpha2) / p.kerr : 4.0 * std::abs(p.alpha2);
    const double m = std::max({n_est, std::norm(p.xi), parametric});
    return static_cast<int>(std::ceil(4.0 * m + 20.0));
}

} // namespace kerr_herald
