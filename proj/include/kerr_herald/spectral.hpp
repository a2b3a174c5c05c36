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

// spectral.hpp: spectral analysis of the no-click evolution.
//
// Pure case: eigensystem of the non-Hermitian generator H_eff. The stable
// pseudo-steady state is the eigenvector whose eigenvalue has the largest
// imaginary part; the relaxation rate is the smallest imaginary gap to it.
//
// Mixed case: eigensystem of the superoperator L + N with biorthonormal left
// eigenmatrices. The stable pseudo-steady state belongs to the eigenvalue with
// the largest real part.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kerr_herald/errors.hpp"
#include "kerr_herald/fock.hpp"
#include "kerr_herald/integrator.hpp"
#include "kerr_herald/model.hpp"
#include "kerr_herald/numerics.hpp"
#include "kerr_herald/steady.hpp"

namespace kerr_herald {

enum class Parity { Even, Odd, None };

inline const char* to_string(Parity p) {
    switch (p) {
        case Parity::Even: return "even";
        case Parity::Odd: return "odd";
        case Parity::None: return "none";
    }
    return "none";
}

struct SpectralOptions {
    double exceptional_condition = 1e10;  // eigenvector condition number limit
    double degeneracy_tolerance = 1e-9;   // relative to the spectral radius
    double parity_threshold = 0.99;
    double commutator_tolerance = 1e-12;
};

struct PureSpectrum {
    Operator generator;               // H_eff the spectrum was computed from
    Eigen::VectorXcd eigenvalues;     // h_mu
    Eigen::MatrixXcd right;           // unit-norm right eigenvectors, columns
    Eigen::MatrixXcd left;            // dual vectors: left.col(m)^dag right.col(n) = delta_mn
    std::vector<Parity> parity_labels;
    bool parity_resolved = false;
    int stable_index = -1;            // largest imaginary part overall
    int stable_even = -1;             // per-sector maxima when parity_resolved
    int stable_odd = -1;
    double condition_number = 1.0;

    int size() const { return static_cast<int>(eigenvalues.size()); }
    StateVector state(int mu) const { return right.col(mu); }
};

struct RateReport {
    double gamma_rel = 0.0;
    std::optional<double> gamma_asy;
    std::optional<double> gamma_jump;
    std::optional<double> e_psi;
    double e_psi_imag = 0.0;  // residue of <psi|H|psi>, should vanish
};

/// Raised when the top of the spectrum is degenerate; any superposition of
/// `subspace` columns is then a pseudo-steady state.
class DegenerateTopError : public Error {
public:
    DegenerateTopError(const std::string& what, Eigen::MatrixXcd subspace, std::vector<int> indices)
        : Error(ErrorKind::DegenerateTopEigenvalue, what), subspace_(std::move(subspace)),
          indices_(std::move(indices)) {}
    const Eigen::MatrixXcd& subspace() const { return subspace_; }
    const std::vector<int>& indices() const { return indices_; }

private:
    Eigen::MatrixXcd subspace_;
    std::vector<int> indices_;
};

namespace detail {

/// Scales each column to unit norm with its largest-magnitude entry real positive.
inline void fix_phases(Eigen::MatrixXcd& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        const cplx pivot = v(imax, j);
        const double nrm = v.col(j).norm();
        if (nrm == 0.0) continue;
        v.col(j) *= std::conj(pivot) / (std::abs(pivot) * nrm);
    }
}

/// Eigen-decomposition with duals. Throws exceptional-point when the
/// eigenvector matrix is numerically singular.
inline void eigensystem(const Eigen::MatrixXcd& m, double max_condition, Eigen::VectorXcd& values,
                        Eigen::MatrixXcd& right, Eigen::MatrixXcd& left, double& condition) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, true);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "eigen-decomposition failed");
    values = es.eigenvalues();
    right = es.eigenvectors();
    fix_phases(right);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(right);
    const double rc = lu.rcond();
    condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(condition < max_condition))
        throw Error(ErrorKind::ExceptionalPoint,
                    "eigenvector matrix condition number " + std::to_string(condition) + " (exceptional point?)");
    left = lu.inverse().adjoint();
}

inline double spectral_radius(const Eigen::VectorXcd& v) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) r = std::max(r, std::abs(v(i)));
    return std::max(r, 1.0);
}

} // namespace detail

/// Full eigensystem of H_eff. When H_eff commutes with parity, the even and
/// odd sectors are diagonalized separately so that every eigenvector carries an
/// exact parity label.
inline PureSpectrum pure_spectrum(const Operator& h_eff, const SpectralOptions& opt = {}) {
    const int d = static_cast<int>(h_eff.rows());
    fock::require_dim(d);
    PureSpectrum s;
    s.generator = h_eff;
    s.parity_labels.assign(d, Parity::None);

    const Operator pi = fock::parity(d);
    const double scale = std::max(1.0, fock::max_abs(h_eff));
    s.parity_resolved = fock::max_abs(h_eff * pi - pi * h_eff) <= opt.commutator_tolerance * scale;

    if (!s.parity_resolved) {
        detail::eigensystem(h_eff, opt.exceptional_condition, s.eigenvalues, s.right, s.left, s.condition_number);
    } else {
        s.eigenvalues.resize(d);
        s.right = Eigen::MatrixXcd::Zero(d, d);
        s.left = Eigen::MatrixXcd::Zero(d, d);
        int col = 0;
        for (int parity_bit = 0; parity_bit < 2; ++parity_bit) {
            std::vector<int> idx;
            for (int n = parity_bit; n < d; n += 2) idx.push_back(n);
            const int k = static_cast<int>(idx.size());
            Eigen::MatrixXcd block(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) block(i, j) = h_eff(idx[i], idx[j]);
            Eigen::VectorXcd vals;
            Eigen::MatrixXcd r, l;
            double cond = 1.0;
            if (k == 1) {
                vals = block.diagonal();
                r = l = Eigen::MatrixXcd::Identity(1, 1);
            } else {
                detail::eigensystem(block, opt.exceptional_condition, vals, r, l, cond);
            }
            s.condition_number = std::max(s.condition_number, cond);
            for (int j = 0; j < k; ++j, ++col) {
                s.eigenvalues(col) = vals(j);
                for (int i = 0; i < k; ++i) {
                    s.right(idx[i], col) = r(i, j);
                    s.left(idx[i], col) = l(i, j);
                }
                s.parity_labels[col] = parity_bit == 0 ? Parity::Even : Parity::Odd;
            }
        }
    }

    auto argmax_imag = [&](auto&& keep) {
        int best = -1;
        for (int i = 0; i < d; ++i)
            if (keep(i) && (best < 0 || s.eigenvalues(i).imag() > s.eigenvalues(best).imag())) best = i;
        return best;
    };
    s.stable_index = argmax_imag([](int) { return true; });
    if (s.parity_resolved) {
        s.stable_even = argmax_imag([&](int i) { return s.parity_labels[i] == Parity::Even; });
        s.stable_odd = argmax_imag([&](int i) { return s.parity_labels[i] == Parity::Odd; });
    }
    return s;
}

/// <psi| P |psi> for each eigenvector; used for labelling diagnostics.
inline std::vector<double> parity_expectations(const PureSpectrum& s) {
    const Operator pi = fock::parity(static_cast<int>(s.right.rows()));
    std::vector<double> out;
    for (int mu = 0; mu < s.size(); ++mu) out.push_back(std::real(fock::expectation(pi, StateVector(s.right.col(mu)))));
    return out;
}

struct PseudoState {
    StateVector state;
    int index = -1;
    cplx eigenvalue{};
    RateReport rates;
};

namespace detail {

inline PseudoState pseudo_state_in(const PureSpectrum& s, int top, const std::vector<int>& competitors,
                                   const SpectralOptions& opt) {
    const double tol = opt.degeneracy_tolerance * spectral_radius(s.eigenvalues);
    const cplx h_top = s.eigenvalues(top);
    std::vector<int> tied{top};
    double gap = std::numeric_limits<double>::infinity();
    for (int mu : competitors) {
        if (mu == top) continue;
        const double g = h_top.imag() - s.eigenvalues(mu).imag();
        if (g <= std::max(tol, 1e-10)) tied.push_back(mu);
        gap = std::min(gap, g);
    }
    if (tied.size() > 1) {
        Eigen::MatrixXcd sub(s.right.rows(), static_cast<Eigen::Index>(tied.size()));
        for (std::size_t i = 0; i < tied.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = s.right.col(tied[i]);
        throw DegenerateTopError("top eigenvalue " + std::to_string(h_top.imag()) + "i is shared by " +
                                     std::to_string(tied.size()) + " eigenvectors",
                                 std::move(sub), std::move(tied));
    }
    PseudoState ps;
    ps.index = top;
    ps.eigenvalue = h_top;
    ps.state = s.right.col(top).normalized();
    ps.rates.gamma_rel = std::isfinite(gap) ? gap : 0.0;
    const Operator herm = 0.5 * (s.generator + s.generator.adjoint());
    const cplx e = ps.state.dot(herm * ps.state);
    ps.rates.e_psi = e.real();
    ps.rates.e_psi_imag = e.imag();
    return ps;
}

} // namespace detail

/// Normalized eigenvector of the largest-imaginary-part eigenvalue with its
/// relaxation rate gamma_rel = min_mu [Im h_stable - Im h_mu] and energy E_psi.
inline PseudoState stable_pseudo_state(const PureSpectrum& s, const SpectralOptions& opt = {}) {
    std::vector<int> all(s.size());
    std::iota(all.begin(), all.end(), 0);
    return detail::pseudo_state_in(s, s.stable_index, all, opt);
}

/// Parity-resolved rates: gamma_asy = Im(h+_top - h-_top) and gamma_rel the
/// imaginary gap inside the sector of the overall stable state.
inline PseudoState parity_rates(const PureSpectrum& s, std::optional<double> gamma_jump = std::nullopt,
                                const SpectralOptions& opt = {}) {
    if (!s.parity_resolved || s.stable_even < 0 || s.stable_odd < 0)
        throw Error(ErrorKind::MissingParityStructure, "generator does not conserve parity");
    const Parity sector = s.parity_labels[s.stable_index];
    std::vector<int> same;
    for (int i = 0; i < s.size(); ++i)
        if (s.parity_labels[i] == sector) same.push_back(i);
    PseudoState ps = detail::pseudo_state_in(s, s.stable_index, same, opt);
    ps.rates.gamma_asy = s.eigenvalues(s.stable_even).imag() - s.eigenvalues(s.stable_odd).imag();
    ps.rates.gamma_jump = gamma_jump;
    return ps;
}

// ---------------------------------------------------------------- mixed case

struct MixedSpectrum {
    int dim = 0;
    Eigen::VectorXcd eigenvalues;  // lambda_mu
    Eigen::MatrixXcd right;        // columns are vec(rho_mu)
    Eigen::MatrixXcd left;         // columns are vec(check rho_mu)
    bool biorthonormal = false;
    double condition_number = 1.0;

    int size() const { return static_cast<int>(eigenvalues.size()); }
    DensityMatrix right_matrix(int mu) const { return super::unvec(right.col(mu), dim); }
    DensityMatrix left_matrix(int mu) const { return super::unvec(left.col(mu), dim); }
};

/// Eigensystem of L + N with left eigenmatrices normalized so that
/// Tr(check rho_nu^dag rho_mu) = delta.
inline MixedSpectrum mixed_spectrum(const Superoperator& l, const Superoperator& n, const SpectralOptions& opt = {}) {
    if (l.dim != n.dim || l.matrix.rows() != n.matrix.rows())
        throw Error(ErrorKind::DimensionMismatch, "L and N act on different spaces");
    MixedSpectrum s;
    s.dim = l.dim;
    detail::eigensystem(l.matrix + n.matrix, opt.exceptional_condition, s.eigenvalues, s.right, s.left,
                        s.condition_number);
    const Eigen::MatrixXcd gram = s.left.adjoint() * s.right;
    s.biorthonormal =
        fock::max_abs(gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())) < 1e-8;
    return s;
}

inline MixedSpectrum mixed_spectrum(const SystemParams& p, const SpectralOptions& opt = {}) {
    const ConditionedGenerators g = build_conditioned_generators(p);
    return mixed_spectrum(g.L, g.N, opt);
}

struct MixedPseudoState {
    DensityMatrix rho;
    int index = -1;
    cplx eigenvalue{};
    RateReport rates;
};

struct MixedOptions {
    double psd_tolerance = 1e-6;
    double hermitian_tolerance = 1e-6;
    double trace_floor = 1e-10;
};

/// Eigenmatrix of the largest-real-part eigenvalue, rescaled to unit trace,
/// with gamma_rel = min real-part gap.
inline MixedPseudoState mixed_pseudo_state(const MixedSpectrum& s, const MixedOptions& mopt = {},
                                           const SpectralOptions& opt = {}) {
    int top = 0;
    for (int i = 1; i < s.size(); ++i)
        if (s.eigenvalues(i).real() > s.eigenvalues(top).real()) top = i;
    const double tol = std::max(opt.degeneracy_tolerance * detail::spectral_radius(s.eigenvalues), 1e-10);
    double gap = std::numeric_limits<double>::infinity();
    std::vector<int> tied{top};
    for (int i = 0; i < s.size(); ++i) {
        if (i == top) continue;
        const double g = s.eigenvalues(top).real() - s.eigenvalues(i).real();
        if (g <= tol) tied.push_back(i);
        gap = std::min(gap, g);
    }
    if (tied.size() > 1) {
        Eigen::MatrixXcd sub(s.right.rows(), static_cast<Eigen::Index>(tied.size()));
        for (std::size_t i = 0; i < tied.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = s.right.col(tied[i]);
        throw DegenerateTopError("largest real part shared by " + std::to_string(tied.size()) + " eigenmatrices",
                                 std::move(sub), std::move(tied));
    }

    DensityMatrix rho = s.right_matrix(top);
    const cplx tr = rho.trace();
    if (std::abs(tr) < mopt.trace_floor * rho.norm())
        throw Error(ErrorKind::NonNormalizable, "top eigenmatrix is traceless");
    rho /= tr;
    if (fock::max_abs(rho - rho.adjoint()) > mopt.hermitian_tolerance)
        throw Error(ErrorKind::NotPositive, "top eigenmatrix is not Hermitian");

    MixedPseudoState ps;
    ps.index = top;
    ps.eigenvalue = s.eigenvalues(top);
    ps.rho = repair_density(rho, mopt.psd_tolerance);
    ps.rates.gamma_rel = std::isfinite(gap) ? gap : 0.0;
    return ps;
}

// ------------------------------------------------------- stability by flow

struct FlowCheck {
    double rate = 0.0;            // fitted decay rate of the distance
    double r_squared = 0.0;
    double initial_distance = 0.0;
    double final_distance = 0.0;
    bool stable = false;          // distance shrank over the run
    std::vector<double> times;
    std::vector<double> distances;
};

struct FlowOptions {
    int samples = 200;
    double rtol = 1e-11;
    double atol = 1e-13;
    double distance_floor = 1e-9;  // below this the fit stops
    double skip_fraction = 0.2;    // leading part of the run excluded from the fit
};

/// psi + eps P_perp sigma, normalized.
inline StateVector perturb_orthogonal(const StateVector& psi, const StateVector& sigma, double eps) {
    const StateVector u = psi.normalized();
    const StateVector perp = sigma - u.dot(sigma) * u;
    return (u + eps * perp.normalized()).normalized();
}

/// rho + eps sigma_perp with sigma_perp Hilbert-Schmidt orthogonal to rho,
/// rescaled to unit trace. Stays positive when sigma is and eps * overlap < 1.
inline DensityMatrix perturb_orthogonal(const DensityMatrix& rho, const DensityMatrix& sigma, double eps) {
    const cplx overlap = (rho.adjoint() * sigma).trace() / (rho.adjoint() * rho).trace();
    DensityMatrix out = rho + eps * (sigma - overlap * rho);
    out = 0.5 * (out + out.adjoint());
    return out / out.trace().real();
}

namespace detail {

template <class Normalize, class Distance>
FlowCheck run_flow(DormandPrince& ode, double t_max, const FlowOptions& opt, Normalize&& normalize,
                   Distance&& distance) {
    FlowCheck fc;
    fc.initial_distance = distance(ode.state());
    fc.times.push_back(0.0);
    fc.distances.push_back(fc.initial_distance);
    Eigen::MatrixXcd y = ode.state();
    for (int k = 1; k <= opt.samples; ++k) {
        const double t = t_max * k / opt.samples;
        while (ode.time() < t) ode.step(t);
        // the nonlinear term of the flow only rescales; renormalize here
        y = normalize(ode.state());
        fc.times.push_back(t);
        fc.distances.push_back(distance(y));
        ode.reset(y, t);
    }
    fc.final_distance = fc.distances.back();
    fc.stable = fc.final_distance < fc.initial_distance;
    std::vector<double> ft, fd;
    for (std::size_t i = 0; i < fc.times.size(); ++i) {
        if (fc.times[i] < opt.skip_fraction * t_max) continue;
        if (fc.distances[i] < opt.distance_floor) break;
        ft.push_back(fc.times[i]);
        fd.push_back(fc.distances[i]);
    }
    const ExponentialFit fit = fit_exponential(ft, fd);
    fc.rate = fit.rate;
    fc.r_squared = fit.r_squared;
    return fc;
}

} // namespace detail

/// Integrates the norm-preserving no-click flow from `initial` and fits the
/// exponential decay of the trace distance to `target`. A negative rate (or
/// stable == false) signals a departing flow.
inline FlowCheck stability_flow_check(const Operator& h_eff, const StateVector& target, const StateVector& initial,
                                      double t_max, const FlowOptions& opt = {}) {
    IntegratorOptions io;
    io.rtol = opt.rtol;
    io.atol = opt.atol;
    const Operator g = -I_unit * h_eff;
    DormandPrince ode([&g](const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd { return g * y; },
                      initial.normalized(), 0.0, io);
    const StateVector ref = target.normalized();
    return detail::run_flow(
        ode, t_max, opt, [](const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd { return y / y.norm(); },
        [&](const Eigen::MatrixXcd& y) { return fock::trace_distance(ref, StateVector(y.col(0))); });
}

/// Mixed-state counterpart: flow of (L + N) rho - Tr(N rho) rho.
inline FlowCheck stability_flow_check(const GeneratorForm& conditioned, const DensityMatrix& target,
                                      const DensityMatrix& initial, double t_max, const FlowOptions& opt = {}) {
    IntegratorOptions io;
    io.rtol = opt.rtol;
    io.atol = opt.atol;
    DormandPrince ode([&conditioned](const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd { return conditioned.apply(y); },
                      initial / initial.trace().real(), 0.0, io);
    return detail::run_flow(
        ode, t_max, opt, [](const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd { return y / y.trace().real(); },
        [&](const Eigen::MatrixXcd& y) { return fock::trace_distance(target, DensityMatrix(y)); });
}

} // namespace kerr_herald
