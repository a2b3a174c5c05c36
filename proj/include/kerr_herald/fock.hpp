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

// fock.hpp: truncated Fock-space operators and states

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "kerr_herald/errors.hpp"

namespace kerr_herald {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;

inline constexpr cplx I_unit{0.0, 1.0};

namespace fock {

inline void require_dim(int dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidDimension, "Fock cutoff must be >= 2, got " + std::to_string(dim));
}

/// Emits a warning when a coherent amplitude populates the upper quarter of the
/// truncated space.
inline void check_truncation(int dim, double mean_photons, Warnings* warnings, const char* where) {
    if (warnings == nullptr) return;
    if (mean_photons > dim / 4.0) {
        warnings->push_back(std::string(where) + ": |alpha|^2 = " + std::to_string(mean_photons) +
                            " is large for cutoff " + std::to_string(dim) + " (truncation-warning)");
    }
}

inline Operator identity(int dim) {
    require_dim(dim);
    return Operator::Identity(dim, dim);
}

// a |n> = sqrt(n) |n-1>
inline Operator annihilation(int dim) {
    require_dim(dim);
    Operator a = Operator::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline Operator creation(int dim) { return annihilation(dim).adjoint(); }

inline Operator number(int dim) {
    require_dim(dim);
    Operator n = Operator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

/// Photon-number parity exp(i pi a^dag a), diagonal (-1)^n.
inline Operator parity(int dim) {
    require_dim(dim);
    Operator p = Operator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

/// D(alpha) = exp(alpha a^dag - alpha^* a) of the truncated generator. The
/// generator is anti-Hermitian, so the result is unitary to rounding.
inline Operator displacement(int dim, cplx alpha, Warnings* warnings = nullptr) {
    require_dim(dim);
    check_truncation(dim, std::norm(alpha), warnings, "displacement");
    if (alpha == cplx{}) return Operator::Identity(dim, dim);
    const Operator a = annihilation(dim);
    const Operator gen = alpha * a.adjoint() - std::conj(alpha) * a;
    return gen.exp();
}

/// Phase rotation exp(i theta a^dag a).
inline Operator rotation(int dim, double theta) {
    require_dim(dim);
    Operator r = Operator::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) r(k, k) = std::polar(1.0, theta * k);
    return r;
}

inline StateVector basis_state(int dim, int n) {
    require_dim(dim);
    if (n < 0 || n >= dim) throw Error(ErrorKind::InvalidParameter, "Fock index out of range");
    StateVector v = StateVector::Zero(dim);
    v(n) = 1.0;
    return v;
}

inline StateVector normalized(const StateVector& v) {
    const double nrm = v.norm();
    if (!(nrm > 0.0)) throw Error(ErrorKind::UndefinedState, "cannot normalize a zero vector");
    return v / nrm;
}

// Truncated amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!), without renormalization.
inline StateVector coherent_amplitudes(int dim, cplx alpha) {
    StateVector v(dim);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return v;
}

inline StateVector coherent_state(int dim, cplx alpha, Warnings* warnings = nullptr) {
    require_dim(dim);
    check_truncation(dim, std::norm(alpha), warnings, "coherent_state");
    return normalized(coherent_amplitudes(dim, alpha));
}

/// (|alpha> + sign |-alpha>), renormalized in the truncated space. sign = +1 is
/// the even cat, -1 the odd cat.
inline StateVector cat_state(int dim, cplx alpha, int sign, Warnings* warnings = nullptr) {
    require_dim(dim);
    if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidParameter, "cat sign must be +1 or -1");
    if (sign == -1 && alpha == cplx{}) throw Error(ErrorKind::UndefinedState, "odd cat state with alpha = 0");
    check_truncation(dim, std::norm(alpha), warnings, "cat_state");
    StateVector v = coherent_amplitudes(dim, alpha);
    // |-alpha> differs by (-1)^n, so the superposition keeps only one parity.
    for (int n = 0; n < dim; ++n) {
        const double s = (n % 2 == 0) ? 1.0 : -1.0;
        v(n) *= (1.0 + sign * s);
    }
    return normalized(v);
}

inline DensityMatrix projector(const StateVector& psi) { return psi * psi.adjoint(); }

inline cplx expectation(const Operator& op, const StateVector& psi) {
    return psi.dot(op * psi) / psi.squaredNorm();
}

inline cplx expectation(const Operator& op, const DensityMatrix& rho) {
    return (op * rho).trace() / rho.trace();
}

inline void require_same_dim(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorKind::DimensionMismatch, "operands have different dimensions");
}

/// Half the trace norm of rho1 - rho2.
inline double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    require_same_dim(rho1, rho2);
    const Eigen::MatrixXcd diff = rho1 - rho2;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(diff);
    return 0.5 * svd.singularValues().sum();
}

/// Trace distance of two pure states, sin of the angle between them. Computed
/// from the orthogonal residual so that small distances keep full precision.
inline double trace_distance(const StateVector& a, const StateVector& b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "state dimensions differ");
    const StateVector residual = b - (a.dot(b) / a.squaredNorm()) * a;
    return std::min(1.0, residual.norm() / b.norm());
}

inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "state dimensions differ");
    return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

/// <psi| rho |psi> for a normalized psi.
inline double fidelity(const StateVector& psi, const DensityMatrix& rho) {
    return std::real(psi.dot(rho * psi)) / (psi.squaredNorm() * std::real(rho.trace()));
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 of unit-trace states.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    auto psd_sqrt = [](const Eigen::MatrixXcd& m) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
        const Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return Eigen::MatrixXcd(es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint());
    };
    const Eigen::MatrixXcd r = psd_sqrt(rho);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r * sigma * r);
    const double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return t * t;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Operator& op, double tol = 1e-12) {
    return max_abs(op - op.adjoint()) <= tol;
}

inline bool is_unitary(const Operator& op, double tol = 1e-10) {
    return max_abs(op.adjoint() * op - Operator::Identity(op.rows(), op.cols())) <= tol;
}

} // namespace fock
} // namespace kerr_herald
