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

// model.hpp: the driven Kerr oscillator. Hamiltonian, non-Hermitian generator,
// Liouvillian and the conditioned (no-click) superoperators L and N.
//
// All rates are in units of kappa. Superoperators act on column-stacked
// density matrices, vec(A rho B) = (B^T kron A) vec(rho).

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "kerr_herald/errors.hpp"
#include "kerr_herald/fock.hpp"

namespace kerr_herald {

/// Additional unmonitored dissipator rate * D[op] folded into L0.
struct LindbladChannel {
    double rate = 0.0;
    Operator op;
};

struct SystemParams {
    double delta = 0.0;   // detuning Delta / kappa
    double kerr = 0.0;    // K / kappa
    cplx alpha1{};        // coherent drive
    cplx alpha2{};        // parametric (two-photon) drive
    double kappa = 1.0;   // fixed; every rate is expressed in units of kappa
    double n_th = 0.0;    // thermal occupation of the bath
    double eta = 1.0;     // detection efficiency
    cplx xi{};            // local-oscillator amplitude, units of sqrt(kappa)
    int fock_dim = 20;
    std::vector<LindbladChannel> extra_channels;

    /// Rate of the monitored channel, kappa (n_th + 1) eta.
    double detected_rate() const { return kappa * (n_th + 1.0) * eta; }

    bool pure_unraveling() const { return eta == 1.0 && n_th == 0.0 && extra_channels.empty(); }

    void validate() const {
        auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
        if (!std::isfinite(delta) || !std::isfinite(kerr) || !finite(alpha1) || !finite(alpha2) || !finite(xi))
            throw Error(ErrorKind::InvalidParameter, "non-finite parameter");
        if (kerr < 0.0) throw Error(ErrorKind::InvalidParameter, "kerr must be >= 0");
        if (!(kappa > 0.0)) throw Error(ErrorKind::InvalidParameter, "kappa must be > 0");
        if (!(n_th >= 0.0)) throw Error(ErrorKind::InvalidParameter, "n_th must be >= 0");
        if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorKind::InvalidParameter, "eta must lie in [0, 1]");
        fock::require_dim(fock_dim);
        for (const auto& ch : extra_channels) {
            if (ch.rate < 0.0) throw Error(ErrorKind::InvalidParameter, "channel rate must be >= 0");
            if (ch.op.rows() != fock_dim || ch.op.cols() != fock_dim)
                throw Error(ErrorKind::DimensionMismatch, "channel operator does not match fock_dim");
        }
    }
};

/// Sets alpha1 (real, non-negative) so that |alpha1|^2 K / kappa^3 equals `power`.
inline SystemParams with_drive_power(SystemParams p, double power) {
    if (!(p.kerr > 0.0)) throw Error(ErrorKind::InvalidParameter, "drive power needs kerr > 0");
    p.alpha1 = std::sqrt(power * p.kappa * p.kappa * p.kappa / p.kerr);
    return p;
}

inline SystemParams with_fock_dim(SystemParams p, int dim) {
    p.fock_dim = dim;
    return p;
}

struct Superoperator {
    int dim = 0;
    Eigen::MatrixXcd matrix;  // dim^2 x dim^2

    Eigen::VectorXcd apply(const Eigen::VectorXcd& vec_rho) const { return matrix * vec_rho; }
    DensityMatrix apply(const DensityMatrix& rho) const {
        Eigen::VectorXcd v = matrix * rho.reshaped();
        return v.reshaped(dim, dim);
    }
};

namespace super {

inline Eigen::MatrixXcd spre(const Operator& a) {
    return Eigen::kroneckerProduct(Operator::Identity(a.rows(), a.cols()), a).eval();
}
inline Eigen::MatrixXcd spost(const Operator& b) {
    return Eigen::kroneckerProduct(b.transpose(), Operator::Identity(b.rows(), b.cols())).eval();
}
// vec(x rho y)
inline Eigen::MatrixXcd sandwich(const Operator& x, const Operator& y) {
    return Eigen::kroneckerProduct(y.transpose(), x).eval();
}
inline Eigen::MatrixXcd commutator(const Operator& h) { return spre(h) - spost(h); }
inline Eigen::MatrixXcd anticommutator(const Operator& h) { return spre(h) + spost(h); }
inline Eigen::MatrixXcd dissipator(const Operator& c) {
    const Operator cdc = c.adjoint() * c;
    return sandwich(c, c.adjoint()) - 0.5 * anticommutator(cdc);
}

inline Eigen::VectorXcd vec(const DensityMatrix& rho) { return rho.reshaped(); }
inline DensityMatrix unvec(const Eigen::VectorXcd& v, int dim) { return v.reshaped(dim, dim); }

} // namespace super

/// -Delta a^dag a + K a^dag a^dag a a + (alpha1 a^dag + alpha2 a^dag a^dag + h.c.)
inline Operator build_hamiltonian(const SystemParams& p) {
    p.validate();
    const int d = p.fock_dim;
    const Operator a = fock::annihilation(d);
    const Operator ad = a.adjoint();
    Operator h = Operator::Zero(d, d);
    for (int n = 0; n < d; ++n) h(n, n) = -p.delta * n + p.kerr * n * (n - 1.0);
    const Operator drive = p.alpha1 * ad + p.alpha2 * ad * ad;
    h += drive + drive.adjoint();
    return h;
}

/// M = kappa a^dag a / 2
inline Operator jump_weight_operator(const SystemParams& p) {
    p.validate();
    return 0.5 * p.kappa * fock::number(p.fock_dim);
}

/// Monitored jump operator a + xi.
inline Operator monitored_jump_operator(const SystemParams& p) {
    p.validate();
    return fock::annihilation(p.fock_dim) + p.xi * Operator::Identity(p.fock_dim, p.fock_dim);
}

/// Local-oscillator drive term kappa_d (i/2)(xi a^dag - xi^* a) that enters L.
inline Operator local_oscillator_drive(const SystemParams& p) {
    const Operator a = fock::annihilation(p.fock_dim);
    return p.detected_rate() * 0.5 * I_unit * (p.xi * a.adjoint() - std::conj(p.xi) * a);
}

/// No-click generator in the lab frame,
///   H0 + kappa_d (i/2)(xi a^dag - xi^* a) - i (kappa_d / 2)(a^dag + xi^*)(a + xi).
/// For xi = 0 and eta = 1, n_th = 0 this is H0 - i M.
inline Operator effective_nonhermitian(const SystemParams& p) {
    const Operator c = monitored_jump_operator(p);
    return build_hamiltonian(p) + local_oscillator_drive(p) - 0.5 * I_unit * p.detected_rate() * (c.adjoint() * c);
}

/// Hamiltonian in the displaced frame chi = D(xi) psi,
///   D(xi) H0 D^dag(xi) - i kappa_d (xi^* a - xi a^dag) / 2,
/// in which the monitored jump operator is plain a.
inline Operator displaced_hamiltonian(const SystemParams& p, Warnings* warnings = nullptr) {
    p.validate();
    const int d = p.fock_dim;
    const Operator a = fock::annihilation(d);
    const Operator h0 = build_hamiltonian(p);
    Operator shifted = h0;
    if (p.xi != cplx{}) {
        const Operator dxi = fock::displacement(d, p.xi, warnings);
        shifted = dxi * h0 * dxi.adjoint();
    }
    return shifted - 0.5 * I_unit * p.detected_rate() * (std::conj(p.xi) * a - p.xi * a.adjoint());
}

/// Displaced-frame no-click generator, displaced_hamiltonian - i kappa_d a^dag a / 2.
inline Operator displaced_effective_nonhermitian(const SystemParams& p, Warnings* warnings = nullptr) {
    return displaced_hamiltonian(p, warnings) - 0.5 * I_unit * p.detected_rate() * fock::number(p.fock_dim);
}

/// Matrix-form generator  rho -> -i (G rho - rho G^dag) + sum_k r_k J_k rho J_k^dag.
/// Used for fast time stepping; to_superoperator() gives the equivalent matrix.
struct GeneratorForm {
    struct Sandwich {
        double rate = 0.0;
        Operator op;
    };
    int dim = 0;
    Operator g;
    std::vector<Sandwich> sandwiches;

    DensityMatrix apply(const DensityMatrix& rho) const {
        DensityMatrix out = -I_unit * (g * rho - rho * g.adjoint());
        for (const auto& s : sandwiches) out.noalias() += s.rate * (s.op * rho * s.op.adjoint());
        return out;
    }

    Superoperator to_superoperator() const {
        Superoperator s{dim, -I_unit * (super::spre(g) - super::spost(g.adjoint()))};
        for (const auto& w : sandwiches) s.matrix += w.rate * super::sandwich(w.op, w.op.adjoint());
        return s;
    }
};

namespace detail {

inline GeneratorForm unmonitored_form(const SystemParams& p) {
    const int d = p.fock_dim;
    const Operator a = fock::annihilation(d);
    const Operator ad = a.adjoint();
    GeneratorForm f;
    f.dim = d;
    f.g = build_hamiltonian(p) + local_oscillator_drive(p);
    const double lost = p.kappa * (p.n_th + 1.0) * (1.0 - p.eta);
    const double pumped = p.kappa * p.n_th;
    if (lost > 0.0) {
        f.g += -0.5 * I_unit * lost * (ad * a);
        f.sandwiches.push_back({lost, a});
    }
    if (pumped > 0.0) {
        f.g += -0.5 * I_unit * pumped * (a * ad);
        f.sandwiches.push_back({pumped, ad});
    }
    for (const auto& ch : p.extra_channels) {
        f.g += -0.5 * I_unit * ch.rate * (ch.op.adjoint() * ch.op);
        f.sandwiches.push_back({ch.rate, ch.op});
    }
    return f;
}

} // namespace detail

/// L + N in matrix form (the no-click density-matrix generator).
inline GeneratorForm conditioned_form(const SystemParams& p) {
    p.validate();
    GeneratorForm f = detail::unmonitored_form(p);
    const Operator c = monitored_jump_operator(p);
    f.g += -0.5 * I_unit * p.detected_rate() * (c.adjoint() * c);
    return f;
}

/// Full Liouvillian in matrix form; equals L + N plus the monitored jump term.
inline GeneratorForm liouvillian_form(const SystemParams& p) {
    GeneratorForm f = conditioned_form(p);
    if (p.detected_rate() > 0.0) f.sandwiches.push_back({p.detected_rate(), monitored_jump_operator(p)});
    return f;
}

/// -i[H0, .] + kappa (n_th + 1) D[a] + kappa n_th D[a^dag] (+ extra channels).
inline Superoperator build_liouvillian(const SystemParams& p) {
    p.validate();
    const int d = p.fock_dim;
    const Operator a = fock::annihilation(d);
    Superoperator l{d, -I_unit * super::commutator(build_hamiltonian(p))};
    l.matrix += p.kappa * (p.n_th + 1.0) * super::dissipator(a);
    if (p.n_th > 0.0) l.matrix += p.kappa * p.n_th * super::dissipator(a.adjoint());
    for (const auto& ch : p.extra_channels) l.matrix += ch.rate * super::dissipator(ch.op);
    return l;
}

struct ConditionedGenerators {
    Superoperator L;
    Superoperator N;
    Superoperator sum() const { return {L.dim, L.matrix + N.matrix}; }
};

/// L and N of the stochastic master equation with local oscillator xi:
///   L = L0 - i[kappa_d (i/2)(xi a^dag - xi^* a), .] + kappa (n_th+1)(1-eta) D[a] + kappa n_th D[a^dag]
///   N = -(kappa_d / 2) {(a^dag + xi^*)(a + xi), .}
inline ConditionedGenerators build_conditioned_generators(const SystemParams& p) {
    p.validate();
    const int d = p.fock_dim;
    const Operator a = fock::annihilation(d);
    ConditionedGenerators out;
    out.L.dim = d;
    out.L.matrix = -I_unit * super::commutator(build_hamiltonian(p) + local_oscillator_drive(p));
    const double lost = p.kappa * (p.n_th + 1.0) * (1.0 - p.eta);
    if (lost > 0.0) out.L.matrix += lost * super::dissipator(a);
    if (p.n_th > 0.0) out.L.matrix += p.kappa * p.n_th * super::dissipator(a.adjoint());
    for (const auto& ch : p.extra_channels) out.L.matrix += ch.rate * super::dissipator(ch.op);
    const Operator c = monitored_jump_operator(p);
    out.N.dim = d;
    out.N.matrix = -0.5 * p.detected_rate() * super::anticommutator(c.adjoint() * c);
    return out;
}

} // namespace kerr_herald
