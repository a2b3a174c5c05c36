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

// integrator.hpp: adaptive Dormand-Prince 5(4) with continuous extension

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "kerr_herald/errors.hpp"

namespace kerr_herald {

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_initial = 0.0;  // 0 selects automatically
    double h_max = 1.0;
    double h_min = 1e-13;
};

/// Explicit Runge-Kutta 5(4) for autonomous systems dy/dt = f(y) on complex
/// matrices. After each accepted step, dense(theta) interpolates the step with
/// the 4th-order Hairer continuous extension.
class DormandPrince {
public:
    using State = Eigen::MatrixXcd;
    using Rhs = std::function<State(const State&)>;

    DormandPrince(Rhs rhs, State y0, double t0, IntegratorOptions opt = {})
        : rhs_(std::move(rhs)), opt_(opt) {
        reset(std::move(y0), t0);
    }

    /// Restarts from a new state (e.g. after a quantum jump).
    void reset(State y0, double t0) {
        y_ = std::move(y0);
        t_ = t0;
        k1_ = rhs_(y_);
        fsal_valid_ = true;
        if (opt_.h_initial > 0.0) {
            h_ = opt_.h_initial;
        } else {
            const double yn = std::max(rms(y_), 1e-300);
            const double fn = rms(k1_);
            h_ = (fn > 0.0) ? std::clamp(0.01 * yn / fn, 1e-6, opt_.h_max) : opt_.h_max;
        }
    }

    double time() const { return t_; }
    const State& state() const { return y_; }
    double step_start() const { return t_old_; }
    double last_step() const { return h_done_; }

    /// Advances by one accepted step, never beyond t_limit.
    void step(double t_limit) {
        for (;;) {
            double h = std::min(h_, t_limit - t_);
            const bool clipped = h < h_;
            if (h < opt_.h_min * std::max(1.0, std::abs(t_)))
                throw Error(ErrorKind::StepSizeRejection, "step size underflow at t = " + std::to_string(t_));
            if (!fsal_valid_) k1_ = rhs_(y_);
            const State k2 = rhs_(y_ + h * (a21 * k1_));
            const State k3 = rhs_(y_ + h * (a31 * k1_ + a32 * k2));
            const State k4 = rhs_(y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3));
            const State k5 = rhs_(y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4));
            const State k6 = rhs_(y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            State y_new = y_ + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            const State k7 = rhs_(y_new);
            const State err = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double acc = 0.0;
            for (Eigen::Index i = 0; i < err.size(); ++i) {
                const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_(i)), std::abs(y_new(i)));
                acc += std::norm(err(i) / sc);
            }
            const double e = std::sqrt(acc / static_cast<double>(err.size()));
            const double fac = (e == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
            if (e <= 1.0) {
                // continuous extension coefficients
                const State ydiff = y_new - y_;
                const State bspl = h * k1_ - ydiff;
                r1_ = y_;
                r2_ = ydiff;
                r3_ = bspl;
                r4_ = ydiff - h * k7 - bspl;
                r5_ = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                t_old_ = t_;
                h_done_ = h;
                t_ += h;
                y_ = std::move(y_new);
                k1_ = k7;
                fsal_valid_ = true;
                const double proposed = std::min(h * fac, opt_.h_max);
                h_ = clipped ? std::max(h_, proposed) : proposed;
                return;
            }
            h_ = h * fac;
        }
    }

    /// State at t_old + theta h of the last accepted step, theta in [0, 1].
    State dense(double theta) const {
        const double t1 = 1.0 - theta;
        return r1_ + theta * (r2_ + t1 * (r3_ + theta * (r4_ + t1 * r5_)));
    }

    State dense_at(double t) const {
        const double theta = h_done_ > 0.0 ? (t - t_old_) / h_done_ : 1.0;
        return dense(std::clamp(theta, 0.0, 1.0));
    }

private:
    static double rms(const State& s) { return s.size() ? s.norm() / std::sqrt(static_cast<double>(s.size())) : 0.0; }

    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    Rhs rhs_;
    IntegratorOptions opt_;
    State y_, k1_;
    State r1_, r2_, r3_, r4_, r5_;
    double t_ = 0.0, t_old_ = 0.0, h_ = 0.0, h_done_ = 0.0;
    bool fsal_valid_ = false;
};

} // namespace kerr_herald
