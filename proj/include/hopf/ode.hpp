#pragma once

// Adaptive Dormand-Prince 5(4) with FSAL and cubic Hermite dense output.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "hopf/errors.hpp"

namespace hopf::ode {

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;   // 0: choose automatically
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 200'000'000;
};

enum class Exit { completed, left_domain, step_limit };

/// Hermite interpolant over one accepted step.
template <typename State>
struct StepInterp {
    double t0, t1;
    State y0, y1, f0, f1;
    State operator()(double t) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 +
               (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * f1;
    }
    State derivative(double t) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * f0 +
                (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * h * f1) / h;
    }
};

/// Integrate y' = f(t, y) from (t0, y0) to t_end.  After every accepted step
/// `on_step(interp)` runs; returning false stops the run (Exit::completed).
/// `in_domain` (optional) truncates the run when the state leaves the domain.
template <typename State, typename F, typename OnStep>
Exit integrate(F&& f, double t0, const State& y0, double t_end, const Options& opt,
               OnStep&& on_step,
               const std::function<bool(const State&)>& in_domain = {}) {
    const double dir = (t_end >= t0) ? 1.0 : -1.0;
    State y = y0;
    State k1 = f(t0, y);
    double t = t0;

    double h = opt.h_init;
    if (h == 0.0) {
        const double d0 = y.norm(), d1 = k1.norm();
        h = (d1 > 1e-10) ? 0.01 * std::max(d0, 1.0) / d1 : 1e-3;
    }
    h = std::min(h, opt.h_max) * dir;

    State k2, k3, k4, k5, k6, k7, y5, err;
    long steps = 0;
    while (dir * (t_end - t) > 0.0) {
        if (++steps > opt.max_steps) return Exit::step_limit;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
            throw StiffnessError("ode::integrate: step size underflow");
        if (dir * (t + h - t_end) > 0.0) h = t_end - t;

        k2 = f(t + h / 5.0, y + h * (k1 / 5.0));
        k3 = f(t + 3.0 * h / 10.0, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
        k4 = f(t + 4.0 * h / 5.0, y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
        k5 = f(t + 8.0 * h / 9.0,
               y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 -
                        212.0 / 729.0 * k4));
        k6 = f(t + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                               49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
        y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                      2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
        k7 = f(t + h, y5);
        err = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1 + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3 +
                   (125.0 / 192.0 - 393.0 / 640.0) * k4 + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5 +
                   (11.0 / 84.0 - 187.0 / 2100.0) * k6 - k7 / 40.0);

        double en = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
            const double q = err(i) / sc;
            en += q * q;
        }
        en = std::sqrt(en / static_cast<double>(y.size()));

        if (en <= 1.0) {
            StepInterp<State> interp{t, t + h, y, y5, k1, k7};
            t += h;
            y = y5;
            k1 = k7; // FSAL
            const double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
            h = dir * std::min(std::abs(h) * fac, opt.h_max);
            if (in_domain && !in_domain(y)) {
                on_step(interp);
                return Exit::left_domain;
            }
            if (!on_step(interp)) return Exit::completed;
        } else {
            const double fac = std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
            h *= fac;
        }
    }
    return Exit::completed;
}

} // namespace hopf::ode
