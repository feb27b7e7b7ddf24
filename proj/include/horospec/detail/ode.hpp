#pragma once

#include <algorithm>
#include <cmath>

#include "horospec/errors.hpp"

namespace horospec::detail {

// Dormand-Prince 5(4) embedded pair, adaptive step, scalar autonomous ODE
// y' = rhs(y). Integrates from t0 to t1 (either direction), optionally
// stopping at a sequence of output times.
struct OdeStats {
    long steps = 0;
    double est_error = 0.0;
};

template <class Rhs>
class Dopri5 {
public:
    Dopri5(Rhs rhs, double y0, double t0, double tol)
        : rhs_(rhs), y_(y0), t_(t0), atol_(tol), rtol_(tol) {}

    double y() const { return y_; }
    double t() const { return t_; }
    const OdeStats& stats() const { return stats_; }

    // advance to t_target (monotone in the current direction)
    void advance(double t_target) {
        const double dir = (t_target >= t_) ? 1.0 : -1.0;
        if (t_target == t_) return;
        double h = h_last_ != 0.0 ? h_last_ : dir * 1e-2 * (1.0 + std::abs(t_target - t_));
        if (h * dir < 0.0) h = -h;
        while (dir * (t_target - t_) > 0.0) {
            h = dir * std::min(std::abs(h), std::abs(t_target - t_));
            if (std::abs(h) < 1e-12)
                throw stiffness_error("ode: step underflow below 1e-12");
            step(h);
        }
    }

private:
    void step(double& h) {
        for (;;) {
            const double k1 = rhs_(y_);
            const double k2 = rhs_(y_ + h * (a21 * k1));
            const double k3 = rhs_(y_ + h * (a31 * k1 + a32 * k2));
            const double k4 = rhs_(y_ + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const double k5 = rhs_(y_ + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const double k6 =
                rhs_(y_ + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const double y5 =
                y_ + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const double k7 = rhs_(y5);
            const double y4 = y_ + h * (bs1 * k1 + bs3 * k3 + bs4 * k4 + bs5 * k5 +
                                        bs6 * k6 + bs7 * k7);
            const double sc = atol_ + rtol_ * std::max(std::abs(y_), std::abs(y5));
            const double err = std::abs(y5 - y4) / sc;
            if (err <= 1.0) {
                t_ += h;
                y_ = y5;
                ++stats_.steps;
                stats_.est_error += std::abs(y5 - y4);
                const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
                h_last_ = h * fac;
                return;
            }
            const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
            h *= fac;
            if (std::abs(h) < 1e-12)
                throw stiffness_error("ode: step underflow below 1e-12");
        }
    }

    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double bs1 = 5179.0 / 57600.0, bs3 = 7571.0 / 16695.0,
                            bs4 = 393.0 / 640.0, bs5 = -92097.0 / 339200.0,
                            bs6 = 187.0 / 2100.0, bs7 = 1.0 / 40.0;

    Rhs rhs_;
    double y_, t_;
    double atol_, rtol_;
    double h_last_ = 0.0;
    OdeStats stats_;
};

} // namespace horospec::detail
