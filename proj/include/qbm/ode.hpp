#pragma once

// Dormand–Prince 5(4) with standard step-size control. Works for any state
// type closed under +, -, and scalar *, given a max-abs norm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>

#include "qbm/error.hpp"

namespace qbm::ode {

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 1e-3;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 10000000;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Integrates y' = rhs(t, y) from t_out[0] through every t_out[k], calling
/// on_output(k, t_out[k], y) at each (including k = 0). Steps are clipped to
/// land exactly on output times. after_step(t, y) runs after every accepted
/// step; it may project y in place and returns true when it did.
template <class State, class Rhs, class Norm, class OnOutput, class AfterStep>
Stats dormand_prince(Rhs&& rhs, State y, std::span<const double> t_out, Norm&& norm, OnOutput&& on_output,
                     AfterStep&& after_step, const Options& opt = {})
{
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    Stats stats;
    if (t_out.empty()) return stats;
    double t = t_out[0];
    on_output(std::size_t{0}, t, y);
    double h = opt.initial_step;
    State k1 = rhs(t, y);

    for (std::size_t k = 1; k < t_out.size(); ++k) {
        const double target = t_out[k];
        if (!(target >= t)) throw domain_error("dormand_prince: output times must be ascending");
        while (t < target) {
            if (stats.accepted + stats.rejected >= opt.max_steps) {
                throw numeric_error("dormand_prince: step budget exhausted");
            }
            h = std::min(h, opt.max_step);
            const double h_proposed = h;
            bool last = false;
            if (t + h >= target || target - (t + h) < 1e-12 * std::max(1.0, std::abs(target))) {
                h = target - t;
                last = true;
            }
            const State k2 = rhs(t + c2 * h, State(y + (h * a21) * k1));
            const State k3 = rhs(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
            const State k4 = rhs(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
            const State k5 = rhs(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
            const State k6 = rhs(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
            State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const State k7 = rhs(t + h, y_new);
            const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double scale = opt.abs_tol + opt.rel_tol * std::max(norm(y), norm(y_new));
            const double ratio = norm(err) / scale;
            if (!std::isfinite(ratio)) throw numeric_error("dormand_prince: non-finite state");

            if (ratio <= 1.0) {
                t = last ? target : t + h;
                y = std::move(y_new);
                if (after_step(t, y)) {
                    k1 = rhs(t, y);
                } else {
                    k1 = k7;
                }
                ++stats.accepted;
                const double grow = ratio == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(ratio, -0.2));
                h = last ? std::max(h_proposed, h * grow) : h * grow;
            } else {
                ++stats.rejected;
                h *= std::max(0.2, 0.9 * std::pow(ratio, -0.2));
                if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                    std::ostringstream os;
                    os << "dormand_prince: step size underflow at t=" << t;
                    throw numeric_error(os.str(), ratio * scale);
                }
            }
        }
        on_output(k, t, y);
    }
    return stats;
}

}  // namespace qbm::ode
