#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gflow/config.hpp"
#include "gflow/errors.hpp"

namespace gflow {

// Solution of an initial value problem on an interval around t0, stored as
// accepted steps with derivatives; evaluation between nodes uses cubic
// Hermite interpolation. The reached interval is an (open) estimate of the
// maximal existence interval when a stop flag is set.
class DenseTrajectory {
public:
    struct Node {
        double t;
        std::vector<double> y;
        std::vector<double> f;
    };

    std::vector<Node> nodes; // ascending in t
    bool blowup_forward = false;
    bool blowup_backward = false;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    double max_error_estimate = 0.0;

    double t_min() const { return nodes.front().t; }
    double t_max() const { return nodes.back().t; }

    bool covers(double t) const { return t >= t_min() && t <= t_max(); }

    std::vector<double> value(double t) const {
        // tolerate float fuzz at the endpoints
        double eps = 1e-9 * (1.0 + std::abs(t));
        if (t > t_max() && t - t_max() <= eps) t = t_max();
        if (t < t_min() && t_min() - t <= eps) t = t_min();
        if (!covers(t))
            throw OutOfIntegratedRange("t outside the integrated interval");
        auto it = std::lower_bound(nodes.begin(), nodes.end(), t,
                                   [](const Node& n, double tv) { return n.t < tv; });
        if (it == nodes.end()) return nodes.back().y;
        if (it->t == t) return it->y;
        if (it == nodes.begin()) return nodes.front().y;
        const Node& b = *it;
        const Node& a = *(it - 1);
        double h = b.t - a.t;
        double s = (t - a.t) / h;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        double h10 = s * (1 - s) * (1 - s);
        double h01 = s * s * (3 - 2 * s);
        double h11 = s * s * (s - 1);
        std::vector<double> out(a.y.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = h00 * a.y[i] + h * h10 * a.f[i] + h01 * b.y[i] + h * h11 * b.f[i];
        return out;
    }
};

using OdeRhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

namespace detail {

// Dormand-Prince 5(4) coefficients
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// One direction of integration; appends accepted nodes after the seed node.
inline void integrate_direction(const OdeRhs& rhs, DenseTrajectory& traj, double t0,
                                const std::vector<double>& y0, double t_end,
                                const Config& cfg, bool& blowup_flag,
                                std::vector<DenseTrajectory::Node>& out) {
    const std::size_t n = y0.size();
    const double dir = t_end >= t0 ? 1.0 : -1.0;
    double t = t0;
    std::vector<double> y = y0;
    std::vector<double> f0(n);
    rhs(t, y, f0); // initial evaluation failures propagate

    double h = std::min(cfg.max_step, std::abs(t_end - t0));
    if (h == 0.0) return;

    std::vector<double> k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    using D = Dopri5;

    while (dir * (t_end - t) > 0.0) {
        double remaining = std::abs(t_end - t);
        if (remaining <= 1e-13 * (1.0 + std::abs(t_end))) break; // reached the end
        h = std::min(h, remaining);
        if (h < cfg.min_step) {
            blowup_flag = true;
            break;
        }
        double hs = dir * h;
        bool eval_failed = false;
        try {
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * D::a21 * f0[i];
            rhs(t + D::c2 * hs, ytmp, k2);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + hs * (D::a31 * f0[i] + D::a32 * k2[i]);
            rhs(t + D::c3 * hs, ytmp, k3);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + hs * (D::a41 * f0[i] + D::a42 * k2[i] + D::a43 * k3[i]);
            rhs(t + D::c4 * hs, ytmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + hs * (D::a51 * f0[i] + D::a52 * k2[i] + D::a53 * k3[i] +
                                       D::a54 * k4[i]);
            rhs(t + D::c5 * hs, ytmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + hs * (D::a61 * f0[i] + D::a62 * k2[i] + D::a63 * k3[i] +
                                       D::a64 * k4[i] + D::a65 * k5[i]);
            rhs(t + hs, ytmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + hs * (D::b1 * f0[i] + D::b3 * k3[i] + D::b4 * k4[i] +
                                       D::b5 * k5[i] + D::b6 * k6[i]);
            rhs(t + hs, ynew, k7);
        } catch (const Error&) {
            eval_failed = true;
        }

        if (eval_failed) {
            ++traj.rejected_steps;
            h *= 0.5;
            continue;
        }

        double err_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            err[i] = hs * (D::e1 * f0[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                           D::e6 * k6[i] + D::e7 * k7[i]);
            double scale =
                cfg.ode_abs_tol +
                cfg.ode_rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double r = err[i] / scale;
            err_norm += r * r;
        }
        err_norm = std::sqrt(err_norm / static_cast<double>(n));

        if (err_norm <= 1.0) {
            t += hs;
            y = ynew;
            f0 = k7; // FSAL
            out.push_back({t, y, f0});
            ++traj.accepted_steps;
            traj.max_error_estimate = std::max(traj.max_error_estimate, inf_norm(err));
            if (inf_norm(y) > cfg.blowup_norm) {
                blowup_flag = true;
                break;
            }
        } else {
            ++traj.rejected_steps;
        }
        double factor = 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2);
        h = std::min(cfg.max_step, h * std::clamp(factor, 0.2, 5.0));
    }
}

} // namespace detail

// Integrate over [t_lo, t_hi] with t0 = 0 inside; both directions share the
// seed node. Blow-up (state norm bound or step underflow) stops a direction
// and sets its flag; the reached interval is the domain estimate.
inline DenseTrajectory integrate_ode(const OdeRhs& rhs, const std::vector<double>& y0,
                                     double t_lo, double t_hi, const Config& cfg,
                                     double t0 = 0.0) {
    if (t_lo > t0 || t_hi < t0)
        throw OutOfIntegratedRange("t0 must lie inside [t_lo, t_hi]");
    DenseTrajectory traj;
    std::vector<double> f0(y0.size());
    rhs(t0, y0, f0);

    std::vector<DenseTrajectory::Node> backward, forward;
    detail::integrate_direction(rhs, traj, t0, y0, t_lo, cfg, traj.blowup_backward,
                                backward);
    detail::integrate_direction(rhs, traj, t0, y0, t_hi, cfg, traj.blowup_forward, forward);

    traj.nodes.reserve(backward.size() + forward.size() + 1);
    for (auto it = backward.rbegin(); it != backward.rend(); ++it)
        traj.nodes.push_back(std::move(*it));
    traj.nodes.push_back({t0, y0, f0});
    for (auto& n : forward) traj.nodes.push_back(std::move(n));
    return traj;
}

} // namespace gflow
