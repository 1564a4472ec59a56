// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "annealab/errors.hpp"

namespace annealab {

/// Box constraints; use +-infinity for unconstrained coordinates.
struct BoxBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct OptimOptions {
    int max_iterations = 1000;
    double grad_tol = 1e-6;  // sup-norm of the projected gradient
    double f_tol = 1e-14;    // relative objective decrease
    double armijo_c1 = 1e-4;
    double finite_diff_rel_step = 1e-6;
};

struct OptimResult {
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double projected_grad_norm = 0.0;
    std::vector<double> objective_history; // objective after each accepted step
};

using Objective = std::function<double(const std::vector<double>&)>;

namespace detail {

inline double clamp_to_box(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

inline std::vector<double> project(const std::vector<double>& x, const BoxBounds& b) {
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = clamp_to_box(x[i], b.lower[i], b.upper[i]);
    return p;
}

/// Central differences with relative step h_i = rel * max(1, |x_i|).
inline std::vector<double> central_gradient(const Objective& f, const std::vector<double>& x, double rel) {
    std::vector<double> g(x.size());
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = rel * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace detail

/// Bounded quasi-Newton minimizer: dense inverse-BFGS approximation with
/// gradient projection onto the box and a monotone Armijo backtracking line
/// search. Gradients are numerical central differences. Deterministic; the
/// objective history is weakly decreasing by construction. Dimension is
/// expected to stay small (law fitting uses <= 7 parameters).
inline OptimResult minimize_bounded(const Objective& f, std::vector<double> x0, const BoxBounds& bounds,
                                    const OptimOptions& opts = {}) {
    const std::size_t n = x0.size();
    if (bounds.lower.size() != n || bounds.upper.size() != n)
        throw ValidationError("minimize_bounded: bounds dimension mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!(bounds.lower[i] <= bounds.upper[i]))
            throw ValidationError("minimize_bounded: lower bound exceeds upper bound at index " +
                                  std::to_string(i));

    std::vector<double> x = detail::project(x0, bounds);
    double fx = f(x);
    std::vector<double> g = detail::central_gradient(f, x, opts.finite_diff_rel_step);

    // Inverse Hessian approximation, row-major n x n, initialized to identity.
    std::vector<double> hinv(n * n, 0.0);
    auto reset_hinv = [&] {
        std::fill(hinv.begin(), hinv.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
    };
    reset_hinv();

    OptimResult res;
    res.objective_history.push_back(fx);

    auto projected_grad_norm = [&](const std::vector<double>& xc, const std::vector<double>& gc) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double moved = detail::clamp_to_box(xc[i] - gc[i], bounds.lower[i], bounds.upper[i]);
            nrm = std::max(nrm, std::abs(moved - xc[i]));
        }
        return nrm;
    };

    int iter = 0;
    bool converged = false;
    int stall_count = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const double pg = projected_grad_norm(x, g);
        if (pg < opts.grad_tol) {
            converged = true;
            break;
        }

        // d = -Hinv * g, with components pointing into active bounds zeroed.
        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * g[j];
            d[i] = -acc;
        }
        const double edge = 1e-12;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] <= bounds.lower[i] + edge && d[i] < 0.0) d[i] = 0.0;
            if (x[i] >= bounds.upper[i] - edge && d[i] > 0.0) d[i] = 0.0;
        }
        double gd = detail::dot(g, d);
        if (!(gd < -1e-14 * detail::norm2(g) * detail::norm2(d)) || !std::isfinite(gd)) {
            // Not a usable descent direction; fall back to projected steepest descent.
            reset_hinv();
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            for (std::size_t i = 0; i < n; ++i) {
                if (x[i] <= bounds.lower[i] + edge && d[i] < 0.0) d[i] = 0.0;
                if (x[i] >= bounds.upper[i] - edge && d[i] > 0.0) d[i] = 0.0;
            }
            gd = detail::dot(g, d);
            if (!(gd < 0.0)) break; // fully pinned; nothing to do
        }

        // Backtracking Armijo search on the projected path.
        double alpha = 1.0;
        std::vector<double> trial;
        double f_trial = fx;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            trial.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = detail::clamp_to_box(x[i] + alpha * d[i], bounds.lower[i], bounds.upper[i]);
            f_trial = f(trial);
            double decrease_ref = 0.0;
            for (std::size_t i = 0; i < n; ++i) decrease_ref += g[i] * (trial[i] - x[i]);
            if (std::isfinite(f_trial) && f_trial <= fx + opts.armijo_c1 * decrease_ref) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break; // line search stalled

        std::vector<double> g_new = detail::central_gradient(f, trial, opts.finite_diff_rel_step);
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = trial[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        const double sy = detail::dot(s, y);
        if (sy > 1e-12 * detail::norm2(s) * detail::norm2(y) && sy > 0.0) {
            // Standard inverse BFGS update.
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * y[j];
                hy[i] = acc;
            }
            const double yhy = detail::dot(y, hy);
            const double c1 = (sy + yhy) / (sy * sy);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    hinv[i * n + j] += c1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }

        const double prev_fx = fx;
        x = std::move(trial);
        fx = f_trial;
        g = std::move(g_new);
        res.objective_history.push_back(fx);

        if (prev_fx - fx <= opts.f_tol * std::max(1.0, std::abs(prev_fx))) {
            if (++stall_count >= 3) {
                ++iter;
                break;
            }
        } else {
            stall_count = 0;
        }
    }

    res.x = std::move(x);
    res.objective = fx;
    res.iterations = iter;
    res.projected_grad_norm = projected_grad_norm(res.x, g);
    res.converged = converged || res.projected_grad_norm < opts.grad_tol;
    return res;
}

} // namespace annealab
