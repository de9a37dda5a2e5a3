#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace motional {

struct EvaluationRecord {
    std::size_t index = 0;
    double cost = 0.0;
    double best = 0.0;  ///< best cost seen up to and including this evaluation
};

struct OptimizationTrace {
    std::vector<EvaluationRecord> records;
    std::vector<double> best_parameters;
    double best_cost = std::numeric_limits<double>::infinity();
    bool converged = false;  ///< false when the evaluation budget ran out
    std::size_t restarts_used = 0;
    double wall_seconds = 0.0;

    std::size_t evaluations() const noexcept { return records.size(); }
};

struct NelderMeadOptions {
    std::size_t max_evaluations = 1000;
    std::size_t restarts = 0;          ///< extra simplex restarts after the first collapse
    double f_tolerance = 1e-12;        ///< spread of simplex costs
    double x_tolerance = 1e-10;        ///< simplex diameter relative to the initial step
    std::vector<double> initial_step;  ///< per-coordinate simplex edge; empty means 0.1 everywhere
    double restart_noise = 1.0;        ///< Gaussian kick on restart, in units of initial_step
    std::uint64_t seed = 1;
    bool adaptive = true;              ///< dimension-dependent coefficients (Gao & Han)
};

using CostFunction = std::function<double(std::span<const double>)>;

/// Counts evaluations, keeps best-so-far and enforces the budget.
class TracedObjective {
public:
    TracedObjective(CostFunction f, std::size_t budget, OptimizationTrace& trace)
        : f_(std::move(f)), budget_(budget), trace_(trace) {}

    bool exhausted() const noexcept { return trace_.records.size() >= budget_; }

    double operator()(std::span<const double> x) {
        double c = f_(x);
        if (std::isnan(c)) c = std::numeric_limits<double>::infinity();
        const std::size_t i = trace_.records.size();
        if (c < trace_.best_cost) {
            trace_.best_cost = c;
            trace_.best_parameters.assign(x.begin(), x.end());
        }
        trace_.records.push_back({i, c, trace_.best_cost});
        return c;
    }

private:
    CostFunction f_;
    std::size_t budget_;
    OptimizationTrace& trace_;
};

namespace detail {

/// One Nelder-Mead run from x0; returns true when the simplex collapsed before the budget ran out.
inline bool nelder_mead_run(TracedObjective& f, std::vector<double> x0, std::span<const double> step,
                            const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    const double dim = static_cast<double>(n);
    const double reflect = 1.0;
    const double expand = opt.adaptive ? 1.0 + 2.0 / dim : 2.0;
    const double contract = opt.adaptive ? 0.75 - 0.5 / dim : 0.5;
    const double shrink = opt.adaptive ? 1.0 - 1.0 / dim : 0.5;

    std::vector<std::vector<double>> x(n + 1, x0);
    std::vector<double> fx(n + 1);
    if (f.exhausted()) return false;
    fx[0] = f(x[0]);
    for (std::size_t i = 0; i < n; ++i) {
        if (f.exhausted()) return false;
        x[i + 1][i] += step[i];
        fx[i + 1] = f(x[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto combine = [&](std::vector<double>& out, double t, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (worst[j] - centroid[j]);
    };

    while (!f.exhausted()) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                diameter = std::max(diameter, std::abs(x[i][j] - x[best][j]) / std::max(step[j], 1e-300));
        if (std::abs(fx[worst] - fx[best]) <= opt.f_tolerance && diameter <= opt.x_tolerance) return true;
        if (diameter <= opt.x_tolerance * 1e-3) return true;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i : order)
            if (i != worst)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += x[i][j] / dim;

        combine(xr, -reflect, x[worst]);
        const double fr = f(xr);
        if (fr < fx[best]) {
            if (f.exhausted()) { x[worst] = xr; fx[worst] = fr; break; }
            combine(xe, -reflect * expand, x[worst]);
            const double fe = f(xe);
            if (fe < fr) x[worst] = xe, fx[worst] = fe;
            else x[worst] = xr, fx[worst] = fr;
            continue;
        }
        if (fr < fx[second]) {
            x[worst] = xr, fx[worst] = fr;
            continue;
        }
        if (f.exhausted()) break;
        // outside or inside contraction
        const bool outside = fr < fx[worst];
        combine(xc, outside ? -reflect * contract : contract, x[worst]);
        const double fc = f(xc);
        if (fc < std::min(fr, fx[worst])) {
            x[worst] = xc, fx[worst] = fc;
            continue;
        }
        if (outside && fr < fx[worst]) x[worst] = xr, fx[worst] = fr;
        for (std::size_t i = 0; i <= n && !f.exhausted(); ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) x[i][j] = x[best][j] + shrink * (x[i][j] - x[best][j]);
            fx[i] = f(x[i]);
        }
    }
    return false;
}

}  // namespace detail

/// Nelder-Mead simplex minimization with seeded restarts around the incumbent.
/// Stochastic only through the restart kicks, so (seed, budget) fixes the whole trace.
inline OptimizationTrace nelder_mead(const CostFunction& cost, std::span<const double> x0,
                                     const NelderMeadOptions& opt) {
    if (x0.empty()) throw std::invalid_argument("nelder_mead: empty parameter vector");
    std::vector<double> step = opt.initial_step;
    if (step.empty()) step.assign(x0.size(), 0.1);
    if (step.size() != x0.size()) throw std::invalid_argument("nelder_mead: initial_step size mismatch");

    const auto t_start = std::chrono::steady_clock::now();
    OptimizationTrace trace;
    trace.best_parameters.assign(x0.begin(), x0.end());
    TracedObjective f(cost, opt.max_evaluations, trace);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss;

    std::vector<double> start(x0.begin(), x0.end());
    bool collapsed = false;
    for (std::size_t cycle = 0; cycle <= opt.restarts; ++cycle) {
        if (cycle > 0) {
            start = trace.best_parameters;
            for (std::size_t j = 0; j < start.size(); ++j) start[j] += opt.restart_noise * step[j] * gauss(rng);
            trace.restarts_used = cycle;
        }
        collapsed = detail::nelder_mead_run(f, start, step, opt);
        if (!collapsed) break;
    }
    trace.converged = collapsed;
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return trace;
}

}  // namespace motional
