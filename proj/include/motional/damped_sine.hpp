#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "observables.hpp"

namespace motional {

/// values(t) = A exp(-t / tau) sin(2 pi t / T + phi) + C0.
struct DampedSineFit {
    double amplitude = 0.0;
    double tau = std::numeric_limits<double>::infinity();  ///< ms; +inf when no damping is measurable
    double period = 0.0;                                   ///< ms
    double phase = 0.0;                                    ///< rad, (-pi, pi]
    double offset = 0.0;

    double decay_rate = 0.0;  ///< 1/tau, 1/ms
    // 1-sigma standard errors from the local quadratic model of the residual
    double amplitude_sigma = 0.0, decay_rate_sigma = 0.0, tau_sigma = 0.0, period_sigma = 0.0,
           phase_sigma = 0.0, offset_sigma = 0.0;

    double residual_norm = 0.0;  ///< sqrt(sum of squared residuals)
    std::size_t iterations = 0;
    bool no_measurable_damping = false;

    /// Two-sided 95% interval half-width for a parameter sigma.
    static double ci95(double sigma) { return 1.959963984540054 * sigma; }

    double evaluate(double t) const {
        return amplitude * std::exp(-decay_rate * t) * std::sin(2.0 * std::numbers::pi * t / period + phase) + offset;
    }
};

/// Period of the strongest oscillation, scanned over frequencies up to the sampling limit.
/// Works for unevenly spaced samples (plain periodogram of the mean-removed data).
inline double dominant_period(std::span<const double> times, std::span<const double> values) {
    const std::size_t n = times.size();
    const double span = times.back() - times.front();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double min_dt = span;
    for (std::size_t i = 1; i < n; ++i) min_dt = std::min(min_dt, times[i] - times[i - 1]);
    const double f_lo = 0.5 / span, f_hi = 0.5 / min_dt;
    const std::size_t steps = 4000;
    double best_f = f_lo, best_p = -1.0;
    auto power = [&](double f) {
        double s = 0.0, c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 2.0 * std::numbers::pi * f * times[i];
            s += (values[i] - mean) * std::sin(w);
            c += (values[i] - mean) * std::cos(w);
        }
        return s * s + c * c;
    };
    for (std::size_t i = 0; i <= steps; ++i) {
        const double f = f_lo + (f_hi - f_lo) * static_cast<double>(i) / static_cast<double>(steps);
        const double p = power(f);
        if (p > best_p) best_p = p, best_f = f;
    }
    return 1.0 / best_f;
}

/// Levenberg-Marquardt least squares of the damped sine. The decay rate is constrained to >= 0;
/// when it settles on 0 the fit reports no measurable damping (tau = +inf).
inline DampedSineFit fit_damped_sine(std::span<const double> times, std::span<const double> values,
                                     std::size_t max_iterations = 500) {
    const std::size_t n = times.size();
    if (n != values.size()) throw std::invalid_argument("fit_damped_sine: times/values size mismatch");
    if (n < 8) throw std::invalid_argument("fit_damped_sine: need at least 8 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("fit_damped_sine: times must increase");

    const double period0 = dominant_period(times, values);
    const double span = times.back() - times.front();
    if (span < period0 * (1.0 - 1e-9))
        throw std::invalid_argument("fit_damped_sine: samples span less than one period");

    // Linear least squares at the trial period gives amplitude, phase and offset.
    Eigen::MatrixXd basis(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 2.0 * std::numbers::pi * times[i] / period0;
        basis(i, 0) = std::sin(w), basis(i, 1) = std::cos(w), basis(i, 2) = 1.0;
        y(i) = values[i];
    }
    const Eigen::Vector3d lin = basis.colPivHouseholderQr().solve(y);

    // p = (A, gamma, T, phi, C0)
    Eigen::Matrix<double, 5, 1> p;
    p << std::hypot(lin(0), lin(1)), 0.1 / span, period0, std::atan2(lin(1), lin(0)), lin(2);

    auto residuals = [&](const Eigen::Matrix<double, 5, 1>& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        r.resize(static_cast<Eigen::Index>(n));
        if (jac) jac->resize(static_cast<Eigen::Index>(n), 5);
        const double omega = 2.0 * std::numbers::pi / q(2);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = times[i];
            const double e = std::exp(-q(1) * t);
            const double s = std::sin(omega * t + q(3)), c = std::cos(omega * t + q(3));
            const auto ii = static_cast<Eigen::Index>(i);
            r(ii) = q(0) * e * s + q(4) - values[i];
            if (jac) {
                (*jac)(ii, 0) = e * s;
                (*jac)(ii, 1) = -t * q(0) * e * s;
                (*jac)(ii, 2) = q(0) * e * c * t * (-omega / q(2));
                (*jac)(ii, 3) = q(0) * e * c;
                (*jac)(ii, 4) = 1.0;
            }
        }
    };

    Eigen::VectorXd r;
    Eigen::MatrixXd j;
    residuals(p, r, &j);
    double cost = r.squaredNorm();
    double mu = 1e-3;
    std::size_t it = 0;
    bool converged = false;
    for (; it < max_iterations; ++it) {
        Eigen::Matrix<double, 5, 5> jtj = j.transpose() * j;
        Eigen::Matrix<double, 5, 1> g = j.transpose() * r;
        if (p(1) <= 0.0 && g(1) > 0.0) {
            // decay rate held at its bound
            jtj.row(1).setZero();
            jtj.col(1).setZero();
            jtj(1, 1) = 1.0;
            g(1) = 0.0;
        }
        if (g.cwiseAbs().maxCoeff() < 1e-15 * std::max(1.0, cost)) { converged = true; break; }
        Eigen::Matrix<double, 5, 5> a = jtj;
        for (int k = 0; k < 5; ++k) a(k, k) += mu * std::max(jtj(k, k), 1e-12);
        Eigen::Matrix<double, 5, 1> step = a.ldlt().solve(-g);
        Eigen::Matrix<double, 5, 1> trial = p + step;
        trial(1) = std::max(trial(1), 0.0);
        if (trial(2) <= 0.0) trial(2) = 0.5 * p(2);
        Eigen::VectorXd rt;
        residuals(trial, rt, nullptr);
        const double trial_cost = rt.squaredNorm();
        if (trial_cost < cost) {
            const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
            const double step_rel = ((trial - p).cwiseAbs().array() / (p.cwiseAbs().array() + 1e-12)).maxCoeff();
            p = trial;
            residuals(p, r, &j);
            cost = trial_cost;
            mu = std::max(mu * 0.3, 1e-12);
            if (rel < 1e-14 || step_rel < 1e-13) { converged = true; break; }
        } else {
            mu *= 4.0;
            if (mu > 1e12) { converged = cost < 1e300; break; }
        }
    }
    if (!converged) throw NumericalError("fit_damped_sine: did not converge", std::sqrt(cost));

    DampedSineFit fit;
    if (p(0) < 0.0) p(0) = -p(0), p(3) += std::numbers::pi;
    fit.amplitude = p(0);
    fit.decay_rate = p(1);
    fit.period = p(2);
    fit.phase = wrap_phase(p(3));
    fit.offset = p(4);
    fit.residual_norm = std::sqrt(cost);
    fit.iterations = it;

    // Covariance s^2 (J^T J)^{-1} from the final Jacobian.
    const double dof = static_cast<double>(n) - 5.0;
    const double s2 = dof > 0.0 ? cost / dof : 0.0;
    const Eigen::Matrix<double, 5, 5> jtj = j.transpose() * j;
    const Eigen::Matrix<double, 5, 5> cov = s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
    fit.amplitude_sigma = std::sqrt(std::max(cov(0, 0), 0.0));
    fit.decay_rate_sigma = std::sqrt(std::max(cov(1, 1), 0.0));
    fit.period_sigma = std::sqrt(std::max(cov(2, 2), 0.0));
    fit.phase_sigma = std::sqrt(std::max(cov(3, 3), 0.0));
    fit.offset_sigma = std::sqrt(std::max(cov(4, 4), 0.0));
    // Damping pinned at the bound, or statistically indistinguishable from zero over the sampled span.
    fit.no_measurable_damping = fit.decay_rate * span < 1e-9;
    if (fit.no_measurable_damping) {
        fit.tau = std::numeric_limits<double>::infinity();
        fit.tau_sigma = std::numeric_limits<double>::infinity();
    } else {
        fit.tau = 1.0 / fit.decay_rate;
        fit.tau_sigma = fit.decay_rate_sigma / (fit.decay_rate * fit.decay_rate);
    }
    return fit;
}

}  // namespace motional
