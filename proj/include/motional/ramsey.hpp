#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "control.hpp"
#include "crab.hpp"
#include "damped_sine.hpp"
#include "gpe.hpp"
#include "observables.hpp"

namespace motional {

/// Populations at or below this are numerically zero.
inline constexpr double kPopulationFloor = 1e-12;

/// (max - min) / (max + min); 0 when every entry is at or below kPopulationFloor.
inline double contrast(std::span<const double> series) {
    if (series.empty()) throw std::invalid_argument("contrast: empty series");
    double lo = series[0], hi = series[0];
    for (double v : series) {
        if (v < 0.0) throw std::invalid_argument("contrast: negative entry");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= kPopulationFloor) return 0.0;
    return (hi - lo) / (hi + lo);
}

/// Period of the relative phase arg(<b|psi> / <a|psi>) along a free evolution, from a
/// least-squares slope of the unwrapped phase over all samples.
inline double relative_phase_period(const Trajectory& traj, const Wavefunction& mode_a, const Wavefunction& mode_b) {
    if (traj.samples.size() < 3) throw std::invalid_argument("relative_phase_period: need at least three samples");
    std::vector<double> t, phase;
    double prev = 0.0, offset = 0.0;
    for (const auto& s : traj.samples) {
        const Complex r = inner_product(mode_b, s.state) * std::conj(inner_product(mode_a, s.state));
        if (std::abs(r) < 1e-12) throw std::invalid_argument("relative_phase_period: a mode is unpopulated");
        double p = std::arg(r) + offset;
        if (!phase.empty()) {
            while (p - prev > std::numbers::pi) p -= 2.0 * std::numbers::pi, offset -= 2.0 * std::numbers::pi;
            while (p - prev < -std::numbers::pi) p += 2.0 * std::numbers::pi, offset += 2.0 * std::numbers::pi;
        }
        prev = p;
        t.push_back(s.time);
        phase.push_back(p);
    }
    const double n = static_cast<double>(t.size());
    double st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) st += t[i], sp += phase[i], stt += t[i] * t[i], stp += t[i] * phase[i];
    const double slope = (n * stp - st * sp) / (n * stt - st * st);
    return 2.0 * std::numbers::pi / std::abs(slope);
}

/// Hold scan 0, 0.05, ..., 2.0 ms.
inline std::vector<double> default_hold_times(double end = 2.0, double step = 0.05) {
    std::vector<double> t;
    const auto count = static_cast<std::size_t>(std::llround(end / step));
    for (std::size_t i = 0; i <= count; ++i) t.push_back(step * static_cast<double>(i));
    return t;
}

struct RamseySpec {
    ControlWaveform pulse1 = ControlWaveform::zero(1.19);
    ControlWaveform pulse2 = ControlWaveform::zero(1.6);
    std::vector<double> hold_times = default_hold_times();
    PulseSimulation simulation;

    void validate() const {
        if (hold_times.empty()) throw std::invalid_argument("RamseySpec: hold_times must be non-empty");
        for (std::size_t i = 0; i < hold_times.size(); ++i) {
            if (hold_times[i] < 0.0) throw std::invalid_argument("RamseySpec: negative hold time");
            if (i > 0 && !(hold_times[i] > hold_times[i - 1]))
                throw std::invalid_argument("RamseySpec: hold times must be strictly increasing");
        }
    }
};

struct RamseyPoint {
    double hold_time = 0.0;
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    double leakage = 0.0;  ///< 1 - p0 - p1 - p2, population outside the projection modes
    std::optional<std::string> error;

    double higher_states() const { return 1.0 - p0 - p1; }
};

struct RamseyFringe {
    std::vector<RamseyPoint> points;

    std::vector<double> series(double RamseyPoint::*member) const {
        std::vector<double> out;
        for (const auto& p : points)
            if (!p.error) out.push_back(p.*member);
        return out;
    }
    std::vector<double> times() const { return series(&RamseyPoint::hold_time); }

    double contrast_p0() const { return contrast(series(&RamseyPoint::p0)); }
    double contrast_p1() const { return contrast(series(&RamseyPoint::p1)); }

    double max_higher_states() const {
        double m = 0.0;
        for (const auto& p : points)
            if (!p.error) m = std::max(m, p.higher_states());
        return m;
    }

    /// Fringe period from a damped-sine fit of p0 (falls back to the periodogram peak).
    double period() const {
        const auto t = times();
        const auto v = series(&RamseyPoint::p0);
        if (t.size() < 8) throw std::invalid_argument("RamseyFringe: need at least 8 valid points for a period");
        try {
            return fit_damped_sine(t, v).period;
        } catch (const std::exception&) {
            return dominant_period(t, v);
        }
    }
};

/// ground state -> pulse 1 -> static hold -> pulse 2 -> projection, for every hold time.
/// `basis` holds the orthonormalized projection modes |0>, |1>, |2>.
inline RamseyFringe run_ramsey(const RamseySpec& spec, std::span<const Wavefunction> basis) {
    spec.validate();
    if (basis.size() < 3) throw std::invalid_argument("run_ramsey: need three projection modes");
    SplitStepPropagator prop(spec.simulation.grid, spec.simulation.params, spec.simulation.dt);
    const std::vector<Wavefunction> modes(basis.begin(), basis.end());

    RamseyFringe fringe;
    Wavefunction held = modes[0];
    std::optional<std::string> upstream_error;
    try {
        prop.evolve(held, &spec.pulse1, spec.pulse1.duration());
    } catch (const std::exception& e) {
        upstream_error = std::string("pulse 1: ") + e.what();
    }
    double t = 0.0;
    for (double hold : spec.hold_times) {
        RamseyPoint point;
        point.hold_time = hold;
        if (upstream_error) {
            point.error = upstream_error;
            fringe.points.push_back(point);
            continue;
        }
        try {
            prop.evolve(held, nullptr, hold - t);
            t = hold;
        } catch (const std::exception& e) {
            upstream_error = std::string("hold: ") + e.what();
            point.error = upstream_error;
            fringe.points.push_back(point);
            continue;
        }
        try {
            Wavefunction psi = held;
            prop.evolve(psi, &spec.pulse2, spec.pulse2.duration());
            psi.normalize();
            const auto proj = project_populations(psi, modes);
            point.p0 = proj.populations[0];
            point.p1 = proj.populations[1];
            point.p2 = proj.populations[2];
            point.leakage = std::max(0.0, proj.leakage);
        } catch (const std::exception& e) {
            point.error = std::string("pulse 2: ") + e.what();
        }
        fringe.points.push_back(point);
    }
    return fringe;
}

}  // namespace motional
