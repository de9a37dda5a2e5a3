#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "control.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "potential.hpp"
#include "units.hpp"
#include "wavefunction.hpp"

namespace motional {

/// Effective 1D GPE: H/h = -c d^2/dy^2 + V(y - lambda(t)) + gN |psi|^2, c = hbar^2/(2 m h).
struct GpeParams {
    double mass = units::kRubidium87Mass;  ///< kg
    double atom_number = 700.0;
    double g_n = 0.0;  ///< g_y(N) N in kHz um
    PotentialSpec potential = PotentialSpec::sextic_y();

    double kinetic_coefficient() const { return units::kinetic_coefficient(mass); }

    void validate() const {
        if (!(mass > 0.0)) throw std::invalid_argument("GpeParams: mass must be positive");
        if (!(atom_number >= 1.0)) throw std::invalid_argument("GpeParams: atom number must be >= 1");
        if (!(g_n >= 0.0) || !std::isfinite(g_n)) throw std::invalid_argument("GpeParams: gN must be >= 0");
    }

    GpeParams with_g_n(double g) const {
        GpeParams p = *this;
        p.g_n = g;
        return p;
    }
};

/// Spectral helpers shared by the propagators and the stationary solver.
class GpeOperator {
public:
    GpeOperator(const SpatialGrid& grid, const GpeParams& params)
        : grid_(grid), params_(params), fft_(grid.size()), kinetic_(grid.size()), potential_(grid.size()) {
        params_.validate();
        const double c = params_.kinetic_coefficient();
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double k = grid.momentum(j);
            kinetic_[j] = c * k * k;
            potential_[j] = params_.potential.confined(grid.position(j));
        }
    }

    const SpatialGrid& grid() const noexcept { return grid_; }
    const GpeParams& params() const noexcept { return params_; }
    const FourierTransform& fft() const noexcept { return fft_; }
    /// c k^2 in FFT order, kHz.
    const std::vector<double>& kinetic() const noexcept { return kinetic_; }
    /// Static (lambda = 0) confined potential, kHz.
    const std::vector<double>& potential() const noexcept { return potential_; }

    /// T psi via FFT.
    std::vector<Complex> apply_kinetic(const Wavefunction& psi) const {
        std::vector<Complex> a(psi.amplitudes().begin(), psi.amplitudes().end());
        fft_.forward(a);
        const double inv_n = 1.0 / static_cast<double>(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) a[j] *= kinetic_[j] * inv_n;
        fft_.backward(a);
        return a;
    }

    /// H[psi] psi in the static trap.
    Wavefunction apply_hamiltonian(const Wavefunction& psi) const {
        auto a = apply_kinetic(psi);
        for (std::size_t j = 0; j < a.size(); ++j)
            a[j] += (potential_[j] + params_.g_n * std::norm(psi[j])) * psi[j];
        return {grid_, std::move(a)};
    }

    /// <psi|T|psi> + <V> + gN/2 int |psi|^4, kHz (per particle).
    double energy(const Wavefunction& psi) const {
        const auto parts = energy_parts(psi);
        return parts.kinetic + parts.potential + 0.5 * parts.interaction;
    }

    /// <psi|H[psi]|psi> / <psi|psi>, kHz.
    double chemical_potential(const Wavefunction& psi) const {
        const auto parts = energy_parts(psi);
        return (parts.kinetic + parts.potential + parts.interaction) / psi.norm_squared();
    }

    struct EnergyParts {
        double kinetic = 0.0;
        double potential = 0.0;
        double interaction = 0.0;  ///< gN int |psi|^4
    };

    EnergyParts energy_parts(const Wavefunction& psi) const {
        std::vector<Complex> a(psi.amplitudes().begin(), psi.amplitudes().end());
        fft_.forward(a);
        EnergyParts e;
        double kin = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) kin += kinetic_[j] * std::norm(a[j]);
        // Parseval: sum |psi|^2 dy = dy/N sum |A_k|^2
        e.kinetic = kin * grid_.dy() / static_cast<double>(a.size());
        double pot = 0.0, quartic = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double rho = std::norm(psi[j]);
            pot += potential_[j] * rho;
            quartic += rho * rho;
        }
        e.potential = pot * grid_.dy();
        e.interaction = params_.g_n * quartic * grid_.dy();
        return e;
    }

private:
    SpatialGrid grid_;
    GpeParams params_;
    FourierTransform fft_;
    std::vector<double> kinetic_;
    std::vector<double> potential_;
};

struct TrajectorySample {
    double time;  ///< ms
    Wavefunction state;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  ///< includes the initial and final state
    Wavefunction final_state;
    double final_time = 0.0;
};

/// Real-time Strang splitting: half potential+nonlinear, full kinetic, half potential+nonlinear.
/// The displacement is evaluated at the midpoint of each step.
class SplitStepPropagator {
public:
    static constexpr double kDefaultStep = 0.5e-3;  ///< ms

    SplitStepPropagator(const SpatialGrid& grid, const GpeParams& params, double dt = kDefaultStep)
        : op_(grid, params), dt_(dt), phase_(grid.size()), next_phase_(grid.size()), kinetic_phase_(grid.size()) {
        if (!(dt > 0.0) || dt > 1e-3) throw std::invalid_argument("SplitStepPropagator: require 0 < dt <= 1 us");
        set_kinetic_step(dt);
    }

    const GpeOperator& op() const noexcept { return op_; }
    const SpatialGrid& grid() const noexcept { return op_.grid(); }
    const GpeParams& params() const noexcept { return op_.params(); }
    double dt() const noexcept { return dt_; }

    /// Advances psi in place by `duration` ms. With a control, lambda is read at
    /// control time `control_offset + (time since this call started)`; without one the trap is static.
    void evolve(Wavefunction& psi, const ControlWaveform* control, double duration, double control_offset = 0.0) {
        if (duration < 0.0) throw std::invalid_argument("evolve: negative duration");
        if (duration == 0.0) return;
        if (!(psi.grid() == grid())) throw std::invalid_argument("evolve: grid mismatch");
        const auto steps = static_cast<std::size_t>(std::ceil(duration / dt_ - 1e-9));
        const double h = duration / static_cast<double>(steps);
        set_kinetic_step(h);
        auto amp = psi.amplitudes();
        const std::size_t n = amp.size();
        const double g = params().g_n;
        const auto& v0 = op_.potential();
        const auto& spec = params().potential;
        const auto potential_at = [&](double t_mid, std::vector<double>& out) {
            const double lambda = control ? control->envelope(t_mid) * control->carrier(t_mid) : 0.0;
            if (lambda == 0.0) {
                std::copy(v0.begin(), v0.end(), out.begin());
            } else {
                for (std::size_t j = 0; j < n; ++j) out[j] = spec.confined(grid().position(j), lambda);
            }
        };

        // Strang steps chained: the closing half potential step of step s and the opening
        // half step of s+1 commute (|psi|^2 is unchanged by a phase), so they are fused.
        potential_at(control_offset + 0.5 * h, phase_);
        half_potential(amp, phase_, g, h, 1.0);
        for (std::size_t s = 0; s < steps; ++s) {
            op_.fft().forward(amp);
            for (std::size_t j = 0; j < n; ++j) amp[j] *= kinetic_phase_[j];
            op_.fft().backward(amp);
            const double t_end = control_offset + (static_cast<double>(s) + 1.0) * h;
            if (s + 1 == steps) {
                half_potential(amp, phase_, g, h, 1.0);
            } else {
                potential_at(t_end + 0.5 * h, next_phase_);
                for (std::size_t j = 0; j < n; ++j) phase_[j] = 0.5 * (phase_[j] + next_phase_[j]);
                half_potential(amp, phase_, g, h, 2.0);
                std::swap(phase_, next_phase_);
            }
            if ((s & 63u) == 63u || s + 1 == steps) check_finite(psi, t_end);
        }
    }

    /// Evolves over [0, duration] and records samples every `stride` ms (stride <= 0: endpoints only).
    Trajectory propagate(const Wavefunction& initial, const ControlWaveform* control, double duration,
                         double stride = 0.05) {
        if (std::abs(initial.norm_squared() - 1.0) > 1e-6)
            throw std::invalid_argument("propagate: initial state is not normalized");
        Trajectory out{{}, initial, 0.0};
        out.samples.push_back({0.0, initial});
        Wavefunction psi = initial;
        const std::size_t segments =
            stride <= 0.0 ? 1 : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / stride - 1e-9)));
        for (std::size_t i = 0; i < segments; ++i) {
            const double t0 = segments == 1 ? 0.0 : static_cast<double>(i) * stride;
            const double t1 = segments == 1 ? duration : std::min(duration, t0 + stride);
            evolve(psi, control, t1 - t0, t0);
            out.samples.push_back({t1, psi});
        }
        out.final_state = psi;
        out.final_time = duration;
        return out;
    }

private:
    // Multiplies by exp(-i pi h m (V + g|psi|^2)); m = 2 for a fused pair of half steps.
    static void half_potential(std::span<Complex> amp, const std::vector<double>& v, double g, double h, double m) {
        const double a = -std::numbers::pi * h * m;
        for (std::size_t j = 0; j < amp.size(); ++j) {
            const double w = a * (v[j] + g * std::norm(amp[j]));
            amp[j] *= Complex(std::cos(w), std::sin(w));
        }
    }

    void set_kinetic_step(double h) {
        if (h == kinetic_step_) return;
        const double inv_n = 1.0 / static_cast<double>(kinetic_phase_.size());
        const auto& kin = op_.kinetic();
        for (std::size_t j = 0; j < kin.size(); ++j)
            kinetic_phase_[j] = std::polar(inv_n, -units::kTwoPi * h * kin[j]);
        kinetic_step_ = h;
    }

    static void check_finite(const Wavefunction& psi, double t) {
        if (!psi.is_finite()) {
            double m = 0.0;
            for (const auto& a : psi.amplitudes())
                if (std::isfinite(std::abs(a))) m = std::max(m, std::abs(a));
            std::ostringstream os;
            os << "propagation produced non-finite amplitudes at t = " << t << " ms (max finite |psi| = " << m << ")";
            throw NumericalError(os.str());
        }
    }

    GpeOperator op_;
    double dt_;
    double kinetic_step_ = -1.0;
    std::vector<double> phase_;
    std::vector<double> next_phase_;
    std::vector<Complex> kinetic_phase_;
};

}  // namespace motional
