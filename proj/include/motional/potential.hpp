#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "units.hpp"

namespace motional {

/// Even polynomial trap V(y) = a2 y^2 + a4 y^4 + a6 y^6, energies as E/h in kHz, y in um.
struct PotentialSpec {
    double alpha2 = 0.0;  ///< kHz / um^2
    double alpha4 = 0.0;  ///< kHz / um^4
    double alpha6 = 0.0;  ///< kHz / um^6
    double r0 = 0.0;      ///< reference oscillator length, um (informational)

    PotentialSpec() = default;

    PotentialSpec(double a2, double a4, double a6, double r0_um = 0.0)
        : alpha2(a2), alpha4(a4), alpha6(a6), r0(r0_um) {
        finalize();
    }

    /// Builds the coefficients from frequencies quoted in units of the oscillator length:
    /// V = h f2/2 (y/r0)^2 + h f4 (y/r0)^4 + h f6 (y/r0)^6, f in kHz.
    static PotentialSpec from_oscillator_units(double f2_khz, double f4_khz, double f6_khz, double r0_um) {
        const double r2 = r0_um * r0_um;
        return {f2_khz / (2.0 * r2), f4_khz / (r2 * r2), f6_khz / (r2 * r2 * r2), r0_um};
    }

    /// Sextic RF-dressed trap along y.
    static PotentialSpec sextic_y() { return from_oscillator_units(1.331, 0.0627, -0.00063, 0.252); }

    /// Quartic trap along z.
    static PotentialSpec quartic_z() { return from_oscillator_units(2.516, 0.0171, 0.0, 0.212); }

    static PotentialSpec harmonic(double nu_khz, double mass_kg = units::kRubidium87Mass) {
        return {units::harmonic_alpha2(nu_khz, mass_kg), 0.0, 0.0, units::oscillator_length(nu_khz, mass_kg)};
    }

    /// Pure polynomial V(y - lambda).
    double operator()(double y, double lambda = 0.0) const noexcept {
        const double u = y - lambda;
        const double u2 = u * u;
        return u2 * (alpha2 + u2 * (alpha4 + u2 * alpha6));
    }

    double derivative(double u) const noexcept {
        const double u2 = u * u;
        return u * (2.0 * alpha2 + u2 * (4.0 * alpha4 + u2 * 6.0 * alpha6));
    }

    /// Smallest positive u where V has a local maximum, if the polynomial turns over.
    std::optional<double> barrier_position() const {
        // dV/du = u (2 a2 + 4 a4 s + 6 a6 s^2), s = u^2
        const double a = 6.0 * alpha6, b = 4.0 * alpha4, c = 2.0 * alpha2;
        std::optional<double> best;
        auto consider = [&](double s) {
            if (!(s > 0.0) || !std::isfinite(s)) return;
            const double u = std::sqrt(s);
            // local maximum: derivative changes sign from + to -
            const double h = 1e-6 * u;
            if (derivative(u - h) > 0.0 && derivative(u + h) < 0.0)
                if (!best || u < *best) best = u;
        };
        if (a == 0.0) {
            if (b != 0.0) consider(-c / b);
        } else {
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0) {
                const double r = std::sqrt(disc);
                consider((-b + r) / (2.0 * a));
                consider((-b - r) / (2.0 * a));
            }
        }
        return best;
    }

    /// V(u) with the polynomial held at its barrier height for |u| beyond the barrier.
    /// This is the potential the solvers see; it equals the polynomial inside the barrier.
    double confined(double y, double lambda = 0.0) const noexcept {
        double u = std::abs(y - lambda);
        if (cap_ && u > *cap_) u = *cap_;
        return (*this)(u);
    }

    /// Validates and caches the barrier; rerun after editing coefficients in place.
    PotentialSpec& finalize() {
        if (!std::isfinite(alpha2) || !std::isfinite(alpha4) || !std::isfinite(alpha6))
            throw std::invalid_argument("PotentialSpec: non-finite coefficient");
        cap_ = barrier_position();
        if (!cap_ && (alpha6 < 0.0 || (alpha6 == 0.0 && alpha4 < 0.0)))
            throw std::invalid_argument("PotentialSpec: potential unbounded below without a barrier");
        if (cap_ && (*this)(*cap_) <= 0.0)
            throw std::invalid_argument("PotentialSpec: barrier height is not positive");
        return *this;
    }

    std::optional<double> cap() const noexcept { return cap_; }

    friend bool operator==(const PotentialSpec& a, const PotentialSpec& b) {
        return a.alpha2 == b.alpha2 && a.alpha4 == b.alpha4 && a.alpha6 == b.alpha6 && a.r0 == b.r0;
    }

private:
    std::optional<double> cap_;
};

}  // namespace motional
