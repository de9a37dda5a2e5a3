#pragma once

// Unit conventions used across the library:
//   length  -> micrometre (um)
//   time    -> millisecond (ms)
//   energy  -> frequency E/h in kilohertz (kHz)
// A Hamiltonian expressed in kHz generates the phase exp(-i 2 pi H t) for t in ms.

#include <cmath>
#include <numbers>

namespace motional::units {

inline constexpr double kPlanck = 6.62607015e-34;                       // J s
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);    // J s
inline constexpr double kRubidium87Mass = 1.44316e-25;                  // kg

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// hbar^2 / (2 m h), the kinetic prefactor of H/h = c k^2, in kHz um^2.
inline constexpr double kinetic_coefficient(double mass_kg) {
    // hbar / (4 pi m) in m^2/s; 1 m^2/s = 1e12 um^2 * 1e-3 kHz
    return kHbar / (4.0 * std::numbers::pi * mass_kg) * 1e9;
}

/// Quadratic coefficient (kHz/um^2) of a harmonic trap with level spacing nu (kHz).
inline constexpr double harmonic_alpha2(double nu_khz, double mass_kg) {
    return nu_khz * nu_khz / (4.0 * kinetic_coefficient(mass_kg));
}

/// Oscillator length sqrt(hbar / (m omega)) in um for a level spacing nu (kHz).
inline double oscillator_length(double nu_khz, double mass_kg) {
    return std::sqrt(2.0 * kinetic_coefficient(mass_kg) / nu_khz);
}

/// SI <-> public unit conversions; used for the unit round-trip checks.
inline constexpr double joule_to_khz(double e) { return e / kPlanck * 1e-3; }
inline constexpr double khz_to_joule(double f) { return f * 1e3 * kPlanck; }
inline constexpr double metre_to_um(double x) { return x * 1e6; }
inline constexpr double um_to_metre(double x) { return x * 1e-6; }
inline constexpr double second_to_ms(double t) { return t * 1e3; }
inline constexpr double ms_to_second(double t) { return t * 1e-3; }

}  // namespace motional::units
