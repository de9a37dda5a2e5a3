#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "gpe.hpp"
#include "observables.hpp"

namespace motional {

/// Lowest stationary states of the GPE with their chemical potentials (kHz).
struct StationarySet {
    std::vector<Wavefunction> states;
    std::vector<double> energies;   ///< mu_k = <phi_k|H[phi_k]|phi_k>
    std::vector<double> residuals;  ///< ||P(H - mu) phi_k|| in grid norm, kHz
    std::vector<std::size_t> iterations;

    std::size_t size() const noexcept { return states.size(); }
    double e01() const { return energies.at(1) - energies.at(0); }
    double e12() const { return energies.at(2) - energies.at(1); }
};

enum class SeedKind { Hermite, Random };

struct StationaryOptions {
    double dtau = 2e-3;                  ///< imaginary-time step, ms
    std::size_t max_steps = 400000;      ///< per state
    std::size_t check_every = 25;
    double energy_tolerance = 1e-12;     ///< |d mu| per step, kHz
    double residual_tolerance = 1e-10;   ///< kHz
    double excited_interacting_residual_tolerance = 1e-4;
    SeedKind seed = SeedKind::Hermite;
    unsigned random_seed = 12345;
};

namespace detail {

inline Wavefunction stationary_seed(const SpatialGrid& grid, std::size_t level, const StationaryOptions& opt,
                                    double width) {
    if (opt.seed == SeedKind::Random) {
        std::mt19937_64 rng(opt.random_seed + 7919u * level);
        std::normal_distribution<double> gauss;
        auto psi = Wavefunction::from_function(grid, [&](double y) {
            const double u = y / (3.0 * width);
            return Complex(gauss(rng), gauss(rng)) * std::exp(-0.5 * u * u);
        });
        psi.normalize();
        return psi;
    }
    // Hermite-like seed y^level exp(-y^2 / 2 w^2)
    auto psi = Wavefunction::from_function(grid, [&](double y) {
        const double u = y / width;
        return std::pow(u, static_cast<int>(level)) * std::exp(-0.5 * u * u) + (level == 2 ? -0.5 : 0.0) *
                                                                                  std::exp(-0.5 * u * u);
    });
    psi.normalize();
    return psi;
}

inline void project_out(Wavefunction& psi, std::span<const Wavefunction> lower) {
    for (const auto& phi : lower) psi.add_scaled(-inner_product(phi, psi), phi);
}

}  // namespace detail

/// Imaginary-time relaxation in backward-forward Euler pseudospectral form,
///   psi' = psi - e M^{-1} P (H[psi] - mu) psi,   M = 1 + e (T + s),   e = 2 pi dtau,
/// followed by projection P against lower states and renormalization. The stabilizer s is
/// the midpoint of V + gN|psi|^2 on the grid. Fixed points satisfy P (H - mu) psi = 0 exactly,
/// so the stationarity residual is not limited by the step size.
inline Wavefunction relax_state(const GpeOperator& op, Wavefunction psi, std::span<const Wavefunction> lower,
                                double tolerance, const StationaryOptions& opt, double& mu_out, double& residual_out,
                                std::size_t& steps_out) {
    const std::size_t n = op.grid().size();
    const double eps = units::kTwoPi * opt.dtau;
    const double g = op.params().g_n;
    const auto& v = op.potential();
    const auto& kin = op.kinetic();
    const double inv_n = 1.0 / static_cast<double>(n);

    detail::project_out(psi, lower);
    psi.normalize();
    double mu = op.chemical_potential(psi);
    double mu_prev_check = mu;
    double residual = 0.0;

    for (std::size_t step = 1; step <= opt.max_steps; ++step) {
        // r = P (H - mu) psi
        Wavefunction r = op.apply_hamiltonian(psi);
        mu = std::real(inner_product(psi, r));
        r.add_scaled(-mu, psi);
        detail::project_out(r, lower);
        residual = r.norm();

        if (!std::isfinite(residual)) throw NumericalError("imaginary-time relaxation diverged");
        if (step % opt.check_every == 0) {
            const double drift = std::abs(mu - mu_prev_check) / static_cast<double>(opt.check_every);
            mu_prev_check = mu;
            if (drift < opt.energy_tolerance && residual <= tolerance) {
                mu_out = mu;
                residual_out = residual;
                steps_out = step;
                return psi;
            }
        }

        double wmax = 0.0, wmin = 1e300;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = v[j] + g * std::norm(psi[j]);
            wmax = std::max(wmax, w);
            wmin = std::min(wmin, w);
        }
        const double s = 0.5 * (wmax + wmin);
        auto d = r.amplitudes();
        op.fft().forward(d);
        for (std::size_t j = 0; j < n; ++j) d[j] *= inv_n / (1.0 + eps * (kin[j] + s));
        op.fft().backward(d);
        psi.add_scaled(-eps, r);
        detail::project_out(psi, lower);
        psi.normalize();
    }
    std::ostringstream os;
    os << "imaginary-time relaxation did not converge in " << opt.max_steps << " steps (residual " << residual
       << " kHz, level " << lower.size() << ")";
    throw NumericalError(os.str(), residual);
}

/// Lowest `n_states` stationary states (n_states <= 5). Real-valued up to a global phase;
/// phases are fixed so that each state has a positive real lobe on the y > 0 side.
inline StationarySet solve_stationary(const SpatialGrid& grid, const GpeParams& params, std::size_t n_states,
                                      const StationaryOptions& opt = {},
                                      std::span<const Wavefunction> initial_guess = {}) {
    if (n_states == 0 || n_states > 5) throw std::invalid_argument("solve_stationary: n_states must be in 1..5");
    const GpeOperator op(grid, params);
    const double width = params.potential.r0 > 0.0 ? params.potential.r0 : 0.25;
    StationarySet out;
    for (std::size_t level = 0; level < n_states; ++level) {
        Wavefunction seed = level < initial_guess.size() ? initial_guess[level]
                                                         : detail::stationary_seed(grid, level, opt, width);
        const double tol = (params.g_n > 0.0 && level > 0) ? opt.excited_interacting_residual_tolerance
                                                           : opt.residual_tolerance;
        double mu = 0.0, residual = 0.0;
        std::size_t steps = 0;
        auto phi = relax_state(op, std::move(seed), out.states, tol, opt, mu, residual, steps);

        // Fix the global phase: make the largest-|psi| amplitude on y > 0 real positive.
        std::size_t arg_max = grid.size() / 2;
        double best = -1.0;
        for (std::size_t j = grid.size() / 2 + 1; j < grid.size(); ++j)
            if (std::abs(phi[j]) > best) best = std::abs(phi[j]), arg_max = j;
        phi *= std::polar(1.0, -std::arg(phi[arg_max]));

        out.states.push_back(std::move(phi));
        out.energies.push_back(mu);
        out.residuals.push_back(residual);
        out.iterations.push_back(steps);
    }
    for (std::size_t k = 1; k < out.energies.size(); ++k)
        if (!(out.energies[k] > out.energies[k - 1]))
            throw NumericalError("solve_stationary: energies are not strictly increasing");
    return out;
}

enum class MuReference {
    Absolute,                  ///< target is the chemical potential itself
    AboveNonInteractingGround  ///< target is measured from the gN = 0 ground energy
};

struct Calibration {
    double g_n = 0.0;
    double mu = 0.0;              ///< absolute chemical potential reached, kHz
    double ground_energy_free = 0.0;  ///< gN = 0 ground energy, kHz
    std::size_t solves = 0;
};

/// Bisection on gN so that the interacting ground-state chemical potential hits the target (to 1e-3 kHz).
inline Calibration calibrate_nonlinearity(const SpatialGrid& grid, const GpeParams& params, double target_mu,
                                          MuReference reference = MuReference::Absolute,
                                          const StationaryOptions& opt = {}, double tolerance = 2e-4) {
    Calibration cal;
    const auto free = solve_stationary(grid, params.with_g_n(0.0), 1, opt);
    cal.ground_energy_free = free.energies[0];
    const double target = reference == MuReference::Absolute ? target_mu : free.energies[0] + target_mu;
    if (target < free.energies[0] - tolerance)
        throw std::invalid_argument("calibrate_nonlinearity: target below the non-interacting ground energy");
    cal.solves = 1;
    if (std::abs(target - free.energies[0]) <= tolerance) {
        cal.mu = free.energies[0];
        return cal;
    }

    std::vector<Wavefunction> guess{free.states[0]};
    auto mu_of = [&](double g) {
        auto set = solve_stationary(grid, params.with_g_n(g), 1, opt, guess);
        guess[0] = set.states[0];
        ++cal.solves;
        return set.energies[0];
    };

    // bracket
    double lo = 0.0, hi = 0.1;
    double mu_hi = mu_of(hi);
    while (mu_hi < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NumericalError("calibrate_nonlinearity: could not bracket the target");
        mu_hi = mu_of(hi);
    }
    double mid = hi, mu_mid = mu_hi;
    for (int it = 0; it < 100 && std::abs(mu_mid - target) > tolerance; ++it) {
        mid = 0.5 * (lo + hi);
        mu_mid = mu_of(mid);
        (mu_mid < target ? lo : hi) = mid;
    }
    cal.g_n = mid;
    cal.mu = mu_mid;
    return cal;
}

}  // namespace motional
