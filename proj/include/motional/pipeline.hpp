#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "crab.hpp"
#include "damped_sine.hpp"
#include "estimation.hpp"
#include "io.hpp"
#include "ramsey.hpp"
#include "stationary.hpp"
#include "two_mode.hpp"

// Config-driven building blocks shared by the command-line tool and the acceptance run.

namespace motional::pipeline {

inline PotentialSpec potential_from_config(const RunConfig& c) {
    const auto& p = c.potential;
    if (p.kind == "sextic") return PotentialSpec::sextic_y();
    if (p.kind == "quartic") return PotentialSpec::quartic_z();
    if (p.kind == "harmonic") return PotentialSpec::harmonic(p.frequency, c.gpe.mass);
    return {p.alpha2, p.alpha4, p.alpha6, p.r0};
}

inline SpatialGrid grid_from_config(const RunConfig& c) { return {c.grid.y_min, c.grid.y_max, c.grid.points}; }

/// Same box as the main grid, fewer points; used inside optimization loops.
inline SpatialGrid optimizer_grid(const RunConfig& c) {
    return {c.grid.y_min, c.grid.y_max, c.optimizer.grid_points};
}

/// Parameters with gN = 0.
inline GpeParams base_params(const RunConfig& c) {
    GpeParams p;
    p.mass = c.gpe.mass;
    p.atom_number = c.gpe.atom_number;
    p.potential = potential_from_config(c);
    p.validate();
    return p;
}

struct Interaction {
    double g_n = 0.0;                      ///< kHz um
    std::optional<Calibration> calibration;  ///< set when gN was solved for
};

/// gN from the config, or calibrated on `grid` to the target chemical potential.
inline Interaction resolve_interaction(const RunConfig& c, const SpatialGrid& grid) {
    if (c.gpe.g_n) return {*c.gpe.g_n, std::nullopt};
    const auto ref = c.gpe.mu_reference == "absolute" ? MuReference::Absolute : MuReference::AboveNonInteractingGround;
    auto cal = calibrate_nonlinearity(grid, base_params(c), c.gpe.mu_target, ref);
    return {cal.g_n, cal};
}

/// Lowest three stationary states, symmetrically orthonormalized for projection.
inline std::vector<Wavefunction> projection_basis(const SpatialGrid& grid, const GpeParams& params) {
    const auto set = solve_stationary(grid, params, 3);
    return lowdin_orthonormalize(set.states).states;
}

inline PulseSimulation full_simulation(const RunConfig& c, double g_n) {
    return {grid_from_config(c), base_params(c).with_g_n(g_n), c.gpe.dt};
}

inline PulseSimulation coarse_simulation(const RunConfig& c, double g_n) {
    return {optimizer_grid(c), base_params(c).with_g_n(g_n), c.optimizer.dt};
}

// spectrum

struct Spectrum {
    StationarySet free;         ///< gN = 0
    StationarySet interacting;  ///< at the resolved gN
    Interaction interaction;
};

inline Spectrum compute_spectrum(const RunConfig& c) {
    const auto grid = grid_from_config(c);
    const auto params = base_params(c);
    Spectrum s;
    s.interaction = resolve_interaction(c, grid);
    s.free = solve_stationary(grid, params, 3);
    s.interacting = s.interaction.g_n == 0.0 ? s.free : solve_stationary(grid, params.with_g_n(s.interaction.g_n), 3);
    return s;
}

/// Period of the free relative-phase evolution of the balanced superposition (ms).
inline double balanced_superposition_period(const RunConfig& c, double g_n, double duration = 2.0) {
    const auto sim = full_simulation(c, g_n);
    const auto basis = projection_basis(sim.grid, sim.params);
    Wavefunction psi = basis[0];
    psi.add_scaled(1.0, basis[1]);
    psi.normalize();
    SplitStepPropagator prop(sim.grid, sim.params, sim.dt);
    const auto traj = prop.propagate(psi, nullptr, duration, 0.01);
    return relative_phase_period(traj, basis[0], basis[1]);
}

// pulse optimization

inline OptimizationProblem pulse_problem(const RunConfig& c, CostKind kind, std::uint64_t seed) {
    OptimizationProblem p;
    p.kind = kind;
    p.duration = kind == CostKind::Pulse1 ? c.control.pulse1_duration : c.control.pulse2_duration;
    p.n_components = c.control.components;
    p.lambda_max = c.control.lambda_max;
    p.penalty_weight = c.optimizer.penalty_weight;
    p.budget = c.optimizer.budget;
    p.restarts = c.optimizer.restarts;
    p.seed = seed;
    p.amplitude_step = c.optimizer.amplitude_step;
    p.phase_step = c.optimizer.phase_step;
    p.initial_amplitude = c.optimizer.initial_amplitude;
    p.block_components = c.optimizer.block_components;
    return p;
}

struct PulseRun {
    OptimizationResult result;
    std::uint64_t seed = 0;
    std::vector<double> candidate_costs;  ///< best cost of every candidate seed
};

/// First pulse: ground state to (|0> + |1>)/sqrt 2; the best of `pulse1_candidates` seeds is kept.
inline PulseRun optimize_pulse1(const RunConfig& c, double g_n) {
    const auto sim = coarse_simulation(c, g_n);
    const auto basis = projection_basis(sim.grid, sim.params);
    Wavefunction target = basis[0];
    target.add_scaled(1.0, basis[1]);
    target.normalize();
    const auto cost = make_pulse1_cost(sim, basis[0], target);
    std::optional<PulseRun> best;
    std::vector<double> costs;
    const std::size_t candidates = std::max<std::size_t>(1, c.optimizer.pulse1_candidates);
    for (std::size_t i = 0; i < candidates; ++i) {
        const std::uint64_t seed = c.seed + i;
        auto r = optimize(pulse_problem(c, CostKind::Pulse1, seed), cost);
        costs.push_back(r.trace.best_cost);
        if (!best || r.trace.best_cost < best->result.trace.best_cost) best = PulseRun{std::move(r), seed, {}};
    }
    best->candidate_costs = std::move(costs);
    return std::move(*best);
}

/// Second pulse over equally spaced holds spanning one fringe period.
inline PulseRun optimize_pulse2(const RunConfig& c, double g_n, const std::optional<ControlWaveform>& first_pulse) {
    const auto sim = coarse_simulation(c, g_n);
    const auto inputs =
        c.optimizer.pulse2_inputs == "ideal" ? Pulse2Inputs::IdealEquator : Pulse2Inputs::FirstPulseOutputs;
    if (inputs == Pulse2Inputs::FirstPulseOutputs && !first_pulse)
        throw std::invalid_argument("optimize pulse2: a first-pulse waveform is required");
    const Pulse2Evaluator ev(sim, projection_basis(sim.grid, sim.params),
                             first_pulse.value_or(ControlWaveform::zero(c.control.pulse1_duration)),
                             equally_spaced_holds(c.optimizer.pulse2_holds, c.optimizer.pulse2_hold_period), inputs);
    auto r = optimize(pulse_problem(c, CostKind::Pulse2, c.seed), ev.as_cost());
    const double cost = r.trace.best_cost;
    return {std::move(r), c.seed, {cost}};
}

inline std::string trace_csv(const OptimizationTrace& t) {
    std::string out = "evaluation,cost,best\n";
    for (const auto& r : t.records)
        out += std::to_string(r.index) + "," + io::format_double(r.cost) + "," + io::format_double(r.best) + "\n";
    return out;
}

inline ControlWaveform load_waveform(const std::filesystem::path& path) {
    std::istringstream in(io::read_file(path));
    return ControlWaveform::from_text(in);
}

// Ramsey

inline std::vector<double> hold_times(const RunConfig& c) {
    const auto& r = c.ramsey;
    if (!(r.hold_step > 0.0) || r.hold_end < r.hold_start)
        throw std::invalid_argument("ramsey: need hold_step > 0 and hold_end >= hold_start");
    std::vector<double> t;
    const auto count = static_cast<std::size_t>(std::llround((r.hold_end - r.hold_start) / r.hold_step));
    for (std::size_t i = 0; i <= count; ++i) t.push_back(r.hold_start + r.hold_step * static_cast<double>(i));
    return t;
}

inline RamseyFringe run_ramsey_from_config(const RunConfig& c, double g_n, const ControlWaveform& pulse1,
                                           const ControlWaveform& pulse2) {
    RamseySpec spec;
    spec.pulse1 = pulse1;
    spec.pulse2 = pulse2;
    spec.hold_times = hold_times(c);
    spec.simulation = full_simulation(c, g_n);
    return run_ramsey(spec, projection_basis(spec.simulation.grid, spec.simulation.params));
}

inline std::string fringe_csv(const RamseyFringe& f) {
    std::string out = "hold_time_ms,p0,p1,p2,leakage\n";
    for (const auto& p : f.points) {
        if (p.error) {
            out += io::format_double(p.hold_time) + ",nan,nan,nan,nan\n";
            continue;
        }
        out += io::format_double(p.hold_time) + "," + io::format_double(p.p0) + "," + io::format_double(p.p1) + "," +
               io::format_double(p.p2) + "," + io::format_double(p.leakage) + "\n";
    }
    return out;
}

// two-mode model

struct TwoModeReport {
    TwoModeConstants constants;
    double g1d = 0.0;       ///< Hz um
    double delta_jz = 0.0;
    double rate = 0.0;      ///< mrad/ms
    std::vector<double> times;
    std::vector<double> coherence;  ///< normalized to its initial value
};

/// Overlaps of the non-interacting modes; g1d defaults to gN / N converted to Hz um.
inline TwoModeReport two_mode_from_config(const RunConfig& c, double g_n) {
    const auto grid = grid_from_config(c);
    const auto set = solve_stationary(grid, base_params(c), 2);
    const auto& tm = c.two_mode;
    const double g1d = tm.g1d.value_or(1000.0 * g_n / c.gpe.atom_number);
    TwoModeReport r{TwoModeConstants(set.e01(), overlap_integrals(set.states[0], set.states[1], g1d), tm.atom_number),
                    g1d, tm.delta_jz.value_or(binomial_delta_jz(tm.atom_number)), 0.0, {}, {}};
    r.rate = phase_diffusion_rate(r.constants, r.delta_jz);

    if (!(tm.coherence_step > 0.0) || tm.coherence_duration < 0.0)
        throw std::invalid_argument("two-mode: need coherence_step > 0 and coherence_duration >= 0");
    const auto n = static_cast<std::size_t>(std::llround(tm.coherence_duration / tm.coherence_step));
    for (std::size_t i = 0; i <= n; ++i) r.times.push_back(tm.coherence_step * static_cast<double>(i));
    const TwoModeConstants small(set.e01(), r.constants.overlaps(), tm.coherence_atoms);
    const auto s0 = SpinState::equator(tm.coherence_atoms);
    r.coherence = coherence_series(s0, small, r.times);
    for (double& v : r.coherence) v /= s0.coherence();
    return r;
}

// state estimation

inline TofScaling tof_from_config(const RunConfig& c) { return {c.estimation.t_tof, c.gpe.mass, c.estimation.blur_width}; }

inline SuperpositionParams superposition_from_config(const RunConfig& c) {
    const auto& e = c.estimation;
    SuperpositionParams p;
    p.p = {e.p0, e.p1, e.p2};
    p.theta01 = e.theta01;
    p.theta12 = e.theta12;
    p.validate();
    return p;
}

}  // namespace motional::pipeline
