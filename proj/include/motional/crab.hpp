#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "control.hpp"
#include "gpe.hpp"
#include "nelder_mead.hpp"
#include "observables.hpp"

namespace motional {

/// Target-state cost 1 - (Re <target|psi(T)>)^2. With `modulus` the phase-insensitive
/// 1 - |<target|psi(T)>|^2 is returned instead.
inline double cost_pulse1(const Wavefunction& final_state, const Wavefunction& target, bool modulus = false) {
    if (!(final_state.grid() == target.grid())) throw std::invalid_argument("cost_pulse1: grid mismatch");
    const Complex overlap = inner_product(target, final_state);
    if (modulus) return 1.0 - std::norm(overlap);
    return 1.0 - overlap.real() * overlap.real();
}

struct FringePoint {
    double p0 = 0.0;
    double p1 = 0.0;
};

/// Interferometric cost over hold times:
///   max(1 - p0 - p1) + |1 - max p0 + min p0| + |1 - max p1 + min p1|.
inline double cost_pulse2(std::span<const FringePoint> points) {
    if (points.empty()) throw std::invalid_argument("cost_pulse2: empty population list");
    double leak = -std::numeric_limits<double>::infinity();
    double max0 = -1e300, min0 = 1e300, max1 = -1e300, min1 = 1e300;
    for (const auto& p : points) {
        leak = std::max(leak, 1.0 - p.p0 - p.p1);
        max0 = std::max(max0, p.p0), min0 = std::min(min0, p.p0);
        max1 = std::max(max1, p.p1), min1 = std::min(min1, p.p1);
    }
    return leak + std::abs(1.0 - max0 + min0) + std::abs(1.0 - max1 + min1);
}

enum class CostKind { Pulse1, Pulse2, Custom };

struct OptimizationProblem {
    CostKind kind = CostKind::Pulse1;
    double duration = 1.19;             ///< ms
    std::size_t n_components = 20;
    double lambda_max = ControlWaveform::kDefaultLambdaMax;
    double penalty_weight = 10.0;       ///< per um^2 of bound excess
    std::size_t budget = 2000;          ///< cost evaluations
    std::size_t restarts = 4;
    std::uint64_t seed = 1;
    double amplitude_step = 0.02;       ///< um
    double phase_step = 0.3;            ///< rad
    double initial_amplitude = 0.05;    ///< rms of the seeded random start, um
    std::size_t block_components = 0;   ///< 0 = full simplex; otherwise cycle blocks of this many components
    std::vector<double> frequency_scales;  ///< optional randomized-basis multipliers
    std::vector<double> initial_parameters;  ///< optional warm start (amplitudes || phases)

    std::size_t parameter_count() const noexcept { return 2 * n_components; }

    void validate() const {
        if (!(duration > 0.0)) throw std::invalid_argument("OptimizationProblem: duration must be positive");
        if (n_components == 0) throw std::invalid_argument("OptimizationProblem: need at least one component");
        if (!frequency_scales.empty() && frequency_scales.size() != n_components)
            throw std::invalid_argument("OptimizationProblem: frequency_scales size mismatch");
        if (!initial_parameters.empty() && initial_parameters.size() != parameter_count())
            throw std::invalid_argument("OptimizationProblem: initial parameter vector must have 2n entries");
    }

    /// Template waveform carrying duration, bound and frequency scales.
    ControlWaveform template_waveform() const {
        std::vector<FourierComponent> comps(n_components);
        for (std::size_t i = 0; i < frequency_scales.size(); ++i) comps[i].frequency_scale = frequency_scales[i];
        return {duration, std::move(comps), lambda_max};
    }

    /// Seeded starting point, or the warm start when given.
    std::vector<double> starting_point() const {
        if (!initial_parameters.empty()) return initial_parameters;
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        std::normal_distribution<double> gauss(0.0, initial_amplitude);
        std::uniform_real_distribution<double> uniform(-std::numbers::pi, std::numbers::pi);
        std::vector<double> x(parameter_count());
        for (std::size_t i = 0; i < n_components; ++i) x[i] = gauss(rng);
        for (std::size_t i = 0; i < n_components; ++i) x[n_components + i] = uniform(rng);
        return x;
    }
};

using WaveformCost = std::function<double(const ControlWaveform&)>;

struct OptimizationResult {
    ControlWaveform waveform;
    OptimizationTrace trace;
    double physics_cost = 0.0;  ///< final cost without the bound penalty
};

/// CRAB search: Nelder-Mead over (amplitudes || phases) of a ControlWaveform, with the
/// quadratic bound penalty added to the simulator's cost.
inline OptimizationResult optimize(const OptimizationProblem& problem, const WaveformCost& simulator) {
    problem.validate();
    const ControlWaveform like = problem.template_waveform();
    const std::size_t n = problem.n_components;
    auto penalized = [&](std::span<const double> x) {
        const auto w = ControlWaveform::from_parameters(like, x);
        return simulator(w) + w.bound_penalty(problem.penalty_weight);
    };

    std::vector<double> step(2 * n);
    std::fill(step.begin(), step.begin() + static_cast<std::ptrdiff_t>(n), problem.amplitude_step);
    std::fill(step.begin() + static_cast<std::ptrdiff_t>(n), step.end(), problem.phase_step);

    NelderMeadOptions nm;
    nm.restarts = problem.restarts;
    nm.seed = problem.seed;
    nm.f_tolerance = 1e-10;
    nm.x_tolerance = 1e-4;
    const std::vector<double> x0 = problem.starting_point();

    OptimizationTrace trace;
    if (problem.block_components == 0 || problem.block_components >= n) {
        nm.max_evaluations = problem.budget;
        nm.initial_step = step;
        trace = nelder_mead(penalized, x0, nm);
    } else {
        // Block-coordinate mode: optimize groups of components in turn, cycling until the budget is spent.
        const auto t_start = std::chrono::steady_clock::now();
        trace.best_parameters = x0;
        std::vector<double> current = x0;
        const std::size_t block = problem.block_components;
        const std::size_t blocks = (n + block - 1) / block;
        const std::size_t per_block = std::max<std::size_t>(4 * block + 2, problem.budget / (blocks * 3));
        std::size_t cycle = 0;
        bool all_converged = true;
        while (trace.records.size() < problem.budget) {
            const std::size_t b = cycle % blocks;
            const std::size_t lo = b * block, hi = std::min(n, lo + block);
            std::vector<std::size_t> idx;
            for (std::size_t i = lo; i < hi; ++i) idx.push_back(i);
            for (std::size_t i = lo; i < hi; ++i) idx.push_back(n + i);
            std::vector<double> sub(idx.size()), sub_step(idx.size());
            for (std::size_t k = 0; k < idx.size(); ++k) sub[k] = current[idx[k]], sub_step[k] = step[idx[k]];
            auto sub_cost = [&](std::span<const double> y) {
                std::vector<double> full = current;
                for (std::size_t k = 0; k < idx.size(); ++k) full[idx[k]] = y[k];
                return penalized(full);
            };
            NelderMeadOptions sub_opt = nm;
            sub_opt.initial_step = sub_step;
            sub_opt.max_evaluations = std::min(per_block, problem.budget - trace.records.size());
            sub_opt.seed = problem.seed + 1000003ull * cycle;
            sub_opt.restarts = 0;
            const auto part = nelder_mead(sub_cost, sub, sub_opt);
            all_converged = all_converged && part.converged;
            for (const auto& r : part.records) {
                const double best = std::min(trace.best_cost, r.cost);
                if (r.cost < trace.best_cost) {
                    trace.best_cost = r.cost;
                }
                trace.records.push_back({trace.records.size(), r.cost, best});
            }
            if (part.best_cost <= trace.best_cost) {
                for (std::size_t k = 0; k < idx.size(); ++k) current[idx[k]] = part.best_parameters[k];
                trace.best_parameters = current;
            }
            ++cycle;
        }
        trace.converged = false;
        trace.restarts_used = cycle;
        trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    }

    OptimizationResult result{ControlWaveform::from_parameters(like, trace.best_parameters), std::move(trace), 0.0};
    result.physics_cost = result.trace.records.empty() ? std::numeric_limits<double>::infinity()
                                                       : simulator(result.waveform);
    return result;
}

/// Simulation settings shared by the pulse costs.
struct PulseSimulation {
    SpatialGrid grid = SpatialGrid::standard();
    GpeParams params;
    double dt = SplitStepPropagator::kDefaultStep;
};

/// Builds the first-pulse cost: evolve `initial` under the waveform and compare to `target`.
inline WaveformCost make_pulse1_cost(const PulseSimulation& sim, Wavefunction initial, Wavefunction target,
                                     bool modulus = false) {
    auto prop = std::make_shared<SplitStepPropagator>(sim.grid, sim.params, sim.dt);
    return [prop, initial = std::move(initial), target = std::move(target), modulus](const ControlWaveform& w) {
        Wavefunction psi = initial;
        prop->evolve(psi, &w, w.duration());
        return cost_pulse1(psi, target, modulus);
    };
}

enum class Pulse2Inputs {
    FirstPulseOutputs,  ///< ground state -> pulse 1 -> hold
    IdealEquator        ///< (|0> + e^{i theta}|1>)/sqrt 2, theta evenly spread
};

/// Equally spaced hold times over [0, period).
inline std::vector<double> equally_spaced_holds(std::size_t count, double period) {
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i) t[i] = period * static_cast<double>(i) / static_cast<double>(count);
    return t;
}

/// Context for the second-pulse cost: inputs for every hold time are prepared once.
class Pulse2Evaluator {
public:
    /// `basis` must be the orthonormalized projection modes (at least |0>, |1>).
    Pulse2Evaluator(const PulseSimulation& sim, std::vector<Wavefunction> basis, const ControlWaveform& first_pulse,
                    std::vector<double> hold_times, Pulse2Inputs inputs = Pulse2Inputs::FirstPulseOutputs)
        : prop_(std::make_shared<SplitStepPropagator>(sim.grid, sim.params, sim.dt)), basis_(std::move(basis)),
          hold_times_(std::move(hold_times)) {
        if (hold_times_.empty()) throw std::invalid_argument("Pulse2Evaluator: empty hold-time list");
        if (basis_.size() < 2) throw std::invalid_argument("Pulse2Evaluator: need at least two basis modes");
        if (inputs == Pulse2Inputs::FirstPulseOutputs) {
            Wavefunction psi = basis_[0];
            prop_->evolve(psi, &first_pulse, first_pulse.duration());
            // hold times are visited in increasing order and the state is advanced incrementally
            std::vector<std::size_t> order(hold_times_.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return hold_times_[a] < hold_times_[b]; });
            inputs_.assign(hold_times_.size(), psi);
            double t = 0.0;
            for (std::size_t i : order) {
                if (hold_times_[i] < 0.0) throw std::invalid_argument("Pulse2Evaluator: negative hold time");
                prop_->evolve(psi, nullptr, hold_times_[i] - t);
                t = hold_times_[i];
                inputs_[i] = psi;
            }
        } else {
            for (std::size_t i = 0; i < hold_times_.size(); ++i) {
                const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(hold_times_.size());
                Wavefunction psi = basis_[0];
                psi.add_scaled(std::polar(1.0, theta), basis_[1]);
                psi.normalize();
                inputs_.push_back(std::move(psi));
            }
        }
    }

    const std::vector<Wavefunction>& inputs() const noexcept { return inputs_; }
    const std::vector<double>& hold_times() const noexcept { return hold_times_; }

    /// Populations after applying `w` to every prepared input.
    std::vector<FringePoint> fringe(const ControlWaveform& w) const {
        std::vector<FringePoint> out;
        out.reserve(inputs_.size());
        for (const auto& input : inputs_) {
            Wavefunction psi = input;
            prop_->evolve(psi, &w, w.duration());
            out.push_back({std::norm(inner_product(basis_[0], psi)), std::norm(inner_product(basis_[1], psi))});
        }
        return out;
    }

    double operator()(const ControlWaveform& w) const {
        const auto f = fringe(w);
        return cost_pulse2(f);
    }

    WaveformCost as_cost() const {
        return [self = *this](const ControlWaveform& w) { return self(w); };
    }

private:
    std::shared_ptr<SplitStepPropagator> prop_;
    std::vector<Wavefunction> basis_;
    std::vector<double> hold_times_;
    std::vector<Wavefunction> inputs_;
};

}  // namespace motional
