#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "motional/pipeline.hpp"

using namespace motional;
namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kNumerical = 2, kBudgetExhausted = 3 };

/// Key-value text document, echoed to stdout when written.
class Report {
public:
    void add(const std::string& key, double v) { add(key, io::format_double(v)); }
    void add(const std::string& key, const std::string& v) { text_ += key + " = " + v + "\n"; }
    void comment(const std::string& c) { text_ += "# " + c + "\n"; }

    void write(const fs::path& path) const {
        io::atomic_write(path, text_);
        std::cout << text_;
    }

private:
    std::string text_;
};

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> budget;
};

RunConfig load_config(const Options& o) {
    RunConfig c;
    if (!o.config_path.empty()) {
        const auto text = io::read_file(o.config_path);
        try {
            c = parse_config(text);
        } catch (const ParseError& e) {
            throw ParseError(o.config_path + ": " + e.what());
        }
    }
    if (o.seed) c.seed = *o.seed;
    if (o.out_dir) c.out_dir = *o.out_dir;
    return c;
}

fs::path out(const RunConfig& c, const std::string& name) { return fs::path(c.out_dir) / name; }

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

// spectrum

void add_spectrum(Report& r, const std::string& prefix, const StationarySet& s) {
    for (std::size_t k = 0; k < s.size(); ++k) r.add(prefix + "mu" + std::to_string(k) + "_khz", s.energies[k]);
    r.add(prefix + "e01_khz", s.e01());
    r.add(prefix + "e12_khz", s.e12());
}

int cmd_spectrum(const RunConfig& c) {
    const auto s = pipeline::compute_spectrum(c);
    Report r;
    r.add("potential", c.potential.kind);
    r.add("g_n_khz_um", s.interaction.g_n);
    if (s.interaction.calibration) {
        const auto& cal = *s.interaction.calibration;
        r.add("mu_reference", c.gpe.mu_reference);
        r.add("mu_target_khz", c.gpe.mu_target);
        r.add("mu_reached_khz", c.gpe.mu_reference == "absolute" ? cal.mu : cal.mu - cal.ground_energy_free);
    }
    add_spectrum(r, "free_", s.free);
    add_spectrum(r, "interacting_", s.interacting);
    r.write(out(c, "spectrum.txt"));
    return kSuccess;
}

// optimize

int write_pulse(const RunConfig& c, const std::string& name, const pipeline::PulseRun& run) {
    const auto& res = run.result;
    io::atomic_write(out(c, name + ".txt"), res.waveform.to_text());
    io::atomic_write(out(c, name + "_trace.csv"), pipeline::trace_csv(res.trace));
    Report r;
    r.add("seed", std::to_string(run.seed));
    r.add("evaluations", std::to_string(res.trace.records.size()));
    r.add("best_cost", res.trace.best_cost);
    r.add("physics_cost", res.physics_cost);
    r.add("peak_excursion_um", res.waveform.peak_excursion());
    r.add("converged", res.trace.converged ? "true" : "false");
    if (run.candidate_costs.size() > 1)
        for (std::size_t i = 0; i < run.candidate_costs.size(); ++i)
            r.add("candidate" + std::to_string(i) + "_cost", run.candidate_costs[i]);
    r.write(out(c, name + "_report.txt"));
    return res.trace.converged ? kSuccess : kBudgetExhausted;
}

int cmd_optimize(RunConfig c, const std::string& which, const std::string& pulse1_flag, const Options& o) {
    if (o.budget) c.optimizer.budget = *o.budget;
    const auto g_n = pipeline::resolve_interaction(c, pipeline::grid_from_config(c)).g_n;
    if (which == "pulse1") return write_pulse(c, "pulse1", pipeline::optimize_pulse1(c, g_n));

    const std::string path = pulse1_flag.empty() ? c.control.pulse1_file : pulse1_flag;
    std::optional<ControlWaveform> first;
    if (!path.empty()) first = pipeline::load_waveform(path);
    else if (c.optimizer.pulse2_inputs == "first_pulse")
        throw CLI::ValidationError("optimize pulse2 needs a first-pulse waveform (--pulse1 or control.pulse1_file)");
    return write_pulse(c, "pulse2", pipeline::optimize_pulse2(c, g_n, first));
}

// ramsey

struct RamseySummary {
    double contrast_p0 = 0.0, contrast_p1 = 0.0, max_higher = 0.0, max_leakage = 0.0;
    std::optional<DampedSineFit> fit;
    std::string fit_status;
    std::size_t failed_points = 0;
};

RamseySummary summarize(const RamseyFringe& f, bool fit) {
    RamseySummary s{f.contrast_p0(), f.contrast_p1(), f.max_higher_states(), 0.0, std::nullopt, "skipped", 0};
    for (const auto& p : f.points) {
        if (p.error) ++s.failed_points;
        else s.max_leakage = std::max(s.max_leakage, p.leakage);
    }
    if (!fit) return s;
    if (s.contrast_p0 < 1e-6) {
        s.fit_status = "no fringe";
        return s;
    }
    try {
        s.fit = fit_damped_sine(f.times(), f.series(&RamseyPoint::p0));
        s.fit_status = "ok";
    } catch (const std::exception& e) {
        s.fit_status = std::string("failed: ") + e.what();
    }
    return s;
}

void add_fit(Report& r, const DampedSineFit& f) {
    r.add("fit_period_ms", f.period);
    r.add("fit_period_ci95_ms", DampedSineFit::ci95(f.period_sigma));
    r.add("fit_amplitude", f.amplitude);
    r.add("fit_amplitude_ci95", DampedSineFit::ci95(f.amplitude_sigma));
    r.add("fit_tau_ms", f.tau);
    r.add("fit_tau_ci95_ms", DampedSineFit::ci95(f.tau_sigma));
    r.add("fit_phase_rad", f.phase);
    r.add("fit_phase_ci95_rad", DampedSineFit::ci95(f.phase_sigma));
    r.add("fit_offset", f.offset);
    r.add("fit_offset_ci95", DampedSineFit::ci95(f.offset_sigma));
    r.add("fit_residual_norm", f.residual_norm);
    r.add("fit_no_measurable_damping", f.no_measurable_damping ? "true" : "false");
}

RamseySummary write_ramsey(const RunConfig& c, const RamseyFringe& f, double g_n) {
    io::atomic_write(out(c, "fringe.csv"), pipeline::fringe_csv(f));
    const auto s = summarize(f, c.ramsey.fit);
    Report r;
    r.add("g_n_khz_um", g_n);
    r.add("hold_points", std::to_string(f.points.size()));
    r.add("failed_points", std::to_string(s.failed_points));
    r.add("contrast_p0", s.contrast_p0);
    r.add("contrast_p1", s.contrast_p1);
    r.add("max_higher_states", s.max_higher);
    r.add("max_leakage", s.max_leakage);
    r.add("fit_status", s.fit_status);
    if (s.fit) add_fit(r, *s.fit);
    r.write(out(c, "ramsey_report.txt"));
    return s;
}

int cmd_ramsey(const RunConfig& c, const std::string& p1_flag, const std::string& p2_flag) {
    const std::string p1 = p1_flag.empty() ? c.control.pulse1_file : p1_flag;
    const std::string p2 = p2_flag.empty() ? c.control.pulse2_file : p2_flag;
    if (p1.empty() || p2.empty())
        throw CLI::ValidationError("ramsey needs both waveforms (--pulse1/--pulse2 or control.pulse*_file)");
    const auto w1 = pipeline::load_waveform(p1);
    const auto w2 = pipeline::load_waveform(p2);
    const auto g_n = pipeline::resolve_interaction(c, pipeline::grid_from_config(c)).g_n;
    const auto s = write_ramsey(c, pipeline::run_ramsey_from_config(c, g_n, w1, w2), g_n);
    return s.failed_points == 0 ? kSuccess : kNumerical;
}

// state estimation

std::vector<Wavefunction> estimation_modes(const RunConfig& c, double g_n) {
    return pipeline::projection_basis(pipeline::grid_from_config(c), pipeline::base_params(c).with_g_n(g_n));
}

int cmd_simulate_observation(const RunConfig& c) {
    const auto init = pipeline::superposition_from_config(c);
    const auto g_n = pipeline::resolve_interaction(c, pipeline::grid_from_config(c)).g_n;
    const auto series = simulate_observation(init, estimation_modes(c, g_n), pipeline::base_params(c).with_g_n(g_n),
                                             c.estimation.duration, pipeline::tof_from_config(c), c.gpe.dt);
    io::atomic_write(out(c, "observation.csv"), series_to_csv(series));
    std::cout << "wrote " << out(c, "observation.csv").string() << " (" << series.n_times() << " x " << series.n_k()
              << ")\n";
    return kSuccess;
}

int cmd_fit(RunConfig c, const std::string& observed_path, const Options& o) {
    if (o.budget) c.estimation.budget = *o.budget;
    const auto observed = series_from_csv(io::read_file(observed_path));
    const auto g_n = pipeline::resolve_interaction(c, pipeline::grid_from_config(c)).g_n;
    PopulationFitOptions opt;
    opt.budget = c.estimation.budget;
    opt.restarts = c.estimation.restarts;
    opt.fit_time_offset = c.estimation.fit_time_offset;
    opt.seed = static_cast<unsigned>(c.seed);
    opt.dt = c.gpe.dt;
    const auto fit = fit_populations(observed, estimation_modes(c, g_n), pipeline::base_params(c).with_g_n(g_n),
                                     pipeline::tof_from_config(c), opt);
    Report r;
    r.add("observed_file", observed_path);
    const char* names[] = {"p0", "p1", "p2", "theta01_rad", "theta12_rad"};
    const double values[] = {fit.params.p[0], fit.params.p[1], fit.params.p[2], fit.params.theta01,
                             fit.params.theta12};
    for (int i = 0; i < 5; ++i) {
        r.add(names[i], values[i]);
        r.add(std::string(names[i]) + "_ci95", 1.959963984540054 * fit.sigma[static_cast<std::size_t>(i)]);
    }
    r.add("time_offset_ms", fit.time_offset);
    r.add("unexplained_fraction", fit.unexplained_fraction());
    r.add("misfit", fit.misfit);
    r.add("relative_residual", fit.relative_residual);
    r.add("evaluations", std::to_string(fit.trace.records.size()));
    r.write(out(c, "fit_report.txt"));
    return kSuccess;
}

// two-mode model

void write_two_mode(const RunConfig& c, const pipeline::TwoModeReport& t) {
    const auto& k = t.constants;
    Report r;
    r.add("atom_number", k.atom_number());
    r.add("g1d_hz_um", t.g1d);
    r.add("e01_khz", k.e01());
    r.add("u00_hz", k.overlaps().u00);
    r.add("u11_hz", k.overlaps().u11);
    r.add("u01_hz", k.overlaps().u01);
    r.add("delta_e_khz", k.delta_e());
    r.add("u_hz", k.u());
    r.add("delta_jz", t.delta_jz);
    r.add("rate_mrad_per_ms", t.rate);
    r.add("coherence_atoms", std::to_string(c.two_mode.coherence_atoms));
    r.write(out(c, "twomode.txt"));
    std::string csv = "time_ms,coherence\n";
    for (std::size_t i = 0; i < t.times.size(); ++i)
        csv += io::format_double(t.times[i]) + "," + io::format_double(t.coherence[i]) + "\n";
    io::atomic_write(out(c, "coherence.csv"), csv);
}

int cmd_twomode(const RunConfig& c) {
    const double g_n = c.two_mode.g1d ? 0.0 : pipeline::resolve_interaction(c, pipeline::grid_from_config(c)).g_n;
    write_two_mode(c, pipeline::two_mode_from_config(c, g_n));
    return kSuccess;
}

// reproduce-paper

class Summary {
public:
    void row(const std::string& name, double value, double target, double tol, bool relative = true) {
        const double allowed = relative ? tol * std::abs(target) : tol;
        add(name, value, "= " + io::format_double(target) + " +- " + io::format_double(allowed),
            std::abs(value - target) <= allowed);
    }
    void at_most(const std::string& name, double value, double limit) {
        add(name, value, "<= " + io::format_double(limit), value <= limit);
    }
    void at_least(const std::string& name, double value, double limit) {
        add(name, value, ">= " + io::format_double(limit), value >= limit);
    }
    const std::string& text() const { return text_; }

private:
    void add(const std::string& name, double value, const std::string& target, bool ok) {
        char line[256];
        std::snprintf(line, sizeof line, "%-28s %14.6g   %-24s %s\n", name.c_str(), value, target.c_str(),
                      pass_fail(ok).c_str());
        text_ += line;
    }
    std::string text_ = "# quantity                          value   target                   status\n";
};

int cmd_reproduce(RunConfig c, const Options& o) {
    if (o.budget) c.optimizer.budget = *o.budget;
    Summary sum;

    std::cout << "[1/6] spectrum\n";
    const auto spec = pipeline::compute_spectrum(c);
    sum.row("E01 (kHz, gN = 0)", spec.free.e01(), 1.83, 0.01);
    sum.row("E12 (kHz, gN = 0)", spec.free.e12(), 1.98, 0.01);
    RunConfig cz = c;
    cz.potential.kind = "quartic";
    const auto z = solve_stationary(pipeline::grid_from_config(cz), pipeline::base_params(cz), 2);
    sum.row("E01 z-trap (kHz)", z.e01(), 2.58, 0.01);

    std::cout << "[2/6] calibration\n";
    const double g_n = spec.interaction.g_n;
    if (spec.interaction.calibration) {
        const auto& cal = *spec.interaction.calibration;
        const double mu = c.gpe.mu_reference == "absolute" ? cal.mu : cal.mu - cal.ground_energy_free;
        sum.row("mu (kHz)", mu, 0.600, 0.001, false);
    }
    sum.row("free period (ms)", pipeline::balanced_superposition_period(c, g_n), 0.58, 0.02);

    std::cout << "[3/6] optimize pulse 1\n";
    const auto p1 = pipeline::optimize_pulse1(c, g_n);
    io::atomic_write(out(c, "pulse1.txt"), p1.result.waveform.to_text());
    io::atomic_write(out(c, "pulse1_trace.csv"), pipeline::trace_csv(p1.result.trace));
    sum.at_most("J1", p1.result.trace.best_cost, 0.03);

    std::cout << "[4/6] optimize pulse 2\n";
    const auto p2 = pipeline::optimize_pulse2(c, g_n, p1.result.waveform);
    io::atomic_write(out(c, "pulse2.txt"), p2.result.waveform.to_text());
    io::atomic_write(out(c, "pulse2_trace.csv"), pipeline::trace_csv(p2.result.trace));
    sum.at_most("J2", p2.result.trace.best_cost, 3.0);

    std::cout << "[5/6] ramsey\n";
    const auto rs = write_ramsey(c, pipeline::run_ramsey_from_config(c, g_n, p1.result.waveform, p2.result.waveform), g_n);
    sum.at_least("C(p0)", rs.contrast_p0, 0.95);
    sum.at_least("C(p1)", rs.contrast_p1, 0.95);
    sum.at_most("max higher-state population", rs.max_higher, 0.15);
    sum.row("fringe period (ms)", rs.fit ? rs.fit->period : std::nan(""), 0.58, 0.01, false);

    std::cout << "[6/6] two-mode model\n";
    const auto tm = pipeline::two_mode_from_config(c, g_n);
    write_two_mode(c, tm);
    sum.row("U00 (Hz)", tm.constants.overlaps().u00, 0.34, 0.10);
    sum.row("U11 (Hz)", tm.constants.overlaps().u11, 0.26, 0.10);
    sum.row("U01 (Hz)", tm.constants.overlaps().u01, 0.15, 0.10);
    sum.row("U (Hz)", tm.constants.u(), 0.31, 0.10);
    sum.row("R (mrad/ms)", tm.rate, 52.0, 0.10);

    io::atomic_write(out(c, "summary.txt"), sum.text());
    std::cout << sum.text();
    return kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motional-state BEC simulation, pulse optimization and analysis"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("-c,--config", o.config_path, "Run configuration file");
    app.add_option("--seed", o.seed, "Random seed (overrides the config)");
    app.add_option("--out-dir", o.out_dir, "Output directory (overrides the config)");
    app.add_option("--budget", o.budget, "Evaluation budget for optimize, fit and reproduce-paper");

    auto* spectrum = app.add_subcommand("spectrum", "Stationary states at gN = 0 and at the calibrated gN");

    auto* optimize = app.add_subcommand("optimize", "CRAB optimization of a trap-displacement pulse");
    std::string which, pulse1_in;
    optimize->add_option("pulse", which, "pulse1 or pulse2")->required()->check(CLI::IsMember({"pulse1", "pulse2"}));
    optimize->add_option("--pulse1", pulse1_in, "First-pulse waveform (pulse2 only)");

    auto* ramsey = app.add_subcommand("ramsey", "Full pulse-hold-pulse interferometer");
    std::string r1, r2;
    ramsey->add_option("--pulse1", r1, "First-pulse waveform file");
    ramsey->add_option("--pulse2", r2, "Second-pulse waveform file");

    auto* fit = app.add_subcommand("fit", "Fit mode populations to a momentum time series");
    std::string observed;
    fit->add_option("observed", observed, "Observed series CSV (time_ms, then one column per momentum)")->required();

    auto* simulate = app.add_subcommand("simulate-observation", "Simulated momentum time series from [estimation]");
    auto* twomode = app.add_subcommand("twomode", "Two-mode constants and phase-diffusion rate");
    auto* reproduce = app.add_subcommand("reproduce-paper", "Run the whole chain and compare against reference values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kSuccess : kUsage;
    }

    try {
        const RunConfig c = load_config(o);
        if (*spectrum) return cmd_spectrum(c);
        if (*optimize) return cmd_optimize(c, which, pulse1_in, o);
        if (*ramsey) return cmd_ramsey(c, r1, r2);
        if (*fit) return cmd_fit(c, observed, o);
        if (*simulate) return cmd_simulate_observation(c);
        if (*twomode) return cmd_twomode(c);
        if (*reproduce) return cmd_reproduce(c, o);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
