#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "format.hpp"
#include "units.hpp"

namespace motional {

/// Every tunable of a CLI run. Units follow the library: um, ms, kHz.
struct RunConfig {
    struct Grid {
        double y_min = -4.0;
        double y_max = 4.0;
        std::size_t points = 1024;
    } grid;

    struct Potential {
        std::string kind = "sextic";  ///< sextic | quartic | harmonic | custom
        double frequency = 1.83;      ///< kHz, harmonic only
        double alpha2 = 0.0, alpha4 = 0.0, alpha6 = 0.0;  ///< kHz/um^n, custom only
        double r0 = 0.0;                                  ///< um, custom only
    } potential;

    struct Gpe {
        double mass = units::kRubidium87Mass;  ///< kg
        double atom_number = 700.0;
        std::optional<double> g_n;        ///< kHz um; empty means calibrate to mu_target
        double mu_target = 0.6;           ///< kHz
        std::string mu_reference = "above_ground";  ///< above_ground | absolute
        double dt = 0.5e-3;               ///< ms
    } gpe;

    struct Control {
        double pulse1_duration = 1.19;    ///< ms
        double pulse2_duration = 1.6;     ///< ms
        std::size_t components = 20;
        double lambda_max = 1.0;          ///< um
        double ramp_fraction = 0.05;
        std::string pulse1_file;          ///< waveform text file; empty means optimize or zero
        std::string pulse2_file;
    } control;

    struct Optimizer {
        std::size_t budget = 1500;
        std::size_t restarts = 0;
        double penalty_weight = 10.0;
        double amplitude_step = 0.02;     ///< um
        double phase_step = 0.3;          ///< rad
        double initial_amplitude = 0.05;  ///< um
        std::size_t block_components = 0;
        std::size_t grid_points = 128;    ///< coarse grid used during optimization
        double dt = 1e-3;                 ///< ms, coarse step used during optimization
        std::size_t pulse2_holds = 15;
        double pulse2_hold_period = 0.5875;  ///< ms
        std::string pulse2_inputs = "first_pulse";  ///< first_pulse | ideal
        std::size_t pulse1_candidates = 1;           ///< independent seeds, best kept
    } optimizer;

    struct Ramsey {
        double hold_start = 0.0;
        double hold_end = 2.0;
        double hold_step = 0.05;
        bool fit = true;
    } ramsey;

    struct Estimation {
        double t_tof = 46.0;              ///< ms
        std::optional<double> blur_width; ///< um in the image plane; empty means one pixel
        double duration = 1.0;            ///< ms of simulated observation
        std::size_t budget = 3000;
        std::size_t restarts = 1;
        bool fit_time_offset = false;
        double p0 = 1.0, p1 = 0.0, p2 = 0.0;  ///< superposition for simulated observations
        double theta01 = 0.0, theta12 = 0.0;
    } estimation;

    struct TwoMode {
        double atom_number = 700.0;
        std::optional<double> delta_jz;   ///< empty means binomial sqrt(N)/2
        std::optional<double> g1d;        ///< Hz um; empty means 1000 gN / N
        int coherence_atoms = 100;
        double coherence_duration = 20.0; ///< ms
        double coherence_step = 0.1;      ///< ms
    } two_mode;

    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ParseError("expected a boolean, got '" + v + "'", line);
}

inline std::uint64_t parse_unsigned(const std::string& v, std::size_t line) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
        throw ParseError("expected a non-negative integer, got '" + v + "'", line);
    return out;
}

}  // namespace detail

/// Strict "[section]" / "key = value" parser; '#' starts a comment. Unknown sections or
/// keys, duplicates and malformed values raise ParseError with the line number.
inline RunConfig parse_config(std::string_view text) {
    RunConfig c;
    using Setter = std::function<void(const std::string&, std::size_t)>;
    auto num = [](double& dst) { return Setter([&dst](const std::string& v, std::size_t l) { dst = io::parse_double(v, l); }); };
    auto opt_num = [](std::optional<double>& dst) {
        return Setter([&dst](const std::string& v, std::size_t l) {
            if (v == "auto") dst.reset();
            else dst = io::parse_double(v, l);
        });
    };
    auto size = [](std::size_t& dst) {
        return Setter([&dst](const std::string& v, std::size_t l) { dst = static_cast<std::size_t>(detail::parse_unsigned(v, l)); });
    };
    auto integer = [](int& dst) {
        return Setter([&dst](const std::string& v, std::size_t l) { dst = static_cast<int>(detail::parse_unsigned(v, l)); });
    };
    auto text_value = [](std::string& dst) { return Setter([&dst](const std::string& v, std::size_t) { dst = v; }); };
    auto flag = [](bool& dst) { return Setter([&dst](const std::string& v, std::size_t l) { dst = detail::parse_bool(v, l); }); };
    auto choice = [](std::string& dst, std::initializer_list<const char*> allowed) {
        std::vector<std::string> ok(allowed.begin(), allowed.end());
        return Setter([&dst, ok](const std::string& v, std::size_t l) {
            for (const auto& a : ok)
                if (a == v) { dst = v; return; }
            std::string list;
            for (const auto& a : ok) list += (list.empty() ? "" : ", ") + a;
            throw ParseError("value '" + v + "' not one of: " + list, l);
        });
    };

    const std::map<std::string, std::map<std::string, Setter>> table{
        {"run", {{"seed", Setter([&](const std::string& v, std::size_t l) { c.seed = detail::parse_unsigned(v, l); })},
                 {"out_dir", text_value(c.out_dir)}}},
        {"grid", {{"y_min", num(c.grid.y_min)}, {"y_max", num(c.grid.y_max)}, {"points", size(c.grid.points)}}},
        {"potential",
         {{"kind", choice(c.potential.kind, {"sextic", "quartic", "harmonic", "custom"})},
          {"frequency", num(c.potential.frequency)},
          {"alpha2", num(c.potential.alpha2)},
          {"alpha4", num(c.potential.alpha4)},
          {"alpha6", num(c.potential.alpha6)},
          {"r0", num(c.potential.r0)}}},
        {"gpe",
         {{"mass", num(c.gpe.mass)},
          {"atom_number", num(c.gpe.atom_number)},
          {"g_n", opt_num(c.gpe.g_n)},
          {"mu_target", num(c.gpe.mu_target)},
          {"mu_reference", choice(c.gpe.mu_reference, {"above_ground", "absolute"})},
          {"dt", num(c.gpe.dt)}}},
        {"control",
         {{"pulse1_duration", num(c.control.pulse1_duration)},
          {"pulse2_duration", num(c.control.pulse2_duration)},
          {"components", size(c.control.components)},
          {"lambda_max", num(c.control.lambda_max)},
          {"ramp_fraction", num(c.control.ramp_fraction)},
          {"pulse1_file", text_value(c.control.pulse1_file)},
          {"pulse2_file", text_value(c.control.pulse2_file)}}},
        {"optimizer",
         {{"budget", size(c.optimizer.budget)},
          {"restarts", size(c.optimizer.restarts)},
          {"penalty_weight", num(c.optimizer.penalty_weight)},
          {"amplitude_step", num(c.optimizer.amplitude_step)},
          {"phase_step", num(c.optimizer.phase_step)},
          {"initial_amplitude", num(c.optimizer.initial_amplitude)},
          {"block_components", size(c.optimizer.block_components)},
          {"grid_points", size(c.optimizer.grid_points)},
          {"dt", num(c.optimizer.dt)},
          {"pulse2_holds", size(c.optimizer.pulse2_holds)},
          {"pulse2_hold_period", num(c.optimizer.pulse2_hold_period)},
          {"pulse2_inputs", choice(c.optimizer.pulse2_inputs, {"first_pulse", "ideal"})},
          {"pulse1_candidates", size(c.optimizer.pulse1_candidates)}}},
        {"ramsey",
         {{"hold_start", num(c.ramsey.hold_start)},
          {"hold_end", num(c.ramsey.hold_end)},
          {"hold_step", num(c.ramsey.hold_step)},
          {"fit", flag(c.ramsey.fit)}}},
        {"estimation",
         {{"t_tof", num(c.estimation.t_tof)},
          {"blur_width", opt_num(c.estimation.blur_width)},
          {"duration", num(c.estimation.duration)},
          {"budget", size(c.estimation.budget)},
          {"restarts", size(c.estimation.restarts)},
          {"fit_time_offset", flag(c.estimation.fit_time_offset)},
          {"p0", num(c.estimation.p0)},
          {"p1", num(c.estimation.p1)},
          {"p2", num(c.estimation.p2)},
          {"theta01", num(c.estimation.theta01)},
          {"theta12", num(c.estimation.theta12)}}},
        {"two-mode",
         {{"atom_number", num(c.two_mode.atom_number)},
          {"delta_jz", opt_num(c.two_mode.delta_jz)},
          {"g1d", opt_num(c.two_mode.g1d)},
          {"coherence_atoms", integer(c.two_mode.coherence_atoms)},
          {"coherence_duration", num(c.two_mode.coherence_duration)},
          {"coherence_step", num(c.two_mode.coherence_step)}}},
    };

    std::string section = "run";
    std::map<std::string, std::size_t> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? std::string_view(raw) : std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("malformed section header", lineno);
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (!table.contains(section)) throw ParseError("unknown section [" + section + "]", lineno);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        const auto& keys = table.at(section);
        const auto it = keys.find(key);
        if (it == keys.end()) throw ParseError("unknown key '" + key + "' in [" + section + "]", lineno);
        const std::string qualified = section + "." + key;
        if (seen.contains(qualified))
            throw ParseError("duplicate key '" + key + "' (first set on line " + std::to_string(seen[qualified]) + ")", lineno);
        seen[qualified] = lineno;
        if (value.empty()) throw ParseError("empty value for '" + key + "'", lineno);
        it->second(value, lineno);
    }
    return c;
}

}  // namespace motional
