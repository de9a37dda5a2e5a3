#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "gpe.hpp"
#include "observables.hpp"
#include "wavefunction.hpp"

namespace motional::io {

inline constexpr std::string_view kWavefunctionMagic{"MOTWFN1\n", 8};
inline constexpr std::string_view kTrajectoryMagic{"MOTTRJ1\n", 8};

// wavefunction containers

/// "# grid y_min y_max n" header, then one "y re im" line per point.
inline std::string wavefunction_to_text(const Wavefunction& psi) {
    const auto& g = psi.grid();
    std::string out = "# grid " + format_double(g.y_min()) + " " + format_double(g.y_max()) + " " +
                      std::to_string(g.size()) + "\n# y re im\n";
    for (std::size_t j = 0; j < psi.size(); ++j)
        out += format_double(g.position(j)) + " " + format_double(psi[j].real()) + " " +
               format_double(psi[j].imag()) + "\n";
    return out;
}

inline Wavefunction wavefunction_from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    double y_min = 0.0, y_max = 0.0;
    std::size_t n = 0;
    bool have_grid = false;
    std::vector<Complex> amp;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            std::istringstream h(line.substr(1));
            std::string key;
            h >> key;
            if (key == "grid") {
                if (!(h >> y_min >> y_max >> n)) throw ParseError("malformed grid header", lineno);
                have_grid = true;
            }
            continue;
        }
        std::istringstream row(line);
        std::string a, b, c, extra;
        if (!(row >> a >> b >> c) || (row >> extra)) throw ParseError("expected three columns: y re im", lineno);
        parse_double(a, lineno);
        amp.emplace_back(parse_double(b, lineno), parse_double(c, lineno));
    }
    if (!have_grid) throw ParseError("missing '# grid y_min y_max n' header");
    if (amp.size() != n) throw ParseError("grid header says " + std::to_string(n) + " points, found " +
                                          std::to_string(amp.size()));
    return {SpatialGrid(y_min, y_max, n), std::move(amp)};
}

inline std::string wavefunction_to_binary(const Wavefunction& psi) {
    std::string out(kWavefunctionMagic);
    put_u64(out, psi.size());
    put_f64(out, psi.grid().y_min());
    put_f64(out, psi.grid().y_max());
    for (std::size_t j = 0; j < psi.size(); ++j) put_f64(out, psi[j].real()), put_f64(out, psi[j].imag());
    return out;
}

inline Wavefunction wavefunction_from_binary(std::string_view data) {
    BinaryReader r(data);
    r.expect_magic(kWavefunctionMagic);
    const auto n = static_cast<std::size_t>(r.u64());
    const double y_min = r.f64(), y_max = r.f64();
    SpatialGrid grid(y_min, y_max, n);
    std::vector<Complex> amp(n);
    for (auto& a : amp) {
        const double re = r.f64();
        a = Complex(re, r.f64());
    }
    if (!r.at_end()) throw ParseError("trailing bytes after wavefunction");
    return {grid, std::move(amp)};
}

// trajectories

/// Record stream: magic, n, y_min, y_max, then per sample the time and n complex amplitudes.
inline std::string trajectory_to_binary(const Trajectory& traj) {
    if (traj.samples.empty()) throw std::invalid_argument("trajectory_to_binary: no samples");
    const auto& g = traj.samples.front().state.grid();
    std::string out(kTrajectoryMagic);
    put_u64(out, g.size());
    put_f64(out, g.y_min());
    put_f64(out, g.y_max());
    for (const auto& s : traj.samples) {
        put_f64(out, s.time);
        for (std::size_t j = 0; j < s.state.size(); ++j) put_f64(out, s.state[j].real()), put_f64(out, s.state[j].imag());
    }
    return out;
}

inline std::vector<TrajectorySample> trajectory_from_binary(std::string_view data) {
    BinaryReader r(data);
    r.expect_magic(kTrajectoryMagic);
    const auto n = static_cast<std::size_t>(r.u64());
    const double y_min = r.f64(), y_max = r.f64();
    SpatialGrid grid(y_min, y_max, n);
    std::vector<TrajectorySample> out;
    while (!r.at_end()) {
        const double t = r.f64();
        std::vector<Complex> amp(n);
        for (auto& a : amp) {
            const double re = r.f64();
            a = Complex(re, r.f64());
        }
        out.push_back({t, Wavefunction(grid, std::move(amp))});
    }
    return out;
}

/// time_ms, p0, p1, p2, leakage, mean_y_um, norm
inline std::string trajectory_summary_csv(const Trajectory& traj, std::span<const Wavefunction> modes) {
    std::string out = "time_ms,p0,p1,p2,leakage,mean_y_um,norm\n";
    for (const auto& s : traj.samples) {
        const double norm = s.state.norm();
        const auto proj = project_populations(s.state.normalized(), modes);
        out += format_double(s.time);
        for (std::size_t k = 0; k < 3; ++k) out += "," + format_double(k < proj.populations.size() ? proj.populations[k] : 0.0);
        out += "," + format_double(proj.leakage) + "," + format_double(mean_position(s.state.normalized())) + "," +
               format_double(norm) + "\n";
    }
    return out;
}

}  // namespace motional::io
