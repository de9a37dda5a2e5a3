#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"

namespace motional {

struct FourierComponent {
    double amplitude = 0.0;        ///< um
    double phase = 0.0;            ///< rad
    double frequency_scale = 1.0;  ///< multiplies the harmonic n/T (randomized-basis experiments)

    friend bool operator==(const FourierComponent&, const FourierComponent&) = default;
};

/// Trap displacement lambda(t) = envelope(t) * sum_n A_n sin(2 pi n s_n t / T + phi_n), n = 1..N.
///
/// The envelope is a sin^2 ramp over the first and last `ramp_fraction` of the pulse and 1 in
/// between, which pins lambda(0) = lambda(T) = 0. Waveforms exceeding lambda_max are kept as is;
/// the optimizer penalizes them instead.
class ControlWaveform {
public:
    static constexpr double kDefaultRampFraction = 0.05;
    static constexpr double kDefaultLambdaMax = 1.0;
    static constexpr std::size_t kDefaultComponents = 60;
    /// Resolution the bound scan is measured against (the default propagation step).
    static constexpr double kOutputStep = 0.5e-3;

    ControlWaveform(double duration_ms, std::vector<FourierComponent> components,
                    double lambda_max_um = kDefaultLambdaMax, double ramp_fraction = kDefaultRampFraction)
        : duration_(duration_ms), lambda_max_(lambda_max_um), ramp_fraction_(ramp_fraction),
          components_(std::move(components)) {
        if (!(duration_ > 0.0) || !std::isfinite(duration_))
            throw std::invalid_argument("ControlWaveform: duration must be positive");
        if (!(lambda_max_ > 0.0)) throw std::invalid_argument("ControlWaveform: lambda_max must be positive");
        if (!(ramp_fraction_ > 0.0 && ramp_fraction_ <= 0.5))
            throw std::invalid_argument("ControlWaveform: ramp fraction must lie in (0, 0.5]");
        for (const auto& c : components_)
            if (!std::isfinite(c.amplitude) || !std::isfinite(c.phase) || !std::isfinite(c.frequency_scale))
                throw std::invalid_argument("ControlWaveform: non-finite component");
        weights_.reserve(components_.size());
        for (const auto& c : components_) weights_.push_back(std::polar(c.amplitude, c.phase));
        peak_ = scan_peak(10 * static_cast<std::size_t>(std::ceil(duration_ / kOutputStep)));
    }

    /// All-zero waveform with n components.
    static ControlWaveform zero(double duration_ms, std::size_t n_components = kDefaultComponents,
                                double lambda_max_um = kDefaultLambdaMax) {
        return {duration_ms, std::vector<FourierComponent>(n_components), lambda_max_um};
    }

    /// Amplitudes followed by phases; frequency scales copied from `like`.
    static ControlWaveform from_parameters(const ControlWaveform& like, std::span<const double> x) {
        const std::size_t n = like.components_.size();
        if (x.size() != 2 * n) throw std::invalid_argument("ControlWaveform: parameter vector must have 2n entries");
        auto comps = like.components_;
        for (std::size_t i = 0; i < n; ++i) {
            comps[i].amplitude = x[i];
            comps[i].phase = x[n + i];
        }
        return {like.duration_, std::move(comps), like.lambda_max_, like.ramp_fraction_};
    }

    std::vector<double> parameters() const {
        const std::size_t n = components_.size();
        std::vector<double> x(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = components_[i].amplitude;
            x[n + i] = components_[i].phase;
        }
        return x;
    }

    double duration() const noexcept { return duration_; }
    double lambda_max() const noexcept { return lambda_max_; }
    double ramp_fraction() const noexcept { return ramp_fraction_; }
    std::size_t n_components() const noexcept { return components_.size(); }
    const std::vector<FourierComponent>& components() const noexcept { return components_; }

    double envelope(double t) const noexcept {
        const double ramp = ramp_fraction_ * duration_;
        const double edge = std::min(t, duration_ - t);
        if (edge <= 0.0) return 0.0;
        if (edge >= ramp) return 1.0;
        const double s = std::sin(0.5 * std::numbers::pi * edge / ramp);
        return s * s;
    }

    /// Fourier sum without the envelope. Harmonic components are generated by complex
    /// rotation z^n, z = exp(2 pi i t / T); scaled components fall back to std::sin.
    double carrier(double t) const noexcept {
        const double w = 2.0 * std::numbers::pi / duration_;
        const std::complex<double> z = std::polar(1.0, w * t);
        std::complex<double> zn{1.0, 0.0};
        double sum = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            zn *= z;
            const auto& c = components_[i];
            if (c.amplitude == 0.0) continue;
            if (c.frequency_scale == 1.0)
                sum += (weights_[i] * zn).imag();
            else
                sum += c.amplitude * std::sin(w * static_cast<double>(i + 1) * c.frequency_scale * t + c.phase);
        }
        return sum;
    }

    double operator()(double t) const {
        if (!(t >= 0.0 && t <= duration_))
            throw std::out_of_range("ControlWaveform: t = " + std::to_string(t) + " ms outside [0, T]");
        if (t == 0.0 || t == duration_) return 0.0;
        return envelope(t) * carrier(t);
    }

    /// max |lambda| over the construction-time scan.
    double peak_excursion() const noexcept { return peak_; }
    bool within_bound() const noexcept { return peak_ <= lambda_max_; }
    /// Penalty weight * (max|lambda| - lambda_max)^2, zero inside the bound.
    double bound_penalty(double weight) const noexcept {
        const double excess = peak_ - lambda_max_;
        return excess > 0.0 ? weight * excess * excess : 0.0;
    }

    double scan_peak(std::size_t samples) const {
        double peak = 0.0;
        if (samples < 2) samples = 2;
        for (std::size_t i = 0; i <= samples; ++i) {
            const double t = duration_ * static_cast<double>(i) / static_cast<double>(samples);
            peak = std::max(peak, std::abs((*this)(t)));
        }
        return peak;
    }

    friend bool operator==(const ControlWaveform& a, const ControlWaveform& b) {
        return a.duration_ == b.duration_ && a.lambda_max_ == b.lambda_max_ &&
               a.ramp_fraction_ == b.ramp_fraction_ && a.components_ == b.components_;
    }

    // --- text format -------------------------------------------------------------------------
    //   duration_ms = <T>
    //   n_components = <N>
    //   lambda_max_um = <bound>
    //   ramp_fraction = <f>            (optional)
    //   <n> <amplitude_um> <phase_rad> [frequency_scale]
    // Doubles are written with 17 significant digits so the round trip is exact.

    std::string to_text() const {
        std::ostringstream os;
        os << "duration_ms = " << format_exact(duration_) << '\n'
           << "n_components = " << components_.size() << '\n'
           << "lambda_max_um = " << format_exact(lambda_max_) << '\n'
           << "ramp_fraction = " << format_exact(ramp_fraction_) << '\n';
        const bool scaled = std::any_of(components_.begin(), components_.end(),
                                        [](const auto& c) { return c.frequency_scale != 1.0; });
        for (std::size_t i = 0; i < components_.size(); ++i) {
            os << (i + 1) << ' ' << format_exact(components_[i].amplitude) << ' '
               << format_exact(components_[i].phase);
            if (scaled) os << ' ' << format_exact(components_[i].frequency_scale);
            os << '\n';
        }
        return os.str();
    }

    static ControlWaveform from_text(std::istream& in) {
        double duration = -1.0, lambda_max = kDefaultLambdaMax, ramp = kDefaultRampFraction;
        long n_declared = -1;
        std::vector<FourierComponent> comps;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (const auto eq = line.find('='); eq != std::string::npos) {
                const auto key = trim(line.substr(0, eq));
                const auto value = trim(line.substr(eq + 1));
                if (key == "duration_ms") duration = parse_double(value, lineno);
                else if (key == "n_components") n_declared = static_cast<long>(parse_double(value, lineno));
                else if (key == "lambda_max_um") lambda_max = parse_double(value, lineno);
                else if (key == "ramp_fraction") ramp = parse_double(value, lineno);
                else throw ParseError("unknown waveform key '" + key + "'", lineno);
                continue;
            }
            std::istringstream ls(line);
            std::vector<std::string> tok;
            for (std::string t; ls >> t;) tok.push_back(t);
            if (tok.size() != 3 && tok.size() != 4) throw ParseError("component line needs 3 or 4 fields", lineno);
            const auto index = static_cast<std::size_t>(parse_double(tok[0], lineno));
            if (index != comps.size() + 1) throw ParseError("component indices must run 1..N in order", lineno);
            FourierComponent c{parse_double(tok[1], lineno), parse_double(tok[2], lineno), 1.0};
            if (tok.size() == 4) c.frequency_scale = parse_double(tok[3], lineno);
            comps.push_back(c);
        }
        if (duration <= 0.0) throw ParseError("missing or invalid duration_ms");
        if (n_declared >= 0 && static_cast<std::size_t>(n_declared) != comps.size())
            throw ParseError("n_components does not match the number of component lines");
        return {duration, std::move(comps), lambda_max, ramp};
    }

    static std::string format_exact(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }

    static double parse_double(const std::string& s, std::size_t lineno) {
        double v = 0.0;
        const auto* end = s.data() + s.size();
        const auto [ptr, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc{} || ptr != end) throw ParseError("cannot parse number '" + s + "'", lineno);
        return v;
    }

    double duration_;
    double lambda_max_;
    double ramp_fraction_;
    std::vector<FourierComponent> components_;
    std::vector<std::complex<double>> weights_;  ///< A_n exp(i phi_n)
    double peak_ = 0.0;
};

}  // namespace motional
