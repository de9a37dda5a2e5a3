#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "gpe.hpp"
#include "io.hpp"
#include "nelder_mead.hpp"
#include "observables.hpp"
#include "units.hpp"

namespace motional {

/// Time-of-flight mapping delta k = alpha * delta y between image and in-trap momentum.
struct TofScaling {
    double t_tof = 46.0;  ///< ms
    double mass = units::kRubidium87Mass;
    /// Gaussian imaging blur in the image plane (um); empty means one pixel, i.e. one momentum-grid step.
    std::optional<double> blur_width;

    /// alpha = m / (hbar t_TOF), um^-2.
    double alpha() const {
        if (!(t_tof > 0.0) || !(mass > 0.0)) throw std::invalid_argument("TofScaling: t_tof and mass must be positive");
        return mass / (units::kHbar * t_tof * 1e-3) * 1e-12;
    }

    /// Blur sigma in momentum units (um^-1) on a momentum axis with spacing dk.
    double blur_sigma_k(double dk) const {
        if (!blur_width) return dk;
        if (*blur_width < 0.0) throw std::invalid_argument("TofScaling: negative blur width");
        return alpha() * *blur_width;
    }
};

/// rho(k, t): rows are time samples, columns follow the increasing momentum axis.
struct MomentumTimeSeries {
    std::vector<double> k;      ///< um^-1, strictly increasing
    std::vector<double> times;  ///< ms
    std::vector<std::vector<double>> density;  ///< um

    std::size_t n_times() const { return times.size(); }
    std::size_t n_k() const { return k.size(); }

    void validate() const {
        if (k.size() < 2) throw std::invalid_argument("MomentumTimeSeries: need at least two momentum points");
        for (std::size_t i = 1; i < k.size(); ++i)
            if (!(k[i] > k[i - 1])) throw std::invalid_argument("MomentumTimeSeries: k must be strictly increasing");
        if (times.empty()) throw std::invalid_argument("MomentumTimeSeries: no time samples");
        if (density.size() != times.size()) throw std::invalid_argument("MomentumTimeSeries: row count mismatch");
        for (const auto& row : density)
            if (row.size() != k.size()) throw std::invalid_argument("MomentumTimeSeries: column count mismatch");
    }

    /// Sum rho dk of one slice, with dk taken per point (trapezoid-free, uniform spacing assumed).
    double slice_norm(std::size_t t) const {
        const double dk = (k.back() - k.front()) / static_cast<double>(k.size() - 1);
        double s = 0.0;
        for (double v : density[t]) s += v;
        return s * dk;
    }

    /// Renormalizes every slice to unit weight; rejects empty or negative slices.
    void normalize_slices() {
        validate();
        for (std::size_t t = 0; t < times.size(); ++t) {
            for (double v : density[t])
                if (!std::isfinite(v)) throw std::invalid_argument("MomentumTimeSeries: non-finite density");
            const double s = slice_norm(t);
            if (!(s > 0.0)) throw std::invalid_argument("MomentumTimeSeries: slice " + std::to_string(t) + " has no weight");
            for (double& v : density[t]) v /= s;
        }
    }

    double mean_momentum(std::size_t t) const {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) num += k[i] * density[t][i], den += density[t][i];
        return num / den;
    }
};

/// Converts an image-plane series (position axis in um, density per um) to momentum coordinates.
inline MomentumTimeSeries image_to_momentum(const MomentumTimeSeries& image, const TofScaling& scaling) {
    const double a = scaling.alpha();
    MomentumTimeSeries out = image;
    for (double& k : out.k) k *= a;
    for (auto& row : out.density)
        for (double& v : row) v /= a;
    return out;
}

/// Discrete Gaussian convolution on a uniform axis; the kernel is normalized so sum_j G dk = 1.
inline std::vector<double> gaussian_blur(std::span<const double> rho, double dk, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_blur: negative width");
    if (sigma == 0.0) return {rho.begin(), rho.end()};
    const std::size_t n = rho.size();
    const auto half = static_cast<std::ptrdiff_t>(std::min<double>(std::floor(8.0 * sigma / dk), static_cast<double>(n)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    double ksum = 0.0;
    for (std::ptrdiff_t m = -half; m <= half; ++m) {
        const double x = static_cast<double>(m) * dk / sigma;
        ksum += kernel[static_cast<std::size_t>(m + half)] = std::exp(-0.5 * x * x);
    }
    for (double& w : kernel) w /= ksum;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t m = -half; m <= half; ++m) {
            const auto j = static_cast<std::ptrdiff_t>(i) - m;
            if (j >= 0 && j < static_cast<std::ptrdiff_t>(n)) acc += kernel[static_cast<std::size_t>(m + half)] * rho[static_cast<std::size_t>(j)];
        }
        out[i] = acc;
    }
    return out;
}

inline constexpr double kObservationStep = 0.05;  ///< ms

inline std::vector<double> sample_times(double duration, double step = kObservationStep) {
    if (!(duration >= 0.0)) throw std::invalid_argument("sample_times: negative duration");
    std::vector<double> t;
    const auto count = static_cast<std::size_t>(std::floor(duration / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) t.push_back(step * static_cast<double>(i));
    return t;
}

/// Stateless forward model shared by simulation and fitting.
class ObservationModel {
public:
    ObservationModel(std::span<const Wavefunction> modes, const GpeParams& params, TofScaling scaling,
                     double dt = SplitStepPropagator::kDefaultStep)
        : modes_(modes.begin(), modes.end()),
          prop_(modes.front().grid(), params, dt),
          fft_(modes.front().grid().size()),
          scaling_(scaling),
          k_(modes.front().grid().momenta_sorted()) {
        if (modes_.size() < 3) throw std::invalid_argument("ObservationModel: need three modes");
        dk_ = modes_.front().grid().dk();
    }

    const std::vector<double>& momenta() const { return k_; }

    /// Densities at `times` (ascending, >= 0) on the native momentum axis. The coherent part is
    /// propagated at unit norm and its density scaled by sum p_k; the rest is left unmodeled.
    MomentumTimeSeries simulate(const SuperpositionParams& init, std::span<const double> times, double offset = 0.0) {
        init.validate();
        return simulate_unchecked(init, times, offset);
    }

    /// As simulate() but only requires p_k >= 0, so sum p_k may exceed 1 (used for differencing).
    MomentumTimeSeries simulate_unchecked(const SuperpositionParams& init, std::span<const double> times,
                                          double offset = 0.0) {
        for (double p : init.p)
            if (!(p >= 0.0)) throw std::invalid_argument("simulate: negative population");
        const double weight = init.total();
        if (!(weight > 0.0)) throw std::invalid_argument("simulate: all populations are zero");
        MomentumTimeSeries out;
        out.k = k_;
        out.times.assign(times.begin(), times.end());
        const auto c = init.coefficients();
        Wavefunction psi(modes_[0].grid());
        for (std::size_t k = 0; k < 3; ++k) psi.add_scaled(c[k], modes_[k]);
        psi.normalize();
        if (offset > 0.0) prop_.evolve(psi, nullptr, offset);
        double t = 0.0;
        const double sigma = scaling_.blur_sigma_k(dk_);
        for (double ti : times) {
            if (ti < t - 1e-12) throw std::invalid_argument("simulate: times must be ascending");
            if (ti > t) prop_.evolve(psi, nullptr, ti - t);
            t = std::max(t, ti);
            auto rho = gaussian_blur(to_momentum_density(psi.normalized(), fft_), dk_, sigma);
            for (double& v : rho) v *= weight;
            out.density.push_back(std::move(rho));
        }
        return out;
    }

private:
    std::vector<Wavefunction> modes_;
    SplitStepPropagator prop_;
    FourierTransform fft_;
    TofScaling scaling_;
    std::vector<double> k_;
    double dk_;
};

/// Simulated observation sampled every 0.05 ms over [0, duration], slices normalized to the coherent weight.
inline MomentumTimeSeries simulate_observation(const SuperpositionParams& init, std::span<const Wavefunction> modes,
                                               const GpeParams& params, double duration, const TofScaling& scaling,
                                               double dt = SplitStepPropagator::kDefaultStep) {
    if (!(duration >= 0.0)) throw std::invalid_argument("simulate_observation: negative duration");
    ObservationModel model(modes, params, scaling, dt);
    const auto times = sample_times(duration);
    return model.simulate(init, times);
}

/// Linear interpolation of (xs, ys) at x; zero outside the sampled range.
inline double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
    if (x < xs.front() || x > xs.back()) return 0.0;
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return ys.back();
    const auto i = static_cast<std::size_t>(it - xs.begin());
    if (i == 0) return ys.front();
    const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - w) * ys[i - 1] + w * ys[i];
}

struct PopulationFitOptions {
    std::size_t budget = 3000;        ///< simplex evaluations
    std::size_t restarts = 1;
    std::size_t phase_grid = 8;        ///< coarse phase scan per axis for the starting point
    bool fit_time_offset = false;
    unsigned seed = 1;
    double dt = SplitStepPropagator::kDefaultStep;
};

struct PopulationFit {
    SuperpositionParams params;
    double time_offset = 0.0;
    /// 1-sigma errors of (p0, p1, p2, theta01, theta12) from the local quadratic model.
    std::array<double, 5> sigma{};
    double misfit = 0.0;             ///< sum over t, k of (rho_sim - rho_obs)^2 dk
    double relative_residual = 0.0;  ///< sqrt(misfit / sum rho_obs^2 dk)
    double unexplained_fraction() const { return 1.0 - params.total(); }
    OptimizationTrace trace;
};

namespace detail {

/// x = (a, b, c, theta01, theta12[, s]) with p0 = cos^2 a, p1 = sin^2 a cos^2 b,
/// p2 = sin^2 a sin^2 b cos^2 c; the remainder sin^2 a sin^2 b sin^2 c is unmodeled.
inline SuperpositionParams decode(std::span<const double> x) {
    const double sa = std::sin(x[0]), ca = std::cos(x[0]);
    const double sb = std::sin(x[1]), cb = std::cos(x[1]);
    const double cc = std::cos(x[2]);
    SuperpositionParams p;
    p.p = {ca * ca, sa * sa * cb * cb, sa * sa * sb * sb * cc * cc};
    p.theta01 = wrap_phase(x[3]);
    p.theta12 = wrap_phase(x[4]);
    return p;
}

inline std::array<double, 3> encode_populations(const std::array<double, 3>& p) {
    const double a = std::acos(std::sqrt(std::clamp(p[0], 0.0, 1.0)));
    const double rest1 = std::max(1.0 - p[0], 1e-300);
    const double b = std::acos(std::sqrt(std::clamp(p[1] / rest1, 0.0, 1.0)));
    const double rest2 = std::max(rest1 - p[1], 1e-300);
    const double c = std::acos(std::sqrt(std::clamp(p[2] / rest2, 0.0, 1.0)));
    return {a, b, c};
}

}  // namespace detail

/// Simplex regression of (p0, p1, p2, theta01, theta12) against an observed momentum series.
/// `observed` must be on a momentum axis (use image_to_momentum first for image data); its
/// slices are renormalized to unit weight before fitting.
inline PopulationFit fit_populations(MomentumTimeSeries observed, std::span<const Wavefunction> modes,
                                     const GpeParams& params, const TofScaling& scaling,
                                     const PopulationFitOptions& opt = {}) {
    observed.normalize_slices();
    for (std::size_t t = 1; t < observed.times.size(); ++t)
        if (!(observed.times[t] > observed.times[t - 1]))
            throw std::invalid_argument("fit_populations: observation times must increase");
    if (observed.times.front() < 0.0) throw std::invalid_argument("fit_populations: negative observation time");

    ObservationModel model(modes, params, scaling, opt.dt);
    const auto& ks = model.momenta();
    if (observed.k.front() < ks.front() - 1e-9 || observed.k.back() > ks.back() + 1e-9)
        throw std::invalid_argument("fit_populations: observed momentum axis exceeds the simulation grid");
    const double dk_obs = (observed.k.back() - observed.k.front()) / static_cast<double>(observed.n_k() - 1);

    double obs_sq = 0.0;
    for (const auto& row : observed.density)
        for (double v : row) obs_sq += v * v * dk_obs;

    // Residual vector for natural parameters; the offset is in ms.
    auto residual_unchecked = [&](const SuperpositionParams& p, double offset) {
        const auto sim = model.simulate_unchecked(p, observed.times, offset);
        std::vector<double> r;
        r.reserve(observed.n_times() * observed.n_k());
        for (std::size_t t = 0; t < observed.n_times(); ++t)
            for (std::size_t i = 0; i < observed.n_k(); ++i)
                r.push_back((interpolate(sim.k, sim.density[t], observed.k[i]) - observed.density[t][i]) *
                            std::sqrt(dk_obs));
        return r;
    };
    auto residual_vector = [&](const SuperpositionParams& p, double offset) {
        p.validate();
        return residual_unchecked(p, offset);
    };
    auto misfit_of = [&](const SuperpositionParams& p, double offset) {
        if (p.total() < 1e-12) return std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (double v : residual_vector(p, offset)) s += v * v;
        return s;
    };

    const bool use_offset = opt.fit_time_offset;
    auto cost = [&](std::span<const double> x) {
        return misfit_of(detail::decode(x), use_offset ? x[5] * x[5] : 0.0);
    };

    // Starting populations from the time-averaged density, a non-negative least-squares
    // on the three mode densities (cross terms average out over several periods).
    const std::size_t nk = observed.n_k();
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(nk), 3);
    for (std::size_t m = 0; m < 3; ++m) {
        SuperpositionParams pure;
        pure.p = {0.0, 0.0, 0.0};
        pure.p[m] = 1.0;
        const std::array<double, 1> t0{0.0};
        const auto sim = model.simulate(pure, t0);
        for (std::size_t i = 0; i < nk; ++i)
            basis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = interpolate(sim.k, sim.density[0], observed.k[i]);
    }
    Eigen::VectorXd mean_rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nk));
    for (const auto& row : observed.density)
        for (std::size_t i = 0; i < nk; ++i) mean_rho(static_cast<Eigen::Index>(i)) += row[i];
    mean_rho /= static_cast<double>(observed.n_times());
    std::array<double, 3> p_start{1.0 / 3, 1.0 / 3, 1.0 / 3};
    {
        // Active-set NNLS for three unknowns: try every support and keep the best feasible one.
        double best = std::numeric_limits<double>::infinity();
        for (unsigned mask = 1; mask < 8; ++mask) {
            std::vector<Eigen::Index> cols;
            for (Eigen::Index m = 0; m < 3; ++m)
                if (mask & (1u << m)) cols.push_back(m);
            Eigen::MatrixXd a(basis.rows(), static_cast<Eigen::Index>(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c) a.col(static_cast<Eigen::Index>(c)) = basis.col(cols[c]);
            const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(mean_rho);
            if ((sol.array() < 0.0).any()) continue;
            const double r = (a * sol - mean_rho).squaredNorm();
            if (r < best) {
                best = r;
                p_start = {0.0, 0.0, 0.0};
                for (std::size_t c = 0; c < cols.size(); ++c) p_start[static_cast<std::size_t>(cols[c])] = sol(static_cast<Eigen::Index>(c));
            }
        }
        const double total = p_start[0] + p_start[1] + p_start[2];
        if (total > 1.0)
            for (double& v : p_start) v /= total;
        for (double& v : p_start) v = std::max(v, 0.01);
        const double t2 = p_start[0] + p_start[1] + p_start[2];
        if (t2 > 1.0)
            for (double& v : p_start) v /= t2;
    }
    const auto abc = detail::encode_populations(p_start);

    // Coarse phase scan.
    std::vector<double> x0{abc[0], abc[1], abc[2], 0.0, 0.0};
    if (use_offset) x0.push_back(0.0);
    {
        double best = std::numeric_limits<double>::infinity();
        const std::size_t g = std::max<std::size_t>(opt.phase_grid, 1);
        std::vector<double> x = x0;
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t j = 0; j < g; ++j) {
                x[3] = -std::numbers::pi + 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(g);
                x[4] = -std::numbers::pi + 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(g);
                const double c = cost(x);
                if (c < best) best = c, x0[3] = x[3], x0[4] = x[4];
            }
    }

    NelderMeadOptions nm;
    nm.max_evaluations = opt.budget;
    nm.restarts = opt.restarts;
    nm.seed = opt.seed;
    nm.f_tolerance = 1e-12 * obs_sq;
    nm.x_tolerance = 1e-4;
    nm.initial_step = {0.15, 0.15, 0.15, 0.4, 0.4};
    if (use_offset) nm.initial_step.push_back(0.1);
    nm.restart_noise = 0.3;
    auto trace = nelder_mead(cost, x0, nm);
    if (!std::isfinite(trace.best_cost))
        throw NumericalError("fit_populations: no finite misfit found", trace.best_cost);
    if (!trace.converged && trace.evaluations() >= opt.budget)
        throw NumericalError("fit_populations: simplex budget exhausted after " +
                                 std::to_string(trace.evaluations()) + " evaluations",
                             trace.best_cost);

    PopulationFit fit;
    fit.params = detail::decode(trace.best_parameters);
    fit.time_offset = use_offset ? trace.best_parameters[5] * trace.best_parameters[5] : 0.0;
    fit.misfit = trace.best_cost;
    if (!(obs_sq > 0.0)) throw std::invalid_argument("fit_populations: observed data carry no signal");
    fit.relative_residual = std::sqrt(fit.misfit / obs_sq);

    // Gauss-Newton covariance in natural coordinates, s^2 (J^T J)^{-1}.
    const auto r0 = residual_vector(fit.params, fit.time_offset);
    const auto m = static_cast<Eigen::Index>(r0.size());
    Eigen::MatrixXd jac(m, 5);
    const double h = 1e-4;
    for (int q = 0; q < 5; ++q) {
        auto shifted = [&](double sgn) {
            SuperpositionParams p = fit.params;
            if (q < 3) p.p[static_cast<std::size_t>(q)] += sgn * h;
            else if (q == 3) p.theta01 += sgn * h;
            else p.theta12 += sgn * h;
            return p;
        };
        // one-sided at p_k = 0
        const bool forward = q < 3 && fit.params.p[static_cast<std::size_t>(q)] < h;
        const auto rp = residual_unchecked(shifted(1.0), fit.time_offset);
        const auto rm = forward ? r0 : residual_unchecked(shifted(-1.0), fit.time_offset);
        const double span = forward ? h : 2.0 * h;
        for (Eigen::Index i = 0; i < m; ++i)
            jac(i, q) = (rp[static_cast<std::size_t>(i)] - rm[static_cast<std::size_t>(i)]) / span;
    }
    const double dof = std::max<double>(static_cast<double>(m) - 5.0, 1.0);
    const double s2 = fit.misfit / dof;
    const Eigen::MatrixXd a_inv = (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::MatrixXd cov = s2 * a_inv;

    // Slice normalization correlates the noise within each slice, so also form the
    // slice-clustered sandwich estimate and keep the larger variance.
    const auto nk_obs = static_cast<Eigen::Index>(observed.n_k());
    const auto n_slices = static_cast<Eigen::Index>(observed.n_times());
    const Eigen::Map<const Eigen::VectorXd> r_vec(r0.data(), m);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(5, 5);
    for (Eigen::Index t = 0; t < n_slices; ++t) {
        const Eigen::VectorXd score = jac.middleRows(t * nk_obs, nk_obs).transpose() * r_vec.segment(t * nk_obs, nk_obs);
        meat += score * score.transpose();
    }
    const double small_sample = n_slices > 1 ? static_cast<double>(n_slices) / static_cast<double>(n_slices - 1) : 1.0;
    const Eigen::MatrixXd cov_clustered = small_sample * a_inv * meat * a_inv;
    for (int q = 0; q < 5; ++q)
        fit.sigma[static_cast<std::size_t>(q)] = std::sqrt(std::max({cov(q, q), cov_clustered(q, q), 0.0}));
    fit.trace = std::move(trace);
    return fit;
}

// series I/O

/// Header "time_ms,k1,k2,...", then one row per time sample.
inline std::string series_to_csv(const MomentumTimeSeries& s) {
    s.validate();
    std::string out = "time_ms";
    for (double k : s.k) out += "," + io::format_double(k);
    out += "\n";
    for (std::size_t t = 0; t < s.n_times(); ++t) {
        out += io::format_double(s.times[t]);
        for (double v : s.density[t]) out += "," + io::format_double(v);
        out += "\n";
    }
    return out;
}

/// Parses the CSV layout above; errors carry the 1-based line number.
inline MomentumTimeSeries series_from_csv(std::string_view text) {
    MomentumTimeSeries s;
    std::size_t lineno = 0, start = 0;
    bool header = false;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto cells = io::split(line, ',');
        if (!header) {
            if (cells.size() < 3) throw ParseError("header needs a time column and at least two k values", lineno);
            for (std::size_t i = 1; i < cells.size(); ++i) s.k.push_back(io::parse_double(cells[i], lineno));
            header = true;
            continue;
        }
        if (cells.size() != s.k.size() + 1)
            throw ParseError("expected " + std::to_string(s.k.size() + 1) + " columns, found " +
                                 std::to_string(cells.size()),
                             lineno);
        s.times.push_back(io::parse_double(cells[0], lineno));
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(io::parse_double(cells[i], lineno));
        s.density.push_back(std::move(row));
    }
    if (!header) throw ParseError("empty series file");
    if (s.times.empty()) throw ParseError("series file has no data rows");
    s.validate();
    return s;
}

inline constexpr std::string_view kSeriesMagic{"MOTSER1\n", 8};

/// Magic, n_k, n_t, the k axis, then per sample the time and n_k densities (little-endian doubles).
inline std::string series_to_binary(const MomentumTimeSeries& s) {
    s.validate();
    std::string out(kSeriesMagic);
    io::put_u64(out, s.n_k());
    io::put_u64(out, s.n_times());
    for (double k : s.k) io::put_f64(out, k);
    for (std::size_t t = 0; t < s.n_times(); ++t) {
        io::put_f64(out, s.times[t]);
        for (double v : s.density[t]) io::put_f64(out, v);
    }
    return out;
}

inline MomentumTimeSeries series_from_binary(std::string_view data) {
    io::BinaryReader r(data);
    r.expect_magic(kSeriesMagic);
    MomentumTimeSeries s;
    const auto nk = static_cast<std::size_t>(r.u64());
    const auto nt = static_cast<std::size_t>(r.u64());
    if (nk > (1u << 24) || nt > (1u << 24)) throw ParseError("implausible series dimensions");
    s.k.resize(nk);
    for (double& k : s.k) k = r.f64();
    for (std::size_t t = 0; t < nt; ++t) {
        s.times.push_back(r.f64());
        std::vector<double> row(nk);
        for (double& v : row) v = r.f64();
        s.density.push_back(std::move(row));
    }
    if (!r.at_end()) throw ParseError("trailing bytes after series");
    s.validate();
    return s;
}

}  // namespace motional
