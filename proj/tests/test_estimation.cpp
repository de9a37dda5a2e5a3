#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "motional/damped_sine.hpp"
#include "motional/estimation.hpp"
#include "motional/stationary.hpp"

using namespace motional;

namespace {

struct Setup {
    SpatialGrid grid{-4, 4, 128};
    GpeParams params = GpeParams{}.with_g_n(0.415);
    StationarySet set;
    std::vector<Wavefunction> modes;
    double dt = 1e-3;
    Setup() {
        set = solve_stationary(grid, params, 3);
        modes = lowdin_orthonormalize(set.states).states;
    }
};

const Setup& setup() {
    static const Setup s;
    return s;
}

PopulationFitOptions fast_fit() {
    PopulationFitOptions o;
    o.dt = 1e-3;
    return o;
}

SuperpositionParams params_of(double p0, double p1, double p2, double t01, double t12) {
    SuperpositionParams p;
    p.p = {p0, p1, p2};
    p.theta01 = t01;
    p.theta12 = t12;
    return p;
}

}  // namespace

TEST(TofScaling, Alpha) {
    const TofScaling s;
    EXPECT_NEAR(s.alpha(), 0.0297, 2e-4);
    EXPECT_GT(s.alpha(), 0.0);
    TofScaling bad;
    bad.t_tof = 0.0;
    EXPECT_THROW((void)bad.alpha(), std::invalid_argument);
}

TEST(SimulateObservation, GroundStateIsStationary) {
    const auto& s = setup();
    const auto obs = simulate_observation(params_of(1, 0, 0, 0, 0), s.modes, s.params, 1.0, TofScaling{}, SplitStepPropagator::kDefaultStep);
    ASSERT_EQ(obs.n_times(), 21u);
    for (std::size_t t = 0; t < obs.n_times(); ++t) {
        EXPECT_NEAR(obs.slice_norm(t), 1.0, 1e-4);
        for (std::size_t i = 0; i < obs.n_k(); ++i) ASSERT_NEAR(obs.density[t][i], obs.density[0][i], 1e-6);
    }
    const auto peak = std::max_element(obs.density[0].begin(), obs.density[0].end()) - obs.density[0].begin();
    EXPECT_EQ(static_cast<std::size_t>(peak), obs.n_k() / 2);
}

TEST(SimulateObservation, TwoLevelBeatInMeanMomentum) {
    const SpatialGrid g(-4, 4, 128);
    const GpeParams free;
    const auto set = solve_stationary(g, free, 3);
    const auto obs = simulate_observation(params_of(0.5, 0.5, 0, 0, 0), set.states, free, 2.0, TofScaling{}, 1e-3);
    std::vector<double> k_mean;
    for (std::size_t t = 0; t < obs.n_times(); ++t) k_mean.push_back(obs.mean_momentum(t));
    const auto fit = fit_damped_sine(obs.times, k_mean);
    EXPECT_NEAR(fit.period, 1.0 / set.e01(), 0.01 / set.e01());
    EXPECT_TRUE(fit.no_measurable_damping);
    EXPECT_LT(fit.residual_norm, 1e-3 * fit.amplitude);
}

TEST(SimulateObservation, BlurIsDiscreteGaussianConvolution) {
    const auto& s = setup();
    const auto init = params_of(0.5, 0.3, 0.2, 0.4, -1.0);
    TofScaling sharp;
    sharp.blur_width = 0.0;
    TofScaling blurred;
    blurred.blur_width = 40.0;  // um in the image plane
    const auto a = simulate_observation(init, s.modes, s.params, 0.2, sharp, s.dt);
    const auto b = simulate_observation(init, s.modes, s.params, 0.2, blurred, s.dt);
    const double dk = s.grid.dk(), sigma = blurred.alpha() * 40.0;
    const std::size_t n = a.n_k();
    for (std::size_t t = 0; t < a.n_times(); ++t) {
        // direct sum over the full axis with the kernel normalized on the grid
        double norm = 0.0;
        for (long m = -static_cast<long>(n); m <= static_cast<long>(n); ++m)
            if (std::abs(m * dk) <= 8.0 * sigma) norm += std::exp(-0.5 * std::pow(m * dk / sigma, 2));
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double d = (static_cast<double>(i) - static_cast<double>(j)) * dk;
                if (std::abs(d) <= 8.0 * sigma) acc += std::exp(-0.5 * std::pow(d / sigma, 2)) * a.density[t][j];
            }
            ASSERT_NEAR(b.density[t][i], acc / norm, 1e-10);
        }
    }
}

TEST(SimulateObservation, RejectsInvalidInit) {
    const auto& s = setup();
    EXPECT_THROW(simulate_observation(params_of(0.6, 0.5, 0.0, 0, 0), s.modes, s.params, 0.5, TofScaling{}, s.dt),
                 std::invalid_argument);
    EXPECT_THROW(simulate_observation(params_of(1, 0, 0, 0, 0), s.modes, s.params, -0.1, TofScaling{}, s.dt),
                 std::invalid_argument);
}

TEST(FitPopulations, NoiselessRoundTrip) {
    const auto& s = setup();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        double w0 = 0.1 + u(rng), w1 = 0.1 + u(rng), w2 = 0.1 + u(rng);
        const double tot = w0 + w1 + w2;
        const auto truth = params_of(w0 / tot, w1 / tot, w2 / tot, std::numbers::pi * (2 * u(rng) - 1),
                                     std::numbers::pi * (2 * u(rng) - 1));
        const auto obs = simulate_observation(truth, s.modes, s.params, 1.0, TofScaling{}, s.dt);
        const auto fit = fit_populations(obs, s.modes, s.params, TofScaling{}, fast_fit());
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(fit.params.p[k], truth.p[k], 0.02);
        EXPECT_NEAR(wrap_phase(fit.params.theta01 - truth.theta01), 0.0, 0.05);
        EXPECT_NEAR(wrap_phase(fit.params.theta12 - truth.theta12), 0.0, 0.05);
        EXPECT_LT(fit.relative_residual, 1e-3);
    }
}

TEST(FitPopulations, GroundStateOnly) {
    const auto& s = setup();
    const auto obs = simulate_observation(params_of(1, 0, 0, 0, 0), s.modes, s.params, 1.0, TofScaling{}, s.dt);
    const auto fit = fit_populations(obs, s.modes, s.params, TofScaling{}, fast_fit());
    EXPECT_GE(fit.params.p[0], 0.98);
    EXPECT_LE(fit.params.p[1], 0.01);
    EXPECT_LE(fit.params.p[2], 0.01);
}

TEST(FitPopulations, BroadBackgroundShowsAsUnexplainedFraction) {
    const auto& s = setup();
    auto obs = simulate_observation(params_of(0.5, 0.35, 0.15, 1.0, 0.5), s.modes, s.params, 1.0, TofScaling{}, s.dt);
    const double sigma_bg = 20.0;  // um^-1, about ten times the coherent momentum width
    for (auto& row : obs.density)
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double k = obs.k[i];
            const double bg = std::exp(-0.5 * k * k / (sigma_bg * sigma_bg)) / (std::sqrt(2.0 * std::numbers::pi) * sigma_bg);
            row[i] = 0.8 * row[i] + 0.2 * bg;
        }
    const auto fit = fit_populations(obs, s.modes, s.params, TofScaling{}, fast_fit());
    EXPECT_LT(fit.params.total(), 1.0);
    EXPECT_GE(fit.unexplained_fraction(), 0.15);
    EXPECT_LE(fit.unexplained_fraction(), 0.25);
}

TEST(FitPopulations, ImageAxisRescalingIsTransparent) {
    const auto& s = setup();
    const TofScaling scaling;
    const auto truth = params_of(0.4, 0.4, 0.2, 0.7, -0.3);
    const auto native = simulate_observation(truth, s.modes, s.params, 1.0, scaling, s.dt);
    MomentumTimeSeries image = native;
    for (double& k : image.k) k /= scaling.alpha();
    for (auto& row : image.density)
        for (double& v : row) v *= scaling.alpha();
    const auto a = fit_populations(native, s.modes, s.params, scaling, fast_fit());
    const auto b = fit_populations(image_to_momentum(image, scaling), s.modes, s.params, scaling, fast_fit());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.params.p[k], b.params.p[k], 1e-6);
    EXPECT_NEAR(a.params.theta01, b.params.theta01, 1e-6);
    EXPECT_NEAR(a.params.theta12, b.params.theta12, 1e-6);
}

TEST(FitPopulations, ConfidenceIntervalsCoverTruthUnderNoise) {
    const auto& s = setup();
    const auto truth = params_of(0.45, 0.35, 0.2, 0.8, -1.2);
    const auto clean = simulate_observation(truth, s.modes, s.params, 1.0, TofScaling{}, s.dt);
    double peak = 0.0;
    for (const auto& row : clean.density)
        for (double v : row) peak = std::max(peak, v);
    int covered = 0, total = 0;
    for (int seed = 0; seed < 6; ++seed) {
        std::mt19937_64 rng(500 + seed);
        std::normal_distribution<double> noise(0.0, 0.02 * peak);
        auto obs = clean;
        for (auto& row : obs.density)
            for (double& v : row) v += noise(rng);
        const auto fit = fit_populations(obs, s.modes, s.params, TofScaling{}, fast_fit());
        const std::array<double, 5> est{fit.params.p[0], fit.params.p[1], fit.params.p[2], fit.params.theta01, fit.params.theta12};
        const std::array<double, 5> tru{truth.p[0], truth.p[1], truth.p[2], truth.theta01, truth.theta12};
        for (int q = 0; q < 5; ++q) {
            const double d = q < 3 ? est[q] - tru[q] : wrap_phase(est[q] - tru[q]);
            covered += std::abs(d) <= fit.sigma[q];
            ++total;
        }
    }
    EXPECT_GE(covered, static_cast<int>(0.6 * total)) << covered << " of " << total;
}

TEST(FitPopulations, DegenerateDataRejected) {
    const auto& s = setup();
    MomentumTimeSeries zero;
    zero.k = s.grid.momenta_sorted();
    zero.times = {0.0, 0.05};
    zero.density.assign(2, std::vector<double>(zero.k.size(), 0.0));
    EXPECT_THROW(fit_populations(zero, s.modes, s.params, TofScaling{}, fast_fit()), std::invalid_argument);
}

TEST(SeriesIo, CsvAndBinaryRoundTrip) {
    const auto& s = setup();
    const auto obs = simulate_observation(params_of(0.5, 0.5, 0, 0.2, 0), s.modes, s.params, 0.2, TofScaling{}, s.dt);
    const auto csv = series_to_csv(obs);
    const auto back = series_from_csv(csv);
    EXPECT_EQ(back.k, obs.k);
    EXPECT_EQ(back.times, obs.times);
    EXPECT_EQ(back.density, obs.density);
    const auto bin = series_from_binary(series_to_binary(obs));
    EXPECT_EQ(bin.density, obs.density);
}

TEST(SeriesIo, MalformedRowsReportLine) {
    try {
        (void)series_from_csv("time_ms,-1,0,1\n0,0.1,0.2,0.3\n0.05,0.1,oops,0.3\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    try {
        (void)series_from_csv("time_ms,-1,0,1\n0,0.1,0.2\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW((void)series_from_csv(""), ParseError);
    EXPECT_THROW((void)series_from_binary("garbage"), ParseError);
}
