#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "motional/gpe.hpp"
#include "motional/ramsey.hpp"
#include "motional/stationary.hpp"

using namespace motional;

namespace {

GpeParams harmonic_params(double nu) {
    GpeParams p;
    p.potential = PotentialSpec::harmonic(nu);
    return p;
}

double max_diff(const Wavefunction& a, const Wavefunction& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

}  // namespace

TEST(GpeParams, Validation) {
    GpeParams p;
    p.g_n = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = GpeParams{};
    p.atom_number = 0.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_THROW(SplitStepPropagator(SpatialGrid::standard(), GpeParams{}, 2e-3), std::invalid_argument);
}

TEST(Propagator, GroundStateIsInvariant) {
    const SpatialGrid g(-4, 4, 256);
    for (double gn : {0.0, 0.415}) {
        const auto params = GpeParams{}.with_g_n(gn);
        const auto set = solve_stationary(g, params, 1);
        SplitStepPropagator prop(g, params);
        Wavefunction psi = set.states[0];
        prop.evolve(psi, nullptr, 1.0);
        EXPECT_NEAR(std::norm(inner_product(set.states[0], psi)), 1.0, 1e-6) << "gN = " << gn;
    }
}

TEST(Propagator, HarmonicSuddenDisplacementFollowsClassicalPath) {
    // Trap displaced to lambda at t = 0; in the trap frame the state starts at -lambda.
    const auto g = SpatialGrid::standard();
    const double nu = 1.83, lambda = 0.5;
    const auto params = harmonic_params(nu);
    const double l = std::sqrt(2.0 * params.kinetic_coefficient() / nu);  // rms of |psi|^2 is l / sqrt 2
    const auto start = Wavefunction::gaussian(g, l / std::sqrt(2.0), -lambda);
    SplitStepPropagator prop(g, params);
    const auto traj = prop.propagate(start, nullptr, 2.0, 0.05);
    for (const auto& s : traj.samples) {
        const double lab = lambda + mean_position(s.state);
        ASSERT_NEAR(lab, lambda * (1.0 - std::cos(2.0 * std::numbers::pi * nu * s.time)), 1e-4) << "t = " << s.time;
    }
}

TEST(Propagator, BalancedSuperpositionPeriodMatchesLevelSpacing) {
    const SpatialGrid g(-4, 4, 256);
    const GpeParams params;  // gN = 0
    const auto set = solve_stationary(g, params, 2);
    const auto psi = ((1.0 / std::sqrt(2.0)) * (set.states[0] + set.states[1]));
    SplitStepPropagator prop(g, params);
    const auto traj = prop.propagate(psi, nullptr, 1.2, 0.05);
    const double period = relative_phase_period(traj, set.states[0], set.states[1]);
    EXPECT_NEAR(period, 1.0 / set.e01(), 1e-3 / set.e01());
}

TEST(Propagator, NormDriftPerStep) {
    const auto g = SpatialGrid::standard();
    const auto params = GpeParams{}.with_g_n(0.415);
    SplitStepPropagator prop(g, params);
    Wavefunction psi = Wavefunction::gaussian(g, 0.2, 0.3, 5.0);
    std::vector<FourierComponent> comps{{0.3, 0.1, 1.0}, {0.2, -1.0, 1.0}};
    const ControlWaveform w(1.0, comps);
    double prev = psi.norm_squared();
    for (int s = 0; s < 200; ++s) {
        prop.evolve(psi, &w, prop.dt(), s * prop.dt());
        const double now = psi.norm_squared();
        ASSERT_LE(std::abs(now - prev), 1e-12);
        prev = now;
    }
}

TEST(Propagator, EnergyConservedOverFiveMs) {
    const auto g = SpatialGrid::standard();
    const auto params = GpeParams{}.with_g_n(0.415);
    const GpeOperator op(g, params);
    SplitStepPropagator prop(g, params);
    Wavefunction psi = Wavefunction::gaussian(g, 0.2, 0.25);
    const double e0 = op.energy(psi);
    prop.evolve(psi, nullptr, 5.0);
    EXPECT_LT(std::abs(op.energy(psi) - e0) / std::abs(e0), 1e-4);
}

TEST(Propagator, SecondOrderInTimeStep) {
    const SpatialGrid g(-4, 4, 256);
    const auto params = GpeParams{}.with_g_n(0.415);
    const ControlWaveform w(0.4, {{0.3, 0.2, 1.0}, {0.1, 1.0, 1.0}});
    auto run = [&](double dt) {
        SplitStepPropagator prop(g, params, dt);
        Wavefunction psi = Wavefunction::gaussian(g, 0.2);
        prop.evolve(psi, &w, 0.4);
        return psi;
    };
    const auto ref = run(1e-3 / 64);
    const double e1 = max_diff(run(1e-3), ref);
    const double e2 = max_diff(run(0.5e-3), ref);
    const double e3 = max_diff(run(0.25e-3), ref);
    EXPECT_NEAR(e1 / e2, 4.0, 0.4);
    EXPECT_NEAR(e2 / e3, 4.0, 0.4);
}

TEST(Propagator, NanAbortsWithDiagnostic) {
    const SpatialGrid g(-4, 4, 64);
    SplitStepPropagator prop(g, GpeParams{});
    Wavefunction psi = Wavefunction::gaussian(g, 0.2);
    psi[10] = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    try {
        prop.evolve(psi, nullptr, 0.1);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("t ="), std::string::npos) << e.what();
    }
}

TEST(Propagator, TrajectorySampling) {
    const SpatialGrid g(-4, 4, 64);
    SplitStepPropagator prop(g, GpeParams{});
    const auto psi = Wavefunction::gaussian(g, 0.2);
    const auto traj = prop.propagate(psi, nullptr, 1.0);
    ASSERT_EQ(traj.samples.size(), 21u);
    EXPECT_DOUBLE_EQ(traj.samples.back().time, 1.0);
    EXPECT_NEAR(traj.samples[7].time, 0.35, 1e-12);
    auto bad = psi;
    bad *= Complex(2.0);
    EXPECT_THROW(prop.propagate(bad, nullptr, 1.0), std::invalid_argument);
}
