#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "motional/stationary.hpp"

using namespace motional;

namespace {

// Independent oracle: second-order finite-difference Hamiltonian diagonalized densely.
std::vector<double> finite_difference_levels(const PotentialSpec& v, double c, double half_width, int n, int count) {
    const double h = 2.0 * half_width / (n + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double y = -half_width + (i + 1) * h;
        H(i, i) = 2.0 * c / (h * h) + v.confined(y);
        if (i + 1 < n) H(i, i + 1) = H(i + 1, i) = -c / (h * h);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
    return {eig.eigenvalues().data(), eig.eigenvalues().data() + count};
}

}  // namespace

TEST(Stationary, HarmonicLevels) {
    const auto g = SpatialGrid::standard();
    GpeParams p;
    p.potential = PotentialSpec::harmonic(1.83);
    const auto set = solve_stationary(g, p, 3);
    for (int n = 0; n < 3; ++n) EXPECT_NEAR(set.energies[n], (n + 0.5) * 1.83, 1e-3 * 1.83);
    EXPECT_NEAR(set.e01(), 1.83, 1.83e-3);
    EXPECT_NEAR(set.e12(), 1.83, 1.83e-3);
    for (double r : set.residuals) EXPECT_LE(r, 1e-6);
}

TEST(Stationary, SexticAgreesWithFiniteDifferenceOracle) {
    const auto g = SpatialGrid::standard();
    const GpeParams p;
    const auto set = solve_stationary(g, p, 3);
    const auto fd = finite_difference_levels(p.potential, p.kinetic_coefficient(), 3.0, 1500, 3);
    EXPECT_NEAR(set.e01(), fd[1] - fd[0], 1e-3 * set.e01());
    EXPECT_NEAR(set.e12(), fd[2] - fd[1], 1e-3 * set.e12());
    // values of the literal coefficients
    EXPECT_NEAR(set.e01(), 1.7602, 1e-3);
    EXPECT_NEAR(set.e12(), 1.9185, 1e-3);
    for (double r : set.residuals) EXPECT_LE(r, 1e-6);
}

TEST(Stationary, GridConvergence) {
    const GpeParams p;
    const auto fine = solve_stationary(SpatialGrid(-4, 4, 1024), p, 2);
    const auto coarse = solve_stationary(SpatialGrid(-4, 4, 512), p, 2);
    EXPECT_LT(std::abs(fine.e01() - coarse.e01()) / fine.e01(), 1e-3);
}

TEST(Stationary, QuarticZSpacing) {
    GpeParams p;
    p.potential = PotentialSpec::quartic_z();
    const auto set = solve_stationary(SpatialGrid::standard(), p, 2);
    EXPECT_NEAR(set.e01(), 2.58, 0.01 * 2.58);
}

TEST(Stationary, InteractingResidualsAndOrdering) {
    const SpatialGrid g(-4, 4, 256);
    const auto set = solve_stationary(g, GpeParams{}.with_g_n(0.415), 3);
    EXPECT_LE(set.residuals[0], 1e-6);
    EXPECT_LE(set.residuals[1], 1e-4);
    EXPECT_LE(set.residuals[2], 1e-4);
    EXPECT_LT(set.energies[0], set.energies[1]);
    EXPECT_LT(set.energies[1], set.energies[2]);
    EXPECT_LT(orthonormality_deviation(set.states), 1e-8);
}

TEST(Stationary, SeedIndependence) {
    const SpatialGrid g(-4, 4, 256);
    StationaryOptions random;
    random.seed = SeedKind::Random;
    for (double gn : {0.0, 0.415}) {
        const auto a = solve_stationary(g, GpeParams{}.with_g_n(gn), 3);
        const auto b = solve_stationary(g, GpeParams{}.with_g_n(gn), 3, random);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.energies[k], b.energies[k], 1e-8) << "gN " << gn << " level " << k;
    }
}

TEST(Stationary, Preconditions) {
    const SpatialGrid g(-4, 4, 64);
    EXPECT_THROW(solve_stationary(g, GpeParams{}, 6), std::invalid_argument);
    EXPECT_THROW(solve_stationary(g, GpeParams{}, 0), std::invalid_argument);
    StationaryOptions tiny;
    tiny.max_steps = 3;
    try {
        (void)solve_stationary(g, GpeParams{}, 1, tiny);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_GT(e.last_residual(), 0.0);
    }
}

TEST(Calibration, InteractionFreeLimit) {
    const SpatialGrid g(-4, 4, 128);
    const auto free = solve_stationary(g, GpeParams{}, 1);
    const auto cal = calibrate_nonlinearity(g, GpeParams{}, free.energies[0]);
    EXPECT_EQ(cal.g_n, 0.0);
    EXPECT_THROW(calibrate_nonlinearity(g, GpeParams{}, free.energies[0] - 0.1), std::invalid_argument);
    EXPECT_THROW(calibrate_nonlinearity(g, GpeParams{}, 0.6), std::invalid_argument);
}

TEST(Calibration, RoundTripAboveGround) {
    const SpatialGrid g(-4, 4, 256);
    const auto cal = calibrate_nonlinearity(g, GpeParams{}, 0.6, MuReference::AboveNonInteractingGround);
    EXPECT_GT(cal.g_n, 0.0);
    const auto again = solve_stationary(g, GpeParams{}.with_g_n(cal.g_n), 1);
    EXPECT_NEAR(again.energies[0] - cal.ground_energy_free, 0.6, 1e-3);
}

TEST(Calibration, ChemicalPotentialIsMonotone) {
    const SpatialGrid g(-4, 4, 128);
    double prev = -1.0;
    for (double gn : {0.0, 0.1, 0.2, 0.4, 0.8, 1.6}) {
        const double mu = solve_stationary(g, GpeParams{}.with_g_n(gn), 1).energies[0];
        EXPECT_GT(mu, prev);
        prev = mu;
    }
}
