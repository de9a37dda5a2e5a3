#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fft.hpp"
#include "wavefunction.hpp"

namespace motional {

/// Wrap an angle into (-pi, pi].
inline double wrap_phase(double theta) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(theta, 2.0 * pi);  // [-pi, pi]
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

/// Momentum-space amplitudes in FFT order, scaled so that sum |phi(k)|^2 dk = sum |psi|^2 dy.
/// The phase reference is the first grid point.
inline std::vector<Complex> to_momentum_amplitudes(const Wavefunction& psi, const FourierTransform& fft) {
    std::vector<Complex> out(psi.amplitudes().begin(), psi.amplitudes().end());
    fft.forward(out);
    const double scale = psi.grid().dy() / std::sqrt(2.0 * std::numbers::pi);
    for (auto& a : out) a *= scale;
    return out;
}

inline Wavefunction from_momentum_amplitudes(const SpatialGrid& grid, std::vector<Complex> phi,
                                             const FourierTransform& fft) {
    fft.backward(phi);
    const double scale = std::sqrt(2.0 * std::numbers::pi) / (grid.dy() * static_cast<double>(grid.size()));
    for (auto& a : phi) a *= scale;
    return {grid, std::move(phi)};
}

/// |psi(k)|^2 on the increasing momentum grid SpatialGrid::momenta_sorted(); integrates to 1.
inline std::vector<double> to_momentum_density(const Wavefunction& psi, const FourierTransform& fft) {
    if (std::abs(psi.norm_squared() - 1.0) > 1e-6)
        throw std::invalid_argument("to_momentum_density: wavefunction is not normalized (norm^2 = " +
                                    std::to_string(psi.norm_squared()) + ")");
    const auto phi = to_momentum_amplitudes(psi, fft);
    const std::size_t n = phi.size();
    std::vector<double> rho(n);
    for (std::size_t j = 0; j < n; ++j) rho[j] = std::norm(phi[(j + n / 2) % n]);
    return rho;
}

inline std::vector<double> to_momentum_density(const Wavefunction& psi) {
    return to_momentum_density(psi, FourierTransform(psi.size()));
}

/// Occupations and relative phases of the three lowest modes.
struct SuperpositionParams {
    std::array<double, 3> p{1.0, 0.0, 0.0};
    double theta01 = 0.0;  ///< arg c1 - arg c0
    double theta12 = 0.0;  ///< arg c2 - arg c1

    double total() const { return p[0] + p[1] + p[2]; }

    void validate() const {
        for (double pk : p)
            if (!(pk >= 0.0 && pk <= 1.0)) throw std::invalid_argument("SuperpositionParams: p_k outside [0, 1]");
        if (total() > 1.0 + 1e-12) throw std::invalid_argument("SuperpositionParams: sum of p_k exceeds 1");
    }

    /// Mode coefficients sqrt(p_k) exp(i theta_k) with theta_0 = 0.
    std::array<Complex, 3> coefficients() const {
        return {Complex(std::sqrt(p[0]), 0.0), std::polar(std::sqrt(p[1]), theta01),
                std::polar(std::sqrt(p[2]), theta01 + theta12)};
    }
};

/// Builds sum_k sqrt(p_k) e^{i theta_k} |k> from the given modes.
inline Wavefunction compose_superposition(const SuperpositionParams& params, std::span<const Wavefunction> modes) {
    params.validate();
    if (modes.size() < 3) throw std::invalid_argument("compose_superposition: need three modes");
    const auto c = params.coefficients();
    Wavefunction psi(modes[0].grid());
    for (std::size_t k = 0; k < 3; ++k) psi.add_scaled(c[k], modes[k]);
    return psi;
}

struct ModeProjection {
    std::vector<double> populations;
    std::vector<double> phases;  ///< arg <phi_k|psi>, in (-pi, pi]
    double leakage = 0.0;        ///< 1 - sum p_k
};

/// Overlap (Gram) matrix S_ij = <phi_i|phi_j>.
inline Eigen::MatrixXcd overlap_matrix(std::span<const Wavefunction> basis) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) s(i, j) = inner_product(basis[i], basis[j]);
    return s;
}

/// Max |S - I| entry.
inline double orthonormality_deviation(std::span<const Wavefunction> basis) {
    const auto s = overlap_matrix(basis);
    return (s - Eigen::MatrixXcd::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

struct OrthonormalBasis {
    std::vector<Wavefunction> states;
    double input_deviation = 0.0;  ///< max |S - I| before orthonormalization
};

/// Symmetric (Loewdin) orthonormalization: phi'_i = sum_j phi_j (S^{-1/2})_{ji}.
inline OrthonormalBasis lowdin_orthonormalize(std::span<const Wavefunction> basis) {
    if (basis.empty()) throw std::invalid_argument("lowdin_orthonormalize: empty basis");
    const auto s = overlap_matrix(basis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
    if (eig.eigenvalues().minCoeff() <= 1e-12)
        throw std::invalid_argument("lowdin_orthonormalize: basis is linearly dependent");
    const Eigen::MatrixXcd s_inv_sqrt =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();

    OrthonormalBasis out;
    out.input_deviation = (s - Eigen::MatrixXcd::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        Wavefunction phi(basis[0].grid());
        for (std::size_t j = 0; j < basis.size(); ++j)
            phi.add_scaled(s_inv_sqrt(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)), basis[j]);
        out.states.push_back(std::move(phi));
    }
    return out;
}

/// p_k = |<phi_k|psi>|^2, theta_k = arg <phi_k|psi>.
inline ModeProjection project_populations(const Wavefunction& psi, std::span<const Wavefunction> basis) {
    if (basis.empty()) throw std::invalid_argument("project_populations: empty basis");
    if (std::abs(psi.norm_squared() - 1.0) > 1e-6)
        throw std::invalid_argument("project_populations: state is not normalized");
    const double dev = orthonormality_deviation(basis);
    if (dev > 1e-3)
        throw std::invalid_argument("project_populations: basis deviates from orthonormality by " +
                                    std::to_string(dev));
    ModeProjection out;
    double total = 0.0;
    for (const auto& phi : basis) {
        const Complex c = inner_product(phi, psi);
        out.populations.push_back(std::norm(c));
        out.phases.push_back(wrap_phase(std::arg(c)));
        total += std::norm(c);
    }
    out.leakage = 1.0 - total;
    return out;
}

}  // namespace motional
