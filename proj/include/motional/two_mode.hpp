#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavefunction.hpp"

namespace motional {

/// Density-density overlaps U_ij = g1d/2 int |phi_i|^2 |phi_j|^2 dy, as E/h in Hz.
struct OverlapIntegrals {
    double u00 = 0.0;
    double u11 = 0.0;
    double u01 = 0.0;
};

/// `g1d_hz_um` is the 1D coupling as E/h in Hz um. Periodic grid, so the trapezoidal rule is the plain sum.
inline OverlapIntegrals overlap_integrals(const Wavefunction& phi0, const Wavefunction& phi1, double g1d_hz_um) {
    phi0.require_same_grid(phi1);
    double s00 = 0.0, s11 = 0.0, s01 = 0.0;
    for (std::size_t j = 0; j < phi0.size(); ++j) {
        const double a = std::norm(phi0[j]);
        const double b = std::norm(phi1[j]);
        s00 += a * a;
        s11 += b * b;
        s01 += a * b;
    }
    const double scale = 0.5 * g1d_hz_um * phi0.grid().dy();
    return {scale * s00, scale * s11, scale * s01};
}

/// Two-mode model constants. Derived quantities follow the model identities
///   dE = E01 - (N - 1)(U00 - U11),   U = U00 + U11 - 2 U01.
class TwoModeConstants {
public:
    TwoModeConstants(double e01_khz, OverlapIntegrals u_hz, double atom_number)
        : e01_(e01_khz), u_(u_hz), n_(atom_number) {
        if (!(atom_number >= 1.0)) throw std::invalid_argument("TwoModeConstants: N must be >= 1");
        delta_e_ = e01_ - (n_ - 1.0) * (u_.u00 - u_.u11) * 1e-3;
        u_total_ = u_.u00 + u_.u11 - 2.0 * u_.u01;
    }

    double e01() const noexcept { return e01_; }          ///< kHz
    const OverlapIntegrals& overlaps() const noexcept { return u_; }
    double atom_number() const noexcept { return n_; }
    double delta_e() const noexcept { return delta_e_; }  ///< kHz
    double u() const noexcept { return u_total_; }        ///< Hz

private:
    double e01_;
    OverlapIntegrals u_;
    double n_;
    double delta_e_ = 0.0;
    double u_total_ = 0.0;
};

/// Binomial number fluctuation Delta J_z = sqrt(N)/2.
inline double binomial_delta_jz(double atom_number) { return 0.5 * std::sqrt(atom_number); }

/// Phase-diffusion rate R = 2 Delta J_z U / hbar in mrad/ms (equivalently rad/s), U as E/h in Hz.
inline double phase_diffusion_rate(const TwoModeConstants& c, double delta_jz) {
    if (delta_jz < 0.0) throw std::invalid_argument("phase_diffusion_rate: Delta J_z must be >= 0");
    return 2.0 * delta_jz * 2.0 * std::numbers::pi * c.u();
}

/// State of N bosons in two modes; index n = occupation of mode 1, J_z = n - N/2.
class SpinState {
public:
    using Vector = Eigen::VectorXcd;

    SpinState(int atom_number, Vector amplitudes) : n_(atom_number), a_(std::move(amplitudes)) {
        if (atom_number < 1) throw std::invalid_argument("SpinState: N must be >= 1");
        if (a_.size() != atom_number + 1) throw std::invalid_argument("SpinState: need N + 1 amplitudes");
        if (std::abs(a_.norm() - 1.0) > 1e-10) throw std::invalid_argument("SpinState: state is not normalized");
    }

    /// Binomial (spin-coherent) state with polar angle theta from the mode-0 pole and azimuth phi.
    static SpinState coherent(int atom_number, double theta, double phi) {
        Vector a(atom_number + 1);
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        for (int n = 0; n <= atom_number; ++n) {
            // sqrt(binomial(N, n)) c^(N-n) s^n in log space
            const double log_mag = 0.5 * (std::lgamma(atom_number + 1.0) - std::lgamma(n + 1.0) -
                                          std::lgamma(atom_number - n + 1.0)) +
                                   (atom_number - n) * safe_log(c) + n * safe_log(s);
            a(n) = std::polar(std::exp(log_mag), n * phi);
        }
        a /= a.norm();
        return {atom_number, std::move(a)};
    }

    /// Equator state (|0> + e^{i phi}|1>)^N / norm.
    static SpinState equator(int atom_number, double phi = 0.0) {
        return coherent(atom_number, std::numbers::pi / 2.0, phi);
    }

    int atom_number() const noexcept { return n_; }
    const Vector& amplitudes() const noexcept { return a_; }

    double jz() const {
        double s = 0.0;
        for (int n = 0; n <= n_; ++n) s += std::norm(a_(n)) * (n - 0.5 * n_);
        return s;
    }

    /// <J_+> with J_+ = a1^dag a0 = J_x + i J_y.
    std::complex<double> j_plus() const {
        std::complex<double> s{0.0, 0.0};
        for (int n = 0; n < n_; ++n)
            s += std::conj(a_(n + 1)) * a_(n) * std::sqrt((n + 1.0) * (n_ - n));
        return s;
    }

    double jx() const { return j_plus().real(); }
    double jy() const { return j_plus().imag(); }
    /// <J_x>^2 + <J_y>^2
    double coherence() const { return std::norm(j_plus()); }

private:
    static double safe_log(double x) { return x > 0.0 ? std::log(x) : -1e300; }

    int n_;
    Vector a_;
};

/// H = dE J_z + U J_z^2 + 4 U01 J_x^2 in the Dicke basis, in kHz. Real symmetric.
inline Eigen::MatrixXd two_mode_hamiltonian(const TwoModeConstants& c, int atom_number) {
    const int dim = atom_number + 1;
    const double u = c.u() * 1e-3;
    const double u01 = c.overlaps().u01 * 1e-3;
    Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n < atom_number; ++n) {
        const double v = 0.5 * std::sqrt((n + 1.0) * (atom_number - n));
        jx(n + 1, n) = v;
        jx(n, n + 1) = v;
    }
    Eigen::MatrixXd h = 4.0 * u01 * (jx * jx);
    for (int n = 0; n < dim; ++n) {
        const double jz = n - 0.5 * atom_number;
        h(n, n) += c.delta_e() * jz + u * jz * jz;
    }
    return h;
}

inline constexpr int kMaxDenseAtoms = 200;

/// Exact evolution exp(-2 pi i H t) |initial>, t in ms.
inline SpinState evolve_two_mode(const SpinState& initial, const TwoModeConstants& c, double t_ms) {
    const int n = initial.atom_number();
    if (n > kMaxDenseAtoms)
        throw std::invalid_argument("evolve_two_mode: N = " + std::to_string(n) + " exceeds the dense limit of " +
                                    std::to_string(kMaxDenseAtoms) + "; reduce N");
    const Eigen::MatrixXd h = two_mode_hamiltonian(c, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const Eigen::MatrixXcd v = eig.eigenvectors().cast<std::complex<double>>();
    Eigen::VectorXcd coeff = v.adjoint() * initial.amplitudes();
    for (Eigen::Index k = 0; k < coeff.size(); ++k)
        coeff(k) *= std::polar(1.0, -2.0 * std::numbers::pi * eig.eigenvalues()(k) * t_ms);
    Eigen::VectorXcd out = v * coeff;
    out /= out.norm();
    return {n, std::move(out)};
}

/// Coherence <J_x>^2 + <J_y>^2 sampled at the given times (one diagonalization).
inline std::vector<double> coherence_series(const SpinState& initial, const TwoModeConstants& c,
                                            std::span<const double> times) {
    const int n = initial.atom_number();
    if (n > kMaxDenseAtoms) throw std::invalid_argument("coherence_series: N exceeds the dense limit; reduce N");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(two_mode_hamiltonian(c, n));
    const Eigen::MatrixXcd v = eig.eigenvectors().cast<std::complex<double>>();
    const Eigen::VectorXcd c0 = v.adjoint() * initial.amplitudes();
    std::vector<double> out;
    for (double t : times) {
        Eigen::VectorXcd ct = c0;
        for (Eigen::Index k = 0; k < ct.size(); ++k)
            ct(k) *= std::polar(1.0, -2.0 * std::numbers::pi * eig.eigenvalues()(k) * t);
        out.push_back(SpinState(n, v * ct).coherence());
    }
    return out;
}

}  // namespace motional
