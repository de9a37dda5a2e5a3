#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace motional {

using Complex = std::complex<double>;

/// Complex amplitudes (um^-1/2) sampled on a SpatialGrid.
class Wavefunction {
public:
    explicit Wavefunction(SpatialGrid grid) : grid_(grid), amplitudes_(grid.size()) {}

    Wavefunction(SpatialGrid grid, std::vector<Complex> amplitudes)
        : grid_(grid), amplitudes_(std::move(amplitudes)) {
        if (amplitudes_.size() != grid_.size())
            throw std::invalid_argument("Wavefunction: amplitude count does not match grid");
    }

    template <typename F>
    static Wavefunction from_function(const SpatialGrid& grid, F&& f) {
        std::vector<Complex> a(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) a[j] = Complex(f(grid.position(j)));
        return {grid, std::move(a)};
    }

    /// Gaussian centred at y0 whose density has rms width sigma.
    static Wavefunction gaussian(const SpatialGrid& grid, double sigma, double y0 = 0.0, double k0 = 0.0) {
        auto psi = from_function(grid, [&](double y) {
            const double u = (y - y0) / sigma;
            return std::exp(-0.25 * u * u) * std::polar(1.0, k0 * y);
        });
        psi.normalize();
        return psi;
    }

    const SpatialGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return amplitudes_.size(); }

    std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    std::span<Complex> amplitudes() noexcept { return amplitudes_; }

    const Complex& operator[](std::size_t j) const noexcept { return amplitudes_[j]; }
    Complex& operator[](std::size_t j) noexcept { return amplitudes_[j]; }

    double norm_squared() const noexcept {
        double s = 0.0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return s * grid_.dy();
    }

    double norm() const noexcept { return std::sqrt(norm_squared()); }

    void normalize() {
        const double n = norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("Wavefunction: cannot normalize zero/non-finite state");
        for (auto& a : amplitudes_) a /= n;
    }

    Wavefunction normalized() const {
        Wavefunction copy(*this);
        copy.normalize();
        return copy;
    }

    bool is_finite() const noexcept {
        return std::all_of(amplitudes_.begin(), amplitudes_.end(),
                           [](const Complex& a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); });
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (const auto& a : amplitudes_) m = std::max(m, std::abs(a));
        return m;
    }

    Wavefunction& operator*=(Complex c) {
        for (auto& a : amplitudes_) a *= c;
        return *this;
    }

    Wavefunction& operator+=(const Wavefunction& other) {
        require_same_grid(other);
        for (std::size_t j = 0; j < size(); ++j) amplitudes_[j] += other.amplitudes_[j];
        return *this;
    }

    /// this += c * other
    Wavefunction& add_scaled(Complex c, const Wavefunction& other) {
        require_same_grid(other);
        for (std::size_t j = 0; j < size(); ++j) amplitudes_[j] += c * other.amplitudes_[j];
        return *this;
    }

    void require_same_grid(const Wavefunction& other) const {
        if (!(grid_ == other.grid_)) throw std::invalid_argument("Wavefunction: grid mismatch");
    }

private:
    SpatialGrid grid_;
    std::vector<Complex> amplitudes_;
};

inline Wavefunction operator*(Complex c, Wavefunction psi) { return psi *= c; }

inline Wavefunction operator+(Wavefunction a, const Wavefunction& b) { return a += b; }

/// <a|b> = sum conj(a_j) b_j dy
inline Complex inner_product(const Wavefunction& a, const Wavefunction& b) {
    a.require_same_grid(b);
    Complex s{0.0, 0.0};
    const auto x = a.amplitudes();
    const auto y = b.amplitudes();
    for (std::size_t j = 0; j < x.size(); ++j) s += std::conj(x[j]) * y[j];
    return s * a.grid().dy();
}

/// Expectation value of a real function of position.
template <typename F>
double expectation_in_position(const Wavefunction& psi, F&& f) {
    double s = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) s += f(psi.grid().position(j)) * std::norm(psi[j]);
    return s * psi.grid().dy();
}

inline double mean_position(const Wavefunction& psi) {
    return expectation_in_position(psi, [](double y) { return y; });
}

}  // namespace motional
