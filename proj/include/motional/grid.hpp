#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace motional {

/// Uniform periodic 1D grid y_j = y_min + j dy, j = 0..n-1, with its conjugate
/// momentum grid in FFT order (non-negative wave numbers first).
class SpatialGrid {
public:
    SpatialGrid(double y_min, double y_max, std::size_t n_points)
        : y_min_(y_min), y_max_(y_max), n_(n_points) {
        if (!(y_max > y_min) || !std::isfinite(y_min) || !std::isfinite(y_max))
            throw std::invalid_argument("SpatialGrid: require finite y_max > y_min");
        if (n_points < 16 || !std::has_single_bit(n_points))
            throw std::invalid_argument("SpatialGrid: n_points must be a power of two >= 16, got " +
                                        std::to_string(n_points));
        dy_ = (y_max - y_min) / static_cast<double>(n_points);
    }

    /// Default extent used throughout: [-4, 4) um on 1024 points.
    static SpatialGrid standard() { return {-4.0, 4.0, 1024}; }

    double y_min() const noexcept { return y_min_; }
    double y_max() const noexcept { return y_max_; }
    std::size_t size() const noexcept { return n_; }
    double dy() const noexcept { return dy_; }
    double dk() const noexcept { return 2.0 * std::numbers::pi / (static_cast<double>(n_) * dy_); }
    double k_max() const noexcept { return std::numbers::pi / dy_; }

    double position(std::size_t j) const noexcept { return y_min_ + static_cast<double>(j) * dy_; }

    /// Wave number of FFT bin j.
    double momentum(std::size_t j) const noexcept {
        const auto signed_j = j < n_ / 2 ? static_cast<double>(j)
                                         : static_cast<double>(j) - static_cast<double>(n_);
        return signed_j * dk();
    }

    std::vector<double> positions() const {
        std::vector<double> y(n_);
        for (std::size_t j = 0; j < n_; ++j) y[j] = position(j);
        return y;
    }

    std::vector<double> momenta() const {
        std::vector<double> k(n_);
        for (std::size_t j = 0; j < n_; ++j) k[j] = momentum(j);
        return k;
    }

    /// Momentum grid sorted increasingly, -k_max .. k_max - dk.
    std::vector<double> momenta_sorted() const {
        std::vector<double> k(n_);
        for (std::size_t j = 0; j < n_; ++j)
            k[j] = (static_cast<double>(j) - static_cast<double>(n_ / 2)) * dk();
        return k;
    }

    friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

private:
    double y_min_;
    double y_max_;
    std::size_t n_;
    double dy_ = 0.0;
};

}  // namespace motional
