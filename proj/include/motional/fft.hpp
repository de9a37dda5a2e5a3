#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>

#include <fftw3.h>

namespace motional {

/// In-place unnormalized complex DFT of a fixed length, backed by FFTW.
/// Plans are built with FFTW_ESTIMATE so results are bit-reproducible run to run.
class FourierTransform {
public:
    explicit FourierTransform(std::size_t n) : n_(n) {
        // The FFTW planner is not thread-safe; execution is.
        static std::mutex planner_mutex;
        std::lock_guard lock(planner_mutex);
        auto* scratch = fftw_alloc_complex(n);
        const int len = static_cast<int>(n);
        forward_.reset(fftw_plan_dft_1d(len, scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED));
        backward_.reset(fftw_plan_dft_1d(len, scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED));
        fftw_free(scratch);
        if (!forward_ || !backward_) throw std::runtime_error("FourierTransform: FFTW planning failed");
    }

    std::size_t size() const noexcept { return n_; }

    /// X_k = sum_j x_j exp(-2 pi i jk/n)
    void forward(std::span<std::complex<double>> data) const { execute(forward_.get(), data); }

    /// x_j = sum_k X_k exp(+2 pi i jk/n), no 1/n factor.
    void backward(std::span<std::complex<double>> data) const { execute(backward_.get(), data); }

private:
    struct PlanDeleter {
        void operator()(fftw_plan_s* p) const noexcept {
            if (p) fftw_destroy_plan(p);
        }
    };
    using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

    void execute(fftw_plan plan, std::span<std::complex<double>> data) const {
        if (data.size() != n_) throw std::invalid_argument("FourierTransform: length mismatch");
        auto* p = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan, p, p);
    }

    std::size_t n_;
    Plan forward_;
    Plan backward_;
};

}  // namespace motional
