#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <utility>

namespace isac::detail {

/**
 * Cached FFTW plans, one per (size, direction). Plans are created with
 * FFTW_ESTIMATE (deterministic plan choice) and execute out-of-place on
 * internal fftw_malloc'd buffers so caller alignment never changes results.
 * The cache is thread_local because the FFTW planner is not thread-safe.
 */
class FftPlan {
public:
    FftPlan(int n, int sign) : n_(n) {
        in_ = fftw_alloc_complex(static_cast<size_t>(n));
        out_ = fftw_alloc_complex(static_cast<size_t>(n));
        plan_ = fftw_plan_dft_1d(n, in_, out_, sign, FFTW_ESTIMATE);
    }
    ~FftPlan() {
        if (plan_) fftw_destroy_plan(plan_);
        if (in_) fftw_free(in_);
        if (out_) fftw_free(out_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void execute(std::complex<double>* data) const {
        std::memcpy(in_, data, sizeof(fftw_complex) * n_);
        fftw_execute(plan_);
        std::memcpy(data, out_, sizeof(fftw_complex) * n_);
    }

private:
    int n_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

inline const FftPlan& plan_for(int n, int sign) {
    thread_local std::map<std::pair<int, int>, FftPlan> cache;
    auto it = cache.find({n, sign});
    if (it == cache.end())
        it = cache.try_emplace({n, sign}, n, sign).first;
    return it->second;
}

/// In-place unnormalized DFT, exp(-j2*pi*mn/N) kernel.
inline void fft_forward(std::complex<double>* data, int n) {
    plan_for(n, FFTW_FORWARD).execute(data);
}

/// In-place unnormalized inverse DFT, exp(+j2*pi*mn/N) kernel.
inline void fft_backward(std::complex<double>* data, int n) {
    plan_for(n, FFTW_BACKWARD).execute(data);
}

}  // namespace isac::detail
