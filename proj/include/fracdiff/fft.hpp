#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace fracdiff {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Real-to-complex transform pair for one grid shape, with its own buffers.
class FftPlan {
public:
    FftPlan(int d, int n) : d_(d), n_(n) {
        real_size_ = d == 1 ? std::size_t(n) : std::size_t(n) * n;
        spec_size_ = d == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
        real_ = fftw_alloc_real(real_size_);
        spec_ = fftw_alloc_complex(spec_size_);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        if (d == 1) {
            fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
        } else {
            fwd_ = fftw_plan_dft_r2c_2d(n, n, real_, spec_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_2d(n, n, spec_, real_, FFTW_ESTIMATE);
        }
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t real_size() const { return real_size_; }
    std::size_t spectral_size() const { return spec_size_; }
    double* real() { return real_; }
    std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec_); }
    void forward() { fftw_execute(fwd_); }
    /// Unnormalized inverse; callers divide by real_size().
    void backward() { fftw_execute(bwd_); }

private:
    int d_, n_;
    std::size_t real_size_, spec_size_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

inline FftPlan& plan_for(int d, int n) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[{d, n}];
    if (!slot) slot = std::make_unique<FftPlan>(d, n);
    return *slot;
}

}  // namespace detail

/// Signed integer wavenumber of FFT index i on an n-point axis (Nyquist kept positive).
inline int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

/// |ξ| in cycles per unit length for each r2c spectral slot, in the FFTW half-spectrum layout.
inline std::vector<double> frequency_magnitudes(const Grid& g) {
    const double dk = 1.0 / (2.0 * g.L);
    const int nh = g.n / 2 + 1;
    std::vector<double> xi;
    if (g.d == 1) {
        xi.resize(nh);
        for (int k = 0; k < nh; ++k) xi[k] = k * dk;
    } else {
        xi.resize(std::size_t(g.n) * nh);
        for (int a = 0; a < g.n; ++a)
            for (int b = 0; b < nh; ++b)
                xi[std::size_t(a) * nh + b] = std::hypot(wavenumber(a, g.n) * dk, b * dk);
    }
    return xi;
}

/// Applies a real radial Fourier multiplier m(|ξ|) to f.
template <class Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& mult) {
    auto& plan = detail::plan_for(f.grid.d, f.grid.n);
    std::memcpy(plan.real(), f.values.data(), f.size() * sizeof(double));
    plan.forward();
    const auto xi = frequency_magnitudes(f.grid);
    auto* spec = plan.spectrum();
    const double scale = 1.0 / double(plan.real_size());
    for (std::size_t k = 0; k < plan.spectral_size(); ++k) spec[k] *= mult(xi[k]) * scale;
    plan.backward();
    Field out(f.grid);
    std::memcpy(out.values.data(), plan.real(), f.size() * sizeof(double));
    return out;
}

/// Forward transform of f into the half spectrum (unnormalized).
inline std::vector<std::complex<double>> forward_spectrum(const Field& f) {
    auto& plan = detail::plan_for(f.grid.d, f.grid.n);
    std::memcpy(plan.real(), f.values.data(), f.size() * sizeof(double));
    plan.forward();
    return {plan.spectrum(), plan.spectrum() + plan.spectral_size()};
}

/// Inverse of forward_spectrum, including the 1/N normalization.
inline Field inverse_spectrum(const Grid& g, const std::vector<std::complex<double>>& spec) {
    auto& plan = detail::plan_for(g.d, g.n);
    const double scale = 1.0 / double(plan.real_size());
    auto* dst = plan.spectrum();
    for (std::size_t k = 0; k < plan.spectral_size(); ++k) dst[k] = spec[k] * scale;
    plan.backward();
    Field out(g);
    std::memcpy(out.values.data(), plan.real(), out.size() * sizeof(double));
    return out;
}

}  // namespace fracdiff
