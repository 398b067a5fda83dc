#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>

namespace facruin::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

RealFft::RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    auto* out = fftw_alloc_complex(n / 2 + 1);
    if (!in_ || !out) throw std::bad_alloc();
    out_ = out;
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), out, in_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
        fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    }
    fftw_free(in_);
    fftw_free(out_);
}

std::span<std::complex<double>> RealFft::spectrum() {
    return {reinterpret_cast<std::complex<double>*>(out_), n_ / 2 + 1};
}

void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }

void RealFft::backward() { fftw_execute(static_cast<fftw_plan>(bwd_)); }

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t len = a.size() + b.size() - 1;
    std::vector<double> out(len, 0.0);
    if (std::min(a.size(), b.size()) <= 64) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) continue;
            for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        }
        return out;
    }
    const std::size_t n = next_pow2(len);
    RealFft fa(n), fb(n);
    std::fill(fa.real().begin(), fa.real().end(), 0.0);
    std::fill(fb.real().begin(), fb.real().end(), 0.0);
    std::copy(a.begin(), a.end(), fa.real().begin());
    std::copy(b.begin(), b.end(), fb.real().begin());
    fa.forward();
    fb.forward();
    auto sa = fa.spectrum();
    auto sb = fb.spectrum();
    for (std::size_t k = 0; k < sa.size(); ++k) sa[k] *= sb[k];
    fa.backward();
    for (std::size_t i = 0; i < len; ++i) out[i] = fa.real()[i] / static_cast<double>(n);
    return out;
}

}  // namespace facruin::detail
