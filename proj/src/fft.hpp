#pragma once

// Thin RAII wrapper over FFTW real transforms. Planning is serialized because
// the FFTW planner is not thread-safe; execution is.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace facruin::detail {

std::size_t next_pow2(std::size_t n);

class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }
    std::span<double> real() { return {in_, n_}; }
    std::span<std::complex<double>> spectrum();

    void forward();
    /// Unnormalized inverse: real() receives n times the true result.
    void backward();

private:
    std::size_t n_;
    double* in_;
    void* out_;
    void* fwd_;
    void* bwd_;
};

/// Linear convolution; switches to FFT above a small-size threshold.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace facruin::detail
