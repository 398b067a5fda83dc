#pragma once

// Globally adaptive 21-point Gauss-Kronrod integration (QUADPACK qk21 rule),
// scalar and vector-valued. Vector integrands share one subdivision so that
// several moments of the same integrand cost one set of evaluations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace facruin {

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_subdivisions = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct VectorQuadratureResult {
    std::vector<double> value;
    std::vector<double> abs_error;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 11> kGk21Nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

inline constexpr std::array<double, 11> kGk21Weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

inline constexpr std::array<double, 5> kGauss10Weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double a;
    double b;
    std::vector<double> value;
    std::vector<double> error;
};

// Applies the qk21 rule on [a, b] for every component of a dim-sized integrand.
template <class F>
void gk21(F& f, std::size_t dim, Segment& seg, std::vector<double>& fc,
          std::vector<double>& f1, std::vector<double>& f2, std::vector<double>& resg,
          std::vector<double>& resabs, std::vector<double>& resasc,
          std::vector<std::array<double, 21>>& samples) {
    const double centre = 0.5 * (seg.a + seg.b);
    const double half = 0.5 * (seg.b - seg.a);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();

    seg.value.assign(dim, 0.0);
    seg.error.assign(dim, 0.0);
    std::fill(resg.begin(), resg.end(), 0.0);
    std::fill(resabs.begin(), resabs.end(), 0.0);

    f(centre, std::span<double>(fc));
    for (std::size_t i = 0; i < dim; ++i) {
        seg.value[i] = kGk21Weights[10] * fc[i];
        resabs[i] = kGk21Weights[10] * std::abs(fc[i]);
        samples[i][10] = fc[i];
    }
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kGk21Nodes[j];
        f(centre - dx, std::span<double>(f1));
        f(centre + dx, std::span<double>(f2));
        for (std::size_t i = 0; i < dim; ++i) {
            const double sum = f1[i] + f2[i];
            seg.value[i] += kGk21Weights[j] * sum;
            resabs[i] += kGk21Weights[j] * (std::abs(f1[i]) + std::abs(f2[i]));
            if (j % 2 == 1) resg[i] += kGauss10Weights[j / 2] * sum;
            samples[i][j] = f1[i];
            samples[i][20 - j] = f2[i];
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        const double mean = 0.5 * seg.value[i];
        double asc = kGk21Weights[10] * std::abs(fc[i] - mean);
        for (int j = 0; j < 10; ++j) {
            asc += kGk21Weights[j] *
                   (std::abs(samples[i][j] - mean) + std::abs(samples[i][20 - j] - mean));
        }
        resasc[i] = asc * std::abs(half);
        const double absval = resabs[i] * std::abs(half);
        double err = std::abs((seg.value[i] - resg[i]) * half);
        if (resasc[i] != 0.0 && err != 0.0) {
            err = resasc[i] * std::min(1.0, std::pow(200.0 * err / resasc[i], 1.5));
        }
        if (absval > tiny / (50.0 * eps)) err = std::max(50.0 * eps * absval, err);
        seg.value[i] *= half;
        seg.error[i] = err;
    }
}

}  // namespace detail

/// Integrates a vector-valued function f(x, out) over [a, b]. Convergence
/// requires every component to meet max(abs_tol, rel_tol * |value|).
template <class F>
VectorQuadratureResult integrate_vector(F&& f, std::size_t dim, double a, double b,
                                        const QuadratureOptions& opts = {}) {
    VectorQuadratureResult out;
    out.value.assign(dim, 0.0);
    out.abs_error.assign(dim, 0.0);
    if (a == b || dim == 0) {
        out.converged = true;
        return out;
    }

    std::vector<double> fc(dim), f1(dim), f2(dim), resg(dim), resabs(dim), resasc(dim);
    std::vector<std::array<double, 21>> samples(dim);
    std::vector<detail::Segment> segs;
    segs.reserve(64);
    segs.push_back({a, b, {}, {}});
    detail::gk21(f, dim, segs.back(), fc, f1, f2, resg, resabs, resasc, samples);
    out.evaluations = 21;

    auto totals = [&] {
        std::fill(out.value.begin(), out.value.end(), 0.0);
        std::fill(out.abs_error.begin(), out.abs_error.end(), 0.0);
        for (const auto& s : segs) {
            for (std::size_t i = 0; i < dim; ++i) {
                out.value[i] += s.value[i];
                out.abs_error[i] += s.error[i];
            }
        }
    };
    std::vector<double> tol(dim);
    for (int iter = 0;; ++iter) {
        totals();
        bool done = true;
        for (std::size_t i = 0; i < dim; ++i) {
            tol[i] = std::max(opts.abs_tol, opts.rel_tol * std::abs(out.value[i]));
            if (!(out.abs_error[i] <= tol[i])) done = false;
        }
        if (done) {
            out.converged = true;
            return out;
        }
        if (iter >= opts.max_subdivisions) return out;

        std::size_t worst = 0;
        double worst_score = -1.0;
        for (std::size_t k = 0; k < segs.size(); ++k) {
            double score = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                const double scale = tol[i] > 0.0 ? tol[i] : std::numeric_limits<double>::min();
                score = std::max(score, segs[k].error[i] / scale);
            }
            if (score > worst_score) {
                worst_score = score;
                worst = k;
            }
        }
        const double mid = 0.5 * (segs[worst].a + segs[worst].b);
        if (!(mid > segs[worst].a && mid < segs[worst].b)) return out;  // exhausted precision
        detail::Segment right{mid, segs[worst].b, {}, {}};
        segs[worst].b = mid;
        detail::gk21(f, dim, segs[worst], fc, f1, f2, resg, resabs, resasc, samples);
        detail::gk21(f, dim, right, fc, f1, f2, resg, resabs, resasc, samples);
        segs.push_back(std::move(right));
        out.evaluations += 42;
    }
}

/// Scalar convenience wrapper around integrate_vector.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
    auto wrapped = [&f](double x, std::span<double> out) { out[0] = f(x); };
    const auto r = integrate_vector(wrapped, 1, a, b, opts);
    return {r.value[0], r.abs_error[0], r.evaluations, r.converged};
}

}  // namespace facruin
