#include "facruin/moments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "facruin/error.hpp"
#include "facruin/quadrature.hpp"

namespace facruin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFadingCutoff = 60.0;  // e^{-60} of the unit exponential mark

double binomial(int n, int k) {
    double out = 1.0;
    for (int j = 1; j <= k; ++j) out = out * (n - k + j) / j;
    return out;
}

// Binomial convolution of two raw-moment sequences that include the zeroth moment.
std::vector<double> moment_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t j = 0; j <= k; ++j) {
            out[k] += binomial(static_cast<int>(k), static_cast<int>(j)) * a[j] * b[k - j];
        }
    }
    return out;
}

std::string describe(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

double laplace_exponent(double x, double alpha, const specfun::FnEvalOptions& opts) {
    if (!(x >= 0.0)) throw DomainError("laplace_exponent requires x >= 0");
    if (!(alpha > 2.0)) throw DomainError("alpha must exceed 2");
    if (x == 0.0) return 0.0;
    const double z = x / (1.0 + x);
    const double delta = 2.0 / alpha;
    const double f = specfun::gauss_2f1(1.0, 2.0, 2.0 - delta, z, opts);
    // x/(1+x)^2 = z(1-z), kept in that form so large x does not overflow.
    return -z + z * (1.0 - z) / (1.0 - delta) * f;
}

double laplace_exponent_quadrature(double x, double alpha, double rel_tol) {
    if (!(x >= 0.0)) throw DomainError("laplace_exponent requires x >= 0");
    if (!(alpha > 2.0)) throw DomainError("alpha must exceed 2");
    if (x == 0.0) return 0.0;
    // Interferer distance ratio s = t^{-k/α} maps [1, ∞) onto (0, 1] and
    // removes the algebraic tail; k = α/(α-2).
    const double k = alpha / (alpha - 2.0);
    const double p = -2.0 / (alpha - 2.0) - 1.0;
    QuadratureOptions inner_opts{rel_tol * 0.1, 0.0, 4000};
    QuadratureOptions outer_opts{rel_tol, 0.0, 4000};
    auto inner = [&](double g) {
        auto f = [&](double t) {
            if (t <= 0.0) return x * g;
            return -std::expm1(-x * g * std::pow(t, k)) * std::pow(t, p);
        };
        const auto r = integrate(f, 0.0, 1.0, inner_opts);
        if (!r.converged) throw AccuracyError("interference quadrature (inner) did not converge");
        return k / alpha * r.value;
    };
    auto outer = [&](double g) { return std::exp(-g) * inner(g); };
    const auto r = integrate(outer, 0.0, kFadingCutoff, outer_opts);
    if (!r.converged) {
        std::ostringstream diag;
        diag << "x=" << x << " alpha=" << alpha << " err=" << r.abs_error;
        throw AccuracyError("interference quadrature (outer) did not converge", diag.str());
    }
    return 2.0 * r.value;
}

double conditional_a_coef(double rate_gap, double r_u, const NetworkParams& net) {
    return net.p_i * rate_gap * std::pow(r_u, net.alpha) / net.p0;
}

double interference_laplace(double u_var, double a_coef, double r_u, const NetworkParams& net,
                            const specfun::FnEvalOptions& opts) {
    if (!(u_var >= 0.0)) throw DomainError("transform variable must be nonnegative");
    if (!(r_u > 0.0)) throw DomainError("serving distance must be positive");
    if (!(a_coef >= 0.0)) throw DomainError("A must be nonnegative");
    if (u_var == 0.0 || a_coef == 0.0) return 1.0;
    const double x = a_coef * u_var * std::pow(r_u, -net.alpha);
    double phi = 0.0;
    try {
        phi = laplace_exponent(x, net.alpha, opts);
    } catch (const AccuracyError&) {
        phi = laplace_exponent_quadrature(x, net.alpha, opts.rel_tol);
    }
    return std::exp(-kPi * net.beta * r_u * r_u * phi);
}

double interference_laplace_quadrature(double u_var, double a_coef, double r_u, const NetworkParams& net,
                                       double rel_tol) {
    if (!(u_var >= 0.0)) throw DomainError("transform variable must be nonnegative");
    if (!(r_u > 0.0)) throw DomainError("serving distance must be positive");
    if (u_var == 0.0 || a_coef == 0.0) return 1.0;
    const double x = a_coef * u_var * std::pow(r_u, -net.alpha);
    return std::exp(-kPi * net.beta * r_u * r_u * laplace_exponent_quadrature(x, net.alpha, rel_tol));
}

std::vector<double> single_slot_moments(int s_max, double a_coef, double r_u, const FinancialParams& fin,
                                        const NetworkParams& net, double rel_tol) {
    if (s_max < 1) throw DomainError("moment order must be at least 1");
    if (!(fin.c_min > 0.0 && fin.c_min <= fin.c_max)) throw DomainError("require 0 < c_min <= c_max");
    const double tr = fin.premium_rate * net.slot_duration;
    std::vector<double> out(s_max);
    if (fin.c_min == fin.c_max) {
        for (int s = 1; s <= s_max; ++s) out[s - 1] = std::pow(fin.c_min * tr, s);
        return out;
    }

    const specfun::FnEvalOptions fn_opts{std::min(1e-10, rel_tol), 500};
    const double scale = kPi * net.beta * r_u * r_u;
    const double x_per_u = a_coef * std::pow(r_u, -net.alpha);
    const double noise_per_u = a_coef * net.sigma2 / net.p_i;
    // m_s = (Tρ)^s [c_min^s + s ∫ u^{-s-1} (1 - L(u)) du] over u in [1/c_max, 1/c_min],
    // integrated in log u.
    auto integrand = [&](double log_u, std::span<double> res) {
        const double u = std::exp(log_u);
        double phi = 0.0;
        const double x = x_per_u * u;
        try {
            phi = laplace_exponent(x, net.alpha, fn_opts);
        } catch (const AccuracyError&) {
            phi = laplace_exponent_quadrature(x, net.alpha, fn_opts.rel_tol);
        }
        const double tail = -std::expm1(-(scale * phi + noise_per_u * u));
        double upow = 1.0;
        for (int s = 1; s <= s_max; ++s) {
            upow /= u;
            res[s - 1] = s * upow * tail;
        }
    };
    QuadratureOptions q{rel_tol, 0.0, 2000};
    const auto r = integrate_vector(integrand, s_max, -std::log(fin.c_max), -std::log(fin.c_min), q);
    if (!r.converged) {
        std::ostringstream diag;
        diag << "A=" << a_coef << " r=" << r_u << " err[0]=" << r.abs_error[0];
        throw AccuracyError("conditional moment integral did not converge", diag.str());
    }
    for (int s = 1; s <= s_max; ++s) {
        out[s - 1] = std::pow(tr, s) * (std::pow(fin.c_min, s) + r.value[s - 1]);
    }
    return out;
}

std::vector<double> e_derivatives_at_zero(int s_max, double a_coef, double r_u, const FinancialParams& fin,
                                          const NetworkParams& net, double rel_tol) {
    const auto m = single_slot_moments(s_max, a_coef, r_u, fin, net, rel_tol);
    std::vector<double> out(s_max + 1);
    out[0] = 1.0;
    for (int s = 1; s <= s_max; ++s) out[s] = (s % 2 == 0 ? 1.0 : -1.0) * m[s - 1];
    return out;
}

std::vector<double> duration_sum_moments(std::span<const double> single, int tau) {
    if (tau < 1) throw DomainError("duration must be at least 1");
    std::vector<double> base(single.size() + 1);
    base[0] = 1.0;
    std::copy(single.begin(), single.end(), base.begin() + 1);
    std::vector<double> acc(base.size(), 0.0);
    acc[0] = 1.0;
    for (int n = tau; n > 0; n >>= 1) {
        if (n & 1) acc = moment_convolve(acc, base);
        if (n > 1) base = moment_convolve(base, base);
    }
    return {acc.begin() + 1, acc.end()};
}

double distance_cutoff(double beta) {
    if (!(beta > 0.0)) throw DomainError("density must be positive");
    return std::sqrt(std::log(1e12) / (kPi * beta));
}

MomentVector revenue_moments(const ScenarioConfig& config, int interval_index) {
    return revenue_moments(config, interval_index, config.numerics.moment_order);
}

MomentVector revenue_moments(const ScenarioConfig& config, int interval_index, int order) {
    if (order < 1) throw DomainError("moment order must be at least 1");
    const DurationPmf dur = duration_pmf(config, interval_index);
    const auto& net = config.network;
    const auto& fin = config.financial;
    const auto& prod = config.products;
    MomentVector out;
    out.interval_index = interval_index;

    auto mix_over_duration = [&](const std::vector<double>& single, std::span<double> acc, double weight) {
        for (std::size_t k = 0; k < dur.prob.size(); ++k) {
            if (dur.prob[k] == 0.0) continue;
            const auto sum = duration_sum_moments(single, dur.tau_min + static_cast<int>(k));
            for (int s = 0; s < order; ++s) acc[s] += weight * dur.prob[k] * sum[s];
        }
    };

    if (fin.c_min == fin.c_max) {
        const std::vector<double> single = single_slot_moments(order, 1.0, 1.0, fin, net);
        out.raw.assign(order, 0.0);
        mix_over_duration(single, out.raw, 1.0);
        return out;
    }

    const double inner_tol = std::max(1e-13, 0.1 * config.numerics.rel_tol);
    auto integrand = [&](double z, std::span<double> res) {
        std::fill(res.begin(), res.end(), 0.0);
        const double density = nearest_distance_pdf(z, net.beta);
        if (density == 0.0) return;
        for (std::size_t q = 0; q < prod.q_count(); ++q) {
            if (prod.product_mix[q] == 0.0) continue;
            std::vector<double> single;
            try {
                single = single_slot_moments(order, conditional_a_coef(prod.rate_gaps[q], z, net), z, fin, net,
                                             inner_tol);
            } catch (const AccuracyError& e) {
                throw AccuracyError("revenue moment integrand failed",
                                    "q=" + std::to_string(q + 1) + " z=" + describe(z) + ": " + e.what());
            }
            mix_over_duration(single, res, density * prod.product_mix[q]);
        }
    };
    QuadratureOptions q{config.numerics.rel_tol, 0.0, 2000};
    const double z_cut = distance_cutoff(net.beta);
    const auto r = integrate_vector(integrand, order, 0.0, z_cut, q);
    if (!r.converged) {
        std::ostringstream diag;
        diag << "interval=" << interval_index << " z in [0, " << z_cut << "] err[0]=" << r.abs_error[0]
             << " value[0]=" << r.value[0];
        throw AccuracyError("distance integral did not converge", diag.str());
    }
    out.raw = r.value;
    return out;
}

}  // namespace facruin
