#pragma once

#include <span>
#include <vector>

#include "facruin/model.hpp"
#include "facruin/specfun.hpp"

namespace facruin {

/// Raw moments E[V^s], s = 1..d, of the revenue of a connection ending in an interval.
struct MomentVector {
    int interval_index = 1;
    std::vector<double> raw;  // raw[s-1] = E[V^s]

    int order() const { return static_cast<int>(raw.size()); }
};

/// Φ(x) such that E_I[exp(-A I u)] = exp(-πβ r² Φ(x)) with x = A u r^{-α}.
double laplace_exponent(double x, double alpha, const specfun::FnEvalOptions& opts = {});

/// Φ(x) by adaptive quadrature over the fading mark g and the interferer distance.
double laplace_exponent_quadrature(double x, double alpha, double rel_tol = 1e-10);

/// E_I[exp(-A I u)] for interferers of unit power beyond the serving distance r_u.
///
/// Closed form through the Gauss hypergeometric function; falls back to the
/// two-dimensional quadrature when the series route reports an accuracy failure.
double interference_laplace(double u_var, double a_coef, double r_u, const NetworkParams& net,
                            const specfun::FnEvalOptions& opts = {});

/// The same transform evaluated only by two-dimensional quadrature.
double interference_laplace_quadrature(double u_var, double a_coef, double r_u, const NetworkParams& net,
                                       double rel_tol = 1e-10);

/// A = P_I A_d r^α / P₀.
double conditional_a_coef(double rate_gap, double r_u, const NetworkParams& net);

/// E^{(s)}(0), s = 0..s_max, of E(t) = E[exp(-t c Tρ) | A], for the serving
/// distance r_u. Single-slot moments are (-1)^s E^{(s)}(0).
std::vector<double> e_derivatives_at_zero(int s_max, double a_coef, double r_u, const FinancialParams& fin,
                                          const NetworkParams& net, double rel_tol = 1e-8);

/// Single-slot moments E[(c Tρ)^s], s = 1..s_max, conditional on A and r_u.
std::vector<double> single_slot_moments(int s_max, double a_coef, double r_u, const FinancialParams& fin,
                                        const NetworkParams& net, double rel_tol = 1e-8);

/// Raw moments of the sum of tau i.i.d. copies of a variable with raw moments m[0..d-1].
std::vector<double> duration_sum_moments(std::span<const double> single, int tau);

/// E[V_i^s] for s = 1..moment_order, by the nested expectation over product,
/// duration and serving distance.
MomentVector revenue_moments(const ScenarioConfig& config, int interval_index);

/// Moments for moment_order overridden by order.
MomentVector revenue_moments(const ScenarioConfig& config, int interval_index, int order);

/// Distance beyond which the nearest-cell tail mass falls below 1e-12.
double distance_cutoff(double beta);

}  // namespace facruin
