#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "facruin/moments.hpp"

namespace facruin {

inline constexpr double kSanitizeWarnMass = 0.02;
inline constexpr double kSanitizeRejectMass = 0.1;

/// Polynomial-times-weight approximation of an income density on [v_lo, v_hi].
///
/// On the unit variable w = 2(v - v_lo)/(v_hi - v_lo) - 1 the raw density is
/// K(w) p(w), K(w) = (1+w)^{a-1}(1-w)^{b-1} / (B(a,b) 2^{a+b-1}),
/// p(w) = Σ a_n P_n(w). Sanitized densities clip K p at zero and divide by
/// 1 + sanitized_mass.
struct ExpandedDensity {
    double v_lo = 0.0;
    double v_hi = 1.0;
    int order = 0;
    double jacobi_a = 1.0;
    double jacobi_b = 1.0;
    std::vector<double> coeffs;       // a_0..a_d
    std::vector<double> poly;         // p(w), monomial coefficients
    std::vector<double> weight_poly;  // K(w) when a and b are integers, else empty
    std::vector<double> mass_poly;    // antiderivative of K p vanishing at -1, same condition
    bool sanitized = false;
    double sanitized_mass = 0.0;
    std::vector<std::pair<double, double>> positive_pieces;  // w-intervals where p >= 0
    std::optional<double> point_mass;                        // degenerate income
    std::vector<std::string> warnings;
};

/// Moments E[W^s], s = 1..d, of W = 2(V - v_lo)/(v_hi - v_lo) - 1.
std::vector<double> affine_to_unit(std::span<const double> raw_moments, double v_lo, double v_hi);

/// a_0..a_d with a_n = b_n Σ_s ζ_{n,s} E[W^s] and E[W^0] = 1.
std::vector<double> expansion_coeffs(std::span<const double> unit_moments, int order, double a, double b);

/// Normalizing factor b_n = B(a,b) 2^{a+b-1} / ∫ (1+w)^{a-1}(1-w)^{b-1} P_n².
double expansion_prefactor(int n, double a, double b);

/// The unsanitized expansion, kept for diagnostics.
ExpandedDensity raw_expansion(const MomentVector& moments, double v_lo, double v_hi, int order, double a,
                              double b);

/// Clips negative lobes and renormalizes. Throws AccuracyError when the removed
/// mass exceeds kSanitizeRejectMass.
ExpandedDensity sanitize(ExpandedDensity raw);

/// raw_expansion followed by sanitize; degenerate inputs give a point mass.
ExpandedDensity expand_income(const MomentVector& moments, double v_lo, double v_hi, int order, double a = 1.0,
                              double b = 1.0);

ExpandedDensity point_mass_density(double v0);

/// Density of W at w in [-1, 1] after sanitization (raw K p if unsanitized).
double eval_unit_pdf(const ExpandedDensity& density, double w);
double eval_unit_cdf(const ExpandedDensity& density, double w);

double eval_income_pdf(const ExpandedDensity& density, double v);
double eval_income_cdf(const ExpandedDensity& density, double v);

/// Real roots of the polynomial in the open interval (lo, hi), ascending.
std::vector<double> polynomial_roots(std::span<const double> coeffs, double lo, double hi);

}  // namespace facruin
