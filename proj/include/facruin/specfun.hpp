#pragma once

#include <span>
#include <vector>

namespace facruin::specfun {

/// Tolerance and series cap shared by the scalar special functions.
struct FnEvalOptions {
    double rel_tol = 1e-10;
    int max_terms = 500;

    /// Throws DomainError unless rel_tol is in (0, 1e-3] and max_terms >= 16.
    void validate() const;
};

/// log Γ(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

/// Euler beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y) for x, y > 0.
double beta(double x, double y);

/// Lower incomplete gamma γ(s, x) = ∫₀ˣ t^{s-1} e^{-t} dt for s > 0, x >= 0.
///
/// Uses the power series below x = s + 1 and the Lentz continued fraction for
/// Γ(s, x) above it.
double lower_incomplete_gamma(double s, double x, const FnEvalOptions& opts = {});

/// Gauss hypergeometric ₂F₁(a, b; c; z) for real arguments and -1 < z < 1.
///
/// The defining series is summed for |z| <= 0.5. For z > 0.5 the 1-z
/// connection formula is used; for z < -0.5 the Pfaff transformation. Throws
/// DomainError for |z| >= 1 or c a nonpositive integer and AccuracyError when
/// the series does not converge within max_terms or when the connection
/// formula is unavailable (c-a-b within 1e-3 of an integer).
double gauss_2f1(double a, double b, double c, double z, const FnEvalOptions& opts = {});

/// Direct summation of the ₂F₁ series, any |z| < 1. Exposed for cross-checks.
double gauss_2f1_series(double a, double b, double c, double z, const FnEvalOptions& opts = {});

/// The 1-z connection formula path of gauss_2f1, valid for 0 <= z < 1.
double gauss_2f1_connection(double a, double b, double c, double z,
                            const FnEvalOptions& opts = {});

/// Monomial coefficients ζ_{n,0..n} of the Jacobi polynomial P_n^{(a,b)}(x),
/// orthogonal on [-1, 1] under the weight (1-x)^a (1+x)^b. Requires a, b > -1.
std::vector<double> jacobi_poly_coeffs(int n, double a, double b);

/// Evaluates P_n^{(a,b)}(x) by the three-term recurrence.
double jacobi_eval(int n, double a, double b, double x);

/// Horner evaluation of Σ c_k x^k.
double poly_eval(std::span<const double> coeffs, double x);

}  // namespace facruin::specfun
