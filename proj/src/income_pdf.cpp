#include "facruin/income_pdf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "facruin/error.hpp"
#include "facruin/quadrature.hpp"
#include "facruin/specfun.hpp"

namespace facruin {

namespace {

bool is_positive_integer(double x) { return x >= 1.0 && x == std::nearbyint(x); }

double binomial(int n, int k) {
    double out = 1.0;
    for (int j = 1; j <= k; ++j) out = out * (n - k + j) / j;
    return out;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> poly_pow(const std::vector<double>& base, int n) {
    std::vector<double> out{1.0};
    for (int i = 0; i < n; ++i) out = poly_mul(out, base);
    return out;
}

double weight_norm(double a, double b) { return specfun::beta(a, b) * std::exp2(a + b - 1.0); }

double weight(const ExpandedDensity& d, double w) {
    return std::pow(1.0 + w, d.jacobi_a - 1.0) * std::pow(1.0 - w, d.jacobi_b - 1.0) /
           weight_norm(d.jacobi_a, d.jacobi_b);
}

double raw_unit_pdf(const ExpandedDensity& d, double w) {
    return weight(d, w) * specfun::poly_eval(d.poly, w);
}

// ∫_lo^hi K p over a subinterval of [-1, 1].
double piece_integral(const ExpandedDensity& d, double lo, double hi) {
    if (hi <= lo) return 0.0;
    if (!d.mass_poly.empty()) return specfun::poly_eval(d.mass_poly, hi) - specfun::poly_eval(d.mass_poly, lo);
    const auto r = integrate([&d](double w) { return raw_unit_pdf(d, w); }, lo, hi, {1e-12, 1e-15, 4000});
    return r.value;
}

}  // namespace

std::vector<double> affine_to_unit(std::span<const double> raw, double v_lo, double v_hi) {
    if (!(v_hi > v_lo)) throw DomainError("support requires v_lo < v_hi");
    const double scale = 2.0 / (v_hi - v_lo);
    const double shift = -2.0 * v_lo / (v_hi - v_lo) - 1.0;
    const int d = static_cast<int>(raw.size());
    std::vector<double> out(d);
    for (int s = 1; s <= d; ++s) {
        double acc = std::pow(shift, s);
        for (int j = 1; j <= s; ++j) acc += binomial(s, j) * std::pow(scale, j) * std::pow(shift, s - j) * raw[j - 1];
        if (std::abs(acc) > 1.0 + 1e-9) {
            std::ostringstream os;
            os << "E[W^" << s << "] = " << acc << " lies outside [-1, 1]; moments inconsistent with support ["
               << v_lo << ", " << v_hi << "]";
            throw DomainError(os.str());
        }
        out[s - 1] = acc;
    }
    return out;
}

double expansion_prefactor(int n, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("Jacobi weight parameters must be positive");
    if (n < 0) throw DomainError("degree must be nonnegative");
    if (n == 0) return 1.0;
    using specfun::log_gamma;
    const double log_b = log_gamma(a) + log_gamma(b) - log_gamma(a + b) + std::log(2.0 * n + a + b - 1.0) +
                         log_gamma(n + a + b - 1.0) + log_gamma(n + 1.0) - log_gamma(n + a) - log_gamma(n + b);
    return std::exp(log_b);
}

std::vector<double> expansion_coeffs(std::span<const double> unit_moments, int order, double a, double b) {
    if (order < 0) throw DomainError("order must be nonnegative");
    if (static_cast<int>(unit_moments.size()) < order) throw DomainError("not enough moments for the order");
    std::vector<double> out(order + 1);
    for (int n = 0; n <= order; ++n) {
        // The weight (1+w)^{a-1}(1-w)^{b-1} is the standard Jacobi weight with
        // the parameters swapped and shifted by one.
        const auto zeta = specfun::jacobi_poly_coeffs(n, b - 1.0, a - 1.0);
        double acc = zeta[0];
        for (int s = 1; s <= n; ++s) acc += zeta[s] * unit_moments[s - 1];
        out[n] = expansion_prefactor(n, a, b) * acc;
    }
    return out;
}

ExpandedDensity raw_expansion(const MomentVector& moments, double v_lo, double v_hi, int order, double a, double b) {
    if (order > moments.order()) throw DomainError("expansion order exceeds the available moments");
    ExpandedDensity d;
    d.v_lo = v_lo;
    d.v_hi = v_hi;
    d.order = order;
    d.jacobi_a = a;
    d.jacobi_b = b;
    const auto unit = affine_to_unit(std::span<const double>(moments.raw).first(order), v_lo, v_hi);
    d.coeffs = expansion_coeffs(unit, order, a, b);
    d.poly.assign(order + 1, 0.0);
    for (int n = 0; n <= order; ++n) {
        const auto zeta = specfun::jacobi_poly_coeffs(n, b - 1.0, a - 1.0);
        for (int s = 0; s <= n; ++s) d.poly[s] += d.coeffs[n] * zeta[s];
    }
    if (is_positive_integer(a) && is_positive_integer(b)) {
        auto k = poly_mul(poly_pow({1.0, 1.0}, static_cast<int>(a) - 1), poly_pow({1.0, -1.0}, static_cast<int>(b) - 1));
        for (auto& c : k) c /= weight_norm(a, b);
        d.weight_poly = k;
        const auto kp = poly_mul(k, d.poly);
        d.mass_poly.assign(kp.size() + 1, 0.0);
        for (std::size_t i = 0; i < kp.size(); ++i) d.mass_poly[i + 1] = kp[i] / static_cast<double>(i + 1);
        d.mass_poly[0] = -specfun::poly_eval(d.mass_poly, -1.0);
    }
    d.positive_pieces = {{-1.0, 1.0}};
    return d;
}

std::vector<double> polynomial_roots(std::span<const double> coeffs, double lo, double hi) {
    std::size_t n = coeffs.size();
    while (n > 0 && coeffs[n - 1] == 0.0) --n;
    if (n <= 1) return {};
    std::vector<double> deriv(n - 1);
    for (std::size_t i = 1; i < n; ++i) deriv[i - 1] = coeffs[i] * static_cast<double>(i);
    const auto p = coeffs.first(n);

    // Critical points split [lo, hi] into pieces on which p is monotone.
    std::vector<double> marks{lo};
    for (double c : polynomial_roots(deriv, lo, hi)) marks.push_back(c);
    marks.push_back(hi);

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        double x0 = marks[i], x1 = marks[i + 1];
        double f0 = specfun::poly_eval(p, x0), f1 = specfun::poly_eval(p, x1);
        if (i > 0 && f0 == 0.0) {
            if (roots.empty() || roots.back() != x0) roots.push_back(x0);
            continue;
        }
        if (f0 * f1 >= 0.0) continue;
        for (int it = 0; it < 200 && x1 - x0 > 4e-16 * std::max(1.0, std::abs(x0)); ++it) {
            const double mid = 0.5 * (x0 + x1);
            const double fm = specfun::poly_eval(p, mid);
            if (fm == 0.0) {
                x0 = x1 = mid;
                break;
            }
            if ((fm < 0.0) == (f0 < 0.0)) {
                x0 = mid;
                f0 = fm;
            } else {
                x1 = mid;
            }
        }
        roots.push_back(0.5 * (x0 + x1));
    }
    return roots;
}

ExpandedDensity sanitize(ExpandedDensity d) {
    if (d.point_mass) {
        d.sanitized = true;
        return d;
    }
    std::vector<double> marks{-1.0};
    for (double r : polynomial_roots(d.poly, -1.0, 1.0)) marks.push_back(r);
    marks.push_back(1.0);
    double negative = 0.0;
    d.positive_pieces.clear();
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        const double lo = marks[i], hi = marks[i + 1];
        if (specfun::poly_eval(d.poly, 0.5 * (lo + hi)) >= 0.0) {
            if (!d.positive_pieces.empty() && d.positive_pieces.back().second == lo) {
                d.positive_pieces.back().second = hi;
            } else {
                d.positive_pieces.emplace_back(lo, hi);
            }
        } else {
            negative -= piece_integral(d, lo, hi);
        }
    }
    d.sanitized = true;
    d.sanitized_mass = std::max(0.0, negative);
    if (d.sanitized_mass > kSanitizeRejectMass) {
        std::ostringstream os;
        os << "sanitized_mass=" << d.sanitized_mass << " order=" << d.order;
        throw AccuracyError("income expansion rejected: negative lobes exceed 0.1; raise the moment order", os.str());
    }
    if (d.sanitized_mass > kSanitizeWarnMass) {
        std::ostringstream os;
        os << "income expansion clipped negative mass " << d.sanitized_mass << " at order " << d.order;
        d.warnings.push_back(os.str());
    }
    return d;
}

ExpandedDensity point_mass_density(double v0) {
    ExpandedDensity d;
    d.v_lo = d.v_hi = v0;
    d.point_mass = v0;
    d.sanitized = true;
    d.coeffs = {1.0};
    return d;
}

ExpandedDensity expand_income(const MomentVector& moments, double v_lo, double v_hi, int order, double a, double b) {
    if (moments.order() < 1) throw DomainError("at least one moment is required");
    const double mean = moments.raw[0];
    const double span = v_hi - v_lo;
    if (span <= 1e-12 * std::max(1.0, std::abs(v_hi))) return point_mass_density(mean);
    if (moments.order() >= 2) {
        const double var = moments.raw[1] - mean * mean;
        if (var <= 1e-14 * span * span) return point_mass_density(mean);
    }
    return sanitize(raw_expansion(moments, v_lo, v_hi, order, a, b));
}

double eval_unit_pdf(const ExpandedDensity& d, double w) {
    if (d.point_mass || w < -1.0 || w > 1.0) return 0.0;
    const double v = raw_unit_pdf(d, w);
    if (!d.sanitized) return v;
    return std::max(v, 0.0) / (1.0 + d.sanitized_mass);
}

double eval_unit_cdf(const ExpandedDensity& d, double w) {
    if (w <= -1.0) return 0.0;
    if (w >= 1.0) return 1.0;
    double acc = 0.0;
    for (const auto& [lo, hi] : d.positive_pieces) {
        if (lo >= w) break;
        acc += piece_integral(d, lo, std::min(hi, w));
    }
    if (!d.sanitized) return acc;
    return std::clamp(acc / (1.0 + d.sanitized_mass), 0.0, 1.0);
}

double eval_income_pdf(const ExpandedDensity& d, double v) {
    if (d.point_mass || v < d.v_lo || v > d.v_hi) return 0.0;
    const double w = 2.0 * (v - d.v_lo) / (d.v_hi - d.v_lo) - 1.0;
    return 2.0 / (d.v_hi - d.v_lo) * eval_unit_pdf(d, w);
}

double eval_income_cdf(const ExpandedDensity& d, double v) {
    if (d.point_mass) return v >= *d.point_mass ? 1.0 : 0.0;
    if (v <= d.v_lo) return 0.0;
    if (v >= d.v_hi) return 1.0;
    return eval_unit_cdf(d, 2.0 * (v - d.v_lo) / (d.v_hi - d.v_lo) - 1.0);
}

}  // namespace facruin
