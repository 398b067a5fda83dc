#include "facruin/ruin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "facruin/error.hpp"
#include "fft.hpp"

namespace facruin {

namespace {

constexpr double kSnap = 1e-9;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Splits t into floor and fraction, snapping to the nearest integer when within kSnap.
std::pair<std::int64_t, double> split(double t) {
    const double nearest = std::nearbyint(t);
    if (std::abs(t - nearest) < kSnap * std::max(1.0, std::abs(t))) return {static_cast<std::int64_t>(nearest), 0.0};
    const double fl = std::floor(t);
    return {static_cast<std::int64_t>(fl), t - fl};
}

struct Kernel {
    const LatticePMF* g;
    int sub;                     // grid points per lattice step
    std::vector<double> above;   // above[k - kmin] = Σ_{k' > k} g(k')

    Kernel(const LatticePMF& pmf, int sub_steps) : g(&pmf), sub(sub_steps), above(pmf.mass.size(), 0.0) {
        double acc = 0.0;
        for (std::size_t j = pmf.mass.size(); j-- > 0;) {
            above[j] = acc;
            acc += pmf.mass[j];
        }
    }

    double tail_above(std::int64_t k) const {
        if (k < g->min_index) return g->total();
        if (k >= g->max_index()) return 0.0;
        return above[static_cast<std::size_t>(k - g->min_index)];
    }
};

// D[i] = Σ_k g(k) χ_ext[i + k·sub] for i = 0..count-1, where χ_ext is zero
// below the grid and frozen at χ[J] above it.
std::vector<double> correlate(const std::vector<double>& chi, const Kernel& ker, std::int64_t count) {
    const LatticePMF& g = *ker.g;
    const std::int64_t sub = ker.sub;
    const std::int64_t len = (g.max_index() - g.min_index) * sub + 1;
    std::vector<double> rev(static_cast<std::size_t>(len), 0.0);
    for (std::size_t j = 0; j < g.mass.size(); ++j) rev[static_cast<std::size_t>(len - 1 - static_cast<std::int64_t>(j) * sub)] = g.mass[j];
    const auto conv = detail::convolve(chi, rev);
    const auto top = static_cast<std::int64_t>(chi.size()) - 1;
    std::vector<double> out(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        const std::int64_t s = len - 1 + i + g.min_index * sub;
        double v = (s >= 0 && s < static_cast<std::int64_t>(conv.size())) ? conv[static_cast<std::size_t>(s)] : 0.0;
        v += chi.back() * ker.tail_above(floor_div(top - i, sub));
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

// One backward interval: χ_new(x_j) = Σ_y g(y) χ̃((1+r) x_j + y).
std::vector<double> apply_interval(const std::vector<double>& chi, const Kernel& ker, double growth, double& bound) {
    const auto top = static_cast<std::int64_t>(chi.size()) - 1;
    const auto count = static_cast<std::int64_t>(std::floor(growth * static_cast<double>(top))) + 3;
    const auto d = correlate(chi, ker, count);
    const LatticePMF& g = *ker.g;
    std::vector<double> out(chi.size());
    double step_bound = 0.0;
    for (std::int64_t j = 0; j <= top; ++j) {
        const auto [i, theta] = split(growth * static_cast<double>(j));
        const double lo = d[static_cast<std::size_t>(i)];
        if (theta == 0.0) {
            out[static_cast<std::size_t>(j)] = lo;
            continue;
        }
        double hi = d[static_cast<std::size_t>(i + 1)];
        // The cell just below zero capital is ruin, not an interpolation between 0 and χ(0).
        if ((i + 1) % ker.sub == 0) hi -= g.at(-(i + 1) / ker.sub) * chi[0];
        out[static_cast<std::size_t>(j)] = (1.0 - theta) * lo + theta * hi;
        step_bound = std::max(step_bound, std::abs(d[static_cast<std::size_t>(i + 1)] - lo));
    }
    bound += step_bound + (1.0 - chi.back());
    return out;
}

// Exact first interval at capital u given the survival χ of the later intervals.
double first_interval(double u, double r, const LatticePMF& g, const std::vector<double>& chi, double h,
                      double& bound) {
    const auto top = static_cast<std::int64_t>(chi.size()) - 1;
    double acc = 0.0, local = 0.0;
    for (std::size_t j = 0; j < g.mass.size(); ++j) {
        const double p = g.mass[j];
        if (p == 0.0) continue;
        const double z = (1.0 + r) * u + static_cast<double>(g.min_index + static_cast<std::int64_t>(j)) * g.step;
        auto [i, theta] = split(z / h);
        if (i < 0) continue;
        // Without interest χ only jumps at lattice points, which are grid points.
        if (r == 0.0) theta = 0.0;
        if (i >= top) {
            acc += p * chi.back();
            continue;
        }
        const double c0 = chi[static_cast<std::size_t>(i)], c1 = chi[static_cast<std::size_t>(i + 1)];
        acc += p * ((1.0 - theta) * c0 + theta * c1);
        if (theta > 0.0) local += p * std::abs(c1 - c0);
    }
    bound += local + (1.0 - chi.back());
    return acc;
}

double lower_quantile(const LatticePMF& g, double eps) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.mass.size(); ++j) {
        acc += g.mass[j];
        if (acc > eps) return static_cast<double>(g.min_index + static_cast<std::int64_t>(j)) * g.step;
    }
    return static_cast<double>(g.max_index()) * g.step;
}

}  // namespace

double expected_surplus(double u, double r, int l, double e_n, double e_v, double e_c) {
    if (l < 0) throw DomainError("interval count must be nonnegative");
    if (!(r >= 0.0)) throw DomainError("interest rate must be nonnegative");
    double annuity = 0.0;
    for (int i = 1; i <= l; ++i) annuity += std::pow(1.0 + r, l - i);
    return u * std::pow(1.0 + r, l) + annuity * e_n * (e_v - e_c);
}

double initial_capital_bound(double r, int n, double e_n, double e_v, double e_c) {
    if (n < 0) throw DomainError("interval count must be nonnegative");
    if (!(r >= 0.0)) throw DomainError("interest rate must be nonnegative");
    if (r == 0.0) return n * e_n * (e_c - e_v);
    const double g = std::pow(1.0 + r, n);
    return e_n * (e_c - e_v) * (g - 1.0) / (r * g);
}

double survival_base(double u, double r, const LatticePMF& g1) {
    const double t = -u * (1.0 + r) / g1.step;
    const auto [i, theta] = split(t);
    const std::int64_t first_ok = theta == 0.0 ? i : i + 1;
    return g1.total() - g1.cdf_index(first_ok - 1);
}

RuinResult survival_recursion(std::span<const double> u_values, double r, std::span<const LatticePMF> pmfs,
                              const RuinOptions& opts) {
    if (pmfs.empty()) throw DomainError("at least one interval is required");
    if (!(r >= 0.0)) throw DomainError("interest rate must be nonnegative");
    const double delta = pmfs[0].step;
    for (const auto& g : pmfs) {
        if (std::abs(g.step - delta) > 1e-12 * delta) throw DomainError("all intervals need the same lattice step");
        for (double m : g.mass)
            if (m < 0.0) throw DomainError("PMF masses must be nonnegative");
    }
    const int horizon = static_cast<int>(pmfs.size());
    const double growth = 1.0 + r;

    RuinResult out;
    out.u_values.assign(u_values.begin(), u_values.end());
    const double target = opts.grid_step > 0.0 ? opts.grid_step : delta / std::pow(growth, horizon);
    out.sub_steps = std::max(1, static_cast<int>(std::ceil(delta / target - 1e-9)));
    const double h = delta / out.sub_steps;
    out.grid_step = h;

    double x_max = 0.0;
    for (const auto& g : pmfs) {
        x_max += std::max(0.0, -lower_quantile(g, opts.quantile_eps));
        out.mass_defect.push_back(1.0 - g.total());
    }
    const auto top = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(x_max / h)), out.sub_steps);
    if (top + 1 > opts.max_grid_points) {
        std::ostringstream os;
        os << "capital grid needs " << top + 1 << " points (limit " << opts.max_grid_points << ")";
        throw ResourceError(os.str());
    }
    out.grid_points = top + 1;
    out.x_max = static_cast<double>(top) * h;

    std::vector<Kernel> kernels;
    kernels.reserve(pmfs.size());
    for (const auto& g : pmfs) kernels.emplace_back(g, out.sub_steps);

    bool identical = true;
    for (const auto& g : pmfs) {
        identical = identical && g.min_index == pmfs[0].min_index && g.mass == pmfs[0].mass;
    }

    out.psi.assign(horizon, std::vector<double>(u_values.size()));
    out.phi.assign(horizon, std::vector<double>(u_values.size()));
    auto record = [&](int l, const std::vector<double>& chi, double bound) {
        for (std::size_t k = 0; k < u_values.size(); ++k) {
            double b = bound;
            const double phi = first_interval(u_values[k], r, pmfs[0], chi, h, b);
            out.phi[l - 1][k] = phi;
            out.psi[l - 1][k] = 1.0 - phi;
            out.interp_error_bound = std::max(out.interp_error_bound, b);
        }
    };

    const std::vector<double> ones(static_cast<std::size_t>(top + 1), 1.0);
    if (identical) {
        // χ_m = T^m 1 serves every horizon: ψ_l uses χ_{l-1}.
        std::vector<double> chi = ones;
        double bound = 0.0;
        for (int l = 1; l <= horizon; ++l) {
            if (l > 1) chi = apply_interval(chi, kernels[0], growth, bound);
            record(l, chi, bound);
        }
    } else {
        for (int l = 1; l <= horizon; ++l) {
            std::vector<double> chi = ones;
            double bound = 0.0;
            for (int s = l; s >= 2; --s) chi = apply_interval(chi, kernels[s - 1], growth, bound);
            record(l, chi, bound);
        }
    }

    if (out.interp_error_bound > opts.interp_tol) {
        std::ostringstream os;
        os << "bound=" << out.interp_error_bound << " tol=" << opts.interp_tol << " grid_step=" << h
           << "; use a finer u-grid step";
        throw AccuracyError("ruin interpolation error bound above tolerance", os.str());
    }
    return out;
}

double survival_last_step_form(double u, double r, std::span<const LatticePMF> pmfs, std::int64_t max_evaluations) {
    if (pmfs.empty()) throw DomainError("at least one interval is required");
    std::int64_t evaluations = 0;
    std::function<double(int, double)> phi = [&](int l, double x) -> double {
        if (++evaluations > max_evaluations) throw ResourceError("last-step recursion exceeded its evaluation budget");
        if (l == 1) return survival_base(x, r, pmfs[0]);
        const LatticePMF& g = pmfs[l - 1];
        const double discount = std::pow(1.0 + r, l);
        double acc = phi(l - 1, x) * (g.total() - g.cdf_index(0));
        for (std::int64_t k = g.min_index; k <= std::min<std::int64_t>(0, g.max_index()); ++k) {
            const double p = g.at(k);
            if (p != 0.0) acc += p * phi(l - 1, x + static_cast<double>(k) * g.step / discount);
        }
        return acc;
    };
    return phi(static_cast<int>(pmfs.size()), u);
}

}  // namespace facruin
