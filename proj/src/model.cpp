#include "facruin/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "facruin/error.hpp"

namespace facruin {

namespace {

constexpr double kMixTol = 1e-9;

void check_spec(const DurationSpec& spec, const std::string& path, std::vector<FieldIssue>& issues) {
    switch (spec.kind) {
        case DurationKind::Deterministic:
            if (spec.slots < 1) issues.push_back({path + ".slots", "must be at least 1"});
            break;
        case DurationKind::TruncatedGeometric:
            if (spec.tau_max < 1) issues.push_back({path + ".tau_max", "must be at least 1"});
            if (!(spec.mean_slots >= 1.0)) {
                issues.push_back({path + ".mean_slots", "must be at least 1"});
            } else if (spec.tau_max > 1 && !(spec.mean_slots < 0.5 * (spec.tau_max + 1.0))) {
                issues.push_back({path + ".mean_slots",
                                  "must be below (tau_max + 1) / 2 for a truncated geometric"});
            } else if (spec.tau_max == 1 && spec.mean_slots != 1.0) {
                issues.push_back({path + ".mean_slots", "must equal 1 when tau_max is 1"});
            }
            break;
        case DurationKind::Pmf: {
            if (spec.pmf.empty()) {
                issues.push_back({path + ".pmf", "must not be empty"});
                break;
            }
            double total = 0.0;
            bool negative = false;
            for (double p : spec.pmf) {
                if (!(p >= 0.0)) negative = true;
                total += p;
            }
            if (negative) issues.push_back({path + ".pmf", "entries must be nonnegative"});
            if (std::abs(total - 1.0) > kMixTol) issues.push_back({path + ".pmf", "mix must sum to 1"});
            break;
        }
    }
}

// Success probability p of a geometric on {1..tau_max} whose mean is target.
double solve_truncated_geometric(double target, int tau_max) {
    auto mean_of = [tau_max](double p) {
        double w = 1.0, norm = 0.0, acc = 0.0;
        for (int k = 1; k <= tau_max; ++k) {
            norm += w;
            acc += k * w;
            w *= 1.0 - p;
        }
        return acc / norm;
    };
    double lo = 1e-12, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_of(mid) > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double DurationPmf::mean() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < prob.size(); ++k) acc += (tau_min + static_cast<double>(k)) * prob[k];
    return acc;
}

ScenarioConfig validate(const ScenarioConfig& config) {
    std::vector<FieldIssue> issues;
    auto req = [&issues](bool ok, const char* path, const char* msg) {
        if (!ok) issues.push_back({path, msg});
    };
    const auto& n = config.network;
    req(n.beta > 0.0 && std::isfinite(n.beta), "network.beta_per_m2", "must be positive");
    req(n.alpha > 2.0 && std::isfinite(n.alpha), "network.alpha", "alpha must exceed 2");
    req(n.p0 > 0.0, "network.p0_w", "must be positive");
    req(n.p_i > 0.0, "network.p_i_w", "must be positive");
    req(n.sigma2 >= 0.0, "network.sigma2_w", "must be nonnegative");
    req(n.bandwidth > 0.0, "network.bandwidth_hz", "must be positive");
    req(n.slot_duration > 0.0, "network.slot_duration_s", "must be positive");

    const auto& f = config.financial;
    req(f.premium_rate > 0.0, "financial.premium_rate_per_s", "must be positive");
    req(f.c_min > 0.0, "financial.c_min", "must be positive");
    req(std::isfinite(f.c_max) && f.c_max >= f.c_min, "financial.c_max",
        "must be finite and at least c_min");
    req(f.interest_rate >= 0.0, "financial.interest_rate", "must be nonnegative");
    req(f.kappa >= 1, "financial.kappa_slots", "must be at least 1");
    req(std::isfinite(f.initial_capital), "financial.initial_capital", "must be finite");
    req(f.w_n > 0.0 && f.w_n < 1.0, "financial.w_n", "must lie in (0, 1)");
    req(f.horizon >= 1, "financial.horizon_intervals", "must be at least 1");
    for (const auto& [k, fee] : f.operator_fees) {
        if (!(fee >= 0.0)) issues.push_back({"financial.operator_fees." + std::to_string(k), "fees must be nonnegative"});
    }
    {
        double total = 0.0;
        for (const auto& [k, p] : f.operator_mix) {
            if (!(p >= 0.0)) issues.push_back({"financial.operator_mix." + std::to_string(k), "must be nonnegative"});
            if (!f.operator_fees.count(k)) {
                issues.push_back({"financial.operator_mix." + std::to_string(k), "operator has no fee"});
            }
            total += p;
        }
        req(std::abs(total - 1.0) <= kMixTol, "financial.operator_mix", "mix must sum to 1");
    }

    const auto& p = config.products;
    req(!p.rate_gaps.empty(), "products.rate_gaps", "at least one product required");
    req(p.rate_gaps.size() == p.product_mix.size(), "products.product_mix",
        "must have one entry per product");
    for (double g : p.rate_gaps) {
        if (!(g > 0.0 && std::isfinite(g))) {
            issues.push_back({"products.rate_gaps", "rates must be positive"});
            break;
        }
    }
    {
        double total = 0.0;
        bool negative = false;
        for (double q : p.product_mix) {
            negative = negative || !(q >= 0.0);
            total += q;
        }
        req(!negative, "products.product_mix", "must be nonnegative");
        req(std::abs(total - 1.0) <= kMixTol, "products.product_mix", "mix must sum to 1");
    }

    check_spec(config.durations.base, "durations", issues);
    for (const auto& [i, spec] : config.durations.per_interval) {
        if (i < 1) issues.push_back({"durations.per_interval." + std::to_string(i), "interval index must be at least 1"});
        check_spec(spec, "durations.per_interval." + std::to_string(i), issues);
    }

    const auto& m = config.numerics;
    req(m.rel_tol > 0.0 && m.rel_tol <= 1e-3, "numerics.rel_tol", "must lie in (0, 1e-3]");
    req(m.moment_order >= 2 && m.moment_order <= 12, "numerics.moment_order", "must lie in [2, 12]");
    req(m.jacobi_a > 0.0, "numerics.jacobi_a", "must be positive");
    req(m.jacobi_b > 0.0, "numerics.jacobi_b", "must be positive");
    req(m.lattice_step >= 0.0, "numerics.lattice_step", "must be positive (0 selects the default)");
    req(m.u_grid_step >= 0.0, "numerics.u_grid_step", "must be positive (0 selects the default)");
    req(m.tail_eps > 0.0 && m.tail_eps < 1e-3, "numerics.tail_eps", "must lie in (0, 1e-3)");
    req(m.interp_tol > 0.0, "numerics.interp_tol", "must be positive");
    req(m.mc_users >= 1, "numerics.mc_users", "must be at least 1");
    req(m.mc_paths >= 1, "numerics.mc_paths", "must be at least 1");
    req(m.interferer_count >= 1, "numerics.interferer_count", "must be at least 1");
    for (double u : m.u_values) {
        if (!std::isfinite(u)) {
            issues.push_back({"numerics.u_values", "must be finite"});
            break;
        }
    }

    if (!issues.empty()) throw ConfigError(std::move(issues));
    ScenarioConfig out = config;
    out.interference_limited = config.network.sigma2 == 0.0;
    return out;
}

DurationPmf duration_pmf(const DurationSpec& spec) {
    DurationPmf out;
    switch (spec.kind) {
        case DurationKind::Deterministic:
            out.tau_min = spec.slots;
            out.prob = {1.0};
            break;
        case DurationKind::TruncatedGeometric: {
            if (spec.tau_max == 1 || spec.mean_slots == 1.0) {
                out.tau_min = 1;
                out.prob = {1.0};
                break;
            }
            const double p = solve_truncated_geometric(spec.mean_slots, spec.tau_max);
            out.tau_min = 1;
            out.prob.resize(spec.tau_max);
            double w = 1.0;
            for (auto& v : out.prob) {
                v = w;
                w *= 1.0 - p;
            }
            const double total = std::accumulate(out.prob.begin(), out.prob.end(), 0.0);
            for (auto& v : out.prob) v /= total;
            break;
        }
        case DurationKind::Pmf: {
            std::size_t first = 0;
            while (first < spec.pmf.size() && spec.pmf[first] == 0.0) ++first;
            std::size_t last = spec.pmf.size();
            while (last > first && spec.pmf[last - 1] == 0.0) --last;
            if (first == last) throw DomainError("duration pmf has no mass");
            out.tau_min = static_cast<int>(first) + 1;
            out.prob.assign(spec.pmf.begin() + first, spec.pmf.begin() + last);
            break;
        }
    }
    return out;
}

DurationPmf duration_pmf(const ScenarioConfig& config, int interval) {
    if (interval < 1) throw DomainError("interval index must be at least 1");
    const auto& d = config.durations;
    const auto it = d.per_interval.find(interval);
    DurationPmf pmf = duration_pmf(it != d.per_interval.end() ? it->second : d.base);
    if (!d.truncate_to_elapsed) return pmf;

    // A connection ending in interval i cannot have lasted longer than the
    // i·κ slots the system has been running.
    const double elapsed = static_cast<double>(interval) * static_cast<double>(config.financial.kappa);
    if (pmf.tau_max() <= elapsed) return pmf;
    if (pmf.tau_min > elapsed) throw DomainError("duration support lies beyond the elapsed time");
    pmf.prob.resize(static_cast<std::size_t>(elapsed) - pmf.tau_min + 1);
    const double total = std::accumulate(pmf.prob.begin(), pmf.prob.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("duration pmf has no mass after truncation");
    for (auto& v : pmf.prob) v /= total;
    return pmf;
}

double unit_charge(const ScenarioConfig& config) {
    return config.network.slot_duration * config.financial.premium_rate;
}

std::pair<double, double> revenue_support(const ScenarioConfig& config, int interval) {
    const DurationPmf pmf = duration_pmf(config, interval);
    const double tr = unit_charge(config);
    return {pmf.tau_min * config.financial.c_min * tr, pmf.tau_max() * config.financial.c_max * tr};
}

double max_operator_fee(const FinancialParams& fin) {
    double out = 0.0;
    for (const auto& [k, p] : fin.operator_mix) {
        if (p > 0.0) out = std::max(out, fin.operator_fees.at(k));
    }
    return out;
}

double mean_operator_fee(const FinancialParams& fin) {
    double out = 0.0;
    for (const auto& [k, p] : fin.operator_mix) out += p * fin.operator_fees.at(k);
    return out;
}

double nearest_distance_pdf(double z, double beta) {
    if (!(z >= 0.0)) throw DomainError("distance must be nonnegative");
    if (!(beta > 0.0)) throw DomainError("density must be positive");
    return 2.0 * std::numbers::pi * beta * z * std::exp(-beta * std::numbers::pi * z * z);
}

double nearest_distance_cdf(double z, double beta) {
    if (!(z >= 0.0)) throw DomainError("distance must be nonnegative");
    if (!(beta > 0.0)) throw DomainError("density must be positive");
    return -std::expm1(-beta * std::numbers::pi * z * z);
}

double scaling_factor(double gamma, double rate_gap, double c_min, double c_max) {
    if (!(gamma >= 0.0)) throw DomainError("SINR must be nonnegative");
    if (!(c_min > 0.0 && c_min <= c_max)) throw DomainError("require 0 < c_min <= c_max");
    if (gamma == 0.0) return c_max;
    return std::clamp(rate_gap / gamma, c_min, c_max);
}

double sinr(double h2, double r_u, double p0, double alpha, double sigma2, double interference) {
    if (h2 < 0.0 || r_u < 0.0 || p0 < 0.0 || sigma2 < 0.0 || interference < 0.0) {
        throw DomainError("sinr arguments must be nonnegative");
    }
    const double denom = sigma2 + interference;
    if (!(denom > 0.0)) throw DomainError("noise plus interference must be positive");
    return h2 * std::pow(r_u, -alpha) * p0 / denom;
}

double achievable_rate(double gamma, double bandwidth) {
    if (!(gamma >= 0.0)) throw DomainError("SINR must be nonnegative");
    return bandwidth * std::log2(1.0 + gamma);
}

double rate_gap_from_rate(double rate_bps, double bandwidth) {
    if (!(rate_bps > 0.0 && bandwidth > 0.0)) throw DomainError("rate and bandwidth must be positive");
    return std::exp2(rate_bps / bandwidth) - 1.0;
}

}  // namespace facruin
