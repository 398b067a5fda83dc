#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace facruin {

struct NetworkParams {
    double beta = 0.1;  // small cells per m^2
    double alpha = 4.0;
    double p0 = 1.0;
    double p_i = 1.0;
    double sigma2 = 0.0;
    double bandwidth = 1.0;      // Hz
    double slot_duration = 1.0;  // s
};

struct FinancialParams {
    double premium_rate = 1.0;  // currency per unit scaling factor per second
    double c_min = 0.001;
    double c_max = 1000.0;
    std::map<int, double> operator_fees{{1, 100.0}};
    std::map<int, double> operator_mix{{1, 1.0}};
    double interest_rate = 0.05;
    std::int64_t kappa = 2592000;  // slots per compounding interval
    double initial_capital = 100.0;
    double w_n = 0.2;
    int horizon = 5;
};

struct ProductParams {
    std::vector<double> rate_gaps{100.0};  // A_d = 2^{R/B} - 1 per product
    std::vector<double> product_mix{1.0};

    std::size_t q_count() const { return rate_gaps.size(); }
};

enum class DurationKind { Deterministic, TruncatedGeometric, Pmf };

struct DurationSpec {
    DurationKind kind = DurationKind::Deterministic;
    int slots = 1;             // deterministic
    double mean_slots = 1.0;   // truncated geometric
    int tau_max = 1;           // truncated geometric
    std::vector<double> pmf;   // pmf[k] = Pr(tau = k + 1)
};

/// Pr(tau = tau_min + k) = prob[k].
struct DurationPmf {
    int tau_min = 1;
    std::vector<double> prob{1.0};

    int tau_max() const { return tau_min + static_cast<int>(prob.size()) - 1; }
    double mean() const;
    bool operator==(const DurationPmf&) const = default;
};

struct DurationModel {
    DurationSpec base;
    std::map<int, DurationSpec> per_interval;
    bool truncate_to_elapsed = false;
};

struct NumericsParams {
    double rel_tol = 1e-8;
    int moment_order = 4;
    double jacobi_a = 1.0;
    double jacobi_b = 1.0;
    double lattice_step = 0.0;  // 0 selects (v_hi + max fee) / 2048
    double u_grid_step = 0.0;   // 0 selects lattice_step / ceil((1+r)^L)
    double tail_eps = 1e-12;
    double interp_tol = 1e-2;
    std::vector<double> u_values{100.0, 150.0, 200.0, 250.0, 300.0};
    std::uint64_t seed = 20240601;
    std::int64_t mc_users = 1000000;
    std::int64_t mc_paths = 100000;
    int interferer_count = 64;
    bool frozen_interferers = false;
    bool antithetic = false;
};

struct ScenarioConfig {
    NetworkParams network;
    FinancialParams financial;
    ProductParams products;
    DurationModel durations;
    NumericsParams numerics;
    bool interference_limited = true;  // set by validate
};

/// Checks every invariant and returns a copy with derived flags set. Throws
/// ConfigError listing each violation with its field path.
ScenarioConfig validate(const ScenarioConfig& config);

/// Duration PMF of a connection ending in compounding interval i (1-based).
DurationPmf duration_pmf(const ScenarioConfig& config, int interval);
DurationPmf duration_pmf(const DurationSpec& spec);

/// T·ρ, the charge for one slot at unit scaling factor.
double unit_charge(const ScenarioConfig& config);

/// Revenue support [tau_min c_min Tρ, tau_max c_max Tρ] for interval i.
std::pair<double, double> revenue_support(const ScenarioConfig& config, int interval);

double max_operator_fee(const FinancialParams& fin);
double mean_operator_fee(const FinancialParams& fin);

/// f_R(z) = 2πβz exp(-βπz²), the nearest small-cell distance density.
double nearest_distance_pdf(double z, double beta);
double nearest_distance_cdf(double z, double beta);

/// c = max(min(A_d/γ, c_max), c_min); γ = 0 gives c_max.
double scaling_factor(double gamma, double rate_gap, double c_min, double c_max);

/// γ = h² r^{-α} P₀ / (σ² + I).
double sinr(double h2, double r_u, double p0, double alpha, double sigma2, double interference);

/// B log₂(1 + γ).
double achievable_rate(double gamma, double bandwidth);

/// 2^{R/B} - 1.
double rate_gap_from_rate(double rate_bps, double bandwidth);

}  // namespace facruin
