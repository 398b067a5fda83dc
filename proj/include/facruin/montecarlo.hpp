#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "facruin/model.hpp"
#include "facruin/moments.hpp"

namespace facruin {

struct SimulationPlan {
    std::uint64_t seed = 20240601;
    std::int64_t n_users = 1000000;
    std::int64_t n_paths = 100000;
    // Nearest interferers drawn explicitly; the rest of the plane contributes its mean.
    int interferer_count = 64;
    bool frozen_interferers = false;
    bool antithetic = false;
    int jobs = 1;

    static SimulationPlan from_config(const ScenarioConfig& config, int jobs = 1);
};

/// Counter-based stream: SplitMix64 over a state derived from the seed and the
/// keys, so any (path, interval, user, slot) draw is reproducible on its own.
class KeyedStream {
public:
    KeyedStream(std::uint64_t seed, std::uint64_t path, std::uint64_t interval, std::uint64_t user,
                std::uint64_t slot, bool flip = false);

    std::uint64_t next_u64();
    /// Uniform on (0, 1); 1 - U when the stream is the antithetic partner.
    double uniform();
    double exponential();

private:
    std::uint64_t state_;
    bool flip_;
};

/// Mean interference from the unit-mean-fading PPP beyond radius R.
double interference_tail_mean(double radius, const NetworkParams& net);

/// One connection's revenue V for interval i, drawn from the stream keys.
double sample_user_revenue(const ScenarioConfig& config, const SimulationPlan& plan, int interval,
                           std::uint64_t path, std::uint64_t user);

/// plan.n_users revenue samples for interval i, in user order.
std::vector<double> sample_revenues(const ScenarioConfig& config, const SimulationPlan& plan, int interval);

struct MomentEstimate {
    MomentVector moments;
    std::vector<double> std_error;  // std_error[s-1] for E[V^s]
    std::int64_t samples = 0;
};

/// Sample raw moments s = 1..order with standard errors (over antithetic pair
/// means when the plan is antithetic).
MomentEstimate estimate_moments(const ScenarioConfig& config, const SimulationPlan& plan, int interval, int order);

struct Proportion {
    double estimate = 0.0;
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval at 95%.
Proportion wilson_interval(std::int64_t hits, std::int64_t trials);

struct SurplusEstimate {
    std::vector<double> u_values;
    std::vector<std::vector<Proportion>> psi;  // psi[l-1][k]
    std::int64_t paths = 0;
};

/// Empirical ψ_l(u) from plan.n_paths surplus paths. The same net profits drive
/// every u. Ruin is a strictly negative surplus at some interval up to l.
SurplusEstimate simulate_surplus_paths(const ScenarioConfig& config, const SimulationPlan& plan,
                                       std::span<const double> u_values);

}  // namespace facruin
