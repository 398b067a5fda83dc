#include "facruin/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <thread>

#include "facruin/error.hpp"

namespace facruin {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kUserLevel = ~std::uint64_t{0};
constexpr std::int64_t kChunk = 4096;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Runs fn(chunk) for every chunk; the caller combines per-chunk results in index order.
void for_each_chunk(std::int64_t chunks, int jobs, const std::function<void(std::int64_t)>& fn) {
    const int workers = static_cast<int>(std::clamp<std::int64_t>(jobs, 1, std::max<std::int64_t>(chunks, 1)));
    if (workers == 1) {
        for (std::int64_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::int64_t c; (c = next.fetch_add(1)) < chunks;) {
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

template <class Map>
int pick_key(const Map& weights, double u) {
    double acc = 0.0;
    for (const auto& [key, w] : weights) {
        acc += w;
        if (u < acc) return key;
    }
    return weights.rbegin()->first;
}

std::size_t pick_index(std::span<const double> weights, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

int draw_duration(const DurationPmf& pmf, double u) {
    return pmf.tau_min + static_cast<int>(pick_index(pmf.prob, u));
}

// Interference at the user from the PPP outside the serving disk of radius r_u.
double draw_interference(KeyedStream& rng, double r_u, const NetworkParams& net, int count) {
    const double scale = std::numbers::pi * net.beta;
    double gamma = scale * r_u * r_u;
    double interference = 0.0;
    double radius = r_u;
    for (int k = 0; k < count; ++k) {
        gamma += rng.exponential();
        radius = std::sqrt(gamma / scale);
        interference += rng.exponential() * net.p_i * std::pow(radius, -net.alpha);
    }
    return interference + interference_tail_mean(radius, net);
}

struct RevenueSampler {
    const ScenarioConfig& config;
    const SimulationPlan& plan;
    DurationPmf duration;
    double charge;

    RevenueSampler(const ScenarioConfig& cfg, const SimulationPlan& p, int interval)
        : config(cfg), plan(p), duration(duration_pmf(cfg, interval)), charge(unit_charge(cfg)) {}

    double operator()(std::uint64_t path, std::uint64_t interval, std::uint64_t user, bool flip) const {
        const auto& net = config.network;
        const auto& fin = config.financial;
        KeyedStream head(plan.seed, path, interval, user, kUserLevel, flip);
        const std::size_t q = pick_index(config.products.product_mix, head.uniform());
        const double rate_gap = config.products.rate_gaps[q];
        const int tau = draw_duration(duration, head.uniform());
        const double r_u = std::sqrt(head.exponential() / (std::numbers::pi * net.beta));

        double frozen = 0.0;
        if (plan.frozen_interferers) frozen = draw_interference(head, r_u, net, plan.interferer_count);
        double total = 0.0;
        for (int s = 0; s < tau; ++s) {
            KeyedStream slot(plan.seed, path, interval, user, static_cast<std::uint64_t>(s), flip);
            const double h2 = slot.exponential();
            const double interference =
                plan.frozen_interferers ? frozen : draw_interference(slot, r_u, net, plan.interferer_count);
            const double gamma = sinr(h2, r_u, net.p0, net.alpha, net.sigma2, interference);
            total += scaling_factor(gamma, rate_gap, fin.c_min, fin.c_max) * charge;
        }
        return total;
    }
};

}  // namespace

SimulationPlan SimulationPlan::from_config(const ScenarioConfig& config, int jobs) {
    const auto& n = config.numerics;
    SimulationPlan plan;
    plan.seed = n.seed;
    plan.n_users = n.mc_users;
    plan.n_paths = n.mc_paths;
    plan.interferer_count = n.interferer_count;
    plan.frozen_interferers = n.frozen_interferers;
    plan.antithetic = n.antithetic;
    plan.jobs = std::max(1, jobs);
    return plan;
}

KeyedStream::KeyedStream(std::uint64_t seed, std::uint64_t path, std::uint64_t interval, std::uint64_t user,
                         std::uint64_t slot, bool flip)
    : state_(mix64(seed)), flip_(flip) {
    std::uint64_t salt = kGolden;
    for (std::uint64_t key : {path, interval, user, slot}) {
        state_ = mix64(state_ ^ (key + salt));
        salt += kGolden;
    }
}

std::uint64_t KeyedStream::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double KeyedStream::uniform() {
    const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return flip_ ? 1.0 - u : u;
}

double KeyedStream::exponential() { return -std::log(uniform()); }

double interference_tail_mean(double radius, const NetworkParams& net) {
    return net.p_i * 2.0 * std::numbers::pi * net.beta * std::pow(radius, 2.0 - net.alpha) / (net.alpha - 2.0);
}

double sample_user_revenue(const ScenarioConfig& config, const SimulationPlan& plan, int interval,
                           std::uint64_t path, std::uint64_t user) {
    const RevenueSampler sampler(config, plan, interval);
    const bool flip = plan.antithetic && (user & 1U);
    return sampler(path, static_cast<std::uint64_t>(interval), plan.antithetic ? user & ~std::uint64_t{1} : user, flip);
}

std::vector<double> sample_revenues(const ScenarioConfig& config, const SimulationPlan& plan, int interval) {
    if (plan.n_users < 0) throw DomainError("n_users must be nonnegative");
    const RevenueSampler sampler(config, plan, interval);
    std::vector<double> out(static_cast<std::size_t>(plan.n_users));
    const std::int64_t chunks = (plan.n_users + kChunk - 1) / kChunk;
    for_each_chunk(chunks, plan.jobs, [&](std::int64_t c) {
        const std::int64_t end = std::min(plan.n_users, (c + 1) * kChunk);
        for (std::int64_t j = c * kChunk; j < end; ++j) {
            const auto user = static_cast<std::uint64_t>(j);
            const bool flip = plan.antithetic && (user & 1U);
            out[static_cast<std::size_t>(j)] =
                sampler(0, static_cast<std::uint64_t>(interval), plan.antithetic ? user & ~std::uint64_t{1} : user, flip);
        }
    });
    return out;
}

MomentEstimate estimate_moments(const ScenarioConfig& config, const SimulationPlan& plan, int interval, int order) {
    if (order < 1) throw DomainError("moment order must be positive");
    if (plan.n_users < 2) throw DomainError("at least two samples are needed");
    const auto samples = sample_revenues(config, plan, interval);
    // With antithetic pairs the independent units are pair means.
    const std::size_t group = plan.antithetic ? 2 : 1;
    const std::size_t units = samples.size() / group;
    const std::size_t dim = static_cast<std::size_t>(order);
    std::vector<double> sum(dim, 0.0), sum_sq(dim, 0.0);
    for (std::size_t g = 0; g < units; ++g) {
        std::vector<double> unit(dim, 0.0);
        for (std::size_t j = 0; j < group; ++j) {
            const double v = samples[g * group + j];
            double p = 1.0;
            for (std::size_t s = 0; s < dim; ++s) {
                p *= v;
                unit[s] += p / static_cast<double>(group);
            }
        }
        for (std::size_t s = 0; s < dim; ++s) {
            sum[s] += unit[s];
            sum_sq[s] += unit[s] * unit[s];
        }
    }
    MomentEstimate out;
    out.moments.interval_index = interval;
    out.samples = static_cast<std::int64_t>(units * group);
    const double n = static_cast<double>(units);
    for (std::size_t s = 0; s < dim; ++s) {
        const double mean = sum[s] / n;
        const double var = std::max(0.0, (sum_sq[s] - n * mean * mean) / (n - 1.0));
        out.moments.raw.push_back(mean);
        out.std_error.push_back(std::sqrt(var / n));
    }
    return out;
}

Proportion wilson_interval(std::int64_t hits, std::int64_t trials) {
    if (trials <= 0) throw DomainError("trials must be positive");
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    const double low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    const double high = hits == trials ? 1.0 : std::min(1.0, centre + half);
    return {p, low, high};
}

SurplusEstimate simulate_surplus_paths(const ScenarioConfig& config, const SimulationPlan& plan,
                                       std::span<const double> u_values) {
    if (plan.n_paths <= 0) throw DomainError("n_paths must be positive");
    const auto& fin = config.financial;
    const int horizon = fin.horizon;
    const double growth = 1.0 + fin.interest_rate;
    const double log_a = std::log1p(-fin.w_n);

    std::vector<RevenueSampler> samplers;
    for (int l = 1; l <= horizon; ++l) samplers.emplace_back(config, plan, l);

    const std::size_t cells = static_cast<std::size_t>(horizon) * u_values.size();
    const std::int64_t chunks = (plan.n_paths + kChunk - 1) / kChunk;
    std::vector<std::vector<std::int64_t>> hits(static_cast<std::size_t>(chunks), std::vector<std::int64_t>(cells, 0));

    for_each_chunk(chunks, plan.jobs, [&](std::int64_t c) {
        auto& local = hits[static_cast<std::size_t>(c)];
        std::vector<double> net(static_cast<std::size_t>(horizon));
        const std::int64_t end = std::min(plan.n_paths, (c + 1) * kChunk);
        for (std::int64_t p = c * kChunk; p < end; ++p) {
            const auto path = static_cast<std::uint64_t>(p);
            for (int l = 1; l <= horizon; ++l) {
                KeyedStream count_rng(plan.seed, path, static_cast<std::uint64_t>(l), kUserLevel, kUserLevel);
                std::int64_t users = 0;
                if (fin.w_n < 1.0) users = static_cast<std::int64_t>(std::floor(std::log(count_rng.uniform()) / log_a));
                double total = 0.0;
                for (std::int64_t j = 0; j < users; ++j) {
                    const double v = samplers[static_cast<std::size_t>(l - 1)](path, static_cast<std::uint64_t>(l),
                                                                              static_cast<std::uint64_t>(j), false);
                    KeyedStream fee_rng(plan.seed, path, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(j),
                                        kUserLevel - 1);
                    total += v - fin.operator_fees.at(pick_key(fin.operator_mix, fee_rng.uniform()));
                }
                net[static_cast<std::size_t>(l - 1)] = total;
            }
            for (std::size_t k = 0; k < u_values.size(); ++k) {
                double surplus = u_values[k];
                bool ruined = false;
                for (int l = 1; l <= horizon; ++l) {
                    surplus = surplus * growth + net[static_cast<std::size_t>(l - 1)];
                    ruined = ruined || surplus < 0.0;
                    if (ruined) ++local[static_cast<std::size_t>(l - 1) * u_values.size() + k];
                }
            }
        }
    });

    SurplusEstimate out;
    out.u_values.assign(u_values.begin(), u_values.end());
    out.paths = plan.n_paths;
    out.psi.assign(static_cast<std::size_t>(horizon), std::vector<Proportion>(u_values.size()));
    for (int l = 1; l <= horizon; ++l) {
        for (std::size_t k = 0; k < u_values.size(); ++k) {
            std::int64_t total = 0;
            for (const auto& h : hits) total += h[static_cast<std::size_t>(l - 1) * u_values.size() + k];
            out.psi[static_cast<std::size_t>(l - 1)][k] = wilson_interval(total, plan.n_paths);
        }
    }
    return out;
}

}  // namespace facruin
