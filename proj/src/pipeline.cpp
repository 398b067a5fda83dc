#include "facruin/pipeline.hpp"

#include <algorithm>
#include <sstream>

namespace facruin {

double default_lattice_step(const ScenarioConfig& config) {
    if (config.numerics.lattice_step > 0.0) return config.numerics.lattice_step;
    double v_hi = 0.0;
    for (int i = 1; i <= config.financial.horizon; ++i) v_hi = std::max(v_hi, revenue_support(config, i).second);
    return (v_hi + max_operator_fee(config.financial)) / 2048.0;
}

IntervalStage run_interval(const ScenarioConfig& config, int interval, double delta) {
    const auto& num = config.numerics;
    IntervalStage st;
    st.interval = interval;
    std::tie(st.v_lo, st.v_hi) = revenue_support(config, interval);
    st.moments = revenue_moments(config, interval);
    st.density = expand_income(st.moments, st.v_lo, st.v_hi, num.moment_order, num.jacobi_a, num.jacobi_b);
    st.income = discretize_income(st.density, delta);
    st.step = net_profit_step_pmf(st.income, config.financial.operator_fees, config.financial.operator_mix,
                                  &st.rounding);
    CompoundOptions opts;
    opts.tail_eps = num.tail_eps;
    st.compound = compound_geometric(st.step, config.financial.w_n, opts);
    return st;
}

std::vector<IntervalStage> run_intervals(const ScenarioConfig& config, double delta,
                                         std::vector<std::string>* warnings) {
    std::vector<IntervalStage> out;
    std::vector<DurationPmf> laws;
    for (int i = 1; i <= config.financial.horizon; ++i) {
        const DurationPmf law = duration_pmf(config, i);
        const auto hit = std::find(laws.begin(), laws.end(), law);
        if (hit != laws.end()) {
            IntervalStage copy = out[static_cast<std::size_t>(hit - laws.begin())];
            copy.interval = i;
            copy.moments.interval_index = i;
            out.push_back(std::move(copy));
        } else {
            out.push_back(run_interval(config, i, delta));
            if (warnings) {
                const auto& st = out.back();
                for (const auto& w : st.density.warnings) warnings->push_back("interval " + std::to_string(i) + ": " + w);
                for (const auto& r : st.rounding) {
                    if (r.rounded == r.fee) continue;
                    std::ostringstream os;
                    os << "interval " << i << ": fee of operator " << r.operator_index << " rounded from " << r.fee
                       << " to " << r.rounded;
                    warnings->push_back(os.str());
                }
            }
        }
        laws.push_back(law);
    }
    return out;
}

PipelineResult run_ruin_pipeline(const ScenarioConfig& config) {
    PipelineResult out;
    out.lattice_step = default_lattice_step(config);
    out.intervals = run_intervals(config, out.lattice_step, &out.warnings);
    std::vector<LatticePMF> pmfs;
    for (const auto& st : out.intervals) pmfs.push_back(st.compound.pmf);
    RuinOptions opts;
    const double r = config.financial.interest_rate;
    if (config.numerics.u_grid_step > 0.0) opts.grid_step = config.numerics.u_grid_step;
    opts.interp_tol = config.numerics.interp_tol;
    out.ruin = survival_recursion(config.numerics.u_values, r, pmfs, opts);
    return out;
}

}  // namespace facruin
