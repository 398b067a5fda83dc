#pragma once

#include <string>
#include <vector>

#include "facruin/compound.hpp"
#include "facruin/income_pdf.hpp"
#include "facruin/lattice.hpp"
#include "facruin/model.hpp"
#include "facruin/moments.hpp"
#include "facruin/ruin.hpp"

namespace facruin {

/// Everything computed for one compounding interval.
struct IntervalStage {
    int interval = 1;
    double v_lo = 0.0;
    double v_hi = 0.0;
    MomentVector moments;
    ExpandedDensity density;
    LatticePMF income;
    LatticePMF step;  // Z = v̂ - C
    std::vector<FeeRounding> rounding;
    CompoundResult compound;
};

struct PipelineResult {
    double lattice_step = 0.0;
    std::vector<IntervalStage> intervals;
    RuinResult ruin;
    std::vector<std::string> warnings;
};

/// numerics.lattice_step, or (max v_hi + max fee) / 2048 when it is 0.
double default_lattice_step(const ScenarioConfig& config);

/// Moments, expansion, discretization and compounding for one interval.
IntervalStage run_interval(const ScenarioConfig& config, int interval, double delta);

/// run_interval for 1..horizon; intervals with the same duration law share one computation.
std::vector<IntervalStage> run_intervals(const ScenarioConfig& config, double delta,
                                         std::vector<std::string>* warnings = nullptr);

/// The full chain through the survival recursion at numerics.u_values.
PipelineResult run_ruin_pipeline(const ScenarioConfig& config);

}  // namespace facruin
