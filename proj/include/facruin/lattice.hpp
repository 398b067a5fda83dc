#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "facruin/income_pdf.hpp"

namespace facruin {

/// Distribution on step·{min_index, ..., min_index + mass.size() - 1}.
struct LatticePMF {
    double step = 1.0;
    std::int64_t min_index = 0;
    std::vector<double> mass{1.0};

    std::int64_t max_index() const { return min_index + static_cast<std::int64_t>(mass.size()) - 1; }
    double at(std::int64_t k) const;
    double total() const;
    /// Mean in currency units.
    double mean() const;
    /// E|X| in currency units.
    double mean_abs() const;
    /// Pr(X <= k step), inclusive.
    double cdf_index(std::int64_t k) const;

    static LatticePMF point(double step, std::int64_t index);
};

/// Upper bound on lattice points a single discretization may produce.
inline constexpr std::int64_t kMaxLatticePoints = 1000000;

/// mass_k = F((k + 1/2)Δ) - F((k - 1/2)Δ) over the support of the density.
LatticePMF discretize_income(const ExpandedDensity& density, double delta);

struct FeeRounding {
    int operator_index = 0;
    double fee = 0.0;
    double rounded = 0.0;
};

/// Z = v̂ - C with C*(k) rounded to the nearest lattice point.
LatticePMF net_profit_step_pmf(const LatticePMF& income, const std::map<int, double>& fees,
                               const std::map<int, double>& mix, std::vector<FeeRounding>* rounding = nullptr);

/// Σ_k |p_k - q_k| / 2. Both PMFs must share the step.
double total_variation(const LatticePMF& p, const LatticePMF& q);

/// Drops leading and trailing entries that are exactly zero.
void trim(LatticePMF& pmf);

}  // namespace facruin
