#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "facruin/lattice.hpp"

namespace facruin {

/// E[S_l] = u(1+r)^l + E[N](E[V] - E[C]) Σ_{i=1}^l (1+r)^{l-i}.
double expected_surplus(double u, double r, int l, double e_n, double e_v, double e_c);

/// Smallest u with E[S_n] >= 0: E[N](E[C] - E[V]) ((1+r)^n - 1)/(r(1+r)^n), or
/// n E[N](E[C] - E[V]) at r = 0.
double initial_capital_bound(double r, int n, double e_n, double e_v, double e_c);

/// Pr(S_1(u) >= 0) = Pr(S_net(1) >= -u(1+r)). Ruin is a strictly negative surplus.
double survival_base(double u, double r, const LatticePMF& g1);

struct RuinOptions {
    double grid_step = 0.0;  // 0 selects Δ / ceil((1+r)^L)
    double interp_tol = 1e-2;
    double quantile_eps = 1e-14;
    std::int64_t max_grid_points = std::int64_t{1} << 24;
};

struct RuinResult {
    std::vector<double> u_values;
    std::vector<std::vector<double>> psi;  // psi[l-1][k] = ψ_l(u_values[k])
    std::vector<std::vector<double>> phi;
    double grid_step = 0.0;
    int sub_steps = 1;  // lattice step / grid step
    std::int64_t grid_points = 0;
    double x_max = 0.0;
    double interp_error_bound = 0.0;
    std::vector<double> mass_defect;  // 1 - Σ mass per interval
};

/// ψ_l(u) for l = 1..L from per-interval net-profit PMFs G_1..G_L (common step Δ).
///
/// Works backward over the intervals in re-based capital: the survival
/// probability from capital x over intervals s..l is Σ_y g_s(y) χ((1+r)x + y)
/// with χ the survival over s+1..l, zero for negative capital. χ lives on a
/// uniform grid over [0, X_max] with X_max the summed lower tails of the G_l;
/// the grid step divides Δ so a lattice shift stays on the grid and only the
/// (1+r) dilation needs linear interpolation. The first interval is summed
/// exactly at each requested u. Throws AccuracyError when the accumulated
/// interpolation bound exceeds interp_tol.
RuinResult survival_recursion(std::span<const double> u_values, double r, std::span<const LatticePMF> pmfs,
                              const RuinOptions& opts = {});

/// The last-interval recursion φ_L(u) = φ_{L-1}(u) Pr(S_L > 0) + Σ_{y<=0} g_L(y) φ_{L-1}(u + y/(1+r)^L)
/// with φ_1(u) = survival_base(u, r, G_1), evaluated by direct recursion
/// without a grid. Kept to compare against the first-step form; throws
/// ResourceError past max_evaluations.
double survival_last_step_form(double u, double r, std::span<const LatticePMF> pmfs,
                               std::int64_t max_evaluations = 10000000);

}  // namespace facruin
