#pragma once

#include <cstdint>

#include "facruin/lattice.hpp"

namespace facruin {

enum class CompoundMethod { Auto, Direct, Fft };

struct CompoundOptions {
    double tail_eps = 1e-12;
    CompoundMethod method = CompoundMethod::Auto;
    std::int64_t max_terms = 100000;
    std::int64_t max_points = std::int64_t{1} << 25;
};

struct CompoundResult {
    LatticePMF pmf;
    std::int64_t terms = 0;            // U, the largest N kept
    double tail_mass = 0.0;            // Pr(N > U), missing from pmf
    double mean_identity_error = 0.0;  // relative, see compound_geometric
    bool used_fft = false;
};

/// Σ_{j=1}^N Z_j with Pr(N = n) = (1 - w_n)^n w_n, summed as Σ_{n<=U} Pr(N=n) h^{*n}
/// with U the first count whose geometric tail falls below tail_eps. Throws
/// ResourceError when U or the support exceeds the budget, AccuracyError when
/// the mean identity E[S] = E[N] E[Z] is off by more than 1e-8 relative.
CompoundResult compound_geometric(const LatticePMF& step, double w_n, const CompoundOptions& opts = {});

LatticePMF compound_geometric_pmf(const LatticePMF& step, double w_n, double tail_eps = 1e-12);

/// Σ_{n=0}^{n_max} Pr(N=n) h^{*n}; a defective measure of mass 1 - (1-w_n)^{n_max+1}.
LatticePMF compound_geometric_truncated(const LatticePMF& step, double w_n, int n_max,
                                        CompoundMethod method = CompoundMethod::Auto);

/// Smallest U with (1 - w_n)^{U+1} < tail_eps.
std::int64_t geometric_truncation(double w_n, double tail_eps);

enum class LsVariant {
    Corrected,  // f(m)(1 - a h(0)) - a Σ_{j≠0} h(j) f(m-j) = 0 for m ≠ 0, a = 1 - w_n
    AsPrinted,  // f(m) - w_n m/(1 - w_n h(0)) Σ_{j≠0} h(j) f(m-j) = 0 for m ≠ 0
};

struct LsOptions {
    double tail_eps = 1e-12;
    double residual_tol = 1e-8;
    LsVariant variant = LsVariant::Corrected;
    std::int64_t dense_limit = 600;
    std::int64_t max_unknowns = 2000000;
    std::int64_t max_nonzeros = 50000000;
};

struct LsResult {
    LatticePMF pmf;
    double residual = 0.0;      // ||A f||₂ with ||f||₂ = 1, before clipping
    double clipped_mass = 0.0;  // negative mass removed by the clip
    bool dense = true;
};

/// Solves the two-sided compound recurrence as min ||A f||₂ subject to fᵀf = 1
/// on the window [U min(0, k_min), U max(0, k_max)], then clips and
/// L1-normalizes. Throws AccuracyError when the Corrected residual exceeds
/// residual_tol; AsPrinted results are returned regardless, for diagnostics.
LsResult hurlimann_ls_solve(const LatticePMF& step, double w_n, const LsOptions& opts = {});

}  // namespace facruin
