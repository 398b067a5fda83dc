#include "facruin/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "facruin/error.hpp"

namespace facruin {

double LatticePMF::at(std::int64_t k) const {
    if (k < min_index || k > max_index()) return 0.0;
    return mass[static_cast<std::size_t>(k - min_index)];
}

double LatticePMF::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

double LatticePMF::mean() const {
    double acc = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) acc += static_cast<double>(min_index + static_cast<std::int64_t>(j)) * mass[j];
    return acc * step;
}

double LatticePMF::mean_abs() const {
    double acc = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) {
        acc += std::abs(static_cast<double>(min_index + static_cast<std::int64_t>(j))) * mass[j];
    }
    return acc * step;
}

double LatticePMF::cdf_index(std::int64_t k) const {
    if (k < min_index) return 0.0;
    const std::int64_t last = std::min(k, max_index());
    double acc = 0.0;
    for (std::int64_t j = min_index; j <= last; ++j) acc += mass[static_cast<std::size_t>(j - min_index)];
    return acc;
}

LatticePMF LatticePMF::point(double step, std::int64_t index) { return {step, index, {1.0}}; }

void trim(LatticePMF& pmf) {
    std::size_t first = 0;
    while (first + 1 < pmf.mass.size() && pmf.mass[first] == 0.0) ++first;
    std::size_t last = pmf.mass.size();
    while (last > first + 1 && pmf.mass[last - 1] == 0.0) --last;
    pmf.mass = std::vector<double>(pmf.mass.begin() + first, pmf.mass.begin() + last);
    pmf.min_index += static_cast<std::int64_t>(first);
}

LatticePMF discretize_income(const ExpandedDensity& density, double delta) {
    if (!(delta > 0.0 && std::isfinite(delta))) throw DomainError("lattice step must be positive");
    if (density.point_mass) return LatticePMF::point(delta, std::llround(*density.point_mass / delta));
    const double lo = std::floor(density.v_lo / delta - 0.5);
    const double hi = std::ceil(density.v_hi / delta + 0.5);
    if (hi - lo + 1.0 > static_cast<double>(kMaxLatticePoints)) {
        std::ostringstream os;
        os << "support [" << density.v_lo << ", " << density.v_hi << "] at step " << delta << " needs "
           << hi - lo + 1.0 << " lattice points (limit " << kMaxLatticePoints << ")";
        throw ResourceError(os.str());
    }
    LatticePMF out;
    out.step = delta;
    out.min_index = static_cast<std::int64_t>(lo);
    out.mass.assign(static_cast<std::size_t>(hi - lo) + 1, 0.0);
    double prev = eval_income_cdf(density, (lo - 0.5) * delta);
    for (std::size_t j = 0; j < out.mass.size(); ++j) {
        const double next = eval_income_cdf(density, (lo + static_cast<double>(j) + 0.5) * delta);
        out.mass[j] = std::max(0.0, next - prev);
        prev = next;
    }
    trim(out);
    return out;
}

LatticePMF net_profit_step_pmf(const LatticePMF& income, const std::map<int, double>& fees,
                               const std::map<int, double>& mix, std::vector<FeeRounding>* rounding) {
    std::vector<std::pair<std::int64_t, double>> shifts;
    for (const auto& [k, p] : mix) {
        const auto it = fees.find(k);
        if (it == fees.end()) throw DomainError("operator " + std::to_string(k) + " has no fee");
        const std::int64_t s = std::llround(it->second / income.step);
        if (rounding) rounding->push_back({k, it->second, static_cast<double>(s) * income.step});
        if (p > 0.0) shifts.emplace_back(s, p);
    }
    if (shifts.empty()) throw DomainError("operator mix has no mass");
    std::int64_t s_min = shifts.front().first, s_max = shifts.front().first;
    for (const auto& [s, p] : shifts) {
        s_min = std::min(s_min, s);
        s_max = std::max(s_max, s);
    }
    LatticePMF out;
    out.step = income.step;
    out.min_index = income.min_index - s_max;
    out.mass.assign(income.mass.size() + static_cast<std::size_t>(s_max - s_min), 0.0);
    for (const auto& [s, p] : shifts) {
        const std::size_t offset = static_cast<std::size_t>(s_max - s);
        for (std::size_t j = 0; j < income.mass.size(); ++j) out.mass[offset + j] += p * income.mass[j];
    }
    trim(out);
    return out;
}

double total_variation(const LatticePMF& p, const LatticePMF& q) {
    if (std::abs(p.step - q.step) > 1e-12 * std::max(p.step, q.step)) {
        throw DomainError("total variation needs a common lattice step");
    }
    const std::int64_t lo = std::min(p.min_index, q.min_index);
    const std::int64_t hi = std::max(p.max_index(), q.max_index());
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) acc += std::abs(p.at(k) - q.at(k));
    return 0.5 * acc;
}

}  // namespace facruin
