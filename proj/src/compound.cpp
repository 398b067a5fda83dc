#include "facruin/compound.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "facruin/error.hpp"
#include "fft.hpp"

namespace facruin {

namespace {

struct Window {
    std::int64_t lo;
    std::int64_t hi;
    std::int64_t size() const { return hi - lo + 1; }
};

Window sum_window(const LatticePMF& step, std::int64_t terms) {
    return {terms * std::min<std::int64_t>(0, step.min_index), terms * std::max<std::int64_t>(0, step.max_index())};
}

void check_w(double w_n) {
    if (!(w_n > 0.0 && w_n <= 1.0)) throw DomainError("w_n must lie in (0, 1]");
}

// Σ_{n=0}^{terms} w a^n h^{*n} by repeated direct convolution.
LatticePMF direct_sum(const LatticePMF& step, double w_n, std::int64_t terms) {
    const double a = 1.0 - w_n;
    const Window win = sum_window(step, terms);
    LatticePMF out;
    out.step = step.step;
    out.min_index = win.lo;
    out.mass.assign(static_cast<std::size_t>(win.size()), 0.0);
    std::vector<double> cur{1.0};
    std::int64_t cur_min = 0;
    double weight = w_n;
    for (std::int64_t n = 0;; ++n) {
        for (std::size_t j = 0; j < cur.size(); ++j) out.mass[static_cast<std::size_t>(cur_min - win.lo) + j] += weight * cur[j];
        if (n == terms) break;
        cur = detail::convolve(cur, step.mass);
        cur_min += step.min_index;
        weight *= a;
    }
    return out;
}

// Same sum through one FFT: the transform of Σ w (a ĥ)^n is a finite geometric series.
LatticePMF fft_sum(const LatticePMF& step, double w_n, std::int64_t terms) {
    const double a = 1.0 - w_n;
    const Window win = sum_window(step, terms);
    const std::size_t n = detail::next_pow2(static_cast<std::size_t>(win.size()));
    const auto wrap = [n](std::int64_t k) {
        const auto m = static_cast<std::int64_t>(n);
        return static_cast<std::size_t>(((k % m) + m) % m);
    };
    detail::RealFft fft(n);
    auto buf = fft.real();
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t j = 0; j < step.mass.size(); ++j) buf[wrap(step.min_index + static_cast<std::int64_t>(j))] += step.mass[j];
    fft.forward();
    for (auto& c : fft.spectrum()) {
        const std::complex<double> q = a * c;
        c = w_n * (1.0 - std::pow(q, static_cast<int>(terms + 1))) / (1.0 - q);
    }
    fft.backward();
    LatticePMF out;
    out.step = step.step;
    out.min_index = win.lo;
    out.mass.resize(static_cast<std::size_t>(win.size()));
    const double scale = 1.0 / static_cast<double>(n);
    for (std::int64_t k = win.lo; k <= win.hi; ++k) {
        out.mass[static_cast<std::size_t>(k - win.lo)] = std::max(0.0, buf[wrap(k)] * scale);
    }
    return out;
}

bool choose_fft(const LatticePMF& step, std::int64_t terms, CompoundMethod method) {
    if (method == CompoundMethod::Fft) return true;
    if (method == CompoundMethod::Direct) return false;
    const double k = static_cast<double>(step.mass.size());
    const double t = static_cast<double>(terms);
    return 0.5 * t * t * k * k > 5e7;
}

}  // namespace

std::int64_t geometric_truncation(double w_n, double tail_eps) {
    check_w(w_n);
    if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw DomainError("tail_eps must lie in (0, 1)");
    const double a = 1.0 - w_n;
    if (a == 0.0) return 0;
    auto u = static_cast<std::int64_t>(std::floor(std::log(tail_eps) / std::log(a)));
    u = std::max<std::int64_t>(u - 1, 0);
    while (std::pow(a, static_cast<double>(u + 1)) >= tail_eps) ++u;
    return u;
}

CompoundResult compound_geometric(const LatticePMF& step, double w_n, const CompoundOptions& opts) {
    check_w(w_n);
    CompoundResult out;
    if (w_n == 1.0 || (step.min_index == 0 && step.max_index() == 0)) {
        out.pmf = LatticePMF::point(step.step, 0);
        return out;
    }
    const double a = 1.0 - w_n;
    const std::int64_t terms = geometric_truncation(w_n, opts.tail_eps);
    const double points = static_cast<double>(sum_window(step, terms).size());
    if (terms > opts.max_terms || points > static_cast<double>(opts.max_points)) {
        std::ostringstream os;
        os << "compound sum needs " << terms << " terms over " << points << " lattice points (budget "
           << opts.max_terms << " terms, " << opts.max_points << " points); achieved tail mass at the budget "
           << std::pow(a, static_cast<double>(std::min(terms, opts.max_terms) + 1));
        throw ResourceError(os.str());
    }
    out.terms = terms;
    out.tail_mass = std::pow(a, static_cast<double>(terms + 1));
    out.used_fft = choose_fft(step, terms, opts.method);
    out.pmf = out.used_fft ? fft_sum(step, w_n, terms) : direct_sum(step, w_n, terms);
    trim(out.pmf);

    const double e_n = a / w_n;
    const double target = e_n * step.mean();
    const double scale = std::max(std::abs(target), e_n * step.mean_abs());
    out.mean_identity_error = scale > 0.0 ? std::abs(out.pmf.mean() - target) / scale : 0.0;
    if (out.mean_identity_error > 1e-8) {
        std::ostringstream os;
        os << "E[S]=" << out.pmf.mean() << " E[N]E[Z]=" << target << " rel=" << out.mean_identity_error;
        throw AccuracyError("compound mean identity violated", os.str());
    }
    return out;
}

LatticePMF compound_geometric_pmf(const LatticePMF& step, double w_n, double tail_eps) {
    CompoundOptions opts;
    opts.tail_eps = tail_eps;
    return compound_geometric(step, w_n, opts).pmf;
}

LatticePMF compound_geometric_truncated(const LatticePMF& step, double w_n, int n_max, CompoundMethod method) {
    check_w(w_n);
    if (n_max < 0) throw DomainError("n_max must be nonnegative");
    LatticePMF out = choose_fft(step, n_max, method) ? fft_sum(step, w_n, n_max) : direct_sum(step, w_n, n_max);
    trim(out);
    return out;
}

LsResult hurlimann_ls_solve(const LatticePMF& step, double w_n, const LsOptions& opts) {
    check_w(w_n);
    LsResult out;
    if (w_n == 1.0 || (step.min_index == 0 && step.max_index() == 0)) {
        out.pmf = LatticePMF::point(step.step, 0);
        return out;
    }
    const double a = 1.0 - w_n;
    const double h0 = step.at(0);
    const std::int64_t terms = geometric_truncation(w_n, opts.tail_eps);
    const Window win = sum_window(step, terms);
    const std::int64_t m_count = win.size();
    if (m_count > opts.max_unknowns) {
        throw ResourceError("recurrence window of " + std::to_string(m_count) + " unknowns exceeds the budget");
    }
    const std::int64_t support = static_cast<std::int64_t>(step.mass.size());
    if (m_count > opts.max_nonzeros / std::max<std::int64_t>(support, 1)) {
        throw ResourceError("recurrence system needs about " + std::to_string(m_count) + " x " + std::to_string(support) +
                            " nonzeros; use a coarser lattice step");
    }

    // Row m (m ≠ 0): diag(m) f(m) - off(m) Σ_{j≠0} h(j) f(m - j) = 0.
    const auto diag = [&](std::int64_t) { return opts.variant == LsVariant::Corrected ? 1.0 - a * h0 : 1.0; };
    const auto off = [&](std::int64_t m) {
        return opts.variant == LsVariant::Corrected ? a : w_n * static_cast<double>(m) / (1.0 - w_n * h0);
    };
    const auto col = [&](std::int64_t m) { return static_cast<Eigen::Index>(m - win.lo); };

    Eigen::VectorXd f(m_count);
    if (m_count <= opts.dense_limit) {
        Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(m_count - 1, m_count);
        Eigen::Index row = 0;
        for (std::int64_t m = win.lo; m <= win.hi; ++m) {
            if (m == 0) continue;
            mat(row, col(m)) += diag(m);
            for (std::int64_t j = step.min_index; j <= step.max_index(); ++j) {
                if (j == 0 || m - j < win.lo || m - j > win.hi) continue;
                mat(row, col(m - j)) -= off(m) * step.at(j);
            }
            ++row;
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeFullV);
        f = svd.matrixV().col(m_count - 1);
        out.residual = (mat * f).norm();
        out.dense = true;
    } else {
        // Pin f(0) = 1; the remaining rows are diagonally dominant with margin w_n.
        const auto idx = [&](std::int64_t m) { return static_cast<Eigen::Index>(m < 0 ? m - win.lo : m - win.lo - 1); };
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_count - 1);
        trip.reserve(static_cast<std::size_t>(m_count) * std::min<std::size_t>(step.mass.size(), 4096));
        for (std::int64_t m = win.lo; m <= win.hi; ++m) {
            if (m == 0) continue;
            trip.emplace_back(idx(m), idx(m), diag(m));
            for (std::int64_t j = step.min_index; j <= step.max_index(); ++j) {
                const double hj = step.at(j);
                if (j == 0 || hj == 0.0 || m - j < win.lo || m - j > win.hi) continue;
                if (m - j == 0) rhs(idx(m)) += off(m) * hj;
                else trip.emplace_back(idx(m), idx(m - j), -off(m) * hj);
            }
        }
        Eigen::SparseMatrix<double> mat(m_count - 1, m_count - 1);
        mat.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(mat);
        if (lu.info() != Eigen::Success) throw AccuracyError("recurrence factorization failed");
        const Eigen::VectorXd sol = lu.solve(rhs);
        if (lu.info() != Eigen::Success) throw AccuracyError("recurrence solve failed");
        for (std::int64_t m = win.lo; m <= win.hi; ++m) f(col(m)) = m == 0 ? 1.0 : sol(idx(m));
        const Eigen::VectorXd r = mat * sol - rhs;
        out.residual = r.norm() / f.norm();
        f /= f.norm();
        out.dense = false;
    }

    if (f.sum() < 0.0) f = -f;
    double negative = 0.0, positive = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (f(i) < 0.0) {
            negative -= f(i);
            f(i) = 0.0;
        } else {
            positive += f(i);
        }
    }
    if (!(positive > 0.0)) throw AccuracyError("recurrence solution has no positive mass");
    out.clipped_mass = negative / (positive + negative);
    out.pmf.step = step.step;
    out.pmf.min_index = win.lo;
    out.pmf.mass.resize(static_cast<std::size_t>(m_count));
    for (std::int64_t m = win.lo; m <= win.hi; ++m) out.pmf.mass[static_cast<std::size_t>(m - win.lo)] = f(col(m)) / positive;
    trim(out.pmf);

    if (opts.variant == LsVariant::Corrected && out.residual > opts.residual_tol) {
        std::ostringstream os;
        os << "residual=" << out.residual << " tol=" << opts.residual_tol << " unknowns=" << m_count;
        throw AccuracyError("recurrence least-squares residual above tolerance", os.str());
    }
    return out;
}

}  // namespace facruin
