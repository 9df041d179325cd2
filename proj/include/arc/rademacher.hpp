/**
 * @file rademacher.hpp
 *
 * Empirical Rademacher complexity of a finite loss class
 *
 *     (1/n) E_sigma[ max_r sum_i sigma_i M(r, i) ],
 *
 * by exact enumeration of all 2^n sign vectors or by seeded Monte Carlo,
 * together with the Massart and covering-number upper bounds.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/fractal.hpp"
#include "arc/metric.hpp"
#include "arc/rng.hpp"

namespace arc {

/// Rows are hypotheses, columns are sample points. Entries lie in
/// [range_a, range_a + range_b].
class LossMatrix {
public:
    LossMatrix(std::size_t rows, std::size_t cols, std::vector<double> values, double range_a, double range_b)
        : rows_(rows), cols_(cols), v_(std::move(values)), a_(range_a), b_(range_b) {
        if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("loss matrix needs at least one row and column");
        if (v_.size() != rows_ * cols_) throw std::invalid_argument("loss matrix: value count does not match shape");
        if (!(b_ > 0.0) || !std::isfinite(a_) || !std::isfinite(b_))
            throw std::invalid_argument("loss matrix: range width must be positive and finite");
        const double slack = 1e-12 * (std::abs(a_) + b_);
        for (double x : v_)
            if (!(x >= a_ - slack && x <= a_ + b_ + slack))
                throw std::invalid_argument("loss matrix: entry " + std::to_string(x) + " outside declared range [" +
                                            std::to_string(a_) + ", " + std::to_string(a_ + b_) + "]");
    }

    /// Range taken from the data: [min, max], or width 1 if constant.
    static LossMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty() || rows.front().empty()) throw std::invalid_argument("loss matrix: empty input");
        const std::size_t cols = rows.front().size();
        std::vector<double> v;
        for (const auto& r : rows) {
            if (r.size() != cols) throw std::invalid_argument("loss matrix: ragged rows");
            v.insert(v.end(), r.begin(), r.end());
        }
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double width = *hi > *lo ? *hi - *lo : 1.0;
        return LossMatrix(rows.size(), cols, std::move(v), *lo, width);
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t i) const { return v_[r * cols_ + i]; }
    double range_a() const { return a_; }
    double range_b() const { return b_; }

    /// Subtracts each column's mean. The statistic is unchanged; entries end
    /// up in [-b, b].
    LossMatrix centered() const {
        std::vector<double> v = v_;
        for (std::size_t i = 0; i < cols_; ++i) {
            double mean = 0.0;
            for (std::size_t r = 0; r < rows_; ++r) mean += v_[r * cols_ + i];
            mean /= static_cast<double>(rows_);
            for (std::size_t r = 0; r < rows_; ++r) v[r * cols_ + i] -= mean;
        }
        return LossMatrix(rows_, cols_, std::move(v), -b_, 2.0 * b_);
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> v_;
    double a_, b_;
};

/// Loss matrix of every point of `params` evaluated on `sample`.
template <typename LossFn>
LossMatrix evaluate_losses(std::span<const Vector> params, std::span<const Vector> sample, LossFn&& loss,
                           double range_a, double range_b) {
    std::vector<double> v;
    v.reserve(params.size() * sample.size());
    for (const auto& theta : params)
        for (const auto& z : sample) v.push_back(loss(theta, z));
    return LossMatrix(params.size(), sample.size(), std::move(v), range_a, range_b);
}

enum class RadMode { Exact, MonteCarlo };

struct RadEstimate {
    double value = 0.0;
    double std_error = 0.0;
    RadMode mode = RadMode::Exact;
    std::uint64_t draws = 0;
};

/// Pairwise (tree) summation; fixed association order.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline constexpr std::size_t kExactNLimit = 20;

/**
 * Exact enumeration over all 2^n sign vectors. The columns are split into
 * two halves whose signed row sums are tabulated separately, so each sign
 * vector costs one addition per row and no error accumulates across the
 * enumeration.
 */
inline RadEstimate rademacher_exact(const LossMatrix& m, std::size_t exact_n_limit = kExactNLimit) {
    const std::size_t n = m.cols(), rows = m.rows();
    if (n > exact_n_limit || n > 40)
        throw std::invalid_argument("rademacher_exact: n = " + std::to_string(n) + " exceeds exact_n_limit " +
                                    std::to_string(exact_n_limit) + "; use Monte Carlo");
    RadEstimate out;
    out.mode = RadMode::Exact;
    out.draws = std::uint64_t{1} << n;
    // A single linear form averages to zero over symmetric signs.
    if (rows == 1) return out;
    const std::size_t lo_bits = n / 2, hi_bits = n - lo_bits;
    auto tabulate = [&](std::size_t first, std::size_t bits) {
        const std::size_t count = std::size_t{1} << bits;
        std::vector<double> t(count * rows);
        for (std::size_t mask = 0; mask < count; ++mask)
            for (std::size_t r = 0; r < rows; ++r) {
                double s = 0.0;
                for (std::size_t j = 0; j < bits; ++j) s += (mask >> j & 1U) ? m(r, first + j) : -m(r, first + j);
                t[mask * rows + r] = s;
            }
        return t;
    };
    const std::vector<double> low = tabulate(0, lo_bits);
    const std::vector<double> high = tabulate(lo_bits, hi_bits);
    const std::size_t n_low = std::size_t{1} << lo_bits, n_high = std::size_t{1} << hi_bits;

    std::vector<double> blocks(n_high);
    std::vector<double> maxima(n_low);
    for (std::size_t h = 0; h < n_high; ++h) {
        const double* hs = &high[h * rows];
        for (std::size_t l = 0; l < n_low; ++l) {
            const double* ls = &low[l * rows];
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows; ++r) best = std::max(best, hs[r] + ls[r]);
            maxima[l] = best;
        }
        blocks[h] = pairwise_sum(maxima);
    }
    const double total = pairwise_sum(blocks);
    // The exact average is never negative; clip summation round-off.
    out.value = std::max(0.0, total / std::ldexp(1.0, static_cast<int>(n)) / static_cast<double>(n));
    return out;
}

/**
 * Monte Carlo over `draws` uniform sign vectors; bit-reproducible per seed.
 * Columns are centred first, which leaves the expectation unchanged and
 * removes the variance contributed by per-column offsets.
 */
inline RadEstimate rademacher_mc(const LossMatrix& raw, std::uint64_t draws, std::uint64_t seed) {
    if (draws < 2) throw std::invalid_argument("rademacher_mc: need at least two draws");
    const LossMatrix m = raw.centered();
    const std::size_t n = m.cols(), rows = m.rows();
    Rng rng(seed);
    std::vector<double> stats(draws);
    std::vector<double> sums(rows);
    std::vector<std::uint64_t> words((n + 63) / 64);
    for (std::uint64_t k = 0; k < draws; ++k) {
        for (auto& w : words) w = rng.next_u64();
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const bool plus = (words[i / 64] >> (i % 64)) & 1U;
            for (std::size_t r = 0; r < rows; ++r) sums[r] += plus ? m(r, i) : -m(r, i);
        }
        stats[k] = *std::max_element(sums.begin(), sums.end()) / static_cast<double>(n);
    }
    const double mean = pairwise_sum(stats) / static_cast<double>(draws);
    std::vector<double> sq(draws);
    for (std::uint64_t k = 0; k < draws; ++k) sq[k] = (stats[k] - mean) * (stats[k] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(draws - 1);
    RadEstimate out;
    out.value = mean;
    out.std_error = std::sqrt(var / static_cast<double>(draws));
    out.mode = RadMode::MonteCarlo;
    out.draws = draws;
    return out;
}

/// b sqrt(2 ln(rows) / n).
inline double massart_bound(double rows, double b, std::size_t n) {
    if (!(rows >= 1.0)) throw std::invalid_argument("massart_bound: rows must be >= 1");
    if (n == 0) throw std::invalid_argument("massart_bound: n must be positive");
    return b * std::sqrt(2.0 * std::log(rows) / static_cast<double>(n));
}

struct CoveringRadBound {
    double best_eps = 0.0;
    double bound = 0.0;
    std::size_t covering = 0;
    bool exact = true;
};

/**
 * min over eps in the grid of L eps + b sqrt(2 ln N(C, eps) / n).
 * The first minimiser in grid order wins ties.
 */
inline CoveringRadBound covering_rad_bound(const PointCloud& c, double lipschitz, double b, std::size_t n,
                                           std::span<const double> eps_grid, const SolverLimits& limits = {}) {
    if (eps_grid.empty()) throw std::invalid_argument("covering_rad_bound: empty eps grid");
    if (n == 0) throw std::invalid_argument("covering_rad_bound: n must be positive");
    CoveringRadBound best;
    best.bound = std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        if (lipschitz * eps > best.bound) continue;  // cannot improve, skip the cover
        const CoverResult cov = covering_number(c, eps, limits);
        const double value = lipschitz * eps + massart_bound(static_cast<double>(cov.count), b, n);
        if (value < best.bound) best = {eps, value, cov.count, cov.exact};
    }
    return best;
}

}  // namespace arc
