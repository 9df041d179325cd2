/**
 * @file metric.hpp
 *
 * Finite point sets with an attached metric: distances, diameters,
 * nearest-neighbour distances and focality.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace arc {

using Vector = std::vector<double>;

enum class Metric { Linf, L2 };

inline std::string_view to_string(Metric m) { return m == Metric::Linf ? "linf" : "l2"; }

inline Metric parse_metric(std::string_view s) {
    if (s == "linf") return Metric::Linf;
    if (s == "l2") return Metric::L2;
    throw std::invalid_argument("unknown metric '" + std::string(s) + "' (expected linf or l2)");
}

/// Relative slack for "d <= r" comparisons on computed distances. Covers
/// rounding in coordinate arithmetic, not genuine geometric gaps.
inline constexpr double kRelativeSlack = 1e-12;

/// d <= r up to rounding.
inline bool within(double d, double r) { return d <= r + kRelativeSlack * std::abs(r); }

inline void check_vector(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("vector must have dimension >= 1");
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("vector has non-finite coordinate");
}

inline double distance(std::span<const double> p, std::span<const double> q, Metric m = Metric::Linf) {
    if (p.size() != q.size())
        throw std::invalid_argument("distance: dimension mismatch (" + std::to_string(p.size()) + " vs " +
                                    std::to_string(q.size()) + ")");
    double acc = 0.0;
    if (m == Metric::Linf) {
        for (std::size_t i = 0; i < p.size(); ++i) acc = std::max(acc, std::abs(p[i] - q[i]));
        return acc;
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - q[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

/**
 * A nonempty finite set of points of equal dimension, with a metric and a
 * deduplication tolerance. Every pair of stored points is more than
 * `dedup_tol` apart; use dedup() to build one from raw learner outputs.
 */
class PointCloud {
public:
    PointCloud(std::vector<Vector> points, Metric metric = Metric::Linf, double dedup_tol = 0.0)
        : points_(std::move(points)), metric_(metric), tol_(dedup_tol) {
        if (points_.empty()) throw std::invalid_argument("point cloud must be nonempty");
        if (!(tol_ >= 0.0)) throw std::invalid_argument("dedup_tol must be nonnegative");
        const std::size_t dim = points_.front().size();
        for (const auto& p : points_) {
            check_vector(p);
            if (p.size() != dim) throw std::invalid_argument("point cloud: mixed dimensions");
        }
        for (std::size_t i = 0; i < points_.size(); ++i)
            for (std::size_t j = i + 1; j < points_.size(); ++j)
                if (!(arc::distance(points_[i], points_[j], metric_) > tol_))
                    throw std::invalid_argument("point cloud: points " + std::to_string(i) + " and " +
                                                std::to_string(j) + " are within dedup_tol");
    }

    std::size_t size() const { return points_.size(); }
    std::size_t dim() const { return points_.front().size(); }
    const Vector& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<Vector>& points() const { return points_; }
    Metric metric() const { return metric_; }
    double dedup_tol() const { return tol_; }

    double distance(std::size_t i, std::size_t j) const { return arc::distance(points_[i], points_[j], metric_); }

    auto begin() const { return points_.begin(); }
    auto end() const { return points_.end(); }

private:
    std::vector<Vector> points_;
    Metric metric_;
    double tol_;
};

/// Greedy pass in input order: a point is kept iff it is farther than `tol`
/// from every point kept so far.
inline PointCloud dedup(std::span<const Vector> points, Metric m = Metric::Linf, double tol = 0.0) {
    if (points.empty()) throw std::invalid_argument("dedup: empty input");
    std::vector<Vector> kept;
    for (const auto& p : points) {
        check_vector(p);
        const bool fresh = std::all_of(kept.begin(), kept.end(),
                                       [&](const Vector& k) { return distance(p, k, m) > tol; });
        if (fresh) kept.push_back(p);
    }
    return PointCloud(std::move(kept), m, tol);
}

/// Dense symmetric matrix of pairwise distances.
class DistanceMatrix {
public:
    explicit DistanceMatrix(const PointCloud& c) : n_(c.size()), d_(n_ * n_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) d_[i * n_ + j] = d_[j * n_ + i] = c.distance(i, j);
    }
    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

inline double diameter(const DistanceMatrix& d) {
    double best = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) best = std::max(best, d(i, j));
    return best;
}

inline double diameter(const PointCloud& c) { return diameter(DistanceMatrix(c)); }

inline std::vector<double> nn_distances(const DistanceMatrix& d) {
    if (d.size() < 2) throw std::invalid_argument("nearest-neighbour distance needs at least two points");
    std::vector<double> nu(d.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j)
            if (i != j) nu[i] = std::min(nu[i], d(i, j));
    return nu;
}

/// nu_C(a) = min_{b != a} d(a, b), indexed like the cloud.
inline std::vector<double> nn_distances(const PointCloud& c) { return nn_distances(DistanceMatrix(c)); }

inline double covering_diameter(const DistanceMatrix& d) {
    const auto nu = nn_distances(d);
    return *std::max_element(nu.begin(), nu.end());
}

/// max_a nu_C(a).
inline double covering_diameter(const PointCloud& c) { return covering_diameter(DistanceMatrix(c)); }

/// Default focality tolerance: 1e-9 of the diameter.
inline double default_focal_tol(double delta) { return 1e-9 * delta; }

inline bool is_focal(const DistanceMatrix& d, double tol) {
    if (d.size() < 2) throw std::invalid_argument("is_focal needs at least two points");
    return covering_diameter(d) >= diameter(d) - tol;
}

/// True iff the covering diameter reaches the diameter within `tol`.
inline bool is_focal(const PointCloud& c, double tol) { return is_focal(DistanceMatrix(c), tol); }

inline bool is_focal(const PointCloud& c) {
    const DistanceMatrix d(c);
    return is_focal(d, default_focal_tol(diameter(d)));
}

}  // namespace arc
