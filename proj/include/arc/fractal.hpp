/**
 * @file fractal.hpp
 *
 * Covering numbers, minimum 2-covers and the finite Minkowski dimension of
 * finite point sets, plus Steiner augmentation and the fractal
 * generalization bound built from them.
 *
 * Logarithms are natural throughout. Covers use internal centers: every
 * ball is centred at a point of the set being covered.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/metric.hpp"
#include "arc/set_cover.hpp"

namespace arc {

struct SolverLimits {
    std::size_t exact_limit = 20;  // largest set solved exactly by branch-and-bound
    std::size_t oracle_limit = 8;  // largest set for the full-definition dimension oracle
    std::size_t node_budget = 1'000'000;
};

struct Ball {
    std::size_t center;
    std::vector<std::size_t> members;
};

struct CoverResult {
    std::size_t count = 0;
    std::vector<Ball> cover;
    bool exact = false;
};

/**
 * Minimum number of closed eps-balls centred at points of C whose union
 * contains C. Exact by branch-and-bound when |C| <= limits.exact_limit,
 * otherwise a greedy upper bound with exact = false.
 */
inline CoverResult covering_number(const PointCloud& c, double eps, const SolverLimits& limits = {}) {
    if (!(eps > 0.0)) throw std::invalid_argument("covering_number: eps must be positive");
    const std::size_t n = c.size();
    const DistanceMatrix d(c);
    std::vector<Bitset> balls(n, Bitset(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (within(d(i, j), eps)) balls[i].set(j);

    // Drop balls contained in another (equal balls: keep the lowest index).
    std::vector<std::size_t> centers;
    std::vector<Bitset> family;
    for (std::size_t i = 0; i < n; ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < n && !dominated; ++j) {
            if (i == j || !balls[i].subset_of(balls[j])) continue;
            dominated = !(balls[j] == balls[i]) || j < i;
        }
        if (!dominated) {
            centers.push_back(i);
            family.push_back(balls[i]);
        }
    }

    const bool try_exact = n <= limits.exact_limit;
    const SetCoverSolution sol =
        try_exact ? exact_set_cover(n, family, limits.node_budget) : greedy_set_cover(n, family);
    CoverResult out;
    out.count = sol.chosen.size();
    out.exact = try_exact && sol.exact;
    for (std::size_t s : sol.chosen) out.cover.push_back({centers[s], family[s].indices()});
    return out;
}

struct TwoCoverResult {
    std::size_t T = 0;
    std::vector<std::vector<std::size_t>> sets;
    bool exact = false;
};

/**
 * Minimum-cardinality 2-cover of C whose members all have diameter <= a.
 * Optimal members can always be taken maximal, so candidates are the
 * maximal cliques of the graph joining points at distance <= a.
 * Greedy above the exact limit: largest uncovered gain first, ties to the
 * clique with the lowest smallest index.
 */
inline TwoCoverResult min_two_cover(const PointCloud& c, double a, const SolverLimits& limits = {}) {
    const std::size_t n = c.size();
    if (n < 2) throw std::invalid_argument("min_two_cover: a 2-cover needs at least two points");
    const DistanceMatrix d(c);
    const double nabla = covering_diameter(d);
    if (!within(nabla, a))
        throw std::invalid_argument("min_two_cover: a = " + std::to_string(a) +
                                    " is below the covering diameter " + std::to_string(nabla) +
                                    "; some point has no partner");
    std::vector<Bitset> adj(n, Bitset(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && within(d(i, j), a)) adj[i].set(j);
    const std::vector<Bitset> cliques = maximal_cliques(adj);

    const bool try_exact = n <= limits.exact_limit;
    const SetCoverSolution sol =
        try_exact ? exact_set_cover(n, cliques, limits.node_budget) : greedy_set_cover(n, cliques);
    TwoCoverResult out;
    out.T = sol.chosen.size();
    out.exact = try_exact && sol.exact;
    for (std::size_t s : sol.chosen) out.sets.push_back(cliques[s].indices());
    return out;
}

struct DimResult {
    double value = 0.0;  // natural-log convention; +inf for focal sets
    bool focal = false;
    std::optional<std::size_t> T;
    double delta = 0.0;
    double nabla = 0.0;
    bool exact = true;
};

/// Finite Minkowski dimension: 0 for a singleton, +inf for focal sets,
/// otherwise ln T(C) / ln(Delta / nabla).
inline DimResult dim_fm(const PointCloud& c, const SolverLimits& limits = {}) {
    DimResult r;
    if (c.size() == 1) return r;
    const DistanceMatrix d(c);
    r.delta = diameter(d);
    r.nabla = covering_diameter(d);
    if (is_focal(d, default_focal_tol(r.delta))) {
        r.focal = true;
        r.value = std::numeric_limits<double>::infinity();
        return r;
    }
    const TwoCoverResult tc = min_two_cover(c, r.nabla, limits);
    r.T = tc.T;
    r.exact = tc.exact;
    r.value = std::log(static_cast<double>(tc.T)) / std::log(r.delta / r.nabla);
    return r;
}

/**
 * Full-definition dimension for small sets: solves B^s(C) = Delta(C)^s for s
 * by bisection, where B^s(C) = max over delta >= nabla of the minimum of
 * |U| * Delta(U)^s over 2-covers U with Delta(U) <= delta and
 * Delta(U) < Delta(C). Cover sizes come from breadth-first search over
 * covered-subset masks using every admissible subset, so this path shares
 * nothing with min_two_cover beyond the distance matrix.
 */
inline double dim_fm_oracle(const PointCloud& c, double s_tol = 1e-10, std::size_t oracle_limit = 8) {
    const std::size_t n = c.size();
    if (n > oracle_limit || n > 20)
        throw std::invalid_argument("dim_fm_oracle: |C| = " + std::to_string(n) + " exceeds oracle_limit " +
                                    std::to_string(oracle_limit));
    if (n <= 2) throw std::invalid_argument("dim_fm_oracle: needs |C| > 2");
    if (!(s_tol > 0.0)) throw std::invalid_argument("dim_fm_oracle: s_tol must be positive");
    const DistanceMatrix d(c);

    double delta_c = 0.0, nabla_c = 0.0;
    std::vector<double> grid;
    for (std::size_t i = 0; i < n; ++i) {
        double nu = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            nu = std::min(nu, d(i, j));
            delta_c = std::max(delta_c, d(i, j));
            if (j > i) grid.push_back(d(i, j));
        }
        nabla_c = std::max(nabla_c, nu);
    }
    if (nabla_c >= delta_c - default_focal_tol(delta_c)) throw std::invalid_argument("dim_fm_oracle: C is focal");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const std::size_t masks = std::size_t{1} << n;
    const std::size_t full = masks - 1;
    std::vector<double> diam(masks, 0.0);
    for (std::size_t m = 1; m < masks; ++m) {
        const std::size_t top = static_cast<std::size_t>(std::bit_width(m)) - 1;
        const std::size_t rest = m & ~(std::size_t{1} << top);
        double dm = diam[rest];
        for (std::size_t j = 0; j < top; ++j)
            if (rest >> j & 1U) dm = std::max(dm, d(top, j));
        diam[m] = dm;
    }

    // Smallest number of admissible subsets covering C; 0 if none exists.
    auto min_cover = [&](double bound) -> std::size_t {
        std::vector<std::size_t> admissible;
        for (std::size_t m = 1; m < masks; ++m)
            if (std::popcount(m) >= 2 && within(diam[m], bound)) admissible.push_back(m);
        std::vector<std::size_t> frontier{0};
        std::vector<bool> seen(masks, false);
        seen[0] = true;
        for (std::size_t level = 1; !frontier.empty(); ++level) {
            std::vector<std::size_t> next;
            for (std::size_t m : frontier)
                for (std::size_t u : admissible) {
                    const std::size_t v = m | u;
                    if (seen[v]) continue;
                    if (v == full) return level;
                    seen[v] = true;
                    next.push_back(v);
                }
            frontier = std::move(next);
        }
        return 0;
    };

    struct Level {
        double D;
        double log_t;
    };
    std::vector<Level> levels;  // covers with Delta(U) in [nabla, Delta(C))
    for (double D : grid) {
        if (D < nabla_c || !(D < delta_c)) continue;
        const std::size_t t = min_cover(D);
        if (t > 0) levels.push_back({D, std::log(static_cast<double>(t))});
    }
    if (levels.empty()) throw std::logic_error("dim_fm_oracle: no 2-cover below the diameter");

    // ln B^s(C) - s ln Delta(C); strictly decreasing in s.
    auto excess = [&](double s) {
        double outer = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < levels.size(); ++k) {  // delta = levels[k].D
            double inner = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j <= k; ++j) inner = std::min(inner, levels[j].log_t + s * std::log(levels[j].D));
            outer = std::max(outer, inner);
        }
        return outer - s * std::log(delta_c);
    };
    double lo = 0.0, hi = 1.0;
    while (excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw std::logic_error("dim_fm_oracle: root not bracketed");
    }
    while (hi - lo > s_tol) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Upper bound ln(|C| - 1) / ln(Delta / nabla) on the finite Minkowski
/// dimension of a non-focal C with |C| > 2.
inline double trivial_dim_bound(const PointCloud& c) {
    if (c.size() <= 2) throw std::invalid_argument("trivial_dim_bound: needs |C| > 2");
    const DistanceMatrix d(c);
    const double delta = diameter(d), nabla = covering_diameter(d);
    if (is_focal(d, default_focal_tol(delta))) throw std::invalid_argument("trivial_dim_bound: C is focal");
    return std::log(static_cast<double>(c.size() - 1)) / std::log(delta / nabla);
}

/// D_n(F) = L nabla(F) + b sqrt(ln T(F) / n), equal to
/// L nabla + b sqrt(dim_fM(F) ln(Delta/nabla) / n).
inline double fractal_bound(const PointCloud& f, double lipschitz, double b, std::size_t n,
                            const SolverLimits& limits = {}) {
    if (n == 0) throw std::invalid_argument("fractal_bound: n must be positive");
    if (f.size() <= 2) throw std::invalid_argument("fractal_bound: needs |F| > 2");
    const DimResult dim = dim_fm(f, limits);
    if (dim.focal) throw std::invalid_argument("fractal_bound: F is focal, dimension is infinite");
    return lipschitz * dim.nabla + b * std::sqrt(std::log(static_cast<double>(*dim.T)) / static_cast<double>(n));
}

/**
 * Steiner points for C at scale eps.
 *
 * Every point of C with no neighbour within eps is necessarily the centre of
 * its own ball in any eps-cover. For each such point a, a new point is put
 * on the segment from a towards another point q of C (so it stays in the
 * convex hull and cannot raise the diameter), at distance eps from a when
 * that leaves a as the only point of C within eps of the new point, and
 * closer to a otherwise. The new points are then inside balls of an optimal
 * cover and cannot serve as better centres, so the eps-covering number is
 * unchanged while the covering diameter drops to at most eps.
 */
inline std::vector<Vector> steiner_augment(const PointCloud& c, double eps) {
    const DistanceMatrix d(c);
    const double delta = diameter(d);
    if (!(eps > 0.0 && eps < delta))
        throw std::invalid_argument("steiner_augment: eps must lie in (0, Delta(C))");
    if (is_focal(d, default_focal_tol(delta))) throw std::invalid_argument("steiner_augment: C is focal");
    const std::size_t n = c.size();
    const auto nu = nn_distances(d);
    std::vector<Vector> steiner;

    auto toward = [&](std::size_t a, std::size_t q, double r) {
        const Vector& pa = c[a];
        const Vector& pq = c[q];
        double t = r / d(a, q);
        Vector p(pa.size());
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (std::size_t k = 0; k < p.size(); ++k) p[k] = pa[k] + t * (pq[k] - pa[k]);
            if (distance(pa, p, c.metric()) <= r) break;
            t *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
        }
        return p;
    };
    auto isolates = [&](const Vector& p, std::size_t a) {
        for (std::size_t x = 0; x < n; ++x)
            if (x != a && within(distance(p, c[x], c.metric()), eps)) return false;
        return true;
    };

    for (std::size_t a = 0; a < n; ++a) {
        if (within(nu[a], eps)) continue;
        std::vector<std::size_t> order;
        for (std::size_t q = 0; q < n; ++q)
            if (q != a) order.push_back(q);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d(a, x) < d(a, y); });
        std::optional<Vector> chosen;
        for (std::size_t q : order) {
            Vector p = toward(a, q, eps);
            if (isolates(p, a)) {
                chosen = std::move(p);
                break;
            }
        }
        if (!chosen) chosen = toward(a, order.front(), std::min(eps, 0.5 * (nu[a] - eps)));
        steiner.push_back(std::move(*chosen));
    }
    return steiner;
}

struct SteinerCheck {
    bool fewer_points = false;      // |P| < |C|
    bool nabla_at_most_eps = false;  // nabla(C u P) <= eps
    bool diameter_kept = false;     // Delta(C u P) == Delta(C)
    bool cover_kept = false;        // N(C, eps) == N(C u P, eps)
    bool covers_exact = false;
    bool all() const { return fewer_points && nabla_at_most_eps && diameter_kept && cover_kept; }
};

inline PointCloud with_points(const PointCloud& c, std::span<const Vector> extra) {
    std::vector<Vector> pts = c.points();
    pts.insert(pts.end(), extra.begin(), extra.end());
    return PointCloud(std::move(pts), c.metric(), c.dedup_tol());
}

/// Evaluates the three Steiner-point properties for C and P at scale eps.
inline SteinerCheck check_steiner(const PointCloud& c, std::span<const Vector> p, double eps,
                                  const SolverLimits& limits = {}) {
    SteinerCheck out;
    out.fewer_points = p.size() < c.size();
    const PointCloud u = with_points(c, p);
    const DistanceMatrix du(u);
    out.nabla_at_most_eps = within(covering_diameter(du), eps);
    out.diameter_kept = diameter(du) == diameter(c);
    const CoverResult before = covering_number(c, eps, limits);
    const CoverResult after = covering_number(u, eps, limits);
    out.cover_kept = before.count == after.count;
    out.covers_exact = before.exact && after.exact;
    return out;
}

/**
 * Least-squares slope of ln N(C, eps) against ln(1/eps) over a grid of
 * scales. A finite-scale proxy for the upper Minkowski dimension.
 */
inline double minkowski_slope_estimate(const PointCloud& c, std::span<const double> eps_grid,
                                       const SolverLimits& limits = {}) {
    std::vector<double> g(eps_grid.begin(), eps_grid.end());
    std::sort(g.begin(), g.end());
    if (std::unique(g.begin(), g.end()) - g.begin() < 2)
        throw std::invalid_argument("minkowski_slope_estimate: need at least two distinct scales");
    for (double e : g)
        if (!(e > 0.0)) throw std::invalid_argument("minkowski_slope_estimate: scales must be positive");
    if (c.size() == 1) return 0.0;
    const double delta = diameter(c);
    std::vector<double> x, y;
    for (double e : eps_grid) {
        if (!(e < delta)) throw std::invalid_argument("minkowski_slope_estimate: scale not below the diameter");
        x.push_back(-std::log(e));
        y.push_back(std::log(static_cast<double>(covering_number(c, e, limits).count)));
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace arc
