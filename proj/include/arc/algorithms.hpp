/**
 * @file algorithms.hpp
 *
 * Loss models and the concrete learners used in the experiments: projected
 * SGD, ERM over a finite grid, a farthest-point k-compression scheme and
 * ERM over 1-D threshold classifiers.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arc/metric.hpp"
#include "arc/rng.hpp"
#include "arc/supersample.hpp"

namespace arc {

/// Compact convex parameter domain: an axis-aligned box or a Euclidean ball.
class Domain {
public:
    enum class Kind { Box, Ball };

    static Domain box(Vector lo, Vector hi) {
        check_vector(lo);
        check_vector(hi);
        if (lo.size() != hi.size()) throw std::invalid_argument("domain box: dimension mismatch");
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (lo[k] > hi[k]) throw std::invalid_argument("domain box: lower bound exceeds upper bound");
        Domain d(Kind::Box);
        d.lo_ = std::move(lo);
        d.hi_ = std::move(hi);
        return d;
    }

    static Domain ball(Vector center, double radius) {
        check_vector(center);
        if (!(radius > 0.0)) throw std::invalid_argument("domain ball: radius must be positive");
        Domain d(Kind::Ball);
        d.lo_ = d.hi_ = center;
        for (std::size_t k = 0; k < center.size(); ++k) {
            d.lo_[k] -= radius;
            d.hi_[k] += radius;
        }
        d.center_ = std::move(center);
        d.radius_ = radius;
        return d;
    }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return lo_.size(); }
    /// Bounding box (the box itself for Box domains).
    const Vector& lo() const { return lo_; }
    const Vector& hi() const { return hi_; }

    /// Euclidean projection: coordinate clamp for boxes, radial rescale for balls.
    Vector project(Vector x) const {
        if (x.size() != dim()) throw std::invalid_argument("projection: dimension mismatch");
        if (kind_ == Kind::Box) {
            for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], lo_[k], hi_[k]);
            return x;
        }
        const double r = distance(x, center_, Metric::L2);
        // Rescaled points can land an ulp outside; treat those as on the sphere.
        if (r <= radius_ * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) return x;
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = center_[k] + (x[k] - center_[k]) * (radius_ / r);
        return x;
    }

    bool contains(const Vector& x, double slack = 1e-12) const {
        if (x.size() != dim()) return false;
        if (kind_ == Kind::Box) {
            for (std::size_t k = 0; k < x.size(); ++k)
                if (x[k] < lo_[k] - slack || x[k] > hi_[k] + slack) return false;
            return true;
        }
        return distance(x, center_, Metric::L2) <= radius_ + slack;
    }

    /// Euclidean diameter.
    double diameter() const {
        if (kind_ == Kind::Ball) return 2.0 * radius_;
        return distance(lo_, hi_, Metric::L2);
    }

    Vector sample(Rng& rng) const {
        if (kind_ == Kind::Box) {
            Vector x(dim());
            for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform(lo_[k], hi_[k]);
            return x;
        }
        while (true) {
            Vector x(dim());
            for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform(lo_[k], hi_[k]);
            if (contains(x, 0.0)) return x;
        }
    }

private:
    explicit Domain(Kind k) : kind_(k) {}
    Kind kind_;
    Vector lo_, hi_, center_;
    double radius_ = 0.0;
};

/**
 * A loss l(theta, z) with its declared constants. `offset` is the optional
 * centering function h of weak Lipschitz continuity; an empty offset means
 * h = 0. Values lie in [range_a + h(theta), range_a + range_b + h(theta)].
 * `lipschitz` is stated with respect to `metric` on parameters.
 */
struct LossModel {
    enum class Kind { Quadratic, ZeroOneThreshold, Custom };

    Kind kind = Kind::Custom;
    std::string name;
    std::function<double(const Vector&, const Vector&)> eval;
    std::function<Vector(const Vector&, const Vector&)> grad;
    std::function<double(const Vector&)> offset;
    double lipschitz = 0.0;
    double range_a = 0.0;
    double range_b = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    Metric metric = Metric::L2;
    Vector curvature;  // Quadratic only

    double h(const Vector& theta) const { return offset ? offset(theta) : 0.0; }
    /// l(theta, z) - h(theta); same generalization gap, plain Lipschitz.
    double centered(const Vector& theta, const Vector& z) const { return eval(theta, z) - h(theta); }
};

/**
 * l(theta, z) = 1/2 sum_k A_k (theta_k - z_k)^2 with A = diag(curvature),
 * for theta in `domain` and z in the box [z_lo, z_hi]. Strong convexity and
 * smoothness are min A and max A; range and Lipschitz constant are the
 * exact suprema over the domain's bounding box and the data box.
 */
inline LossModel quadratic_loss(Vector curvature, const Domain& domain, const Vector& z_lo, const Vector& z_hi,
                                Metric metric = Metric::L2) {
    check_vector(curvature);
    const std::size_t dim = curvature.size();
    if (domain.dim() != dim || z_lo.size() != dim || z_hi.size() != dim)
        throw std::invalid_argument("quadratic_loss: dimension mismatch");
    for (double a : curvature)
        if (!(a > 0.0)) throw std::invalid_argument("quadratic_loss: curvature must be positive");
    LossModel l;
    l.kind = LossModel::Kind::Quadratic;
    l.name = "quadratic";
    l.curvature = curvature;
    l.metric = metric;
    l.eval = [curvature](const Vector& theta, const Vector& z) {
        double s = 0.0;
        for (std::size_t k = 0; k < curvature.size(); ++k) s += curvature[k] * (theta[k] - z[k]) * (theta[k] - z[k]);
        return 0.5 * s;
    };
    l.grad = [curvature](const Vector& theta, const Vector& z) {
        Vector g(curvature.size());
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = curvature[k] * (theta[k] - z[k]);
        return g;
    };
    double range = 0.0, l1 = 0.0, l2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double w = std::max(std::abs(domain.hi()[k] - z_lo[k]), std::abs(z_hi[k] - domain.lo()[k]));
        range += curvature[k] * w * w;
        l1 += curvature[k] * w;
        l2 += curvature[k] * w * curvature[k] * w;
    }
    l.range_a = 0.0;
    l.range_b = range > 0.0 ? 0.5 * range : 1.0;
    l.lipschitz = metric == Metric::Linf ? l1 : std::sqrt(l2);
    l.alpha = *std::min_element(curvature.begin(), curvature.end());
    l.beta = *std::max_element(curvature.begin(), curvature.end());
    return l;
}

/// 0-1 loss of the threshold classifier x -> [x > theta] on z = (x, y).
inline LossModel zero_one_threshold_loss() {
    LossModel l;
    l.kind = LossModel::Kind::ZeroOneThreshold;
    l.name = "zero_one_threshold";
    l.eval = [](const Vector& theta, const Vector& z) {
        const double predicted = z[0] > theta[0] ? 1.0 : 0.0;
        return predicted == z[1] ? 0.0 : 1.0;
    };
    l.lipschitz = std::numeric_limits<double>::infinity();
    l.range_a = 0.0;
    l.range_b = 1.0;
    return l;
}

/**
 * Spot-checks the declared constants at `pairs` random (theta, theta', z)
 * with theta in the domain and z in the data box: range, weak Lipschitz
 * continuity, and (when a gradient and alpha > 0 are declared) strong
 * convexity and smoothness. Throws on the first violation.
 */
inline void validate_loss(const LossModel& loss, const Domain& domain, const Vector& z_lo, const Vector& z_hi,
                          std::uint64_t seed = 0x10551, std::size_t pairs = 1000, double tol = 1e-9) {
    if (!loss.eval) throw std::invalid_argument("loss model has no evaluator");
    if (loss.alpha > loss.beta) throw std::invalid_argument("loss model: alpha exceeds beta");
    Rng rng(seed);
    auto fail = [&](const std::string& what) { throw std::invalid_argument("loss '" + loss.name + "': " + what); };
    for (std::size_t t = 0; t < pairs; ++t) {
        const Vector th = domain.sample(rng), th2 = domain.sample(rng);
        Vector z(z_lo.size());
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = rng.uniform(z_lo[k], z_hi[k]);
        const double v = loss.centered(th, z), v2 = loss.centered(th2, z);
        const double scale = std::abs(loss.range_a) + loss.range_b;
        if (v < loss.range_a - tol * scale || v > loss.range_a + loss.range_b + tol * scale)
            fail("value " + std::to_string(v) + " outside declared range");
        if (std::isfinite(loss.lipschitz) &&
            std::abs(v - v2) > loss.lipschitz * distance(th, th2, loss.metric) + tol * (1.0 + scale))
            fail("Lipschitz constant violated");
        if (loss.grad && loss.alpha > 0.0) {
            const Vector g = loss.grad(th, z), g2 = loss.grad(th2, z);
            double inner = 0.0, dg = 0.0, dt = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                inner += (g[k] - g2[k]) * (th[k] - th2[k]);
                dg += (g[k] - g2[k]) * (g[k] - g2[k]);
                dt += (th[k] - th2[k]) * (th[k] - th2[k]);
            }
            if (inner < loss.alpha * dt - tol * (1.0 + dt)) fail("strong convexity violated");
            if (std::sqrt(dg) > loss.beta * std::sqrt(dt) + tol * (1.0 + std::sqrt(dt))) fail("smoothness violated");
        }
    }
}

struct LearnerSpec {
    enum class Kind { Sgd, ErmGrid, CompressK, VcThreshold };
    Kind kind = Kind::ErmGrid;

    // Sgd
    Vector theta1;
    double eta = 0.0;
    std::size_t T = 0;
    std::vector<std::size_t> indices;  // explicit i_1..i_T; empty: drawn from the run seed
    std::optional<Domain> domain;

    // ErmGrid
    std::vector<Vector> grid;

    // CompressK
    std::size_t k = 0;

    // VcThreshold: finite stand-ins for -inf / +inf outside the data support.
    double sentinel_lo = -1.0;
    double sentinel_hi = 2.0;

    std::string id() const {
        switch (kind) {
            case Kind::Sgd: return "sgd(T=" + std::to_string(T) + ")";
            case Kind::ErmGrid: return "erm_grid(" + std::to_string(grid.size()) + ")";
            case Kind::CompressK: return "compress_k(k=" + std::to_string(k) + ")";
            case Kind::VcThreshold: return "vc_threshold";
        }
        return "unknown";
    }
};

/// gamma = sqrt(1 - 2 alpha eta + alpha beta eta^2), the Lipschitz constant
/// of one projected gradient step.
inline double contraction_factor(double alpha, double beta, double eta) {
    if (!(alpha > 0.0 && alpha <= beta)) throw std::invalid_argument("contraction_factor: need 0 < alpha <= beta");
    if (!(eta > 0.0 && eta < 2.0 / beta)) throw std::invalid_argument("contraction_factor: eta must lie in (0, 2/beta)");
    return std::sqrt(std::max(0.0, 1.0 - 2.0 * alpha * eta + alpha * beta * eta * eta));
}

/// Smallest m >= 0 with gamma^m R <= eps.
inline std::size_t forgetting_depth(double R, double gamma, double eps) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("forgetting_depth: gamma must lie in [0, 1)");
    if (!(R > 0.0 && eps > 0.0)) throw std::invalid_argument("forgetting_depth: R and eps must be positive");
    if (R <= eps) return 0;
    if (gamma == 0.0) return 1;
    auto m = static_cast<std::size_t>(std::max(0.0, std::ceil(std::log(R / eps) / std::log(1.0 / gamma))));
    // Repair rounding in the ratio of logs.
    while (m > 0 && std::pow(gamma, static_cast<double>(m - 1)) * R <= eps) --m;
    while (std::pow(gamma, static_cast<double>(m)) * R > eps) ++m;
    return m;
}

/// One projected step Phi_z(theta) = Proj(theta - eta grad l(theta, z)).
inline Vector sgd_step(const LossModel& loss, const Domain& domain, double eta, const Vector& z, const Vector& theta) {
    Vector g = loss.grad(theta, z);
    Vector next(theta.size());
    for (std::size_t k = 0; k < next.size(); ++k) next[k] = theta[k] - eta * g[k];
    return domain.project(std::move(next));
}

/// Index sequence i_1..i_T: explicit if given, else drawn uniformly from
/// {0..n-1} with the run seed.
inline std::vector<std::size_t> sgd_indices(const LearnerSpec& spec, std::size_t n, std::uint64_t seed) {
    if (!spec.indices.empty()) {
        if (spec.indices.size() != spec.T) throw std::invalid_argument("sgd: explicit index list length differs from T");
        for (auto i : spec.indices)
            if (i >= n) throw std::invalid_argument("sgd: index " + std::to_string(i) + " out of range");
        return spec.indices;
    }
    Rng rng(seed);
    std::vector<std::size_t> idx(spec.T);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
    return idx;
}

/// T projected SGD steps from theta1; returns theta_{T+1}.
inline Vector sgd_run(const LossModel& loss, const LearnerSpec& spec, std::span<const Vector> sample,
                      std::uint64_t seed = 0) {
    if (!spec.domain) throw std::invalid_argument("sgd: no projection domain");
    if (!loss.grad) throw std::invalid_argument("sgd: loss has no gradient");
    if (spec.T == 0) throw std::invalid_argument("sgd: T must be at least 1");
    if (!(spec.eta > 0.0 && spec.eta < 2.0 / loss.beta))
        throw std::invalid_argument("sgd: eta = " + std::to_string(spec.eta) + " outside (0, 2/beta)");
    if (!spec.domain->contains(spec.theta1)) throw std::invalid_argument("sgd: theta1 outside the domain");
    if (sample.empty()) throw std::invalid_argument("sgd: empty sample");
    Vector theta = spec.theta1;
    for (std::size_t i : sgd_indices(spec, sample.size(), seed)) theta = sgd_step(loss, *spec.domain, spec.eta, sample[i], theta);
    return theta;
}

/// Empirical risk with a fixed summation order.
inline double empirical_risk(const LossModel& loss, const Vector& theta, std::span<const Vector> sample) {
    double s = 0.0;
    for (const auto& z : sample) s += loss.eval(theta, z);
    return s / static_cast<double>(sample.size());
}

/// Grid point of least empirical risk; ties go to the lowest grid index.
inline Vector erm_finite(std::span<const Vector> grid, const LossModel& loss, std::span<const Vector> sample) {
    if (grid.empty()) throw std::invalid_argument("erm_finite: empty grid");
    std::size_t best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double r = empirical_risk(loss, grid[g], sample);
        if (r < best_risk) best_risk = r, best = g;
    }
    return grid[best];
}

struct Compression {
    std::vector<Vector> subsample;
    Vector theta;
};

/**
 * k-compression scheme. Selection: farthest-point traversal (Euclidean)
 * from the lexicographically smallest point, ties broken lexicographically,
 * so the result depends only on the multiset of sample points.
 * Reconstruction: coordinate-wise mean of the selected points.
 */
inline Compression compress_k(std::span<const Vector> sample, std::size_t k) {
    if (k == 0) throw std::invalid_argument("compress_k: k must be positive");
    if (k > sample.size())
        throw std::invalid_argument("compress_k: k = " + std::to_string(k) + " exceeds n = " + std::to_string(sample.size()));
    std::vector<Vector> pts(sample.begin(), sample.end());
    std::sort(pts.begin(), pts.end());
    std::vector<bool> used(pts.size(), false);
    std::vector<double> gap(pts.size(), std::numeric_limits<double>::infinity());
    Compression out;
    std::size_t next = 0;
    for (std::size_t step = 0; step < k; ++step) {
        used[next] = true;
        out.subsample.push_back(pts[next]);
        std::size_t far = pts.size();
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (used[j]) continue;
            gap[j] = std::min(gap[j], distance(pts[j], pts[next], Metric::L2));
            if (far == pts.size() || gap[j] > gap[far]) far = j;  // sorted order breaks ties
        }
        next = far;
    }
    out.theta.assign(pts.front().size(), 0.0);
    for (const auto& p : out.subsample)
        for (std::size_t c = 0; c < p.size(); ++c) out.theta[c] += p[c];
    for (auto& c : out.theta) c /= static_cast<double>(k);
    return out;
}

/**
 * ERM over thresholds x -> [x > theta] under 0-1 loss. Candidates are -inf,
 * midpoints between consecutive distinct x values, and +inf; ties go to the
 * smallest threshold. Sample entries are (x, y) with y in {0, 1}.
 */
inline double vc_threshold_erm(std::span<const Vector> sample) {
    if (sample.empty()) throw std::invalid_argument("vc_threshold_erm: empty sample");
    std::vector<double> xs;
    for (const auto& z : sample) {
        if (z.size() != 2) throw std::invalid_argument("vc_threshold_erm: entries must be (x, y) pairs");
        if (z[1] != 0.0 && z[1] != 1.0) throw std::invalid_argument("vc_threshold_erm: labels must be 0 or 1");
        xs.push_back(z[0]);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<double> cuts{-std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) cuts.push_back(0.5 * (xs[i] + xs[i + 1]));
    cuts.push_back(std::numeric_limits<double>::infinity());
    double best = cuts.back();
    std::size_t best_err = sample.size() + 1;
    for (double t : cuts) {
        std::size_t err = 0;
        for (const auto& z : sample) err += ((z[0] > t) ? 1.0 : 0.0) != z[1];
        if (err < best_err) best_err = err, best = t;
    }
    return best;
}

/// Type-erased learner for a spec. The seed argument drives SGD's index
/// draws and is ignored by the deterministic learners.
inline LearnerFn make_learner(const LearnerSpec& spec, const LossModel& loss) {
    switch (spec.kind) {
        case LearnerSpec::Kind::Sgd:
            if (!spec.domain) throw std::invalid_argument("sgd learner needs a domain");
            contraction_factor(loss.alpha, loss.beta, spec.eta);
            return [spec, loss](std::span<const Vector> s, std::uint64_t seed) { return sgd_run(loss, spec, s, seed); };
        case LearnerSpec::Kind::ErmGrid:
            if (spec.grid.empty()) throw std::invalid_argument("erm_grid learner needs a nonempty grid");
            return [spec, loss](std::span<const Vector> s, std::uint64_t) { return erm_finite(spec.grid, loss, s); };
        case LearnerSpec::Kind::CompressK:
            if (spec.k == 0) throw std::invalid_argument("compress_k learner needs k >= 1");
            return [k = spec.k](std::span<const Vector> s, std::uint64_t) { return compress_k(s, k).theta; };
        case LearnerSpec::Kind::VcThreshold:
            return [lo = spec.sentinel_lo, hi = spec.sentinel_hi](std::span<const Vector> s, std::uint64_t) {
                return Vector{std::clamp(vc_threshold_erm(s), lo, hi)};
            };
    }
    throw std::logic_error("unreachable");
}

}  // namespace arc
