/**
 * @file supersample.hpp
 *
 * Ghost/primary supersamples, sign-vector mixing, and the learner output
 * sets built from them:
 *
 *   theta_hat = { A(S_sigma) : sigma in {-1,+1}^n }
 *   theta_bar = { A(S) : S a size-n subset of the 2n supersample points }
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/metric.hpp"
#include "arc/rng.hpp"

namespace arc {

/// Data-generating distributions. All have bounded support, reported by
/// support_lo()/support_hi().
class Distribution {
public:
    enum class Kind { UniformBox, TruncGauss, Empirical, LabeledThreshold };

    static Distribution uniform_box(Vector lo, Vector hi) {
        check_box(lo, hi);
        Distribution d(Kind::UniformBox);
        d.lo_ = std::move(lo);
        d.hi_ = std::move(hi);
        return d;
    }

    /// Isotropic Gaussian N(mean, sd^2 I) conditioned on the box [lo, hi].
    static Distribution trunc_gauss(Vector mean, double sd, Vector lo, Vector hi) {
        check_box(lo, hi);
        check_vector(mean);
        if (mean.size() != lo.size()) throw std::invalid_argument("trunc_gauss: mean dimension mismatch");
        if (!(sd > 0.0)) throw std::invalid_argument("trunc_gauss: sd must be positive");
        Distribution d(Kind::TruncGauss);
        d.mean_ = std::move(mean);
        d.sd_ = sd;
        d.lo_ = std::move(lo);
        d.hi_ = std::move(hi);
        return d;
    }

    /// Uniform over a finite list of atoms (repeats allowed). A single atom
    /// is a point mass.
    static Distribution empirical(std::vector<Vector> atoms) {
        if (atoms.empty()) throw std::invalid_argument("empirical distribution needs at least one atom");
        Distribution d(Kind::Empirical);
        const std::size_t dim = atoms.front().size();
        d.lo_ = atoms.front();
        d.hi_ = atoms.front();
        for (const auto& a : atoms) {
            check_vector(a);
            if (a.size() != dim) throw std::invalid_argument("empirical distribution: mixed dimensions");
            for (std::size_t k = 0; k < dim; ++k) {
                d.lo_[k] = std::min(d.lo_[k], a[k]);
                d.hi_[k] = std::max(d.hi_[k], a[k]);
            }
        }
        d.atoms_ = std::move(atoms);
        return d;
    }

    /// Labelled pairs z = (x, y): x ~ U[0, 1], y = [x > threshold] flipped
    /// with probability `noise`.
    static Distribution labeled_threshold(double threshold, double noise) {
        if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("labeled_threshold: threshold outside [0, 1]");
        if (!(noise >= 0.0 && noise <= 0.5)) throw std::invalid_argument("labeled_threshold: noise outside [0, 1/2]");
        Distribution d(Kind::LabeledThreshold);
        d.threshold_ = threshold;
        d.noise_ = noise;
        d.lo_ = {0.0, 0.0};
        d.hi_ = {1.0, 1.0};
        return d;
    }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return lo_.size(); }
    const Vector& support_lo() const { return lo_; }
    const Vector& support_hi() const { return hi_; }
    const Vector& mean_param() const { return mean_; }
    double sd() const { return sd_; }
    const std::vector<Vector>& atoms() const { return atoms_; }
    double threshold() const { return threshold_; }
    double noise() const { return noise_; }

    std::string id() const {
        switch (kind_) {
            case Kind::UniformBox: return "uniform_box";
            case Kind::TruncGauss: return "trunc_gauss";
            case Kind::Empirical: return "empirical";
            case Kind::LabeledThreshold: return "labeled_threshold";
        }
        return "unknown";
    }

    Vector draw(Rng& rng) const {
        switch (kind_) {
            case Kind::UniformBox: {
                Vector z(dim());
                for (std::size_t k = 0; k < z.size(); ++k) z[k] = lo_[k] == hi_[k] ? lo_[k] : rng.uniform(lo_[k], hi_[k]);
                return z;
            }
            case Kind::TruncGauss: {
                Vector z(dim());
                for (std::size_t k = 0; k < z.size(); ++k) {
                    if (lo_[k] == hi_[k]) {
                        z[k] = lo_[k];
                        continue;
                    }
                    double x;
                    do x = mean_[k] + sd_ * rng.normal();
                    while (x < lo_[k] || x > hi_[k]);
                    z[k] = x;
                }
                return z;
            }
            case Kind::Empirical: return atoms_[rng.below(atoms_.size())];
            case Kind::LabeledThreshold: {
                const double x = rng.uniform();
                double y = x > threshold_ ? 1.0 : 0.0;
                if (rng.bernoulli(noise_)) y = 1.0 - y;
                return {x, y};
            }
        }
        throw std::logic_error("unreachable");
    }

private:
    explicit Distribution(Kind k) : kind_(k) {}

    static void check_box(const Vector& lo, const Vector& hi) {
        check_vector(lo);
        check_vector(hi);
        if (lo.size() != hi.size()) throw std::invalid_argument("box bounds have different dimensions");
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (lo[k] > hi[k]) throw std::invalid_argument("box lower bound exceeds upper bound");
    }

    Kind kind_;
    Vector lo_, hi_, mean_;
    double sd_ = 0.0;
    std::vector<Vector> atoms_;
    double threshold_ = 0.0, noise_ = 0.0;
};

struct Supersample {
    std::vector<Vector> s_minus;  // ghost sample
    std::vector<Vector> s_plus;   // primary sample
    std::uint64_t seed = 0;
    std::string dist_id;
    std::size_t n() const { return s_plus.size(); }
};

/// 2n i.i.d. draws; the first n form the ghost sample.
inline Supersample draw_supersample(const Distribution& dist, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("draw_supersample: n must be positive");
    Rng rng(seed);
    Supersample ss;
    ss.seed = seed;
    ss.dist_id = dist.id();
    ss.s_minus.reserve(n);
    ss.s_plus.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ss.s_minus.push_back(dist.draw(rng));
    for (std::size_t i = 0; i < n; ++i) ss.s_plus.push_back(dist.draw(rng));
    return ss;
}

class SignVector {
public:
    explicit SignVector(std::vector<int> signs) : s_(std::move(signs)) {
        for (int x : s_)
            if (x != 1 && x != -1) throw std::invalid_argument("sign vector entries must be +1 or -1");
    }

    static SignVector constant(std::size_t n, int sign) { return SignVector(std::vector<int>(n, sign)); }

    /// Lexicographic enumeration with -1 < +1: sigma_1 is the most
    /// significant bit of `index`.
    static SignVector from_index(std::uint64_t index, std::size_t n) {
        std::vector<int> s(n);
        for (std::size_t i = 0; i < n; ++i) s[i] = (index >> (n - 1 - i)) & 1U ? 1 : -1;
        return SignVector(std::move(s));
    }

    std::size_t size() const { return s_.size(); }
    int operator[](std::size_t i) const { return s_[i]; }
    const std::vector<int>& signs() const { return s_; }
    friend auto operator<=>(const SignVector&, const SignVector&) = default;

private:
    std::vector<int> s_;
};

/// Position i comes from s_minus when sigma_i = -1, from s_plus when +1.
inline std::vector<Vector> mix(const Supersample& ss, const SignVector& sigma) {
    if (sigma.size() != ss.n())
        throw std::invalid_argument("mix: sign vector length " + std::to_string(sigma.size()) +
                                    " does not match n = " + std::to_string(ss.n()));
    std::vector<Vector> out;
    out.reserve(ss.n());
    for (std::size_t i = 0; i < ss.n(); ++i) out.push_back(sigma[i] > 0 ? ss.s_plus[i] : ss.s_minus[i]);
    return out;
}

/// A learner maps a sample and a randomness seed to a parameter vector.
template <typename A>
concept Learner = requires(const A& a, std::span<const Vector> sample, std::uint64_t seed) {
    { a(sample, seed) } -> std::convertible_to<Vector>;
};

using LearnerFn = std::function<Vector(std::span<const Vector>, std::uint64_t)>;

struct ThetaMode {
    enum class Kind { Exact, Sampled } kind = Kind::Exact;
    std::size_t samples = 0;      // sign vectors drawn in Sampled mode
    std::uint64_t sigma_seed = 0;  // seed for drawing them

    static ThetaMode exact() { return {}; }
    static ThetaMode sampled(std::size_t m, std::uint64_t seed) { return {Kind::Sampled, m, seed}; }
};

struct ThetaSet {
    PointCloud cloud;
    bool exact = true;  // false: an inner approximation from sampled sign vectors
    std::size_t runs = 0;
};

namespace detail {

/// Collects learner outputs and deduplicates them in arrival order.
class OutputSet {
public:
    OutputSet(Metric m, double tol) : metric_(m), tol_(tol) {}

    void add(Vector v) {
        check_vector(v);
        if (tol_ == 0.0) {
            if (seen_.insert(v).second) kept_.push_back(std::move(v));
            return;
        }
        for (const auto& k : kept_)
            if (!(distance(v, k, metric_) > tol_)) return;
        kept_.push_back(std::move(v));
    }

    PointCloud finish() && { return PointCloud(std::move(kept_), metric_, tol_); }

private:
    Metric metric_;
    double tol_;
    std::set<Vector> seen_;
    std::vector<Vector> kept_;
};

}  // namespace detail

/**
 * Runs the learner on S_sigma for every sign vector (Exact, lexicographic
 * order) or for a uniform draw of them (Sampled). Every run gets the same
 * learner seed, so a randomized learner is conditioned on its randomness.
 * Sampled mode draws without replacement when m <= 2^n / 2 and with
 * replacement otherwise; its output is a subset of the Exact output.
 */
template <Learner A>
ThetaSet build_theta_hat(const A& learner, const Supersample& ss, const ThetaMode& mode, std::uint64_t learner_seed,
                         double tol = 0.0, Metric metric = Metric::Linf, std::size_t exact_n_limit = 20) {
    const std::size_t n = ss.n();
    detail::OutputSet outputs(metric, tol);
    bool exact = true;
    std::size_t runs = 0;
    auto run = [&](const SignVector& sigma) {
        const auto sample = mix(ss, sigma);
        outputs.add(learner(std::span<const Vector>(sample), learner_seed));
        ++runs;
    };
    if (mode.kind == ThetaMode::Kind::Exact) {
        if (n > exact_n_limit || n > 62)
            throw std::invalid_argument("build_theta_hat: n = " + std::to_string(n) + " exceeds exact_n_limit " +
                                        std::to_string(exact_n_limit) + " for exact enumeration");
        for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) run(SignVector::from_index(k, n));
    } else {
        if (mode.samples == 0) throw std::invalid_argument("build_theta_hat: sampled mode needs m >= 1");
        Rng rng(mode.sigma_seed);
        const bool small = n < 63;
        const double total = std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(n, 1000)));
        if (small && static_cast<double>(mode.samples) >= total) {
            for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) run(SignVector::from_index(k, n));
        } else {
            exact = false;
            const bool without_replacement = static_cast<double>(mode.samples) <= total / 2.0;
            std::set<SignVector> drawn;
            while (runs < mode.samples) {
                std::vector<int> s(n);
                for (std::size_t i = 0; i < n; ++i) s[i] = (rng.next_u64() >> 63) ? 1 : -1;
                SignVector sigma(std::move(s));
                if (without_replacement && !drawn.insert(sigma).second) continue;
                run(sigma);
            }
        }
    }
    return ThetaSet{std::move(outputs).finish(), exact, runs};
}

/**
 * Runs the learner on every size-n subset of the 2n supersample points.
 * Points are pooled interleaved (s_minus[0], s_plus[0], s_minus[1], ...) and
 * each subset is passed in pool order, so S_sigma appears with its entries in
 * their original positions and theta_hat is contained in theta_bar.
 */
template <Learner A>
PointCloud build_theta_bar(const A& learner, const Supersample& ss, std::uint64_t learner_seed, double tol = 0.0,
                           Metric metric = Metric::Linf) {
    const std::size_t n = ss.n();
    if (n > 6) throw std::invalid_argument("build_theta_bar: n = " + std::to_string(n) + " exceeds 6");
    std::vector<Vector> pool;
    for (std::size_t i = 0; i < n; ++i) {
        pool.push_back(ss.s_minus[i]);
        pool.push_back(ss.s_plus[i]);
    }
    detail::OutputSet outputs(metric, tol);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    while (true) {
        std::vector<Vector> sample;
        for (std::size_t i : idx) sample.push_back(pool[i]);
        outputs.add(learner(std::span<const Vector>(sample), learner_seed));
        // Next combination in lexicographic order.
        std::size_t k = n;
        while (k > 0 && idx[k - 1] == 2 * n - n + k - 1) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t j = k; j < n; ++j) idx[j] = idx[j - 1] + 1;
    }
    return std::move(outputs).finish();
}

}  // namespace arc
