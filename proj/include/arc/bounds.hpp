/**
 * @file bounds.hpp
 *
 * Generalization gaps, the closed-form bounds, and the seeded experiments
 * that compare measured gaps and ARC values against them.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arc/algorithms.hpp"
#include "arc/fractal.hpp"
#include "arc/metric.hpp"
#include "arc/rademacher.hpp"
#include "arc/rng.hpp"
#include "arc/supersample.hpp"

namespace arc {

// ---------------------------------------------------------------- risk

enum class RiskMode { Auto, ClosedForm, Heldout };

struct RiskSpec {
    RiskMode mode = RiskMode::Auto;
    std::size_t heldout = 1'000'000;
};

struct GapMeasurement {
    Vector theta_hat;
    double empirical_risk = 0.0;
    double true_risk = 0.0;
    double gap = 0.0;
    double true_risk_se = 0.0;  // zero in closed form
    RiskMode risk_mode = RiskMode::ClosedForm;
    std::size_t heldout_draws = 0;
};

namespace detail {

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Mean and variance of N(mu, sd^2) conditioned on [lo, hi].
inline std::pair<double, double> truncated_normal_moments(double mu, double sd, double lo, double hi) {
    if (lo == hi) return {lo, 0.0};
    const double a = (lo - mu) / sd, b = (hi - mu) / sd;
    const double z = std_normal_cdf(b) - std_normal_cdf(a);
    if (!(z > 0.0)) throw std::invalid_argument("truncated normal: no mass on the box");
    const double pa = std_normal_pdf(a), pb = std_normal_pdf(b);
    const double shift = (pa - pb) / z;
    const double var = sd * sd * (1.0 + (a * pa - b * pb) / z - shift * shift);
    return {mu + sd * shift, std::max(0.0, var)};
}

}  // namespace detail

/// R(theta) when the (loss, distribution) pair has a closed form, else nullopt.
inline std::optional<double> closed_form_risk(const LossModel& loss, const Vector& theta, const Distribution& dist) {
    if (loss.kind == LossModel::Kind::Quadratic) {
        if (dist.kind() == Distribution::Kind::LabeledThreshold) return std::nullopt;
        if (theta.size() != dist.dim() || loss.curvature.size() != dist.dim())
            throw std::invalid_argument("closed_form_risk: dimension mismatch");
        if (dist.kind() == Distribution::Kind::Empirical) {
            double s = 0.0;
            for (const auto& z : dist.atoms()) s += loss.eval(theta, z);
            return s / static_cast<double>(dist.atoms().size());
        }
        double r = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double lo = dist.support_lo()[k], hi = dist.support_hi()[k];
            double mean = 0.5 * (lo + hi), var = (hi - lo) * (hi - lo) / 12.0;
            if (dist.kind() == Distribution::Kind::TruncGauss)
                std::tie(mean, var) = detail::truncated_normal_moments(dist.mean_param()[k], dist.sd(), lo, hi);
            r += 0.5 * loss.curvature[k] * ((theta[k] - mean) * (theta[k] - mean) + var);
        }
        return r;
    }
    if (loss.kind == LossModel::Kind::ZeroOneThreshold && dist.kind() == Distribution::Kind::LabeledThreshold) {
        const double p = dist.noise(), t = dist.threshold();
        return p + (1.0 - 2.0 * p) * std::abs(std::clamp(theta[0], 0.0, 1.0) - t);
    }
    return std::nullopt;
}

/// True risk minus empirical risk of theta. Held-out mode draws `heldout`
/// fresh points with `seed` and reports the standard error of the estimate.
inline GapMeasurement generalization_gap(const LossModel& loss, const Vector& theta, std::span<const Vector> sample,
                                         const Distribution& dist, const RiskSpec& risk = {},
                                         std::uint64_t seed = 0) {
    if (sample.empty()) throw std::invalid_argument("generalization_gap: empty sample");
    GapMeasurement g;
    g.theta_hat = theta;
    g.empirical_risk = empirical_risk(loss, theta, sample);
    std::optional<double> closed;
    if (risk.mode != RiskMode::Heldout) closed = closed_form_risk(loss, theta, dist);
    if (risk.mode == RiskMode::ClosedForm && !closed)
        throw std::invalid_argument("generalization_gap: no closed-form risk for loss '" + loss.name +
                                    "' under distribution '" + dist.id() + "'");
    if (closed) {
        g.true_risk = *closed;
        g.risk_mode = RiskMode::ClosedForm;
    } else {
        if (risk.heldout < 2) throw std::invalid_argument("generalization_gap: held-out size must be at least 2");
        Rng rng(seed);
        std::vector<double> v(risk.heldout);
        for (auto& x : v) x = loss.eval(theta, dist.draw(rng));
        const double m = static_cast<double>(v.size());
        const double mean = pairwise_sum(v) / m;
        for (auto& x : v) x = (x - mean) * (x - mean);
        g.true_risk = mean;
        g.true_risk_se = std::sqrt(pairwise_sum(v) / (m - 1.0) / m);
        g.risk_mode = RiskMode::Heldout;
        g.heldout_draws = risk.heldout;
    }
    g.gap = g.true_risk - g.empirical_risk;
    return g;
}

// ---------------------------------------------------------------- bounds

/// 4 * estimate + b sqrt(8 ln(2/delta) / n). The estimate stands in for the
/// essential supremum of the ARC and is in practice a max over draws, i.e.
/// a lower approximation of it.
inline double highprob_rhs(double rad_essup_estimate, double b, std::size_t n, double delta) {
    if (!(rad_essup_estimate >= 0.0)) throw std::invalid_argument("highprob_rhs: estimate must be nonnegative");
    if (!(b > 0.0)) throw std::invalid_argument("highprob_rhs: b must be positive");
    if (n == 0) throw std::invalid_argument("highprob_rhs: n must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("highprob_rhs: delta must lie in (0, 1]");
    return 4.0 * rad_essup_estimate + b * std::sqrt(8.0 * std::log(2.0 / delta) / static_cast<double>(n));
}

/// 4b sqrt(m ln 2 / n) + b sqrt(8 ln(2/delta) / n) + 2L/n with
/// m = forgetting_depth(R, gamma, 1/(2n)).
inline double sgd_rhs(double b, double R, std::size_t n, double gamma, double L, double delta) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("sgd_rhs: gamma must lie in [0, 1)");
    if (!(b > 0.0 && R > 0.0 && L >= 0.0)) throw std::invalid_argument("sgd_rhs: need b > 0, R > 0, L >= 0");
    if (n == 0) throw std::invalid_argument("sgd_rhs: n must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("sgd_rhs: delta must lie in (0, 1]");
    const double nn = static_cast<double>(n);
    const auto m = static_cast<double>(forgetting_depth(R, gamma, 1.0 / (2.0 * nn)));
    return 4.0 * b * std::sqrt(std::max(m * std::numbers::ln2, 0.0) / nn) + b * std::sqrt(8.0 * std::log(2.0 / delta) / nn) +
           2.0 * L / nn;
}

/// sqrt(k ln(2en/k) / (2n)), for losses in [0, 1].
inline double compression_rhs(std::size_t k, std::size_t n) {
    if (k == 0 || k > n) throw std::invalid_argument("compression_rhs: need 1 <= k <= n");
    const double kk = static_cast<double>(k), nn = static_cast<double>(n);
    return std::sqrt(kk * std::log(2.0 * std::numbers::e * nn / kk) / (2.0 * nn));
}

/// sqrt(2 V ln(en/V) / n): Massart's lemma on the Sauer growth bound
/// (en/V)^V, for losses in [0, 1].
inline double vc_rhs(std::size_t V, std::size_t n) {
    if (V == 0 || n <= V) throw std::invalid_argument("vc_rhs: need n > V >= 1");
    const double v = static_cast<double>(V), nn = static_cast<double>(n);
    return std::sqrt(2.0 * v * std::log(std::numbers::e * nn / v) / nn);
}

/// b sqrt(ln(2 |theta_hat|) / n), the limit of the fractal bound over
/// doubled sets.
inline double trivial_fractal_bound(std::size_t size, double b, std::size_t n) {
    if (size == 0 || n == 0) throw std::invalid_argument("trivial_fractal_bound: size and n must be positive");
    return b * std::sqrt(std::log(2.0 * static_cast<double>(size)) / static_cast<double>(n));
}

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

// ---------------------------------------------------------------- reports

struct BoundCheck {
    std::string name;
    std::string anchor;
    std::optional<std::size_t> rep;  // nullopt: aggregate over repetitions
    std::uint64_t seed = 0;
    double lhs = 0.0;
    double value = 0.0;
    bool pass = true;
};

struct FractalRecord {
    bool focal = false;
    bool applicable = false;  // non-focal with more than two points
    double dn = 0.0;          // D_n(theta_hat)
    double trivial = 0.0;
    double eps_star = 0.0;
    std::size_t steiner_points = 0;
    std::optional<double> steiner_dn;
    std::optional<SteinerCheck> steiner;
    bool exact = true;
};

struct RepRecord {
    std::size_t rep = 0;
    std::uint64_t seed = 0;          // supersample seed
    std::uint64_t learner_seed = 0;
    double gap = 0.0;
    double gap_se = 0.0;
    double arc = 0.0;
    std::size_t theta_size = 0;
    std::optional<FractalRecord> fractal;
};

struct BoundReport {
    std::string experiment;
    std::string learner_id;
    std::size_t n = 0;
    std::size_t reps = 0;
    double delta = 0.05;
    std::uint64_t seed = 0;

    double mean_gap = 0.0, se_gap = 0.0;
    double mean_arc = 0.0, se_arc = 0.0;
    double combined_se = 0.0;
    double essup_estimate = 0.0;

    std::optional<double> expectation_rhs, highprob_rhs, fractal_Dn, sgd_rhs, compression_rhs, vc_rhs;
    bool exact_theta_hat = true;
    bool exact_covers = true;

    std::vector<RepRecord> records;
    std::vector<BoundCheck> checks;
    std::vector<std::pair<std::size_t, double>> series;  // limit-trend output
    std::optional<double> minkowski_estimate;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
    }
};

struct MeanSe {
    double mean = 0.0, se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
    MeanSe out;
    if (xs.empty()) return out;
    const double m = static_cast<double>(xs.size());
    out.mean = pairwise_sum(xs) / m;
    if (xs.size() < 2) return out;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - out.mean) * (xs[i] - out.mean);
    out.se = std::sqrt(pairwise_sum(sq) / (m - 1.0) / m);
    return out;
}

// ---------------------------------------------------------------- experiments

/// Everything a seeded repetition loop needs. Repetition r uses supersample
/// seed derive_seed(seed, 2r) and learner seed derive_seed(learner_base, r),
/// where learner_base defaults to derive_seed(seed, 2r + 1) per repetition.
struct ExperimentSetup {
    LearnerFn learner;
    std::string learner_id = "custom";
    LossModel loss;
    Distribution dist = Distribution::uniform_box({0.0}, {1.0});
    std::size_t n = 8;
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> learner_seed_base;
    double delta = 0.05;
    RiskSpec risk;
    SolverLimits limits;
    std::size_t exact_n_limit = kExactNLimit;
    Metric metric = Metric::Linf;
    double dedup_tol = 0.0;
    double check_tol = 1e-9;
    double margin_se = 3.0;
};

struct RepContext {
    std::size_t rep;
    Supersample ss;
    std::uint64_t learner_seed;
    ThetaSet theta;
    LossMatrix losses;
    double arc;
};

inline std::uint64_t rep_learner_seed(const ExperimentSetup& s, std::size_t r) {
    return s.learner_seed_base ? derive_seed(*s.learner_seed_base, r) : derive_seed(s.seed, 2 * r + 1);
}

inline LossMatrix theta_loss_matrix(const LossModel& loss, const PointCloud& theta, std::span<const Vector> sample) {
    return evaluate_losses(theta.points(), sample, [&](const Vector& t, const Vector& z) { return loss.centered(t, z); },
                           loss.range_a, loss.range_b);
}

/// Largest number of pairwise distances tried as eps* candidates; longer
/// sorted lists are thinned to evenly spaced ranks.
inline constexpr std::size_t kMaxFractalEpsGrid = 256;

/// Fractal-family bounds for one exact theta_hat: D_n(theta_hat), the
/// trivial bound, and D_n(theta_hat u P) with Steiner points P at the scale
/// eps* minimising the covering bound over the pairwise distances. Steiner
/// points are only built for sets within the exact cover limit.
inline FractalRecord fractal_record(const PointCloud& theta, double L, double b, std::size_t n,
                                    const SolverLimits& limits) {
    FractalRecord fr;
    fr.trivial = trivial_fractal_bound(theta.size(), b, n);
    if (theta.size() < 2) {
        fr.focal = true;
        return fr;
    }
    const DistanceMatrix d(theta);
    fr.focal = is_focal(d, default_focal_tol(diameter(d)));
    if (fr.focal || theta.size() <= 2) return fr;
    fr.applicable = true;
    const DimResult dim = dim_fm(theta, limits);
    fr.exact = dim.exact;
    fr.dn = L * dim.nabla + b * std::sqrt(std::log(static_cast<double>(*dim.T)) / static_cast<double>(n));

    std::vector<double> grid;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) grid.push_back(d(i, j));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() > kMaxFractalEpsGrid) {
        std::vector<double> thin;
        for (std::size_t k = 0; k < kMaxFractalEpsGrid; ++k)
            thin.push_back(grid[k * (grid.size() - 1) / (kMaxFractalEpsGrid - 1)]);
        grid = std::move(thin);
    }
    const CoveringRadBound best = covering_rad_bound(theta, L, b, n, grid, limits);
    fr.exact = fr.exact && best.exact;
    fr.eps_star = best.best_eps;
    if (fr.eps_star < dim.delta && theta.size() <= limits.exact_limit) {
        const auto p = steiner_augment(theta, fr.eps_star);
        fr.steiner_points = p.size();
        SolverLimits wide = limits;
        wide.exact_limit = std::max(limits.exact_limit, theta.size() + p.size());
        fr.steiner = check_steiner(theta, p, fr.eps_star, wide);
        fr.exact = fr.exact && fr.steiner->covers_exact;
        if (!p.empty()) {
            const PointCloud f = with_points(theta, p);
            if (!is_focal(f)) fr.steiner_dn = fractal_bound(f, L, b, n, limits);
        }
    }
    return fr;
}

/**
 * Shared repetition loop: draws the supersample, builds the exact theta_hat,
 * measures the gap of A(S_plus) and the exact ARC, then hands the context to
 * `extra` for experiment-specific checks.
 */
template <typename Extra>
BoundReport run_repetitions(const ExperimentSetup& s, const std::string& experiment, Extra&& extra) {
    if (!s.learner) throw std::invalid_argument(experiment + ": no learner");
    if (s.n > s.exact_n_limit)
        throw std::invalid_argument(experiment + ": n = " + std::to_string(s.n) + " exceeds exact_n_limit " +
                                    std::to_string(s.exact_n_limit));
    if (s.reps == 0) throw std::invalid_argument(experiment + ": reps must be positive");
    BoundReport rep;
    rep.experiment = experiment;
    rep.learner_id = s.learner_id;
    rep.n = s.n;
    rep.reps = s.reps;
    rep.delta = s.delta;
    rep.seed = s.seed;
    std::vector<double> gaps, arcs;
    for (std::size_t r = 0; r < s.reps; ++r) {
        const std::uint64_t ss_seed = derive_seed(s.seed, 2 * r);
        const std::uint64_t l_seed = rep_learner_seed(s, r);
        Supersample ss = draw_supersample(s.dist, s.n, ss_seed);
        ThetaSet theta = build_theta_hat(s.learner, ss, ThetaMode::exact(), l_seed, s.dedup_tol, s.metric, s.exact_n_limit);
        LossMatrix m = theta_loss_matrix(s.loss, theta.cloud, ss.s_plus);
        const double arc = rademacher_exact(m, s.exact_n_limit).value;
        const Vector out = s.learner(std::span<const Vector>(ss.s_plus), l_seed);
        const GapMeasurement g = generalization_gap(s.loss, out, ss.s_plus, s.dist, s.risk, derive_seed(ss_seed, 1));
        RepRecord rec{r, ss_seed, l_seed, g.gap, g.true_risk_se, arc, theta.cloud.size(), std::nullopt};
        rep.exact_theta_hat = rep.exact_theta_hat && theta.exact;
        RepContext ctx{r, std::move(ss), l_seed, std::move(theta), std::move(m), arc};
        extra(ctx, rec, rep);
        gaps.push_back(g.gap);
        arcs.push_back(arc);
        rep.records.push_back(std::move(rec));
    }
    const MeanSe mg = mean_se(gaps), ma = mean_se(arcs);
    rep.mean_gap = mg.mean;
    rep.se_gap = mg.se;
    rep.mean_arc = ma.mean;
    rep.se_arc = ma.se;
    rep.combined_se = std::sqrt(mg.se * mg.se + 4.0 * ma.se * ma.se);
    rep.essup_estimate = *std::max_element(arcs.begin(), arcs.end());
    rep.expectation_rhs = 2.0 * ma.mean;
    rep.checks.push_back({"expectation", "E[gap] <= 2 E[ARC]", std::nullopt, s.seed, mg.mean,
                          2.0 * ma.mean + s.margin_se * rep.combined_se,
                          mg.mean <= 2.0 * ma.mean + s.margin_se * rep.combined_se});
    return rep;
}

/// Adds the high-probability check: fraction of repetitions whose gap
/// exceeds highprob_rhs(max ARC) must not exceed delta.
inline void add_highprob_check(BoundReport& rep, double b, std::size_t n) {
    const double rhs = highprob_rhs(rep.essup_estimate, b, n, rep.delta);
    rep.highprob_rhs = rhs;
    std::size_t violations = 0;
    for (const auto& r : rep.records) violations += r.gap > rhs;
    const double frac = static_cast<double>(violations) / static_cast<double>(rep.records.size());
    rep.checks.push_back({"highprob_violation_fraction", "P(gap > 4 essup ARC + b sqrt(8 ln(2/delta)/n)) <= delta",
                          std::nullopt, rep.seed, frac, rep.delta, frac <= rep.delta});
}

inline void add_fractal_checks(const ExperimentSetup& s, RepContext& ctx, RepRecord& rec, BoundReport& rep) {
    const double L = s.loss.lipschitz, b = s.loss.range_b;
    FractalRecord fr = fractal_record(ctx.theta.cloud, L, b, s.n, s.limits);
    rep.exact_covers = rep.exact_covers && fr.exact;
    const double tol = s.check_tol;
    rep.checks.push_back({"trivial_fractal", "ARC <= b sqrt(ln(2|theta_hat|)/n)", ctx.rep, rec.seed, ctx.arc, fr.trivial,
                          ctx.arc <= fr.trivial + tol});
    if (fr.applicable) {
        rep.checks.push_back({"fractal_Dn", "ARC <= L nabla + b sqrt(dim_fM ln(Delta/nabla)/n)", ctx.rep, rec.seed,
                              ctx.arc, fr.dn, ctx.arc <= fr.dn + tol});
        rep.fractal_Dn = std::max(rep.fractal_Dn.value_or(0.0), fr.dn);
        if (fr.steiner) {
            rep.checks.push_back({"steiner_properties", "|P| < |C|, nabla <= eps*, Delta and N(eps*) kept", ctx.rep,
                                  rec.seed, static_cast<double>(fr.steiner_points), fr.eps_star, fr.steiner->all()});
        }
        if (fr.steiner_dn)
            rep.checks.push_back({"steiner_Dn", "ARC <= D_n(theta_hat u P)", ctx.rep, rec.seed, ctx.arc, *fr.steiner_dn,
                                  ctx.arc <= *fr.steiner_dn + tol});
    }
    rec.fractal = std::move(fr);
}

/// Expectation and high-probability symmetrization checks, optionally with
/// the fractal-family bounds evaluated on every theta_hat.
inline BoundReport expectation_bound_experiment(const ExperimentSetup& s, bool with_fractal = false) {
    BoundReport rep = run_repetitions(s, "arc", [&](RepContext& ctx, RepRecord& rec, BoundReport& r) {
        if (with_fractal) add_fractal_checks(s, ctx, rec, r);
    });
    add_highprob_check(rep, s.loss.range_b, s.n);
    return rep;
}

inline BoundReport fractal_bound_experiment(const ExperimentSetup& s) {
    if (s.n <= 2) throw std::invalid_argument("fractal-check: n must exceed 2");
    return run_repetitions(s, "fractal-check",
                           [&](RepContext& ctx, RepRecord& rec, BoundReport& r) { add_fractal_checks(s, ctx, rec, r); });
}

struct SgdCheckSetup {
    ExperimentSetup base;
    LearnerSpec spec;
    std::vector<double> cover_eps;  // scales for the forgetting-depth covering check; empty: skipped
};

/**
 * SGD: per repetition, the measured gap against sgd_rhs (aggregated as a
 * pass fraction of at least 1 - delta), exact ARC against the covering
 * chain L/(2n) + b sqrt(m ln 2 / n), and N(theta_hat, eps) <= 2^min(m, T)
 * on each requested scale. theta_hat is built in the Euclidean metric.
 */
inline BoundReport sgd_check_experiment(const SgdCheckSetup& cfg) {
    ExperimentSetup s = cfg.base;
    const LearnerSpec& spec = cfg.spec;
    if (spec.kind != LearnerSpec::Kind::Sgd || !spec.domain) throw std::invalid_argument("sgd-check: needs an sgd learner");
    s.metric = Metric::L2;
    s.learner = make_learner(spec, s.loss);
    s.learner_id = spec.id();
    const double gamma = contraction_factor(s.loss.alpha, s.loss.beta, spec.eta);
    const double R = spec.domain->diameter();
    const double L = s.loss.lipschitz, b = s.loss.range_b;
    const std::size_t n = s.n;
    const double rhs = sgd_rhs(b, R, n, gamma, L, s.delta);
    const double eps_n = 1.0 / (2.0 * static_cast<double>(n));
    const std::size_t m_n = forgetting_depth(R, gamma, eps_n);
    const double chain = L * eps_n + b * std::sqrt(static_cast<double>(m_n) * std::numbers::ln2 / static_cast<double>(n));
    std::size_t within_rhs = 0;
    BoundReport rep = run_repetitions(s, "sgd-check", [&](RepContext& ctx, RepRecord& rec, BoundReport& r) {
        within_rhs += rec.gap <= rhs;
        r.checks.push_back({"sgd_arc_chain", "ARC <= L/(2n) + b sqrt(m ln2/n)", ctx.rep, rec.seed, ctx.arc, chain,
                            ctx.arc <= chain + s.check_tol});
        for (double eps : cfg.cover_eps) {
            const std::size_t m = forgetting_depth(R, gamma, eps);
            const double cap = std::ldexp(1.0, static_cast<int>(std::min(m, spec.T)));
            const CoverResult cov = covering_number(ctx.theta.cloud, eps, s.limits);
            r.exact_covers = r.exact_covers && cov.exact;
            r.checks.push_back({"sgd_cover", "N(theta_hat, eps) <= 2^min(m, T)", ctx.rep, rec.seed,
                                static_cast<double>(cov.count), cap, static_cast<double>(cov.count) <= cap});
        }
    });
    rep.sgd_rhs = rhs;
    const double frac = static_cast<double>(within_rhs) / static_cast<double>(s.reps);
    rep.checks.push_back({"sgd_rhs_fraction", "P(gap <= sgd_rhs) >= 1 - delta", std::nullopt, s.seed, frac,
                          1.0 - s.delta, frac >= 1.0 - s.delta});
    return rep;
}

/// k-compression: |theta_hat| <= C(2n, k), ARC <= massart_bound(C(2n, k))
/// and, for losses inside [0, 1], ARC <= compression_rhs(k, n).
inline BoundReport compress_check_experiment(ExperimentSetup s, std::size_t k) {
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::CompressK;
    spec.k = k;
    s.learner = make_learner(spec, s.loss);
    s.learner_id = spec.id();
    const double count = binomial(2 * s.n, k);
    const double massart = massart_bound(count, s.loss.range_b, s.n);
    const bool unit_range = s.loss.range_a >= 0.0 && s.loss.range_a + s.loss.range_b <= 1.0;
    const double rhs = compression_rhs(k, s.n);
    BoundReport rep = run_repetitions(s, "compress-check", [&](RepContext& ctx, RepRecord& rec, BoundReport& r) {
        r.checks.push_back({"compression_count", "|theta_hat| <= C(2n, k)", ctx.rep, rec.seed,
                            static_cast<double>(rec.theta_size), count, static_cast<double>(rec.theta_size) <= count});
        r.checks.push_back({"massart_count", "ARC <= b sqrt(2 ln C(2n,k) / n)", ctx.rep, rec.seed, ctx.arc, massart,
                            ctx.arc <= massart + s.check_tol});
        if (unit_range)
            r.checks.push_back({"compression_rhs", "ARC <= sqrt(k ln(2en/k)/(2n))", ctx.rep, rec.seed, ctx.arc, rhs,
                                ctx.arc <= rhs + s.check_tol});
    });
    if (unit_range) rep.compression_rhs = rhs;
    add_highprob_check(rep, s.loss.range_b, s.n);
    return rep;
}

/// Threshold classifiers under 0-1 loss: ARC <= vc_rhs(1, n).
inline BoundReport vc_check_experiment(ExperimentSetup s) {
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::VcThreshold;
    spec.sentinel_lo = s.dist.support_lo()[0] - 1.0;
    spec.sentinel_hi = s.dist.support_hi()[0] + 1.0;
    s.loss = zero_one_threshold_loss();
    s.learner = make_learner(spec, s.loss);
    s.learner_id = spec.id();
    const double rhs = vc_rhs(1, s.n);
    BoundReport rep = run_repetitions(s, "vc-check", [&](RepContext& ctx, RepRecord& rec, BoundReport& r) {
        r.checks.push_back({"vc_rhs", "ARC <= sqrt(2 V ln(en/V)/n)", ctx.rep, rec.seed, ctx.arc, rhs,
                            ctx.arc <= rhs + s.check_tol});
    });
    rep.vc_rhs = rhs;
    add_highprob_check(rep, s.loss.range_b, s.n);
    return rep;
}

/**
 * Covering chain on one output set: for every eps in the grid,
 * ARC <= L eps + b sqrt(2 ln N(theta_hat, eps) / n).
 */
inline std::vector<BoundCheck> covering_chain_checks(const PointCloud& theta, double arc, double L, double b,
                                                     std::size_t n, std::span<const double> grid,
                                                     const SolverLimits& limits = {}, double tol = 1e-9) {
    std::vector<BoundCheck> out;
    for (double eps : grid) {
        const CoverResult cov = covering_number(theta, eps, limits);
        const double bound = L * eps + massart_bound(static_cast<double>(cov.count), b, n);
        out.push_back({"covering_chain", "ARC <= L eps + b sqrt(2 ln N(eps)/n)", std::nullopt, 0, arc, bound,
                       arc <= bound + tol});
    }
    return out;
}

struct LimitTrendSetup {
    ExperimentSetup base;  // base.n is ignored
    std::vector<std::size_t> n_grid;
    std::size_t sampled_sigma = 4096;  // sign vectors per theta_hat above exact_n_limit
    std::uint64_t mc_draws = 4096;
    std::size_t slope_scales = 8;
};

/**
 * Ratio series n -> mean ARC / sqrt(ln n / n) for increasing n, plus the
 * slope-based Minkowski estimate of the union of all output sets. Above
 * exact_n_limit, theta_hat is sampled and the ARC is Monte Carlo. Report
 * only: no checks are recorded.
 */
inline BoundReport limit_ratio_experiment(const LimitTrendSetup& cfg) {
    const ExperimentSetup& s = cfg.base;
    if (!s.learner) throw std::invalid_argument("limit-trend: no learner");
    if (cfg.n_grid.empty()) throw std::invalid_argument("limit-trend: empty n grid");
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        if (cfg.n_grid[i] < 2) throw std::invalid_argument("limit-trend: every n must be at least 2");
        if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1]) throw std::invalid_argument("limit-trend: n grid must increase");
    }
    BoundReport rep;
    rep.experiment = "limit-trend";
    rep.learner_id = s.learner_id;
    rep.reps = s.reps;
    rep.seed = s.seed;
    rep.delta = s.delta;
    std::vector<Vector> all;
    for (std::size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
        const std::size_t n = cfg.n_grid[gi];
        std::vector<double> arcs;
        for (std::size_t r = 0; r < s.reps; ++r) {
            const std::uint64_t ss_seed = derive_seed(derive_seed(s.seed, gi), 2 * r);
            const std::uint64_t l_seed = derive_seed(derive_seed(s.seed, gi), 2 * r + 1);
            const Supersample ss = draw_supersample(s.dist, n, ss_seed);
            const bool exact = n <= s.exact_n_limit;
            const ThetaMode mode = exact ? ThetaMode::exact() : ThetaMode::sampled(cfg.sampled_sigma, derive_seed(ss_seed, 2));
            const ThetaSet theta = build_theta_hat(s.learner, ss, mode, l_seed, s.dedup_tol, s.metric, s.exact_n_limit);
            rep.exact_theta_hat = rep.exact_theta_hat && theta.exact;
            const LossMatrix m = theta_loss_matrix(s.loss, theta.cloud, ss.s_plus);
            const double arc = exact ? rademacher_exact(m, s.exact_n_limit).value
                                     : rademacher_mc(m, cfg.mc_draws, derive_seed(ss_seed, 3)).value;
            arcs.push_back(arc);
            RepRecord rec;
            rec.rep = r;
            rec.seed = ss_seed;
            rec.learner_seed = l_seed;
            rec.arc = arc;
            rec.theta_size = theta.cloud.size();
            rep.records.push_back(rec);
            all.insert(all.end(), theta.cloud.begin(), theta.cloud.end());
        }
        const double nn = static_cast<double>(n);
        rep.series.emplace_back(n, mean_se(arcs).mean / std::sqrt(std::log(nn) / nn));
    }
    const PointCloud u = dedup(all, s.metric, s.dedup_tol);
    if (u.size() < 2) {
        rep.minkowski_estimate = 0.0;
    } else {
        const DistanceMatrix d(u);
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = i + 1; j < d.size(); ++j) lo = std::min(lo, d(i, j));
        const double hi = diameter(d);
        std::vector<double> grid;
        if (hi > lo && cfg.slope_scales >= 2) {
            for (std::size_t k = 0; k < cfg.slope_scales; ++k) {
                const double t = static_cast<double>(k) / static_cast<double>(cfg.slope_scales);
                grid.push_back(lo * std::pow(hi / lo, t));
            }
            rep.minkowski_estimate = minkowski_slope_estimate(u, grid, s.limits);
        }
    }
    return rep;
}

}  // namespace arc
