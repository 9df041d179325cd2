#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "arc/bounds.hpp"
#include "oracles.hpp"

using namespace arc;

namespace {

const Domain kUnit = Domain::box({0.0}, {1.0});

LossModel unit_quadratic() { return quadratic_loss({1.0}, kUnit, {0.0}, {1.0}); }

LearnerSpec grid_spec(std::size_t points) {
    LearnerSpec spec;
    spec.kind = LearnerSpec::Kind::ErmGrid;
    for (std::size_t i = 0; i < points; ++i)
        spec.grid.push_back({static_cast<double>(i) / static_cast<double>(points - 1)});
    return spec;
}

ExperimentSetup grid_setup(std::size_t n, std::size_t reps, std::uint64_t seed) {
    ExperimentSetup s;
    s.loss = unit_quadratic();
    const auto spec = grid_spec(16);
    s.learner = make_learner(spec, s.loss);
    s.learner_id = spec.id();
    s.n = n;
    s.reps = reps;
    s.seed = seed;
    return s;
}

// Composite Simpson rule on [lo, hi].
template <typename F>
double simpson(F f, double lo, double hi, int panels = 20000) {
    const double h = (hi - lo) / panels;
    double s = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST(BoundFormulas, HighProb) {
    EXPECT_NEAR(highprob_rhs(0.0, 1.0, 8, 0.05), std::sqrt(8.0 * std::log(40.0) / 8.0), 1e-14);
    EXPECT_NEAR(highprob_rhs(0.25, 1.0, 100, 0.1), 1.0 + std::sqrt(8.0 * std::log(20.0) / 100.0), 1e-14);
    EXPECT_THROW(highprob_rhs(0.0, 1.0, 8, 2.0), std::invalid_argument);
    EXPECT_THROW(highprob_rhs(0.0, 1.0, 8, 0.0), std::invalid_argument);
    EXPECT_THROW(highprob_rhs(-0.1, 1.0, 8, 0.5), std::invalid_argument);
}

TEST(BoundFormulas, Sgd) {
    const double gamma = std::sqrt(0.5);
    EXPECT_EQ(forgetting_depth(1.0, gamma, 1.0 / 200.0), 16U);
    const double expected = 4.0 * std::sqrt(16.0 * std::log(2.0) / 100.0) + std::sqrt(8.0 * std::log(40.0) / 100.0) + 0.02;
    EXPECT_NEAR(sgd_rhs(1.0, 1.0, 100, gamma, 1.0, 0.05), expected, 1e-14);
    EXPECT_NEAR(sgd_rhs(1.0, 1.0, 100, gamma, 1.0, 0.05), 1.895, 5e-4);
    // R * 2n <= 1: the forgetting term vanishes.
    EXPECT_NEAR(sgd_rhs(1.0, 0.004, 100, 0.0, 1.0, 0.05), std::sqrt(8.0 * std::log(40.0) / 100.0) + 0.02, 1e-14);
    EXPECT_THROW(sgd_rhs(1.0, 1.0, 100, 1.0, 1.0, 0.05), std::invalid_argument);
}

TEST(BoundFormulas, CompressionAndVc) {
    EXPECT_NEAR(compression_rhs(2, 8), std::sqrt(std::log(8.0 * std::numbers::e) / 8.0), 1e-14);
    EXPECT_NEAR(compression_rhs(2, 8), 0.62043, 1e-5);
    for (std::size_t n : {1, 5, 40})
        EXPECT_NEAR(compression_rhs(n, n), std::sqrt(std::log(2.0 * std::numbers::e) / 2.0), 1e-14);
    EXPECT_THROW(compression_rhs(9, 8), std::invalid_argument);
    EXPECT_THROW(compression_rhs(0, 8), std::invalid_argument);

    EXPECT_NEAR(vc_rhs(1, 10), std::sqrt(2.0 * std::log(10.0 * std::numbers::e) / 10.0), 1e-14);
    EXPECT_THROW(vc_rhs(1, 1), std::invalid_argument);
    EXPECT_THROW(vc_rhs(0, 5), std::invalid_argument);
    EXPECT_LT(vc_rhs(1, 1'000'000), 0.01);
}

TEST(BoundFormulas, TrivialAndBinomial) {
    EXPECT_NEAR(trivial_fractal_bound(1, 1.0, 8), std::sqrt(std::log(2.0) / 8.0), 1e-15);
    EXPECT_EQ(binomial(16, 2), 120.0);
    EXPECT_EQ(binomial(12, 1), 12.0);
    EXPECT_EQ(binomial(16, 3), 560.0);
    EXPECT_EQ(binomial(3, 4), 0.0);
    EXPECT_EQ(binomial(40, 20), 137846528820.0);
}

TEST(BoundFormulas, Monotonicity) {
    for (std::size_t n = 2; n < 60; ++n) {
        EXPECT_GE(highprob_rhs(0.1, 1.0, n, 0.05), highprob_rhs(0.1, 1.0, n + 1, 0.05));
        EXPECT_GE(compression_rhs(1, n), compression_rhs(1, n + 1));
        EXPECT_GE(vc_rhs(1, n), vc_rhs(1, n + 1));
        EXPECT_LE(compression_rhs(1, n), compression_rhs(2, n + 1));
        EXPECT_LE(vc_rhs(1, n + 2), vc_rhs(2, n + 2));
    }
    for (double b = 0.5; b < 4.0; b += 0.5) {
        EXPECT_LE(highprob_rhs(0.1, b, 10, 0.05), highprob_rhs(0.1, b + 0.5, 10, 0.05));
        EXPECT_LE(sgd_rhs(b, 1.0, 10, 0.5, 1.0, 0.05), sgd_rhs(b + 0.5, 1.0, 10, 0.5, 1.0, 0.05));
    }
    for (double d = 0.9; d > 0.01; d *= 0.5) EXPECT_LE(highprob_rhs(0.1, 1.0, 10, d), highprob_rhs(0.1, 1.0, 10, d / 2));
    for (double g = 0.0; g < 0.95; g += 0.05) EXPECT_LE(sgd_rhs(1.0, 1.0, 10, g, 1.0, 0.05), sgd_rhs(1.0, 1.0, 10, g + 0.05, 1.0, 0.05));
}

TEST(Risk, ClosedForms) {
    const auto l = unit_quadratic();
    const auto u = Distribution::uniform_box({0.0}, {1.0});
    EXPECT_NEAR(*closed_form_risk(l, {0.5}, u), 1.0 / 24.0, 1e-15);
    EXPECT_NEAR(*closed_form_risk(l, {0.0}, u), 1.0 / 6.0, 1e-15);

    const auto tg = Distribution::trunc_gauss({0.3}, 0.2, {0.0}, {1.0});
    const double z = simpson([](double x) { return std::exp(-0.5 * std::pow((x - 0.3) / 0.2, 2)); }, 0.0, 1.0);
    for (double th : {0.0, 0.3, 0.9}) {
        const double expected =
            simpson([&](double x) { return 0.5 * (th - x) * (th - x) * std::exp(-0.5 * std::pow((x - 0.3) / 0.2, 2)); }, 0.0, 1.0) / z;
        EXPECT_NEAR(*closed_form_risk(l, {th}, tg), expected, 1e-10);
    }

    const auto e = Distribution::empirical({{0.0}, {1.0}, {1.0}});
    EXPECT_NEAR(*closed_form_risk(l, {0.0}, e), 1.0 / 3.0, 1e-15);

    const auto thr = Distribution::labeled_threshold(0.4, 0.1);
    const auto zo = zero_one_threshold_loss();
    EXPECT_NEAR(*closed_form_risk(zo, {0.4}, thr), 0.1, 1e-15);
    EXPECT_NEAR(*closed_form_risk(zo, {0.6}, thr), 0.1 + 0.8 * 0.2, 1e-15);
    EXPECT_NEAR(*closed_form_risk(zo, {-5.0}, thr), 0.1 + 0.8 * 0.4, 1e-15);
    EXPECT_FALSE(closed_form_risk(l, {0.5, 0.5}, thr).has_value());
}

TEST(Risk, PointMassHasZeroGap) {
    const auto l = unit_quadratic();
    const auto d = Distribution::empirical({{0.3}});
    const std::vector<Vector> s(5, Vector{0.3});
    for (double th : {0.0, 0.3, 0.8}) EXPECT_NEAR(generalization_gap(l, {th}, s, d).gap, 0.0, 1e-15);
}

TEST(Risk, HeldoutAgreesWithClosedForm) {
    const auto l = unit_quadratic();
    const std::vector<Vector> s{{0.1}, {0.7}};
    const auto d = Distribution::trunc_gauss({0.3}, 0.2, {0.0}, {1.0});
    const RiskSpec held{RiskMode::Heldout, 1'000'000};
    for (double th : {0.0, 0.5}) {
        const auto closed = generalization_gap(l, {th}, s, d, {RiskMode::ClosedForm, 0});
        const auto mc = generalization_gap(l, {th}, s, d, held, 17);
        EXPECT_EQ(mc.risk_mode, RiskMode::Heldout);
        EXPECT_GT(mc.true_risk_se, 0.0);
        EXPECT_NEAR(mc.true_risk, closed.true_risk, 4.0 * mc.true_risk_se);
    }
    const auto thr = Distribution::labeled_threshold(0.4, 0.1);
    const auto zo = zero_one_threshold_loss();
    const std::vector<Vector> ls{{0.2, 0.0}};
    const auto mc = generalization_gap(zo, {0.7}, ls, thr, held, 3);
    EXPECT_NEAR(mc.true_risk, 0.1 + 0.8 * 0.3, 4.0 * mc.true_risk_se);
}

TEST(Risk, ClosedFormRequestRejectedWhenUnavailable) {
    LossModel custom;
    custom.name = "abs";
    custom.eval = [](const Vector& t, const Vector& z) { return std::abs(t[0] - z[0]); };
    const auto u = Distribution::uniform_box({0.0}, {1.0});
    const std::vector<Vector> s{{0.5}};
    EXPECT_THROW(generalization_gap(custom, {0.5}, s, u, {RiskMode::ClosedForm, 0}), std::invalid_argument);
    const auto g = generalization_gap(custom, {0.5}, s, u, {RiskMode::Auto, 200'000}, 5);
    EXPECT_NEAR(g.true_risk, 0.25, 4.0 * g.true_risk_se);
}

TEST(Experiments, ConstantLearnerHasZeroArc) {
    ExperimentSetup s;
    s.loss = unit_quadratic();
    s.learner = [](std::span<const Vector>, std::uint64_t) { return Vector{0.5}; };
    s.n = 6;
    s.reps = 200;
    const auto rep = expectation_bound_experiment(s, true);
    EXPECT_EQ(rep.mean_arc, 0.0);
    EXPECT_LE(std::abs(rep.mean_gap), 3.0 * rep.se_gap + 1e-12);
    EXPECT_TRUE(rep.pass());
    for (const auto& r : rep.records) {
        EXPECT_EQ(r.theta_size, 1U);
        ASSERT_TRUE(r.fractal.has_value());
        EXPECT_TRUE(r.fractal->focal);
    }
}

TEST(Experiments, ReportsAreDeterministic) {
    const auto a = expectation_bound_experiment(grid_setup(6, 30, 7), true);
    const auto b = expectation_bound_experiment(grid_setup(6, 30, 7), true);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].gap, b.records[i].gap);
        EXPECT_EQ(a.records[i].arc, b.records[i].arc);
        EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    }
    ASSERT_EQ(a.checks.size(), b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) EXPECT_EQ(a.checks[i].value, b.checks[i].value);
    const auto c = expectation_bound_experiment(grid_setup(6, 30, 8), true);
    EXPECT_NE(a.mean_gap, c.mean_gap);
}

TEST(Experiments, ArcMatchesIndependentRecomputation) {
    const auto s = grid_setup(5, 10, 3);
    const auto rep = expectation_bound_experiment(s);
    const auto spec = grid_spec(16);
    for (const auto& rec : rep.records) {
        const auto ss = draw_supersample(s.dist, s.n, rec.seed);
        std::vector<Vector> outputs;
        for (std::uint64_t k = 0; k < (1U << s.n); ++k) {
            const auto sample = mix(ss, SignVector::from_index(k, s.n));
            const auto idx = oracle::erm_index(spec.grid, sample, [](const Vector& a, const Vector& b) {
                return 0.5 * (a[0] - b[0]) * (a[0] - b[0]);
            });
            if (std::find(outputs.begin(), outputs.end(), spec.grid[idx]) == outputs.end()) outputs.push_back(spec.grid[idx]);
        }
        std::vector<std::vector<double>> rows;
        for (const auto& th : outputs) {
            std::vector<double> r;
            for (const auto& z : ss.s_plus) r.push_back(0.5 * (th[0] - z[0]) * (th[0] - z[0]));
            rows.push_back(r);
        }
        EXPECT_EQ(rec.theta_size, outputs.size());
        EXPECT_NEAR(rec.arc, oracle::rademacher(rows), 1e-12);
    }
}

TEST(Experiments, CompressionCheck) {
    auto s = grid_setup(8, 100, 11);
    const auto rep = compress_check_experiment(s, 2);
    EXPECT_TRUE(rep.pass());
    ASSERT_TRUE(rep.compression_rhs.has_value());
    for (const auto& r : rep.records) {
        EXPECT_LE(r.theta_size, 120U);
        EXPECT_LE(r.arc, massart_bound(120, s.loss.range_b, 8) + 1e-12);
    }
}

TEST(Experiments, VcCheck) {
    ExperimentSetup s;
    s.dist = Distribution::labeled_threshold(0.5, 0.1);
    s.n = 8;
    s.reps = 50;
    s.learner = [](std::span<const Vector>, std::uint64_t) { return Vector{0.0}; };
    const auto rep = vc_check_experiment(s);
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(*rep.vc_rhs, vc_rhs(1, 8));
    EXPECT_EQ(rep.learner_id, "vc_threshold");
}

TEST(Experiments, SgdCheck) {
    SgdCheckSetup cfg;
    cfg.base.loss = unit_quadratic();
    cfg.base.n = 6;
    cfg.base.reps = 40;
    cfg.spec.kind = LearnerSpec::Kind::Sgd;
    cfg.spec.theta1 = {0.5};
    cfg.spec.eta = 0.5;
    cfg.spec.T = 6;
    cfg.spec.domain = kUnit;
    cfg.cover_eps = {0.01, 0.1};
    const auto rep = sgd_check_experiment(cfg);
    EXPECT_TRUE(rep.pass());
    std::size_t covers = 0;
    for (const auto& c : rep.checks) covers += c.name == "sgd_cover";
    EXPECT_EQ(covers, 80U);
}

TEST(Experiments, FractalCheckRejectsTinyN) {
    EXPECT_THROW(fractal_bound_experiment(grid_setup(2, 5, 0)), std::invalid_argument);
    auto s = grid_setup(25, 5, 0);
    EXPECT_THROW(expectation_bound_experiment(s), std::invalid_argument);
}

TEST(CoveringChain, HoldsOnGridOutputs) {
    const auto s = grid_setup(8, 1, 4);
    const auto ss = draw_supersample(s.dist, 8, 4);
    const auto th = build_theta_hat(s.learner, ss, ThetaMode::exact(), 0);
    const auto m = theta_loss_matrix(s.loss, th.cloud, ss.s_plus);
    const double arc = rademacher_exact(m).value;
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.05 * i);
    const auto checks = covering_chain_checks(th.cloud, arc, s.loss.lipschitz, s.loss.range_b, 8, grid);
    EXPECT_EQ(checks.size(), 10U);
    for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.lhs << " > " << c.value;
}

TEST(LimitTrend, ConstantLearnerGivesZeroRatio) {
    LimitTrendSetup cfg;
    cfg.base.loss = unit_quadratic();
    cfg.base.learner = [](std::span<const Vector>, std::uint64_t) { return Vector{0.5}; };
    cfg.base.reps = 3;
    cfg.n_grid = {4, 6, 22};
    cfg.sampled_sigma = 64;
    cfg.mc_draws = 64;
    const auto rep = limit_ratio_experiment(cfg);
    ASSERT_EQ(rep.series.size(), 3U);
    for (const auto& [n, ratio] : rep.series) EXPECT_EQ(ratio, 0.0);
    EXPECT_EQ(*rep.minkowski_estimate, 0.0);
    EXPECT_FALSE(rep.exact_theta_hat);
    cfg.n_grid = {6, 4};
    EXPECT_THROW(limit_ratio_experiment(cfg), std::invalid_argument);
}
