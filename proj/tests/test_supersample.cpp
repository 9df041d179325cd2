#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "arc/rng.hpp"
#include "arc/supersample.hpp"

using namespace arc;

namespace {

Vector sample_mean(std::span<const Vector> s, std::uint64_t) {
    Vector m(s.front().size(), 0.0);
    for (const auto& z : s)
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += z[k];
    for (auto& x : m) x /= static_cast<double>(s.size());
    return m;
}

Vector first_point(std::span<const Vector> s, std::uint64_t) { return s.front(); }

Vector constant(std::span<const Vector>, std::uint64_t) { return {0.25}; }

Supersample line_supersample(std::vector<double> minus, std::vector<double> plus) {
    Supersample ss;
    for (double x : minus) ss.s_minus.push_back({x});
    for (double x : plus) ss.s_plus.push_back({x});
    return ss;
}

bool contains(const PointCloud& c, const Vector& v) {
    return std::find(c.points().begin(), c.points().end(), v) != c.points().end();
}

}  // namespace

TEST(Distribution, RejectsBadParameters) {
    EXPECT_THROW(Distribution::uniform_box({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(Distribution::uniform_box({0.0}, {1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(Distribution::trunc_gauss({0.0}, 0.0, {0.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(Distribution::trunc_gauss({0.0, 0.0}, 1.0, {0.0}, {1.0}), std::invalid_argument);
    EXPECT_THROW(Distribution::empirical({}), std::invalid_argument);
    EXPECT_THROW(Distribution::empirical({{0.0}, {0.0, 1.0}}), std::invalid_argument);
    EXPECT_THROW(Distribution::labeled_threshold(1.5, 0.1), std::invalid_argument);
    EXPECT_THROW(Distribution::labeled_threshold(0.5, 0.6), std::invalid_argument);
}

TEST(Distribution, DrawsStayInSupport) {
    Rng rng(1);
    const auto u = Distribution::uniform_box({0.0, -1.0}, {1.0, 1.0});
    const auto g = Distribution::trunc_gauss({0.2}, 0.5, {0.0}, {0.5});
    const auto e = Distribution::empirical({{0.1}, {0.7}, {0.7}});
    EXPECT_EQ(e.support_lo(), Vector{0.1});
    EXPECT_EQ(e.support_hi(), Vector{0.7});
    for (int i = 0; i < 2000; ++i) {
        const auto a = u.draw(rng);
        EXPECT_TRUE(a[0] >= 0.0 && a[0] < 1.0 && a[1] >= -1.0 && a[1] < 1.0);
        const auto b = g.draw(rng);
        EXPECT_TRUE(b[0] >= 0.0 && b[0] <= 0.5);
        const auto c = e.draw(rng);
        EXPECT_TRUE(c[0] == 0.1 || c[0] == 0.7);
    }
}

TEST(Distribution, LabeledThresholdNoiseRate) {
    Rng rng(2);
    const auto d = Distribution::labeled_threshold(0.3, 0.2);
    const int draws = 200000;
    int flips = 0;
    for (int i = 0; i < draws; ++i) {
        const auto z = d.draw(rng);
        flips += (z[0] > 0.3 ? 1.0 : 0.0) != z[1];
    }
    const double rate = static_cast<double>(flips) / draws;
    EXPECT_NEAR(rate, 0.2, 4.0 * std::sqrt(0.2 * 0.8 / draws));
}

TEST(Supersample, DeterministicPerSeed) {
    const auto d = Distribution::uniform_box({0.0}, {1.0});
    const auto a = draw_supersample(d, 5, 99), b = draw_supersample(d, 5, 99), c = draw_supersample(d, 5, 100);
    EXPECT_EQ(a.s_minus, b.s_minus);
    EXPECT_EQ(a.s_plus, b.s_plus);
    EXPECT_NE(a.s_plus, c.s_plus);
    EXPECT_EQ(a.n(), 5U);
    EXPECT_EQ(a.dist_id, "uniform_box");
    EXPECT_THROW(draw_supersample(d, 0, 1), std::invalid_argument);
}

TEST(SignVector, Enumeration) {
    EXPECT_EQ(SignVector::from_index(0, 3).signs(), (std::vector<int>{-1, -1, -1}));
    EXPECT_EQ(SignVector::from_index(1, 3).signs(), (std::vector<int>{-1, -1, 1}));
    EXPECT_EQ(SignVector::from_index(4, 3).signs(), (std::vector<int>{1, -1, -1}));
    EXPECT_EQ(SignVector::from_index(7, 3).signs(), SignVector::constant(3, 1).signs());
    EXPECT_THROW(SignVector(std::vector<int>{1, 0}), std::invalid_argument);
}

TEST(Mix, PicksGhostOrPrimary) {
    const auto ss = line_supersample({0, 1, 2}, {10, 11, 12});
    EXPECT_EQ(mix(ss, SignVector(std::vector<int>{1, -1, 1})), (std::vector<Vector>{{10}, {1}, {12}}));
    EXPECT_EQ(mix(ss, SignVector::constant(3, -1)), ss.s_minus);
    EXPECT_EQ(mix(ss, SignVector::constant(3, 1)), ss.s_plus);
    EXPECT_THROW(mix(ss, SignVector::constant(2, 1)), std::invalid_argument);
}

TEST(ThetaHat, Examples) {
    const auto ss = line_supersample({0, 1}, {10, 11});
    const auto th = build_theta_hat(first_point, ss, ThetaMode::exact(), 0);
    EXPECT_EQ(th.cloud.points(), (std::vector<Vector>{{0}, {10}}));
    EXPECT_EQ(th.runs, 4U);
    EXPECT_TRUE(th.exact);

    const auto spread = line_supersample({0, 1}, {10, 12});
    const auto mean = build_theta_hat(sample_mean, spread, ThetaMode::exact(), 0);
    EXPECT_EQ(mean.cloud.points(), (std::vector<Vector>{{0.5}, {6.0}, {5.5}, {11.0}}));

    EXPECT_EQ(build_theta_hat(constant, ss, ThetaMode::exact(), 0).cloud.size(), 1U);

    // Sign vectors that give equal sample means collapse to one point.
    const auto tied = line_supersample({0, 0}, {1, 1});
    EXPECT_EQ(build_theta_hat(sample_mean, tied, ThetaMode::exact(), 0).cloud.size(), 3U);
}

TEST(ThetaHat, DedupTolerance) {
    const auto ss = line_supersample({0, 0}, {1e-12, 1});
    EXPECT_EQ(build_theta_hat(first_point, ss, ThetaMode::exact(), 0).cloud.size(), 2U);
    EXPECT_EQ(build_theta_hat(first_point, ss, ThetaMode::exact(), 0, 1e-9).cloud.size(), 1U);
}

TEST(ThetaHat, LearnerSeedIsSharedAcrossSignVectors) {
    const auto ss = line_supersample({0, 1, 2}, {10, 11, 12});
    std::vector<std::uint64_t> seen;
    auto spy = [&](std::span<const Vector> s, std::uint64_t seed) {
        seen.push_back(seed);
        return s.front();
    };
    build_theta_hat(spy, ss, ThetaMode::exact(), 1234);
    ASSERT_EQ(seen.size(), 8U);
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](auto s) { return s == 1234; }));
}

TEST(ThetaHat, RejectsLargeExactN) {
    const auto d = Distribution::uniform_box({0.0}, {1.0});
    const auto ss = draw_supersample(d, 21, 1);
    EXPECT_THROW(build_theta_hat(constant, ss, ThetaMode::exact(), 0), std::invalid_argument);
    EXPECT_THROW(build_theta_hat(constant, ss, ThetaMode::sampled(0, 1), 0), std::invalid_argument);
}

TEST(ThetaHat, SampledIsSubsetOfExact) {
    const auto d = Distribution::uniform_box({0.0}, {1.0});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ss = draw_supersample(d, 8, seed);
        const auto full = build_theta_hat(sample_mean, ss, ThetaMode::exact(), 0);
        const auto part = build_theta_hat(sample_mean, ss, ThetaMode::sampled(40, seed), 0);
        EXPECT_FALSE(part.exact);
        EXPECT_EQ(part.runs, 40U);
        EXPECT_LE(part.cloud.size(), full.cloud.size());
        for (const auto& p : part.cloud) EXPECT_TRUE(contains(full.cloud, p));
        // Without replacement: 40 distinct sign vectors give 40 distinct means
        // for generic data.
        EXPECT_EQ(part.cloud.size(), 40U);

        const auto all = build_theta_hat(sample_mean, ss, ThetaMode::sampled(256, seed), 0);
        EXPECT_TRUE(all.exact);
        EXPECT_EQ(all.cloud.points(), full.cloud.points());
    }
}

TEST(ThetaBar, ContainsThetaHat) {
    const auto d = Distribution::uniform_box({0.0}, {1.0});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 1 + seed % 6;
        const auto ss = draw_supersample(d, n, seed);
        const auto hat = build_theta_hat(sample_mean, ss, ThetaMode::exact(), 0);
        const auto bar = build_theta_bar(sample_mean, ss, 0);
        for (const auto& p : hat.cloud) EXPECT_TRUE(contains(bar, p));
        const auto hat_first = build_theta_hat(first_point, ss, ThetaMode::exact(), 0);
        const auto bar_first = build_theta_bar(first_point, ss, 0);
        for (const auto& p : hat_first.cloud) EXPECT_TRUE(contains(bar_first, p));
        // Binomial(2n, n) subsets with generic data: all means distinct.
        double count = 1.0;
        for (std::size_t k = 1; k <= n; ++k) count = count * static_cast<double>(n + k) / static_cast<double>(k);
        EXPECT_EQ(static_cast<double>(bar.size()), std::round(count));
    }
    EXPECT_THROW(build_theta_bar(sample_mean, draw_supersample(d, 7, 0), 0), std::invalid_argument);
}
