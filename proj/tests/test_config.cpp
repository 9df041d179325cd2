#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "arc/config.hpp"

using namespace arc;

namespace {

json grid_config() {
    return json::parse(R"({
        "experiment": "arc",
        "n": 6,
        "reps": 20,
        "seed": 3,
        "learner": {"kind": "erm_grid", "grid": {"linspace": [0, 1, 16]}},
        "dist": {"dist": "uniform_box", "params": {"lo": [0], "hi": [1]}}
    })");
}

std::string config_error_field(const json& j) {
    try {
        parse_run_config(j);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<none>";
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "arc_config_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(FormatDouble, RoundTrips) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(1.0 / 3.0), "0.3333333333333333");
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(80)) - 40);
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
}

TEST(Config, ParsesGridExperiment) {
    const auto c = parse_run_config(grid_config());
    EXPECT_EQ(c.experiment, "arc");
    EXPECT_EQ(c.setup.n, 6U);
    EXPECT_EQ(c.setup.reps, 20U);
    EXPECT_EQ(c.setup.seed, 3U);
    EXPECT_EQ(c.learner.grid.size(), 16U);
    EXPECT_EQ(c.learner.grid[15], Vector{1.0});
    EXPECT_EQ(c.setup.loss.kind, LossModel::Kind::Quadratic);
    EXPECT_EQ(c.setup.loss.range_b, 0.5);
    EXPECT_EQ(c.setup.metric, Metric::Linf);
    EXPECT_EQ(c.setup.exact_n_limit, 20U);
    EXPECT_EQ(c.setup.limits.exact_limit, 20U);
    EXPECT_EQ(c.setup.limits.oracle_limit, 8U);
    EXPECT_EQ(c.setup.margin_se, 3.0);
    EXPECT_EQ(c.format, "csv");
}

TEST(Config, RejectsNAboveExactLimit) {
    auto j = grid_config();
    j["n"] = 25;
    try {
        parse_run_config(j);
        FAIL() << "expected a ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "n");
        EXPECT_NE(std::string(e.what()).find("exact_n_limit"), std::string::npos);
    }
}

TEST(Config, FieldLevelErrors) {
    auto j = grid_config();
    j["bogus"] = 1;
    EXPECT_EQ(config_error_field(j), "bogus");
    j = grid_config();
    j["reps"] = "many";
    EXPECT_EQ(config_error_field(j), "reps");
    j = grid_config();
    j["reps"] = -4;
    EXPECT_EQ(config_error_field(j), "reps");
    j = grid_config();
    j["experiment"] = "nope";
    EXPECT_EQ(config_error_field(j), "experiment");
    j = grid_config();
    j["delta"] = 1.5;
    EXPECT_EQ(config_error_field(j), "delta");
    j = grid_config();
    j["learner"]["kind"] = "svm";
    EXPECT_EQ(config_error_field(j), "learner.kind");
    j = grid_config();
    j["dist"]["params"]["lo"] = {2};
    EXPECT_EQ(config_error_field(j), "dist.params");
    j = grid_config();
    j.erase("dist");
    EXPECT_EQ(config_error_field(j), "dist");
    j = grid_config();
    j["theta_mode"] = "sampled";
    EXPECT_EQ(config_error_field(j), "theta_mode");
    j = grid_config();
    j["output"] = {{"format", "xml"}};
    EXPECT_EQ(config_error_field(j), "output.format");
}

TEST(Config, SgdValidation) {
    auto j = json::parse(R"({
        "experiment": "sgd-check", "n": 6, "reps": 5,
        "learner": {"kind": "sgd", "theta1": [0.5], "eta": 0.5, "T": 4, "domain": {"box": [[0, 1]]}},
        "dist": {"dist": "uniform_box", "params": {"lo": [0], "hi": [1]}},
        "cover_eps": [0.05]
    })");
    const auto c = parse_run_config(j);
    EXPECT_EQ(c.setup.loss.metric, Metric::L2);
    EXPECT_EQ(c.cover_eps, std::vector<double>{0.05});
    j["learner"]["eta"] = 2.5;
    EXPECT_EQ(config_error_field(j), "learner.eta");
    j["learner"]["eta"] = 0.5;
    j["learner"]["theta1"] = {3.0};
    EXPECT_EQ(config_error_field(j), "learner.theta1");
    j["learner"]["theta1"] = {0.5};
    j["learner"]["indices"] = {0, 1, 2};
    EXPECT_EQ(config_error_field(j), "learner.indices");
    j["learner"]["indices"] = {0, 1, 2, 9};
    EXPECT_EQ(config_error_field(j), "learner.indices");
    j["learner"]["indices"] = {0, 1, 2, 3};
    j["experiment"] = "compress-check";
    EXPECT_EQ(config_error_field(j), "learner.kind");
}

TEST(Config, SeedPrecedenceAndOverrides) {
    auto j = grid_config();
    j.erase("seed");
    EXPECT_EQ(parse_run_config(j).setup.seed, 0U);
    j["dist"]["seed"] = 44;
    EXPECT_EQ(parse_run_config(j).setup.seed, 44U);
    j["seed"] = 5;
    EXPECT_EQ(parse_run_config(j).setup.seed, 5U);
    const auto c = parse_run_config(j, 9, 3, std::string("out.csv"), std::string("json"));
    EXPECT_EQ(c.setup.seed, 9U);
    EXPECT_EQ(c.setup.reps, 3U);
    EXPECT_EQ(c.out_path, "out.csv");
    EXPECT_EQ(c.format, "json");
    EXPECT_EQ(c.raw["seed"], 9);
}

TEST(Config, VcDefaults) {
    const auto c = parse_run_config(json::parse(R"({"experiment": "vc-check", "n": 6, "reps": 4})"));
    EXPECT_EQ(c.setup.dist.kind(), Distribution::Kind::LabeledThreshold);
    EXPECT_EQ(c.setup.loss.kind, LossModel::Kind::ZeroOneThreshold);
    EXPECT_EQ(c.learner.sentinel_lo, -1.0);
    EXPECT_EQ(c.learner.sentinel_hi, 2.0);
    EXPECT_TRUE(run(c).pass());
}

TEST(Config, SameConfigGivesIdenticalReports) {
    const auto c = parse_run_config(grid_config());
    const auto a = run(c), b = run(parse_run_config(grid_config()));
    EXPECT_EQ(report_csv(a), report_csv(b));
    EXPECT_EQ(report_json(a).dump(), report_json(b).dump());
    const std::string csv = report_csv(a);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "experiment,n,rep,seed,gap,arc,bound_name,bound_value,pass");
    EXPECT_NE(csv.find(",all,"), std::string::npos);
    EXPECT_NE(csv.find("expectation"), std::string::npos);
}

TEST(Config, Manifest) {
    const auto c = parse_run_config(grid_config());
    const auto r = run(c);
    const auto m = manifest(c, r);
    EXPECT_EQ(m["tool"], "arc");
    EXPECT_EQ(m["version"], kToolVersion);
    EXPECT_EQ(m["rng"], std::string(kRngId));
    EXPECT_EQ(m["config_hash"], "fnv1a64:" + hex64(fnv1a64(c.raw.dump())));
    EXPECT_EQ(m["partial"], false);
    EXPECT_EQ(m["config"], c.raw);
    const auto failed = manifest(c, std::nullopt, "boom");
    EXPECT_EQ(failed["partial"], true);
    EXPECT_EQ(failed["error"], "boom");
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");

    // The manifest's config replays the run exactly.
    const auto replay = run(parse_run_config(m["config"]));
    EXPECT_EQ(report_csv(replay), report_csv(r));
}

TEST(Io, PointCloudRoundTrip) {
    const auto path = scratch("cloud.csv").string();
    const PointCloud c({{0.1, 0.2}, {1.0 / 3.0, -4.0}}, Metric::L2, 1e-9);
    write_point_cloud(path, c);
    const auto back = read_point_cloud(path);
    EXPECT_EQ(back.points(), c.points());
    EXPECT_EQ(back.metric(), Metric::L2);
    EXPECT_EQ(back.dedup_tol(), 1e-9);
    EXPECT_EQ(read_point_cloud(path, Metric::Linf).metric(), Metric::Linf);
}

TEST(Io, RejectsMalformedCsv) {
    const auto path = scratch("bad.csv").string();
    std::ofstream(path) << "c0,c2\n1,2\n";
    EXPECT_THROW(read_point_rows(path), std::invalid_argument);
    std::ofstream(path) << "c0\n1\nx\n";
    EXPECT_THROW(read_point_rows(path), std::invalid_argument);
    std::ofstream(path) << "c0,c1\n1\n";
    EXPECT_THROW(read_point_rows(path), std::invalid_argument);
    EXPECT_THROW(read_point_rows(scratch("missing.csv").string()), std::invalid_argument);
}

TEST(Io, LossMatrixWithHeader) {
    const auto path = scratch("losses.csv").string();
    std::ofstream(path) << "z0,z1\n0,0\n1,1\n";
    const auto m = read_loss_matrix(path);
    EXPECT_EQ(m.rows(), 2U);
    EXPECT_EQ(m.cols(), 2U);
    EXPECT_NEAR(rademacher_exact(m).value, 0.25, 1e-12);
}

TEST(Io, EmpiricalDistributionFromCsv) {
    const auto path = scratch("atoms.csv").string();
    std::ofstream(path) << "c0\n0.25\n0.75\n0.75\n";
    auto j = grid_config();
    j["dist"] = {{"dist", "empirical"}, {"params", {{"csv", path}}}};
    const auto c = parse_run_config(j);
    EXPECT_EQ(c.setup.dist.atoms().size(), 3U);
    EXPECT_EQ(c.setup.dist.support_lo(), Vector{0.25});
}
