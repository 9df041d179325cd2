// Command-line front end: point-cloud utilities (dim, rad, cover) and the
// seeded bound experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "arc/config.hpp"
#include "arc/fractal.hpp"
#include "arc/io.hpp"
#include "arc/rademacher.hpp"

namespace {

using arc::json;

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::optional<arc::Metric> metric_flag(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return arc::parse_metric(s);
}

int cmd_dim(const std::string& input, const std::string& metric, std::size_t exact_limit, bool oracle,
            const std::string& out) {
    const arc::PointCloud c = arc::read_point_cloud(input, metric_flag(metric));
    arc::SolverLimits limits;
    limits.exact_limit = exact_limit;
    const arc::DimResult d = arc::dim_fm(c, limits);
    json j = {{"value", d.focal ? json("inf") : json(d.value)},
              {"focal", d.focal},
              {"T", d.T ? json(*d.T) : json(nullptr)},
              {"delta", d.delta},
              {"nabla", d.nabla},
              {"exact", d.exact}};
    if (oracle) {
        if (d.focal || c.size() <= 2) throw std::invalid_argument("--oracle needs a non-focal cloud with more than two points");
        j["oracle_value"] = arc::dim_fm_oracle(c, 1e-10, limits.oracle_limit);
    }
    emit(j.dump(2) + "\n", out);
    return 0;
}

int cmd_rad(const std::string& input, const std::string& mode, std::uint64_t draws, std::uint64_t seed,
            const std::string& out) {
    const arc::LossMatrix m = arc::read_loss_matrix(input);
    arc::RadEstimate e;
    if (mode == "exact") e = arc::rademacher_exact(m);
    else if (mode == "mc") e = arc::rademacher_mc(m, draws, seed);
    else throw std::invalid_argument("--mode must be exact or mc");
    json j = {{"value", e.value}, {"stderr", e.std_error}, {"mode", mode}, {"draws", e.draws}, {"rows", m.rows()}, {"n", m.cols()}};
    if (mode == "mc") j["seed"] = seed;
    emit(j.dump(2) + "\n", out);
    return 0;
}

int cmd_cover(const std::string& input, const std::string& metric, double eps, std::size_t exact_limit,
              const std::string& out) {
    const arc::PointCloud c = arc::read_point_cloud(input, metric_flag(metric));
    arc::SolverLimits limits;
    limits.exact_limit = exact_limit;
    const arc::CoverResult r = arc::covering_number(c, eps, limits);
    json balls = json::array();
    for (const auto& b : r.cover) balls.push_back({{"center", b.center}, {"members", b.members}});
    json j = {{"eps", eps}, {"count", r.count}, {"exact", r.exact}, {"cover", balls}};
    emit(j.dump(2) + "\n", out);
    return 0;
}

struct ExperimentFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

int cmd_experiment(const std::string& name, const ExperimentFlags& f) {
    arc::json j = arc::load_json_file(f.config);
    if (j.is_object() && !j.contains("experiment")) j["experiment"] = name;
    if (j.is_object() && j["experiment"] != name)
        throw arc::ConfigError("experiment", "config is for '" + j["experiment"].dump() + "', not '" + name + "'");
    const arc::RunConfig c = arc::parse_run_config(j, f.seed, f.reps, f.out, f.format);
    std::optional<arc::BoundReport> report;
    std::string error;
    try {
        report = arc::run(c);
    } catch (const std::exception& e) {
        error = e.what();
    }
    if (!c.out_path.empty()) {
        std::ofstream(arc::manifest_path(c.out_path), std::ios::binary) << arc::manifest(c, report, error).dump(2) << '\n';
    }
    if (!report) {
        std::cerr << "error: " << error << '\n';
        return 1;
    }
    const std::string body = c.format == "json" ? arc::report_json(*report).dump(2) + "\n" : arc::report_csv(*report);
    emit(body, c.out_path);
    if (report->experiment == "limit-trend") {
        std::cerr << name << ": ratio series";
        for (const auto& [n, ratio] : report->series) std::cerr << ' ' << n << ':' << arc::format_double(ratio);
        std::cerr << '\n';
    } else {
        std::cerr << name << ": " << (report->pass() ? "all checks passed" : "CHECK FAILURES") << " (mean gap "
                  << arc::format_double(report->mean_gap) << ", mean ARC " << arc::format_double(report->mean_arc)
                  << ")\n";
    }
    return report->pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Algorithm-dependent Rademacher complexity: bounds, covering numbers and finite Minkowski dimension"};
    app.require_subcommand(1);
    app.set_version_flag("--version", arc::kToolVersion);

    std::string input, metric, out, mode = "exact";
    std::size_t exact_limit = 20;
    bool oracle = false;
    std::uint64_t draws = 10000, seed = 0;
    double eps = 0.0;

    auto* dim = app.add_subcommand("dim", "finite Minkowski dimension of a CSV point cloud");
    dim->add_option("--input", input, "point cloud CSV")->required()->check(CLI::ExistingFile);
    dim->add_option("--metric", metric, "override the sidecar metric")->check(CLI::IsMember({"linf", "l2"}));
    dim->add_option("--exact-limit", exact_limit, "largest set solved exactly");
    dim->add_flag("--oracle", oracle, "cross-check against the full-definition oracle");
    dim->add_option("--out", out, "output JSON (stdout if omitted)");

    auto* rad = app.add_subcommand("rad", "empirical Rademacher complexity of a loss matrix");
    rad->add_option("--loss-matrix", input, "CSV, one row per hypothesis")->required()->check(CLI::ExistingFile);
    rad->add_option("--mode", mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    rad->add_option("--draws", draws, "Monte Carlo sign vectors");
    rad->add_option("--seed", seed, "Monte Carlo seed");
    rad->add_option("--out", out, "output JSON (stdout if omitted)");

    auto* cover = app.add_subcommand("cover", "eps-covering number of a CSV point cloud");
    cover->add_option("--input", input, "point cloud CSV")->required()->check(CLI::ExistingFile);
    cover->add_option("--eps", eps, "radius")->required();
    cover->add_option("--metric", metric, "override the sidecar metric")->check(CLI::IsMember({"linf", "l2"}));
    cover->add_option("--exact-limit", exact_limit, "largest set solved exactly");
    cover->add_option("--out", out, "output JSON (stdout if omitted)");

    ExperimentFlags flags;
    std::vector<std::pair<std::string, CLI::App*>> experiments;
    const std::pair<const char*, const char*> descriptions[] = {
        {"arc", "expectation and high-probability checks"},
        {"sgd-check", "projected SGD: forgetting-depth covering and gap bound"},
        {"compress-check", "k-compression counting bounds"},
        {"vc-check", "threshold classifiers against the VC bound"},
        {"fractal-check", "fractal-dimension bounds on every output set"},
        {"limit-trend", "ARC / sqrt(ln n / n) series over a grid of n"}};
    for (const auto& [name, text] : descriptions) {
        auto* sub = app.add_subcommand(name, text);
        sub->add_option("--config", flags.config, "JSON run configuration")->required();
        sub->add_option("--seed", flags.seed, "override the configured seed");
        sub->add_option("--reps", flags.reps, "override the configured repetitions");
        sub->add_option("--out", flags.out, "report path (stdout if omitted)");
        sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        experiments.emplace_back(name, sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*dim) return cmd_dim(input, metric, exact_limit, oracle, out);
        if (*rad) return cmd_rad(input, mode, draws, seed, out);
        if (*cover) return cmd_cover(input, metric, eps, exact_limit, out);
        for (const auto& [name, sub] : experiments)
            if (*sub) return cmd_experiment(name, flags);
    } catch (const arc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
