/**
 * @file config.hpp
 *
 * JSON run configurations, experiment dispatch, CSV/JSON reports and the
 * replay manifest.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "arc/algorithms.hpp"
#include "arc/bounds.hpp"
#include "arc/io.hpp"
#include "arc/rng.hpp"
#include "arc/supersample.hpp"

namespace arc {

inline constexpr const char* kToolVersion = "0.1.0";

using json = nlohmann::json;

/// Schema violation in a run configuration; `field` is a JSON path.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct RunConfig {
    std::string experiment;
    json raw;  // the configuration after command-line overrides
    ExperimentSetup setup;
    LearnerSpec learner;
    std::vector<double> cover_eps;
    std::vector<std::size_t> n_grid;
    std::size_t sampled_sigma = 4096;
    std::uint64_t mc_draws = 4096;
    bool with_fractal = false;
    std::string out_path;
    std::string format = "csv";
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"arc", "sgd-check", "compress-check", "vc-check", "fractal-check",
                                                "limit-trend"};
    return names;
}

namespace detail {

template <typename T>
T field(const json& j, const std::string& key, const std::string& path, std::optional<T> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(path + key, "required field is missing");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + key, "has the wrong type (" + std::string(j.at(key).type_name()) + ")");
    }
}

inline std::size_t count_field(const json& j, const std::string& key, const std::string& path,
                               std::optional<std::size_t> fallback = std::nullopt) {
    if (j.contains(key) && !(j.at(key).is_number_unsigned() || (j.at(key).is_number_integer() && j.at(key).get<long long>() >= 0)))
        throw ConfigError(path + key, "must be a nonnegative integer");
    return field<std::size_t>(j, key, path, fallback);
}

inline Vector vector_field(const json& j, const std::string& key, const std::string& path,
                           std::optional<Vector> fallback = std::nullopt) {
    Vector v = field<Vector>(j, key, path, std::move(fallback));
    try {
        check_vector(v);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + key, e.what());
    }
    return v;
}

inline void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& path) {
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(path + k, "unknown field");
}

inline Domain parse_domain(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "must be an object with 'box' or 'ball'");
    if (j.contains("box")) {
        Vector lo, hi;
        const json& b = j.at("box");
        if (!b.is_array() || b.empty()) throw ConfigError(path + "box", "must be a nonempty list of [lo, hi] pairs");
        for (const auto& pair : b) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                throw ConfigError(path + "box", "every entry must be a [lo, hi] pair");
            lo.push_back(pair[0].get<double>());
            hi.push_back(pair[1].get<double>());
        }
        try {
            return Domain::box(lo, hi);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(path + "box", e.what());
        }
    }
    if (j.contains("ball")) {
        const json& b = j.at("ball");
        const Vector c = vector_field(b, "center", path + "ball.");
        const double r = field<double>(b, "radius", path + "ball.");
        try {
            return Domain::ball(c, r);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(path + "ball", e.what());
        }
    }
    throw ConfigError(path, "must contain 'box' or 'ball'");
}

inline Distribution parse_distribution(const json& j, const std::string& path) {
    const std::string kind = field<std::string>(j, "dist", path);
    const json params = j.contains("params") ? j.at("params") : json::object();
    const std::string pp = path + "params.";
    try {
        if (kind == "uniform_box") return Distribution::uniform_box(vector_field(params, "lo", pp), vector_field(params, "hi", pp));
        if (kind == "trunc_gauss")
            return Distribution::trunc_gauss(vector_field(params, "mean", pp), field<double>(params, "sd", pp),
                                             vector_field(params, "lo", pp), vector_field(params, "hi", pp));
        if (kind == "empirical") {
            if (params.contains("csv")) return Distribution::empirical(read_point_rows(field<std::string>(params, "csv", pp)));
            return Distribution::empirical(field<std::vector<Vector>>(params, "atoms", pp));
        }
        if (kind == "labeled_threshold")
            return Distribution::labeled_threshold(field<double>(params, "threshold", pp, 0.5),
                                                   field<double>(params, "noise", pp, 0.1));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + "params", e.what());
    }
    throw ConfigError(path + "dist", "unknown distribution '" + kind +
                                         "' (expected uniform_box, trunc_gauss, empirical or labeled_threshold)");
}

inline std::vector<Vector> parse_grid(const json& j, const std::string& path) {
    if (j.is_object() && j.contains("linspace")) {
        const json& l = j.at("linspace");
        if (!l.is_array() || l.size() != 3) throw ConfigError(path + "linspace", "must be [lo, hi, count]");
        const double lo = l[0].get<double>(), hi = l[1].get<double>();
        const auto count = l[2].get<std::size_t>();
        if (count == 0) throw ConfigError(path + "linspace", "count must be positive");
        std::vector<Vector> g;
        for (std::size_t i = 0; i < count; ++i)
            g.push_back({count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1)});
        return g;
    }
    if (j.is_array()) {
        std::vector<Vector> g;
        for (const auto& p : j) {
            if (p.is_number()) g.push_back({p.get<double>()});
            else if (p.is_array()) g.push_back(p.get<Vector>());
            else throw ConfigError(path, "grid entries must be numbers or coordinate lists");
        }
        if (g.empty()) throw ConfigError(path, "grid must be nonempty");
        return g;
    }
    throw ConfigError(path, "must be a list of points or {\"linspace\": [lo, hi, count]}");
}

inline LearnerSpec parse_learner(const json& j, const std::string& path) {
    LearnerSpec s;
    const std::string kind = field<std::string>(j, "kind", path);
    if (kind == "sgd") {
        reject_unknown(j, {"kind", "theta1", "eta", "T", "index_seed", "indices", "domain"}, path);
        s.kind = LearnerSpec::Kind::Sgd;
        s.theta1 = vector_field(j, "theta1", path);
        s.eta = field<double>(j, "eta", path);
        s.T = count_field(j, "T", path);
        if (s.T == 0) throw ConfigError(path + "T", "must be at least 1");
        if (j.contains("indices")) s.indices = field<std::vector<std::size_t>>(j, "indices", path);
        if (!s.indices.empty() && s.indices.size() != s.T)
            throw ConfigError(path + "indices", "length must equal T");
        if (!j.contains("domain")) throw ConfigError(path + "domain", "required field is missing");
        s.domain = parse_domain(j.at("domain"), path + "domain.");
        if (!s.domain->contains(s.theta1)) throw ConfigError(path + "theta1", "lies outside the domain");
    } else if (kind == "erm_grid") {
        reject_unknown(j, {"kind", "grid"}, path);
        s.kind = LearnerSpec::Kind::ErmGrid;
        if (!j.contains("grid")) throw ConfigError(path + "grid", "required field is missing");
        s.grid = parse_grid(j.at("grid"), path + "grid");
    } else if (kind == "compress_k") {
        reject_unknown(j, {"kind", "k"}, path);
        s.kind = LearnerSpec::Kind::CompressK;
        s.k = count_field(j, "k", path);
        if (s.k == 0) throw ConfigError(path + "k", "must be at least 1");
    } else if (kind == "vc_threshold") {
        reject_unknown(j, {"kind"}, path);
        s.kind = LearnerSpec::Kind::VcThreshold;
    } else {
        throw ConfigError(path + "kind", "unknown learner '" + kind + "' (expected sgd, erm_grid, compress_k or vc_threshold)");
    }
    return s;
}

/// Bounding box of the parameters the learner can output, used for the
/// loss constants when the loss has no explicit domain.
inline Domain learner_domain(const LearnerSpec& s, const Distribution& dist) {
    if (s.kind == LearnerSpec::Kind::Sgd) return *s.domain;
    if (s.kind == LearnerSpec::Kind::ErmGrid) {
        Vector lo = s.grid.front(), hi = s.grid.front();
        for (const auto& p : s.grid)
            for (std::size_t k = 0; k < p.size(); ++k) {
                lo[k] = std::min(lo[k], p[k]);
                hi[k] = std::max(hi[k], p[k]);
            }
        return Domain::box(lo, hi);
    }
    return Domain::box(dist.support_lo(), dist.support_hi());
}

inline LossModel parse_loss(const json& j, const std::string& path, const LearnerSpec& learner, const Distribution& dist,
                            Metric metric) {
    const std::string kind = field<std::string>(j, "kind", path, std::string("quadratic"));
    if (kind == "zero_one_threshold") {
        reject_unknown(j, {"kind"}, path);
        return zero_one_threshold_loss();
    }
    if (kind != "quadratic")
        throw ConfigError(path + "kind", "unknown loss '" + kind + "' (expected quadratic or zero_one_threshold)");
    reject_unknown(j, {"kind", "curvature", "domain"}, path);
    const Vector curvature = vector_field(j, "curvature", path, Vector(dist.dim(), 1.0));
    const Domain domain = j.contains("domain") ? parse_domain(j.at("domain"), path + "domain.") : learner_domain(learner, dist);
    try {
        LossModel l = quadratic_loss(curvature, domain, dist.support_lo(), dist.support_hi(), metric);
        validate_loss(l, domain, dist.support_lo(), dist.support_hi());
        return l;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path.empty() ? "loss" : path.substr(0, path.size() - 1), e.what());
    }
}

}  // namespace detail

/**
 * Validates `j` and builds the run. Unknown top-level fields, wrong types,
 * unsupported combinations and n above exact_n_limit are ConfigErrors.
 * Seed precedence: top-level "seed", then the distribution's "seed", then 0.
 */
inline RunConfig parse_run_config(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("$", "configuration must be a JSON object");
    reject_unknown(j,
                   {"experiment", "n", "reps", "seed", "delta", "learner", "loss", "dist", "risk", "limits", "metric",
                    "dedup_tol", "margin_se", "theta_mode", "with_fractal", "cover_eps", "n_grid", "sampled_sigma",
                    "mc_draws", "output"},
                   "");
    RunConfig c;
    c.raw = j;
    c.experiment = field<std::string>(j, "experiment", "");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");

    ExperimentSetup& s = c.setup;
    s.n = count_field(j, "n", "", std::size_t{8});
    s.reps = count_field(j, "reps", "", std::size_t{100});
    if (s.reps == 0) throw ConfigError("reps", "must be at least 1");
    s.delta = field<double>(j, "delta", "", 0.05);
    if (!(s.delta > 0.0 && s.delta <= 1.0)) throw ConfigError("delta", "must lie in (0, 1]");
    s.margin_se = field<double>(j, "margin_se", "", 3.0);
    s.dedup_tol = field<double>(j, "dedup_tol", "", 0.0);
    if (!(s.dedup_tol >= 0.0)) throw ConfigError("dedup_tol", "must be nonnegative");
    try {
        s.metric = parse_metric(field<std::string>(j, "metric", "", std::string("linf")));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("metric", e.what());
    }

    if (j.contains("limits")) {
        const json& l = j.at("limits");
        reject_unknown(l, {"exact_n_limit", "exact_limit", "oracle_limit", "node_budget"}, "limits.");
        s.exact_n_limit = count_field(l, "exact_n_limit", "limits.", kExactNLimit);
        s.limits.exact_limit = count_field(l, "exact_limit", "limits.", s.limits.exact_limit);
        s.limits.oracle_limit = count_field(l, "oracle_limit", "limits.", s.limits.oracle_limit);
        s.limits.node_budget = count_field(l, "node_budget", "limits.", s.limits.node_budget);
        if (s.exact_n_limit > 30) throw ConfigError("limits.exact_n_limit", "must not exceed 30");
    }
    if (j.contains("risk")) {
        const json& r = j.at("risk");
        reject_unknown(r, {"mode", "heldout"}, "risk.");
        const std::string mode = field<std::string>(r, "mode", "risk.", std::string("auto"));
        if (mode == "auto") s.risk.mode = RiskMode::Auto;
        else if (mode == "closed_form") s.risk.mode = RiskMode::ClosedForm;
        else if (mode == "heldout") s.risk.mode = RiskMode::Heldout;
        else throw ConfigError("risk.mode", "must be auto, closed_form or heldout");
        s.risk.heldout = count_field(r, "heldout", "risk.", s.risk.heldout);
        if (s.risk.heldout < 2) throw ConfigError("risk.heldout", "must be at least 2");
    }

    const std::string theta_mode = field<std::string>(j, "theta_mode", "", std::string("exact"));
    if (theta_mode != "exact" && theta_mode != "sampled") throw ConfigError("theta_mode", "must be exact or sampled");
    if (theta_mode == "sampled" && c.experiment != "limit-trend")
        throw ConfigError("theta_mode", "sampled theta_hat is only available for limit-trend; bounds need exact enumeration");
    if (c.experiment != "limit-trend" && s.n > s.exact_n_limit)
        throw ConfigError("n", "n = " + std::to_string(s.n) + " exceeds exact_n_limit = " + std::to_string(s.exact_n_limit) +
                                   " for exact theta_hat enumeration");
    if (s.n == 0) throw ConfigError("n", "must be at least 1");

    std::optional<std::uint64_t> dist_seed;
    if (c.experiment == "vc-check" && !j.contains("dist")) {
        s.dist = Distribution::labeled_threshold(0.5, 0.1);
    } else {
        if (!j.contains("dist")) throw ConfigError("dist", "required field is missing");
        const json& d = j.at("dist");
        reject_unknown(d, {"dist", "params", "seed"}, "dist.");
        s.dist = parse_distribution(d, "dist.");
        if (d.contains("seed")) dist_seed = field<std::uint64_t>(d, "seed", "dist.");
    }
    s.seed = j.contains("seed") ? field<std::uint64_t>(j, "seed", "") : dist_seed.value_or(0);

    if (c.experiment == "vc-check") {
        c.learner.kind = LearnerSpec::Kind::VcThreshold;
        if (j.contains("learner")) c.learner = parse_learner(j.at("learner"), "learner.");
        if (c.learner.kind != LearnerSpec::Kind::VcThreshold) throw ConfigError("learner.kind", "vc-check needs vc_threshold");
        if (s.dist.dim() != 2) throw ConfigError("dist", "vc-check needs labelled (x, y) data");
        s.loss = zero_one_threshold_loss();
    } else {
        if (!j.contains("learner")) throw ConfigError("learner", "required field is missing");
        c.learner = parse_learner(j.at("learner"), "learner.");
        if (c.experiment == "sgd-check" && c.learner.kind != LearnerSpec::Kind::Sgd)
            throw ConfigError("learner.kind", "sgd-check needs an sgd learner");
        if (c.experiment == "compress-check" && c.learner.kind != LearnerSpec::Kind::CompressK)
            throw ConfigError("learner.kind", "compress-check needs a compress_k learner");
        if (c.learner.kind == LearnerSpec::Kind::CompressK && c.learner.k > s.n)
            throw ConfigError("learner.k", "k = " + std::to_string(c.learner.k) + " exceeds n = " + std::to_string(s.n));
        const Metric loss_metric = c.experiment == "sgd-check" ? Metric::L2 : s.metric;
        const json lj = j.contains("loss") ? j.at("loss") : json::object();
        s.loss = parse_loss(lj, "loss.", c.learner, s.dist, loss_metric);
        if (c.learner.kind == LearnerSpec::Kind::VcThreshold && s.loss.kind != LossModel::Kind::ZeroOneThreshold)
            throw ConfigError("loss.kind", "vc_threshold learner needs the zero_one_threshold loss");
        if (c.learner.kind == LearnerSpec::Kind::Sgd) {
            if (s.loss.kind != LossModel::Kind::Quadratic) throw ConfigError("loss.kind", "sgd needs a quadratic loss");
            if (!(c.learner.eta > 0.0 && c.learner.eta < 2.0 / s.loss.beta))
                throw ConfigError("learner.eta", "must lie in (0, 2/beta) = (0, " + format_double(2.0 / s.loss.beta) + ")");
            if (c.learner.domain->dim() != s.dist.dim()) throw ConfigError("learner.domain", "dimension differs from the data");
            for (auto i : c.learner.indices)
                if (i >= s.n) throw ConfigError("learner.indices", "index " + std::to_string(i) + " is not below n");
        }
        if (c.learner.kind == LearnerSpec::Kind::ErmGrid)
            for (const auto& p : c.learner.grid)
                if (p.size() != s.dist.dim()) throw ConfigError("learner.grid", "point dimension differs from the data");
    }
    if (j.contains("learner") && j.at("learner").contains("index_seed"))
        s.learner_seed_base = field<std::uint64_t>(j.at("learner"), "index_seed", "learner.");
    if (c.learner.kind == LearnerSpec::Kind::VcThreshold) {
        c.learner.sentinel_lo = s.dist.support_lo()[0] - 1.0;
        c.learner.sentinel_hi = s.dist.support_hi()[0] + 1.0;
    }
    s.learner = make_learner(c.learner, s.loss);
    s.learner_id = c.learner.id();

    c.with_fractal = field<bool>(j, "with_fractal", "", false);
    if (j.contains("cover_eps")) {
        c.cover_eps = field<std::vector<double>>(j, "cover_eps", "");
        for (double e : c.cover_eps)
            if (!(e > 0.0)) throw ConfigError("cover_eps", "scales must be positive");
    }
    if (c.experiment == "limit-trend") {
        c.n_grid = field<std::vector<std::size_t>>(j, "n_grid", "");
        if (c.n_grid.empty()) throw ConfigError("n_grid", "must be nonempty");
        for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
            if (c.n_grid[i] < 2) throw ConfigError("n_grid", "every n must be at least 2");
            if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("n_grid", "must be strictly increasing");
            if (theta_mode == "exact" && c.n_grid[i] > s.exact_n_limit)
                throw ConfigError("n_grid", "n = " + std::to_string(c.n_grid[i]) + " exceeds exact_n_limit = " +
                                                std::to_string(s.exact_n_limit) + " with theta_mode exact");
        }
    }
    c.sampled_sigma = count_field(j, "sampled_sigma", "", c.sampled_sigma);
    c.mc_draws = count_field(j, "mc_draws", "", static_cast<std::size_t>(c.mc_draws));
    if (c.experiment == "fractal-check" && s.n <= 2) throw ConfigError("n", "fractal-check needs n > 2");
    if (j.contains("output")) {
        const json& o = j.at("output");
        reject_unknown(o, {"path", "format"}, "output.");
        c.out_path = field<std::string>(o, "path", "output.", std::string());
        c.format = field<std::string>(o, "format", "output.", std::string("csv"));
    }
    if (c.format != "csv" && c.format != "json") throw ConfigError("output.format", "must be csv or json");
    return c;
}

/// Overrides as they would appear in the file, then full validation.
inline RunConfig parse_run_config(json j, std::optional<std::uint64_t> seed, std::optional<std::size_t> reps,
                                  std::optional<std::string> out, std::optional<std::string> format) {
    if (!j.is_object()) throw ConfigError("$", "configuration must be a JSON object");
    if (seed) j["seed"] = *seed;
    if (reps) j["reps"] = *reps;
    if (out) j["output"]["path"] = *out;
    if (format) j["output"]["format"] = *format;
    return parse_run_config(j);
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

inline BoundReport run(const RunConfig& c) {
    const ExperimentSetup& s = c.setup;
    if (c.experiment == "arc") return expectation_bound_experiment(s, c.with_fractal);
    if (c.experiment == "fractal-check") return fractal_bound_experiment(s);
    if (c.experiment == "sgd-check") return sgd_check_experiment({s, c.learner, c.cover_eps});
    if (c.experiment == "compress-check") return compress_check_experiment(s, c.learner.k);
    if (c.experiment == "vc-check") return vc_check_experiment(s);
    if (c.experiment == "limit-trend") {
        LimitTrendSetup t;
        t.base = s;
        t.n_grid = c.n_grid;
        t.sampled_sigma = c.sampled_sigma;
        t.mc_draws = c.mc_draws;
        return limit_ratio_experiment(t);
    }
    throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
}

// ---------------------------------------------------------------- reports

inline std::string report_csv(const BoundReport& r) {
    std::ostringstream out;
    out << "experiment,n,rep,seed,gap,arc,bound_name,bound_value,pass\n";
    auto row = [&](const std::string& n, const std::string& rep, std::uint64_t seed, double gap, double arc,
                   const std::string& name, const std::string& value, const std::string& pass) {
        out << r.experiment << ',' << n << ',' << rep << ',' << seed << ',' << format_double(gap) << ','
            << format_double(arc) << ',' << name << ',' << value << ',' << pass << '\n';
    };
    const std::string n = std::to_string(r.n);
    if (r.experiment == "limit-trend") {
        std::size_t k = 0;
        for (const auto& [nn, ratio] : r.series) {
            for (std::size_t i = 0; i < r.reps; ++i, ++k) {
                const auto& rec = r.records[k];
                row(std::to_string(nn), std::to_string(rec.rep), rec.seed, 0.0, rec.arc, "", "", "");
            }
            row(std::to_string(nn), "all", r.seed, 0.0, 0.0, "limit_ratio", format_double(ratio), "report");
        }
        if (r.minkowski_estimate)
            row("all", "all", r.seed, 0.0, 0.0, "minkowski_slope", format_double(*r.minkowski_estimate), "report");
        return out.str();
    }
    std::vector<std::vector<const BoundCheck*>> per_rep(r.records.size());
    std::vector<const BoundCheck*> aggregate;
    for (const auto& c : r.checks) {
        if (c.rep) per_rep[*c.rep].push_back(&c);
        else aggregate.push_back(&c);
    }
    for (const auto& rec : r.records) {
        if (per_rep[rec.rep].empty()) row(n, std::to_string(rec.rep), rec.seed, rec.gap, rec.arc, "", "", "");
        for (const BoundCheck* c : per_rep[rec.rep])
            row(n, std::to_string(rec.rep), rec.seed, rec.gap, rec.arc, c->name, format_double(c->value),
                c->pass ? "true" : "false");
    }
    for (const BoundCheck* c : aggregate)
        row(n, "all", r.seed, r.mean_gap, r.mean_arc, c->name, format_double(c->value), c->pass ? "true" : "false");
    return out.str();
}

inline json report_json(const BoundReport& r) {
    json j;
    j["experiment"] = r.experiment;
    j["learner"] = r.learner_id;
    j["n"] = r.n;
    j["reps"] = r.reps;
    j["delta"] = r.delta;
    j["seed"] = r.seed;
    j["measured"] = {{"mean_gap", r.mean_gap}, {"se_gap", r.se_gap}, {"mean_arc", r.mean_arc}, {"se_arc", r.se_arc},
                     {"combined_se", r.combined_se}, {"essup_lower_estimate", r.essup_estimate}};
    json bounds = json::object();
    auto put = [&](const char* name, const std::optional<double>& v) {
        if (v) bounds[name] = *v;
    };
    put("expectation_rhs", r.expectation_rhs);
    put("highprob_rhs", r.highprob_rhs);
    put("fractal_Dn", r.fractal_Dn);
    put("sgd_rhs", r.sgd_rhs);
    put("compression_rhs", r.compression_rhs);
    put("vc_rhs", r.vc_rhs);
    j["bounds"] = bounds;
    j["flags"] = {{"exact_theta_hat", r.exact_theta_hat}, {"exact_covers", r.exact_covers}};
    json checks = json::array();
    for (const auto& c : r.checks) {
        json cj = {{"name", c.name}, {"anchor", c.anchor}, {"seed", c.seed}, {"lhs", c.lhs}, {"bound", c.value}, {"pass", c.pass}};
        cj["rep"] = c.rep ? json(*c.rep) : json("all");
        checks.push_back(cj);
    }
    j["checks"] = checks;
    json reps = json::array();
    for (const auto& rec : r.records)
        reps.push_back({{"rep", rec.rep}, {"seed", rec.seed}, {"learner_seed", rec.learner_seed}, {"gap", rec.gap},
                        {"arc", rec.arc}, {"theta_size", rec.theta_size}});
    j["records"] = reps;
    if (!r.series.empty()) {
        json s = json::array();
        for (const auto& [n, ratio] : r.series) s.push_back({{"n", n}, {"ratio", ratio}});
        j["series"] = s;
    }
    if (r.minkowski_estimate) j["minkowski_slope"] = *r.minkowski_estimate;
    j["pass"] = r.pass();
    return j;
}

inline json manifest(const RunConfig& c, const std::optional<BoundReport>& r, const std::string& error = {}) {
    const std::string canonical = c.raw.dump();
    json m = {{"tool", "arc"},
              {"version", kToolVersion},
              {"rng", kRngId},
              {"config_hash", "fnv1a64:" + hex64(fnv1a64(canonical))},
              {"experiment", c.experiment},
              {"seed", c.setup.seed},
              {"reps", c.setup.reps},
              {"config", c.raw}};
    m["partial"] = !r.has_value();
    m["pass"] = r ? r->pass() : false;
    if (!error.empty()) m["error"] = error;
    return m;
}

inline std::string manifest_path(const std::string& report_path) { return report_path + ".manifest.json"; }

}  // namespace arc
