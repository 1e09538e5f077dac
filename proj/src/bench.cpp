#include "cbas/bench.hpp"

#include "cbas/models.hpp"
#include "cbas/oracle.hpp"
#include "cbas/reference.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace cbas {

namespace fs = std::filesystem;
using nlohmann::json;

// --- small helpers ------------------------------------------------------------

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw ConfigError("bad numeric field '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                return it.key() == k;
            }) == known.end()) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

}  // namespace

// --- scenario names -------------------------------------------------------------

std::string_view to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::illustrative_1d: return "illustrative-1d";
        case Scenario::sequence_design: return "sequence-design";
        case Scenario::q_sweep: return "q-sweep";
        case Scenario::specification_1d: return "specification-1d";
    }
    return "unknown";
}

Scenario scenario_from_string(std::string_view name) {
    if (name == "illustrative-1d") return Scenario::illustrative_1d;
    if (name == "sequence-design") return Scenario::sequence_design;
    if (name == "q-sweep") return Scenario::q_sweep;
    if (name == "specification-1d") return Scenario::specification_1d;
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

// --- config ----------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults(Scenario scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    switch (scenario) {
        case Scenario::illustrative_1d:
        case Scenario::specification_1d:
            c.seeds = {1};
            c.methods = {Method::cbas};
            break;
        case Scenario::sequence_design:
            c.max_iterations = 1000;  // budget-limited
            break;
        case Scenario::q_sweep:
            c.methods = {Method::cbas};
            c.max_iterations = 1000;
            c.oracle.ensemble_sizes = {1};
            break;
    }
    return c;
}

void ExperimentConfig::validate() const {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("q must be in (0,1]");
    if (samples_per_iteration < 2) throw ConfigError("samples_per_iteration must be >= 2");
    if (max_iterations == 0) throw ConfigError("max_iterations must be >= 1");
    if (seeds.empty()) throw ConfigError("need at least one seed");
    if (methods.empty()) throw ConfigError("need at least one method");
    if (sequence_budget < samples_per_iteration) {
        throw ConfigError("sequence_budget must cover at least one iteration");
    }
    for (double qi : q_sweep) {
        if (!(qi > 0.0 && qi <= 1.0)) throw ConfigError("q_sweep entries must be in (0,1]");
    }
    if (q_sweep.empty()) throw ConfigError("q_sweep must be non-empty");
    if (!(oracle.training_fraction > 0.0 && oracle.training_fraction <= 1.0)) {
        throw ConfigError("oracle.training_fraction must be in (0,1]");
    }
    if (oracle.basis != "raw" && oracle.basis != "saturating") {
        throw ConfigError("oracle.basis must be 'raw' or 'saturating'");
    }
    if (oracle.ensemble_sizes.empty()) throw ConfigError("oracle.ensemble_sizes must be non-empty");
    if (!(oracle.noise_variance >= 0.0)) throw ConfigError("oracle.noise_variance must be >= 0");
    if (!(oracle.training_percentile > 0.0 && oracle.training_percentile <= 1.0)) {
        throw ConfigError("oracle.training_percentile must be in (0,1]");
    }
    if (one_d.grid_points < 2000) throw ConfigError("one_d.grid_points must be >= 2000");
    if (!(one_d.grid_lo < one_d.domain_lo && one_d.grid_hi > one_d.domain_hi)) {
        throw ConfigError("the quadrature grid must cover the design domain");
    }
    if (sequence.length < 2 || sequence.alphabet < 2) throw ConfigError("bad sequence dimensions");
    if (sequence.train_count == 0 || sequence.pool == 0) throw ConfigError("bad sequence pool");
    if (!(model.variance_floor > 0.0)) throw ConfigError("model.variance_floor must be > 0");
    if (model.prior_smoothing < 0.0 || model.search_smoothing < 0.0) {
        throw ConfigError("smoothing must be >= 0");
    }
    if (!(model.refit_inertia >= 0.0 && model.refit_inertia < 1.0)) {
        throw ConfigError("model.refit_inertia must be in [0,1)");
    }
    if (!(baselines.rwr_alpha > 0.0)) throw ConfigError("baselines.rwr_alpha must be > 0");
    if (!(baselines.cem_quantile > 0.0 && baselines.cem_quantile <= 1.0)) {
        throw ConfigError("baselines.cem_quantile must be in (0,1]");
    }
    if (!(specification.q > 0.0 && specification.q <= 1.0)) {
        throw ConfigError("specification.q must be in (0,1]");
    }
    if (specification.iterations == 0) throw ConfigError("specification.iterations must be >= 1");
}

json ExperimentConfig::to_json() const {
    json methods_j = json::array();
    for (Method m : methods) methods_j.push_back(std::string(to_string(m)));
    return json{
        {"scenario", std::string(to_string(scenario))},
        {"methods", methods_j},
        {"seeds", seeds},
        {"master_seed", master_seed},
        {"q", q},
        {"samples_per_iteration", samples_per_iteration},
        {"max_iterations", max_iterations},
        {"sequence_budget", sequence_budget},
        {"q_sweep", q_sweep},
        {"q_band", q_band},
        {"out_dir", out_dir},
        {"weight_floor_ess", weight_floor_ess},
        {"one_d",
         {{"domain_lo", one_d.domain_lo},
          {"domain_hi", one_d.domain_hi},
          {"bump1", {{"center", one_d.bump1.center}, {"width", one_d.bump1.width}, {"height", one_d.bump1.height}}},
          {"bump2", {{"center", one_d.bump2.center}, {"width", one_d.bump2.width}, {"height", one_d.bump2.height}}},
          {"n_train", one_d.n_train},
          {"grid_lo", one_d.grid_lo},
          {"grid_hi", one_d.grid_hi},
          {"grid_points", one_d.grid_points}}},
        {"sequence",
         {{"length", sequence.length},
          {"alphabet", sequence.alphabet},
          {"pool", sequence.pool},
          {"train_count", sequence.train_count},
          {"landscape_seed", sequence.landscape_seed},
          {"site_sd", sequence.site_sd},
          {"coupling_strength", sequence.coupling_strength},
          {"coupling_correlation", sequence.coupling_correlation},
          {"coupling_threshold_sds", sequence.coupling_threshold_sds},
          {"pairwise_noise_sd", sequence.pairwise_noise_sd},
          {"mutation_rate", sequence.mutation_rate},
          {"offset", sequence.offset}}},
        {"oracle",
         {{"degree", oracle.degree},
          {"holdout_fraction", oracle.holdout_fraction},
          {"basis", oracle.basis},
          {"saturating_scale_mult", oracle.saturating_scale_mult},
          {"training_fraction", oracle.training_fraction},
          {"noise_variance", oracle.noise_variance},
          {"ensemble_sizes", oracle.ensemble_sizes},
          {"noise_sd", oracle.noise_sd},
          {"training_percentile", oracle.training_percentile}}},
        {"model",
         {{"variance_floor", model.variance_floor},
          {"prior_smoothing", model.prior_smoothing},
          {"search_smoothing", model.search_smoothing},
          {"refit_inertia", model.refit_inertia}}},
        {"baselines",
         {{"rwr_alpha", baselines.rwr_alpha},
          {"cem_quantile", baselines.cem_quantile},
          {"fb_threshold_percentile", baselines.fb_threshold_percentile}}},
        {"specification",
         {{"anchor_x", specification.anchor_x},
          {"q", specification.q},
          {"iterations", specification.iterations}}},
    };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    try {
        reject_unknown_keys(j,
                            {"scenario", "methods", "seeds", "master_seed", "q",
                             "samples_per_iteration", "max_iterations", "sequence_budget",
                             "q_sweep", "q_band", "out_dir", "weight_floor_ess", "one_d",
                             "sequence", "oracle", "model", "baselines", "specification"},
                            "config");
        ExperimentConfig c = defaults(
            scenario_from_string(j.value("scenario", std::string("illustrative-1d"))));
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j.at("methods")) {
                c.methods.push_back(method_from_string(m.get<std::string>()));
            }
        }
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        c.master_seed = j.value("master_seed", c.master_seed);
        c.q = j.value("q", c.q);
        c.samples_per_iteration = j.value("samples_per_iteration", c.samples_per_iteration);
        c.max_iterations = j.value("max_iterations", c.max_iterations);
        c.sequence_budget = j.value("sequence_budget", c.sequence_budget);
        if (j.contains("q_sweep")) c.q_sweep = j.at("q_sweep").get<std::vector<double>>();
        c.q_band = j.value("q_band", c.q_band);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.weight_floor_ess = j.value("weight_floor_ess", c.weight_floor_ess);
        if (j.contains("one_d")) {
            const auto& o = j.at("one_d");
            reject_unknown_keys(o,
                                {"domain_lo", "domain_hi", "bump1", "bump2", "n_train", "grid_lo",
                                 "grid_hi", "grid_points"},
                                "one_d");
            c.one_d.domain_lo = o.value("domain_lo", c.one_d.domain_lo);
            c.one_d.domain_hi = o.value("domain_hi", c.one_d.domain_hi);
            auto read_bump = [&](const char* key, Bump& b) {
                if (!o.contains(key)) return;
                const auto& bj = o.at(key);
                reject_unknown_keys(bj, {"center", "width", "height"}, key);
                b.center = bj.value("center", b.center);
                b.width = bj.value("width", b.width);
                b.height = bj.value("height", b.height);
            };
            read_bump("bump1", c.one_d.bump1);
            read_bump("bump2", c.one_d.bump2);
            c.one_d.n_train = o.value("n_train", c.one_d.n_train);
            c.one_d.grid_lo = o.value("grid_lo", c.one_d.grid_lo);
            c.one_d.grid_hi = o.value("grid_hi", c.one_d.grid_hi);
            c.one_d.grid_points = o.value("grid_points", c.one_d.grid_points);
        }
        if (j.contains("sequence")) {
            const auto& s = j.at("sequence");
            reject_unknown_keys(s,
                                {"length", "alphabet", "pool", "train_count", "landscape_seed",
                                 "site_sd", "coupling_strength", "coupling_correlation",
                                 "coupling_threshold_sds", "pairwise_noise_sd", "mutation_rate",
                                 "offset"},
                                "sequence");
            c.sequence.length = s.value("length", c.sequence.length);
            c.sequence.alphabet = s.value("alphabet", c.sequence.alphabet);
            c.sequence.pool = s.value("pool", c.sequence.pool);
            c.sequence.train_count = s.value("train_count", c.sequence.train_count);
            c.sequence.landscape_seed = s.value("landscape_seed", c.sequence.landscape_seed);
            c.sequence.site_sd = s.value("site_sd", c.sequence.site_sd);
            c.sequence.coupling_strength = s.value("coupling_strength", c.sequence.coupling_strength);
            c.sequence.coupling_correlation =
                s.value("coupling_correlation", c.sequence.coupling_correlation);
            c.sequence.coupling_threshold_sds =
                s.value("coupling_threshold_sds", c.sequence.coupling_threshold_sds);
            c.sequence.pairwise_noise_sd = s.value("pairwise_noise_sd", c.sequence.pairwise_noise_sd);
            c.sequence.mutation_rate = s.value("mutation_rate", c.sequence.mutation_rate);
            c.sequence.offset = s.value("offset", c.sequence.offset);
        }
        if (j.contains("oracle")) {
            const auto& o = j.at("oracle");
            reject_unknown_keys(o,
                                {"degree", "holdout_fraction", "basis", "saturating_scale_mult",
                                 "training_fraction", "noise_variance", "ensemble_sizes",
                                 "noise_sd", "training_percentile"},
                                "oracle");
            c.oracle.degree = o.value("degree", c.oracle.degree);
            c.oracle.holdout_fraction = o.value("holdout_fraction", c.oracle.holdout_fraction);
            c.oracle.basis = o.value("basis", c.oracle.basis);
            c.oracle.saturating_scale_mult =
                o.value("saturating_scale_mult", c.oracle.saturating_scale_mult);
            c.oracle.training_fraction = o.value("training_fraction", c.oracle.training_fraction);
            c.oracle.noise_variance = o.value("noise_variance", c.oracle.noise_variance);
            if (o.contains("ensemble_sizes")) {
                c.oracle.ensemble_sizes = o.at("ensemble_sizes").get<std::vector<std::size_t>>();
            }
            c.oracle.noise_sd = o.value("noise_sd", c.oracle.noise_sd);
            c.oracle.training_percentile =
                o.value("training_percentile", c.oracle.training_percentile);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            reject_unknown_keys(
                m, {"variance_floor", "prior_smoothing", "search_smoothing", "refit_inertia"},
                "model");
            c.model.variance_floor = m.value("variance_floor", c.model.variance_floor);
            c.model.prior_smoothing = m.value("prior_smoothing", c.model.prior_smoothing);
            c.model.search_smoothing = m.value("search_smoothing", c.model.search_smoothing);
            c.model.refit_inertia = m.value("refit_inertia", c.model.refit_inertia);
        }
        if (j.contains("baselines")) {
            const auto& b = j.at("baselines");
            reject_unknown_keys(b, {"rwr_alpha", "cem_quantile", "fb_threshold_percentile"},
                                "baselines");
            c.baselines.rwr_alpha = b.value("rwr_alpha", c.baselines.rwr_alpha);
            c.baselines.cem_quantile = b.value("cem_quantile", c.baselines.cem_quantile);
            c.baselines.fb_threshold_percentile =
                b.value("fb_threshold_percentile", c.baselines.fb_threshold_percentile);
        }
        if (j.contains("specification")) {
            const auto& s = j.at("specification");
            reject_unknown_keys(s, {"anchor_x", "q", "iterations"}, "specification");
            c.specification.anchor_x = s.value("anchor_x", c.specification.anchor_x);
            c.specification.q = s.value("q", c.specification.q);
            c.specification.iterations = s.value("iterations", c.specification.iterations);
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

// --- percentile summaries -----------------------------------------------------------

PercentileSummaryRow percentile_summary(std::span<const double> oracle_means,
                                        std::span<const double> ground_truth) {
    if (oracle_means.size() != ground_truth.size() || oracle_means.empty()) {
        throw std::invalid_argument("percentile_summary: bad inputs");
    }
    PercentileSummaryRow row;
    for (std::size_t k = 0; k < kSummaryPercentiles.size(); ++k) {
        const double cut = nearest_rank_percentile(oracle_means, kSummaryPercentiles[k]);
        double acc = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < oracle_means.size(); ++i) {
            if (oracle_means[i] >= cut) {
                acc += ground_truth[i];
                ++n;
            }
        }
        row.oracle_p[k] = cut;
        row.gt_p[k] = acc / static_cast<double>(n);
    }
    return row;
}

CellAggregate aggregate_run(const RunTable& run, bool gamma_non_increasing) {
    if (run.rows.empty()) throw std::invalid_argument("aggregate_run: empty run");
    CellAggregate agg;
    agg.key = run.key;
    agg.iterations = run.rows.size();
    agg.gamma_final = run.rows.back().gamma;
    agg.final_row = run.rows.back().summary;
    for (const auto& row : run.rows) {
        for (std::size_t k = 0; k < 4; ++k) {
            agg.mean.oracle_p[k] += row.summary.oracle_p[k];
            agg.mean.gt_p[k] += row.summary.gt_p[k];
        }
    }
    for (std::size_t k = 0; k < 4; ++k) {
        agg.mean.oracle_p[k] /= static_cast<double>(run.rows.size());
        agg.mean.gt_p[k] /= static_cast<double>(run.rows.size());
    }
    agg.gt_ordering_ok = true;
    for (std::size_t k = 0; k + 1 < 4; ++k) {
        if (agg.mean.gt_p[k] > agg.mean.gt_p[k + 1] + 1e-12) agg.gt_ordering_ok = false;
    }
    agg.gamma_monotone = true;
    for (std::size_t i = 0; i + 1 < run.rows.size(); ++i) {
        const double a = run.rows[i].gamma, b = run.rows[i + 1].gamma;
        if (gamma_non_increasing ? (b > a) : (b < a)) agg.gamma_monotone = false;
    }
    return agg;
}

// --- CSV io -----------------------------------------------------------------------

namespace {

constexpr const char* kTrajectoryHeader =
    "run_id,scenario,method,oracle_id,seed,q,t,gamma,ess,"
    "oracle_mean_p50,oracle_mean_p80,oracle_mean_p95,oracle_mean_p100,"
    "gt_mean_p50,gt_mean_p80,gt_mean_p95,gt_mean_p100";

std::string trajectory_csv(const RunTable& run, std::string_view scenario_name, bool with_kl) {
    std::ostringstream out;
    out << kTrajectoryHeader;
    if (with_kl) out << ",kl_target_search,kl_search_target";
    out << '\n';
    for (const auto& row : run.rows) {
        out << run.key.run_id << ',' << scenario_name << ',' << run.key.method << ','
            << run.key.oracle_id << ',' << run.key.seed << ',' << format_double(run.key.q) << ','
            << row.t << ',' << format_double(row.gamma) << ',' << format_double(row.ess);
        for (double v : row.summary.oracle_p) out << ',' << format_double(v);
        for (double v : row.summary.gt_p) out << ',' << format_double(v);
        if (with_kl) {
            out << ',' << format_double(row.kl_target_search.value_or(0.0)) << ','
                << format_double(row.kl_search_target.value_or(0.0));
        }
        out << '\n';
    }
    return out.str();
}

RunTable parse_trajectory_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trajectory CSV");
    const auto header = split_csv_line(line);
    const bool with_kl = header.size() == 19;
    if (header.size() != 17 && !with_kl) throw std::runtime_error("unexpected trajectory header");
    RunTable run;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw std::runtime_error("ragged trajectory CSV row");
        if (first) {
            run.key.run_id = f[0];
            run.key.method = f[2];
            run.key.oracle_id = f[3];
            run.key.seed = static_cast<std::uint64_t>(parse_double(f[4]));
            run.key.q = parse_double(f[5]);
            first = false;
        }
        TrajectoryRow row;
        row.t = static_cast<int>(parse_double(f[6]));
        row.gamma = parse_double(f[7]);
        row.ess = parse_double(f[8]);
        for (std::size_t k = 0; k < 4; ++k) {
            row.summary.oracle_p[k] = parse_double(f[9 + k]);
            row.summary.gt_p[k] = parse_double(f[13 + k]);
        }
        if (with_kl) {
            row.kl_target_search = parse_double(f[17]);
            row.kl_search_target = parse_double(f[18]);
        }
        run.rows.push_back(row);
    }
    if (run.rows.empty()) throw std::runtime_error("trajectory CSV has no rows");
    return run;
}

std::string aggregate_csv(const std::vector<CellAggregate>& cells, std::string_view scenario) {
    std::ostringstream out;
    out << "run_id,scenario,method,oracle_id,seed,q,iterations,gamma_final,"
           "gt_ordering_ok,gamma_monotone,"
           "oracle_p50_mean,oracle_p80_mean,oracle_p95_mean,oracle_p100_mean,"
           "gt_p50_mean,gt_p80_mean,gt_p95_mean,gt_p100_mean,"
           "gt_p50_final,gt_p80_final,gt_p95_final,gt_p100_final\n";
    for (const auto& c : cells) {
        out << c.key.run_id << ',' << scenario << ',' << c.key.method << ',' << c.key.oracle_id
            << ',' << c.key.seed << ',' << format_double(c.key.q) << ',' << c.iterations << ','
            << format_double(c.gamma_final) << ',' << (c.gt_ordering_ok ? 1 : 0) << ','
            << (c.gamma_monotone ? 1 : 0);
        for (double v : c.mean.oracle_p) out << ',' << format_double(v);
        for (double v : c.mean.gt_p) out << ',' << format_double(v);
        for (double v : c.final_row.gt_p) out << ',' << format_double(v);
        out << '\n';
    }
    return out.str();
}

// summary built purely from per-run aggregates (shared by run and report)
json build_summary(Scenario scenario, const ExperimentConfig& config,
                   const std::vector<CellAggregate>& cells, const json& static_summary) {
    json summary = static_summary;
    summary["scenario"] = std::string(to_string(scenario));

    json cells_j = json::array();
    bool all_gamma_monotone = true;
    for (const auto& c : cells) {
        all_gamma_monotone &= c.gamma_monotone;
        cells_j.push_back({{"run_id", c.key.run_id},
                           {"method", c.key.method},
                           {"oracle_id", c.key.oracle_id},
                           {"seed", c.key.seed},
                           {"q", c.key.q},
                           {"iterations", c.iterations},
                           {"gamma_final", c.gamma_final},
                           {"gt_ordering_ok", c.gt_ordering_ok},
                           {"gamma_monotone", c.gamma_monotone},
                           {"gt_p_mean", c.mean.gt_p},
                           {"oracle_p_mean", c.mean.oracle_p},
                           {"gt_p_final", c.final_row.gt_p}});
    }
    summary["cells"] = cells_j;
    summary["gamma_monotone_all"] = all_gamma_monotone;

    if (scenario == Scenario::sequence_design || scenario == Scenario::q_sweep) {
        std::map<std::string, std::vector<const CellAggregate*>> by_method;
        for (const auto& c : cells) by_method[c.key.method].push_back(&c);
        json methods_j;
        for (const auto& [name, list] : by_method) {
            std::array<double, 4> gt{};
            std::size_t ordering_ok = 0;
            for (const auto* c : list) {
                for (std::size_t k = 0; k < 4; ++k) gt[k] += c->mean.gt_p[k];
                ordering_ok += c->gt_ordering_ok ? 1 : 0;
            }
            for (double& v : gt) v /= static_cast<double>(list.size());
            methods_j[name] = {{"cells", list.size()},
                               {"ordering_ok_cells", ordering_ok},
                               {"gt_p_mean", gt},
                               {"gt_p80_mean", gt[1]},
                               {"inverted", gt[3] < gt[0]}};
        }
        summary["methods"] = methods_j;
        if (scenario == Scenario::sequence_design && methods_j.contains("cbas")) {
            const double cbas_g80 = methods_j["cbas"]["gt_p80_mean"].get<double>();
            json dominance;
            for (const char* rival : {"dbas", "rwr", "cem-pi"}) {
                if (methods_j.contains(rival)) {
                    dominance[rival] = cbas_g80 > methods_j[rival]["gt_p80_mean"].get<double>();
                }
            }
            summary["dominance"] = dominance;
            json inverted = json::array();
            for (const char* rival : {"dbas", "rwr", "cem-pi"}) {
                if (methods_j.contains(rival) && methods_j[rival]["inverted"].get<bool>()) {
                    inverted.push_back(rival);
                }
            }
            summary["inverted_prior_free_methods"] = inverted;
        }
        if (scenario == Scenario::q_sweep) {
            std::map<double, std::vector<double>> final_by_q;
            for (const auto& c : cells) final_by_q[c.key.q].push_back(c.final_row.gt_p[1]);
            json by_q;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& [qv, vals] : final_by_q) {
                const double mean =
                    std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
                by_q[format_double(qv)] = mean;
                lo = std::min(lo, mean);
                hi = std::max(hi, mean);
            }
            summary["final_gt_p80_by_q"] = by_q;
            summary["band_ratio"] = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
            summary["within_band"] = lo > 0.0 && (hi / lo - 1.0) <= config.q_band;
        }
    }
    return summary;
}

struct RunArtifact {
    RunKey key;
    std::string csv_name;
};

json manifest_json(const ExperimentConfig& config, const std::vector<RunArtifact>& runs,
                   const json& static_summary) {
    json runs_j = json::array();
    for (const auto& r : runs) {
        runs_j.push_back({{"run_id", r.key.run_id},
                          {"method", r.key.method},
                          {"oracle_id", r.key.oracle_id},
                          {"seed", r.key.seed},
                          {"q", r.key.q},
                          {"csv", r.csv_name}});
    }
    return json{{"scenario", std::string(to_string(config.scenario))},
                {"config", config.to_json()},
                {"runs", runs_j},
                {"static_summary", static_summary}};
}

std::uint64_t hash_artifacts(const fs::path& dir, const std::vector<RunArtifact>& runs) {
    std::uint64_t h = fnv1a("artifacts");
    for (const auto& r : runs) {
        h = splitmix64(h ^ fnv1a(read_file(dir / "runs" / r.csv_name)));
    }
    return h;
}

// produce aggregate.csv and summary.json from per-run CSVs (the aggregate is
// an exact function of the CSV text)
json finalize_outputs(const fs::path& dir, const ExperimentConfig& config,
                      const std::vector<RunArtifact>& runs, const json& static_summary) {
    std::vector<CellAggregate> cells;
    for (const auto& r : runs) {
        const RunTable table = parse_trajectory_csv(read_file(dir / "runs" / r.csv_name));
        cells.push_back(aggregate_run(table, config.scenario == Scenario::specification_1d));
    }
    write_file(dir / "aggregate.csv", aggregate_csv(cells, to_string(config.scenario)));
    json summary = build_summary(config.scenario, config, cells, static_summary);
    summary["artifact_hash"] = hash_artifacts(dir, runs);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    return summary;
}

}  // namespace

// --- scenario helpers -----------------------------------------------------------------

namespace {

struct OneDSetup {
    GroundTruth1D truth;
    Polynomial1dOracle oracle;
    DiagonalGaussianModel prior;
    double gamma_star = 0.0;
    double oracle_argmax_x = 0.0;
    GridDensity target;
    std::string oracle_id;
};

OneDSetup make_one_d_setup(const ExperimentConfig& config, const std::string& oracle_id) {
    const auto& od = config.one_d;
    GroundTruth1D truth{od.bump1.center, od.bump1.width, od.bump1.height,
                        od.bump2.center, od.bump2.width, od.bump2.height};
    const double window_hi =
        oracle_id == "partial"
            ? od.domain_lo + config.oracle.training_fraction * (od.domain_hi - od.domain_lo)
            : od.domain_hi;

    Rng rng(derive_seed(config.master_seed, {fnv1a("one-d-data"), fnv1a(oracle_id)}));
    std::vector<Sample1d> data(od.n_train);
    const double noise_sd = std::sqrt(config.oracle.noise_variance);
    for (auto& s : data) {
        s.x = od.domain_lo + (window_hi - od.domain_lo) * uniform_unit(rng);
        s.y = truth(s.x) + noise_sd * normal_unit(rng);
    }

    Oracle1dTrainingOptions opts;
    opts.degree = config.oracle.degree;
    opts.holdout_fraction = config.oracle.holdout_fraction;
    opts.basis = config.oracle.basis == "raw" ? PolynomialBasis::raw : PolynomialBasis::saturating;
    opts.saturating_scale_mult = config.oracle.saturating_scale_mult;
    Polynomial1dOracle oracle = train_oracle_1d(data, opts);

    std::vector<DesignPoint> xs;
    xs.reserve(data.size());
    for (const auto& s : data) xs.push_back(DesignPoint::scalar(s.x));
    std::vector<double> uniform(data.size(), 1.0);
    DiagonalGaussianModel prior =
        gaussian_fit_weighted(xs, uniform, config.model.variance_floor);

    // S = { y >= max of the oracle mean over the design domain }
    const UniformGrid grid{od.grid_lo, od.grid_hi, od.grid_points};
    double gamma_star = -std::numeric_limits<double>::infinity();
    double argmax_x = od.domain_lo;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.point(i);
        if (x < od.domain_lo || x > od.domain_hi) continue;
        const double m = oracle.mean_at(x);
        if (m > gamma_star) {
            gamma_star = m;
            argmax_x = x;
        }
    }

    GridDensity target = quadrature_conditional(
        [&](double x) { return prior.log_density(DesignPoint::scalar(x)); },
        [&](double x) { return oracle.log_survival(DesignPoint::scalar(x), gamma_star); }, grid);

    return OneDSetup{truth, std::move(oracle), std::move(prior),
                     gamma_star, argmax_x,     std::move(target), oracle_id};
}

double reverse_kl_on_grid(const GridDensity& target, const GenerativeModel& q) {
    // KL(q || target) by trapezoid; the target's log form keeps this finite
    std::vector<double> integrand(target.grid.n);
    for (std::size_t i = 0; i < target.grid.n; ++i) {
        const double lq = q.log_density(DesignPoint::scalar(target.grid.point(i)));
        const double qd = std::exp(lq);
        integrand[i] = qd == 0.0 ? 0.0 : qd * (lq - target.log_density[i]);
    }
    return trapezoid(integrand, target.grid.step());
}

std::string run_file_name(const RunKey& key) { return key.run_id + ".csv"; }

std::string make_run_id(std::string_view scenario, std::string_view method,
                        std::string_view oracle_id, double q, std::uint64_t seed) {
    std::ostringstream id;
    id << scenario << '_' << method << '_' << oracle_id << "_q" << format_double(q) << "_s" << seed;
    return id.str();
}

struct SequenceSetup {
    GroundTruthSequence landscape;
    std::vector<SequenceSample> training;
    ProductCategoricalModel prior;
};

SequenceSetup make_sequence_setup(const ExperimentConfig& config) {
    GroundTruthSequence::Params lp;
    lp.length = config.sequence.length;
    lp.alphabet = config.sequence.alphabet;
    lp.seed = config.sequence.landscape_seed;
    lp.site_sd = config.sequence.site_sd;
    lp.coupling_strength = config.sequence.coupling_strength;
    lp.coupling_correlation = config.sequence.coupling_correlation;
    lp.coupling_threshold_sds = config.sequence.coupling_threshold_sds;
    lp.pairwise_noise_sd = config.sequence.pairwise_noise_sd;
    lp.mutation_rate = config.sequence.mutation_rate;
    lp.offset = config.sequence.offset;
    GroundTruthSequence landscape(lp);

    Rng rng(derive_seed(config.master_seed, {fnv1a("sequence-data")}));
    auto training = truncated_training_set(landscape, config.sequence.pool,
                                           config.oracle.training_percentile,
                                           config.sequence.train_count, config.oracle.noise_sd, rng);

    std::vector<DesignPoint> points;
    points.reserve(training.size());
    for (const auto& s : training) points.push_back(DesignPoint::sequence(s.sequence));
    std::vector<double> uniform(training.size(), 1.0);
    ProductCategoricalModel prior =
        categorical_fit_weighted(points, uniform, config.model.prior_smoothing,
                                 config.sequence.alphabet, config.model.search_smoothing);
    return SequenceSetup{std::move(landscape), std::move(training), std::move(prior)};
}

RunTable record_sequence_run(const RunKey& key, const RunResult& result,
                             const GroundTruthSequence& landscape) {
    RunTable table;
    table.key = key;
    for (const auto& rec : result.records) {
        std::vector<double> gt(rec.batch.size());
        for (std::size_t i = 0; i < rec.batch.size(); ++i) {
            gt[i] = landscape.value(rec.batch.points[i]);
        }
        TrajectoryRow row;
        row.t = rec.t;
        row.gamma = rec.gamma;
        row.ess = rec.ess;
        row.summary = percentile_summary(rec.oracle_means, gt);
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace

// --- scenarios --------------------------------------------------------------------------

namespace {

ScenarioResult run_illustrative_1d(const ExperimentConfig& config, const fs::path& dir) {
    json static_summary;
    std::vector<RunArtifact> artifacts;
    const UniformGrid grid{config.one_d.grid_lo, config.one_d.grid_hi, config.one_d.grid_points};
    const double true_argmax = [&] {
        double best_x = grid.point(0);
        double best = -std::numeric_limits<double>::infinity();
        GroundTruth1D f{config.one_d.bump1.center, config.one_d.bump1.width,
                        config.one_d.bump1.height, config.one_d.bump2.center,
                        config.one_d.bump2.width, config.one_d.bump2.height};
        for (std::size_t i = 0; i < grid.n; ++i) {
            if (f(grid.point(i)) > best) {
                best = f(grid.point(i));
                best_x = grid.point(i);
            }
        }
        return best_x;
    }();
    static_summary["true_argmax_x"] = true_argmax;

    for (const std::string oracle_id : {"partial", "full"}) {
        const auto t0 = std::chrono::steady_clock::now();
        OneDSetup setup = make_one_d_setup(config, oracle_id);

        // per-oracle grid artifacts
        {
            std::ostringstream grids;
            grids << "x,ground_truth,oracle_mean,oracle_sd,prior_density,target_density\n";
            for (std::size_t i = 0; i < grid.n; ++i) {
                const double x = grid.point(i);
                grids << format_double(x) << ',' << format_double(setup.truth(x)) << ','
                      << format_double(setup.oracle.mean_at(x)) << ','
                      << format_double(std::sqrt(setup.oracle.sigma2())) << ','
                      << format_double(
                             std::exp(setup.prior.log_density(DesignPoint::scalar(x))))
                      << ',' << format_double(setup.target.density[i]) << '\n';
            }
            write_file(dir / ("grids_" + oracle_id + ".csv"), grids.str());
            std::ostringstream target;
            write_density_csv(target, setup.target);
            write_file(dir / ("target_" + oracle_id + ".csv"), target.str());
        }

        CbASConfig engine;
        engine.q = config.q;
        engine.samples_per_iteration = config.samples_per_iteration;
        engine.max_iterations = config.max_iterations;
        engine.weight_floor_ess = config.weight_floor_ess;
        engine.refit_inertia = config.model.refit_inertia;

        const DesideratumEvent event =
            DesideratumEvent::maximize(-std::numeric_limits<double>::infinity());

        json runs_kl = json::array();
        for (std::uint64_t seed : config.seeds) {
            Rng rng(derive_seed(config.master_seed, {fnv1a("cbas"), fnv1a(oracle_id), seed}));
            const RunResult result = run_cbas(setup.prior, setup.oracle, event, engine, rng);

            RunKey key{make_run_id(to_string(config.scenario), "cbas", oracle_id, config.q, seed),
                       "cbas", oracle_id, seed, config.q};
            RunTable table;
            table.key = key;
            std::ostringstream kl_csv, params_csv;
            kl_csv << "t,kl_target_search,kl_search_target\n";
            params_csv << "t,mean,sd\n";
            for (const auto& rec : result.records) {
                std::vector<double> gt(rec.batch.size());
                for (std::size_t i = 0; i < rec.batch.size(); ++i) {
                    gt[i] = setup.truth(rec.batch.points[i].continuous_values()[0]);
                }
                TrajectoryRow row;
                row.t = rec.t;
                row.gamma = rec.gamma;
                row.ess = rec.ess;
                row.summary = percentile_summary(rec.oracle_means, gt);
                const auto& model = *rec.sampling_model;
                row.kl_target_search = kl_grid(setup.target, [&](double x) {
                    return model.log_density(DesignPoint::scalar(x));
                });
                row.kl_search_target = reverse_kl_on_grid(setup.target, model);
                table.rows.push_back(row);
                kl_csv << rec.t << ',' << format_double(*row.kl_target_search) << ','
                       << format_double(*row.kl_search_target) << '\n';
                const auto& g = dynamic_cast<const DiagonalGaussianModel&>(model);
                params_csv << rec.t << ',' << format_double(g.mean()[0]) << ','
                           << format_double(std::sqrt(g.variance()[0])) << '\n';
            }
            {
                const auto& g = dynamic_cast<const DiagonalGaussianModel&>(*result.final_model);
                params_csv << result.records.size() + 1 << ',' << format_double(g.mean()[0]) << ','
                           << format_double(std::sqrt(g.variance()[0])) << '\n';
            }
            write_file(dir / "runs" / run_file_name(key),
                       trajectory_csv(table, to_string(config.scenario), true));
            write_file(dir / ("kl_" + oracle_id + "_s" + std::to_string(seed) + ".csv"),
                       kl_csv.str());
            write_file(dir / ("search_params_" + oracle_id + "_s" + std::to_string(seed) + ".csv"),
                       params_csv.str());
            artifacts.push_back({key, run_file_name(key)});

            json models = {{"prior", model_to_json(setup.prior)},
                           {"final", model_to_json(*result.final_model)},
                           {"oracle", oracle_to_json(setup.oracle)}};
            write_file(dir / ("models_" + oracle_id + "_s" + std::to_string(seed) + ".json"),
                       models.dump(2) + "\n");

            runs_kl.push_back({{"seed", seed},
                               {"kl_first", *table.rows.front().kl_target_search},
                               {"kl_final", *table.rows.back().kl_target_search},
                               {"stop_reason", std::string(to_string(result.stop_reason))}});
        }

        const std::size_t mode_idx = grid_argmax(setup.target);
        const double mode_x = setup.target.grid.point(mode_idx);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        static_summary["oracles"][oracle_id] = {
            {"sigma2", setup.oracle.sigma2()},
            {"gamma_star", setup.gamma_star},
            {"oracle_argmax_x", setup.oracle_argmax_x},
            {"target_mode_x", mode_x},
            {"truth_at_mode", setup.truth(mode_x)},
            {"truth_at_oracle_argmax", setup.truth(setup.oracle_argmax_x)},
            {"runs", runs_kl},
            {"elapsed_seconds", elapsed}};
    }

    write_file(dir / "manifest.json",
               manifest_json(config, artifacts, static_summary).dump(2) + "\n");
    json summary = finalize_outputs(dir, config, artifacts, static_summary);
    return ScenarioResult{summary, dir};
}

ScenarioResult run_sequence_like(const ExperimentConfig& config, const fs::path& dir) {
    SequenceSetup setup = make_sequence_setup(config);

    std::vector<DesignPoint> pool_points;
    pool_points.reserve(setup.training.size());
    for (const auto& s : setup.training) pool_points.push_back(DesignPoint::sequence(s.sequence));

    json static_summary;
    static_summary["landscape"] = {{"wild_type", setup.landscape.wild_type()},
                                   {"coupling_threshold", setup.landscape.coupling_threshold()}};

    std::vector<RunArtifact> artifacts;
    bool budget_exact = true;

    const bool is_sweep = config.scenario == Scenario::q_sweep;
    const std::vector<double> qs = is_sweep ? config.q_sweep : std::vector<double>{config.q};
    const std::vector<Method> methods =
        is_sweep ? std::vector<Method>{Method::cbas} : config.methods;

    for (std::size_t ensemble_size : config.oracle.ensemble_sizes) {
        const std::string oracle_id = "ens" + std::to_string(ensemble_size);
        Rng oracle_rng(
            derive_seed(config.master_seed, {fnv1a("sequence-oracle"), ensemble_size}));
        const EnsembleOracle oracle =
            train_sequence_oracle(setup.training, ensemble_size, oracle_rng,
                                  config.sequence.alphabet);
        const double fb_threshold = fb_threshold_from_pool(
            pool_points, oracle, config.baselines.fb_threshold_percentile);

        for (double qv : qs) {
            for (Method method : methods) {
                for (std::uint64_t seed : config.seeds) {
                    BaselineParams params;
                    params.rwr_alpha = config.baselines.rwr_alpha;
                    params.cem_quantile = config.baselines.cem_quantile;
                    params.alphabet = config.sequence.alphabet;
                    if (method == Method::fb) {
                        params.fb_pool = pool_points;
                        params.fb_threshold = fb_threshold;
                        params.fb_smoothing = config.model.prior_smoothing;
                    }
                    auto policy = make_policy(method, std::move(params));

                    CbASConfig engine;
                    engine.q = qv;
                    engine.samples_per_iteration = config.samples_per_iteration;
                    engine.max_iterations = config.max_iterations;
                    engine.sequence_budget = config.sequence_budget;
                    engine.weight_floor_ess = config.weight_floor_ess;
                    engine.refit_inertia = config.model.refit_inertia;

                    Rng rng(derive_seed(config.master_seed,
                                        {fnv1a(to_string(method)), fnv1a(oracle_id), seed,
                                         std::bit_cast<std::uint64_t>(qv)}));
                    const PropertyOracle* optr = &oracle;
                    const RunResult result = run_adaptive_search(
                        setup.prior, std::span<const PropertyOracle* const>(&optr, 1),
                        DesideratumEvent::maximize(-std::numeric_limits<double>::infinity()),
                        engine, *policy, rng);

                    budget_exact &= result.records.size() * config.samples_per_iteration ==
                                    config.sequence_budget;

                    RunKey key{make_run_id(to_string(config.scenario), to_string(method),
                                           oracle_id, qv, seed),
                               std::string(to_string(method)), oracle_id, seed, qv};
                    const RunTable table = record_sequence_run(key, result, setup.landscape);
                    write_file(dir / "runs" / run_file_name(key),
                               trajectory_csv(table, to_string(config.scenario), false));
                    artifacts.push_back({key, run_file_name(key)});
                }
            }
        }
    }
    static_summary["budget_exact"] = budget_exact;
    write_file(dir / "manifest.json",
               manifest_json(config, artifacts, static_summary).dump(2) + "\n");
    json summary = finalize_outputs(dir, config, artifacts, static_summary);
    return ScenarioResult{summary, dir};
}

ScenarioResult run_specification_1d(const ExperimentConfig& config, const fs::path& dir) {
    OneDSetup setup = make_one_d_setup(config, "full");
    const double y0 = setup.oracle.mean_at(config.specification.anchor_x);

    CbASConfig engine;
    engine.q = config.specification.q;
    engine.samples_per_iteration = config.samples_per_iteration;
    engine.max_iterations = config.specification.iterations;
    engine.weight_floor_ess = config.weight_floor_ess;
    engine.refit_inertia = config.model.refit_inertia;

    const DesideratumEvent event =
        DesideratumEvent::specify(y0, std::numeric_limits<double>::infinity());

    json static_summary;
    static_summary["y0"] = y0;
    static_summary["anchor_x"] = config.specification.anchor_x;

    std::vector<RunArtifact> artifacts;
    json per_run = json::array();
    for (std::uint64_t seed : config.seeds) {
        Rng rng(derive_seed(config.master_seed, {fnv1a("specification"), seed}));
        const RunResult result = run_cbas(setup.prior, setup.oracle, event, engine, rng);

        RunKey key{make_run_id(to_string(config.scenario), "cbas", "full", engine.q, seed),
                   "cbas", "full", seed, engine.q};
        RunTable table;
        table.key = key;
        for (const auto& rec : result.records) {
            std::vector<double> gt(rec.batch.size());
            for (std::size_t i = 0; i < rec.batch.size(); ++i) {
                gt[i] = setup.truth(rec.batch.points[i].continuous_values()[0]);
            }
            TrajectoryRow row;
            row.t = rec.t;
            row.gamma = rec.gamma;
            row.ess = rec.ess;
            row.summary = percentile_summary(rec.oracle_means, gt);
            table.rows.push_back(row);
        }
        write_file(dir / "runs" / run_file_name(key),
                   trajectory_csv(table, to_string(config.scenario), false));
        artifacts.push_back({key, run_file_name(key)});

        const auto& last = result.records.back();
        const double gamma_final = last.gamma;
        std::size_t within = 0;
        std::ostringstream final_csv;
        final_csv << "x,oracle_mean,within_final_interval\n";
        for (std::size_t i = 0; i < last.batch.size(); ++i) {
            const bool ok = std::abs(last.oracle_means[i] - y0) <= gamma_final;
            within += ok ? 1 : 0;
            final_csv << format_double(last.batch.points[i].continuous_values()[0]) << ','
                      << format_double(last.oracle_means[i]) << ',' << (ok ? 1 : 0) << '\n';
        }
        write_file(dir / ("final_batch_s" + std::to_string(seed) + ".csv"), final_csv.str());
        per_run.push_back(
            {{"seed", seed},
             {"gamma_final", gamma_final},
             {"within_final_fraction",
              static_cast<double>(within) / static_cast<double>(last.batch.size())}});
    }
    static_summary["runs"] = per_run;
    write_file(dir / "manifest.json",
               manifest_json(config, artifacts, static_summary).dump(2) + "\n");
    json summary = finalize_outputs(dir, config, artifacts, static_summary);
    return ScenarioResult{summary, dir};
}

}  // namespace

ScenarioResult run_scenario(const ExperimentConfig& config) {
    config.validate();
    const fs::path dir(config.out_dir);
    fs::create_directories(dir / "runs");
    write_file(dir / "config.json", config.to_json().dump(2) + "\n");

    switch (config.scenario) {
        case Scenario::illustrative_1d: return run_illustrative_1d(config, dir);
        case Scenario::sequence_design:
        case Scenario::q_sweep: return run_sequence_like(config, dir);
        case Scenario::specification_1d: return run_specification_1d(config, dir);
    }
    throw ConfigError("unknown scenario");
}

json report(const fs::path& dir) {
    const json manifest = json::parse(read_file(dir / "manifest.json"));
    const ExperimentConfig config = ExperimentConfig::from_json(manifest.at("config"));
    std::vector<RunArtifact> runs;
    for (const auto& r : manifest.at("runs")) {
        RunKey key{r.at("run_id").get<std::string>(), r.at("method").get<std::string>(),
                   r.at("oracle_id").get<std::string>(), r.at("seed").get<std::uint64_t>(),
                   r.at("q").get<double>()};
        runs.push_back({key, r.at("csv").get<std::string>()});
    }
    return finalize_outputs(dir, config, runs, manifest.at("static_summary"));
}

}  // namespace cbas
