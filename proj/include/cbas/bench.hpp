#pragma once

#include "cbas/baselines.hpp"
#include "cbas/core.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>

namespace cbas {

// ---------------------------------------------------------------------------
// Experiment configuration; every field has a default that reproduces the
// desk-scale benchmark settings. Unknown keys in config files are rejected.
// ---------------------------------------------------------------------------

enum class Scenario { illustrative_1d, sequence_design, q_sweep, specification_1d };
std::string_view to_string(Scenario scenario);
Scenario scenario_from_string(std::string_view name);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Bump {
    double center = 0.0;
    double width = 1.0;
    double height = 1.0;
};

struct OneDConfig {
    double domain_lo = -3.0;
    double domain_hi = 6.0;
    Bump bump1{-1.5, 0.6, 0.25};
    Bump bump2{2.0, 1.0, 1.0};
    std::size_t n_train = 320;
    double grid_lo = -9.0;
    double grid_hi = 12.0;
    std::size_t grid_points = 4201;
};

struct SequenceConfig {
    std::size_t length = 20;
    std::size_t alphabet = 20;
    std::size_t pool = 25000;
    std::size_t train_count = 1000;
    std::uint64_t landscape_seed = 3;
    double site_sd = 1.0;
    double coupling_strength = 8.0;
    double coupling_correlation = 0.6;
    double coupling_threshold_sds = 3.0;
    double pairwise_noise_sd = 0.05;
    double mutation_rate = 0.15;
    double offset = 30.0;
};

struct OracleConfig {
    // 1d regression oracle
    int degree = 3;
    double holdout_fraction = 0.2;
    std::string basis = "saturating";  // scenario default; train_oracle_1d itself defaults to raw
    double saturating_scale_mult = 2.0;
    double training_fraction = 0.5;  // partial-domain share of the design domain
    double noise_variance = 0.05;    // 1d label noise variance
    // sequence oracle
    std::vector<std::size_t> ensemble_sizes = {1, 5, 20};
    double noise_sd = 1.0;            // sequence label noise
    double training_percentile = 0.2;
};

struct ModelConfig {
    double variance_floor = 1e-6;
    double prior_smoothing = 0.1;
    double search_smoothing = 0.0;
    double refit_inertia = 0.0;
};

struct BaselineConfig {
    double rwr_alpha = 50.0;
    double cem_quantile = 0.8;
    double fb_threshold_percentile = 0.8;
};

struct SpecificationConfig {
    double anchor_x = 1.0;  // y0 = full-domain oracle mean here
    double q = 0.9;
    std::size_t iterations = 30;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::illustrative_1d;
    std::vector<Method> methods = {Method::cbas, Method::dbas, Method::rwr, Method::cem_pi,
                                   Method::fb};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::uint64_t master_seed = 20240801;
    double q = 1.0;
    std::size_t samples_per_iteration = 100;
    std::size_t max_iterations = 50;
    std::size_t sequence_budget = 10000;
    std::vector<double> q_sweep = {0.5, 0.75, 1.0};
    double q_band = 0.15;  // relative agreement band for the q sweep
    std::string out_dir = "out";
    double weight_floor_ess = 1.0;

    OneDConfig one_d;
    SequenceConfig sequence;
    OracleConfig oracle;
    ModelConfig model;
    BaselineConfig baselines;
    SpecificationConfig specification;

    static ExperimentConfig defaults(Scenario scenario);
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void validate() const;
};

// ---------------------------------------------------------------------------
// Percentile summaries (trajectory rows and aggregates)
// ---------------------------------------------------------------------------

inline constexpr std::array<double, 4> kSummaryPercentiles{0.5, 0.8, 0.95, 1.0};

struct PercentileSummaryRow {
    std::array<double, 4> oracle_p{};  // nearest-rank cuts of the oracle means
    std::array<double, 4> gt_p{};      // mean ground truth of samples at/above each cut
};

PercentileSummaryRow percentile_summary(std::span<const double> oracle_means,
                                        std::span<const double> ground_truth);

struct TrajectoryRow {
    int t = 0;
    double gamma = 0.0;
    double ess = 0.0;
    PercentileSummaryRow summary;
    std::optional<double> kl_target_search;
    std::optional<double> kl_search_target;
};

struct RunKey {
    std::string run_id;
    std::string method;
    std::string oracle_id;
    std::uint64_t seed = 0;
    double q = 1.0;
};

struct RunTable {
    RunKey key;
    std::vector<TrajectoryRow> rows;
};

struct CellAggregate {
    RunKey key;
    std::size_t iterations = 0;
    double gamma_final = 0.0;
    PercentileSummaryRow mean;        // per-column means over iterations
    PercentileSummaryRow final_row;   // last iteration
    bool gt_ordering_ok = false;      // mean gt non-decreasing in oracle percentile
    bool gamma_monotone = false;
};

CellAggregate aggregate_run(const RunTable& run, bool gamma_non_increasing);

// ---------------------------------------------------------------------------
// Scenario runners and reporting
// ---------------------------------------------------------------------------

struct ScenarioResult {
    nlohmann::json summary;
    std::filesystem::path out_dir;
};

// runs the configured scenario, writes all artifacts under config.out_dir,
// and returns the summary (also written as summary.json)
ScenarioResult run_scenario(const ExperimentConfig& config);

// recompute aggregate.csv and summary.json from the per-run CSVs in `dir`
nlohmann::json report(const std::filesystem::path& dir);

// shortest round-trip decimal form; used for all CSV numbers
std::string format_double(double v);

}  // namespace cbas
