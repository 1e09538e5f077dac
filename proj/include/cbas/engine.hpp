#pragma once

#include "cbas/core.hpp"

#include <optional>

namespace cbas {

struct CbASConfig {
    double q = 1.0;                        // relaxation quantile, in (0,1]
    std::size_t samples_per_iteration = 100;
    std::size_t max_iterations = 50;
    std::optional<std::size_t> sequence_budget;  // total-sample cap across the run
    double weight_floor_ess = 1.0;         // below this the run stops as collapsed
    double refit_inertia = 0.0;            // fraction of previous parameters kept per refit

    void validate() const;
};

struct IterationRecord {
    int t = 0;  // 1-based
    SampleBatch batch;
    std::vector<double> oracle_means;  // primary oracle, one per sample
    DesideratumEvent event_state = DesideratumEvent::maximize(0.0);  // relaxed S^(t)
    double gamma = 0.0;                // primary leaf threshold after relaxation
    std::vector<double> weights;
    double ess = 0.0;                  // (sum w)^2 / sum w^2, 0 when all weights vanish
    std::shared_ptr<const GenerativeModel> sampling_model;  // q(.|phi^(t))
    std::optional<double> kl_to_target;  // filled by the benchmark layer when computable
};

enum class StopReason { max_iterations, budget_exhausted, collapsed };
std::string_view to_string(StopReason reason);

struct RunResult {
    std::vector<IterationRecord> records;
    std::shared_ptr<const GenerativeModel> final_model;
    StopReason stop_reason = StopReason::max_iterations;
};

// per-iteration view handed to weighting policies
struct BatchContext {
    const SampleBatch& batch;
    std::span<const double> oracle_means;          // primary oracle
    const DesideratumEvent& event;                 // relaxed S^(t)
    const GenerativeModel& prior;
    const GenerativeModel& search;
    std::span<const PropertyOracle* const> oracles;
    int iteration;
};

// Method-specific weighting (and, for pool-based methods, refitting).
class IterationPolicy {
public:
    virtual ~IterationPolicy() = default;
    virtual std::vector<double> weights(const BatchContext& ctx) = 0;
    // default refit: weighted ML on the batch, warm-started from the search model
    virtual std::unique_ptr<GenerativeModel> refit(const BatchContext& ctx,
                                                   std::span<const double> weights);
    // pool-based methods treat an all-zero weight vector as an identity step
    virtual bool zero_weights_are_valid() const { return false; }
};

// ---------------------------------------------------------------------------
// CbAS weights
// ---------------------------------------------------------------------------

// log P(S | x): survival for Maximize leaves, interval mass for Specify
// leaves, and the product over leaves for conjunctions (independent oracles)
double event_log_probability(const DesideratumEvent& event,
                             std::span<const PropertyOracle* const> oracles, const DesignPoint& x);

// p(x|theta0)/q(x|phi) * P(S|x), evaluated in log space
double cbas_weight(const GenerativeModel& prior, const GenerativeModel& search,
                   const DesignPoint& x, const DesideratumEvent& event,
                   std::span<const PropertyOracle* const> oracles);

// joint-sample variant for latent models sharing the latent prior:
// p(x|z,theta0)/q(x|z,phi) * P(S|x)
double cbas_weight_joint(const GenerativeModel& prior, const GenerativeModel& search,
                         const DesignPoint& x, std::span<const double> z,
                         const DesideratumEvent& event,
                         std::span<const PropertyOracle* const> oracles);

class CbasPolicy final : public IterationPolicy {
public:
    std::vector<double> weights(const BatchContext& ctx) override;
};

// ---------------------------------------------------------------------------
// The adaptive search loop
// ---------------------------------------------------------------------------

// Iterate: sample M points from the search model, score them with the primary
// oracle's predictive mean, tighten the relaxed event at the configured
// quantile (monotone), compute policy weights, refit. Stops on the iteration
// cap, the sequence budget, or weight collapse.
RunResult run_adaptive_search(const GenerativeModel& prior,
                              std::span<const PropertyOracle* const> oracles,
                              const DesideratumEvent& event_template, const CbASConfig& config,
                              IterationPolicy& policy, Rng& rng);

// the flagship method: run_adaptive_search with CbAS weights
RunResult run_cbas(const GenerativeModel& prior, std::span<const PropertyOracle* const> oracles,
                   const DesideratumEvent& event_template, const CbASConfig& config, Rng& rng);

// single-oracle conveniences
RunResult run_cbas(const GenerativeModel& prior, const PropertyOracle& oracle,
                   const DesideratumEvent& event_template, const CbASConfig& config, Rng& rng);

double effective_sample_size(std::span<const double> weights);

}  // namespace cbas
