#pragma once

#include "cbas/engine.hpp"

namespace cbas {

enum class Method { cbas, dbas, rwr, cem_pi, fb };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// Weight rules
// ---------------------------------------------------------------------------

// w(x) = P(S^(t) | x): no density ratio
double dbas_weight(const DesignPoint& x, const DesideratumEvent& event,
                   std::span<const PropertyOracle* const> oracles);

// softmax of alpha * predictive means, stabilized; sums to 1
std::vector<double> rwr_weights(std::span<const double> oracle_means, double alpha);

// elite indicator on the probability of improvement over y_best at the given
// quantile: w_i = 1{ PI_i >= nearest-rank percentile of PI }
std::vector<double> cem_pi_weights(const SampleBatch& batch, const PropertyOracle& oracle,
                                   double y_best, double cem_quantile);

// FIFO pool update: samples whose oracle mean exceeds the fixed threshold
// replace the oldest pool entries; the generator refits on the pool with
// uniform weights
struct FbStepResult {
    std::vector<DesignPoint> pool;
    std::unique_ptr<GenerativeModel> model;  // nullptr when nothing was admitted
    std::size_t admitted = 0;
};
FbStepResult fb_feedback_step(std::vector<DesignPoint> pool, const SampleBatch& new_samples,
                              const PropertyOracle& oracle, double threshold, double smoothing,
                              std::size_t alphabet);

// the fixed admission threshold: nearest-rank percentile of the oracle means
// of the initial training pool
double fb_threshold_from_pool(std::span<const DesignPoint> pool, const PropertyOracle& oracle,
                              double percentile = 0.8);

// ---------------------------------------------------------------------------
// Policies plugging the rules into the engine loop
// ---------------------------------------------------------------------------

class DbasPolicy final : public IterationPolicy {
public:
    std::vector<double> weights(const BatchContext& ctx) override;
};

class RwrPolicy final : public IterationPolicy {
public:
    explicit RwrPolicy(double alpha = 50.0) : alpha_(alpha) {}
    std::vector<double> weights(const BatchContext& ctx) override;

private:
    double alpha_;
};

class CemPiPolicy final : public IterationPolicy {
public:
    explicit CemPiPolicy(double cem_quantile = 0.8) : quantile_(cem_quantile) {}
    std::vector<double> weights(const BatchContext& ctx) override;
    double y_best() const { return y_best_; }

private:
    double quantile_;
    double y_best_ = -std::numeric_limits<double>::infinity();
};

class FbPolicy final : public IterationPolicy {
public:
    FbPolicy(std::vector<DesignPoint> initial_pool, double threshold, double smoothing,
             std::size_t alphabet);
    std::vector<double> weights(const BatchContext& ctx) override;
    std::unique_ptr<GenerativeModel> refit(const BatchContext& ctx,
                                           std::span<const double> weights) override;
    bool zero_weights_are_valid() const override { return true; }
    const std::vector<DesignPoint>& pool() const { return pool_; }
    double threshold() const { return threshold_; }

private:
    std::vector<DesignPoint> pool_;
    double threshold_;
    double smoothing_;
    std::size_t alphabet_;
};

struct BaselineParams {
    double rwr_alpha = 50.0;
    double cem_quantile = 0.8;
    // fb
    std::vector<DesignPoint> fb_pool;
    double fb_threshold = 0.0;
    double fb_smoothing = 0.1;
    std::size_t alphabet = 0;
};

std::unique_ptr<IterationPolicy> make_policy(Method method, BaselineParams params = {});

}  // namespace cbas
