#include "cbas/baselines.hpp"

#include "cbas/models.hpp"

#include <algorithm>
#include <cmath>

namespace cbas {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::cbas: return "cbas";
        case Method::dbas: return "dbas";
        case Method::rwr: return "rwr";
        case Method::cem_pi: return "cem-pi";
        case Method::fb: return "fb";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    if (name == "cbas") return Method::cbas;
    if (name == "dbas") return Method::dbas;
    if (name == "rwr") return Method::rwr;
    if (name == "cem-pi") return Method::cem_pi;
    if (name == "fb") return Method::fb;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

double dbas_weight(const DesignPoint& x, const DesideratumEvent& event,
                   std::span<const PropertyOracle* const> oracles) {
    const double log_p = event_log_probability(event, oracles, x);
    return log_p == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(log_p);
}

std::vector<double> rwr_weights(std::span<const double> oracle_means, double alpha) {
    if (oracle_means.empty()) throw std::invalid_argument("rwr_weights: no scores");
    if (!(alpha > 0.0)) throw std::invalid_argument("rwr_weights: alpha must be > 0");
    const double top = *std::max_element(oracle_means.begin(), oracle_means.end());
    std::vector<double> w(oracle_means.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!std::isfinite(oracle_means[i])) throw std::invalid_argument("rwr_weights: bad score");
        w[i] = std::exp(alpha * (oracle_means[i] - top));
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

std::vector<double> cem_pi_weights(const SampleBatch& batch, const PropertyOracle& oracle,
                                   double y_best, double cem_quantile) {
    std::vector<double> pi(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        pi[i] = y_best == -std::numeric_limits<double>::infinity()
                    ? 1.0
                    : oracle.survival(batch.points[i], y_best);
    }
    const double beta = nearest_rank_percentile(pi, cem_quantile);
    std::vector<double> w(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) w[i] = pi[i] >= beta ? 1.0 : 0.0;
    return w;
}

FbStepResult fb_feedback_step(std::vector<DesignPoint> pool, const SampleBatch& new_samples,
                              const PropertyOracle& oracle, double threshold, double smoothing,
                              std::size_t alphabet) {
    std::vector<const DesignPoint*> admitted;
    for (const auto& x : new_samples.points) {
        if (oracle.predictive_mean(x) > threshold) admitted.push_back(&x);
    }
    FbStepResult result;
    result.admitted = admitted.size();
    if (admitted.empty()) {
        result.pool = std::move(pool);
        return result;  // identity step
    }
    const std::size_t n = std::min(admitted.size(), pool.size());
    pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t i = admitted.size() - n; i < admitted.size(); ++i) {
        pool.push_back(*admitted[i]);
    }
    std::vector<double> uniform(pool.size(), 1.0);
    result.model = std::make_unique<ProductCategoricalModel>(
        categorical_fit_weighted(pool, uniform, smoothing, alphabet));
    result.pool = std::move(pool);
    return result;
}

double fb_threshold_from_pool(std::span<const DesignPoint> pool, const PropertyOracle& oracle,
                              double percentile) {
    std::vector<double> scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) scores[i] = oracle.predictive_mean(pool[i]);
    return nearest_rank_percentile(scores, percentile);
}

// --- policies ---------------------------------------------------------------------

std::vector<double> DbasPolicy::weights(const BatchContext& ctx) {
    std::vector<double> out(ctx.batch.size());
    for (std::size_t i = 0; i < ctx.batch.size(); ++i) {
        out[i] = dbas_weight(ctx.batch.points[i], ctx.event, ctx.oracles);
    }
    return out;
}

std::vector<double> RwrPolicy::weights(const BatchContext& ctx) {
    return rwr_weights(ctx.oracle_means, alpha_);
}

std::vector<double> CemPiPolicy::weights(const BatchContext& ctx) {
    auto w = cem_pi_weights(ctx.batch, *ctx.oracles.front(), y_best_, quantile_);
    // y_best becomes the best oracle mean observed so far, including this batch
    for (double m : ctx.oracle_means) y_best_ = std::max(y_best_, m);
    return w;
}

FbPolicy::FbPolicy(std::vector<DesignPoint> initial_pool, double threshold, double smoothing,
                   std::size_t alphabet)
    : pool_(std::move(initial_pool)), threshold_(threshold), smoothing_(smoothing),
      alphabet_(alphabet) {
    if (pool_.empty()) throw std::invalid_argument("FbPolicy: empty initial pool");
}

std::vector<double> FbPolicy::weights(const BatchContext& ctx) {
    std::vector<double> w(ctx.batch.size());
    for (std::size_t i = 0; i < ctx.batch.size(); ++i) {
        w[i] = ctx.oracles.front()->predictive_mean(ctx.batch.points[i]) > threshold_ ? 1.0 : 0.0;
    }
    return w;
}

std::unique_ptr<GenerativeModel> FbPolicy::refit(const BatchContext& ctx,
                                                 std::span<const double>) {
    auto step = fb_feedback_step(std::move(pool_), ctx.batch, *ctx.oracles.front(), threshold_,
                                 smoothing_, alphabet_);
    pool_ = std::move(step.pool);
    if (step.model == nullptr) return ctx.search.clone();  // nothing admitted
    return std::move(step.model);
}

std::unique_ptr<IterationPolicy> make_policy(Method method, BaselineParams params) {
    switch (method) {
        case Method::cbas: return std::make_unique<CbasPolicy>();
        case Method::dbas: return std::make_unique<DbasPolicy>();
        case Method::rwr: return std::make_unique<RwrPolicy>(params.rwr_alpha);
        case Method::cem_pi: return std::make_unique<CemPiPolicy>(params.cem_quantile);
        case Method::fb:
            return std::make_unique<FbPolicy>(std::move(params.fb_pool), params.fb_threshold,
                                              params.fb_smoothing, params.alphabet);
    }
    throw std::invalid_argument("make_policy: unknown method");
}

}  // namespace cbas
