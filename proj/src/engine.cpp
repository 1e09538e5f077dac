#include "cbas/engine.hpp"

#include "cbas/models.hpp"

#include <algorithm>
#include <cmath>

namespace cbas {

void CbASConfig::validate() const {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("CbASConfig: q must be in (0,1]");
    if (samples_per_iteration < 2) throw std::invalid_argument("CbASConfig: need at least 2 samples");
    if (max_iterations == 0) throw std::invalid_argument("CbASConfig: need at least 1 iteration");
    if (weight_floor_ess < 0.0) throw std::invalid_argument("CbASConfig: bad ESS floor");
    if (!(refit_inertia >= 0.0 && refit_inertia < 1.0)) {
        throw std::invalid_argument("CbASConfig: refit_inertia must be in [0,1)");
    }
    if (sequence_budget && *sequence_budget < samples_per_iteration) {
        throw std::invalid_argument("CbASConfig: budget smaller than one iteration");
    }
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::budget_exhausted: return "budget_exhausted";
        case StopReason::collapsed: return "collapsed";
    }
    return "unknown";
}

double effective_sample_size(std::span<const double> weights) {
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    if (s2 == 0.0) return 0.0;
    return s * s / s2;
}

std::unique_ptr<GenerativeModel> IterationPolicy::refit(const BatchContext& ctx,
                                                        std::span<const double> weights) {
    return ctx.search.fit_weighted(ctx.batch, weights);
}

// --- event probability ----------------------------------------------------------

namespace {

double leaf_log_probability(const DesideratumEvent& leaf, const PropertyOracle& oracle,
                            const DesignPoint& x) {
    if (leaf.is_maximize()) return oracle.log_survival(x, leaf.as_maximize().gamma);
    const auto& s = leaf.as_specify();
    return oracle.log_interval(x, s.target, s.gamma);
}

double walk_log_probability(const DesideratumEvent& event,
                            std::span<const PropertyOracle* const> oracles, std::size_t& next,
                            const DesignPoint& x) {
    if (!event.is_conjunction()) return leaf_log_probability(event, *oracles[next++], x);
    double acc = 0.0;
    for (const auto& child : event.children()) {
        acc += walk_log_probability(child, oracles, next, x);
    }
    return acc;
}

}  // namespace

double event_log_probability(const DesideratumEvent& event,
                             std::span<const PropertyOracle* const> oracles, const DesignPoint& x) {
    if (event.leaf_count() != oracles.size()) {
        throw std::invalid_argument("event_log_probability: one oracle per leaf event required");
    }
    std::size_t next = 0;
    return walk_log_probability(event, oracles, next, x);
}

// --- weights ----------------------------------------------------------------------

namespace {

double checked_log_density(const GenerativeModel& model, const DesignPoint& x,
                           const char* which) {
    const double ld = model.log_density(x);
    if (!std::isfinite(ld)) {
        throw std::runtime_error(std::string("density underflow in ") + which + " model");
    }
    return ld;
}

double finish_weight(double log_ratio, const DesideratumEvent& event,
                     std::span<const PropertyOracle* const> oracles, const DesignPoint& x) {
    const double log_p = event_log_probability(event, oracles, x);
    if (std::isnan(log_p)) throw std::runtime_error("event probability is NaN");
    if (log_p == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::exp(log_ratio + log_p);
}

}  // namespace

double cbas_weight(const GenerativeModel& prior, const GenerativeModel& search,
                   const DesignPoint& x, const DesideratumEvent& event,
                   std::span<const PropertyOracle* const> oracles) {
    const double lp = checked_log_density(prior, x, "prior");
    const double lq = checked_log_density(search, x, "search");
    return finish_weight(lp - lq, event, oracles, x);
}

double cbas_weight_joint(const GenerativeModel& prior, const GenerativeModel& search,
                         const DesignPoint& x, std::span<const double> z,
                         const DesideratumEvent& event,
                         std::span<const PropertyOracle* const> oracles) {
    if (!prior.has_latent() || !search.has_latent() ||
        prior.latent_dimension() != search.latent_dimension()) {
        throw std::invalid_argument("latent space mismatch");
    }
    // both models place the same prior on z, so the joint ratio reduces to the
    // conditional ratio
    const double lp = prior.log_conditional_density(x, z);
    const double lq = search.log_conditional_density(x, z);
    if (!std::isfinite(lp)) throw std::runtime_error("density underflow in prior model");
    if (!std::isfinite(lq)) throw std::runtime_error("density underflow in search model");
    return finish_weight(lp - lq, event, oracles, x);
}

std::vector<double> CbasPolicy::weights(const BatchContext& ctx) {
    std::vector<double> out(ctx.batch.size());
    const bool joint = ctx.prior.has_latent() && ctx.batch.has_latents();
    for (std::size_t i = 0; i < ctx.batch.size(); ++i) {
        out[i] = joint ? cbas_weight_joint(ctx.prior, ctx.search, ctx.batch.points[i],
                                           ctx.batch.latents[i], ctx.event, ctx.oracles)
                       : cbas_weight(ctx.prior, ctx.search, ctx.batch.points[i], ctx.event,
                                     ctx.oracles);
    }
    return out;
}

// --- the loop -----------------------------------------------------------------------

namespace {

// tighten every leaf threshold from its own oracle's scores, keeping the
// nesting monotone
DesideratumEvent relax_event(const DesideratumEvent& event,
                             std::span<const PropertyOracle* const> oracles,
                             const SampleBatch& batch, double q) {
    auto leaves = event.leaves();
    DesideratumEvent out = event;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        std::vector<double> values(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const double mean = oracles[li]->predictive_mean(batch.points[i]);
            values[i] = leaves[li]->is_maximize() ? mean
                                                  : std::abs(mean - leaves[li]->as_specify().target);
        }
        RelaxationState state{0, *out.leaves()[li], q};
        out = out.with_leaf_gamma(li, update_relaxation(state, values).current.primary_gamma());
    }
    return out;
}

}  // namespace

RunResult run_adaptive_search(const GenerativeModel& prior,
                              std::span<const PropertyOracle* const> oracles,
                              const DesideratumEvent& event_template, const CbASConfig& config,
                              IterationPolicy& policy, Rng& rng) {
    config.validate();
    if (event_template.leaf_count() != oracles.size()) {
        throw std::invalid_argument("run_adaptive_search: one oracle per leaf event required");
    }

    RunResult result;
    std::shared_ptr<const GenerativeModel> search(prior.clone());  // phi^(1) = theta^(0)
    DesideratumEvent event = event_template;

    for (std::size_t t = 1; t <= config.max_iterations; ++t) {
        IterationRecord rec;
        rec.t = static_cast<int>(t);
        rec.sampling_model = search;

        rec.batch = search->sample(rng, config.samples_per_iteration);
        rec.oracle_means.resize(rec.batch.size());
        for (std::size_t i = 0; i < rec.batch.size(); ++i) {
            rec.oracle_means[i] = oracles.front()->predictive_mean(rec.batch.points[i]);
        }

        event = relax_event(event, oracles, rec.batch, config.q);
        rec.event_state = event;
        rec.gamma = event.primary_gamma();

        BatchContext ctx{rec.batch, rec.oracle_means, event, prior, *search, oracles,
                         static_cast<int>(t)};
        rec.weights = policy.weights(ctx);
        rec.ess = effective_sample_size(rec.weights);

        const bool degenerate = rec.ess < config.weight_floor_ess;
        if (degenerate && !policy.zero_weights_are_valid()) {
            result.records.push_back(std::move(rec));
            result.final_model = search;
            result.stop_reason = StopReason::collapsed;
            return result;
        }

        std::unique_ptr<GenerativeModel> fitted = policy.refit(ctx, rec.weights);
        if (config.refit_inertia > 0.0) {
            fitted = blend_models(*search, *fitted, config.refit_inertia);
        }
        search = std::shared_ptr<const GenerativeModel>(std::move(fitted));
        result.records.push_back(std::move(rec));

        if (config.sequence_budget &&
            t * config.samples_per_iteration >= *config.sequence_budget) {
            result.final_model = search;
            result.stop_reason = StopReason::budget_exhausted;
            return result;
        }
    }
    result.final_model = search;
    result.stop_reason = StopReason::max_iterations;
    return result;
}

RunResult run_cbas(const GenerativeModel& prior, std::span<const PropertyOracle* const> oracles,
                   const DesideratumEvent& event_template, const CbASConfig& config, Rng& rng) {
    CbasPolicy policy;
    return run_adaptive_search(prior, oracles, event_template, config, policy, rng);
}

RunResult run_cbas(const GenerativeModel& prior, const PropertyOracle& oracle,
                   const DesideratumEvent& event_template, const CbASConfig& config, Rng& rng) {
    const PropertyOracle* ptr = &oracle;
    return run_cbas(prior, std::span<const PropertyOracle* const>(&ptr, 1), event_template, config,
                    rng);
}

}  // namespace cbas
