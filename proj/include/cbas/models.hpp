#pragma once

#include "cbas/core.hpp"

#include <json.hpp>

namespace cbas {

inline constexpr double kVarianceFloor = 1e-6;

// ---------------------------------------------------------------------------
// Diagonal Gaussian over continuous design points
// ---------------------------------------------------------------------------

class DiagonalGaussianModel final : public GenerativeModel {
public:
    DiagonalGaussianModel(std::vector<double> mean, std::vector<double> variance,
                          double variance_floor = kVarianceFloor);

    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& variance() const { return variance_; }
    double variance_floor() const { return variance_floor_; }

    std::unique_ptr<GenerativeModel> clone() const override;
    SampleBatch sample(Rng& rng, std::size_t count) const override;
    double log_density(const DesignPoint& x) const override;
    std::unique_ptr<GenerativeModel> fit_weighted(const SampleBatch& batch,
                                                  std::span<const double> weights) const override;

private:
    std::vector<double> mean_;
    std::vector<double> variance_;
    double variance_floor_;
};

// Closed-form weighted ML fit: weighted mean and (population-form) weighted
// variance per dimension, variance clamped to the floor.
DiagonalGaussianModel gaussian_fit_weighted(std::span<const DesignPoint> samples,
                                            std::span<const double> weights,
                                            double variance_floor = kVarianceFloor);

// ---------------------------------------------------------------------------
// Product of per-site categoricals over sequences
// ---------------------------------------------------------------------------

class ProductCategoricalModel final : public GenerativeModel {
public:
    // probs: one row per site, each row on the simplex
    ProductCategoricalModel(std::vector<std::vector<double>> probs, double refit_smoothing = 0.0);

    std::size_t length() const { return probs_.size(); }
    std::size_t alphabet() const { return probs_.empty() ? 0 : probs_.front().size(); }
    const std::vector<std::vector<double>>& probs() const { return probs_; }
    double refit_smoothing() const { return refit_smoothing_; }

    std::unique_ptr<GenerativeModel> clone() const override;
    SampleBatch sample(Rng& rng, std::size_t count) const override;
    double log_density(const DesignPoint& x) const override;
    std::unique_ptr<GenerativeModel> fit_weighted(const SampleBatch& batch,
                                                  std::span<const double> weights) const override;

private:
    std::vector<std::vector<double>> probs_;
    double refit_smoothing_;
};

// probs[l][a] = (smoothing + sum of weights with x[l]==a) / (A*smoothing + sum of weights)
ProductCategoricalModel categorical_fit_weighted(std::span<const DesignPoint> samples,
                                                 std::span<const double> weights,
                                                 double smoothing, std::size_t alphabet,
                                                 double refit_smoothing = 0.0);

// ---------------------------------------------------------------------------
// Linear-Gaussian latent model: x = W z + b + eps, z ~ N(0, I_d),
// eps ~ N(0, noise_variance * I_L). Marginal: N(b, W W^T + noise_variance I).
// ---------------------------------------------------------------------------

struct LatentPosterior {
    std::vector<double> mean;        // length d
    std::vector<double> covariance;  // d*d, row-major
};

class LinearGaussianLatentModel final : public GenerativeModel {
public:
    LinearGaussianLatentModel(std::vector<std::vector<double>> loading, std::vector<double> bias,
                              double noise_variance, double variance_floor = kVarianceFloor);

    std::size_t observed_dimension() const { return bias_.size(); }
    const std::vector<std::vector<double>>& loading() const { return loading_; }
    const std::vector<double>& bias() const { return bias_; }
    double noise_variance() const { return noise_variance_; }

    std::unique_ptr<GenerativeModel> clone() const override;
    SampleBatch sample(Rng& rng, std::size_t count) const override;
    double log_density(const DesignPoint& x) const override;

    bool has_latent() const override { return true; }
    std::size_t latent_dimension() const override { return loading_.empty() ? 0 : loading_.front().size(); }
    double log_conditional_density(const DesignPoint& x, std::span<const double> z) const override;
    double log_joint_density(const DesignPoint& x, std::span<const double> z) const override;

    std::unique_ptr<GenerativeModel> fit_weighted(const SampleBatch& batch,
                                                  std::span<const double> weights) const override;

    // exact posterior p(z | x) and the evidence lower bound evaluated at a
    // Gaussian variational posterior; the bound is tight at the exact posterior
    LatentPosterior exact_posterior(const DesignPoint& x) const;
    double elbo(const DesignPoint& x, const LatentPosterior& q) const;

    // marginal covariance W W^T + noise_variance I, row-major
    std::vector<double> marginal_covariance() const;

private:
    std::vector<std::vector<double>> loading_;  // L x d
    std::vector<double> bias_;                  // L
    double noise_variance_;
    double variance_floor_;
};

class EmConvergenceError : public std::runtime_error {
public:
    EmConvergenceError(std::string message, LinearGaussianLatentModel last)
        : std::runtime_error(std::move(message)), last_iterate(std::move(last)) {}
    LinearGaussianLatentModel last_iterate;
};

struct LinearGaussianFitOptions {
    std::size_t max_em_iters = 500;
    double tolerance = 1e-8;
    double variance_floor = kVarianceFloor;
    // optional warm start; identity-ish default otherwise
    const LinearGaussianLatentModel* warm_start = nullptr;
};

struct LinearGaussianFitResult {
    LinearGaussianLatentModel model;
    std::vector<double> loglik_trace;  // weighted log-likelihood per EM step
    std::size_t iterations = 0;
};

// Weighted EM to a fixed point of the weighted log-likelihood. Throws
// EmConvergenceError (carrying the last iterate) if max_em_iters is reached.
LinearGaussianFitResult linear_gaussian_fit_weighted(std::span<const DesignPoint> samples,
                                                     std::span<const double> weights,
                                                     std::size_t latent_dim,
                                                     const LinearGaussianFitOptions& options = {});

// ---------------------------------------------------------------------------
// Checkpoint serialization (field names: kind, mean, variance, probs,
// loading, bias, noise_variance)
// ---------------------------------------------------------------------------

nlohmann::json model_to_json(const GenerativeModel& model);
std::unique_ptr<GenerativeModel> model_from_json(const nlohmann::json& j);

// inertial update toward a freshly fitted model: keep*previous + (1-keep)*fitted
// in mean parameters; used by the engine when partial refits are configured
std::unique_ptr<GenerativeModel> blend_models(const GenerativeModel& previous,
                                              const GenerativeModel& fitted, double keep);

}  // namespace cbas
