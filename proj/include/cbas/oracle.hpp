#pragma once

#include "cbas/core.hpp"

#include <json.hpp>

namespace cbas {

// ---------------------------------------------------------------------------
// Ground-truth landscapes
// ---------------------------------------------------------------------------

// superposition of two unnormalized Gaussian bumps
struct GroundTruth1D {
    double c1, s1, h1;
    double c2, s2, h2;

    double operator()(double x) const;
};

struct SequenceSample {
    std::vector<int> sequence;
    double y;
};

// Second-order fitness landscape over length-L sequences on an alphabet of
// size A: f(x) = c + sum_l a[l][x_l] + sum_{l<l'} B[(l,x_l),(l',x_{l'})].
//
// Construction draws per-site terms and a coupling direction correlated with
// them, then folds a stabilizing quadratic penalty on the coupling score into
// the constant/site/pair tables, so aggressive extrapolation along the
// apparent gradient collapses while the neighborhood of the wild type stays
// well behaved. Fully deterministic given the construction seed.
class GroundTruthSequence {
public:
    struct Params {
        std::size_t length = 20;
        std::size_t alphabet = 20;
        std::uint64_t seed = 1;
        double site_sd = 1.0;                // scale of per-site fitness terms
        double coupling_strength = 8.0;      // kappa: penalty curvature
        double coupling_correlation = 0.6;   // rho: alignment of coupling with site terms
        double coupling_threshold_sds = 3.0; // penalty onset in cloud standard deviations
        double pairwise_noise_sd = 0.05;     // epistatic noise on letter pairs
        double mutation_rate = 0.15;         // per-site rate of the reference mutant cloud
        double offset = 30.0;                // baseline fitness level
    };

    explicit GroundTruthSequence(const Params& params);

    std::size_t length() const { return params_.length; }
    std::size_t alphabet() const { return params_.alphabet; }
    const Params& params() const { return params_; }

    double value(std::span<const int> sequence) const;
    double value(const DesignPoint& x) const { return value(x.sequence_values()); }

    double constant() const { return constant_; }
    double site_term(std::size_t l, int v) const;
    double pair_term(std::size_t l, std::size_t lp, int v, int vp) const;

    const std::vector<int>& wild_type() const { return wild_type_; }
    // coupling score of a sequence and the penalty onset; test diagnostics
    double coupling_score(std::span<const int> sequence) const;
    double coupling_threshold() const { return tau_; }

private:
    Params params_;
    double constant_ = 0.0;
    std::vector<double> site_;  // L*A
    std::vector<double> pair_;  // npairs*A*A, pairs (l,l') with l<l' in row order
    std::vector<double> coupling_;  // L*A, the g table (diagnostics)
    std::vector<int> wild_type_;
    double tau_ = 0.0;

    std::size_t pair_index(std::size_t l, std::size_t lp) const;
};

// mutant cloud around the landscape's wild type: each site independently
// mutates to a uniformly random other letter with the landscape's mutation rate
std::vector<std::vector<int>> sample_mutant_cloud(const GroundTruthSequence& landscape,
                                                  std::size_t count, Rng& rng);

// ---------------------------------------------------------------------------
// Regression oracles: p(y|x) = N(mu(x), sigma^2)
// ---------------------------------------------------------------------------

enum class PolynomialBasis {
    raw,         // mu(x) = polynomial in x
    saturating,  // mu(x) = polynomial in tanh((x - center)/scale); bounded extrapolation
};

class Polynomial1dOracle final : public PropertyOracle {
public:
    Polynomial1dOracle(std::vector<double> coefficients, double sigma2,
                       PolynomialBasis basis = PolynomialBasis::raw, double center = 0.0,
                       double scale = 1.0);

    double mean_at(double x) const;
    double sigma2() const { return sigma2_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    PolynomialBasis basis() const { return basis_; }
    double center() const { return center_; }
    double scale() const { return scale_; }

    double predictive_mean(const DesignPoint& x) const override;
    double predictive_variance(const DesignPoint&) const override { return sigma2_; }
    double survival(const DesignPoint& x, double gamma) const override;
    double interval(const DesignPoint& x, double y0, double gamma) const override;
    double log_survival(const DesignPoint& x, double gamma) const override;
    double log_interval(const DesignPoint& x, double y0, double gamma) const override;

private:
    std::vector<double> coefficients_;  // ascending powers
    double sigma2_;
    PolynomialBasis basis_;
    double center_, scale_;
};

struct Oracle1dTrainingOptions {
    int degree = 3;
    double holdout_fraction = 0.2;
    PolynomialBasis basis = PolynomialBasis::raw;
    double saturating_scale_mult = 2.0;  // basis scale = mult * sd(training x)
    double sigma2_floor = 1e-8;
};

struct Sample1d {
    double x;
    double y;
};

// Least-squares polynomial mean on a deterministic stride holdout split;
// sigma^2 = mean squared error against the held-out labels.
Polynomial1dOracle train_oracle_1d(std::span<const Sample1d> data,
                                   const Oracle1dTrainingOptions& options = {});

class SequenceLinearOracle final : public PropertyOracle {
public:
    SequenceLinearOracle(double intercept, std::vector<std::vector<double>> site_coefficients,
                         double sigma2);

    double intercept() const { return intercept_; }
    const std::vector<std::vector<double>>& site_coefficients() const { return site_; }
    double sigma2() const { return sigma2_; }

    double mean_of(std::span<const int> sequence) const;

    double predictive_mean(const DesignPoint& x) const override;
    double predictive_variance(const DesignPoint&) const override { return sigma2_; }
    double survival(const DesignPoint& x, double gamma) const override;
    double interval(const DesignPoint& x, double y0, double gamma) const override;
    double log_survival(const DesignPoint& x, double gamma) const override;
    double log_interval(const DesignPoint& x, double y0, double gamma) const override;

private:
    double intercept_;
    std::vector<std::vector<double>> site_;  // L x A
    double sigma2_;
};

// Equal-weight mixture of Gaussian members; survival/interval use the exact
// mixture CDF, the predictive variance adds the member-disagreement term.
class EnsembleOracle final : public PropertyOracle {
public:
    explicit EnsembleOracle(std::vector<SequenceLinearOracle> members);

    const std::vector<SequenceLinearOracle>& members() const { return members_; }

    double predictive_mean(const DesignPoint& x) const override;
    double predictive_variance(const DesignPoint& x) const override;
    double survival(const DesignPoint& x, double gamma) const override;
    double interval(const DesignPoint& x, double y0, double gamma) const override;
    double log_survival(const DesignPoint& x, double gamma) const override;
    double log_interval(const DesignPoint& x, double y0, double gamma) const override;

private:
    std::vector<SequenceLinearOracle> members_;
};

// Bootstrap ensemble of ridge one-hot regressions (lambda = 1e-6); each
// member's sigma^2 is its out-of-bag residual MSE (in-bag if no OOB points).
EnsembleOracle train_sequence_oracle(std::span<const SequenceSample> data,
                                     std::size_t ensemble_size, Rng& rng, std::size_t alphabet);

// Draw a mutant-cloud pool, keep sequences with ground truth at or below the
// empirical `percentile` cut, subsample `sample_count` of them, label with
// ground truth plus Gaussian noise.
std::vector<SequenceSample> truncated_training_set(const GroundTruthSequence& landscape,
                                                   std::size_t pool_size, double percentile,
                                                   std::size_t sample_count, double noise_sd,
                                                   Rng& rng);

// convenience wrappers for the oracle contract operations
inline double survival_probability(const PropertyOracle& oracle, const DesignPoint& x,
                                   double gamma) {
    return oracle.survival(x, gamma);
}
inline double interval_probability(const PropertyOracle& oracle, const DesignPoint& x, double y0,
                                   double gamma) {
    return oracle.interval(x, y0, gamma);
}

nlohmann::json oracle_to_json(const PropertyOracle& oracle);
std::unique_ptr<PropertyOracle> oracle_from_json(const nlohmann::json& j);

}  // namespace cbas
