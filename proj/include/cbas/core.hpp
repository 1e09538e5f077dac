#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cbas {

// ---------------------------------------------------------------------------
// Random numbers.
//
// mt19937_64 has a bit-exact sequence by the standard; the distribution
// transforms below are written out explicitly so that draws are identical
// across standard libraries.
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

// uniform on [0,1), 53-bit resolution
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// uniform on (0,1]
inline double uniform_unit_pos(Rng& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// standard normal via Box-Muller (one value per call)
double normal_unit(Rng& rng);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view s);

// stable per-cell seed from a master seed and a list of tags
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);

// ---------------------------------------------------------------------------
// Normal distribution helpers (shared by oracles and reference checks).
// log_sf / log_cdf stay finite far into the tails.
// ---------------------------------------------------------------------------

double normal_cdf(double z);
double normal_sf(double z);
double normal_log_cdf(double z);
inline double normal_log_sf(double z) { return normal_log_cdf(-z); }

// ---------------------------------------------------------------------------
// Design points
// ---------------------------------------------------------------------------

class DesignPoint {
public:
    static DesignPoint continuous(std::vector<double> values);
    static DesignPoint sequence(std::vector<int> symbols);
    static DesignPoint scalar(double x) { return continuous({x}); }

    bool is_continuous() const { return std::holds_alternative<std::vector<double>>(data_); }
    bool is_sequence() const { return !is_continuous(); }

    const std::vector<double>& continuous_values() const;
    const std::vector<int>& sequence_values() const;
    std::size_t dimension() const;

    bool operator==(const DesignPoint&) const = default;

private:
    explicit DesignPoint(std::variant<std::vector<double>, std::vector<int>> data)
        : data_(std::move(data)) {}
    std::variant<std::vector<double>, std::vector<int>> data_;
};

// ---------------------------------------------------------------------------
// Desideratum events: the target set S with its relaxation threshold.
// ---------------------------------------------------------------------------

struct MaximizeEvent {
    double gamma;  // S = { y : y >= gamma }, closed threshold
};

struct SpecifyEvent {
    double target;  // y0
    double gamma;   // S = [y0 - gamma, y0 + gamma], gamma >= 0
};

class DesideratumEvent {
public:
    static DesideratumEvent maximize(double gamma);
    static DesideratumEvent specify(double target, double gamma);
    static DesideratumEvent conjunction(std::vector<DesideratumEvent> children);

    bool is_maximize() const { return std::holds_alternative<MaximizeEvent>(node_); }
    bool is_specify() const { return std::holds_alternative<SpecifyEvent>(node_); }
    bool is_conjunction() const { return std::holds_alternative<std::vector<DesideratumEvent>>(node_); }
    bool is_leaf() const { return !is_conjunction(); }

    const MaximizeEvent& as_maximize() const;
    const SpecifyEvent& as_specify() const;
    const std::vector<DesideratumEvent>& children() const;

    // leaves in depth-first order
    std::vector<const DesideratumEvent*> leaves() const;
    std::size_t leaf_count() const { return leaves().size(); }

    // copy with the gamma of the leaf_index-th leaf replaced
    DesideratumEvent with_leaf_gamma(std::size_t leaf_index, double gamma) const;

    // gamma of the first leaf (the threshold column logged per iteration)
    double primary_gamma() const;

private:
    DesideratumEvent() = default;
    std::variant<MaximizeEvent, SpecifyEvent, std::vector<DesideratumEvent>> node_;
};

// true iff y lies in the set encoded by the event; conjunction = AND over children
bool event_membership(const DesideratumEvent& event, double y);

// ---------------------------------------------------------------------------
// Percentiles (nearest-rank): sorted ascending, element at index ceil(q*n),
// 1-based. q in (0,1]; q=1 returns the maximum.
// ---------------------------------------------------------------------------

double nearest_rank_percentile(std::span<const double> values, double q);

// ---------------------------------------------------------------------------
// Relaxation schedule state
// ---------------------------------------------------------------------------

struct RelaxationState {
    int t = 0;
    DesideratumEvent current = DesideratumEvent::maximize(
        -std::numeric_limits<double>::infinity());
    double q = 1.0;
};

// One relaxation step for a leaf-rooted state. `values` are predictive means
// for Maximize and absolute deviations |y - y0| for Specify. Monotone by
// construction: gamma never moves backwards. Conjunction roots are updated
// leaf-by-leaf in the engine.
RelaxationState update_relaxation(const RelaxationState& state, std::span<const double> values);

// ---------------------------------------------------------------------------
// Capability contracts
// ---------------------------------------------------------------------------

class PropertyOracle {
public:
    virtual ~PropertyOracle() = default;

    virtual double predictive_mean(const DesignPoint& x) const = 0;
    virtual double predictive_variance(const DesignPoint& x) const = 0;

    // P(y >= gamma | x)
    virtual double survival(const DesignPoint& x, double gamma) const = 0;
    // P(y in [y0 - gamma, y0 + gamma] | x), gamma >= 0
    virtual double interval(const DesignPoint& x, double y0, double gamma) const = 0;

    // log-space variants; defaults wrap the linear forms
    virtual double log_survival(const DesignPoint& x, double gamma) const;
    virtual double log_interval(const DesignPoint& x, double y0, double gamma) const;
};

struct SampleBatch {
    std::vector<DesignPoint> points;
    // one latent vector per point for latent models, empty otherwise
    std::vector<std::vector<double>> latents;

    bool has_latents() const { return !latents.empty(); }
    std::size_t size() const { return points.size(); }
};

class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;

    virtual std::unique_ptr<GenerativeModel> clone() const = 0;
    virtual SampleBatch sample(Rng& rng, std::size_t count) const = 0;

    // log density of x (the marginal density for latent models)
    virtual double log_density(const DesignPoint& x) const = 0;

    virtual bool has_latent() const { return false; }
    virtual std::size_t latent_dimension() const { return 0; }
    // log p(x | z); latent models only
    virtual double log_conditional_density(const DesignPoint& x, std::span<const double> z) const;
    // log p(x, z) = log p(x | z) + log p(z); latent models only
    virtual double log_joint_density(const DesignPoint& x, std::span<const double> z) const;

    // weighted maximum likelihood refit; `*this` provides the warm start
    virtual std::unique_ptr<GenerativeModel> fit_weighted(const SampleBatch& batch,
                                                          std::span<const double> weights) const = 0;

    // per-iteration weighted log-likelihood, used by diagnostics
    double weighted_log_likelihood(const SampleBatch& batch, std::span<const double> weights) const;
};

}  // namespace cbas
