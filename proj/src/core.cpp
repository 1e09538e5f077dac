#include "cbas/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbas {

double normal_unit(Rng& rng) {
    const double u1 = uniform_unit_pos(rng);
    const double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }
double normal_sf(double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }

double normal_log_cdf(double z) {
    // erfc underflows near z = -37.5; switch to the asymptotic expansion of
    // the Mills ratio well before that
    if (z > -10.0) {
        return std::log(0.5 * std::erfc(-z * M_SQRT1_2));
    }
    const double a = -z;  // a >= 10
    const double a2 = a * a;
    // Phi(-a) = phi(a)/a * (1 - 1/a^2 + 3/a^4 - 15/a^6 + 105/a^8 - ...)
    const double series =
        1.0 - 1.0 / a2 + 3.0 / (a2 * a2) - 15.0 / (a2 * a2 * a2) + 105.0 / (a2 * a2 * a2 * a2);
    return -0.5 * a2 - 0.5 * std::log(2.0 * M_PI) - std::log(a) + std::log(series);
}

// --- DesignPoint -----------------------------------------------------------

DesignPoint DesignPoint::continuous(std::vector<double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("DesignPoint: non-finite coordinate");
    }
    return DesignPoint(std::variant<std::vector<double>, std::vector<int>>(std::move(values)));
}

DesignPoint DesignPoint::sequence(std::vector<int> symbols) {
    for (int s : symbols) {
        if (s < 0) throw std::invalid_argument("DesignPoint: negative symbol index");
    }
    return DesignPoint(std::variant<std::vector<double>, std::vector<int>>(std::move(symbols)));
}

const std::vector<double>& DesignPoint::continuous_values() const {
    if (!is_continuous()) throw std::invalid_argument("DesignPoint: not continuous");
    return std::get<std::vector<double>>(data_);
}

const std::vector<int>& DesignPoint::sequence_values() const {
    if (!is_sequence()) throw std::invalid_argument("DesignPoint: not a sequence");
    return std::get<std::vector<int>>(data_);
}

std::size_t DesignPoint::dimension() const {
    return is_continuous() ? continuous_values().size() : sequence_values().size();
}

// --- DesideratumEvent ------------------------------------------------------

DesideratumEvent DesideratumEvent::maximize(double gamma) {
    DesideratumEvent e;
    e.node_ = MaximizeEvent{gamma};
    return e;
}

DesideratumEvent DesideratumEvent::specify(double target, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("SpecifyEvent: gamma must be >= 0");
    DesideratumEvent e;
    e.node_ = SpecifyEvent{target, gamma};
    return e;
}

DesideratumEvent DesideratumEvent::conjunction(std::vector<DesideratumEvent> children) {
    if (children.empty()) throw std::invalid_argument("Conjunction: empty child list");
    DesideratumEvent e;
    e.node_ = std::move(children);
    return e;
}

const MaximizeEvent& DesideratumEvent::as_maximize() const {
    if (!is_maximize()) throw std::invalid_argument("event is not Maximize");
    return std::get<MaximizeEvent>(node_);
}

const SpecifyEvent& DesideratumEvent::as_specify() const {
    if (!is_specify()) throw std::invalid_argument("event is not Specify");
    return std::get<SpecifyEvent>(node_);
}

const std::vector<DesideratumEvent>& DesideratumEvent::children() const {
    if (!is_conjunction()) throw std::invalid_argument("event is not a Conjunction");
    return std::get<std::vector<DesideratumEvent>>(node_);
}

namespace {
void collect_leaves(const DesideratumEvent& e, std::vector<const DesideratumEvent*>& out) {
    if (e.is_conjunction()) {
        for (const auto& c : e.children()) collect_leaves(c, out);
    } else {
        out.push_back(&e);
    }
}

DesideratumEvent replace_leaf(const DesideratumEvent& e, std::size_t& remaining, double gamma) {
    if (e.is_conjunction()) {
        std::vector<DesideratumEvent> kids;
        kids.reserve(e.children().size());
        for (const auto& c : e.children()) kids.push_back(replace_leaf(c, remaining, gamma));
        return DesideratumEvent::conjunction(std::move(kids));
    }
    if (remaining-- == 0) {
        if (e.is_maximize()) return DesideratumEvent::maximize(gamma);
        return DesideratumEvent::specify(e.as_specify().target, gamma);
    }
    return e;
}
}  // namespace

std::vector<const DesideratumEvent*> DesideratumEvent::leaves() const {
    std::vector<const DesideratumEvent*> out;
    collect_leaves(*this, out);
    return out;
}

DesideratumEvent DesideratumEvent::with_leaf_gamma(std::size_t leaf_index, double gamma) const {
    if (leaf_index >= leaf_count()) throw std::invalid_argument("leaf index out of range");
    std::size_t remaining = leaf_index;
    return replace_leaf(*this, remaining, gamma);
}

double DesideratumEvent::primary_gamma() const {
    const auto* leaf = leaves().front();
    return leaf->is_maximize() ? leaf->as_maximize().gamma : leaf->as_specify().gamma;
}

bool event_membership(const DesideratumEvent& event, double y) {
    if (event.is_maximize()) return y >= event.as_maximize().gamma;
    if (event.is_specify()) {
        const auto& s = event.as_specify();
        return std::abs(y - s.target) <= s.gamma;
    }
    for (const auto& c : event.children()) {
        if (!event_membership(c, y)) return false;
    }
    return true;
}

// --- percentiles -----------------------------------------------------------

double nearest_rank_percentile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("nearest_rank_percentile: no samples");
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("nearest_rank_percentile: q not in (0,1]");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("nearest_rank_percentile: non-finite value");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    // small slack so that q*n computed in binary does not round an exact rank up
    const double r = q * static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(r - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

// --- relaxation ------------------------------------------------------------

RelaxationState update_relaxation(const RelaxationState& state, std::span<const double> values) {
    if (!state.current.is_leaf()) {
        throw std::invalid_argument("update_relaxation: conjunction roots are updated per leaf");
    }
    const double pct = nearest_rank_percentile(values, state.q);
    RelaxationState next = state;
    next.t = state.t + 1;
    if (state.current.is_maximize()) {
        next.current = DesideratumEvent::maximize(std::max(state.current.as_maximize().gamma, pct));
    } else {
        const auto& s = state.current.as_specify();
        next.current = DesideratumEvent::specify(s.target, std::min(s.gamma, pct));
    }
    return next;
}

// --- contracts -------------------------------------------------------------

double PropertyOracle::log_survival(const DesignPoint& x, double gamma) const {
    return std::log(survival(x, gamma));
}

double PropertyOracle::log_interval(const DesignPoint& x, double y0, double gamma) const {
    return std::log(interval(x, y0, gamma));
}

double GenerativeModel::log_conditional_density(const DesignPoint&, std::span<const double>) const {
    throw std::invalid_argument("model has no latent variables");
}

double GenerativeModel::log_joint_density(const DesignPoint&, std::span<const double>) const {
    throw std::invalid_argument("model has no latent variables");
}

double GenerativeModel::weighted_log_likelihood(const SampleBatch& batch,
                                                std::span<const double> weights) const {
    if (batch.size() != weights.size()) {
        throw std::invalid_argument("weighted_log_likelihood: size mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (weights[i] > 0.0) acc += weights[i] * log_density(batch.points[i]);
    }
    return acc;
}

}  // namespace cbas
