#include "cbas/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace cbas {

double trapezoid(std::span<const double> values, double step) {
    if (values.size() < 2) throw std::invalid_argument("trapezoid: need at least 2 nodes");
    double acc = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
    return acc * step;
}

GridDensity quadrature_conditional(const std::function<double(double)>& prior_log_density,
                                   const std::function<double(double)>& event_log_probability,
                                   const UniformGrid& grid) {
    if (grid.n < 2000) throw std::invalid_argument("quadrature_conditional: grid too coarse");
    GridDensity out;
    out.grid = grid;
    out.log_density.resize(grid.n);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.point(i);
        out.log_density[i] = prior_log_density(x) + event_log_probability(x);
        peak = std::max(peak, out.log_density[i]);
    }
    if (!std::isfinite(peak)) throw std::runtime_error("event numerically impossible on grid");

    std::vector<double> scaled(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) scaled[i] = std::exp(out.log_density[i] - peak);
    const double z_scaled = trapezoid(scaled, grid.step());
    if (!(z_scaled > 0.0) || peak + std::log(z_scaled) < std::log(1e-300)) {
        throw std::runtime_error("event numerically impossible on grid");
    }
    out.log_normalizer = peak + std::log(z_scaled);

    out.density.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        out.log_density[i] -= out.log_normalizer;
        out.density[i] = std::exp(out.log_density[i]);
    }
    return out;
}

std::size_t grid_argmax(const GridDensity& density) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < density.density.size(); ++i) {
        if (density.density[i] > density.density[best]) best = i;
    }
    return best;
}

double kl_gaussian_closed_form(std::span<const double> mean_p, std::span<const double> var_p,
                               std::span<const double> mean_q, std::span<const double> var_q) {
    if (mean_p.size() != var_p.size() || mean_p.size() != mean_q.size() ||
        mean_p.size() != var_q.size() || mean_p.empty()) {
        throw std::invalid_argument("kl_gaussian_closed_form: shape mismatch");
    }
    double acc = 0.0;
    for (std::size_t d = 0; d < mean_p.size(); ++d) {
        if (!(var_p[d] > 0.0) || !(var_q[d] > 0.0)) {
            throw std::invalid_argument("kl_gaussian_closed_form: zero variance");
        }
        const double dm = mean_p[d] - mean_q[d];
        acc += 0.5 * std::log(var_q[d] / var_p[d]) + (var_p[d] + dm * dm) / (2.0 * var_q[d]) - 0.5;
    }
    return acc;
}

double kl_gaussian_closed_form(double mean_p, double var_p, double mean_q, double var_q) {
    return kl_gaussian_closed_form(std::span<const double>(&mean_p, 1),
                                   std::span<const double>(&var_p, 1),
                                   std::span<const double>(&mean_q, 1),
                                   std::span<const double>(&var_q, 1));
}

double kl_grid(const GridDensity& p, const std::function<double(double)>& q_log_density) {
    std::vector<double> integrand(p.grid.n, 0.0);
    for (std::size_t i = 0; i < p.grid.n; ++i) {
        if (p.density[i] <= 0.0) continue;  // 0 log 0 = 0
        const double lq = q_log_density(p.grid.point(i));
        if (lq == -std::numeric_limits<double>::infinity()) {
            return std::numeric_limits<double>::infinity();
        }
        integrand[i] = p.density[i] * (p.log_density[i] - lq);
    }
    return trapezoid(integrand, p.grid.step());
}

void write_density_csv(std::ostream& out, const GridDensity& density) {
    out << "x,density\n";
    for (std::size_t i = 0; i < density.grid.n; ++i) {
        out << density.grid.point(i) << ',' << density.density[i] << '\n';
    }
}

// --- numeric weighted MLE ------------------------------------------------------

namespace {

// golden-section maximization of a unimodal function on [lo, hi]
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

NumericMleGaussian numeric_weighted_mle_gaussian(std::span<const DesignPoint> samples,
                                                 std::span<const double> weights) {
    if (samples.empty() || samples.size() != weights.size()) {
        throw std::invalid_argument("numeric_weighted_mle_gaussian: bad inputs");
    }
    const std::size_t dim = samples.front().dimension();
    NumericMleGaussian out;
    out.mean.resize(dim);
    out.variance.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& s : samples) {
            lo = std::min(lo, s.continuous_values()[d]);
            hi = std::max(hi, s.continuous_values()[d]);
        }
        const double range = std::max(hi - lo, 1e-3);
        const double mu_lo = lo - 2.0 * range, mu_hi = hi + 2.0 * range;
        const double lv_lo = std::log(1e-9), lv_hi = std::log(25.0 * range * range);

        auto objective = [&](double mu, double log_var) {
            const double var = std::exp(log_var);
            double acc = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const double r = samples[i].continuous_values()[d] - mu;
                acc += weights[i] * (-0.5 * std::log(2.0 * M_PI * var) - r * r / (2.0 * var));
            }
            return acc;
        };

        double mu = 0.5 * (lo + hi);
        double lv = std::log(std::max(range * range / 12.0, 1e-8));
        double prev = objective(mu, lv);
        for (int sweep = 0; sweep < 200; ++sweep) {
            mu = golden_max([&](double m) { return objective(m, lv); }, mu_lo, mu_hi, 1e-11);
            lv = golden_max([&](double v) { return objective(mu, v); }, lv_lo, lv_hi, 1e-11);
            const double cur = objective(mu, lv);
            if (std::abs(cur - prev) < 1e-8 * (1.0 + std::abs(prev)) && sweep >= 2) break;
            prev = cur;
        }
        out.mean[d] = mu;
        out.variance[d] = std::exp(lv);
    }
    return out;
}

std::vector<std::vector<double>> numeric_weighted_mle_categorical(
    std::span<const DesignPoint> samples, std::span<const double> weights, std::size_t alphabet) {
    if (samples.empty() || samples.size() != weights.size()) {
        throw std::invalid_argument("numeric_weighted_mle_categorical: bad inputs");
    }
    const std::size_t length = samples.front().dimension();
    std::vector<std::vector<double>> probs(length, std::vector<double>(alphabet));
    for (std::size_t l = 0; l < length; ++l) {
        // weighted letter totals for this site
        std::vector<double> totals(alphabet, 0.0);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            totals[static_cast<std::size_t>(samples[i].sequence_values()[l])] += weights[i];
        }
        // maximize sum_a totals[a] * log p_a over the simplex via coordinate
        // golden-section in logit space (last logit pinned at 0)
        std::vector<double> theta(alphabet, 0.0);
        auto objective = [&]() {
            double lse = 0.0, top = *std::max_element(theta.begin(), theta.end());
            for (double t : theta) lse += std::exp(t - top);
            lse = top + std::log(lse);
            double acc = 0.0;
            for (std::size_t a = 0; a < alphabet; ++a) acc += totals[a] * (theta[a] - lse);
            return acc;
        };
        double prev = objective();
        for (int sweep = 0; sweep < 400; ++sweep) {
            for (std::size_t a = 0; a + 1 < alphabet; ++a) {
                theta[a] = golden_max(
                    [&](double t) {
                        theta[a] = t;
                        return objective();
                    },
                    -40.0, 40.0, 1e-11);
            }
            const double cur = objective();
            if (std::abs(cur - prev) < 1e-10 * (1.0 + std::abs(prev)) && sweep >= 2) break;
            prev = cur;
        }
        double top = *std::max_element(theta.begin(), theta.end());
        double z = 0.0;
        for (double t : theta) z += std::exp(t - top);
        for (std::size_t a = 0; a < alphabet; ++a) probs[l][a] = std::exp(theta[a] - top) / z;
    }
    return probs;
}

}  // namespace cbas
