#pragma once

#include "cbas/core.hpp"

#include <functional>
#include <iosfwd>

namespace cbas {

struct UniformGrid {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 2;  // number of nodes

    double step() const { return (hi - lo) / static_cast<double>(n - 1); }
    double point(std::size_t i) const { return lo + step() * static_cast<double>(i); }
};

// normalized density tabulated on a uniform grid, kept in both linear and log
// form so downstream KL computations stay finite in the tails
struct GridDensity {
    UniformGrid grid;
    std::vector<double> density;
    std::vector<double> log_density;
    double log_normalizer = 0.0;  // log of the trapezoid integral of the unnormalized values
};

double trapezoid(std::span<const double> values, double step);

// Tabulate p(x|S) proportional to exp(prior_log_density + event_log_probability)
// and normalize by trapezoidal quadrature. Throws when the event is numerically
// impossible on the grid.
GridDensity quadrature_conditional(const std::function<double(double)>& prior_log_density,
                                   const std::function<double(double)>& event_log_probability,
                                   const UniformGrid& grid);

std::size_t grid_argmax(const GridDensity& density);  // ties break toward smaller x

// KL(p || q) for diagonal Gaussians, summed over dimensions
double kl_gaussian_closed_form(std::span<const double> mean_p, std::span<const double> var_p,
                               std::span<const double> mean_q, std::span<const double> var_q);
double kl_gaussian_closed_form(double mean_p, double var_p, double mean_q, double var_q);

// trapezoidal KL(p || q); q is given in log form and must be finite wherever
// p has mass, otherwise +infinity is returned
double kl_grid(const GridDensity& p, const std::function<double(double)>& q_log_density);

// two-column CSV (x,density), plot-ready
void write_density_csv(std::ostream& out, const GridDensity& density);

// ---------------------------------------------------------------------------
// Brute-force weighted maximum likelihood (test oracle for the closed forms)
// ---------------------------------------------------------------------------

struct NumericMleGaussian {
    std::vector<double> mean;
    std::vector<double> variance;
};

// coordinate-wise golden-section maximization of the weighted log-likelihood
NumericMleGaussian numeric_weighted_mle_gaussian(std::span<const DesignPoint> samples,
                                                 std::span<const double> weights);

std::vector<std::vector<double>> numeric_weighted_mle_categorical(
    std::span<const DesignPoint> samples, std::span<const double> weights, std::size_t alphabet);

}  // namespace cbas
