#include "cbas/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbas {

namespace {

double scalar_of(const DesignPoint& x) {
    const auto& v = x.continuous_values();
    if (v.size() != 1) throw std::invalid_argument("1D oracle expects a scalar design point");
    return v.front();
}

double gaussian_survival(double mu, double sigma2, double gamma) {
    if (sigma2 == 0.0) return mu >= gamma ? 1.0 : 0.0;
    return normal_sf((gamma - mu) / std::sqrt(sigma2));
}

double gaussian_log_survival(double mu, double sigma2, double gamma) {
    if (sigma2 == 0.0) return mu >= gamma ? 0.0 : -std::numeric_limits<double>::infinity();
    return normal_log_sf((gamma - mu) / std::sqrt(sigma2));
}

double gaussian_interval(double mu, double sigma2, double y0, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("interval: gamma must be >= 0");
    if (sigma2 == 0.0) return std::abs(y0 - mu) <= gamma ? 1.0 : 0.0;
    const double sd = std::sqrt(sigma2);
    // evaluate on the side with smaller tail mass for accuracy
    const double a = (y0 - gamma - mu) / sd;
    const double b = (y0 + gamma - mu) / sd;
    return std::max(0.0, normal_sf(a) - normal_sf(b));
}

double gaussian_log_interval(double mu, double sigma2, double y0, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("interval: gamma must be >= 0");
    if (sigma2 == 0.0) {
        return std::abs(y0 - mu) <= gamma ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    if (gamma == 0.0) return -std::numeric_limits<double>::infinity();
    if (std::isinf(gamma)) return 0.0;
    const double sd = std::sqrt(sigma2);
    double a = (y0 - gamma - mu) / sd;
    double b = (y0 + gamma - mu) / sd;
    if (a + b > 0.0) {  // reflect so the interval sits in the left tail
        const double tmp = a;
        a = -b;
        b = -tmp;
    }
    const double log_cb = normal_log_cdf(b);
    const double log_ca = normal_log_cdf(a);
    // log(Phi(b) - Phi(a)), b > a
    return log_cb + std::log1p(-std::exp(log_ca - log_cb));
}

double logsumexp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - m);
    return m + std::log(acc);
}

}  // namespace

// --- GroundTruth1D -----------------------------------------------------------

double GroundTruth1D::operator()(double x) const {
    const double r1 = (x - c1) / s1;
    const double r2 = (x - c2) / s2;
    return h1 * std::exp(-0.5 * r1 * r1) + h2 * std::exp(-0.5 * r2 * r2);
}

// --- GroundTruthSequence -------------------------------------------------------

GroundTruthSequence::GroundTruthSequence(const Params& params) : params_(params) {
    const std::size_t L = params_.length;
    const std::size_t A = params_.alphabet;
    if (L < 2 || A < 2) throw std::invalid_argument("GroundTruthSequence: bad dimensions");
    Rng rng(derive_seed(params_.seed, {fnv1a("sequence-landscape")}));

    std::vector<double> a(L * A);
    coupling_.resize(L * A);
    const double rho = params_.coupling_correlation;
    for (std::size_t i = 0; i < L * A; ++i) {
        const double za = normal_unit(rng);
        const double zg = normal_unit(rng);
        a[i] = params_.site_sd * za;
        coupling_[i] = rho * za + std::sqrt(1.0 - rho * rho) * zg;
    }

    wild_type_.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        wild_type_[l] = static_cast<int>(rng() % static_cast<std::uint64_t>(A));
    }

    // penalty onset: cloud mean + threshold_sds * cloud sd of the coupling
    // score under per-site mutation at the reference rate (exact moments)
    const double p = params_.mutation_rate;
    double mean_g = 0.0, var_g = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        const double gw = coupling_[l * A + static_cast<std::size_t>(wild_type_[l])];
        double sum_alt = 0.0, sum_alt2 = 0.0;
        for (std::size_t v = 0; v < A; ++v) {
            if (static_cast<int>(v) == wild_type_[l]) continue;
            sum_alt += coupling_[l * A + v];
            sum_alt2 += coupling_[l * A + v] * coupling_[l * A + v];
        }
        const double m1 = (1.0 - p) * gw + p * sum_alt / static_cast<double>(A - 1);
        const double m2 = (1.0 - p) * gw * gw + p * sum_alt2 / static_cast<double>(A - 1);
        mean_g += m1;
        var_g += m2 - m1 * m1;
    }
    tau_ = mean_g + params_.coupling_threshold_sds * std::sqrt(var_g);

    // fold  -(kappa/L) (G - tau)^2  into the second-order tables
    const double k = params_.coupling_strength / static_cast<double>(L);
    constant_ = params_.offset - k * tau_ * tau_;
    site_.resize(L * A);
    for (std::size_t i = 0; i < L * A; ++i) {
        site_[i] = a[i] - k * coupling_[i] * coupling_[i] + 2.0 * k * tau_ * coupling_[i];
    }
    const std::size_t npairs = L * (L - 1) / 2;
    pair_.resize(npairs * A * A);
    std::size_t idx = 0;
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t lp = l + 1; lp < L; ++lp) {
            for (std::size_t v = 0; v < A; ++v) {
                for (std::size_t vp = 0; vp < A; ++vp) {
                    pair_[idx * A * A + v * A + vp] =
                        -2.0 * k * coupling_[l * A + v] * coupling_[lp * A + vp] +
                        params_.pairwise_noise_sd * normal_unit(rng);
                }
            }
            ++idx;
        }
    }
}

std::size_t GroundTruthSequence::pair_index(std::size_t l, std::size_t lp) const {
    // row-major over pairs (l, lp) with l < lp
    const std::size_t L = params_.length;
    return l * (2 * L - l - 1) / 2 + (lp - l - 1);
}

double GroundTruthSequence::site_term(std::size_t l, int v) const {
    return site_[l * params_.alphabet + static_cast<std::size_t>(v)];
}

double GroundTruthSequence::pair_term(std::size_t l, std::size_t lp, int v, int vp) const {
    const std::size_t A = params_.alphabet;
    return pair_[pair_index(l, lp) * A * A + static_cast<std::size_t>(v) * A +
                 static_cast<std::size_t>(vp)];
}

double GroundTruthSequence::value(std::span<const int> sequence) const {
    const std::size_t L = params_.length;
    const std::size_t A = params_.alphabet;
    if (sequence.size() != L) throw std::invalid_argument("landscape: length mismatch");
    double f = constant_;
    for (std::size_t l = 0; l < L; ++l) {
        if (sequence[l] < 0 || static_cast<std::size_t>(sequence[l]) >= A) {
            throw std::invalid_argument("landscape: symbol outside alphabet");
        }
        f += site_[l * A + static_cast<std::size_t>(sequence[l])];
    }
    std::size_t idx = 0;
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t off_l = static_cast<std::size_t>(sequence[l]) * A;
        for (std::size_t lp = l + 1; lp < L; ++lp, ++idx) {
            f += pair_[idx * A * A + off_l + static_cast<std::size_t>(sequence[lp])];
        }
    }
    return f;
}

double GroundTruthSequence::coupling_score(std::span<const int> sequence) const {
    const std::size_t A = params_.alphabet;
    double g = 0.0;
    for (std::size_t l = 0; l < sequence.size(); ++l) {
        g += coupling_[l * A + static_cast<std::size_t>(sequence[l])];
    }
    return g;
}

std::vector<std::vector<int>> sample_mutant_cloud(const GroundTruthSequence& landscape,
                                                  std::size_t count, Rng& rng) {
    const std::size_t L = landscape.length();
    const std::size_t A = landscape.alphabet();
    const double p = landscape.params().mutation_rate;
    std::vector<std::vector<int>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<int> seq = landscape.wild_type();
        for (std::size_t l = 0; l < L; ++l) {
            if (uniform_unit(rng) < p) {
                const auto shift = 1 + rng() % static_cast<std::uint64_t>(A - 1);
                seq[l] = static_cast<int>((static_cast<std::uint64_t>(seq[l]) + shift) %
                                          static_cast<std::uint64_t>(A));
            }
        }
        out.push_back(std::move(seq));
    }
    return out;
}

// --- Polynomial1dOracle --------------------------------------------------------

Polynomial1dOracle::Polynomial1dOracle(std::vector<double> coefficients, double sigma2,
                                       PolynomialBasis basis, double center, double scale)
    : coefficients_(std::move(coefficients)),
      sigma2_(sigma2),
      basis_(basis),
      center_(center),
      scale_(scale) {
    if (coefficients_.empty()) throw std::invalid_argument("empty polynomial");
    if (sigma2_ < 0.0 || !std::isfinite(sigma2_)) throw std::invalid_argument("bad sigma2");
    if (basis_ == PolynomialBasis::saturating && !(scale_ > 0.0)) {
        throw std::invalid_argument("saturating basis needs a positive scale");
    }
}

double Polynomial1dOracle::mean_at(double x) const {
    const double t = basis_ == PolynomialBasis::raw ? x : std::tanh((x - center_) / scale_);
    double acc = 0.0;
    for (std::size_t i = coefficients_.size(); i-- > 0;) acc = acc * t + coefficients_[i];
    return acc;
}

double Polynomial1dOracle::predictive_mean(const DesignPoint& x) const {
    return mean_at(scalar_of(x));
}

double Polynomial1dOracle::survival(const DesignPoint& x, double gamma) const {
    return gaussian_survival(predictive_mean(x), sigma2_, gamma);
}

double Polynomial1dOracle::interval(const DesignPoint& x, double y0, double gamma) const {
    return gaussian_interval(predictive_mean(x), sigma2_, y0, gamma);
}

double Polynomial1dOracle::log_survival(const DesignPoint& x, double gamma) const {
    return gaussian_log_survival(predictive_mean(x), sigma2_, gamma);
}

double Polynomial1dOracle::log_interval(const DesignPoint& x, double y0, double gamma) const {
    return gaussian_log_interval(predictive_mean(x), sigma2_, y0, gamma);
}

Polynomial1dOracle train_oracle_1d(std::span<const Sample1d> data,
                                   const Oracle1dTrainingOptions& options) {
    if (options.degree < 0) throw std::invalid_argument("degree must be >= 0");
    if (!(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0)) {
        throw std::invalid_argument("holdout_fraction must be in (0,1)");
    }
    // deterministic stride split: every k-th point is held out
    const auto k = static_cast<std::size_t>(std::lround(1.0 / options.holdout_fraction));
    std::vector<Sample1d> train, holdout;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i % k == k - 1) {
            holdout.push_back(data[i]);
        } else {
            train.push_back(data[i]);
        }
    }
    const auto n_coef = static_cast<std::size_t>(options.degree) + 1;
    if (train.size() < n_coef + 1 || holdout.empty()) {
        throw std::invalid_argument("not enough data after the holdout split");
    }

    double center = 0.0, scale = 1.0;
    if (options.basis == PolynomialBasis::saturating) {
        double mean = 0.0;
        for (const auto& s : train) mean += s.x;
        mean /= static_cast<double>(train.size());
        double var = 0.0;
        for (const auto& s : train) var += (s.x - mean) * (s.x - mean);
        var /= static_cast<double>(train.size());
        center = mean;
        scale = options.saturating_scale_mult * std::sqrt(std::max(var, 1e-12));
    }
    auto feature = [&](double x) {
        return options.basis == PolynomialBasis::raw ? x : std::tanh((x - center) / scale);
    };

    Eigen::MatrixXd design(train.size(), n_coef);
    Eigen::VectorXd y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const double t = feature(train[i].x);
        double pw = 1.0;
        for (std::size_t j = 0; j < n_coef; ++j) {
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pw;
            pw *= t;
        }
        y(static_cast<Eigen::Index>(i)) = train[i].y;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(n_coef)) {
        throw std::runtime_error("ill-posed fit");
    }
    const Eigen::VectorXd beta = qr.solve(y);
    std::vector<double> coeffs(beta.data(), beta.data() + n_coef);

    Polynomial1dOracle fitted(coeffs, options.sigma2_floor, options.basis, center, scale);
    double mse = 0.0;
    for (const auto& s : holdout) {
        const double r = fitted.mean_at(s.x) - s.y;
        mse += r * r;
    }
    mse /= static_cast<double>(holdout.size());
    return Polynomial1dOracle(std::move(coeffs), std::max(mse, options.sigma2_floor),
                              options.basis, center, scale);
}

// --- SequenceLinearOracle -------------------------------------------------------

SequenceLinearOracle::SequenceLinearOracle(double intercept,
                                           std::vector<std::vector<double>> site_coefficients,
                                           double sigma2)
    : intercept_(intercept), site_(std::move(site_coefficients)), sigma2_(sigma2) {
    if (site_.empty()) throw std::invalid_argument("empty site coefficients");
    if (sigma2_ < 0.0 || !std::isfinite(sigma2_)) throw std::invalid_argument("bad sigma2");
}

double SequenceLinearOracle::mean_of(std::span<const int> seq) const {
    if (seq.size() != site_.size()) throw std::invalid_argument("oracle: length mismatch");
    double acc = intercept_;
    for (std::size_t l = 0; l < seq.size(); ++l) {
        acc += site_[l].at(static_cast<std::size_t>(seq[l]));
    }
    return acc;
}

double SequenceLinearOracle::predictive_mean(const DesignPoint& x) const {
    return mean_of(x.sequence_values());
}

double SequenceLinearOracle::survival(const DesignPoint& x, double gamma) const {
    return gaussian_survival(predictive_mean(x), sigma2_, gamma);
}

double SequenceLinearOracle::interval(const DesignPoint& x, double y0, double gamma) const {
    return gaussian_interval(predictive_mean(x), sigma2_, y0, gamma);
}

double SequenceLinearOracle::log_survival(const DesignPoint& x, double gamma) const {
    return gaussian_log_survival(predictive_mean(x), sigma2_, gamma);
}

double SequenceLinearOracle::log_interval(const DesignPoint& x, double y0, double gamma) const {
    return gaussian_log_interval(predictive_mean(x), sigma2_, y0, gamma);
}

// --- EnsembleOracle -------------------------------------------------------------

EnsembleOracle::EnsembleOracle(std::vector<SequenceLinearOracle> members)
    : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("empty ensemble");
}

double EnsembleOracle::predictive_mean(const DesignPoint& x) const {
    double acc = 0.0;
    for (const auto& m : members_) acc += m.predictive_mean(x);
    return acc / static_cast<double>(members_.size());
}

double EnsembleOracle::predictive_variance(const DesignPoint& x) const {
    // mixture variance = mean member variance + disagreement; both terms are
    // non-negative by construction
    const double mean = predictive_mean(x);
    double var = 0.0, disagreement = 0.0;
    for (const auto& m : members_) {
        var += m.sigma2();
        const double d = m.predictive_mean(x) - mean;
        disagreement += d * d;
    }
    const auto k = static_cast<double>(members_.size());
    return var / k + disagreement / k;
}

double EnsembleOracle::survival(const DesignPoint& x, double gamma) const {
    double acc = 0.0;
    for (const auto& m : members_) acc += m.survival(x, gamma);
    return acc / static_cast<double>(members_.size());
}

double EnsembleOracle::interval(const DesignPoint& x, double y0, double gamma) const {
    double acc = 0.0;
    for (const auto& m : members_) acc += m.interval(x, y0, gamma);
    return acc / static_cast<double>(members_.size());
}

double EnsembleOracle::log_survival(const DesignPoint& x, double gamma) const {
    std::vector<double> parts(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) parts[i] = members_[i].log_survival(x, gamma);
    return logsumexp(parts) - std::log(static_cast<double>(members_.size()));
}

double EnsembleOracle::log_interval(const DesignPoint& x, double y0, double gamma) const {
    std::vector<double> parts(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        parts[i] = members_[i].log_interval(x, y0, gamma);
    }
    return logsumexp(parts) - std::log(static_cast<double>(members_.size()));
}

EnsembleOracle train_sequence_oracle(std::span<const SequenceSample> data,
                                     std::size_t ensemble_size, Rng& rng, std::size_t alphabet) {
    if (data.empty()) throw std::invalid_argument("train_sequence_oracle: no data");
    if (ensemble_size == 0) throw std::invalid_argument("ensemble_size must be >= 1");
    const std::size_t L = data.front().sequence.size();
    const std::size_t n_features = 1 + L * alphabet;
    const auto n = data.size();

    // one-hot design matrix, shared across members
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n_features));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (data[i].sequence.size() != L) throw std::invalid_argument("ragged training data");
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        for (std::size_t l = 0; l < L; ++l) {
            const auto v = static_cast<std::size_t>(data[i].sequence[l]);
            if (v >= alphabet) throw std::invalid_argument("symbol outside alphabet");
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(1 + l * alphabet + v)) = 1.0;
        }
        y(static_cast<Eigen::Index>(i)) = data[i].y;
    }

    constexpr double kRidge = 1e-6;  // one-hot blocks are exactly collinear with the intercept
    std::vector<SequenceLinearOracle> members;
    members.reserve(ensemble_size);
    for (std::size_t k = 0; k < ensemble_size; ++k) {
        std::vector<std::size_t> counts(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[rng() % static_cast<std::uint64_t>(n)] += 1;
        }
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_features),
                                                  static_cast<Eigen::Index>(n_features));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_features));
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[i] == 0) continue;
            const auto c = static_cast<double>(counts[i]);
            const Eigen::VectorXd xi = X.row(static_cast<Eigen::Index>(i)).transpose();
            G.selfadjointView<Eigen::Lower>().rankUpdate(xi, c);
            rhs += c * y(static_cast<Eigen::Index>(i)) * xi;
        }
        G = G.selfadjointView<Eigen::Lower>();
        G.diagonal().array() += kRidge;
        const Eigen::VectorXd beta = G.ldlt().solve(rhs);

        double mse = 0.0;
        std::size_t n_oob = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[i] != 0) continue;
            const double r = X.row(static_cast<Eigen::Index>(i)).dot(beta) -
                             y(static_cast<Eigen::Index>(i));
            mse += r * r;
            ++n_oob;
        }
        if (n_oob == 0) {  // fall back to in-bag residuals
            for (std::size_t i = 0; i < n; ++i) {
                const double r = X.row(static_cast<Eigen::Index>(i)).dot(beta) -
                                 y(static_cast<Eigen::Index>(i));
                mse += static_cast<double>(counts[i]) * r * r;
            }
            mse /= static_cast<double>(n);
        } else {
            mse /= static_cast<double>(n_oob);
        }

        std::vector<std::vector<double>> site(L, std::vector<double>(alphabet));
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t v = 0; v < alphabet; ++v) {
                site[l][v] = beta(static_cast<Eigen::Index>(1 + l * alphabet + v));
            }
        }
        members.emplace_back(beta(0), std::move(site), std::max(mse, 1e-8));
    }
    return EnsembleOracle(std::move(members));
}

std::vector<SequenceSample> truncated_training_set(const GroundTruthSequence& landscape,
                                                   std::size_t pool_size, double percentile,
                                                   std::size_t sample_count, double noise_sd,
                                                   Rng& rng) {
    if (!(percentile > 0.0 && percentile <= 1.0)) {
        throw std::invalid_argument("percentile must be in (0,1]");
    }
    if (percentile < 1.0 &&
        static_cast<double>(pool_size) < static_cast<double>(sample_count) / percentile) {
        throw std::invalid_argument("insufficient pool for the requested truncation");
    }
    auto pool = sample_mutant_cloud(landscape, pool_size, rng);
    std::vector<double> truth(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) truth[i] = landscape.value(pool[i]);

    std::vector<std::size_t> kept;
    if (percentile >= 1.0) {
        kept.resize(pool.size());
        std::iota(kept.begin(), kept.end(), std::size_t{0});
    } else {
        const double cutoff = nearest_rank_percentile(truth, percentile);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (truth[i] <= cutoff) kept.push_back(i);
        }
    }
    if (kept.size() < sample_count) throw std::invalid_argument("insufficient pool after truncation");

    // partial Fisher-Yates subsample
    for (std::size_t i = 0; i < sample_count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(
                                      rng() % static_cast<std::uint64_t>(kept.size() - i));
        std::swap(kept[i], kept[j]);
    }
    std::vector<SequenceSample> out;
    out.reserve(sample_count);
    for (std::size_t i = 0; i < sample_count; ++i) {
        out.push_back({pool[kept[i]], truth[kept[i]] + noise_sd * normal_unit(rng)});
    }
    return out;
}

// --- serialization ---------------------------------------------------------------

nlohmann::json oracle_to_json(const PropertyOracle& oracle) {
    if (const auto* p = dynamic_cast<const Polynomial1dOracle*>(&oracle)) {
        return {{"kind", "polynomial1d"},
                {"coefficients", p->coefficients()},
                {"sigma2", p->sigma2()},
                {"basis", p->basis() == PolynomialBasis::raw ? "raw" : "saturating"},
                {"center", p->center()},
                {"scale", p->scale()}};
    }
    if (const auto* s = dynamic_cast<const SequenceLinearOracle*>(&oracle)) {
        return {{"kind", "sequence_linear"},
                {"intercept", s->intercept()},
                {"site_coefficients", s->site_coefficients()},
                {"sigma2", s->sigma2()}};
    }
    if (const auto* e = dynamic_cast<const EnsembleOracle*>(&oracle)) {
        nlohmann::json members = nlohmann::json::array();
        for (const auto& m : e->members()) members.push_back(oracle_to_json(m));
        return {{"kind", "ensemble"}, {"members", members}};
    }
    throw std::invalid_argument("oracle_to_json: unknown oracle kind");
}

std::unique_ptr<PropertyOracle> oracle_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "polynomial1d") {
        const auto basis = j.at("basis").get<std::string>() == "raw" ? PolynomialBasis::raw
                                                                     : PolynomialBasis::saturating;
        return std::make_unique<Polynomial1dOracle>(
            j.at("coefficients").get<std::vector<double>>(), j.at("sigma2").get<double>(), basis,
            j.value("center", 0.0), j.value("scale", 1.0));
    }
    if (kind == "sequence_linear") {
        return std::make_unique<SequenceLinearOracle>(
            j.at("intercept").get<double>(),
            j.at("site_coefficients").get<std::vector<std::vector<double>>>(),
            j.at("sigma2").get<double>());
    }
    if (kind == "ensemble") {
        std::vector<SequenceLinearOracle> members;
        for (const auto& mj : j.at("members")) {
            members.emplace_back(mj.at("intercept").get<double>(),
                                 mj.at("site_coefficients").get<std::vector<std::vector<double>>>(),
                                 mj.at("sigma2").get<double>());
        }
        return std::make_unique<EnsembleOracle>(std::move(members));
    }
    throw std::invalid_argument("oracle_from_json: unknown kind '" + kind + "'");
}

}  // namespace cbas
