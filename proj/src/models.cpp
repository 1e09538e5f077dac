#include "cbas/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbas {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

void check_weights(std::size_t n_samples, std::span<const double> weights) {
    if (n_samples != weights.size()) throw std::invalid_argument("fit_weighted: size mismatch");
    if (n_samples == 0) throw std::invalid_argument("fit_weighted: no samples");
    bool any_positive = false;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("fit_weighted: bad weight");
        any_positive |= (w > 0.0);
    }
    if (!any_positive) throw std::invalid_argument("degenerate weights");
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> from_matrix(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    }
    return rows;
}

}  // namespace

// --- DiagonalGaussianModel ---------------------------------------------------

DiagonalGaussianModel::DiagonalGaussianModel(std::vector<double> mean, std::vector<double> variance,
                                             double variance_floor)
    : mean_(std::move(mean)), variance_(std::move(variance)), variance_floor_(variance_floor) {
    if (mean_.size() != variance_.size() || mean_.empty()) {
        throw std::invalid_argument("DiagonalGaussianModel: bad shape");
    }
    if (!(variance_floor_ > 0.0)) throw std::invalid_argument("variance floor must be > 0");
    for (double& v : variance_) {
        if (!std::isfinite(v)) throw std::invalid_argument("DiagonalGaussianModel: bad variance");
        v = std::max(v, variance_floor_);
    }
}

std::unique_ptr<GenerativeModel> DiagonalGaussianModel::clone() const {
    return std::make_unique<DiagonalGaussianModel>(*this);
}

SampleBatch DiagonalGaussianModel::sample(Rng& rng, std::size_t count) const {
    SampleBatch batch;
    batch.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> x(mean_.size());
        for (std::size_t d = 0; d < mean_.size(); ++d) {
            x[d] = mean_[d] + std::sqrt(variance_[d]) * normal_unit(rng);
        }
        batch.points.push_back(DesignPoint::continuous(std::move(x)));
    }
    return batch;
}

double DiagonalGaussianModel::log_density(const DesignPoint& x) const {
    const auto& v = x.continuous_values();
    if (v.size() != mean_.size()) throw std::invalid_argument("log_density: dimension mismatch");
    double acc = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) {
        const double r = v[d] - mean_[d];
        acc += -0.5 * (kLog2Pi + std::log(variance_[d])) - r * r / (2.0 * variance_[d]);
    }
    return acc;
}

std::unique_ptr<GenerativeModel> DiagonalGaussianModel::fit_weighted(
    const SampleBatch& batch, std::span<const double> weights) const {
    return std::make_unique<DiagonalGaussianModel>(
        gaussian_fit_weighted(batch.points, weights, variance_floor_));
}

DiagonalGaussianModel gaussian_fit_weighted(std::span<const DesignPoint> samples,
                                            std::span<const double> weights,
                                            double variance_floor) {
    check_weights(samples.size(), weights);
    const std::size_t dim = samples.front().dimension();
    double wsum = 0.0;
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& v = samples[i].continuous_values();
        if (v.size() != dim) throw std::invalid_argument("fit_weighted: dimension mismatch");
        wsum += weights[i];
        for (std::size_t d = 0; d < dim; ++d) mean[d] += weights[i] * v[d];
    }
    for (double& m : mean) m /= wsum;
    std::vector<double> variance(dim, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& v = samples[i].continuous_values();
        for (std::size_t d = 0; d < dim; ++d) {
            const double r = v[d] - mean[d];
            variance[d] += weights[i] * r * r;
        }
    }
    for (double& s : variance) s /= wsum;
    return DiagonalGaussianModel(std::move(mean), std::move(variance), variance_floor);
}

// --- ProductCategoricalModel -------------------------------------------------

ProductCategoricalModel::ProductCategoricalModel(std::vector<std::vector<double>> probs,
                                                 double refit_smoothing)
    : probs_(std::move(probs)), refit_smoothing_(refit_smoothing) {
    if (probs_.empty()) throw std::invalid_argument("ProductCategoricalModel: empty");
    const std::size_t a = probs_.front().size();
    if (a < 2) throw std::invalid_argument("ProductCategoricalModel: alphabet too small");
    for (const auto& row : probs_) {
        if (row.size() != a) throw std::invalid_argument("ProductCategoricalModel: ragged rows");
        double s = 0.0;
        for (double p : row) {
            if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("bad probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("row does not sum to 1");
    }
}

std::unique_ptr<GenerativeModel> ProductCategoricalModel::clone() const {
    return std::make_unique<ProductCategoricalModel>(*this);
}

SampleBatch ProductCategoricalModel::sample(Rng& rng, std::size_t count) const {
    SampleBatch batch;
    batch.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<int> seq(length());
        for (std::size_t l = 0; l < length(); ++l) {
            const double u = uniform_unit(rng);
            double acc = 0.0;
            int pick = static_cast<int>(alphabet()) - 1;
            for (std::size_t a = 0; a < alphabet(); ++a) {
                acc += probs_[l][a];
                if (u < acc) {
                    pick = static_cast<int>(a);
                    break;
                }
            }
            seq[l] = pick;
        }
        batch.points.push_back(DesignPoint::sequence(std::move(seq)));
    }
    return batch;
}

double ProductCategoricalModel::log_density(const DesignPoint& x) const {
    const auto& seq = x.sequence_values();
    if (seq.size() != length()) throw std::invalid_argument("log_density: length mismatch");
    double acc = 0.0;
    for (std::size_t l = 0; l < seq.size(); ++l) {
        if (seq[l] < 0 || static_cast<std::size_t>(seq[l]) >= alphabet()) {
            throw std::invalid_argument("log_density: symbol outside alphabet");
        }
        acc += std::log(probs_[l][static_cast<std::size_t>(seq[l])]);
    }
    return acc;
}

std::unique_ptr<GenerativeModel> ProductCategoricalModel::fit_weighted(
    const SampleBatch& batch, std::span<const double> weights) const {
    return std::make_unique<ProductCategoricalModel>(categorical_fit_weighted(
        batch.points, weights, refit_smoothing_, alphabet(), refit_smoothing_));
}

ProductCategoricalModel categorical_fit_weighted(std::span<const DesignPoint> samples,
                                                 std::span<const double> weights, double smoothing,
                                                 std::size_t alphabet, double refit_smoothing) {
    if (smoothing < 0.0) throw std::invalid_argument("smoothing must be >= 0");
    if (smoothing == 0.0) {
        check_weights(samples.size(), weights);
    } else if (samples.size() != weights.size() || samples.empty()) {
        throw std::invalid_argument("fit_weighted: size mismatch");
    }
    const std::size_t length = samples.front().dimension();
    std::vector<std::vector<double>> counts(length, std::vector<double>(alphabet, smoothing));
    double wsum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& seq = samples[i].sequence_values();
        if (seq.size() != length) throw std::invalid_argument("fit_weighted: length mismatch");
        wsum += weights[i];
        for (std::size_t l = 0; l < length; ++l) {
            if (seq[l] < 0 || static_cast<std::size_t>(seq[l]) >= alphabet) {
                throw std::invalid_argument("fit_weighted: symbol outside alphabet");
            }
            counts[l][static_cast<std::size_t>(seq[l])] += weights[i];
        }
    }
    const double denom = static_cast<double>(alphabet) * smoothing + wsum;
    if (denom <= 0.0) throw std::invalid_argument("degenerate weights");
    for (auto& row : counts) {
        for (double& c : row) c /= denom;
        // renormalize away accumulated rounding so rows satisfy the simplex invariant
        const double s = std::accumulate(row.begin(), row.end(), 0.0);
        for (double& c : row) c /= s;
    }
    return ProductCategoricalModel(std::move(counts), refit_smoothing);
}

// --- LinearGaussianLatentModel ------------------------------------------------

LinearGaussianLatentModel::LinearGaussianLatentModel(std::vector<std::vector<double>> loading,
                                                     std::vector<double> bias,
                                                     double noise_variance, double variance_floor)
    : loading_(std::move(loading)),
      bias_(std::move(bias)),
      noise_variance_(noise_variance),
      variance_floor_(variance_floor) {
    if (loading_.size() != bias_.size() || loading_.empty()) {
        throw std::invalid_argument("LinearGaussianLatentModel: bad shape");
    }
    const std::size_t d = loading_.front().size();
    if (d == 0 || d > bias_.size()) {
        throw std::invalid_argument("LinearGaussianLatentModel: latent dimension out of range");
    }
    for (const auto& row : loading_) {
        if (row.size() != d) throw std::invalid_argument("LinearGaussianLatentModel: ragged loading");
    }
    if (!std::isfinite(noise_variance_)) throw std::invalid_argument("bad noise variance");
    noise_variance_ = std::max(noise_variance_, variance_floor_);
}

std::unique_ptr<GenerativeModel> LinearGaussianLatentModel::clone() const {
    return std::make_unique<LinearGaussianLatentModel>(*this);
}

SampleBatch LinearGaussianLatentModel::sample(Rng& rng, std::size_t count) const {
    const std::size_t L = observed_dimension();
    const std::size_t d = latent_dimension();
    SampleBatch batch;
    batch.points.reserve(count);
    batch.latents.reserve(count);
    const double sd = std::sqrt(noise_variance_);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> z(d);
        for (double& zi : z) zi = normal_unit(rng);
        std::vector<double> x(L);
        for (std::size_t l = 0; l < L; ++l) {
            double m = bias_[l];
            for (std::size_t k = 0; k < d; ++k) m += loading_[l][k] * z[k];
            x[l] = m + sd * normal_unit(rng);
        }
        batch.points.push_back(DesignPoint::continuous(std::move(x)));
        batch.latents.push_back(std::move(z));
    }
    return batch;
}

double LinearGaussianLatentModel::log_density(const DesignPoint& x) const {
    const auto& v = x.continuous_values();
    const auto L = static_cast<Eigen::Index>(observed_dimension());
    if (static_cast<Eigen::Index>(v.size()) != L) {
        throw std::invalid_argument("log_density: dimension mismatch");
    }
    Eigen::MatrixXd W = to_matrix(loading_);
    Eigen::MatrixXd cov = W * W.transpose();
    cov.diagonal().array() += noise_variance_;
    Eigen::VectorXd r(L);
    for (Eigen::Index i = 0; i < L; ++i) r(i) = v[static_cast<std::size_t>(i)] - bias_[static_cast<std::size_t>(i)];
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("marginal covariance not SPD");
    const Eigen::VectorXd alpha = llt.solve(r);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < L; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (static_cast<double>(L) * kLog2Pi + logdet + r.dot(alpha));
}

double LinearGaussianLatentModel::log_conditional_density(const DesignPoint& x,
                                                          std::span<const double> z) const {
    const auto& v = x.continuous_values();
    const std::size_t L = observed_dimension();
    const std::size_t d = latent_dimension();
    if (v.size() != L || z.size() != d) {
        throw std::invalid_argument("log_conditional_density: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        double m = bias_[l];
        for (std::size_t k = 0; k < d; ++k) m += loading_[l][k] * z[k];
        const double r = v[l] - m;
        acc += -0.5 * (kLog2Pi + std::log(noise_variance_)) - r * r / (2.0 * noise_variance_);
    }
    return acc;
}

double LinearGaussianLatentModel::log_joint_density(const DesignPoint& x,
                                                    std::span<const double> z) const {
    double prior = 0.0;
    for (double zi : z) prior += -0.5 * (kLog2Pi + zi * zi);
    return prior + log_conditional_density(x, z);
}

std::unique_ptr<GenerativeModel> LinearGaussianLatentModel::fit_weighted(
    const SampleBatch& batch, std::span<const double> weights) const {
    LinearGaussianFitOptions opts;
    opts.variance_floor = variance_floor_;
    opts.warm_start = this;
    auto result = linear_gaussian_fit_weighted(batch.points, weights, latent_dimension(), opts);
    return std::make_unique<LinearGaussianLatentModel>(std::move(result.model));
}

LatentPosterior LinearGaussianLatentModel::exact_posterior(const DesignPoint& x) const {
    const auto& v = x.continuous_values();
    const auto L = static_cast<Eigen::Index>(observed_dimension());
    const auto d = static_cast<Eigen::Index>(latent_dimension());
    Eigen::MatrixXd W = to_matrix(loading_);
    Eigen::MatrixXd M = W.transpose() * W;
    M.diagonal().array() += noise_variance_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    Eigen::VectorXd r(L);
    for (Eigen::Index i = 0; i < L; ++i) r(i) = v[static_cast<std::size_t>(i)] - bias_[static_cast<std::size_t>(i)];
    const Eigen::VectorXd mean = ldlt.solve(W.transpose() * r);
    const Eigen::MatrixXd cov = noise_variance_ * ldlt.solve(Eigen::MatrixXd::Identity(d, d));
    LatentPosterior post;
    post.mean.assign(mean.data(), mean.data() + d);
    post.covariance.resize(static_cast<std::size_t>(d * d));
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            post.covariance[static_cast<std::size_t>(i * d + j)] = cov(i, j);
        }
    }
    return post;
}

double LinearGaussianLatentModel::elbo(const DesignPoint& x, const LatentPosterior& q) const {
    const auto& v = x.continuous_values();
    const auto L = static_cast<Eigen::Index>(observed_dimension());
    const auto d = static_cast<Eigen::Index>(latent_dimension());
    Eigen::VectorXd m(d);
    Eigen::MatrixXd S(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        m(i) = q.mean[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) S(i, j) = q.covariance[static_cast<std::size_t>(i * d + j)];
    }
    Eigen::MatrixXd W = to_matrix(loading_);
    Eigen::VectorXd r(L);
    for (Eigen::Index i = 0; i < L; ++i) r(i) = v[static_cast<std::size_t>(i)] - bias_[static_cast<std::size_t>(i)];
    // E_q[log p(x|z)]
    const Eigen::VectorXd resid = r - W * m;
    const double quad = resid.squaredNorm() + (W * S * W.transpose()).trace();
    const double expected_loglik =
        -0.5 * static_cast<double>(L) * (kLog2Pi + std::log(noise_variance_)) -
        quad / (2.0 * noise_variance_);
    // KL(q || N(0, I))
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    const double kl = 0.5 * (S.trace() + m.squaredNorm() - static_cast<double>(d) - logdet);
    return expected_loglik - kl;
}

std::vector<double> LinearGaussianLatentModel::marginal_covariance() const {
    Eigen::MatrixXd W = to_matrix(loading_);
    Eigen::MatrixXd cov = W * W.transpose();
    cov.diagonal().array() += noise_variance_;
    std::vector<double> out(static_cast<std::size_t>(cov.rows() * cov.cols()));
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < cov.cols(); ++j) {
            out[static_cast<std::size_t>(i * cov.cols() + j)] = cov(i, j);
        }
    }
    return out;
}

LinearGaussianFitResult linear_gaussian_fit_weighted(std::span<const DesignPoint> samples,
                                                     std::span<const double> weights,
                                                     std::size_t latent_dim,
                                                     const LinearGaussianFitOptions& options) {
    check_weights(samples.size(), weights);
    const auto L = static_cast<Eigen::Index>(samples.front().dimension());
    const auto d = static_cast<Eigen::Index>(latent_dim);
    if (d == 0 || d > L) throw std::invalid_argument("latent_dim out of range");

    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd X(n, L);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = samples[static_cast<std::size_t>(i)].continuous_values();
        if (static_cast<Eigen::Index>(v.size()) != L) {
            throw std::invalid_argument("fit_weighted: dimension mismatch");
        }
        for (Eigen::Index j = 0; j < L; ++j) X(i, j) = v[static_cast<std::size_t>(j)];
        w(i) = weights[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd wn = w / w.sum();

    Eigen::MatrixXd W;
    Eigen::VectorXd b;
    double sigma2;
    if (options.warm_start != nullptr &&
        static_cast<Eigen::Index>(options.warm_start->observed_dimension()) == L &&
        static_cast<Eigen::Index>(options.warm_start->latent_dimension()) == d) {
        W = to_matrix(options.warm_start->loading());
        b = Eigen::Map<const Eigen::VectorXd>(options.warm_start->bias().data(), L);
        sigma2 = options.warm_start->noise_variance();
    } else {
        b = X.transpose() * wn;
        W = Eigen::MatrixXd::Identity(L, d);
        Eigen::VectorXd var = ((X.rowwise() - b.transpose()).array().square().matrix().transpose() * wn);
        sigma2 = std::max(var.mean(), options.variance_floor);
    }

    auto make_model = [&](const Eigen::MatrixXd& Wm, const Eigen::VectorXd& bm, double s2) {
        std::vector<double> bias(bm.data(), bm.data() + L);
        return LinearGaussianLatentModel(from_matrix(Wm), std::move(bias), s2,
                                         options.variance_floor);
    };

    auto loglik = [&](const LinearGaussianLatentModel& m) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (w(i) > 0.0) acc += w(i) * m.log_density(samples[static_cast<std::size_t>(i)]);
        }
        return acc;
    };

    LinearGaussianFitResult result{make_model(W, b, sigma2), {}, 0};
    result.loglik_trace.push_back(loglik(result.model));

    for (std::size_t iter = 0; iter < options.max_em_iters; ++iter) {
        // E step
        Eigen::MatrixXd M = W.transpose() * W;
        M.diagonal().array() += sigma2;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        const Eigen::MatrixXd R = (X.rowwise() - b.transpose());
        const Eigen::MatrixXd Ez = ldlt.solve(W.transpose() * R.transpose()).transpose();  // n x d
        const Eigen::MatrixXd Sz = sigma2 * ldlt.solve(Eigen::MatrixXd::Identity(d, d));

        // M step on the augmented latent [z; 1]
        Eigen::MatrixXd Ezt(n, d + 1);
        Ezt.leftCols(d) = Ez;
        Ezt.col(d).setOnes();
        Eigen::MatrixXd A = X.transpose() * wn.asDiagonal() * Ezt;        // L x (d+1)
        Eigen::MatrixXd B = Ezt.transpose() * wn.asDiagonal() * Ezt;      // (d+1) x (d+1)
        B.topLeftCorner(d, d) += Sz;  // sum_i w_i (Sz + Ez Ez^T) expands to this plus the product term
        Eigen::MatrixXd Wt = B.ldlt().solve(A.transpose()).transpose();   // L x (d+1)
        const Eigen::MatrixXd W_new = Wt.leftCols(d);
        const Eigen::VectorXd b_new = Wt.col(d);

        // residual part plus the posterior-covariance trace (weights sum to 1)
        const Eigen::MatrixXd pred = Ezt * Wt.transpose();  // n x L
        double quad = ((X - pred).array().square().matrix().transpose() * wn).sum();
        quad += (W_new * Sz * W_new.transpose()).trace();
        const double sigma2_new = std::max(quad / static_cast<double>(L), options.variance_floor);

        W = W_new;
        b = b_new;
        sigma2 = sigma2_new;
        result.model = make_model(W, b, sigma2);
        result.loglik_trace.push_back(loglik(result.model));
        result.iterations = iter + 1;

        const std::size_t k = result.loglik_trace.size();
        if (k >= 2 && std::abs(result.loglik_trace[k - 1] - result.loglik_trace[k - 2]) <
                          options.tolerance * (1.0 + std::abs(result.loglik_trace[k - 2]))) {
            return result;
        }
    }
    throw EmConvergenceError("weighted EM did not converge", result.model);
}

// --- serialization ------------------------------------------------------------

nlohmann::json model_to_json(const GenerativeModel& model) {
    if (const auto* g = dynamic_cast<const DiagonalGaussianModel*>(&model)) {
        return {{"kind", "gaussian"}, {"mean", g->mean()}, {"variance", g->variance()}};
    }
    if (const auto* c = dynamic_cast<const ProductCategoricalModel*>(&model)) {
        return {{"kind", "categorical"}, {"probs", c->probs()}};
    }
    if (const auto* l = dynamic_cast<const LinearGaussianLatentModel*>(&model)) {
        return {{"kind", "linear_gaussian"},
                {"loading", l->loading()},
                {"bias", l->bias()},
                {"noise_variance", l->noise_variance()}};
    }
    throw std::invalid_argument("model_to_json: unknown model kind");
}

std::unique_ptr<GenerativeModel> model_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
        return std::make_unique<DiagonalGaussianModel>(j.at("mean").get<std::vector<double>>(),
                                                       j.at("variance").get<std::vector<double>>());
    }
    if (kind == "categorical") {
        return std::make_unique<ProductCategoricalModel>(
            j.at("probs").get<std::vector<std::vector<double>>>());
    }
    if (kind == "linear_gaussian") {
        return std::make_unique<LinearGaussianLatentModel>(
            j.at("loading").get<std::vector<std::vector<double>>>(),
            j.at("bias").get<std::vector<double>>(), j.at("noise_variance").get<double>());
    }
    throw std::invalid_argument("model_from_json: unknown kind '" + kind + "'");
}

std::unique_ptr<GenerativeModel> blend_models(const GenerativeModel& previous,
                                              const GenerativeModel& fitted, double keep) {
    if (keep <= 0.0) return fitted.clone();
    if (keep >= 1.0) return previous.clone();
    if (const auto* p = dynamic_cast<const DiagonalGaussianModel*>(&previous)) {
        const auto& f = dynamic_cast<const DiagonalGaussianModel&>(fitted);
        std::vector<double> mean(p->mean().size());
        std::vector<double> var(p->variance().size());
        for (std::size_t d = 0; d < mean.size(); ++d) {
            mean[d] = keep * p->mean()[d] + (1.0 - keep) * f.mean()[d];
            var[d] = keep * p->variance()[d] + (1.0 - keep) * f.variance()[d];
        }
        return std::make_unique<DiagonalGaussianModel>(std::move(mean), std::move(var),
                                                       p->variance_floor());
    }
    if (const auto* p = dynamic_cast<const ProductCategoricalModel*>(&previous)) {
        const auto& f = dynamic_cast<const ProductCategoricalModel&>(fitted);
        auto probs = p->probs();
        for (std::size_t l = 0; l < probs.size(); ++l) {
            for (std::size_t a = 0; a < probs[l].size(); ++a) {
                probs[l][a] = keep * probs[l][a] + (1.0 - keep) * f.probs()[l][a];
            }
        }
        return std::make_unique<ProductCategoricalModel>(std::move(probs), p->refit_smoothing());
    }
    // latent models refit exactly
    return fitted.clone();
}

}  // namespace cbas
