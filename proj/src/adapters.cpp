#include "oga/adapters.hpp"

#include <cmath>
#include <limits>

#include "oga/errors.hpp"

namespace oga {

Vector log_likelihood_quadratic(const Vector& feature, const GaussianModel& model) {
    const int k = static_cast<int>(model.present.size());
    Vector q = Vector::Zero(k);
    if (!model.any_present()) return q;

    double min_q = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        if (!model.present[c]) continue;
        const Vector diff = feature - model.centroids.row(c).transpose();
        q[c] = -0.5 * diff.dot(model.precision * diff);
        min_q = std::min(min_q, q[c]);
    }
    for (int c = 0; c < k; ++c) {
        if (!model.present[c]) q[c] = min_q;
    }
    return q;
}

Vector map_posterior(const Vector& prior, const Vector& quadratics, double nu) {
    if (prior.size() != quadratics.size()) {
        throw ValidationError("prior and quadratics length mismatch");
    }
    if (nu < 0.0) throw ValidationError("nu must be non-negative");
    if ((prior.array() <= 0.0).all()) {
        throw ValidationError("prior has no positive entry");
    }
    if (nu == 0.0) return prior;  // the rule degenerates to the prior

    const Eigen::Index k = prior.size();
    Vector log_post(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        log_post[c] = prior[c] > 0.0
                          ? nu * quadratics[c] + std::log(prior[c])
                          : -std::numeric_limits<double>::infinity();
    }
    const double m = log_post.maxCoeff();
    Vector post(k);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
        post[c] = std::isinf(log_post[c]) ? 0.0 : std::exp(log_post[c] - m);
        sum += post[c];
    }
    post /= sum;
    return post;
}

AdaptedPrediction oga_predict(const Matrix& batch, const ZeroShotOutput& zs,
                              const GaussianModel& model, const OgaConfig& cfg) {
    if (batch.rows() != zs.probs.rows()) {
        throw ValidationError("batch and zero-shot outputs are not row-aligned");
    }
    const Eigen::Index b = batch.rows();
    const Eigen::Index k = zs.probs.cols();
    AdaptedPrediction pred;
    pred.posterior.resize(b, k);
    pred.predicted.resize(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const Vector q = log_likelihood_quadratic(batch.row(i).transpose(), model);
        const Vector post = map_posterior(zs.probs.row(i).transpose(), q, cfg.nu);
        pred.posterior.row(i) = post.transpose();
        pred.predicted[i] = argmax_row(pred.posterior.row(i));
    }
    return pred;
}

Vector tip_adapter_logits(const Vector& feature, const Vector& zs_logits,
                          const CacheSnapshot& snapshot, const TipAdapterConfig& cfg) {
    if (cfg.beta <= 0.0) throw ValidationError("beta must be positive");
    Vector logits = zs_logits;
    for (std::size_t c = 0; c < snapshot.size(); ++c) {
        const Matrix& cached = snapshot[c];
        if (cached.rows() == 0) continue;
        double affinity = 0.0;
        for (Eigen::Index m = 0; m < cached.rows(); ++m) {
            affinity += std::exp(-cfg.beta * (1.0 - cached.row(m).dot(feature.transpose())));
        }
        logits[static_cast<Eigen::Index>(c)] += cfg.alpha * affinity;
    }
    return logits;
}

AdaptedPrediction tip_adapter_predict(const Matrix& batch, const ZeroShotOutput& zs,
                                      const CacheSnapshot& snapshot,
                                      const TipAdapterConfig& cfg,
                                      double temperature) {
    const Eigen::Index b = batch.rows();
    const Eigen::Index k = zs.logits.cols();
    AdaptedPrediction pred;
    pred.posterior.resize(b, k);
    pred.predicted.resize(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const Vector logits = tip_adapter_logits(batch.row(i).transpose(),
                                                 zs.logits.row(i).transpose(),
                                                 snapshot, cfg);
        pred.posterior.row(i) = softmax(logits, temperature).transpose();
        pred.predicted[i] = argmax_row(pred.posterior.row(i));
    }
    return pred;
}

}  // namespace oga
