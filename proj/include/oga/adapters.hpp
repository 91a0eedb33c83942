#pragma once

#include "oga/cache.hpp"
#include "oga/data.hpp"
#include "oga/gaussian.hpp"
#include "oga/zeroshot.hpp"

namespace oga {

struct OgaConfig {
    double nu = 0.05;
};

struct TipAdapterConfig {
    double alpha = 2.0;
    double beta = 5.0;
};

struct AdaptedPrediction {
    Matrix posterior;           // B x K, rows sum to 1
    Eigen::VectorXi predicted;  // argmax, lowest-index ties
};

// Log-likelihood up to the class-independent normalizer:
// q_k = -1/2 (f - mu_k)' P (f - mu_k). Classes without a centroid receive
// the minimum q over present classes so the Gaussian term never favors a
// class with zero cache evidence.
Vector log_likelihood_quadratic(const Vector& feature, const GaussianModel& model);

// posterior_k proportional to exp(nu * q_k) * prior_k, normalized in
// log-domain. Equals the full-density MAP rule because the shared-covariance
// normalizer cancels.
Vector map_posterior(const Vector& prior, const Vector& quadratics, double nu);

AdaptedPrediction oga_predict(const Matrix& batch, const ZeroShotOutput& zs,
                              const GaussianModel& model, const OgaConfig& cfg);

// Tip-Adapter / TDA positive-cache logit fusion:
// l_k = zs_logit_k + alpha * sum_m exp(-beta * (1 - f . f_m^(k))).
Vector tip_adapter_logits(const Vector& feature, const Vector& zs_logits,
                          const CacheSnapshot& snapshot, const TipAdapterConfig& cfg);

AdaptedPrediction tip_adapter_predict(const Matrix& batch, const ZeroShotOutput& zs,
                                      const CacheSnapshot& snapshot,
                                      const TipAdapterConfig& cfg,
                                      double temperature);

}  // namespace oga
