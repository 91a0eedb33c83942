#pragma once

#include <utility>
#include <vector>

#include "oga/cache.hpp"
#include "oga/data.hpp"

namespace oga {

enum class Estimator { Ridge, Inverse, IdentityFallback };

enum class EstimatorPolicy { Auto4d, RidgeOnly, InverseOnly };

struct CentroidFit {
    Matrix centroids;           // K x d; rows for absent classes are zero
    std::vector<bool> present;  // per-class presence flags
};

// Immutable once built; shareable across threads.
struct GaussianModel {
    Matrix centroids;           // K x d
    std::vector<bool> present;
    Matrix covariance;          // d x d, pooled
    Matrix precision;           // d x d
    int n = 0;                  // total cached samples
    Estimator estimator_used = Estimator::IdentityFallback;

    bool any_present() const {
        for (bool p : present)
            if (p) return true;
        return false;
    }
};

CentroidFit fit_centroids(const CacheSnapshot& snapshot);

// Pooled covariance: deviations taken against each sample's own class
// centroid, 1/(n-1) normalization. Throws DegenerateCovariance for n < 2.
std::pair<Matrix, int> fit_covariance(const CacheSnapshot& snapshot,
                                      const CentroidFit& centroids);

// Shrinkage precision P = d * (n*Sigma + tr(Sigma)*I)^(-1).
Matrix bayes_ridge_precision(const Matrix& sigma, int n, int d);

// Estimator switch: identity fallback below n=2 or on degenerate Sigma,
// ridge for 2 <= n < 4d, plain inverse (jittered PD solve) for n >= 4d.
std::pair<Matrix, Estimator> select_precision(
    const Matrix& sigma, int n, int d,
    EstimatorPolicy policy = EstimatorPolicy::Auto4d);

GaussianModel refit(const CacheSnapshot& snapshot,
                    EstimatorPolicy policy = EstimatorPolicy::Auto4d);

}  // namespace oga
