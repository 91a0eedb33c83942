#include "oga/gaussian.hpp"

#include <Eigen/Cholesky>

#include "oga/errors.hpp"

namespace oga {

namespace {

Matrix symmetrize(Matrix m) {
    return (m + m.transpose()) / 2.0;
}

// Symmetric PD inverse with escalating diagonal jitter before giving up.
Matrix pd_inverse(const Matrix& sigma) {
    const Eigen::Index d = sigma.rows();
    const Matrix identity = Matrix::Identity(d, d);
    double jitter = 0.0;
    const double base = 1e-8 * sigma.trace() / static_cast<double>(d);
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::LLT<Matrix> llt(sigma + jitter * identity);
        if (llt.info() == Eigen::Success) {
            return symmetrize(llt.solve(identity));
        }
        jitter = jitter == 0.0 ? base : jitter * 10.0;
    }
    throw NumericsError("covariance inversion failed after jitter escalation");
}

}  // namespace

CentroidFit fit_centroids(const CacheSnapshot& snapshot) {
    CentroidFit fit;
    const int k = static_cast<int>(snapshot.size());
    fit.present.assign(k, false);
    Eigen::Index d = 0;
    for (const auto& m : snapshot) {
        if (m.rows() > 0) {
            d = m.cols();
            break;
        }
    }
    fit.centroids = Matrix::Zero(k, d);
    for (int c = 0; c < k; ++c) {
        if (snapshot[c].rows() == 0) continue;
        fit.centroids.row(c) = snapshot[c].colwise().mean();
        fit.present[c] = true;
    }
    return fit;
}

std::pair<Matrix, int> fit_covariance(const CacheSnapshot& snapshot,
                                      const CentroidFit& centroids) {
    int n = 0;
    for (const auto& m : snapshot) n += static_cast<int>(m.rows());
    if (n < 2) {
        throw DegenerateCovariance("pooled covariance needs at least 2 samples, have " +
                                   std::to_string(n));
    }
    const Eigen::Index d = centroids.centroids.cols();
    Matrix sigma = Matrix::Zero(d, d);
    for (std::size_t c = 0; c < snapshot.size(); ++c) {
        const Matrix& samples = snapshot[c];
        if (samples.rows() == 0) continue;
        const Matrix centered =
            samples.rowwise() - centroids.centroids.row(static_cast<Eigen::Index>(c));
        sigma.noalias() += centered.transpose() * centered;
    }
    sigma /= static_cast<double>(n - 1);
    return {symmetrize(std::move(sigma)), n};
}

Matrix bayes_ridge_precision(const Matrix& sigma, int n, int d) {
    if (n < 2) {
        throw DegenerateCovariance("Bayes-Ridge estimator needs n >= 2");
    }
    const double trace = sigma.trace();
    if (trace <= 0.0) {
        throw DegenerateCovariance("Bayes-Ridge estimator needs positive trace");
    }
    const Matrix shrunk =
        static_cast<double>(n) * sigma + trace * Matrix::Identity(d, d);
    Eigen::LLT<Matrix> llt(shrunk);
    if (llt.info() != Eigen::Success) {
        throw NumericsError("Bayes-Ridge factorization failed");
    }
    return symmetrize(static_cast<double>(d) * llt.solve(Matrix::Identity(d, d)));
}

std::pair<Matrix, Estimator> select_precision(const Matrix& sigma, int n, int d,
                                              EstimatorPolicy policy) {
    if (n < 2 || sigma.rows() != d || sigma.trace() <= 0.0) {
        return {Matrix::Identity(d, d), Estimator::IdentityFallback};
    }
    const bool use_inverse = policy == EstimatorPolicy::InverseOnly ||
                             (policy == EstimatorPolicy::Auto4d && n >= 4 * d);
    try {
        if (use_inverse) {
            return {pd_inverse(sigma), Estimator::Inverse};
        }
        return {bayes_ridge_precision(sigma, n, d), Estimator::Ridge};
    } catch (const DegenerateCovariance&) {
        return {Matrix::Identity(d, d), Estimator::IdentityFallback};
    }
}

GaussianModel refit(const CacheSnapshot& snapshot, EstimatorPolicy policy) {
    GaussianModel model;
    CentroidFit fit = fit_centroids(snapshot);
    const int d = static_cast<int>(fit.centroids.cols());
    model.present = fit.present;

    int n = 0;
    for (const auto& m : snapshot) n += static_cast<int>(m.rows());
    model.n = n;

    if (d == 0) {
        // Empty snapshot: no centroids, nothing to estimate.
        model.estimator_used = Estimator::IdentityFallback;
        model.centroids = std::move(fit.centroids);
        return model;
    }

    try {
        auto [sigma, fitted_n] = fit_covariance(snapshot, fit);
        model.covariance = std::move(sigma);
        auto [precision, used] = select_precision(model.covariance, fitted_n, d, policy);
        model.precision = std::move(precision);
        model.estimator_used = used;
    } catch (const DegenerateCovariance&) {
        model.covariance = Matrix::Zero(d, d);
        model.precision = Matrix::Identity(d, d);
        model.estimator_used = Estimator::IdentityFallback;
    }
    model.centroids = std::move(fit.centroids);
    return model;
}

}  // namespace oga
