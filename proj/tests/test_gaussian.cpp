#include <doctest.h>

#include "oga/errors.hpp"
#include "oga/gaussian.hpp"
#include "oga/rng.hpp"

using namespace oga;

namespace {

// Independent double-loop recomputation of centroids and pooled covariance.
std::pair<Matrix, Matrix> naive_fit(const CacheSnapshot& snapshot, int d) {
    const int k = static_cast<int>(snapshot.size());
    Matrix mu = Matrix::Zero(k, d);
    int n = 0;
    for (int c = 0; c < k; ++c) {
        for (Eigen::Index m = 0; m < snapshot[c].rows(); ++m) {
            mu.row(c) += snapshot[c].row(m);
            ++n;
        }
        if (snapshot[c].rows() > 0) mu.row(c) /= static_cast<double>(snapshot[c].rows());
    }
    Matrix sigma = Matrix::Zero(d, d);
    for (int c = 0; c < k; ++c) {
        for (Eigen::Index m = 0; m < snapshot[c].rows(); ++m) {
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) {
                    sigma(a, b) += (snapshot[c](m, a) - mu(c, a)) *
                                   (snapshot[c](m, b) - mu(c, b));
                }
            }
        }
    }
    if (n >= 2) sigma /= static_cast<double>(n - 1);
    return {mu, sigma};
}

CacheSnapshot random_snapshot(Rng& rng, int k, int d, int max_per_class) {
    CacheSnapshot snap(k);
    for (int c = 0; c < k; ++c) {
        const int m = static_cast<int>(rng.below(max_per_class + 1));
        if (m == 0) continue;
        snap[c].resize(m, d);
        for (int i = 0; i < m; ++i) {
            Vector f(d);
            for (int j = 0; j < d; ++j) f[j] = rng.normal();
            snap[c].row(i) = f.normalized().transpose();
        }
    }
    return snap;
}

}  // namespace

TEST_CASE("fit_centroids basics") {
    CacheSnapshot snap(3);
    snap[0].resize(2, 2);
    snap[0] << 1, 0, 0, 1;
    snap[2].resize(1, 2);
    snap[2] << 0, 1;
    const CentroidFit fit = fit_centroids(snap);
    CHECK(fit.present[0]);
    CHECK_FALSE(fit.present[1]);
    CHECK(fit.present[2]);
    CHECK(fit.centroids(0, 0) == doctest::Approx(0.5));
    CHECK(fit.centroids(0, 1) == doctest::Approx(0.5));
    CHECK(fit.centroids(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("fit_covariance: hand-computed K=1 case") {
    CacheSnapshot snap(1);
    snap[0].resize(2, 2);
    snap[0] << 1, 0, 0, 1;
    const CentroidFit fit = fit_centroids(snap);
    const auto [sigma, n] = fit_covariance(snap, fit);
    CHECK(n == 2);
    CHECK(sigma(0, 0) == doctest::Approx(0.5));
    CHECK(sigma(0, 1) == doctest::Approx(-0.5));
    CHECK(sigma(1, 0) == doctest::Approx(-0.5));
    CHECK(sigma(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("fit_covariance: n=1 is degenerate") {
    CacheSnapshot snap(1);
    snap[0].resize(1, 2);
    snap[0] << 1, 0;
    const CentroidFit fit = fit_centroids(snap);
    CHECK_THROWS_AS(fit_covariance(snap, fit), DegenerateCovariance);
}

TEST_CASE("bayes_ridge_precision: identity covariance") {
    // P = d (n I + d I)^-1 = d/(n+d) I
    for (int n : {2, 8, 50}) {
        const Matrix p = bayes_ridge_precision(Matrix::Identity(4, 4), n, 4);
        CHECK(p.isApprox(4.0 / (n + 4) * Matrix::Identity(4, 4), 1e-12));
    }
    const Matrix p8 = bayes_ridge_precision(Matrix::Identity(4, 4), 8, 4);
    CHECK(p8(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("bayes_ridge_precision: diagonal case") {
    Matrix sigma = Matrix::Zero(2, 2);
    sigma(0, 0) = 2.0;
    const Matrix p = bayes_ridge_precision(sigma, 2, 2);
    CHECK(p(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(p(1, 1) == doctest::Approx(1.0));
    CHECK(p(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("bayes_ridge_precision: zero covariance is degenerate") {
    CHECK_THROWS_AS(bayes_ridge_precision(Matrix::Zero(3, 3), 4, 3), DegenerateCovariance);
}

TEST_CASE("select_precision: estimator switch at 4d") {
    const Matrix sigma = 0.1 * Matrix::Identity(4, 4);
    CHECK(select_precision(sigma, 15, 4).second == Estimator::Ridge);
    CHECK(select_precision(sigma, 16, 4).second == Estimator::Inverse);
    CHECK(select_precision(sigma, 2, 4).second == Estimator::Ridge);
    CHECK(select_precision(Matrix(), 0, 4).second == Estimator::IdentityFallback);
    CHECK(select_precision(Matrix::Zero(4, 4), 10, 4).second ==
          Estimator::IdentityFallback);
}

TEST_CASE("select_precision: policy overrides") {
    const Matrix sigma = 0.1 * Matrix::Identity(4, 4);
    CHECK(select_precision(sigma, 100, 4, EstimatorPolicy::RidgeOnly).second ==
          Estimator::Ridge);
    CHECK(select_precision(sigma, 3, 4, EstimatorPolicy::InverseOnly).second ==
          Estimator::Inverse);
}

TEST_CASE("inverse path: P * Sigma == I") {
    Rng rng(77);
    Matrix a(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = rng.normal();
    const Matrix sigma = a * a.transpose() + 0.1 * Matrix::Identity(4, 4);
    const auto [p, used] = select_precision(sigma, 20, 4);
    CHECK(used == Estimator::Inverse);
    CHECK((p * sigma).isApprox(Matrix::Identity(4, 4), 1e-6));
}

TEST_CASE("refit: empty snapshot gives identity fallback with no centroids") {
    const GaussianModel model = refit(CacheSnapshot(3));
    CHECK(model.estimator_used == Estimator::IdentityFallback);
    CHECK_FALSE(model.any_present());
    CHECK(model.n == 0);
}

TEST_CASE("refit: deterministic and matches component operations") {
    CacheSnapshot snap(1);
    snap[0].resize(2, 2);
    snap[0] << 1, 0, 0, 1;
    const GaussianModel m1 = refit(snap);
    const GaussianModel m2 = refit(snap);
    CHECK(m1.covariance == m2.covariance);
    CHECK(m1.precision == m2.precision);
    CHECK(m1.estimator_used == Estimator::Ridge);  // n=2 < 4d=8
    CHECK(m1.n == 2);
    CHECK(m1.covariance(0, 1) == doctest::Approx(-0.5));
}

TEST_CASE("oracle: refit matches naive double-loop recomputation") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(4));
        const int d = 2 + static_cast<int>(rng.below(7));
        const CacheSnapshot snap = random_snapshot(rng, k, d, 6);
        int n = 0;
        for (const auto& m : snap) n += static_cast<int>(m.rows());
        if (n < 2) continue;
        const auto [mu, sigma] = naive_fit(snap, d);
        const GaussianModel model = refit(snap);
        for (int c = 0; c < k; ++c) {
            if (snap[c].rows() == 0) {
                CHECK_FALSE(model.present[c]);
            } else {
                CHECK(model.present[c]);
                CHECK((model.centroids.row(c) - mu.row(c)).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
        CHECK((model.covariance - sigma).cwiseAbs().maxCoeff() < 1e-10);

        // P symmetric and positive definite when not the fallback.
        CHECK((model.precision - model.precision.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        if (model.estimator_used != Estimator::IdentityFallback) {
            for (int probe = 0; probe < 20; ++probe) {
                Vector x(d);
                for (int j = 0; j < d; ++j) x[j] = rng.normal();
                if (x.norm() < 1e-9) continue;
                CHECK(x.dot(model.precision * x) > 0.0);
            }
        }
    }
}
