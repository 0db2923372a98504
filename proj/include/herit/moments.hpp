#pragma once

#include <cmath>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"

namespace herit {

struct MomentStatistics {
    double m1_hat = 0.0;
    double m2_hat = 0.0;
    double sigma2_tilde = 0.0;
    double tau2_tilde = 0.0;
};

// Spectral-moment statistics of S = X^T X / n computed through the n x n
// Gram matrix XX^T: tr(S) = tr(XX^T)/n, tr(S^2) = ||XX^T||_F^2 / n^2 and
// ||X^T y||^2 = y^T (XX^T) y, so the p x p matrix S is never formed.
inline MomentStatistics moment_statistics(const Mat& X, const Vec& y) {
    const double n = double(X.rows());
    const double p = double(X.cols());
    Mat gram = X * X.transpose();

    MomentStatistics ms;
    const double tr_s = gram.trace() / n;
    ms.m1_hat = tr_s / p;
    const double tr_s2 = gram.squaredNorm() / (n * n);
    ms.m2_hat = tr_s2 / p - (p / n) * ms.m1_hat * ms.m1_hat;
    if (!(ms.m2_hat > 0.0))
        throw EstimatorFailed("moment: ill-conditioned spectrum (m2_hat <= 0)");

    const double y2n = y.squaredNorm() / n;
    const double xty2 = y.dot(gram * y);
    const double c = p * ms.m1_hat * ms.m1_hat / ((n + 1.0) * ms.m2_hat);
    const double d = ms.m1_hat / (n * (n + 1.0) * ms.m2_hat);
    ms.sigma2_tilde = (1.0 + c) * y2n - d * xty2;
    ms.tau2_tilde = -c * y2n + d * xty2;
    return ms;
}

// Method-of-moments estimator. The published interval is fixed-width
// (|log(1/2)| * sqrt(p) / n) and does not depend on alpha; alpha is accepted
// for interface symmetry only.
inline HeritabilityEstimate moment_heritability(const GenotypeMatrix& G, const PhenotypeVector& y,
                                                double /*alpha*/ = 0.05) {
    require_centered(G, "moment_heritability");
    if (!y.mean_removed) throw DataError("moment_heritability: phenotype must be centered");
    MomentStatistics ms = moment_statistics(G.entries, y.values);
    const double total = ms.sigma2_tilde + ms.tau2_tilde;
    if (!(total > 0.0)) throw EstimatorFailed("moment: sigma2 + tau2 <= 0");
    const double raw = ms.tau2_tilde / total;

    HeritabilityEstimate est;
    est.method = Method::Moment;
    est.h2 = clamp01(raw);
    const double half = std::log(2.0) * std::sqrt(double(G.p())) / double(G.n());
    est.interval = symmetric_interval(est.h2, half, IntervalKind::Confidence);
    est.diagnostics["h2_raw"] = raw;
    est.diagnostics["m1_hat"] = ms.m1_hat;
    est.diagnostics["m2_hat"] = ms.m2_hat;
    est.diagnostics["sigma2_tilde"] = ms.sigma2_tilde;
    est.diagnostics["tau2_tilde"] = ms.tau2_tilde;
    return est;
}

}  // namespace herit
