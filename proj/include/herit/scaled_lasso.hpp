#pragma once

#include <cmath>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/elastic_net.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"
#include "herit/stats.hpp"

namespace herit {

struct ScaledLassoFit {
    EffectVector beta;
    double sigma_hat = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline double scaled_lasso_default_lambda(Eigen::Index n, Eigen::Index p) {
    return std::sqrt(2.0 * std::log(double(p)) / double(n));
}

// Square-root lasso via alternating minimization: for fixed sigma the beta
// step is a lasso with penalty lambda0 * sigma, and the sigma step is the
// stationary point sigma = ||y - X beta|| / sqrt(n).
inline ScaledLassoFit scaled_lasso(const Mat& X, const Vec& y, double lambda0 = -1.0,
                                   double tol = 1e-6, int max_outer = 100) {
    const Eigen::Index n = X.rows();
    if (y.size() != n) throw DataError("scaled_lasso: dimension mismatch");
    if (lambda0 <= 0.0) lambda0 = scaled_lasso_default_lambda(n, X.cols());

    ScaledLassoFit fit;
    double sigma = std::sqrt(y.squaredNorm() / double(n));
    if (!(sigma > 0.0)) throw DataError("scaled_lasso: zero phenotype");
    Vec beta = Vec::Zero(X.cols());
    Vec colsq = detail::column_squared_norms(X);
    for (int it = 0; it < max_outer; ++it) {
        detail::coordinate_descent(X, y, lambda0 * sigma, 1.0, beta, colsq, 1e-7, 100000);
        const double sigma_new = (y - X * beta).norm() / std::sqrt(double(n));
        if (!(sigma_new > 1e-12 * std::sqrt(y.squaredNorm() / double(n))))
            throw EstimatorFailed("scaled_lasso: degenerate fit (sigma collapsed to zero)");
        fit.iterations = it + 1;
        const bool done = std::abs(sigma_new - sigma) <= tol * sigma;
        sigma = sigma_new;
        if (done) {
            fit.converged = true;
            break;
        }
    }
    fit.beta.values = beta;
    fit.sigma_hat = sigma;
    return fit;
}

inline ScaledLassoFit scaled_lasso(const GenotypeMatrix& G, const PhenotypeVector& y,
                                   double lambda0 = -1.0) {
    require_centered(G, "scaled_lasso");
    if (!y.mean_removed) throw DataError("scaled_lasso: phenotype must be centered");
    return scaled_lasso(G.entries, y.values, lambda0);
}

// Noise-variance plug-in with the honest (wide, guaranteed-coverage)
// interval; k is the selected-support size.
inline HeritabilityEstimate slasso_heritability(const GenotypeMatrix& G, const PhenotypeVector& y,
                                                double /*alpha*/ = 0.05, double lambda0 = -1.0) {
    require_centered(G, "slasso_heritability");
    if (!y.mean_removed) throw DataError("slasso_heritability: phenotype must be centered");
    ScaledLassoFit fit = scaled_lasso(G.entries, y.values, lambda0);

    const double var_y = phenotypic_variance(y, VarianceKind::Unbiased);
    const double raw = 1.0 - fit.sigma_hat * fit.sigma_hat / var_y;
    const int k = fit.beta.support_size();
    const double n = double(G.n()), p = double(G.p());
    const double half = std::log(2.0) * (double(k) * std::sqrt(p) / n + 1.0 / std::sqrt(n));

    HeritabilityEstimate est;
    est.method = Method::SLasso;
    est.h2 = clamp01(raw);
    est.interval = symmetric_interval(est.h2, half, IntervalKind::Honest);
    est.diagnostics["h2_raw"] = raw;
    est.diagnostics["sigma_hat"] = fit.sigma_hat;
    est.diagnostics["support_size"] = double(k);
    est.diagnostics["solver_iterations"] = double(fit.iterations);
    est.diagnostics["converged"] = fit.converged ? 1.0 : 0.0;
    est.diagnostics["ci_half_width"] = half;
    return est;
}

}  // namespace herit
