#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"

namespace herit {

struct PenaltySpec {
    double alpha_mix = 0.01;  // 1 = lasso, 0 = ridge
    double lambda = -1.0;     // < 0 means "choose by cross-validation"
    int cv_folds = 10;
};

struct EnetFit {
    EffectVector beta;
    int sweeps = 0;
    double kkt_residual = 0.0;
};

inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

inline double elastic_net_objective(const Mat& X, const Vec& y, const Vec& beta, double lambda,
                                    double alpha) {
    const double n = double(X.rows());
    const double fit = (y - X * beta).squaredNorm() / (2.0 * n);
    const double pen =
        lambda * ((1.0 - alpha) / 2.0 * beta.squaredNorm() + alpha * beta.lpNorm<1>());
    return fit + pen;
}

// Max over coordinates of the subgradient-condition violation.
inline double enet_kkt_residual(const Mat& X, const Vec& y, const Vec& beta, double lambda,
                                double alpha) {
    const double n = double(X.rows());
    Vec g = X.transpose() * (y - X * beta) / n;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        double r;
        if (beta[j] != 0.0)
            r = std::abs(g[j] - lambda * (1.0 - alpha) * beta[j] -
                         lambda * alpha * (beta[j] > 0 ? 1.0 : -1.0));
        else
            r = std::max(0.0, std::abs(g[j]) - lambda * alpha);
        worst = std::max(worst, r);
    }
    return worst;
}

namespace detail {

// Cyclic coordinate descent with residual updates; beta is updated in place
// (warm starts along a lambda path reuse it).
inline EnetFit coordinate_descent(const Mat& X, const Vec& y, double lambda, double alpha,
                                  Vec& beta, const Vec& colsq, double tol, int max_sweeps) {
    const Eigen::Index p = X.cols();
    const double n = double(X.rows());
    Vec r = y - X * beta;
    const double thresh = lambda * alpha;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double denom = colsq[j] + lambda * (1.0 - alpha);
            if (denom <= 0.0) {
                beta[j] = 0.0;
                continue;
            }
            const double old = beta[j];
            const double rho = X.col(j).dot(r) / n + colsq[j] * old;
            const double nb = soft_threshold(rho, thresh) / denom;
            if (nb != old) {
                r.noalias() += X.col(j) * (old - nb);
                beta[j] = nb;
                max_delta = std::max(max_delta, std::abs(nb - old) * std::sqrt(colsq[j]));
            }
        }
        if (max_delta < 0.1 * tol) {
            const double kkt = enet_kkt_residual(X, y, beta, lambda, alpha);
            if (kkt <= tol) {
                EnetFit fit;
                fit.beta.values = beta;
                fit.sweeps = sweep + 1;
                fit.kkt_residual = kkt;
                return fit;
            }
        }
    }
    throw SolverError("elastic net: coordinate descent did not converge within sweep budget");
}

inline Vec column_squared_norms(const Mat& X) {
    return X.colwise().squaredNorm().transpose() / double(X.rows());
}

}  // namespace detail

inline EnetFit elastic_net_fit(const Mat& X, const Vec& y, double lambda, double alpha,
                               double tol = 1e-6, int max_sweeps = 100000) {
    if (X.rows() != y.size()) throw DataError("elastic_net_fit: dimension mismatch");
    if (!(lambda > 0.0)) throw SpecError("elastic_net_fit: lambda must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw SpecError("elastic_net_fit: alpha_mix must be in [0,1]");
    Vec beta = Vec::Zero(X.cols());
    Vec colsq = detail::column_squared_norms(X);
    return detail::coordinate_descent(X, y, lambda, alpha, beta, colsq, tol, max_sweeps);
}

inline EnetFit elastic_net_fit(const GenotypeMatrix& G, const PhenotypeVector& y,
                               const PenaltySpec& spec) {
    require_centered(G, "elastic_net_fit");
    if (!y.mean_removed) throw DataError("elastic_net_fit: phenotype must be centered");
    return elastic_net_fit(G.entries, y.values, spec.lambda, spec.alpha_mix);
}

inline double lambda_max_value(const Mat& X, const Vec& y, double alpha) {
    return (X.transpose() * y).cwiseAbs().maxCoeff() /
           (double(X.rows()) * std::max(alpha, 0.001));
}

inline std::vector<double> lambda_grid(double lam_max, int size, double min_ratio = 1e-3) {
    std::vector<double> grid((std::size_t(size)));
    for (int i = 0; i < size; ++i)
        grid[std::size_t(i)] = lam_max * std::pow(min_ratio, double(i) / double(size - 1));
    return grid;
}

// Fold assignment by shuffled contiguous blocks.
inline std::vector<std::vector<int>> cv_fold_indices(int n, int folds, std::mt19937_64& rng) {
    std::vector<int> idx((std::size_t(n)));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::vector<int>> out((std::size_t(folds)));
    for (int f = 0; f < folds; ++f) {
        const int lo = f * n / folds, hi = (f + 1) * n / folds;
        out[std::size_t(f)].assign(idx.begin() + lo, idx.begin() + hi);
    }
    return out;
}

namespace detail {

// Warm-started fit along a descending lambda path, accumulating held-out
// squared error for each lambda.
inline void cv_fold_path(const Mat& Xt, const Vec& yt, const Mat& Xv, const Vec& yv,
                         const std::vector<double>& grid, double alpha, double tol,
                         std::vector<double>& sse) {
    Vec beta = Vec::Zero(Xt.cols());
    Vec colsq = column_squared_norms(Xt);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        coordinate_descent(Xt, yt, grid[k], alpha, beta, colsq, tol, 100000);
        sse[k] += (yv - Xv * beta).squaredNorm();
    }
}

}  // namespace detail

// Lambda minimizing mean out-of-fold squared error over a descending
// logarithmic grid from lambda_max down to min_ratio * lambda_max.
// Ties go to the larger lambda. The looser inner tolerance only affects fold
// fits; any final model is refit at full tolerance by the caller.
inline double cv_lambda(const Mat& X, const Vec& y, double alpha, int folds, std::mt19937_64& rng,
                        int grid_size = 100, double min_ratio = 1e-3, double inner_tol = 1e-4) {
    const int n = int(X.rows());
    if (n < folds) throw DataError("cv_lambda: need n >= folds");
    const double lam_max = lambda_max_value(X, y, alpha);
    if (!(lam_max > 0.0)) return 1.0;  // y orthogonal to all columns; any lambda gives beta = 0
    const std::vector<double> grid = lambda_grid(lam_max, grid_size, min_ratio);
    auto fold_idx = cv_fold_indices(n, folds, rng);

    std::vector<double> sse(grid.size(), 0.0);
    std::vector<char> in_fold((std::size_t(n)));
    for (int f = 0; f < folds; ++f) {
        const auto& val = fold_idx[std::size_t(f)];
        if (val.empty()) continue;
        std::fill(in_fold.begin(), in_fold.end(), 0);
        for (int i : val) in_fold[std::size_t(i)] = 1;
        Mat Xt(n - int(val.size()), X.cols());
        Vec yt(n - int(val.size()));
        Mat Xv(int(val.size()), X.cols());
        Vec yv(int(val.size()));
        int ti = 0, vi = 0;
        for (int i = 0; i < n; ++i) {
            if (in_fold[std::size_t(i)]) {
                Xv.row(vi) = X.row(i);
                yv[vi++] = y[i];
            } else {
                Xt.row(ti) = X.row(i);
                yt[ti++] = y[i];
            }
        }
        detail::cv_fold_path(Xt, yt, Xv, yv, grid, alpha, inner_tol, sse);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (sse[k] < sse[best]) best = k;
    return grid[best];
}

inline double cv_lambda(const GenotypeMatrix& G, const PhenotypeVector& y, double alpha,
                        int folds, std::mt19937_64& rng) {
    require_centered(G, "cv_lambda");
    return cv_lambda(G.entries, y.values, alpha, folds, rng);
}

// Plug-in heritability from the elastic-net fit: variance of the fitted
// values over Var(y). No confidence interval exists for this estimator.
inline HeritabilityEstimate enet_heritability(const GenotypeMatrix& G, const PhenotypeVector& y,
                                              double alpha_mix = 0.01, std::uint64_t seed = 0,
                                              int cv_folds = 10, int cv_grid = 100) {
    require_centered(G, "enet_heritability");
    if (!y.mean_removed) throw DataError("enet_heritability: phenotype must be centered");

    auto rng = make_engine(derive_seed(seed, 0xe7e7));
    const double lambda = cv_lambda(G.entries, y.values, alpha_mix, cv_folds, rng, cv_grid);
    EnetFit fit = elastic_net_fit(G.entries, y.values, lambda, alpha_mix);

    const double var_y = phenotypic_variance(y, VarianceKind::Unbiased);
    const Vec fitted = G.entries * fit.beta.values;
    const double signal = fitted.squaredNorm() / double(G.n() - 1);
    const int k = fit.beta.support_size();

    HeritabilityEstimate est;
    est.method = Method::Enet;
    est.h2 = k == 0 ? 0.0 : heritability_from_signal(signal, var_y);
    est.diagnostics["h2_raw"] = signal / var_y;
    est.diagnostics["support_size"] = double(k);
    est.diagnostics["lambda"] = lambda;
    est.diagnostics["solver_iterations"] = double(fit.sweeps);
    est.diagnostics["kkt_residual"] = fit.kkt_residual;
    if (k == 0) est.diagnostics["empty_support"] = 1.0;
    return est;
}

}  // namespace herit
