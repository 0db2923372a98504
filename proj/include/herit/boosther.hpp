#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <vector>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/elastic_net.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"
#include "herit/stats.hpp"

namespace herit {

struct BoostConfig {
    int B = 100;
    double drop_frac = 0.25;
    double enet_alpha = 0.01;
    int cv_folds = 10;
    int cv_grid = 100;          // lambda grid size for the per-split cross-validation
    double cv_min_ratio = 1e-3; // grid floor as a fraction of lambda_max
    double quantile_lo = 0.025;
    double quantile_hi = 0.975;
    int max_support = -1;  // -1: floor(n/2) - 2
    std::uint64_t seed = 0;
    int parallelism = 1;
};

struct SplitEstimate {
    int replicate = 0;
    int half = 0;  // 0: select on A / estimate on B, 1: the swap
    int support_size = 0;
    double sigma2_hat = 0.0;
    double h2 = 0.0;
    bool ok = false;
};

// Keeps the ceil((1 - drop_frac) * p) columns most correlated (in absolute
// value) with y; ties broken toward the lower column index. Zero-variance
// columns rank last with correlation 0.
inline std::vector<int> screen_correlation(const Mat& X, const Vec& y, double drop_frac = 0.25) {
    const Eigen::Index p = X.cols();
    const double ynorm = (y.array() - y.mean()).matrix().norm();
    Vec yc = y.array() - y.mean();
    std::vector<double> score(std::size_t(p), 0.0);
    for (Eigen::Index j = 0; j < p; ++j) {
        Vec xc = X.col(j).array() - X.col(j).mean();
        const double xn = xc.norm();
        if (xn > 0.0 && ynorm > 0.0) score[std::size_t(j)] = std::abs(xc.dot(yc)) / (xn * ynorm);
    }
    std::vector<int> order((std::size_t(p)));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (score[std::size_t(a)] != score[std::size_t(b)])
            return score[std::size_t(a)] > score[std::size_t(b)];
        return a < b;
    });
    const auto keep_count = std::size_t(std::ceil((1.0 - drop_frac) * double(p)));
    std::vector<int> keep(order.begin(), order.begin() + std::ptrdiff_t(keep_count));
    std::sort(keep.begin(), keep.end());
    return keep;
}

inline std::vector<int> screen_correlation(const GenotypeMatrix& G, const PhenotypeVector& y,
                                           double drop_frac = 0.25) {
    require_centered(G, "screen_correlation");
    return screen_correlation(G.entries, y.values, drop_frac);
}

// Uniformly random partition into disjoint halves of sizes floor(n/2) and
// ceil(n/2).
inline std::pair<std::vector<int>, std::vector<int>> split_halves(int n, std::mt19937_64& rng) {
    if (n < 4) throw DataError("split_halves: need n >= 4");
    std::vector<int> idx((std::size_t(n)));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<int> a(idx.begin(), idx.begin() + n / 2);
    std::vector<int> b(idx.begin() + n / 2, idx.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return {std::move(a), std::move(b)};
}

// Least-squares noise variance with intercept. The intercept is absorbed by
// within-subset centering; rank deficiency is handled by a minimum-norm
// solve with the effective rank replacing the column count in the divisor.
inline double ols_noise_variance(const Mat& Xsub, const Vec& ysub) {
    const Eigen::Index m = Xsub.rows();
    if (ysub.size() != m) throw DataError("ols_noise_variance: dimension mismatch");
    Vec yc = ysub.array() - ysub.mean();
    if (Xsub.cols() == 0) {
        if (m < 2) throw DataError("ols_noise_variance: too few rows");
        return yc.squaredNorm() / double(m - 1);
    }
    Mat Xc = Xsub.rowwise() - Xsub.colwise().mean();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Xc);
    const Eigen::Index rank = cod.rank();
    if (m - rank - 1 <= 0)
        throw DataError("ols_noise_variance: support too large for the estimation half");
    const Vec coef = cod.solve(yc);
    const double rss = (yc - Xc * coef).squaredNorm();
    return rss / double(m - rank - 1);
}

namespace detail {

inline Mat take_rows(const Mat& X, const std::vector<int>& rows) {
    Mat out(Eigen::Index(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = X.row(rows[i]);
    return out;
}

inline Vec take(const Vec& v, const std::vector<int>& idx) {
    Vec out(Eigen::Index(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[Eigen::Index(i)] = v[idx[i]];
    return out;
}

inline Mat take_cols(const Mat& X, const std::vector<int>& cols) {
    Mat out(X.rows(), Eigen::Index(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(Eigen::Index(j)) = X.col(cols[j]);
    return out;
}

// Largest-|coefficient| truncation of an oversized support.
inline std::vector<int> truncate_support(const Vec& beta, std::vector<int> support,
                                         std::size_t cap) {
    if (support.size() <= cap) return support;
    std::stable_sort(support.begin(), support.end(), [&](int a, int b) {
        return std::abs(beta[a]) > std::abs(beta[b]);
    });
    support.resize(cap);
    std::sort(support.begin(), support.end());
    return support;
}

}  // namespace detail

// Algorithm: screen once on the full data, then B times split the sample,
// select covariates on one half with the elastic net (lambda by
// cross-validation inside that half only) and estimate the noise variance on
// the other half by least squares; both swap directions contribute, giving
// 2B split-wise heritabilities aggregated into a mean point estimate and an
// empirical-quantile ("reliable") interval.
inline HeritabilityEstimate boost_heritability(const GenotypeMatrix& G, const PhenotypeVector& y,
                                               const BoostConfig& cfg = {}) {
    require_centered(G, "boost_heritability");
    if (!y.mean_removed) throw DataError("boost_heritability: phenotype must be centered");
    const int n = int(G.n());
    if (n < 20) throw DataError("boost_heritability: need n >= 20");
    if (cfg.B < 1 || cfg.drop_frac <= 0.0 || cfg.drop_frac >= 1.0 ||
        !(cfg.quantile_lo < cfg.quantile_hi))
        throw SpecError("boost_heritability: invalid configuration");

    const double var_y = phenotypic_variance(y, VarianceKind::Unbiased);
    const std::vector<int> kept = screen_correlation(G.entries, y.values, cfg.drop_frac);
    const Mat Xs = detail::take_cols(G.entries, kept);
    const std::size_t cap =
        cfg.max_support > 0 ? std::size_t(cfg.max_support) : std::size_t(std::max(1, n / 2 - 2));

    std::vector<SplitEstimate> splits(std::size_t(2 * cfg.B));

    auto run_replicate = [&](int b) {
        auto rng = make_engine(derive_seed(cfg.seed, std::uint64_t(b)));
        auto [ha, hb] = split_halves(n, rng);
        const std::uint64_t cv_seed_a = rng();
        const std::uint64_t cv_seed_b = rng();
        for (int dir = 0; dir < 2; ++dir) {
            const auto& sel_rows = dir == 0 ? ha : hb;
            const auto& est_rows = dir == 0 ? hb : ha;
            SplitEstimate& out = splits[std::size_t(2 * b + dir)];
            out.replicate = b;
            out.half = dir;
            try {
                Mat Xsel = detail::take_rows(Xs, sel_rows);
                Vec ysel = detail::take(y.values, sel_rows);
                auto cv_rng = make_engine(dir == 0 ? cv_seed_a : cv_seed_b);
                const double lambda = cv_lambda(Xsel, ysel, cfg.enet_alpha, cfg.cv_folds, cv_rng,
                                                cfg.cv_grid, cfg.cv_min_ratio);
                EnetFit fit = elastic_net_fit(Xsel, ysel, lambda, cfg.enet_alpha);
                std::vector<int> support = fit.beta.support();
                support = detail::truncate_support(fit.beta.values, std::move(support), cap);

                Mat Xest = detail::take_rows(detail::take_cols(Xs, support), est_rows);
                Vec yest = detail::take(y.values, est_rows);
                const double sigma2 = ols_noise_variance(Xest, yest);
                out.support_size = int(support.size());
                out.sigma2_hat = sigma2;
                out.h2 = heritability_from_noise(sigma2, var_y);
                out.ok = true;
            } catch (const Error&) {
                out.ok = false;
            }
        }
    };

    const int workers = std::max(1, cfg.parallelism);
    if (workers == 1) {
        for (int b = 0; b < cfg.B; ++b) run_replicate(b);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int b = w; b < cfg.B; b += workers) run_replicate(b);
            });
        for (auto& t : pool) t.join();
    }

    int ok_replicates = 0;
    std::vector<double> values;
    double support_sum = 0.0;
    for (int b = 0; b < cfg.B; ++b) {
        const auto& s0 = splits[std::size_t(2 * b)];
        const auto& s1 = splits[std::size_t(2 * b + 1)];
        if (s0.ok && s1.ok) ++ok_replicates;
        for (const auto* s : {&s0, &s1})
            if (s->ok) {
                values.push_back(s->h2);
                support_sum += s->support_size;
            }
    }
    if (double(ok_replicates) < double(cfg.B) / 2.0)
        throw EstimatorFailed("boost_heritability: fewer than B/2 successful replicates");

    HeritabilityEstimate est;
    est.method = Method::BoostHer;
    est.h2 = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    est.interval = Interval{empirical_quantile(values, cfg.quantile_lo),
                            empirical_quantile(values, cfg.quantile_hi), IntervalKind::Reliable};
    est.split_estimates = values;
    est.diagnostics["support_size"] = support_sum / double(values.size());
    est.diagnostics["successful_replicates"] = double(ok_replicates);
    est.diagnostics["split_count"] = double(values.size());
    est.diagnostics["screened_columns"] = double(kept.size());
    return est;
}

}  // namespace herit
