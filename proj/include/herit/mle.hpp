#pragma once

#include <cmath>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"
#include "herit/spectral.hpp"
#include "herit/stats.hpp"

namespace herit {

namespace detail {

// Profile log-likelihood in eta after maximizing sigma^2 analytically:
// sigma^2(eta) = y^T (eta*K + I)^{-1} y / n, expressed in the eigenbasis of
// K = XX^T/p. Constant terms dropped.
struct MleProfile {
    const Vec& lam;
    const Vec& z;

    double sigma2(double eta) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            s += z[i] * z[i] / (eta * lam[i] + 1.0);
        return s / double(lam.size());
    }
    double operator()(double eta) const {
        const double s2 = sigma2(eta);
        if (!(s2 > 0.0)) return -std::numeric_limits<double>::infinity();
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i) logdet += std::log1p(eta * lam[i]);
        const double val = -0.5 * std::log(s2) - logdet / (2.0 * double(lam.size()));
        if (!std::isfinite(val)) throw SolverError("mle: non-finite objective");
        return val;
    }
};

inline double golden_max(const MleProfile& f, double a, double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

constexpr double kMleEtaMax = 1e6;

// Spectral maximum-likelihood estimator. The signal-to-noise ratio eta is
// located by a coarse scan over log-spaced candidates followed by golden
// section refinement in the winning bracket; eta = 0 (pure noise) competes
// with the interior candidates.
inline HeritabilityEstimate mle_heritability(const GenotypeMatrix& G, const PhenotypeVector& y,
                                             double alpha = 0.05,
                                             const SpectralDecomposition* precomputed = nullptr) {
    require_centered(G, "mle_heritability");
    if (!y.mean_removed) throw DataError("mle_heritability: phenotype must be centered");
    const Eigen::Index n = G.n();
    if (n < 10) throw DataError("mle_heritability: need n >= 10");

    SpectralDecomposition sd = precomputed ? *precomputed : spectral_decomposition(G, y);

    // Centering makes K singular along the all-ones direction while the
    // centered phenotype has no mass there either. Such degenerate eigenpairs
    // (lambda ~ 0 and z ~ 0) carry no information but would let the profile
    // likelihood creep upward like log(eta)/(2n) forever, so the likelihood
    // is restricted to the informative subspace.
    Vec lam_kept(sd.eigenvalues.size()), z_kept(sd.eigenvalues.size());
    {
        const double lam_tol = 1e-12 * std::max(1.0, sd.eigenvalues[0]);
        const double z_tol = 1e-12 * sd.rotated.squaredNorm();
        Eigen::Index m = 0;
        for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
            if (sd.eigenvalues[i] <= lam_tol && sd.rotated[i] * sd.rotated[i] <= z_tol) continue;
            lam_kept[m] = sd.eigenvalues[i];
            z_kept[m] = sd.rotated[i];
            ++m;
        }
        if (m < 2) throw DataError("mle_heritability: degenerate spectrum");
        lam_kept.conservativeResize(m);
        z_kept.conservativeResize(m);
    }
    detail::MleProfile profile{lam_kept, z_kept};

    // Log-spaced scan over [1e-8, eta_max], plus eta = 0.
    constexpr int kScan = 60;
    std::vector<double> grid(kScan + 1);
    grid[0] = 0.0;
    const double lo = std::log(1e-8), hi = std::log(kMleEtaMax);
    for (int i = 0; i < kScan; ++i) grid[std::size_t(i) + 1] = std::exp(lo + (hi - lo) * i / (kScan - 1));
    int best = 0;
    double best_val = profile(0.0);
    for (int i = 1; i <= kScan; ++i) {
        const double v = profile(grid[std::size_t(i)]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double eta_lo = grid[std::size_t(std::max(0, best - 1))];
    double eta_hi = best == kScan ? kMleEtaMax : grid[std::size_t(best + 1)];
    double eta_hat = detail::golden_max(profile, eta_lo, eta_hi, 1e-10);
    if (profile(0.0) >= profile(eta_hat)) eta_hat = 0.0;

    const double sigma2 = profile.sigma2(eta_hat);
    const double var_y = phenotypic_variance(y, VarianceKind::Unbiased);
    const double raw = 1.0 - sigma2 / var_y;

    HeritabilityEstimate est;
    est.method = Method::Mle;
    est.h2 = clamp01(raw);
    const double half = normal_quantile(1.0 - alpha / 2.0) / std::sqrt(2.0 * double(n));
    est.interval = symmetric_interval(est.h2, half, IntervalKind::Confidence);
    est.diagnostics["h2_raw"] = raw;
    est.diagnostics["eta_hat"] = eta_hat;
    est.diagnostics["sigma2_hat"] = sigma2;
    est.diagnostics["objective_value"] = profile(eta_hat);
    est.diagnostics["ci_half_width"] = half;
    if (eta_hat > 0.99 * kMleEtaMax) est.diagnostics["eta_at_boundary"] = 1.0;
    return est;
}

}  // namespace herit
