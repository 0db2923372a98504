#pragma once

#include <cmath>

#include "herit/common.hpp"
#include "herit/estimate.hpp"

namespace herit {

struct PhenotypeVector {
    Vec values;
    bool mean_removed = false;
    double original_mean = 0.0;

    Eigen::Index n() const { return values.size(); }

    // Returns a mean-centered copy; idempotent.
    PhenotypeVector centered() const {
        if (mean_removed) return *this;
        PhenotypeVector out;
        const double m = values.mean();
        out.values = values.array() - m;
        out.mean_removed = true;
        out.original_mean = m;
        return out;
    }
};

struct EffectVector {
    Vec values;

    std::vector<int> support() const {
        std::vector<int> s;
        for (Eigen::Index j = 0; j < values.size(); ++j)
            if (values[j] != 0.0) s.push_back(int(j));
        return s;
    }
    int support_size() const { return int(support().size()); }
};

enum class VarianceKind { MeanSquare, Unbiased };

inline double phenotypic_variance(const PhenotypeVector& y, VarianceKind kind) {
    if (y.n() < 2) throw DataError("phenotypic_variance: need n >= 2");
    require_finite(y.values, "phenotypic_variance");
    if (kind == VarianceKind::MeanSquare) {
        if (!y.mean_removed)
            throw DataError("phenotypic_variance: mean_square requires a mean-removed phenotype");
        return y.values.squaredNorm() / double(y.n());
    }
    return sample_variance(y.values);
}

inline double heritability_from_noise(double sigma2_hat, double var_y) {
    if (!(var_y > 0.0)) throw DataError("heritability_from_noise: Var(y) must be positive");
    if (!(sigma2_hat >= 0.0) || !std::isfinite(sigma2_hat))
        throw DataError("heritability_from_noise: invalid noise variance");
    return clamp01(1.0 - sigma2_hat / var_y);
}

inline double heritability_from_signal(double signal_var, double var_y) {
    if (!(var_y > 0.0)) throw DataError("heritability_from_signal: Var(y) must be positive");
    if (!(signal_var >= 0.0) || !std::isfinite(signal_var))
        throw DataError("heritability_from_signal: invalid signal variance");
    return clamp01(signal_var / var_y);
}

// Benchmark-only estimator: uses the simulator's true noise variance.
inline HeritabilityEstimate oracle_estimate(const PhenotypeVector& y, double sigma2_true) {
    HeritabilityEstimate est;
    est.method = Method::Oracle;
    const double var_y = phenotypic_variance(y, VarianceKind::Unbiased);
    est.diagnostics["h2_raw"] = 1.0 - sigma2_true / var_y;
    est.h2 = heritability_from_noise(sigma2_true, var_y);
    return est;
}

}  // namespace herit
