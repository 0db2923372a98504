#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/genotype.hpp"
#include "herit/stats.hpp"

namespace herit {

enum class EffectDist { Gaussian, StudentT3 };
enum class ModelKind { FixedEffect, GctaMixed };
enum class CausalMode { GeneBlocks, RandomK, Null };

struct GenotypeGenSpec {
    int n_blocks = 20;               // contiguous LD blocks
    double block_corr = 0.3;         // latent within-block correlation, [0,1)
    int n_clusters = 1;              // row population clusters
    double cluster_divergence = 0.0; // magnitude of cluster frequency shifts
    double maf_lo = 0.1;
    double maf_hi = 0.5;
};

struct CausalBlock {
    int start = 0;
    int length = 0;
};

struct SimulationSpec {
    int n = 0;
    int p = 0;
    GenotypeGenSpec genotype;
    CausalMode causal_mode = CausalMode::GeneBlocks;
    std::vector<CausalBlock> causal_blocks;  // empty: default 3-block layout
    int causal_k = 0;                        // for RandomK
    EffectDist effect_dist = EffectDist::Gaussian;
    double target_h2 = 0.8;
    double sigma2_eps = 1.0;
    ModelKind model = ModelKind::FixedEffect;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 2 || p < 1) throw SpecError("simulation: need n >= 2 and p >= 1");
        if (p < genotype.n_blocks) throw SpecError("simulation: p < n_blocks");
        if (genotype.n_blocks < 1 || genotype.n_clusters < 1)
            throw SpecError("simulation: block/cluster counts must be positive");
        if (genotype.block_corr < 0.0 || genotype.block_corr >= 1.0)
            throw SpecError("simulation: block_corr must be in [0,1)");
        if (genotype.cluster_divergence < 0.0)
            throw SpecError("simulation: cluster_divergence must be >= 0");
        if (!(genotype.maf_lo > 0.0 && genotype.maf_hi <= 0.5 && genotype.maf_lo <= genotype.maf_hi))
            throw SpecError("simulation: maf_range must satisfy 0 < lo <= hi <= 0.5");
        if (!(target_h2 > 0.0 && target_h2 < 1.0))
            throw SpecError("simulation: target_h2 must be in (0,1)");
        if (!(sigma2_eps > 0.0)) throw SpecError("simulation: sigma2_eps must be positive");
        if (model == ModelKind::FixedEffect && causal_mode == CausalMode::RandomK && causal_k < 1)
            throw SpecError("simulation: causal_k must be positive for random_k");
    }
};

struct SimulatedDataset {
    GenotypeMatrix genotypes;  // raw 0/1 coding, uncentered
    PhenotypeVector phenotype;
    EffectVector true_effects;  // standardized-genotype scale under the GCTA model
    double true_h2 = 0.0;
    double sigma2_eps = 0.0;
    ModelKind model = ModelKind::FixedEffect;
    std::vector<int> causal_indices;
};

// Default causal layout: 3 contiguous blocks totaling ~150 variants.
inline std::vector<CausalBlock> default_causal_blocks(int p) {
    const int len = std::max(1, std::min(50, p / 10));
    std::vector<CausalBlock> blocks;
    for (double frac : {0.15, 0.45, 0.75}) {
        int start = std::min(int(frac * p), p - len);
        blocks.push_back({start, len});
    }
    return blocks;
}

inline std::vector<int> causal_indices(const SimulationSpec& spec, std::mt19937_64& rng) {
    std::vector<int> idx;
    switch (spec.causal_mode) {
        case CausalMode::Null:
            return idx;
        case CausalMode::GeneBlocks: {
            auto blocks =
                spec.causal_blocks.empty() ? default_causal_blocks(spec.p) : spec.causal_blocks;
            for (const auto& b : blocks) {
                if (b.start < 0 || b.length < 1 || b.start + b.length > spec.p)
                    throw SpecError("simulation: causal block out of range");
                for (int j = b.start; j < b.start + b.length; ++j) idx.push_back(j);
            }
            std::sort(idx.begin(), idx.end());
            idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
            return idx;
        }
        case CausalMode::RandomK: {
            if (spec.causal_k > spec.p) throw SpecError("simulation: causal_k > p");
            std::vector<int> all((std::size_t(spec.p)));
            std::iota(all.begin(), all.end(), 0);
            std::shuffle(all.begin(), all.end(), rng);
            idx.assign(all.begin(), all.begin() + spec.causal_k);
            std::sort(idx.begin(), idx.end());
            return idx;
        }
    }
    return idx;
}

// Binary genotypes from a thresholded Gaussian copula: columns share a
// latent block factor (within-block correlation block_corr), rows belong to
// clusters whose per-variant allele frequencies are shifted by up to
// cluster_divergence.
inline GenotypeMatrix simulate_genotypes(const SimulationSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    const int n = spec.n, p = spec.p;
    const auto& g = spec.genotype;

    std::uniform_real_distribution<double> unif_maf(g.maf_lo, g.maf_hi);
    std::uniform_real_distribution<double> unif_pm(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> maf((std::size_t(p)));
    for (auto& f : maf) f = unif_maf(rng);

    std::vector<int> block_of((std::size_t(p)));
    for (int j = 0; j < p; ++j) block_of[std::size_t(j)] = j * g.n_blocks / p;
    std::vector<int> cluster_of((std::size_t(n)));
    for (int i = 0; i < n; ++i) cluster_of[std::size_t(i)] = i * g.n_clusters / n;

    // Per-cluster thresholds on the latent scale.
    Mat threshold(g.n_clusters, p);
    for (int c = 0; c < g.n_clusters; ++c)
        for (int j = 0; j < p; ++j) {
            const double f = std::clamp(
                maf[std::size_t(j)] + g.cluster_divergence * unif_pm(rng), 0.01, 0.99);
            threshold(c, j) = normal_quantile(f);
        }

    const double rho = g.block_corr;
    const double w_shared = std::sqrt(rho), w_own = std::sqrt(1.0 - rho);

    GenotypeMatrix G;
    G.entries.resize(n, p);
    for (int i = 0; i < n; ++i) {
        std::vector<double> shared((std::size_t(g.n_blocks)));
        for (auto& s : shared) s = normal(rng);
        const int c = cluster_of[std::size_t(i)];
        for (int j = 0; j < p; ++j) {
            const double latent = w_shared * shared[std::size_t(block_of[std::size_t(j)])] +
                                  w_own * normal(rng);
            G.entries(i, j) = latent < threshold(c, j) ? 1.0 : 0.0;
        }
    }
    G.sample_ids.reserve(std::size_t(n));
    G.variant_ids.reserve(std::size_t(p));
    for (int i = 0; i < n; ++i) G.sample_ids.push_back("s" + std::to_string(i));
    for (int j = 0; j < p; ++j) G.variant_ids.push_back("v" + std::to_string(j));
    recompute_column_stats(G);
    return G;
}

inline EffectVector draw_effects(const std::vector<int>& causal, EffectDist dist,
                                 std::mt19937_64& rng, int p) {
    EffectVector beta;
    beta.values = Vec::Zero(p);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::student_t_distribution<double> t3(3.0);
    for (int j : causal)
        beta.values[j] = dist == EffectDist::Gaussian ? normal(rng) : t3(rng);
    return beta;
}

// Quadratic form beta^T Sigma_bar beta with the sample covariance of the
// support columns (centered, divisor n-1). Off-support entries contribute
// nothing, so restricting to the support is exact.
inline double signal_variance(const EffectVector& beta, const GenotypeMatrix& G) {
    const auto support = beta.support();
    if (support.empty()) return 0.0;
    const Eigen::Index n = G.n();
    Vec fitted = Vec::Zero(n);
    for (int j : support) {
        Vec col = G.entries.col(j).array() - G.entries.col(j).mean();
        fitted += col * beta.values[j];
    }
    return fitted.squaredNorm() / double(n - 1);
}

// Scales beta0 so that the sample-covariance heritability identity hits the
// target exactly: beta = beta0 * sqrt(sigma2 * h2 / (q * (1 - h2))) with
// q = beta0^T Sigma_bar beta0.
inline EffectVector rescale_effects(const EffectVector& beta0, const GenotypeMatrix& G,
                                    double target_h2, double sigma2_eps) {
    if (!(target_h2 > 0.0 && target_h2 < 1.0))
        throw SpecError("rescale_effects: target_h2 must be in (0,1)");
    const double q = signal_variance(beta0, G);
    if (!(q > 0.0)) throw DataError("rescale_effects: degenerate causal set (zero quadratic form)");
    const double scale = std::sqrt(sigma2_eps * target_h2 / (q * (1.0 - target_h2)));
    EffectVector beta;
    beta.values = beta0.values * scale;
    return beta;
}

inline PhenotypeVector simulate_phenotype_fixed(const GenotypeMatrix& G, const EffectVector& beta,
                                                double sigma2_eps, std::mt19937_64& rng) {
    require_centered(G, "simulate_phenotype_fixed");
    if (beta.values.size() != G.p()) throw DataError("simulate_phenotype_fixed: dimension mismatch");
    std::normal_distribution<double> normal(0.0, std::sqrt(sigma2_eps));
    PhenotypeVector y;
    y.values = G.entries * beta.values;
    for (Eigen::Index i = 0; i < y.values.size(); ++i) y.values[i] += normal(rng);
    return y;
}

// Mixed-model phenotype: standardized genotypes, beta_j ~ N(0, h2/p) on every
// column, noise N(0, 1 - h2), so E[Var(y)] = 1. Returns the phenotype, the
// true noise variance and the effects on the standardized scale.
struct GctaPhenotype {
    PhenotypeVector y;
    double sigma2 = 0.0;
    EffectVector effects;
    // Heritability the drawn effects realize under the sample covariance of
    // the standardized design; fluctuates around the target rate.
    double realized_h2 = 0.0;
};

inline GctaPhenotype simulate_phenotype_gcta(const GenotypeMatrix& G, double target_h2,
                                             std::mt19937_64& rng) {
    require_centered(G, "simulate_phenotype_gcta");
    if (!(target_h2 >= 0.0 && target_h2 < 1.0))
        throw SpecError("simulate_phenotype_gcta: target_h2 must be in [0,1)");
    const Eigen::Index n = G.n(), p = G.p();
    Mat Xstd = G.entries;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double sd = std::sqrt(Xstd.col(j).squaredNorm() / double(n - 1));
        if (!(sd > 0.0))
            throw DataError("simulate_phenotype_gcta: zero-variance column (filter first)");
        Xstd.col(j) /= sd;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    GctaPhenotype out;
    out.effects.values.resize(p);
    const double beta_sd = std::sqrt(target_h2 / double(p));
    for (Eigen::Index j = 0; j < p; ++j) out.effects.values[j] = beta_sd * normal(rng);
    out.sigma2 = 1.0 - target_h2;
    const double eps_sd = std::sqrt(out.sigma2);
    out.y.values = Xstd * out.effects.values;
    const double genetic_var = out.y.values.squaredNorm() / double(n - 1);
    out.realized_h2 = genetic_var / (genetic_var + out.sigma2);
    for (Eigen::Index i = 0; i < n; ++i) out.y.values[i] += eps_sd * normal(rng);
    return out;
}

inline double true_h2(const SimulatedDataset& ds) {
    if (ds.model == ModelKind::GctaMixed) return ds.true_h2;
    const double q = signal_variance(ds.true_effects, ds.genotypes);
    return q / (q + ds.sigma2_eps);
}

// Full pipeline: genotypes, effects, phenotype, all from one seed.
inline SimulatedDataset simulate_dataset(const SimulationSpec& spec) {
    spec.validate();
    auto rng = make_engine(spec.seed);
    SimulatedDataset ds;
    ds.model = spec.model;
    ds.genotypes = simulate_genotypes(spec, rng);
    GenotypeMatrix Gc = impute_and_center(ds.genotypes);

    if (spec.model == ModelKind::GctaMixed) {
        GctaPhenotype gp = simulate_phenotype_gcta(Gc, spec.target_h2, rng);
        ds.phenotype = std::move(gp.y);
        ds.true_effects = std::move(gp.effects);
        ds.sigma2_eps = gp.sigma2;
        ds.true_h2 = gp.realized_h2;
        ds.causal_indices.resize(std::size_t(spec.p));
        std::iota(ds.causal_indices.begin(), ds.causal_indices.end(), 0);
        return ds;
    }

    ds.causal_indices = causal_indices(spec, rng);
    ds.sigma2_eps = spec.sigma2_eps;
    if (ds.causal_indices.empty()) {
        ds.true_effects.values = Vec::Zero(spec.p);
        ds.true_h2 = 0.0;
        std::normal_distribution<double> noise(0.0, std::sqrt(spec.sigma2_eps));
        ds.phenotype.values.resize(spec.n);
        for (int i = 0; i < spec.n; ++i) ds.phenotype.values[i] = noise(rng);
        return ds;
    }
    EffectVector beta0 = draw_effects(ds.causal_indices, spec.effect_dist, rng, spec.p);
    ds.true_effects = rescale_effects(beta0, ds.genotypes, spec.target_h2, spec.sigma2_eps);
    ds.phenotype = simulate_phenotype_fixed(Gc, ds.true_effects, spec.sigma2_eps, rng);
    ds.true_h2 = true_h2(ds);
    return ds;
}

}  // namespace herit
