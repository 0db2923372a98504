#pragma once

#include <Eigen/Eigenvalues>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/genotype.hpp"

namespace herit {

// Eigendecomposition of K = X X^T / p with the phenotype rotated into the
// eigenbasis. Shared by the Eigenprism and MLE estimators, so a benchmark
// replicate computes it once.
struct SpectralDecomposition {
    Vec eigenvalues;  // of XX^T/p, descending, clamped at 0
    Vec rotated;      // z = U^T y
};

inline SpectralDecomposition spectral_decomposition(const Mat& X, const Vec& y) {
    const Eigen::Index n = X.rows();
    if (y.size() != n) throw DataError("spectral_decomposition: dimension mismatch");
    Mat K = (X * X.transpose()) / double(X.cols());
    Eigen::SelfAdjointEigenSolver<Mat> es(K);
    if (es.info() != Eigen::Success) throw SolverError("eigendecomposition failed");
    SpectralDecomposition sd;
    sd.eigenvalues.resize(n);
    sd.rotated.resize(n);
    Vec z = es.eigenvectors().transpose() * y;
    // Eigen returns ascending order; flip to descending.
    for (Eigen::Index i = 0; i < n; ++i) {
        sd.eigenvalues[i] = std::max(0.0, es.eigenvalues()[n - 1 - i]);
        sd.rotated[i] = z[n - 1 - i];
    }
    return sd;
}

inline SpectralDecomposition spectral_decomposition(const GenotypeMatrix& G,
                                                    const PhenotypeVector& y) {
    require_centered(G, "spectral_decomposition");
    return spectral_decomposition(G.entries, y.values);
}

}  // namespace herit
