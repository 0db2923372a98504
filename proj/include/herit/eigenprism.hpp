#pragma once

#include <cmath>

#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"
#include "herit/spectral.hpp"
#include "herit/stats.hpp"

namespace herit {

struct EigenprismSolution {
    Vec w;
    double objective = 0.0;     // max(sum w^2, sum w^2 lambda^2)
    double duality_gap = 0.0;   // objective minus the inner weighted minimum
    double residual_sum = 0.0;  // |sum w|
    double residual_lam = 0.0;  // |sum w lambda - 1|
    int iterations = 0;
};

namespace detail {

// Minimum of sum_i d_i w_i^2 subject to sum w = 0, sum w*lambda = 1 with
// d_i = theta + (1-theta)*lambda_i^2. Closed form via the 2x2 normal
// equations; the minimum value equals v/2 for the multiplier v.
inline bool eigenprism_inner(const Vec& lam, double theta, Vec& w, double& value) {
    const Eigen::Index n = lam.size();
    double s0 = 0, s1 = 0, s2 = 0;
    Vec d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d[i] = theta + (1.0 - theta) * lam[i] * lam[i];
        if (d[i] <= 0.0) return false;
        s0 += 1.0 / d[i];
        s1 += lam[i] / d[i];
        s2 += lam[i] * lam[i] / d[i];
    }
    const double det = s0 * s2 - s1 * s1;
    if (!(std::abs(det) > 1e-300)) return false;
    const double u = -2.0 * s1 / det;
    const double v = 2.0 * s0 / det;
    w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = 0.5 * (u + v * lam[i]) / d[i];
    value = 0.5 * v;
    return std::isfinite(value);
}

}  // namespace detail

// Solves problem P1: minimize over w the larger of sum w_i^2 and
// sum w_i^2 lambda_i^2, subject to sum w = 0 and sum w*lambda = 1.
// The minimax is reduced to a concave one-dimensional maximization over the
// mixing weight between the two quadratics (golden section), with the inner
// problem solved in closed form.
inline EigenprismSolution solve_eigenprism_program(const Vec& lam, double tol = 1e-12,
                                                   int max_iter = 10000) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 1e-12, b = 1.0;
    Vec w;
    double val = 0.0;
    auto eval = [&](double theta) {
        if (!detail::eigenprism_inner(lam, theta, w, val))
            throw SolverError("eigenprism: degenerate spectrum, P1 infeasible or unbounded");
        return val;
    };
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    int iter = 0;
    while (b - a > tol && iter < max_iter) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        }
        ++iter;
    }
    const double theta = 0.5 * (a + b);
    const double inner = eval(theta);

    EigenprismSolution sol;
    sol.w = w;
    sol.iterations = iter;
    const double q1 = w.squaredNorm();
    const double q2 = (w.array() * lam.array()).square().sum();
    sol.objective = std::max(q1, q2);
    sol.duality_gap = sol.objective - inner;
    sol.residual_sum = std::abs(w.sum());
    sol.residual_lam = std::abs(w.dot(lam) - 1.0);
    if (sol.residual_sum > 1e-8 || sol.residual_lam > 1e-8 ||
        sol.duality_gap > 1e-8 * std::max(1.0, sol.objective))
        throw SolverError("eigenprism: P1 solve did not reach the required accuracy");
    return sol;
}

// Direct heritability estimator via spectral weights; needs p > n.
inline HeritabilityEstimate eigenprism(const GenotypeMatrix& G, const PhenotypeVector& y,
                                       double alpha = 0.05,
                                       const SpectralDecomposition* precomputed = nullptr) {
    require_centered(G, "eigenprism");
    if (!y.mean_removed) throw DataError("eigenprism: phenotype must be centered");
    if (G.p() <= G.n())
        throw DataError("eigenprism: requires p > n (high-dimensional data only)");
    SpectralDecomposition sd =
        precomputed ? *precomputed : spectral_decomposition(G, y);

    EigenprismSolution sol = solve_eigenprism_program(sd.eigenvalues);

    const double denom = y.values.squaredNorm() / double(y.n());
    if (!(denom > 0.0)) throw DataError("eigenprism: degenerate phenotype");
    const double raw = sol.w.dot(sd.rotated.array().square().matrix()) / denom;

    HeritabilityEstimate est;
    est.method = Method::Eigenprism;
    est.h2 = clamp01(raw);
    const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(2.0 * sol.objective);
    est.interval = symmetric_interval(est.h2, half, IntervalKind::Confidence);
    est.diagnostics["h2_raw"] = raw;
    est.diagnostics["p1_star"] = sol.objective;
    est.diagnostics["duality_gap"] = sol.duality_gap;
    est.diagnostics["residual_sum"] = sol.residual_sum;
    est.diagnostics["residual_lambda"] = sol.residual_lam;
    est.diagnostics["iterations"] = double(sol.iterations);
    est.diagnostics["ci_half_width"] = half;
    return est;
}

}  // namespace herit
