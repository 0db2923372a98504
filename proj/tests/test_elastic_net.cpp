#include <catch2/catch_amalgamated.hpp>

#include "herit/elastic_net.hpp"
#include "herit/simulate.hpp"

#include <random>

using namespace herit;

namespace {

// n x p matrix whose columns are orthogonal with xj'xj / n = 1.
Mat orthonormal_design(int n, int p, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Mat A(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) A(i, j) = gauss(rng);
    Eigen::HouseholderQR<Mat> qr(A);
    Mat Q = qr.householderQ() * Mat::Identity(n, p);
    return std::sqrt(double(n)) * Q;
}

Mat random_matrix(int n, int p, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Mat X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = gauss(rng);
    return X;
}

}  // namespace

TEST_CASE("soft threshold closed form") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(1.0, 1.0) == 0.0);
}

TEST_CASE("lasso on an orthonormal design matches soft thresholding") {
    std::mt19937_64 rng(11);
    const int n = 40, p = 8;
    Mat X = orthonormal_design(n, p, rng);
    std::normal_distribution<double> gauss;
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = gauss(rng);

    const Vec corr = X.transpose() * y / double(n);
    for (double lambda : {0.05, 0.2, 0.5}) {
        EnetFit fit = elastic_net_fit(X, y, lambda, 1.0, 1e-10);
        for (int j = 0; j < p; ++j)
            CHECK(fit.beta.values[j] == Catch::Approx(soft_threshold(corr[j], lambda)).margin(1e-8));
    }
}

TEST_CASE("lambda at or above lambda_max gives the zero solution") {
    std::mt19937_64 rng(12);
    Mat X = random_matrix(30, 20, rng);
    std::normal_distribution<double> gauss;
    Vec y(30);
    for (int i = 0; i < 30; ++i) y[i] = gauss(rng);

    const double lam_max = lambda_max_value(X, y, 1.0);
    EnetFit fit = elastic_net_fit(X, y, lam_max, 1.0, 1e-10);
    CHECK(fit.beta.support_size() == 0);
    fit = elastic_net_fit(X, y, 2.0 * lam_max, 1.0, 1e-10);
    CHECK(fit.beta.support_size() == 0);
}

TEST_CASE("ridge limit matches the closed form") {
    std::mt19937_64 rng(13);
    const int n = 50, p = 10;
    Mat X = random_matrix(n, p, rng);
    std::normal_distribution<double> gauss;
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = gauss(rng);

    for (double lambda : {0.1, 1.0, 5.0}) {
        EnetFit fit = elastic_net_fit(X, y, lambda, 0.0, 1e-12);
        Mat A = X.transpose() * X / double(n) + lambda * Mat::Identity(p, p);
        Vec ref = A.ldlt().solve(X.transpose() * y / double(n));
        CHECK((fit.beta.values - ref).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("coordinate sweeps never increase the objective") {
    std::mt19937_64 rng(14);
    const int n = 25, p = 60;
    Mat X = random_matrix(n, p, rng);
    std::normal_distribution<double> gauss;
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = gauss(rng);

    const double lambda = 0.3 * lambda_max_value(X, y, 0.5);
    const double alpha = 0.5;
    // Re-run coordinate descent one sweep at a time by exploiting the warm
    // start: each call continues from the previous beta.
    Vec beta = Vec::Zero(p);
    Vec colsq = X.colwise().squaredNorm().transpose() / double(n);
    double prev = elastic_net_objective(X, y, beta, lambda, alpha);
    for (int s = 0; s < 30; ++s) {
        Vec r = y - X * beta;
        for (int j = 0; j < p; ++j) {
            const double old = beta[j];
            const double rho = X.col(j).dot(r) / double(n) + colsq[j] * old;
            const double nb = soft_threshold(rho, lambda * alpha) / (colsq[j] + lambda * (1 - alpha));
            if (nb != old) {
                r += X.col(j) * (old - nb);
                beta[j] = nb;
            }
        }
        const double obj = elastic_net_objective(X, y, beta, lambda, alpha);
        CHECK(obj <= prev + 1e-12);
        prev = obj;
    }
}

TEST_CASE("converged fits satisfy the KKT certificate") {
    std::mt19937_64 rng(15);
    for (int rep = 0; rep < 5; ++rep) {
        Mat X = random_matrix(30, 50, rng);
        std::normal_distribution<double> gauss;
        Vec y(30);
        for (int i = 0; i < 30; ++i) y[i] = gauss(rng);
        const double lambda = 0.2 * lambda_max_value(X, y, 0.9);
        EnetFit fit = elastic_net_fit(X, y, lambda, 0.9, 1e-8);
        CHECK(fit.kkt_residual <= 1e-8);
        CHECK(enet_kkt_residual(X, y, fit.beta.values, lambda, 0.9) <= 1e-8);
    }
}

TEST_CASE("warm start reaches the same solution as a cold start") {
    std::mt19937_64 rng(16);
    const int n = 40, p = 80;
    Mat X = random_matrix(n, p, rng);
    std::normal_distribution<double> gauss;
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = gauss(rng);

    const double lam_hi = 0.5 * lambda_max_value(X, y, 0.9);
    const double lam_lo = 0.1 * lambda_max_value(X, y, 0.9);
    Vec beta = Vec::Zero(p);
    Vec colsq = X.colwise().squaredNorm().transpose() / double(n);
    detail::coordinate_descent(X, y, lam_hi, 0.9, beta, colsq, 1e-10, 100000);
    EnetFit warm = detail::coordinate_descent(X, y, lam_lo, 0.9, beta, colsq, 1e-10, 100000);
    EnetFit cold = elastic_net_fit(X, y, lam_lo, 0.9, 1e-10);
    CHECK((warm.beta.values - cold.beta.values).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lambda grid is logarithmic between the endpoints") {
    auto grid = lambda_grid(2.0, 5, 1e-2);
    REQUIRE(grid.size() == 5);
    CHECK(grid.front() == Catch::Approx(2.0));
    CHECK(grid.back() == Catch::Approx(0.02));
    for (std::size_t k = 1; k < grid.size(); ++k) {
        CHECK(grid[k] < grid[k - 1]);
        CHECK(grid[k] / grid[k - 1] == Catch::Approx(grid[1] / grid[0]));
    }
}

TEST_CASE("cv fold assignment partitions the sample") {
    std::mt19937_64 rng(17);
    auto folds = cv_fold_indices(23, 5, rng);
    REQUIRE(folds.size() == 5);
    std::vector<int> seen;
    for (const auto& f : folds) {
        CHECK(int(f.size()) >= 4);
        CHECK(int(f.size()) <= 5);
        seen.insert(seen.end(), f.begin(), f.end());
    }
    std::sort(seen.begin(), seen.end());
    std::vector<int> expect(23);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(seen == expect);
}

TEST_CASE("cross-validated lambda is deterministic for a fixed engine seed") {
    std::mt19937_64 rng(18);
    Mat X = random_matrix(60, 40, rng);
    std::normal_distribution<double> gauss;
    Vec y = X.col(0) + X.col(5);
    for (int i = 0; i < 60; ++i) y[i] += 0.5 * gauss(rng);

    auto r1 = make_engine(42);
    auto r2 = make_engine(42);
    const double a = cv_lambda(X, y, 0.9, 5, r1, 30);
    const double b = cv_lambda(X, y, 0.9, 5, r2, 30);
    CHECK(a == b);
}

TEST_CASE("cross-validation on pure noise picks a heavy penalty") {
    std::mt19937_64 rng(19);
    Mat X = random_matrix(80, 40, rng);
    std::normal_distribution<double> gauss;
    Vec y(80);
    for (int i = 0; i < 80; ++i) y[i] = gauss(rng);
    y.array() -= y.mean();
    X.rowwise() -= X.colwise().mean().eval();

    auto cvr = make_engine(7);
    const double lambda = cv_lambda(X, y, 1.0, 10, cvr, 40);
    const double lam_max = lambda_max_value(X, y, 1.0);
    // On null data the chosen penalty should sit in the top part of the grid.
    CHECK(lambda >= 0.2 * lam_max);
}

TEST_CASE("plug-in heritability recovers strong sparse signal") {
    SimulationSpec spec;
    spec.n = 150;
    spec.p = 300;
    spec.genotype.n_blocks = 10;
    spec.genotype.block_corr = 0.2;
    spec.causal_mode = CausalMode::RandomK;
    spec.causal_k = 5;
    spec.target_h2 = 0.8;
    spec.sigma2_eps = 1.0;
    spec.seed = 21;
    SimulatedDataset ds = simulate_dataset(spec);
    GenotypeMatrix G = impute_and_center(ds.genotypes);
    PhenotypeVector y = ds.phenotype.centered();

    HeritabilityEstimate est = enet_heritability(G, y, 0.9, 1, 5, 40);
    CHECK(est.h2 > 0.4);
    CHECK(est.h2 <= 1.0);
    CHECK(est.support_size() >= 1);
    CHECK_FALSE(est.interval.has_value());

    // Pure-noise phenotype gives an empty or tiny fit.
    std::mt19937_64 nrng(5);
    std::normal_distribution<double> gauss;
    Vec noise(G.n());
    for (int i = 0; i < G.n(); ++i) noise[i] = gauss(nrng);
    PhenotypeVector yn;
    yn.values = noise.array() - noise.mean();
    yn.mean_removed = true;
    HeritabilityEstimate e0 = enet_heritability(G, yn, 0.9, 1, 5, 40);
    CHECK(e0.h2 < 0.3);
}
