#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace herit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. Every failure an estimator can report maps onto one of
// these; the benchmark harness catches Error and records a failed row.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct SpecError : Error {
    using Error::Error;
};
struct SolverError : Error {
    using Error::Error;
};
struct EstimatorFailed : Error {
    using Error::Error;
};

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

inline void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw DataError(std::string(what) + ": non-finite values");
}

// splitmix64, used only to derive independent seeds for per-task engines.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(base ^ mix64(a)) ^ mix64(b + 0x517cc1b727220a95ULL));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double mean_of(const Vec& v) { return v.mean(); }

// Sample variance, divisor n-1.
inline double sample_variance(const Vec& v) {
    const auto n = v.size();
    if (n < 2) throw DataError("sample_variance: need n >= 2");
    const double m = v.mean();
    return (v.array() - m).square().sum() / double(n - 1);
}

}  // namespace herit
