#pragma once

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <vector>

#include "herit/common.hpp"

namespace herit {

inline double normal_quantile(double prob) {
    boost::math::normal_distribution<double> dist;
    return boost::math::quantile(dist, prob);
}

// Empirical quantile with linear interpolation between order statistics.
inline double empirical_quantile(std::vector<double> v, double q) {
    if (v.empty()) throw DataError("empirical_quantile: empty sample");
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double pos = q * double(v.size() - 1);
    const std::size_t lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - double(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace herit
