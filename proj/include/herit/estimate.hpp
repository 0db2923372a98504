#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "herit/common.hpp"

namespace herit {

enum class Method { Oracle, Eigenprism, Mle, Moment, SLasso, Enet, BoostHer };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::Oracle: return "oracle";
        case Method::Eigenprism: return "eigenprism";
        case Method::Mle: return "mle";
        case Method::Moment: return "moment";
        case Method::SLasso: return "slasso";
        case Method::Enet: return "enet";
        case Method::BoostHer: return "boosther";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    for (Method m : {Method::Oracle, Method::Eigenprism, Method::Mle, Method::Moment,
                     Method::SLasso, Method::Enet, Method::BoostHer}) {
        if (s == method_name(m)) return m;
    }
    throw ParseError("unknown method: " + s);
}

enum class IntervalKind { Confidence, Honest, Reliable };

inline const char* interval_kind_name(IntervalKind k) {
    switch (k) {
        case IntervalKind::Confidence: return "confidence";
        case IntervalKind::Honest: return "honest";
        case IntervalKind::Reliable: return "reliable";
    }
    return "?";
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    IntervalKind kind = IntervalKind::Confidence;
};

struct HeritabilityEstimate {
    Method method = Method::Oracle;
    double h2 = 0.0;  // clamped to [0,1]
    std::optional<Interval> interval;
    // Free-form numeric diagnostics: raw (unclamped) estimate, support size,
    // solver iterations, objective values, constraint residuals.
    std::map<std::string, double> diagnostics;
    // BoostHer keeps all per-split estimates here.
    std::vector<double> split_estimates;

    int support_size() const {
        auto it = diagnostics.find("support_size");
        return it == diagnostics.end() ? -1 : int(it->second);
    }
};

// Interval around a clamped point estimate, itself clamped to [0,1].
inline Interval symmetric_interval(double h2, double half_width, IntervalKind kind) {
    return Interval{clamp01(h2 - half_width), clamp01(h2 + half_width), kind};
}

}  // namespace herit
