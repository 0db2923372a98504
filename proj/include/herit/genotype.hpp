#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "herit/common.hpp"
#include "herit/core.hpp"

namespace herit {

// Missing genotype entries are stored as NaN until impute_and_center.
struct GenotypeMatrix {
    Mat entries;
    std::vector<std::string> variant_ids;
    std::vector<std::string> sample_ids;
    Vec maf;           // per variant, in [0, 0.5], from observed entries only
    Vec missing_frac;  // per variant, in [0, 1]
    bool centered = false;

    Eigen::Index n() const { return entries.rows(); }
    Eigen::Index p() const { return entries.cols(); }
};

namespace detail {

inline void split_csv_line(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline double parse_entry(const std::string& tok, int row, int col) {
    if (tok == "NA") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError("non-numeric token '" + tok + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    }
    if (used != tok.size())
        throw ParseError("trailing garbage in token '" + tok + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    return v;
}

inline void check_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw ParseError(std::string("duplicate ") + what + ": " + id);
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

// Recomputes maf/missing_frac from the stored entries (observed values only).
inline void recompute_column_stats(GenotypeMatrix& G) {
    const auto n = G.n();
    const auto p = G.p();
    G.maf.resize(p);
    G.missing_frac.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double sum = 0.0;
        Eigen::Index obs = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = G.entries(i, j);
            if (std::isnan(v)) continue;
            sum += v;
            ++obs;
        }
        G.missing_frac[j] = double(n - obs) / double(n);
        if (obs == 0) {
            G.maf[j] = 0.0;
            continue;
        }
        // Allele frequency from the 0/1 haploid coding; clamp keeps real-valued
        // matrices from producing out-of-range values.
        const double f = sum / double(obs);
        G.maf[j] = std::clamp(std::min(f, 1.0 - f), 0.0, 0.5);
    }
}

// CSV format: header "sample_id,<variant ids...>", one row per sample,
// missing entries written as NA.
inline GenotypeMatrix load_genotype_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open genotype file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty genotype file: " + path);
    detail::strip_cr(line);
    std::vector<std::string> header;
    detail::split_csv_line(line, header);
    if (header.size() < 2) throw ParseError("genotype header needs at least one variant column");

    GenotypeMatrix G;
    G.variant_ids.assign(header.begin() + 1, header.end());
    detail::check_unique(G.variant_ids, "variant id");
    const std::size_t p = G.variant_ids.size();

    std::vector<std::vector<double>> rows;
    std::vector<std::string> fields;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (line.empty()) continue;
        detail::split_csv_line(line, fields);
        if (fields.size() != p + 1)
            throw ParseError("ragged row at line " + std::to_string(lineno) + ": expected " +
                             std::to_string(p + 1) + " fields, got " +
                             std::to_string(fields.size()));
        G.sample_ids.push_back(fields[0]);
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p; ++j)
            row[j] = detail::parse_entry(fields[j + 1], lineno, int(j + 2));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("genotype file has no data rows: " + path);
    detail::check_unique(G.sample_ids, "sample id");

    G.entries.resize(Eigen::Index(rows.size()), Eigen::Index(p));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < p; ++j) G.entries(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    recompute_column_stats(G);
    return G;
}

inline void save_genotype_csv(const GenotypeMatrix& G, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write genotype file: " + path);
    out << "sample_id";
    for (const auto& v : G.variant_ids) out << ',' << v;
    out << '\n';
    out.precision(17);
    for (Eigen::Index i = 0; i < G.n(); ++i) {
        out << G.sample_ids[std::size_t(i)];
        for (Eigen::Index j = 0; j < G.p(); ++j) {
            const double v = G.entries(i, j);
            if (std::isnan(v))
                out << ",NA";
            else
                out << ',' << v;
        }
        out << '\n';
    }
}

// Phenotype file: header "sample_id,value".
inline std::pair<std::vector<std::string>, Vec> load_phenotype_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open phenotype file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty phenotype file: " + path);
    detail::strip_cr(line);
    std::vector<std::string> fields;
    detail::split_csv_line(line, fields);
    if (fields.size() != 2) throw ParseError("phenotype header must have two columns");

    std::vector<std::string> ids;
    std::vector<double> vals;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (line.empty()) continue;
        detail::split_csv_line(line, fields);
        if (fields.size() != 2)
            throw ParseError("ragged phenotype row at line " + std::to_string(lineno));
        ids.push_back(fields[0]);
        vals.push_back(detail::parse_entry(fields[1], lineno, 2));
    }
    if (ids.empty()) throw ParseError("phenotype file has no data rows: " + path);
    detail::check_unique(ids, "sample id");
    Vec v = Eigen::Map<Vec>(vals.data(), Eigen::Index(vals.size()));
    return {std::move(ids), std::move(v)};
}

inline void save_phenotype_csv(const std::vector<std::string>& sample_ids, const Vec& values,
                               const std::string& path) {
    if (std::size_t(values.size()) != sample_ids.size())
        throw DataError("save_phenotype_csv: id/value length mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write phenotype file: " + path);
    out.precision(17);
    out << "sample_id,value\n";
    for (std::size_t i = 0; i < sample_ids.size(); ++i)
        out << sample_ids[i] << ',' << values[Eigen::Index(i)] << '\n';
}

// Reorders the phenotype to match the genotype sample order; the two id sets
// must match exactly.
inline PhenotypeVector align_phenotype(const GenotypeMatrix& G,
                                       const std::vector<std::string>& pheno_ids,
                                       const Vec& pheno_values) {
    if (pheno_ids.size() != G.sample_ids.size())
        throw DataError("sample count mismatch between genotype and phenotype files");
    std::unordered_map<std::string, Eigen::Index> pos;
    for (std::size_t i = 0; i < pheno_ids.size(); ++i) pos[pheno_ids[i]] = Eigen::Index(i);
    PhenotypeVector y;
    y.values.resize(G.n());
    for (Eigen::Index i = 0; i < G.n(); ++i) {
        auto it = pos.find(G.sample_ids[std::size_t(i)]);
        if (it == pos.end())
            throw DataError("sample id missing from phenotype file: " + G.sample_ids[std::size_t(i)]);
        y.values[i] = pheno_values[it->second];
    }
    require_finite(y.values, "phenotype");
    return y;
}

// Keeps variants with maf >= maf_min and missing_frac <= missing_max
// (both boundaries inclusive). Idempotent; preserves column order.
inline GenotypeMatrix filter_variants(const GenotypeMatrix& G, double maf_min = 0.05,
                                      double missing_max = 0.10) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < G.p(); ++j)
        if (G.maf[j] >= maf_min && G.missing_frac[j] <= missing_max) keep.push_back(j);
    if (keep.empty()) throw DataError("filter_variants: all variants removed");
    GenotypeMatrix out;
    out.sample_ids = G.sample_ids;
    out.centered = G.centered;
    out.entries.resize(G.n(), Eigen::Index(keep.size()));
    out.maf.resize(Eigen::Index(keep.size()));
    out.missing_frac.resize(Eigen::Index(keep.size()));
    out.variant_ids.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.entries.col(Eigen::Index(k)) = G.entries.col(keep[k]);
        out.variant_ids.push_back(G.variant_ids[std::size_t(keep[k])]);
        out.maf[Eigen::Index(k)] = G.maf[keep[k]];
        out.missing_frac[Eigen::Index(k)] = G.missing_frac[keep[k]];
    }
    return out;
}

// Mean-imputes missing entries from the observed column mean, then centers
// each column. Original maf/missing_frac metadata is kept.
inline GenotypeMatrix impute_and_center(const GenotypeMatrix& G) {
    GenotypeMatrix out = G;
    const auto n = out.n();
    for (Eigen::Index j = 0; j < out.p(); ++j) {
        double sum = 0.0;
        Eigen::Index obs = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = out.entries(i, j);
            if (std::isnan(v)) continue;
            sum += v;
            ++obs;
        }
        const double m = obs > 0 ? sum / double(obs) : 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double& v = out.entries(i, j);
            if (std::isnan(v)) v = m;
            v -= m;
        }
    }
    out.centered = true;
    return out;
}

// Wraps a plain matrix, centering columns. Convenient for tests and the
// simulator, which work with Eigen matrices directly.
inline GenotypeMatrix genotype_from_matrix(Mat X, bool center = true) {
    GenotypeMatrix G;
    G.entries = std::move(X);
    G.sample_ids.reserve(std::size_t(G.n()));
    G.variant_ids.reserve(std::size_t(G.p()));
    for (Eigen::Index i = 0; i < G.n(); ++i) G.sample_ids.push_back("s" + std::to_string(i));
    for (Eigen::Index j = 0; j < G.p(); ++j) G.variant_ids.push_back("v" + std::to_string(j));
    recompute_column_stats(G);
    if (center) return impute_and_center(G);
    return G;
}

// Column subset (used by the 'causalgenes' benchmark setting).
inline GenotypeMatrix select_columns(const GenotypeMatrix& G, const std::vector<int>& cols) {
    GenotypeMatrix out;
    out.sample_ids = G.sample_ids;
    out.centered = G.centered;
    out.entries.resize(G.n(), Eigen::Index(cols.size()));
    out.maf.resize(Eigen::Index(cols.size()));
    out.missing_frac.resize(Eigen::Index(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const Eigen::Index j = cols[k];
        out.entries.col(Eigen::Index(k)) = G.entries.col(j);
        out.variant_ids.push_back(G.variant_ids[std::size_t(j)]);
        out.maf[Eigen::Index(k)] = G.maf[j];
        out.missing_frac[Eigen::Index(k)] = G.missing_frac[j];
    }
    return out;
}

// Row subset; columns are re-centered when the source was centered so the
// estimator contracts keep holding on the subsample.
inline GenotypeMatrix select_rows(const GenotypeMatrix& G, const std::vector<int>& rows) {
    GenotypeMatrix out;
    out.variant_ids = G.variant_ids;
    out.entries.resize(Eigen::Index(rows.size()), G.p());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.entries.row(Eigen::Index(k)) = G.entries.row(rows[k]);
        out.sample_ids.push_back(G.sample_ids[std::size_t(rows[k])]);
    }
    recompute_column_stats(out);
    if (G.centered) {
        out.entries.rowwise() -= out.entries.colwise().mean();
        out.centered = true;
    }
    return out;
}

inline void require_centered(const GenotypeMatrix& G, const char* where) {
    if (!G.centered) throw DataError(std::string(where) + ": genotype matrix must be centered");
}

}  // namespace herit
