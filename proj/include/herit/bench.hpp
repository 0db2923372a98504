#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "herit/boosther.hpp"
#include "herit/common.hpp"
#include "herit/core.hpp"
#include "herit/eigenprism.hpp"
#include "herit/elastic_net.hpp"
#include "herit/estimate.hpp"
#include "herit/genotype.hpp"
#include "herit/mle.hpp"
#include "herit/moments.hpp"
#include "herit/scaled_lasso.hpp"
#include "herit/simulate.hpp"
#include "herit/spectral.hpp"

namespace herit {

// ---------------------------------------------------------------------------
// Key-value configuration files: one "key = value" per line, '#' comments.
// Unknown keys are hard errors so a typo cannot silently change an experiment.
// ---------------------------------------------------------------------------

using KvMap = std::map<std::string, std::string>;

inline KvMap parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    KvMap kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key))
            throw ParseError("config line " + std::to_string(lineno) + ": duplicate key " + key);
        kv[key] = val;
    }
    return kv;
}

namespace detail {

struct KvReader {
    const KvMap& kv;
    std::set<std::string> used;

    bool has(const std::string& k) {
        if (kv.count(k)) {
            used.insert(k);
            return true;
        }
        return false;
    }
    std::string str(const std::string& k, const std::string& dflt) {
        return has(k) ? kv.at(k) : dflt;
    }
    double num(const std::string& k, double dflt) {
        if (!has(k)) return dflt;
        try {
            return std::stod(kv.at(k));
        } catch (const std::exception&) {
            throw ParseError("config key '" + k + "': not a number: " + kv.at(k));
        }
    }
    long integer(const std::string& k, long dflt) {
        if (!has(k)) return dflt;
        try {
            return std::stol(kv.at(k));
        } catch (const std::exception&) {
            throw ParseError("config key '" + k + "': not an integer: " + kv.at(k));
        }
    }
    void finish(const char* what) const {
        for (const auto& [k, v] : kv)
            if (!used.count(k))
                throw ParseError(std::string("unknown ") + what + " config key: " + k);
    }
};

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto a = tok.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = tok.find_last_not_of(" \t");
        out.push_back(tok.substr(a, b - a + 1));
    }
    return out;
}

inline std::vector<CausalBlock> parse_causal_blocks(const std::string& s) {
    std::vector<CausalBlock> blocks;
    for (const auto& part : split_list(s)) {
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw ParseError("causal_blocks: expected start:length, got " + part);
        blocks.push_back({std::stoi(part.substr(0, colon)), std::stoi(part.substr(colon + 1))});
    }
    return blocks;
}

// Reads the SimulationSpec keys out of a KvReader (shared between the
// simulate command and the benchmark config).
inline SimulationSpec read_simulation_spec(KvReader& r) {
    SimulationSpec spec;
    spec.n = int(r.integer("n", 0));
    spec.p = int(r.integer("p", 0));
    spec.genotype.n_blocks = int(r.integer("n_blocks", 20));
    spec.genotype.block_corr = r.num("block_corr", 0.3);
    spec.genotype.n_clusters = int(r.integer("n_clusters", 1));
    spec.genotype.cluster_divergence = r.num("cluster_divergence", 0.0);
    spec.genotype.maf_lo = r.num("maf_lo", 0.1);
    spec.genotype.maf_hi = r.num("maf_hi", 0.5);
    const std::string mode = r.str("causal_mode", "gene_blocks");
    if (mode == "gene_blocks")
        spec.causal_mode = CausalMode::GeneBlocks;
    else if (mode == "random_k")
        spec.causal_mode = CausalMode::RandomK;
    else if (mode == "null")
        spec.causal_mode = CausalMode::Null;
    else
        throw ParseError("causal_mode: unknown value " + mode);
    if (r.has("causal_blocks")) spec.causal_blocks = parse_causal_blocks(r.kv.at("causal_blocks"));
    spec.causal_k = int(r.integer("causal_k", 0));
    const std::string dist = r.str("effect_dist", "gaussian");
    if (dist == "gaussian")
        spec.effect_dist = EffectDist::Gaussian;
    else if (dist == "student_t3")
        spec.effect_dist = EffectDist::StudentT3;
    else
        throw ParseError("effect_dist: unknown value " + dist);
    spec.target_h2 = r.num("target_h2", 0.8);
    spec.sigma2_eps = r.num("sigma2_eps", 1.0);
    const std::string model = r.str("model", "fixed_effect");
    if (model == "fixed_effect")
        spec.model = ModelKind::FixedEffect;
    else if (model == "gcta_mixed")
        spec.model = ModelKind::GctaMixed;
    else
        throw ParseError("model: unknown value " + model);
    spec.seed = std::uint64_t(r.integer("seed", 0));
    return spec;
}

}  // namespace detail

inline SimulationSpec load_simulation_spec(const std::string& path) {
    KvMap kv = parse_kv_file(path);
    detail::KvReader r{kv, {}};
    SimulationSpec spec = detail::read_simulation_spec(r);
    r.finish("simulation");
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Benchmark configuration
// ---------------------------------------------------------------------------

enum class Setting {
    WholeGenes,
    CausalGenes,
    Subsample1500,
    Subsample500,
    TEffect,
    GctaModel,
};

inline const char* setting_name(Setting s) {
    switch (s) {
        case Setting::WholeGenes: return "wholegenes";
        case Setting::CausalGenes: return "causalgenes";
        case Setting::Subsample1500: return "subsample1500";
        case Setting::Subsample500: return "subsample500";
        case Setting::TEffect: return "t_effect";
        case Setting::GctaModel: return "gcta_model";
    }
    return "?";
}

inline Setting setting_from_name(const std::string& s) {
    for (Setting x : {Setting::WholeGenes, Setting::CausalGenes, Setting::Subsample1500,
                      Setting::Subsample500, Setting::TEffect, Setting::GctaModel})
        if (s == setting_name(x)) return x;
    throw ParseError("unknown setting: " + s);
}

struct BenchmarkConfig {
    SimulationSpec simulation;
    std::string genotype_path;  // optional: real genotype CSV instead of simulation
    std::vector<Method> methods;
    int replicates = 50;
    std::vector<Setting> settings;
    double alpha = 0.05;
    std::uint64_t base_seed = 0;
    int parallelism = 1;
    int subsample1500_size = 0;  // 0: auto (1500, or n/2 when smaller)
    int subsample500_size = 0;   // 0: auto (500, or n/6 when smaller)
    int boost_B = 100;
    int cv_grid = 100;
    int cv_folds = 10;
    double enet_alpha = 0.01;
};

inline BenchmarkConfig load_benchmark_config(const std::string& path) {
    KvMap kv = parse_kv_file(path);
    detail::KvReader r{kv, {}};
    BenchmarkConfig cfg;
    cfg.genotype_path = r.str("genotype_path", "");
    cfg.simulation = detail::read_simulation_spec(r);
    for (const auto& m : detail::split_list(r.str("methods", "oracle,mle,enet")))
        cfg.methods.push_back(method_from_name(m));
    if (cfg.methods.empty()) throw ParseError("benchmark: methods must be non-empty");
    cfg.replicates = int(r.integer("replicates", 50));
    if (cfg.replicates < 1) throw ParseError("benchmark: replicates must be >= 1");
    for (const auto& s : detail::split_list(r.str("settings", "wholegenes")))
        cfg.settings.push_back(setting_from_name(s));
    if (cfg.settings.empty()) throw ParseError("benchmark: settings must be non-empty");
    cfg.alpha = r.num("alpha", 0.05);
    cfg.base_seed = std::uint64_t(r.integer("base_seed", 0));
    cfg.parallelism = int(r.integer("parallelism", 1));
    cfg.subsample1500_size = int(r.integer("subsample1500_size", 0));
    cfg.subsample500_size = int(r.integer("subsample500_size", 0));
    cfg.boost_B = int(r.integer("boost_B", 100));
    cfg.cv_grid = int(r.integer("cv_grid", 100));
    cfg.cv_folds = int(r.integer("cv_folds", 10));
    cfg.enet_alpha = r.num("enet_alpha", 0.01);
    r.finish("benchmark");
    if (cfg.genotype_path.empty()) cfg.simulation.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Rows and reports
// ---------------------------------------------------------------------------

struct BenchRow {
    std::string setting;
    int replicate = 0;
    std::string method;
    bool ok = false;
    double h2 = 0.0;
    bool has_interval = false;
    double lo = 0.0, hi = 0.0;
    double wall_time_s = 0.0;
    int support_size = -1;
};

inline const char* kRowsHeader = "setting,replicate,method,h2,lo,hi,status,wall_time_s,support_size";

inline void write_rows_csv(const std::vector<BenchRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write rows file: " + path);
    out << kRowsHeader << '\n';
    // Full round-trip precision so summaries recomputed from this file match
    // the in-memory ones exactly.
    out << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.setting << ',' << r.replicate << ',' << r.method << ',';
        if (r.ok) out << r.h2;
        out << ',';
        if (r.ok && r.has_interval) out << r.lo;
        out << ',';
        if (r.ok && r.has_interval) out << r.hi;
        out << ',' << (r.ok ? "ok" : "failed") << ',' << r.wall_time_s << ',';
        if (r.support_size >= 0) out << r.support_size;
        out << '\n';
    }
}

inline std::vector<BenchRow> read_rows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open rows file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty rows file: " + path);
    detail::strip_cr(line);
    if (line != kRowsHeader) throw ParseError("rows file: unexpected header");
    std::vector<BenchRow> rows;
    std::vector<std::string> f;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (line.empty()) continue;
        detail::split_csv_line(line, f);
        if (f.size() != 9) throw ParseError("rows file: ragged line " + std::to_string(lineno));
        BenchRow r;
        r.setting = f[0];
        r.replicate = std::stoi(f[1]);
        r.method = f[2];
        r.ok = f[6] == "ok";
        if (f[6] != "ok" && f[6] != "failed")
            throw ParseError("rows file: bad status at line " + std::to_string(lineno));
        if (r.ok) {
            r.h2 = std::stod(f[3]);
            if (!f[4].empty() && !f[5].empty()) {
                r.has_interval = true;
                r.lo = std::stod(f[4]);
                r.hi = std::stod(f[5]);
            }
        }
        r.wall_time_s = std::stod(f[7]);
        r.support_size = f[8].empty() ? -1 : std::stoi(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

struct SummaryRow {
    std::string setting;
    std::string method;
    int n_ok = 0;
    int n_failed = 0;
    double mean = 0.0;
    double sd = 0.0;
    double mean_width = 0.0;  // over ok rows carrying an interval
    double mean_time_s = 0.0;
};

inline std::vector<SummaryRow> summarize_rows(const std::vector<BenchRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::vector<const BenchRow*>> groups;
    for (const auto& r : rows) groups[{r.setting, r.method}].push_back(&r);
    std::vector<SummaryRow> out;
    for (const auto& [key, grp] : groups) {
        SummaryRow s;
        s.setting = key.first;
        s.method = key.second;
        double sum = 0.0, wsum = 0.0, tsum = 0.0;
        int nw = 0;
        for (const auto* r : grp) {
            tsum += r->wall_time_s;
            if (!r->ok) {
                ++s.n_failed;
                continue;
            }
            ++s.n_ok;
            sum += r->h2;
            if (r->has_interval) {
                wsum += r->hi - r->lo;
                ++nw;
            }
        }
        if (s.n_ok > 0) {
            s.mean = sum / s.n_ok;
            double ss = 0.0;
            for (const auto* r : grp)
                if (r->ok) ss += (r->h2 - s.mean) * (r->h2 - s.mean);
            s.sd = s.n_ok > 1 ? std::sqrt(ss / (s.n_ok - 1)) : 0.0;
        }
        if (nw > 0) s.mean_width = wsum / nw;
        s.mean_time_s = tsum / double(grp.size());
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_summary_csv(const std::vector<SummaryRow>& summary, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write summary file: " + path);
    out << "setting,method,n_ok,n_failed,mean,sd,mean_interval_width,failure_rate,mean_time_s\n";
    out << std::setprecision(10);
    for (const auto& s : summary) {
        const int total = s.n_ok + s.n_failed;
        out << s.setting << ',' << s.method << ',' << s.n_ok << ',' << s.n_failed << ',';
        if (s.n_ok > 0) out << s.mean;
        out << ',';
        if (s.n_ok > 0) out << s.sd;
        out << ',' << s.mean_width << ',' << (total > 0 ? double(s.n_failed) / total : 0.0) << ','
            << s.mean_time_s << '\n';
    }
}

inline std::string summary_table(const std::vector<SummaryRow>& summary) {
    std::ostringstream out;
    out << std::left << std::setw(16) << "setting" << std::setw(12) << "method" << std::right
        << std::setw(8) << "ok" << std::setw(8) << "failed" << std::setw(10) << "mean"
        << std::setw(10) << "sd" << std::setw(10) << "width" << std::setw(10) << "time_s" << '\n';
    out << std::string(84, '-') << '\n';
    for (const auto& s : summary) {
        out << std::left << std::setw(16) << s.setting << std::setw(12) << s.method << std::right
            << std::setw(8) << s.n_ok << std::setw(8) << s.n_failed;
        out << std::fixed << std::setprecision(4);
        if (s.n_ok > 0)
            out << std::setw(10) << s.mean << std::setw(10) << s.sd;
        else
            out << std::setw(10) << "-" << std::setw(10) << "-";
        out << std::setw(10) << s.mean_width << std::setw(10) << s.mean_time_s << '\n';
        out.unsetf(std::ios::fixed);
        out << std::setprecision(6);
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Running estimators
// ---------------------------------------------------------------------------

struct MethodContext {
    double alpha = 0.05;
    double sigma2_true = -1.0;  // oracle only
    std::uint64_t seed = 0;
    int boost_B = 100;
    int cv_grid = 100;
    int cv_folds = 10;
    double cv_min_ratio = 1e-3;
    int boost_max_support = -1;  // -1: the BoostConfig default, floor(n/2) - 2
    double enet_alpha = 0.01;
    int parallelism = 1;
};

// Dispatches one estimator. Eigenprism and MLE share the spectral
// decomposition through the optional cache argument.
inline HeritabilityEstimate run_method(Method m, const GenotypeMatrix& G, const PhenotypeVector& y,
                                       const MethodContext& ctx,
                                       std::optional<SpectralDecomposition>* sd_cache = nullptr) {
    auto spectral = [&]() -> const SpectralDecomposition* {
        if (!sd_cache) return nullptr;
        if (!sd_cache->has_value()) *sd_cache = spectral_decomposition(G, y);
        return &sd_cache->value();
    };
    switch (m) {
        case Method::Oracle:
            if (ctx.sigma2_true < 0.0)
                throw DataError("oracle method requires the true noise variance");
            return oracle_estimate(y, ctx.sigma2_true);
        case Method::Eigenprism:
            return eigenprism(G, y, ctx.alpha, spectral());
        case Method::Mle:
            return mle_heritability(G, y, ctx.alpha, spectral());
        case Method::Moment:
            return moment_heritability(G, y, ctx.alpha);
        case Method::SLasso:
            return slasso_heritability(G, y, ctx.alpha);
        case Method::Enet:
            return enet_heritability(G, y, ctx.enet_alpha, ctx.seed, ctx.cv_folds, ctx.cv_grid);
        case Method::BoostHer: {
            BoostConfig bc;
            bc.B = ctx.boost_B;
            bc.enet_alpha = ctx.enet_alpha;
            bc.cv_folds = ctx.cv_folds;
            bc.cv_grid = ctx.cv_grid;
            bc.cv_min_ratio = ctx.cv_min_ratio;
            bc.max_support = ctx.boost_max_support;
            bc.seed = ctx.seed;
            bc.parallelism = ctx.parallelism;
            return boost_heritability(G, y, bc);
        }
    }
    throw SpecError("run_method: unknown method");
}

// ---------------------------------------------------------------------------
// Benchmark sweep
// ---------------------------------------------------------------------------

namespace detail {

struct BenchData {
    GenotypeMatrix centered;          // filtered + imputed + centered
    std::vector<int> causal_columns;  // indices into the filtered matrix
};

inline BenchData prepare_bench_data(const BenchmarkConfig& cfg) {
    BenchData data;
    GenotypeMatrix raw;
    std::vector<int> causal_raw;
    if (!cfg.genotype_path.empty()) {
        raw = load_genotype_csv(cfg.genotype_path);
        auto rng = make_engine(derive_seed(cfg.base_seed, 0xc0de));
        SimulationSpec spec = cfg.simulation;
        spec.n = int(raw.n());
        spec.p = int(raw.p());
        causal_raw = causal_indices(spec, rng);
    } else {
        auto rng = make_engine(derive_seed(cfg.base_seed, 0xc0de));
        raw = simulate_genotypes(cfg.simulation, rng);
        causal_raw = causal_indices(cfg.simulation, rng);
    }
    GenotypeMatrix filtered = filter_variants(raw);
    // Remap the causal set through the filter by variant id.
    std::unordered_map<std::string, int> pos;
    for (std::size_t j = 0; j < filtered.variant_ids.size(); ++j)
        pos[filtered.variant_ids[j]] = int(j);
    for (int j : causal_raw) {
        auto it = pos.find(raw.variant_ids[std::size_t(j)]);
        if (it != pos.end()) data.causal_columns.push_back(it->second);
    }
    data.centered = impute_and_center(filtered);
    return data;
}

inline int auto_subsample_size(Setting s, int n, const BenchmarkConfig& cfg) {
    if (s == Setting::Subsample1500) {
        if (cfg.subsample1500_size > 0) return cfg.subsample1500_size;
        return n > 1500 ? 1500 : std::max(20, n / 2);
    }
    if (cfg.subsample500_size > 0) return cfg.subsample500_size;
    return n > 500 ? 500 : std::max(20, n / 6);
}

}  // namespace detail

struct BenchmarkReport {
    std::vector<BenchRow> rows;
    std::vector<SummaryRow> summary;
};

// Runs the full settings x replicates x methods sweep. Seeds are derived per
// (setting, replicate) cell, so the output is identical for any parallelism.
inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
    detail::BenchData data = detail::prepare_bench_data(cfg);
    const int n = int(data.centered.n());
    if (data.causal_columns.empty() && cfg.simulation.causal_mode != CausalMode::Null)
        throw DataError("benchmark: causal set empty after filtering");

    struct Cell {
        std::size_t si;
        int rep;
    };
    std::vector<Cell> cells;
    for (std::size_t si = 0; si < cfg.settings.size(); ++si)
        for (int r = 0; r < cfg.replicates; ++r) cells.push_back({si, r});

    std::vector<std::vector<BenchRow>> cell_rows(cells.size());

    auto run_cell = [&](std::size_t ci) {
        const Setting setting = cfg.settings[cells[ci].si];
        const int rep = cells[ci].rep;
        auto rng = make_engine(derive_seed(cfg.base_seed, cells[ci].si + 1, std::uint64_t(rep)));

        // Fresh effects and noise each replicate; the genotype matrix is fixed.
        PhenotypeVector y_full;
        double sigma2_true;
        if (setting == Setting::GctaModel) {
            GctaPhenotype gp =
                simulate_phenotype_gcta(data.centered, cfg.simulation.target_h2, rng);
            y_full = std::move(gp.y);
            sigma2_true = gp.sigma2;
        } else {
            const EffectDist dist =
                setting == Setting::TEffect ? EffectDist::StudentT3 : EffectDist::Gaussian;
            if (cfg.simulation.causal_mode == CausalMode::Null) {
                sigma2_true = cfg.simulation.sigma2_eps;
                std::normal_distribution<double> noise(0.0, std::sqrt(sigma2_true));
                y_full.values.resize(n);
                for (int i = 0; i < n; ++i) y_full.values[i] = noise(rng);
            } else {
                EffectVector beta0 = draw_effects(data.causal_columns, dist, rng, int(data.centered.p()));
                EffectVector beta = rescale_effects(beta0, data.centered,
                                                    cfg.simulation.target_h2,
                                                    cfg.simulation.sigma2_eps);
                y_full = simulate_phenotype_fixed(data.centered, beta, cfg.simulation.sigma2_eps, rng);
                sigma2_true = cfg.simulation.sigma2_eps;
            }
        }

        // Setting-specific view of the data.
        GenotypeMatrix G_cell;
        PhenotypeVector y_cell = y_full;
        if (setting == Setting::CausalGenes) {
            G_cell = select_columns(data.centered, data.causal_columns);
        } else if (setting == Setting::Subsample1500 || setting == Setting::Subsample500) {
            const int m = std::min(n, detail::auto_subsample_size(setting, n, cfg));
            std::vector<int> all((std::size_t(n)));
            std::iota(all.begin(), all.end(), 0);
            std::shuffle(all.begin(), all.end(), rng);
            std::vector<int> rows(all.begin(), all.begin() + m);
            std::sort(rows.begin(), rows.end());
            G_cell = select_rows(data.centered, rows);
            Vec ysub(m);
            for (int i = 0; i < m; ++i) ysub[i] = y_full.values[rows[std::size_t(i)]];
            y_cell.values = std::move(ysub);
            y_cell.mean_removed = false;
        } else {
            G_cell = data.centered;
        }
        PhenotypeVector y_centered = y_cell.centered();

        std::optional<SpectralDecomposition> sd_cache;
        auto& out = cell_rows[ci];
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            const Method m = cfg.methods[mi];
            BenchRow row;
            row.setting = setting_name(setting);
            row.replicate = rep;
            row.method = method_name(m);
            MethodContext ctx;
            ctx.alpha = cfg.alpha;
            ctx.sigma2_true = sigma2_true;
            ctx.seed = derive_seed(cfg.base_seed, cells[ci].si + 101, std::uint64_t(rep));
            ctx.boost_B = cfg.boost_B;
            ctx.cv_grid = cfg.cv_grid;
            ctx.cv_folds = cfg.cv_folds;
            ctx.enet_alpha = cfg.enet_alpha;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                HeritabilityEstimate est = run_method(m, G_cell, y_centered, ctx, &sd_cache);
                row.ok = true;
                row.h2 = est.h2;
                if (est.interval) {
                    row.has_interval = true;
                    row.lo = est.interval->lo;
                    row.hi = est.interval->hi;
                }
                row.support_size = est.support_size();
            } catch (const Error&) {
                row.ok = false;
            }
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
            out.push_back(std::move(row));
        }
    };

    const int workers = std::max(1, cfg.parallelism);
    if (workers == 1) {
        for (std::size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t ci = std::size_t(w); ci < cells.size(); ci += std::size_t(workers))
                    run_cell(ci);
            });
        for (auto& t : pool) t.join();
    }

    BenchmarkReport report;
    for (auto& rows : cell_rows)
        for (auto& r : rows) report.rows.push_back(std::move(r));
    report.summary = summarize_rows(report.rows);
    return report;
}

inline void write_plot_long_csv(const std::vector<BenchRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write plot file: " + path);
    out << "setting,method,h2\n";
    out << std::setprecision(10);
    for (const auto& r : rows)
        if (r.ok) out << r.setting << ',' << r.method << ',' << r.h2 << '\n';
}

}  // namespace herit
