// Command-line surface for the heritability toolkit: dataset simulation,
// per-dataset estimation, the replication benchmark sweep and report
// summaries.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "herit/herit.hpp"

namespace fs = std::filesystem;
using namespace herit;

namespace {

void write_truth_file(const SimulatedDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write truth file: " + path);
    out.precision(17);
    out << "# h2 = " << ds.true_h2 << '\n';
    out << "# sigma2_eps = " << ds.sigma2_eps << '\n';
    out << "variant_id,beta\n";
    for (Eigen::Index j = 0; j < ds.true_effects.values.size(); ++j)
        out << ds.genotypes.variant_ids[std::size_t(j)] << ',' << ds.true_effects.values[j] << '\n';
}

double read_truth_sigma2(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open truth file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const std::string tag = "# sigma2_eps =";
        if (line.rfind(tag, 0) == 0) return std::stod(line.substr(tag.size()));
    }
    throw ParseError("truth file has no sigma2_eps line: " + path);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<long> seed) {
    SimulationSpec spec = load_simulation_spec(config_path);
    if (seed) spec.seed = std::uint64_t(*seed);
    fs::create_directories(out_dir);
    SimulatedDataset ds = simulate_dataset(spec);
    save_genotype_csv(ds.genotypes, (fs::path(out_dir) / "genotype.csv").string());
    save_phenotype_csv(ds.genotypes.sample_ids, ds.phenotype.values,
                       (fs::path(out_dir) / "phenotype.csv").string());
    write_truth_file(ds, (fs::path(out_dir) / "truth.csv").string());
    std::cout << "simulated n=" << ds.genotypes.n() << " p=" << ds.genotypes.p()
              << " true_h2=" << ds.true_h2 << " -> " << out_dir << '\n';
    return 0;
}

int cmd_estimate(const std::string& genotype_path, const std::string& phenotype_path,
                 const std::string& methods_csv, const std::string& truth_path, double alpha,
                 long seed, const std::string& out_path, int boost_B, int cv_grid,
                 int parallelism) {
    std::vector<Method> methods;
    for (const auto& m : detail::split_list(methods_csv)) methods.push_back(method_from_name(m));
    if (methods.empty()) throw SpecError("estimate: no methods given");

    double sigma2_true = -1.0;
    for (Method m : methods)
        if (m == Method::Oracle) {
            if (truth_path.empty())
                throw SpecError("estimate: the oracle method requires --truth (true noise variance)");
            sigma2_true = read_truth_sigma2(truth_path);
        }

    GenotypeMatrix raw = load_genotype_csv(genotype_path);
    auto [ids, values] = load_phenotype_csv(phenotype_path);
    PhenotypeVector y_raw = align_phenotype(raw, ids, values);
    GenotypeMatrix G = impute_and_center(filter_variants(raw));
    PhenotypeVector y = y_raw.centered();

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw DataError("cannot write report: " + out_path);
        out = &file;
    }
    *out << "method,h2,lo,hi,status,wall_time_s,support_size\n";
    out->precision(10);

    std::optional<SpectralDecomposition> sd_cache;
    int ok_count = 0;
    for (Method m : methods) {
        MethodContext ctx;
        ctx.alpha = alpha;
        ctx.sigma2_true = sigma2_true;
        ctx.seed = std::uint64_t(seed);
        ctx.boost_B = boost_B;
        ctx.cv_grid = cv_grid;
        ctx.parallelism = parallelism;
        const auto t0 = std::chrono::steady_clock::now();
        std::optional<HeritabilityEstimate> est;
        std::string error;
        try {
            est = run_method(m, G, y, ctx, &sd_cache);
        } catch (const Error& e) {
            error = e.what();
        }
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        *out << method_name(m) << ',';
        if (est) {
            ++ok_count;
            *out << est->h2 << ',';
            if (est->interval)
                *out << est->interval->lo << ',' << est->interval->hi;
            else
                *out << ',';
            *out << ",ok," << dt << ',';
            if (est->support_size() >= 0) *out << est->support_size();
            *out << '\n';
        } else {
            *out << ",,,failed," << dt << ",\n";
            std::cerr << method_name(m) << " failed: " << error << '\n';
        }
    }
    return ok_count > 0 ? 0 : 1;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir,
                  std::optional<long> seed, std::optional<int> parallelism) {
    BenchmarkConfig cfg = load_benchmark_config(config_path);
    if (seed) cfg.base_seed = std::uint64_t(*seed);
    if (parallelism) cfg.parallelism = *parallelism;
    fs::create_directories(out_dir);
    BenchmarkReport report = run_benchmark(cfg);
    write_rows_csv(report.rows, (fs::path(out_dir) / "rows.csv").string());
    write_summary_csv(report.summary, (fs::path(out_dir) / "summary.csv").string());
    write_plot_long_csv(report.rows, (fs::path(out_dir) / "plot_long.csv").string());
    std::cout << summary_table(report.summary);
    return 0;
}

int cmd_summarize(const std::string& rows_path, const std::string& out_path) {
    auto rows = read_rows_csv(rows_path);
    auto summary = summarize_rows(rows);
    if (!out_path.empty()) write_summary_csv(summary, out_path);
    std::cout << summary_table(summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heritability inference toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic genotype/phenotype dataset");
    std::string sim_config, sim_out = ".";
    std::optional<long> sim_seed;
    sim->add_option("--config", sim_config, "simulation spec (key = value file)")->required();
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--seed", sim_seed, "override the spec seed");

    // estimate
    auto* est = app.add_subcommand("estimate", "Run estimators on a genotype/phenotype pair");
    std::string est_geno, est_pheno, est_methods = "mle,enet", est_truth, est_out;
    double est_alpha = 0.05;
    long est_seed = 0;
    int est_boost_b = 100, est_cv_grid = 100, est_par = 1;
    est->add_option("--genotype", est_geno, "genotype CSV")->required();
    est->add_option("--phenotype", est_pheno, "phenotype CSV")->required();
    est->add_option("--methods", est_methods, "comma list of methods");
    est->add_option("--truth", est_truth, "truth file (needed by the oracle method)");
    est->add_option("--alpha", est_alpha, "interval level");
    est->add_option("--seed", est_seed, "seed for CV folds and sample splits");
    est->add_option("--out", est_out, "report CSV path (default: stdout)");
    est->add_option("--boost-B", est_boost_b, "BoostHer replicate count");
    est->add_option("--cv-grid", est_cv_grid, "lambda grid size for cross-validation");
    est->add_option("--parallelism", est_par, "worker threads for BoostHer");

    // benchmark
    auto* ben = app.add_subcommand("benchmark", "Run the replication benchmark sweep");
    std::string ben_config, ben_out = "bench_out";
    std::optional<long> ben_seed;
    std::optional<int> ben_par;
    ben->add_option("--config", ben_config, "benchmark config (key = value file)")->required();
    ben->add_option("--out", ben_out, "output directory");
    ben->add_option("--seed", ben_seed, "override base_seed");
    ben->add_option("--parallelism", ben_par, "override worker count");

    // summarize
    auto* sum = app.add_subcommand("summarize", "Summarize a benchmark rows file");
    std::string sum_rows, sum_out;
    sum->add_option("--rows", sum_rows, "rows CSV from 'benchmark'")->required();
    sum->add_option("--out", sum_out, "summary CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_seed);
        if (est->parsed())
            return cmd_estimate(est_geno, est_pheno, est_methods, est_truth, est_alpha, est_seed,
                                est_out, est_boost_b, est_cv_grid, est_par);
        if (ben->parsed()) return cmd_benchmark(ben_config, ben_out, ben_seed, ben_par);
        if (sum->parsed()) return cmd_summarize(sum_rows, sum_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
