#include <catch2/catch_amalgamated.hpp>

#include "herit/herit.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const std::string kCli = HERIT_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("herit_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

std::string sim_config() {
    return
        "n = 100\n"
        "p = 500\n"
        "n_blocks = 10\n"
        "causal_mode = random_k\n"
        "causal_k = 6\n"
        "target_h2 = 0.6\n"
        "seed = 3\n";
}

}  // namespace

TEST_CASE("simulate writes the three dataset files with the right shape") {
    TempDir dir;
    write_file(dir.file("sim.cfg"), sim_config());
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("data")) == 0);

    const std::string geno = read_file(dir.file("data/genotype.csv"));
    CHECK(count_lines(geno) == 101);  // header + n rows
    std::string first_line = geno.substr(0, geno.find('\n'));
    CHECK(std::count(first_line.begin(), first_line.end(), ',') == 500);  // id + p columns

    const std::string pheno = read_file(dir.file("data/phenotype.csv"));
    CHECK(count_lines(pheno) == 101);
    CHECK(pheno.rfind("sample_id,value", 0) == 0);

    const std::string truth = read_file(dir.file("data/truth.csv"));
    CHECK(truth.find("# h2 = ") != std::string::npos);
    CHECK(truth.find("# sigma2_eps = ") != std::string::npos);
    CHECK(count_lines(truth) == 2 + 1 + 500);  // two comments, header, p rows

    // The recorded h2 honors the simulation identity.
    const auto pos = truth.find("# h2 = ");
    const double h2 = std::stod(truth.substr(pos + 7));
    CHECK(h2 == Catch::Approx(0.6).margin(1e-10));
}

TEST_CASE("simulate is deterministic and seed overrides change the draw") {
    TempDir dir;
    write_file(dir.file("sim.cfg"), sim_config());
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("a")) == 0);
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("b")) == 0);
    CHECK(read_file(dir.file("a/genotype.csv")) == read_file(dir.file("b/genotype.csv")));
    CHECK(read_file(dir.file("a/phenotype.csv")) == read_file(dir.file("b/phenotype.csv")));
    CHECK(read_file(dir.file("a/truth.csv")) == read_file(dir.file("b/truth.csv")));

    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --seed 99 --out " +
                dir.file("c")) == 0);
    CHECK(read_file(dir.file("a/genotype.csv")) != read_file(dir.file("c/genotype.csv")));
}

TEST_CASE("estimate runs methods and reports per-method status") {
    TempDir dir;
    write_file(dir.file("sim.cfg"), sim_config());
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("data")) == 0);

    const std::string base = "estimate --genotype " + dir.file("data/genotype.csv") +
                             " --phenotype " + dir.file("data/phenotype.csv");
    REQUIRE(run(base + " --methods oracle,mle,moment --truth " + dir.file("data/truth.csv") +
                " --out " + dir.file("report.csv")) == 0);
    const std::string report = read_file(dir.file("report.csv"));
    CHECK(report.rfind("method,h2,lo,hi,status,wall_time_s,support_size", 0) == 0);
    CHECK(count_lines(report) == 4);
    CHECK(report.find("oracle,") != std::string::npos);
    CHECK(report.find("mle,") != std::string::npos);
    CHECK(report.find("moment,") != std::string::npos);
    CHECK(report.find(",failed,") == std::string::npos);
}

TEST_CASE("estimate report is deterministic modulo timing") {
    TempDir dir;
    write_file(dir.file("sim.cfg"), sim_config());
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("data")) == 0);

    const std::string base = "estimate --genotype " + dir.file("data/genotype.csv") +
                             " --phenotype " + dir.file("data/phenotype.csv") +
                             " --methods mle,enet --seed 5 --out ";
    REQUIRE(run(base + dir.file("r1.csv")) == 0);
    REQUIRE(run(base + dir.file("r2.csv")) == 0);

    auto strip_timing = [](const std::string& text) {
        std::stringstream in(text), out;
        std::string line;
        while (std::getline(in, line)) {
            // drop field 6 (wall_time_s)
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string tok;
            while (std::getline(ls, tok, ',')) f.push_back(tok);
            for (std::size_t i = 0; i + 1 < f.size(); ++i)
                if (i != 5) out << f[i] << ',';
            out << '\n';
        }
        return out.str();
    };
    CHECK(strip_timing(read_file(dir.file("r1.csv"))) ==
          strip_timing(read_file(dir.file("r2.csv"))));
}

TEST_CASE("estimate with oracle but no truth file is a usage error") {
    TempDir dir;
    write_file(dir.file("sim.cfg"), sim_config());
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("data")) == 0);
    const int rc = run("estimate --genotype " + dir.file("data/genotype.csv") + " --phenotype " +
                       dir.file("data/phenotype.csv") + " --methods oracle");
    CHECK(rc == 2);
}

TEST_CASE("estimate isolates a failing method and keeps going") {
    TempDir dir;
    // p <= n after filtering, so eigenprism must fail while mle succeeds.
    write_file(dir.file("sim.cfg"),
               "n = 120\np = 60\nn_blocks = 6\ncausal_mode = random_k\ncausal_k = 4\n"
               "target_h2 = 0.5\nseed = 2\n");
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("data")) == 0);
    REQUIRE(run("estimate --genotype " + dir.file("data/genotype.csv") + " --phenotype " +
                dir.file("data/phenotype.csv") + " --methods eigenprism,mle --out " +
                dir.file("report.csv")) == 0);
    const std::string report = read_file(dir.file("report.csv"));
    CHECK(report.find("eigenprism,,,,failed") != std::string::npos);
    CHECK(report.find("mle,") != std::string::npos);
    CHECK(report.find("ok") != std::string::npos);
}

TEST_CASE("estimate exits nonzero when every method fails") {
    TempDir dir;
    write_file(dir.file("sim.cfg"),
               "n = 120\np = 60\nn_blocks = 6\ncausal_mode = random_k\ncausal_k = 4\n"
               "target_h2 = 0.5\nseed = 2\n");
    REQUIRE(run("simulate --config " + dir.file("sim.cfg") + " --out " + dir.file("data")) == 0);
    const int rc = run("estimate --genotype " + dir.file("data/genotype.csv") + " --phenotype " +
                       dir.file("data/phenotype.csv") + " --methods eigenprism");
    CHECK(rc == 1);
}

TEST_CASE("benchmark writes rows, summary and plot files; summarize reproduces the summary") {
    TempDir dir;
    write_file(dir.file("bench.cfg"),
               "n = 120\np = 240\nn_blocks = 8\ncausal_mode = random_k\ncausal_k = 5\n"
               "target_h2 = 0.6\nmethods = oracle,mle\nreplicates = 2\n"
               "settings = wholegenes,gcta_model\nbase_seed = 21\n");
    REQUIRE(run("benchmark --config " + dir.file("bench.cfg") + " --out " + dir.file("out")) == 0);

    const std::string rows = read_file(dir.file("out/rows.csv"));
    CHECK(count_lines(rows) == 1 + 2 * 2 * 2);
    CHECK(rows.rfind(herit::kRowsHeader, 0) == 0);
    CHECK(fs::exists(dir.file("out/plot_long.csv")));

    REQUIRE(run("summarize --rows " + dir.file("out/rows.csv") + " --out " +
                dir.file("resummary.csv")) == 0);
    CHECK(read_file(dir.file("resummary.csv")) == read_file(dir.file("out/summary.csv")));
}

TEST_CASE("benchmark rows are reproducible across invocations and parallelism") {
    TempDir dir;
    write_file(dir.file("bench.cfg"),
               "n = 100\np = 200\nn_blocks = 8\ncausal_mode = random_k\ncausal_k = 5\n"
               "target_h2 = 0.6\nmethods = oracle,moment\nreplicates = 2\n"
               "settings = wholegenes\nbase_seed = 33\n");
    REQUIRE(run("benchmark --config " + dir.file("bench.cfg") + " --out " + dir.file("a")) == 0);
    REQUIRE(run("benchmark --config " + dir.file("bench.cfg") + " --parallelism 4 --out " +
                dir.file("b")) == 0);

    auto strip_timing = [](const std::string& text) {
        std::stringstream in(text), out;
        std::string line;
        while (std::getline(in, line)) {
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string tok;
            while (std::getline(ls, tok, ',')) f.push_back(tok);
            while (f.size() < 9) f.push_back("");
            for (std::size_t i = 0; i < f.size(); ++i)
                if (i != 7) out << f[i] << ',';
            out << '\n';
        }
        return out.str();
    };
    CHECK(strip_timing(read_file(dir.file("a/rows.csv"))) ==
          strip_timing(read_file(dir.file("b/rows.csv"))));
}

TEST_CASE("config errors surface as exit code 2") {
    TempDir dir;
    write_file(dir.file("bad.cfg"), "n = 100\np = 200\nnot_a_key = 1\n");
    CHECK(run("simulate --config " + dir.file("bad.cfg") + " --out " + dir.file("x")) == 2);
    CHECK(run("benchmark --config " + dir.file("bad.cfg") + " --out " + dir.file("y")) == 2);
}
