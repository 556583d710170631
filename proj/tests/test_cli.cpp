#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "uiq/experiment.hpp"

namespace fs = std::filesystem;
using namespace uiq;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("uiq_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

int lab(const std::string& args) {
    const std::string cmd = std::string(UIQ_LAB_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(FitExponent, ExactQuarticHasZeroError) {
    std::vector<std::pair<double, double>> pts;
    for (int x = 1; x <= 100; ++x) pts.emplace_back(x, std::pow(x, 4.0));
    const FitResult f = fit_exponent(pts, 8, 64);
    EXPECT_NEAR(f.slope, 4.0, 1e-12);
    EXPECT_LT(f.std_error, 1e-10);
    EXPECT_GE(f.std_error, 0.0);
    EXPECT_EQ(f.points, 57u);
    EXPECT_EQ(f.lo, 8);
    EXPECT_EQ(f.hi, 64);
}

TEST(FitExponent, PrefactorGoesToIntercept) {
    for (double c : {1e-6, 0.3, 7.0, 1e9}) {
        std::vector<std::pair<double, double>> pts;
        for (int x = 2; x <= 40; ++x) pts.emplace_back(x, c * x * x * x);
        const FitResult f = fit_exponent(pts, 2, 40);
        EXPECT_NEAR(f.slope, 3.0, 1e-10);
        EXPECT_NEAR(f.intercept, std::log(c), 1e-8);
    }
}

TEST(FitExponent, OnlyWindowPointsCount) {
    std::vector<std::pair<double, double>> pts;
    for (int x = 1; x <= 20; ++x) pts.emplace_back(x, x <= 10 ? std::pow(x, 2.0) : 1.0);
    EXPECT_NEAR(fit_exponent(pts, 1, 10).slope, 2.0, 1e-12);
}

TEST(FitExponent, NoisyDataHasPositiveError) {
    std::vector<std::pair<double, double>> pts;
    Rng rng(11);
    for (int x = 1; x <= 50; ++x) pts.emplace_back(x, std::pow(x, 1.5) * (1 + 0.1 * (rng.uniform() - 0.5)));
    const FitResult f = fit_exponent(pts, 1, 50);
    EXPECT_GT(f.std_error, 0.0);
    EXPECT_NEAR(f.slope, 1.5, 5 * f.std_error + 0.01);
}

TEST(FitExponent, InsufficientOrInvalidPoints) {
    const std::vector<std::pair<double, double>> two{{1, 1}, {2, 4}, {100, 5}};
    EXPECT_THROW(fit_exponent(two, 1, 10), RangeError);
    EXPECT_THROW(fit_exponent({{1, 1}, {2, 0}, {3, 9}}, 1, 10), RangeError);
    EXPECT_THROW(fit_exponent({{2, 1}, {2, 2}, {2, 3}}, 1, 10), RangeError);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
    ExperimentConfig a;
    a.command = "growth";
    a.k_cut = 512;
    a.n_grid = {10, 20};
    a.tree = "1(2)";
    ExperimentConfig b;
    b.apply_json(a.to_json());
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_THROW(b.apply_json(nlohmann::json{{"k_cutt", 3}}), ConfigError);
    EXPECT_THROW(b.apply_json(nlohmann::json{{"k_cut", "many"}}), ConfigError);
    EXPECT_THROW(b.apply_json(nlohmann::json::array()), ConfigError);
}

TEST(Config, HashTracksIdentityButNotThreads) {
    ExperimentConfig a;
    a.command = "constants";
    ExperimentConfig b = a;
    b.threads = 7;
    b.out_dir = "/elsewhere";
    EXPECT_EQ(a.hash(), b.hash());
    b.seed = a.seed + 1;
    EXPECT_NE(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Config, ValidationRejectsBadValues) {
    ExperimentConfig c;
    c.command = "nope";
    EXPECT_THROW(c.validate(), ConfigError);
    c.command = "constants";
    EXPECT_NO_THROW(c.validate());
    c.k_max = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c.k_max = 3;
    c.fit_hi = c.fit_lo;
    EXPECT_THROW(c.validate(), ConfigError);
    c.fit_hi = 64;
    c.mode = "other";
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunExperiment, ConstantsTable) {
    ExperimentConfig c;
    c.command = "constants";
    c.k_max = 10;
    c.out_dir = scratch("constants").string();
    const ExperimentReport rep = run_experiment(c);
    ASSERT_EQ(rep.files.size(), 1u);
    const auto lines = lines_of(slurp(rep.files[0]));
    ASSERT_EQ(lines.size(), 12u);
    EXPECT_EQ(lines[0].rfind("# uiq_lab constants config_hash=" + c.hash() + " seed=1 rng=splitmix64-ctr/v1", 0), 0u);
    EXPECT_EQ(lines[1], "k,z,w,d,p,q,r");
    EXPECT_EQ(lines[2], "1,1/4,4/3,1,23/27,0,4/27");
}

TEST(RunExperiment, CountsAuditHasNoMismatch) {
    ExperimentConfig c;
    c.command = "counts";
    c.n_max = 7;
    c.k_max = 4;
    c.out_dir = scratch("counts").string();
    const ExperimentReport rep = run_experiment(c);
    EXPECT_EQ(rep.summary.at("audit_mismatches"), 0.0);
    const auto lines = lines_of(slurp(fs::path(c.out_dir) / "counts.csv"));
    EXPECT_EQ(lines[1], "N,k,D,E");
    EXPECT_EQ(lines[2], "0,1,1,0");
    EXPECT_EQ(lines.size(), 2u + 8 * 4);
}

TEST(RunExperiment, MapQuadOnGivenTree) {
    ExperimentConfig c;
    c.command = "map-quad";
    c.tree = "1(2,1(2))";
    c.out_dir = scratch("mapquad").string();
    const ExperimentReport rep = run_experiment(c);
    EXPECT_EQ(rep.summary.at("bad_maps"), 0.0);
    std::ifstream in(fs::path(c.out_dir) / "map.txt");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("# uiq_lab map-quad", 0), 0u);
    const PlanarMap m = PlanarMap::read(in);
    EXPECT_EQ(m.vertex_count(), 5u);
    EXPECT_EQ(m.edge_count(), 6u);
}

TEST(RunExperiment, EveryCsvCarriesConfigLine) {
    ExperimentConfig c;
    c.out_dir = scratch("all").string();
    c.k_max = 12;
    c.j_max = 12;
    c.k_cut = 64;
    c.j_target = 3;
    c.n_max = 6;
    c.N = 12;
    c.replicas = 50;
    c.horizon = 20000;
    c.fit_lo = 2;
    c.fit_hi = 12;
    c.n_grid = {4, 8};
    for (const std::string& cmd : experiment_commands()) {
        c.command = cmd;
        c.mode = cmd == "sample-tree" ? "uit" : "finite";
        const ExperimentReport rep = run_experiment(c);
        ASSERT_FALSE(rep.files.empty()) << cmd;
        for (const auto& f : rep.files) {
            const auto lines = lines_of(slurp(f));
            ASSERT_GE(lines.size(), 2u) << f;
            EXPECT_EQ(lines[0], CsvWriter::config_comment(c)) << f;
        }
    }
}

TEST(Cli, RerunsAreByteIdentical) {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    const std::string common = " --seed 99 sample-tree -N 40";
    ASSERT_EQ(lab("--out " + a.string() + common), 0);
    ASSERT_EQ(lab("--out " + b.string() + common), 0);
    EXPECT_EQ(slurp(a / "tree.txt"), slurp(b / "tree.txt"));
    EXPECT_EQ(slurp(a / "tree_labels.csv"), slurp(b / "tree_labels.csv"));

    const std::string uit = " --seed 4 sample-tree --mode uit --j-target 3 --k-cut 12";
    ASSERT_EQ(lab("--out " + a.string() + uit), 0);
    ASSERT_EQ(lab("--out " + b.string() + uit + " --threads 1"), 0);
    for (const char* f : {"tree.txt", "spine.csv", "label_histogram.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;

    const std::string cyl = " --seed 5 cylinder --n-grid 10 20 --replicas 3000";
    ASSERT_EQ(lab("--out " + a.string() + cyl + " --threads 1"), 0);
    ASSERT_EQ(lab("--out " + b.string() + cyl + " --threads 3"), 0);
    EXPECT_EQ(slurp(a / "cylinder.csv"), slurp(b / "cylinder.csv"));
}

TEST(Cli, DifferentSeedsDiffer) {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    ASSERT_EQ(lab("--out " + a.string() + " --seed 1 sample-tree -N 60"), 0);
    ASSERT_EQ(lab("--out " + b.string() + " --seed 2 sample-tree -N 60"), 0);
    EXPECT_NE(slurp(a / "tree.txt"), slurp(b / "tree.txt"));
}

TEST(Cli, FlagsOverrideConfigFile) {
    const fs::path d = scratch("precedence");
    {
        std::ofstream cfg(d / "cfg.json");
        cfg << R"({"k_max": 3, "seed": 17})";
    }
    ASSERT_EQ(lab("--out " + d.string() + " --config " + (d / "cfg.json").string() + " constants"), 0);
    auto lines = lines_of(slurp(d / "constants.csv"));
    EXPECT_EQ(lines.size(), 5u);
    EXPECT_NE(lines[0].find(" seed=17 "), std::string::npos);

    ASSERT_EQ(lab("--out " + d.string() + " --config " + (d / "cfg.json").string() + " --seed 4 constants --k-max 5"), 0);
    lines = lines_of(slurp(d / "constants.csv"));
    EXPECT_EQ(lines.size(), 7u);
    EXPECT_NE(lines[0].find(" seed=4 "), std::string::npos);
}

TEST(Cli, ExitCodes) {
    const fs::path d = scratch("exit");
    EXPECT_EQ(lab("--out " + d.string() + " constants"), 0);
    EXPECT_EQ(lab("--out " + d.string()), 2);
    EXPECT_EQ(lab("--out " + d.string() + " constants --k-max 0"), 2);
    EXPECT_EQ(lab("--out " + d.string() + " constants --k-max lots"), 2);
    EXPECT_EQ(lab("--out " + d.string() + " --config " + (d / "missing.json").string() + " constants"), 2);
    {
        std::ofstream cfg(d / "bad.json");
        cfg << R"({"unknown_knob": 1})";
    }
    EXPECT_EQ(lab("--out " + d.string() + " --config " + (d / "bad.json").string() + " constants"), 2);
    EXPECT_EQ(lab("--out " + d.string() + " map-quad --tree '1(3)'"), 2);
    // A spine path that cannot finish inside its step budget trips a numerical guard.
    EXPECT_EQ(lab("--out " + d.string() + " sojourn --k-max 3 --replicas 10 --horizon 1"), 3);
}
