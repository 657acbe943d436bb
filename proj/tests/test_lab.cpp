#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wlab/errors.hpp"
#include "wlab/io.hpp"
#include "wlab/lab.hpp"

using namespace wlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wlab_test_lab_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::istringstream in(io::read_file(p));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

json small_config(const fs::path& out) {
    return {{"name", "small"},
            {"basin", {{"diag", {1.0, 2.0, 3.0}}}},
            {"lambda", 10},
            {"iters", 2000},
            {"seed", 4},
            {"estimators", {"algorithm1", "mc_exact", "quadrature"}},
            {"samples", 100000},
            {"quadrature_mode", "exact"},
            {"histogram", {{"bins", 20}, {"normalized", true}}},
            {"write_winners", true},
            {"outputs", out.string()}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ExperimentsParse) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(WLAB_EXPERIMENTS_DIR)) {
        if (entry.path().extension() != ".json") continue;
        const json j = json::parse(io::read_file(entry.path()));
        if (is_sweep_config(j)) {
            const SweepConfig c = parse_sweep(j);
            EXPECT_NO_THROW(validate(apply_full_tier(c))) << entry.path();
            EXPECT_EQ(parse_sweep(to_json(c)), c);
        } else {
            const ExperimentConfig c = parse_experiment(j);
            EXPECT_NO_THROW(validate(apply_full_tier(c))) << entry.path();
            EXPECT_EQ(parse_experiment(to_json(c)), c) << entry.path();
        }
        ++count;
    }
    EXPECT_GE(count, 13);
}

TEST(Config, RoundTrip) {
    json j = small_config("out/x");
    j["basin"] = {{"random", {{"n", 3}, {"eig_low", 0.5}, {"eig_high", 5.0}, {"seed", 9}}}};
    j["curves"] = {{"psi_max", 4.0}, {"points", 11}};
    j["full"] = {{"iters", 100000}};
    const ExperimentConfig c = parse_experiment(j);
    EXPECT_EQ(parse_experiment(to_json(c)), c);
    EXPECT_EQ(apply_full_tier(c).iters, 100000);
    EXPECT_EQ(basin_dim(c.basin), 3);
}

TEST(Config, ValidationErrors) {
    const auto rejects = [](json j) { EXPECT_THROW(parse_experiment(j), ValidationError) << j.dump(); };
    json base = small_config("out/x");
    json j = base;
    j["estimators"] = {"closed_form"};
    rejects(j);
    j = base;
    j["basin"] = {{"diag", {1, 1, 1, 1, 1}}};
    rejects(j);
    j = base;
    j["unknown_key"] = 1;
    rejects(j);
    j = base;
    j["estimators"] = {"magic"};
    rejects(j);
    j = base;
    j["samples"] = 1000;
    rejects(j);
    j = base;
    j["lambda"] = 0;
    rejects(j);
    j = base;
    j["lambda"] = 1;
    j["estimators"] = {"algorithm1"};
    rejects(j);  // normalized histogram needs lambda >= 2
    j = base;
    j["basin"] = {{"dense", {{1.0, 0.5}, {0.4, 1.0}}}};
    rejects(j);
    j = base;
    j["quadrature_order"] = 8;
    rejects(j);

    json iso = base;
    iso["basin"] = {{"isotropic", {{"n", 4}, {"h0", 2.0}}}};
    iso["estimators"] = {"closed_form"};
    EXPECT_NO_THROW(parse_experiment(iso));
}

TEST(Run, WritesFilesDeterministically) {
    const fs::path a = scratch("run_a");
    const fs::path b = scratch("run_b");
    const ExperimentConfig ca = parse_experiment(small_config(a));
    const ExperimentConfig cb = parse_experiment(small_config(b));
    RunOptions one;
    one.threads = 1;
    RunOptions three;
    three.threads = 3;
    const ExperimentResult ra = run_experiment(ca, one);
    const ExperimentResult rb = run_experiment(cb, three);
    for (const char* f : {"algorithm1.json", "winners.csv", "histogram_normalized.csv", "mc_exact.json",
                          "quadrature.json", "compare.json"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
    }
    ASSERT_EQ(ra.files.size(), rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        std::string sa = io::read_file(ra.files[i]);
        std::string sb = io::read_file(rb.files[i]);
        if (ra.files[i].extension() == ".json") {
            json ja = json::parse(sa), jb = json::parse(sb);
            ja["experiment"].erase("outputs");
            jb["experiment"].erase("outputs");
            EXPECT_EQ(ja, jb);
        } else {
            EXPECT_EQ(sa, sb) << ra.files[i];
        }
    }
    const json rep = json::parse(io::read_file(a / "algorithm1.json"));
    EXPECT_TRUE(rep.contains("meta"));
    EXPECT_EQ(rep["meta"]["version"], version());
    const json cmp = json::parse(io::read_file(a / "compare.json"));
    EXPECT_EQ(cmp["reference"], "algorithm1");
    EXPECT_EQ(cmp["comparisons"].size(), 2u);
    EXPECT_EQ(read_csv(a / "winners.csv").size(), 2000u);
}

TEST(Run, OnlyFilter) {
    const fs::path a = scratch("only");
    RunOptions o;
    o.only = {Estimator::Quadrature};
    o.write_compare = false;
    const ExperimentResult r = run_experiment(parse_experiment(small_config(a)), o);
    ASSERT_EQ(r.files.size(), 1u);
    EXPECT_EQ(r.files[0].filename(), "quadrature.json");
    EXPECT_FALSE(r.sample.has_value());
}

TEST(Sweep, DegenerateSpectrumCommutes) {
    // eig_low == eig_high makes every trial isotropic.
    const fs::path out = scratch("sweep");
    const json j = {{"name", "s"}, {"sweep", true}, {"dims", {2}}, {"trials", 1}, {"eig_low", 1.0},
                    {"eig_high", 1.0}, {"lambda", 20}, {"iters", 100000}, {"seed", 3}, {"outputs", out.string()}};
    const SweepConfig c = parse_sweep(j);
    const SweepResult r = commute_sweep(c, 1);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_LT(r.rows[0].commutator_max_norm, 0.02);
    EXPECT_EQ(r.pass_rate, 1.0);
    EXPECT_TRUE(fs::exists(out / "sweep.csv"));
    const json summary = json::parse(io::read_file(out / "sweep_summary.json"));
    EXPECT_EQ(summary["trials"], 1);
    EXPECT_EQ(sweep_csv(commute_sweep(c, 2)), sweep_csv(r));
}

TEST(Sweep, TrialSeedsDiffer) {
    EXPECT_NE(sweep_trial_seed(1, 2, 0), sweep_trial_seed(1, 2, 1));
    EXPECT_NE(sweep_trial_seed(1, 2, 0), sweep_trial_seed(1, 3, 0));
    EXPECT_EQ(sweep_trial_seed(5, 4, 7), sweep_trial_seed(5, 4, 7));
}

TEST(Curves, ChiSquareTwo) {
    const fs::path out = scratch("curves_i2");
    CurvesConfig cc;
    cc.psi_max = 8.0;
    cc.points = 33;
    emit_distribution_curves(MatrixSpec(IsotropicSpec{2, 1.0}), 10, cc, out);
    for (const char* f : {"psi_gamma.csv", "psi_exact.csv"}) {
        const auto rows = read_csv(out / f);
        ASSERT_EQ(rows.size(), 33u);
        for (const auto& r : rows) {
            EXPECT_NEAR(r[2], 0.5 * std::exp(-0.5 * r[0]), 1e-12) << f;
            EXPECT_NEAR(r[1], -std::expm1(-0.5 * r[0]), 1e-12) << f;
        }
    }
    const auto w = read_csv(out / "winners_exact.csv");
    for (const auto& r : w) EXPECT_NEAR(r[1], -std::expm1(-5.0 * r[0]), 1e-12);
    EXPECT_TRUE(fs::exists(out / "weibull.csv"));
    EXPECT_FALSE(fs::exists(out / "mc_cdf.csv"));
}

TEST(Curves, ExactLawMatchesMonteCarlo) {
    const fs::path out = scratch("curves_h2");
    std::vector<double> d;
    for (int i = 0; i < 10; ++i) d.push_back(1.0 + 0.5 * i);
    CurvesConfig cc;
    cc.psi_max = 60.0;
    cc.points = 41;
    cc.mc_samples = 200000;
    emit_distribution_curves(MatrixSpec(DiagonalSpec{d}), 1000, cc, out, 11);
    const auto exact = read_csv(out / "psi_exact.csv");
    const auto mc = read_csv(out / "mc_cdf.csv");
    ASSERT_EQ(exact.size(), mc.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        EXPECT_EQ(exact[i][0], mc[i][0]);
        worst = std::max(worst, std::abs(exact[i][1] - mc[i][1]));
    }
    EXPECT_LT(worst, 0.01);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    const fs::path good = dir / "good.json";
    json g = small_config(dir / "out");
    g["estimators"] = {"quadrature"};
    g.erase("histogram");
    io::write_file_atomic(good, g.dump());
    const fs::path bad = dir / "bad.json";
    json bj = g;
    bj["lambda"] = -3;
    io::write_file_atomic(bad, bj.dump());
    const fs::path broken = dir / "broken.json";
    io::write_file_atomic(broken, "{ not json");
    const fs::path blocked = dir / "blocked.json";
    io::write_file_atomic(dir / "file", "x");
    json blk = g;
    blk["outputs"] = (dir / "file" / "sub").string();
    io::write_file_atomic(blocked, blk.dump());

    EXPECT_EQ(run_cli("--version"), 0);
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("analytic --config " + good.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "quadrature.json"));
    EXPECT_EQ(run_cli("analytic --config " + good.string() + " --out " + (dir / "other").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "other" / "quadrature.json"));
    EXPECT_EQ(run_cli("analytic --config " + bad.string()), 2);
    EXPECT_EQ(run_cli("analytic --config " + broken.string()), 2);
    EXPECT_EQ(run_cli("analytic --config " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("analytic --config " + blocked.string()), 1);
    EXPECT_EQ(run_cli("curves --config " + good.string()), 2);  // no curves section
}
