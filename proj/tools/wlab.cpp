#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "wlab/errors.hpp"
#include "wlab/io.hpp"
#include "wlab/lab.hpp"

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool full = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output directory (overrides the config)");
    cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
    cmd->add_flag("--full", c.full, "use the paper-scale budgets");
}

nlohmann::json load(const std::string& path) {
    try {
        return nlohmann::json::parse(wlab::io::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw wlab::ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
}

wlab::ExperimentConfig experiment(const Common& c) {
    wlab::ExperimentConfig cfg = wlab::parse_experiment(load(c.config));
    if (c.full) cfg = wlab::apply_full_tier(cfg);
    if (!c.out.empty()) cfg.outputs = c.out;
    if (c.seed) cfg.seed = *c.seed;
    wlab::validate(cfg);
    return cfg;
}

int report_error(const char* kind, const std::exception& e, int code) {
    const nlohmann::json err = {{"error", kind}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return code;
}

void print_files(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Winners' covariance laboratory for (1,lambda)-selection on quadratic basins"};
    app.set_version_flag("--version", wlab::version());
    app.require_subcommand(1);

    Common sample_opts, analytic_opts, curves_opts, sweep_opts, compare_opts;
    auto* sample = app.add_subcommand("sample", "run Algorithm 1 and write the sample report");
    auto* analytic = app.add_subcommand("analytic", "run the configured analytic estimators");
    auto* curves = app.add_subcommand("curves", "write CDF/PDF curves of the objective and winners' laws");
    auto* sweep = app.add_subcommand("sweep", "random-Hessian commutation sweep");
    auto* compare = app.add_subcommand("compare", "run every configured estimator and the comparison report");
    add_common(sample, sample_opts);
    add_common(analytic, analytic_opts);
    add_common(curves, curves_opts);
    add_common(sweep, sweep_opts);
    add_common(compare, compare_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sample) {
            wlab::RunOptions o;
            o.only = {wlab::Estimator::Algorithm1};
            o.write_compare = false;
            wlab::ExperimentConfig cfg = experiment(sample_opts);
            if (std::find(cfg.estimators.begin(), cfg.estimators.end(), wlab::Estimator::Algorithm1) ==
                cfg.estimators.end()) {
                cfg.estimators.insert(cfg.estimators.begin(), wlab::Estimator::Algorithm1);
            }
            print_files(wlab::run_experiment(cfg, o).files);
        } else if (*analytic) {
            wlab::RunOptions o;
            o.only = {wlab::Estimator::McExact, wlab::Estimator::McGevd, wlab::Estimator::Quadrature,
                      wlab::Estimator::ClosedForm};
            o.write_compare = false;
            print_files(wlab::run_experiment(experiment(analytic_opts), o).files);
        } else if (*curves) {
            const wlab::ExperimentConfig cfg = experiment(curves_opts);
            if (!cfg.curves) throw wlab::ValidationError("config has no \"curves\" section");
            print_files(wlab::emit_distribution_curves(cfg.basin, cfg.lambda, *cfg.curves, cfg.outputs, cfg.seed));
        } else if (*sweep) {
            wlab::SweepConfig cfg = wlab::parse_sweep(load(sweep_opts.config));
            if (sweep_opts.full) cfg = wlab::apply_full_tier(cfg);
            if (!sweep_opts.out.empty()) cfg.outputs = sweep_opts.out;
            if (sweep_opts.seed) cfg.seed = *sweep_opts.seed;
            const wlab::SweepResult r = wlab::commute_sweep(cfg);
            print_files(r.files);
            std::printf("pass_rate %.6f max_observed %.6g\n", r.pass_rate, r.max_observed);
        } else if (*compare) {
            print_files(wlab::run_experiment(experiment(compare_opts)).files);
        }
    } catch (const wlab::ValidationError& e) {
        return report_error("validation", e, 2);
    } catch (const std::exception& e) {
        return report_error("estimator", e, 1);
    }
    return 0;
}
