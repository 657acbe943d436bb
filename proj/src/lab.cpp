#include "wlab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wlab/dist.hpp"
#include "wlab/errors.hpp"
#include "wlab/io.hpp"
#include "wlab/parallel.hpp"
#include "wlab/rng.hpp"
#include "wlab/sampler.hpp"

#ifndef WLAB_VERSION
#define WLAB_VERSION "0.0.0"
#endif

namespace wlab {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    require(j.is_object(), what + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        require(known, "unknown key \"" + key + "\" in " + what);
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

template <class T>
T get_required(const json& j, const char* key, const std::string& what) {
    require(j.contains(key), "missing key \"" + std::string(key) + "\" in " + what);
    return j.at(key).get<T>();
}

Tier parse_tier(const json& j) {
    check_keys(j, {"iters", "samples"}, "full tier");
    Tier t;
    if (j.contains("iters")) t.iters = j.at("iters").get<std::int64_t>();
    if (j.contains("samples")) t.samples = j.at("samples").get<std::size_t>();
    return t;
}

json tier_json(const Tier& t) {
    json j = json::object();
    if (t.iters) j["iters"] = *t.iters;
    if (t.samples) j["samples"] = *t.samples;
    return j;
}

BasinConfig parse_basin(const json& j) {
    require(j.is_object(), "basin must be a JSON object");
    if (j.contains("random")) {
        require(j.size() == 1, "basin must have exactly one key");
        const json& r = j.at("random");
        check_keys(r, {"n", "eig_low", "eig_high", "seed"}, "random basin");
        return GeneratorSpec{get_required<int>(r, "n", "random basin"), get_required<double>(r, "eig_low", "random basin"),
                             get_required<double>(r, "eig_high", "random basin"),
                             get_or<std::uint64_t>(r, "seed", 0)};
    }
    return MatrixSpec::from_json(j);
}

json basin_json(const BasinConfig& b) {
    if (const auto* g = std::get_if<GeneratorSpec>(&b)) {
        return {{"random", {{"n", g->n}, {"eig_low", g->eig_low}, {"eig_high", g->eig_high}, {"seed", g->seed}}}};
    }
    return std::get<MatrixSpec>(b).to_json();
}

std::filesystem::path write_json(const std::filesystem::path& path, json j) {
    j["meta"] = meta();
    io::write_file_atomic(path, j.dump(2) + "\n");
    return path;
}

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    io::write_file_atomic(path, text);
    return path;
}

// Curve of a law in histogram units x, where the law lives on psi = scale * x.
Curve scaled_curve(const ScalarLaw& law, double scale, double lo, double hi, int points) {
    Curve c;
    for (int i = 0; i < points; ++i) {
        const double x = i + 1 == points ? hi : lo + (hi - lo) * i / (points - 1);
        c.psi.push_back(x);
        c.cdf.push_back(law.cdf(scale * x));
        c.pdf.push_back(scale * law.pdf(scale * x));
    }
    return c;
}

bool wants(const RunOptions& o, Estimator e) {
    return o.only.empty() || std::find(o.only.begin(), o.only.end(), e) != o.only.end();
}

}  // namespace

std::string version() { return WLAB_VERSION; }

nlohmann::json meta() { return {{"tool", "wlab"}, {"version", version()}}; }

int basin_dim(const BasinConfig& b) {
    if (const auto* g = std::get_if<GeneratorSpec>(&b)) return g->n;
    return std::get<MatrixSpec>(b).dim();
}

QuadraticBasin build_basin(const BasinConfig& b) {
    if (const auto* g = std::get_if<GeneratorSpec>(&b)) return random_pd_hessian(g->n, g->eig_low, g->eig_high, g->seed);
    return std::get<MatrixSpec>(b).build();
}

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::Algorithm1: return "algorithm1";
        case Estimator::McExact: return "mc_exact";
        case Estimator::McGevd: return "mc_gevd";
        case Estimator::Quadrature: return "quadrature";
        case Estimator::ClosedForm: return "closed_form";
    }
    return "";
}

Estimator estimator_from_string(const std::string& s) {
    for (Estimator e : {Estimator::Algorithm1, Estimator::McExact, Estimator::McGevd, Estimator::Quadrature,
                        Estimator::ClosedForm}) {
        if (to_string(e) == s) return e;
    }
    throw ValidationError("unknown estimator: " + s);
}

ExperimentConfig parse_experiment(const nlohmann::json& j) {
    check_keys(j, {"name", "basin", "lambda", "iters", "seed", "estimators", "samples", "quadrature_order",
                   "quadrature_mode", "histogram", "curves", "full", "write_winners", "outputs"},
               "experiment config");
    try {
        ExperimentConfig c;
        c.name = get_or<std::string>(j, "name", "");
        c.basin = parse_basin(get_required<json>(j, "basin", "experiment config"));
        c.lambda = get_required<std::int64_t>(j, "lambda", "experiment config");
        c.iters = get_or<std::int64_t>(j, "iters", c.iters);
        c.seed = get_or<std::uint64_t>(j, "seed", 0);
        for (const auto& e : get_or<std::vector<std::string>>(j, "estimators", {"algorithm1"})) {
            c.estimators.push_back(estimator_from_string(e));
        }
        c.samples = get_or<std::size_t>(j, "samples", c.samples);
        c.quadrature_order = get_or<int>(j, "quadrature_order", c.quadrature_order);
        c.quadrature_mode = weight_mode_from_string(get_or<std::string>(j, "quadrature_mode", "gevd"));
        if (j.contains("histogram")) {
            const json& h = j.at("histogram");
            check_keys(h, {"bins", "normalized"}, "histogram");
            c.histogram = HistogramConfig{get_or<int>(h, "bins", 60), get_or<bool>(h, "normalized", false)};
        }
        if (j.contains("curves")) {
            const json& h = j.at("curves");
            check_keys(h, {"psi_min", "psi_max", "points", "normalized_max", "mc_samples"}, "curves");
            CurvesConfig cc;
            cc.psi_min = get_or<double>(h, "psi_min", cc.psi_min);
            cc.psi_max = get_or<double>(h, "psi_max", cc.psi_max);
            cc.points = get_or<int>(h, "points", cc.points);
            cc.normalized_max = get_or<double>(h, "normalized_max", cc.normalized_max);
            cc.mc_samples = get_or<std::size_t>(h, "mc_samples", cc.mc_samples);
            c.curves = cc;
        }
        if (j.contains("full")) c.full = parse_tier(j.at("full"));
        c.write_winners = get_or<bool>(j, "write_winners", false);
        c.outputs = get_or<std::string>(j, "outputs", c.outputs);
        validate(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed experiment config: ") + e.what());
    }
}

nlohmann::json to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["basin"] = basin_json(c.basin);
    j["lambda"] = c.lambda;
    j["iters"] = c.iters;
    j["seed"] = c.seed;
    json est = json::array();
    for (Estimator e : c.estimators) est.push_back(to_string(e));
    j["estimators"] = est;
    j["samples"] = c.samples;
    j["quadrature_order"] = c.quadrature_order;
    j["quadrature_mode"] = to_string(c.quadrature_mode);
    if (c.histogram) j["histogram"] = {{"bins", c.histogram->bins}, {"normalized", c.histogram->normalized}};
    if (c.curves) {
        j["curves"] = {{"psi_min", c.curves->psi_min}, {"psi_max", c.curves->psi_max}, {"points", c.curves->points},
                       {"normalized_max", c.curves->normalized_max}, {"mc_samples", c.curves->mc_samples}};
    }
    if (c.full) j["full"] = tier_json(*c.full);
    j["write_winners"] = c.write_winners;
    j["outputs"] = c.outputs;
    return j;
}

void validate(const ExperimentConfig& c) {
    require(c.lambda >= 1, "lambda must be >= 1");
    require(c.iters >= 1, "iters must be >= 1");
    require(!c.estimators.empty(), "at least one estimator is required");
    require(std::set<Estimator>(c.estimators.begin(), c.estimators.end()).size() == c.estimators.size(),
            "estimators must be distinct");
    if (const auto* g = std::get_if<GeneratorSpec>(&c.basin)) {
        require(g->n >= 2, "random basin requires n >= 2");
        require(g->eig_low > 0.0 && g->eig_low <= g->eig_high, "random basin requires 0 < eig_low <= eig_high");
    }
    const int n = basin_dim(c.basin);
    const bool isotropic = std::holds_alternative<MatrixSpec>(c.basin) && std::get<MatrixSpec>(c.basin).is_isotropic();
    for (Estimator e : c.estimators) {
        if (e == Estimator::ClosedForm) require(isotropic, "closed_form requires an isotropic basin spec");
        if (e == Estimator::Quadrature) {
            require(n <= 4, "quadrature requires n <= 4");
            require(c.quadrature_order >= 20, "quadrature_order must be >= 20");
        }
        if (e == Estimator::McExact || e == Estimator::McGevd) require(c.samples >= 100000, "samples must be >= 1e5");
        if (e == Estimator::McGevd || e == Estimator::ClosedForm ||
            (e == Estimator::Quadrature && c.quadrature_mode == WeightMode::Gevd)) {
            require(c.lambda >= 2, to_string(e) + " requires lambda >= 2");
        }
    }
    if (c.histogram) {
        require(c.histogram->bins >= 2, "histogram bins must be >= 2");
        if (c.histogram->normalized) require(c.lambda >= 2, "normalized histogram requires lambda >= 2");
    }
    if (c.curves) {
        require(c.curves->points >= 2, "curve points must be >= 2");
        require(c.curves->psi_max > c.curves->psi_min && c.curves->psi_min >= 0.0, "invalid curve range");
        require(c.curves->normalized_max > 0.0, "normalized_max must be positive");
        require(c.curves->mc_samples == 0 || c.curves->mc_samples >= 10000, "mc_samples must be 0 or >= 1e4");
    }
    if (c.full) {
        if (c.full->iters) require(*c.full->iters >= 1, "full-tier iters must be >= 1");
        if (c.full->samples) require(*c.full->samples >= 100000, "full-tier samples must be >= 1e5");
    }
    require(!c.outputs.empty(), "outputs must not be empty");
}

ExperimentConfig apply_full_tier(ExperimentConfig c) {
    if (c.full) {
        if (c.full->iters) c.iters = *c.full->iters;
        if (c.full->samples) c.samples = *c.full->samples;
    }
    return c;
}

SweepConfig parse_sweep(const nlohmann::json& j) {
    check_keys(j, {"name", "sweep", "dims", "trials", "eig_low", "eig_high", "lambda", "iters", "seed", "threshold",
                   "full", "outputs"},
               "sweep config");
    try {
        SweepConfig c;
        c.name = get_or<std::string>(j, "name", "");
        c.dims = get_required<std::vector<int>>(j, "dims", "sweep config");
        c.trials = get_or<int>(j, "trials", c.trials);
        c.eig_low = get_or<double>(j, "eig_low", c.eig_low);
        c.eig_high = get_or<double>(j, "eig_high", c.eig_high);
        c.lambda = get_or<std::int64_t>(j, "lambda", c.lambda);
        c.iters = get_or<std::int64_t>(j, "iters", c.iters);
        c.seed = get_or<std::uint64_t>(j, "seed", 0);
        c.threshold = get_or<double>(j, "threshold", c.threshold);
        if (j.contains("full")) c.full = parse_tier(j.at("full"));
        c.outputs = get_or<std::string>(j, "outputs", c.outputs);
        validate(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed sweep config: ") + e.what());
    }
}

nlohmann::json to_json(const SweepConfig& c) {
    json j = {{"name", c.name},       {"sweep", true},         {"dims", c.dims},     {"trials", c.trials},
              {"eig_low", c.eig_low}, {"eig_high", c.eig_high}, {"lambda", c.lambda}, {"iters", c.iters},
              {"seed", c.seed},       {"threshold", c.threshold}, {"outputs", c.outputs}};
    if (c.full) j["full"] = tier_json(*c.full);
    return j;
}

void validate(const SweepConfig& c) {
    require(!c.dims.empty(), "dims must not be empty");
    for (int d : c.dims) require(d >= 2, "sweep dimensions must be >= 2");
    require(c.trials >= 1, "trials must be >= 1");
    require(c.eig_low > 0.0 && c.eig_low <= c.eig_high, "sweep requires 0 < eig_low <= eig_high");
    require(c.lambda >= 1 && c.iters >= 2, "sweep requires lambda >= 1 and iters >= 2");
    require(c.threshold > 0.0, "threshold must be positive");
    if (c.full && c.full->iters) require(*c.full->iters >= 2, "full-tier iters must be >= 2");
    require(!c.outputs.empty(), "outputs must not be empty");
}

SweepConfig apply_full_tier(SweepConfig c) {
    if (c.full && c.full->iters) c.iters = *c.full->iters;
    return c;
}

bool is_sweep_config(const nlohmann::json& j) { return j.is_object() && j.contains("sweep") && j.at("sweep") == true; }

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    validate(config);
    const QuadraticBasin basin = build_basin(config.basin);
    const std::filesystem::path out(config.outputs);
    const int n = basin.dim();
    ExperimentResult result;
    const json config_json = to_json(config);

    std::vector<std::pair<Estimator, Matrix>> matrices;
    for (Estimator e : config.estimators) {
        if (!wants(options, e)) continue;
        if (e == Estimator::Algorithm1) {
            SamplingOptions so;
            so.threads = options.threads;
            so.retain_winners = config.write_winners;
            const WinnerSet ws = run_selection_sampling(basin, config.lambda, config.iters, config.seed, so);
            SampleReport report = make_sample_report(ws, basin);
            json j = to_json(report);
            j["experiment"] = config_json;
            result.files.push_back(write_json(out / "algorithm1.json", j));
            if (config.write_winners) result.files.push_back(write_text(out / "winners.csv", winners_csv(ws)));
            if (config.histogram) {
                const HistogramConfig& hc = *config.histogram;
                const ScalarLaw gamma_base = ScalarLaw::gamma_approx(basin);
                const ScalarLaw exact_base = ScalarLaw::quadratic_form(basin.eigenvalues());
                std::optional<double> a_star;
                if (config.lambda >= 2) a_star = exact_base.quantile(1.0 / static_cast<double>(config.lambda));
                const Histogram h = winners_histogram(ws, hc.bins, hc.normalized ? a_star : std::nullopt);
                const std::string tag = hc.normalized ? "normalized" : "raw";
                result.files.push_back(write_text(out / ("histogram_" + tag + ".csv"), histogram_csv(h)));
                const double scale = hc.normalized ? *a_star : 1.0;
                const double hi = h.edges.back();
                const int points = 4 * hc.bins + 1;
                const ScalarLaw wg = ScalarLaw::winners(gamma_base, config.lambda);
                const ScalarLaw we = ScalarLaw::winners(exact_base, config.lambda);
                result.files.push_back(write_text(out / ("curve_winners_gamma_" + tag + ".csv"),
                                                  curve_csv(scaled_curve(wg, scale, 0.0, hi, points))));
                result.files.push_back(write_text(out / ("curve_winners_exact_" + tag + ".csv"),
                                                  curve_csv(scaled_curve(we, scale, 0.0, hi, points))));
                if (a_star) {
                    const ScalarLaw weibull = ScalarLaw::weibull_min(n);
                    const double to_normalized = hc.normalized ? 1.0 : 1.0 / *a_star;
                    result.files.push_back(write_text(out / ("curve_weibull_" + tag + ".csv"),
                                                      curve_csv(scaled_curve(weibull, to_normalized, 0.0, hi, points))));
                }
            }
            matrices.emplace_back(e, report.c_stat);
            result.sample = std::move(report);
            continue;
        }
        AnalyticCovariance a;
        switch (e) {
            case Estimator::McExact:
                a = covariance_importance_mc(basin, config.lambda, WeightMode::Exact, config.samples, config.seed,
                                             options.threads);
                break;
            case Estimator::McGevd:
                a = covariance_importance_mc(basin, config.lambda, WeightMode::Gevd, config.samples, config.seed,
                                             options.threads);
                break;
            case Estimator::Quadrature:
                a = covariance_quadrature(basin, config.lambda, config.quadrature_order, config.quadrature_mode,
                                          options.threads);
                break;
            case Estimator::ClosedForm: {
                const auto& iso = std::get<IsotropicSpec>(std::get<MatrixSpec>(config.basin).form());
                a = isotropic_covariance(iso.n, iso.h0, config.lambda);
                break;
            }
            case Estimator::Algorithm1: break;
        }
        json j = to_json(a);
        j["experiment"] = config_json;
        result.files.push_back(write_json(out / (to_string(e) + ".json"), j));
        matrices.emplace_back(e, a.c);
        result.analytic.emplace_back(e, std::move(a));
    }

    if (options.write_compare && !matrices.empty()) {
        const auto& [ref_name, ref] = matrices.front();
        json comparisons = json::object();
        for (const auto& [name, m] : matrices) {
            if (&m == &ref && matrices.size() > 1) continue;
            comparisons[to_string(name)] = to_json(compare_report(ref, m, basin.hessian()));
        }
        json j = {{"reference", to_string(ref_name)}, {"comparisons", comparisons}, {"experiment", config_json},
                  {"hessian", matrix_to_json(basin.hessian())}};
        result.files.push_back(write_json(out / "compare.json", j));
    }
    return result;
}

std::uint64_t sweep_trial_seed(std::uint64_t seed, int dim, int trial) {
    return rng::splitmix64(rng::splitmix64(seed) ^ (static_cast<std::uint64_t>(dim) << 32) ^
                           static_cast<std::uint64_t>(trial));
}

SweepResult commute_sweep(const SweepConfig& config, std::size_t threads) {
    validate(config);
    if (threads == 0) threads = default_threads();
    const std::size_t per_dim = static_cast<std::size_t>(config.trials);
    const std::size_t total = per_dim * config.dims.size();
    auto rows = map_chunks<SweepRow>(total, 1, threads, [&](ChunkRange r) {
        const int dim = config.dims[r.begin / per_dim];
        const int trial = static_cast<int>(r.begin % per_dim);
        const std::uint64_t seed = sweep_trial_seed(config.seed, dim, trial);
        const QuadraticBasin basin = random_pd_hessian(dim, config.eig_low, config.eig_high, seed);
        SamplingOptions so;
        so.threads = 1;
        const WinnerSet ws = run_selection_sampling(basin, config.lambda, config.iters, seed, so);
        const double norm = commutator_max_norm(basin.hessian(), stat_covariance(ws));
        return SweepRow{dim, trial, seed, basin.condition_number(), norm, norm < config.threshold};
    });
    SweepResult result;
    result.rows = std::move(rows);
    std::size_t passed = 0;
    for (const auto& row : result.rows) {
        passed += row.pass ? 1 : 0;
        result.max_observed = std::max(result.max_observed, row.commutator_max_norm);
    }
    result.pass_rate = static_cast<double>(passed) / static_cast<double>(result.rows.size());
    const std::filesystem::path out(config.outputs);
    result.files.push_back(write_text(out / "sweep.csv", sweep_csv(result)));
    json summary = {{"pass_rate", result.pass_rate}, {"max_observed", result.max_observed},
                    {"trials", result.rows.size()}, {"config", to_json(config)}};
    result.files.push_back(write_json(out / "sweep_summary.json", summary));
    return result;
}

std::string sweep_csv(const SweepResult& r) {
    std::string out = "dim,trial,seed,cond_number,commutator_max_norm,pass\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.dim) + "," + std::to_string(row.trial) + "," + std::to_string(row.seed) + "," +
               io::format_double(row.cond_number) + "," + io::format_double(row.commutator_max_norm) + "," +
               (row.pass ? "true" : "false") + "\n";
    }
    return out;
}

std::vector<std::filesystem::path> emit_distribution_curves(const BasinConfig& basin_config, std::int64_t lambda,
                                                             const CurvesConfig& curves,
                                                             const std::filesystem::path& out_dir,
                                                             std::uint64_t seed) {
    require(lambda >= 1, "lambda must be >= 1");
    require(curves.points >= 2, "curve points must be >= 2");
    require(curves.psi_max > curves.psi_min && curves.psi_min >= 0.0, "invalid curve range");
    const QuadraticBasin basin = build_basin(basin_config);
    const ScalarLaw gamma_law = ScalarLaw::gamma_approx(basin);
    const ScalarLaw exact_law = ScalarLaw::quadratic_form(basin.eigenvalues());
    std::vector<std::filesystem::path> files;
    auto emit = [&](const std::string& name, const ScalarLaw& law, double lo, double hi) {
        files.push_back(write_text(out_dir / name, curve_csv(sample_curve(law, lo, hi, curves.points))));
    };
    emit("psi_gamma.csv", gamma_law, curves.psi_min, curves.psi_max);
    emit("psi_exact.csv", exact_law, curves.psi_min, curves.psi_max);
    emit("winners_gamma.csv", ScalarLaw::winners(gamma_law, lambda), curves.psi_min, curves.psi_max);
    emit("winners_exact.csv", ScalarLaw::winners(exact_law, lambda), curves.psi_min, curves.psi_max);
    emit("weibull.csv", ScalarLaw::weibull_min(basin.dim()), 0.0, curves.normalized_max);
    if (curves.mc_samples > 0) {
        std::vector<double> grid;
        for (int i = 0; i < curves.points; ++i) {
            grid.push_back(i + 1 == curves.points
                               ? curves.psi_max
                               : curves.psi_min + (curves.psi_max - curves.psi_min) * i / (curves.points - 1));
        }
        const EmpiricalCdf emp = mc_cdf_oracle(basin, grid, curves.mc_samples, seed);
        std::string csv = "psi,cdf,std_error\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            csv += io::format_double(grid[i]) + "," + io::format_double(emp.cdf[i]) + "," +
                   io::format_double(emp.std_error[i]) + "\n";
        }
        files.push_back(write_text(out_dir / "mc_cdf.csv", csv));
    }
    return files;
}

}  // namespace wlab
