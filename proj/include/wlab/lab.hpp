#pragma once

// Declarative experiment configs and the runners behind the command line.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "wlab/analytic.hpp"
#include "wlab/sampler.hpp"
#include "wlab/basin.hpp"

namespace wlab {

std::string version();

/// {"version", "tool"} block embedded in every output JSON.
nlohmann::json meta();

struct GeneratorSpec {
    int n = 0;
    double eig_low = 0.0;
    double eig_high = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const GeneratorSpec&) const = default;
};

using BasinConfig = std::variant<MatrixSpec, GeneratorSpec>;

int basin_dim(const BasinConfig& b);
QuadraticBasin build_basin(const BasinConfig& b);

enum class Estimator { Algorithm1, McExact, McGevd, Quadrature, ClosedForm };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct HistogramConfig {
    int bins = 60;
    bool normalized = false;

    bool operator==(const HistogramConfig&) const = default;
};

struct CurvesConfig {
    double psi_min = 0.0;
    double psi_max = 10.0;
    int points = 201;
    double normalized_max = 3.0;  // right end of the Weibull curve
    std::size_t mc_samples = 0;   // > 0 adds an empirical CDF on the same grid

    bool operator==(const CurvesConfig&) const = default;
};

/// Budgets that replace the defaults under --full.
struct Tier {
    std::optional<std::int64_t> iters;
    std::optional<std::size_t> samples;

    bool operator==(const Tier&) const = default;
};

struct ExperimentConfig {
    std::string name;
    BasinConfig basin = GeneratorSpec{};
    std::int64_t lambda = 1;
    std::int64_t iters = 10000;
    std::uint64_t seed = 0;
    std::vector<Estimator> estimators;
    std::size_t samples = 1000000;
    int quadrature_order = 40;
    WeightMode quadrature_mode = WeightMode::Gevd;
    std::optional<HistogramConfig> histogram;
    std::optional<CurvesConfig> curves;
    std::optional<Tier> full;
    bool write_winners = false;
    std::string outputs = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_experiment(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
/// Throws ValidationError when the config breaks an invariant.
void validate(const ExperimentConfig& c);
ExperimentConfig apply_full_tier(ExperimentConfig c);

struct SweepConfig {
    std::string name;
    std::vector<int> dims;
    int trials = 50;
    double eig_low = 0.5;
    double eig_high = 5.0;
    std::int64_t lambda = 20;
    std::int64_t iters = 100000;
    std::uint64_t seed = 0;
    double threshold = 1e-1;
    std::optional<Tier> full;
    std::string outputs = "out";

    bool operator==(const SweepConfig&) const = default;
};

SweepConfig parse_sweep(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& c);
void validate(const SweepConfig& c);
SweepConfig apply_full_tier(SweepConfig c);

/// True when the document describes a sweep rather than an experiment.
bool is_sweep_config(const nlohmann::json& j);

struct RunOptions {
    /// Restricts the estimators run (empty: all configured ones).
    std::vector<Estimator> only;
    bool write_compare = true;
    std::size_t threads = 0;
};

struct ExperimentResult {
    std::vector<std::filesystem::path> files;
    std::optional<SampleReport> sample;
    std::vector<std::pair<Estimator, AnalyticCovariance>> analytic;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct SweepRow {
    int dim;
    int trial;
    std::uint64_t seed;
    double cond_number;
    double commutator_max_norm;
    bool pass;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double pass_rate = 0.0;
    double max_observed = 0.0;
    std::vector<std::filesystem::path> files;
};

std::uint64_t sweep_trial_seed(std::uint64_t seed, int dim, int trial);
SweepResult commute_sweep(const SweepConfig& config, std::size_t threads = 0);
std::string sweep_csv(const SweepResult& r);

/// Curves of the objective law, the winners' law and the normalized Weibull
/// limit; returns the written files.
std::vector<std::filesystem::path> emit_distribution_curves(const BasinConfig& basin, std::int64_t lambda,
                                                             const CurvesConfig& curves,
                                                             const std::filesystem::path& out_dir,
                                                             std::uint64_t seed = 0);

}  // namespace wlab
