#pragma once

// (1,lambda)-selection sampling about the optimum of a quadratic basin and
// the statistical covariance of the accumulated winners.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wlab/basin.hpp"
#include "wlab/dist.hpp"

namespace wlab {

struct SamplingOptions {
    std::size_t threads = 0;  // 0: default_threads()
    bool retain_winners = false;
    /// Iteration whose full offspring values are kept for inspection.
    std::optional<std::int64_t> record_iteration;
    std::string basin_id;  // empty: derived from the Hessian
};

/// Offspring values of one recorded iteration.
struct IterationRecord {
    std::int64_t iteration = 0;
    std::vector<double> offspring_values;
    std::size_t winner_index = 0;
};

struct WinnerSet {
    std::string basin_id;
    int n = 0;
    std::int64_t lambda = 0;
    std::int64_t iterations = 0;
    std::uint64_t seed = 0;

    std::vector<double> values;  // omega_t, always kept
    Matrix winners;              // iterations x n, empty unless retained
    Matrix moment_sum;           // sum_t y_t y_t^T
    Matrix moment_sq_sum;        // sum_t (y_t y_t^T)^2 entrywise
    Vector sum;                  // sum_t y_t
    std::optional<IterationRecord> record;

    bool has_winners() const { return winners.rows() == iterations && iterations > 0; }
};

/// Stable identifier of a Hessian (hash of its entries).
std::string basin_id(const QuadraticBasin& basin);

/// Algorithm 1. Offspring k of iteration t draws from its own counter stream,
/// so results do not depend on the thread count.
WinnerSet run_selection_sampling(const QuadraticBasin& basin, std::int64_t lambda,
                                 std::int64_t iterations, std::uint64_t seed,
                                 const SamplingOptions& options = {});

/// (1/N) sum_t y_t y_t^T, with no mean subtraction.
Matrix stat_covariance(const WinnerSet& ws);
/// Same from the rows of a winners matrix.
Matrix stat_covariance(const Matrix& winners);

/// Per-entry standard error of stat_covariance.
Matrix stat_covariance_stderr(const WinnerSet& ws);

Vector winners_mean(const WinnerSet& ws);

/// Density histogram of omega_t (or omega_t / a_star) on [0, max value].
Histogram winners_histogram(const WinnerSet& ws, int bins, std::optional<double> a_star = std::nullopt);

struct SampleReport {
    Matrix c_stat;
    Vector mean;
    Vector eigenvalues;
    Matrix eigenvectors;
    double commutator_max_norm = 0.0;
    double alignment = 0.0;
    nlohmann::json config;
};

SampleReport make_sample_report(const WinnerSet& ws, const QuadraticBasin& basin);
nlohmann::json to_json(const SampleReport& report);

/// CSV `iter,omega,y_1,...,y_n`; requires retained winners.
std::string winners_csv(const WinnerSet& ws);

// Row-major flattening helpers shared by the report writers.
nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols);

}  // namespace wlab
