#include "wlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>

#include "wlab/errors.hpp"
#include "wlab/io.hpp"
#include "wlab/parallel.hpp"
#include "wlab/rng.hpp"

namespace wlab {
namespace {

constexpr std::size_t kIterationsPerChunk = 64;

struct ChunkResult {
    std::vector<double> values;
    Matrix winners;
    Matrix moment_sum;
    Matrix moment_sq_sum;
    Vector sum;
    std::optional<IterationRecord> record;
};

// Draws offspring in the eigenbasis; normal j of offspring k feeds coordinate
// order[j], with order listing eigenvalues from the largest down so that the
// running objective passes the incumbent as early as possible.
class OffspringEngine {
public:
    OffspringEngine(const QuadraticBasin& basin, rng::Key key)
        : key_(key), n_(basin.dim()), delta_(basin.eigenvalues()), u_(basin.eigenvectors()),
          order_(static_cast<std::size_t>(n_)) {
        std::iota(order_.begin(), order_.end(), 0);
        std::reverse(order_.begin(), order_.end());
        sorted_delta_.resize(order_.size());
        for (std::size_t j = 0; j < order_.size(); ++j) sorted_delta_[j] = delta_[order_[j]];
    }

    // Objective of offspring k of iteration t, abandoned once it reaches bound.
    double objective(std::uint64_t t, std::uint32_t k, double bound) const {
        double j_val = 0.0;
        const std::size_t n = sorted_delta_.size();
        for (std::size_t j = 0; j < n; j += 2) {
            const auto [a, b] = rng::normal_pair(rng::philox4x32_10(
                rng::counter(t, k, static_cast<std::uint32_t>(j / 2)), key_));
            j_val += sorted_delta_[j] * a * a;
            if (j + 1 < n) j_val += sorted_delta_[j + 1] * b * b;
            if (j_val >= bound) return j_val;
        }
        return j_val;
    }

    // Winner location in the original coordinates.
    Vector location(std::uint64_t t, std::uint32_t k) const {
        Vector theta(n_);
        for (int j = 0; j < n_; j += 2) {
            const auto [a, b] = rng::normal_pair(rng::philox4x32_10(
                rng::counter(t, k, static_cast<std::uint32_t>(j / 2)), key_));
            theta[order_[static_cast<std::size_t>(j)]] = a;
            if (j + 1 < n_) theta[order_[static_cast<std::size_t>(j) + 1]] = b;
        }
        return u_ * theta;
    }

private:
    rng::Key key_;
    int n_;
    Vector delta_;
    Matrix u_;
    std::vector<int> order_;
    std::vector<double> sorted_delta_;
};

}  // namespace

std::string basin_id(const QuadraticBasin& basin) {
    const Matrix& h = basin.hessian();
    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash ^= p[i];
            hash *= 1099511628211ull;
        }
    };
    const std::int64_t n = h.rows();
    mix(&n, sizeof n);
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
            const double v = h(i, j);
            mix(&v, sizeof v);
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "h%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

WinnerSet run_selection_sampling(const QuadraticBasin& basin, std::int64_t lambda,
                                 std::int64_t iterations, std::uint64_t seed,
                                 const SamplingOptions& options) {
    require(lambda >= 1, "lambda must be >= 1");
    require(iterations >= 1, "iteration count must be >= 1");
    require(lambda <= std::numeric_limits<std::uint32_t>::max(), "lambda too large");
    if (options.record_iteration) {
        require(*options.record_iteration >= 0 && *options.record_iteration < iterations,
                "recorded iteration out of range");
    }
    const int n = basin.dim();
    const OffspringEngine engine(basin, rng::derive_key(seed, rng::Purpose::Sampling));
    const std::size_t threads = options.threads == 0 ? default_threads() : options.threads;
    const auto count = static_cast<std::size_t>(iterations);
    constexpr double kInf = std::numeric_limits<double>::infinity();

    auto chunks = map_chunks<ChunkResult>(count, kIterationsPerChunk, threads, [&](ChunkRange r) {
        ChunkResult out;
        const auto len = static_cast<Eigen::Index>(r.end - r.begin);
        out.values.reserve(r.end - r.begin);
        out.moment_sum = Matrix::Zero(n, n);
        out.moment_sq_sum = Matrix::Zero(n, n);
        out.sum = Vector::Zero(n);
        if (options.retain_winners) out.winners.resize(len, n);
        for (std::size_t t = r.begin; t < r.end; ++t) {
            const bool recorded = options.record_iteration && *options.record_iteration == static_cast<std::int64_t>(t);
            double best = kInf;
            std::uint32_t best_k = 0;
            IterationRecord rec;
            for (std::uint32_t k = 0; k < static_cast<std::uint32_t>(lambda); ++k) {
                const double j_val = engine.objective(t, k, recorded ? kInf : best);
                if (recorded) rec.offspring_values.push_back(j_val);
                if (j_val < best) {
                    best = j_val;
                    best_k = k;
                }
            }
            const Vector y = engine.location(t, best_k);
            out.values.push_back(best);
            const Matrix yy = y * y.transpose();
            out.moment_sum += yy;
            out.moment_sq_sum += yy.cwiseProduct(yy);
            out.sum += y;
            if (options.retain_winners) out.winners.row(static_cast<Eigen::Index>(t - r.begin)) = y.transpose();
            if (recorded) {
                rec.iteration = static_cast<std::int64_t>(t);
                rec.winner_index = best_k;
                out.record = std::move(rec);
            }
        }
        return out;
    });

    WinnerSet ws;
    ws.basin_id = options.basin_id.empty() ? basin_id(basin) : options.basin_id;
    ws.n = n;
    ws.lambda = lambda;
    ws.iterations = iterations;
    ws.seed = seed;
    ws.values.reserve(count);
    ws.moment_sum = Matrix::Zero(n, n);
    ws.moment_sq_sum = Matrix::Zero(n, n);
    ws.sum = Vector::Zero(n);
    if (options.retain_winners) ws.winners.resize(iterations, n);
    Eigen::Index row = 0;
    for (auto& c : chunks) {
        ws.values.insert(ws.values.end(), c.values.begin(), c.values.end());
        ws.moment_sum += c.moment_sum;
        ws.moment_sq_sum += c.moment_sq_sum;
        ws.sum += c.sum;
        if (options.retain_winners) {
            ws.winners.middleRows(row, c.winners.rows()) = c.winners;
            row += c.winners.rows();
        }
        if (c.record) ws.record = std::move(c.record);
    }
    return ws;
}

Matrix stat_covariance(const WinnerSet& ws) {
    require(ws.iterations >= 2, "statistical covariance requires at least 2 winners");
    return ws.moment_sum / static_cast<double>(ws.iterations);
}

Matrix stat_covariance_stderr(const WinnerSet& ws) {
    const Matrix c = stat_covariance(ws);
    const double m = static_cast<double>(ws.iterations);
    const Matrix var = (ws.moment_sq_sum / m - c.cwiseProduct(c)).cwiseMax(0.0);
    return (var / (m - 1.0)).cwiseSqrt();
}

Matrix stat_covariance(const Matrix& winners) {
    require(winners.rows() >= 2 && winners.cols() >= 1, "statistical covariance requires at least 2 winners");
    Matrix acc = Matrix::Zero(winners.cols(), winners.cols());
    for (Eigen::Index t = 0; t < winners.rows(); ++t) {
        const Vector y = winners.row(t).transpose();
        acc.noalias() += y * y.transpose();
    }
    return acc / static_cast<double>(winners.rows());
}

Vector winners_mean(const WinnerSet& ws) {
    require(ws.iterations >= 1, "empty winner set");
    return ws.sum / static_cast<double>(ws.iterations);
}

Histogram winners_histogram(const WinnerSet& ws, int bins, std::optional<double> a_star) {
    require(bins >= 2, "histogram requires at least 2 bins");
    require(!ws.values.empty(), "empty winner set");
    std::vector<double> v = ws.values;
    if (a_star) {
        require(*a_star > 0.0 && std::isfinite(*a_star), "normalizing constant must be positive");
        for (double& x : v) x /= *a_star;
    }
    const double hi = *std::max_element(v.begin(), v.end());
    return make_histogram(v, bins, 0.0, hi > 0.0 ? hi : 1.0);
}

SampleReport make_sample_report(const WinnerSet& ws, const QuadraticBasin& basin) {
    require(ws.n == basin.dim(), "winner set and basin dimensions differ");
    SampleReport r;
    r.c_stat = stat_covariance(ws);
    r.mean = winners_mean(ws);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(r.c_stat);
    r.eigenvalues = es.eigenvalues();
    r.eigenvectors = es.eigenvectors();
    r.commutator_max_norm = commutator_max_norm(basin.hessian(), r.c_stat);
    r.alignment = eigenbasis_alignment(r.c_stat, basin.hessian());
    r.config = {{"basin_id", ws.basin_id}, {"n", ws.n},          {"lambda", ws.lambda},
                {"iters", ws.iterations}, {"seed", ws.seed}};
    return r;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    }
    return out;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
    require(j.is_array() && static_cast<Eigen::Index>(j.size()) == rows * cols, "matrix has the wrong size");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(static_cast<std::size_t>(i * cols + c)).get<double>();
    }
    return m;
}

nlohmann::json to_json(const SampleReport& r) {
    return {{"c_stat", matrix_to_json(r.c_stat)},
            {"mean", vector_to_json(r.mean)},
            {"eigenvalues", vector_to_json(r.eigenvalues)},
            {"eigenvectors", matrix_to_json(r.eigenvectors)},
            {"commutator_max_norm", r.commutator_max_norm},
            {"alignment", r.alignment},
            {"config", r.config}};
}

std::string winners_csv(const WinnerSet& ws) {
    require(ws.has_winners(), "winner vectors were not retained");
    std::string out = "iter,omega";
    for (int i = 1; i <= ws.n; ++i) out += ",y_" + std::to_string(i);
    out += "\n";
    for (Eigen::Index t = 0; t < ws.winners.rows(); ++t) {
        out += std::to_string(t) + "," + io::format_double(ws.values[static_cast<std::size_t>(t)]);
        for (Eigen::Index i = 0; i < ws.winners.cols(); ++i) out += "," + io::format_double(ws.winners(t, i));
        out += "\n";
    }
    return out;
}

}  // namespace wlab
