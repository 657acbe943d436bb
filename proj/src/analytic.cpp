#include "wlab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wlab/errors.hpp"
#include "wlab/parallel.hpp"
#include "wlab/rng.hpp"
#include "wlab/sampler.hpp"
#include "wlab/special.hpp"

namespace wlab {
namespace {

constexpr std::size_t kSamplesPerChunk = 1 << 14;
constexpr double kSelfConsistencySigmas = 10.0;

// Weighted sums over samples x with weight w:
// s1 = sum w x x^T, s2 = sum (w x x^T)^2, s3 = sum w^2 x x^T, w1 = sum w, w2 = sum w^2.
struct Moments {
    Matrix s1, s2, s3;
    double w1 = 0.0;
    double w2 = 0.0;

    explicit Moments(int n = 0)
        : s1(Matrix::Zero(n, n)), s2(Matrix::Zero(n, n)), s3(Matrix::Zero(n, n)) {}

    void add(const Vector& x, double w) {
        const Matrix xx = x * x.transpose();
        s1.noalias() += w * xx;
        s2.noalias() += (w * w) * xx.cwiseProduct(xx);
        s3.noalias() += (w * w) * xx;
        w1 += w;
        w2 += w * w;
    }

    void merge(const Moments& o) {
        s1 += o.s1;
        s2 += o.s2;
        s3 += o.s3;
        w1 += o.w1;
        w2 += o.w2;
    }
};

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

std::string to_string(WeightMode mode) { return mode == WeightMode::Exact ? "exact" : "gevd"; }

WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "exact") return WeightMode::Exact;
    if (s == "gevd") return WeightMode::Gevd;
    throw ValidationError("unknown weight mode: " + s);
}

double ball_volume(int n) {
    require(n >= 1, "ball volume requires n >= 1");
    const int m = n / 2;
    double log_v = m * std::log(std::numbers::pi);
    if (n % 2 == 0) {
        for (int i = 2; i <= m; ++i) log_v -= std::log(static_cast<double>(i));
    } else {
        log_v += (m + 1) * std::numbers::ln2;
        for (int i = 1; i <= m; ++i) log_v -= std::log(2.0 * i + 1.0);
    }
    return std::exp(log_v);
}

double isotropic_factor(int n, double h0, std::int64_t lambda) {
    require(n >= 1, "dimension must be >= 1");
    require(h0 > 0.0 && std::isfinite(h0), "h0 must be positive");
    require(lambda >= 2, "closed form requires lambda >= 2");
    const ScalarLaw psi = ScalarLaw::gamma_approx(1.0 / (2.0 * h0), 0.5 * n);
    const double a_star = psi.quantile(1.0 / static_cast<double>(lambda));
    const double log_factor = special::log_gamma(0.5 * n) + special::log_gamma(1.0 + 2.0 / n) +
                              std::log(ball_volume(n)) + std::log(a_star) - std::numbers::ln2 -
                              0.5 * n * std::log(std::numbers::pi);
    return std::exp(log_factor) / h0;
}

AnalyticCovariance isotropic_covariance(int n, double h0, std::int64_t lambda) {
    const double factor = isotropic_factor(n, h0, lambda);
    AnalyticCovariance out;
    out.c = factor * Matrix::Identity(n, n);
    out.stderr_ = Matrix::Zero(n, n);
    out.estimator = "closed_form_isotropic";
    out.a_star = ScalarLaw::gamma_approx(1.0 / (2.0 * h0), 0.5 * n).quantile(1.0 / static_cast<double>(lambda));
    out.params = {{"n", n}, {"h0", h0}, {"lambda", lambda}, {"mode", "closed_form"}};
    return out;
}

WinnerWeight::WinnerWeight(const QuadraticBasin& basin, std::int64_t lambda, WeightMode mode)
    : mode_(mode), lambda_(lambda), n_(basin.dim()) {
    require(lambda >= 1, "lambda must be >= 1");
    if (mode == WeightMode::Gevd) require(lambda >= 2, "gevd weights require lambda >= 2");
    exact_ = std::make_shared<const QuadFormKind>(basin.eigenvalues());
    trace_ = basin.eigenvalues().sum();
    upsilon_ = basin.upsilon();
    eta_ = basin.eta();
    if (lambda >= 2) {
        a_star_ = ScalarLaw::quadratic_form(basin.eigenvalues()).quantile(1.0 / static_cast<double>(lambda));
        log_a_star_ = std::log(a_star_);
    }
    log_norm_ = std::log(0.5 * n_) - log_a_star_ - std::log(upsilon_);
}

double WinnerWeight::operator()(double j) const {
    if (mode_ == WeightMode::Exact) {
        if (lambda_ == 1) return 1.0;
        const double s = exact_->survival(j);
        if (s <= 0.0) return 0.0;
        return static_cast<double>(lambda_) * std::exp(static_cast<double>(lambda_ - 1) * std::log(s));
    }
    if (j <= 0.0) return 0.0;
    const double m = 0.5 * n_;
    const double log_ratio = std::log(j) - log_a_star_;
    const double log_w = log_norm_ + (m - 1.0) * log_ratio - std::exp(m * log_ratio) -
                         special::log_gamma_density(eta_, upsilon_ * j);
    return std::exp(log_w);
}

double WinnerWeight::winner_mean_hint() const {
    if (lambda_ == 1) return trace_;
    return a_star_ * std::exp(special::log_gamma(1.0 + 2.0 / n_));
}

AnalyticCovariance covariance_importance_mc(const QuadraticBasin& basin, std::int64_t lambda,
                                            WeightMode mode, std::size_t samples, std::uint64_t seed,
                                            std::size_t threads) {
    require(samples >= 100000, "importance sampling requires at least 1e5 samples");
    const WinnerWeight weight(basin, lambda, mode);
    const int n = basin.dim();
    const Matrix& h = basin.hessian();
    const rng::Key key = rng::derive_key(seed, rng::Purpose::ImportanceMc);
    if (threads == 0) threads = default_threads();

    const auto partials = map_chunks<Moments>(samples, kSamplesPerChunk, threads, [&](ChunkRange r) {
        Moments m(n);
        Vector z(n);
        for (std::size_t s = r.begin; s < r.end; ++s) {
            rng::Substream stream(key, s);
            for (int i = 0; i < n; ++i) z[i] = stream.normal();
            m.add(z, weight(z.dot(h * z)));
        }
        return m;
    });
    Moments tot(n);
    for (const auto& p : partials) tot.merge(p);

    const double count = static_cast<double>(samples);
    AnalyticCovariance out;
    out.a_star = weight.a_star();
    out.mean_weight = tot.w1 / count;
    out.mean_weight_stderr = std::sqrt(std::max(0.0, tot.w2 / count - out.mean_weight * out.mean_weight) / (count - 1.0));
    if (mode == WeightMode::Exact) {
        out.estimator = "importance_mc_exact";
        out.c = tot.s1 / count;
        const Matrix var = (tot.s2 / count - out.c.cwiseProduct(out.c)).cwiseMax(0.0);
        out.stderr_ = (var / (count - 1.0)).cwiseSqrt();
        if (std::abs(out.mean_weight - 1.0) > kSelfConsistencySigmas * out.mean_weight_stderr) {
            throw SelfConsistencyError("mean importance weight " + std::to_string(out.mean_weight) +
                                       " departs from 1 by more than 10 standard errors");
        }
    } else {
        out.estimator = "importance_mc_gevd";
        if (!(tot.w1 > 0.0)) throw NumericalError("all importance weights vanished");
        const Matrix ratio = tot.s1 / tot.w1;
        // Delta method: Var(R) = E[w^2 (x - R)^2] / (N E[w]^2).
        const Matrix num = tot.s2 - 2.0 * ratio.cwiseProduct(tot.s3) + ratio.cwiseProduct(ratio) * tot.w2;
        out.c = ratio;
        out.stderr_ = (num.cwiseMax(0.0) / (tot.w1 * tot.w1)).cwiseSqrt();
    }
    out.c = symmetrize(out.c);
    out.params = {{"n", n}, {"lambda", lambda}, {"mode", to_string(mode)}, {"samples", samples}, {"seed", seed}};
    return out;
}

std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int order) {
    require(order >= 1, "quadrature order must be >= 1");
    Matrix jacobi = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    if (es.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigensolver failed");
    std::vector<double> nodes(static_cast<std::size_t>(order));
    std::vector<double> weights(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        nodes[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
        const double v = es.eigenvectors()(0, k);
        weights[static_cast<std::size_t>(k)] = v * v;
    }
    return {nodes, weights};
}

AnalyticCovariance covariance_quadrature(const QuadraticBasin& basin, std::int64_t lambda, int order,
                                         WeightMode mode, std::size_t threads) {
    const int n = basin.dim();
    if (n > 4) throw UnsupportedDimensionError("quadrature supports n <= 4");
    require(order >= 20, "quadrature order must be >= 20");
    const WinnerWeight weight(basin, lambda, mode);
    const Vector& delta = basin.eigenvalues();
    if (threads == 0) threads = default_threads();

    // theta_i = s_i u_i with u_i on the Gauss-Hermite nodes; the Jacobian and
    // density ratio enter as a per-node factor.
    const double hint = weight.winner_mean_hint();
    Vector scale(n);
    for (int i = 0; i < n; ++i) scale[i] = std::sqrt(std::clamp(hint / (n * delta[i]), 1e-6, 1.0));
    const auto [nodes, gh_weights] = gauss_hermite(order);
    const auto m = static_cast<std::size_t>(order);
    const std::size_t outer = m;
    std::size_t inner = 1;
    for (int i = 1; i < n; ++i) inner *= m;

    struct Partial {
        Vector diag;
        double mass = 0.0;
    };
    const auto partials = map_chunks<Partial>(outer, 1, threads, [&](ChunkRange r) {
        Partial p{Vector::Zero(n), 0.0};
        Vector theta(n);
        std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
        for (std::size_t lin = 0; lin < inner; ++lin) {
            idx[0] = r.begin;
            std::size_t rest = lin;
            for (int i = 1; i < n; ++i) {
                idx[static_cast<std::size_t>(i)] = rest % m;
                rest /= m;
            }
            double log_factor = 0.0;
            double node_w = 1.0;
            double j = 0.0;
            for (int i = 0; i < n; ++i) {
                const double u = nodes[idx[static_cast<std::size_t>(i)]];
                const double s = scale[i];
                theta[i] = s * u;
                node_w *= gh_weights[idx[static_cast<std::size_t>(i)]];
                log_factor += std::log(s) + 0.5 * (1.0 - s * s) * u * u;
                j += delta[i] * theta[i] * theta[i];
            }
            const double w = node_w * std::exp(log_factor) * weight(j);
            p.diag += w * theta.cwiseProduct(theta);
            p.mass += w;
        }
        return p;
    });
    Vector diag = Vector::Zero(n);
    double mass = 0.0;
    for (const auto& p : partials) {
        diag += p.diag;
        mass += p.mass;
    }
    if (!(mass > 0.0)) throw NumericalError("quadrature weights vanished");
    AnalyticCovariance out;
    if (mode == WeightMode::Gevd) diag /= mass;
    const Matrix& u = basin.eigenvectors();
    out.c = symmetrize(u * diag.asDiagonal() * u.transpose());
    out.stderr_ = Matrix::Zero(n, n);
    out.estimator = mode == WeightMode::Gevd ? "quadrature_gevd" : "quadrature_exact";
    out.mean_weight = mass;
    out.a_star = weight.a_star();
    out.params = {{"n", n}, {"lambda", lambda}, {"mode", to_string(mode)}, {"order", order}};
    return out;
}

CovarianceReport compare_report(const Matrix& c_stat, const Matrix& c_analytic, const Matrix& h) {
    require(c_stat.rows() == c_analytic.rows() && c_stat.cols() == c_analytic.cols() &&
                c_stat.rows() == h.rows() && c_stat.cols() == h.cols() && h.rows() == h.cols(),
            "compare_report requires square matrices of equal dimension");
    CovarianceReport r;
    r.commutator_stat = commutator_max_norm(h, c_stat);
    r.commutator_analytic = commutator_max_norm(h, c_analytic);
    r.max_deviation = (c_stat - c_analytic).cwiseAbs().maxCoeff();
    r.alignment_stat = eigenbasis_alignment(c_stat, h);
    r.alignment_analytic = eigenbasis_alignment(c_analytic, h);
    r.alignment_mutual = eigenbasis_alignment(c_stat, c_analytic);
    return r;
}

nlohmann::json to_json(const CovarianceReport& r) {
    return {{"commutator_max_norm_stat", r.commutator_stat},
            {"commutator_max_norm_analytic", r.commutator_analytic},
            {"max_deviation", r.max_deviation},
            {"alignment_stat", r.alignment_stat},
            {"alignment_analytic", r.alignment_analytic},
            {"alignment_mutual", r.alignment_mutual}};
}

nlohmann::json to_json(const AnalyticCovariance& a) {
    return {{"c", matrix_to_json(a.c)},
            {"stderr", matrix_to_json(a.stderr_)},
            {"estimator", a.estimator},
            {"mean_weight", a.mean_weight},
            {"a_star", a.a_star},
            {"params", a.params}};
}

}  // namespace wlab
