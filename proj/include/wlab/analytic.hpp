#pragma once

// Analytic covariance of the winners: the isotropic closed form, importance
// sampled Monte Carlo against the standard normal, and tensor Gauss-Hermite
// quadrature in the eigenbasis.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wlab/basin.hpp"
#include "wlab/dist.hpp"

namespace wlab {

enum class WeightMode { Exact, Gevd };

std::string to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& s);

struct AnalyticCovariance {
    Matrix c;
    Matrix stderr_;  // zero for deterministic estimators
    std::string estimator;
    double mean_weight = 1.0;
    double mean_weight_stderr = 0.0;
    double a_star = 0.0;
    nlohmann::json params;
};

nlohmann::json to_json(const AnalyticCovariance& a);

/// Volume of the unit n-ball, pi^{n/2} / Gamma(n/2 + 1).
double ball_volume(int n);

/// Scalar in front of I/h0 in the isotropic closed form.
double isotropic_factor(int n, double h0, std::int64_t lambda);
AnalyticCovariance isotropic_covariance(int n, double h0, std::int64_t lambda);

/// Importance weight against the standard normal, as a function of J.
/// Exact: lambda S(J)^{lambda-1} with S the exact survival of z^T H z.
/// Gevd: f_Weibull(J/a*) / (a* f_gamma(J)), a* the 1/lambda quantile of the
/// exact law; these weights are self-normalized.
class WinnerWeight {
public:
    WinnerWeight(const QuadraticBasin& basin, std::int64_t lambda, WeightMode mode);

    double operator()(double j) const;
    WeightMode mode() const { return mode_; }
    double a_star() const { return a_star_; }
    /// Rough mean of the winning value, used to scale quadrature nodes.
    double winner_mean_hint() const;

private:
    WeightMode mode_;
    std::int64_t lambda_;
    int n_;
    double a_star_ = 0.0;
    double log_a_star_ = 0.0;
    double upsilon_ = 0.0;
    double eta_ = 0.0;
    double log_norm_ = 0.0;
    double trace_ = 0.0;
    std::shared_ptr<const QuadFormKind> exact_;
};

AnalyticCovariance covariance_importance_mc(const QuadraticBasin& basin, std::int64_t lambda,
                                            WeightMode mode, std::size_t samples, std::uint64_t seed,
                                            std::size_t threads = 0);

AnalyticCovariance covariance_quadrature(const QuadraticBasin& basin, std::int64_t lambda, int order,
                                         WeightMode mode = WeightMode::Gevd, std::size_t threads = 0);

/// Probabilists' Gauss-Hermite rule (weight e^{-x^2/2}/sqrt(2 pi), total mass 1).
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int order);

struct CovarianceReport {
    double commutator_stat = 0.0;
    double commutator_analytic = 0.0;
    double max_deviation = 0.0;
    double alignment_stat = 0.0;      // eigenvectors of C_stat vs Hessian eigenspaces
    double alignment_analytic = 0.0;  // eigenvectors of C_analytic vs Hessian eigenspaces
    double alignment_mutual = 0.0;    // eigenvectors of C_stat vs those of C_analytic
};

CovarianceReport compare_report(const Matrix& c_stat, const Matrix& c_analytic, const Matrix& h);
nlohmann::json to_json(const CovarianceReport& r);

}  // namespace wlab
