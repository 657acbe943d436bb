#pragma once

// Scalar probability laws of objective values: the chi-square law of an
// isotropic basin, the moment-matched gamma approximation, the exact law of
// z^T H z, the winners' (minimum of lambda) law and its Weibull/GEVD limits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wlab/basin.hpp"

namespace wlab {

class ScalarLaw;

struct ChiSquareKind {
    int n;
};

struct GammaApproxKind {
    double upsilon;  // rate
    double eta;      // shape
};

/// Exact law of sum_i delta_i z_i^2, evaluated as a positive mixture of
/// scaled chi-square laws (Ruben's series) with scale beta = min(delta).
class QuadFormKind {
public:
    explicit QuadFormKind(const Vector& delta);

    int n() const { return n_; }
    const std::vector<double>& delta() const { return delta_; }
    double beta() const { return beta_; }
    std::size_t terms() const { return coeff_.size(); }
    const std::vector<double>& coefficients() const { return coeff_; }

    double cdf(double x) const;
    double survival(double x) const;
    double pdf(double x) const;

private:
    int n_;
    std::vector<double> delta_;
    double beta_;
    double a0_;
    std::vector<double> coeff_;
    std::vector<double> tail_;  // tail_[k] = sum_{j>k} coeff_j (including the truncated remainder)
};

struct WinnersKind {
    std::shared_ptr<const ScalarLaw> base;
    std::int64_t lambda;
};

struct GevdMinKind {
    double k1;  // location
    double k2;  // scale
    double k3;  // shape
};

/// Normalized Weibull limit of winners, CDF 1 - exp(-x^{n/2}).
struct WeibullMinKind {
    int n;
};

class ScalarLaw {
public:
    using Kind = std::variant<ChiSquareKind, GammaApproxKind, std::shared_ptr<const QuadFormKind>,
                              WinnersKind, GevdMinKind, WeibullMinKind>;

    static ScalarLaw chi_square(int n);
    static ScalarLaw gamma_approx(double upsilon, double eta);
    /// Two-moment gamma fit to the objective-value law of a basin.
    static ScalarLaw gamma_approx(const QuadraticBasin& basin);
    /// Exact objective-value law of a basin from its eigenvalues.
    static ScalarLaw quadratic_form(const Vector& delta);
    static ScalarLaw winners(const ScalarLaw& base, std::int64_t lambda);
    static ScalarLaw gevd_min(double k1, double k2, double k3);
    static ScalarLaw weibull_min(int n);

    const Kind& kind() const { return kind_; }
    std::string name() const;

    double cdf(double psi) const;
    double survival(double psi) const;
    double pdf(double psi) const;
    double log_cdf(double psi) const;
    double log_survival(double psi) const;

    /// Lower end of the support (may be -inf for GEVD with k3 <= 0).
    double support_lower() const;
    double quantile(double p) const;

private:
    explicit ScalarLaw(Kind kind) : kind_(std::move(kind)) {}

    double mean_hint() const;

    Kind kind_;
};

struct CdfPdf {
    double cdf;
    double pdf;
};

CdfPdf law_cdf_pdf(const ScalarLaw& law, double psi);
double law_quantile(const ScalarLaw& law, double p);

/// CDF and density of the minimum of lambda iid draws from base.
CdfPdf winners_cdf_pdf(const ScalarLaw& base, std::int64_t lambda, double psi);

/// Closed form of the winners' CDF for chi-square with even n.
double gupta_even_cdf(int n, std::int64_t lambda, double psi);

double gevd_min_cdf(double psi, double k1, double k2, double k3);

/// (n/2) x^{n/2-1} exp(-x^{n/2}).
double weibull_winner_pdf(int n, double psi_tilde);

struct NormalizingConstants {
    double a_star;
    double b_star;
    double a_star_asymptotic;
    double r_n;
};

NormalizingConstants normalizing_constants(const ScalarLaw& base, std::int64_t lambda, int n);

/// GEVD parameters whose CDF equals the normalized Weibull limit for dimension n.
GevdMinKind weibull_as_gevd(int n);

/// -log2[(Q(e) - Q(2e)) / (Q(2e) - Q(4e))] for the quantile function Q of base.
double tail_index_estimate(const ScalarLaw& base, double eps);

struct EmpiricalCdf {
    std::vector<double> grid;
    std::vector<double> cdf;
    std::vector<double> std_error;
    std::size_t samples;
};

/// Empirical CDF of z^T H z over `samples` standard-normal draws.
EmpiricalCdf mc_cdf_oracle(const QuadraticBasin& basin, std::span<const double> grid,
                           std::size_t samples, std::uint64_t seed, std::size_t threads = 0);

struct Histogram {
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;
    std::vector<double> density;

    std::size_t bins() const { return counts.size(); }
    std::uint64_t total() const;
};

/// Equal-width histogram on [lo, hi]; values equal to hi land in the last bin,
/// values outside the range are dropped.
Histogram make_histogram(std::span<const double> values, int bins, double lo, double hi);

/// Max over bin edges of |empirical cumulative fraction - CDF(edge)|.
template <class Cdf>
double ks_distance(const Histogram& h, Cdf&& cdf) {
    const double total = static_cast<double>(h.total());
    double cum = 0.0;
    double worst = std::abs(cdf(h.edges.front()));
    for (std::size_t i = 0; i < h.bins(); ++i) {
        cum += static_cast<double>(h.counts[i]) / total;
        worst = std::max(worst, std::abs(cum - cdf(h.edges[i + 1])));
    }
    return worst;
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
template <class Cdf>
double ks_distance_samples(std::vector<double> samples, Cdf&& cdf) {
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        worst = std::max({worst, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return worst;
}

std::string histogram_csv(const Histogram& h);

struct Curve {
    std::vector<double> psi;
    std::vector<double> cdf;
    std::vector<double> pdf;
};

/// Evaluates a law on `points` equally spaced abscissae in [lo, hi].
Curve sample_curve(const ScalarLaw& law, double lo, double hi, int points);
std::string curve_csv(const Curve& c);

}  // namespace wlab
