#include "wlab/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "wlab/errors.hpp"
#include "wlab/io.hpp"
#include "wlab/parallel.hpp"
#include "wlab/rng.hpp"
#include "wlab/special.hpp"

namespace wlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogUnderflow = -690.0;
constexpr std::size_t kMaxSeriesTerms = 5000;
constexpr double kSeriesTail = 1e-40;
constexpr double kGumbelThreshold = 1e-10;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_finite(double psi) {
    if (!std::isfinite(psi)) throw ValidationError("law argument must be finite");
}

// Σ_m y^m / ((a+1)...(a+m)).
double ratio_series(double a, double y) {
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 1000000; ++m) {
        term *= y / (a + m);
        sum += term;
        if (term < 1e-17 * sum) return sum;
    }
    throw NumericalError("ratio series did not converge");
}

// State for the upward recurrence t_k = y^{a0+k} e^{-y} / Γ(a0+k+1).
class KernelChain {
public:
    KernelChain(double a0, double y) : a_(a0), y_(y), log_y_(std::log(y)) {
        log_t_ = special::log_poisson_kernel(a0, y);
        linear_ = log_t_ > kLogUnderflow;
        t_ = linear_ ? std::exp(log_t_) : 0.0;
    }

    double value() const { return linear_ ? t_ : (log_t_ < -745.0 ? 0.0 : std::exp(log_t_)); }

    void advance() {
        a_ += 1.0;
        if (linear_) {
            t_ *= y_ / a_;
        } else {
            log_t_ += log_y_ - std::log(a_);
            if (log_t_ > kLogUnderflow) {
                linear_ = true;
                t_ = std::exp(log_t_);
            }
        }
    }

private:
    double a_;
    double y_;
    double log_y_;
    double log_t_;
    double t_;
    bool linear_;
};

// Shared gamma-law kernel: shape a, rate r.
double gamma_cdf(double a, double r, double psi) { return psi <= 0.0 ? 0.0 : special::gamma_p(a, r * psi); }
double gamma_sf(double a, double r, double psi) { return psi <= 0.0 ? 1.0 : special::gamma_q(a, r * psi); }
double gamma_pdf(double a, double r, double psi) {
    if (psi < 0.0) return 0.0;
    return r * special::gamma_density(a, r * psi);
}


// Bracketed Newton iteration in log space on the tail that holds the target.
double numeric_quantile(const ScalarLaw& law, double p, double start) {
    const bool lower = p <= 0.5;
    const double target = lower ? std::log(p) : std::log1p(-p);
    // g(x) increasing in x.
    auto g = [&](double x) { return lower ? law.log_cdf(x) - target : target - law.log_survival(x); };

    const double origin = law.support_lower();
    if (!std::isfinite(origin)) throw NumericalError("numeric quantile requires a bounded support");
    double hi = start > origin ? start : origin + 1.0;
    for (int i = 0; !(g(hi) >= 0.0); ++i) {
        if (i == 200) throw NumericalError("quantile: failed to bracket the upper end");
        hi = origin + 2.0 * (hi - origin);
    }
    double lo = origin + 0.5 * (hi - origin);
    for (int i = 0; g(lo) > 0.0; ++i) {
        if (i == 1100) return origin;
        hi = lo;
        lo = origin + 0.5 * (lo - origin);
    }

    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 400; ++iter) {
        const double gx = g(x);
        if (gx == 0.0) return x;
        if (gx > 0.0) hi = x; else lo = x;
        // d/dx log F = f/F, d/dx (-log S) = f/S.
        const double dens = law.pdf(x);
        const double denom = lower ? law.cdf(x) : law.survival(x);
        double next = x;
        if (dens > 0.0 && denom > 0.0 && std::isfinite(dens)) next = x - gx * denom / dens;
        if (!(next > lo && next < hi)) {
            next = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 2e-16 * std::abs(x) || hi - lo <= 4e-16 * std::abs(hi)) return next;
        x = next;
    }
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exact law of z^T H z.

QuadFormKind::QuadFormKind(const Vector& delta) {
    require(delta.size() > 0, "quadratic-form law needs at least one eigenvalue");
    require(delta.allFinite() && delta.minCoeff() > 0.0, "eigenvalues must be positive");
    delta_.assign(delta.data(), delta.data() + delta.size());
    std::sort(delta_.begin(), delta_.end());
    n_ = static_cast<int>(delta_.size());
    beta_ = delta_.front();
    a0_ = 0.5 * n_;

    double log_c0 = 0.0;
    std::vector<double> gam(delta_.size());
    for (std::size_t i = 0; i < delta_.size(); ++i) {
        log_c0 += 0.5 * std::log(beta_ / delta_[i]);
        gam[i] = 1.0 - beta_ / delta_[i];
    }
    const double c0 = std::exp(log_c0);
    if (!(c0 > 1e-290)) throw NumericalError("eigenvalue spread too large for the mixture series");

    // c_k = c0 d_k, d_k = (1/2k) Σ_{m=1..k} g_m d_{k-m}, g_m = Σ_i gamma_i^m.
    std::vector<double> d{1.0};
    std::vector<double> g{0.0};
    std::vector<double> powers(gam);
    coeff_.push_back(c0);
    double remainder = 0.0;
    const bool degenerate = std::all_of(gam.begin(), gam.end(), [](double v) { return v == 0.0; });
    for (std::size_t k = 1; !degenerate && k < kMaxSeriesTerms; ++k) {
        g.push_back(std::accumulate(powers.begin(), powers.end(), 0.0));
        for (std::size_t i = 0; i < powers.size(); ++i) powers[i] *= gam[i];
        double acc = 0.0;
        for (std::size_t m = 1; m <= k; ++m) acc += g[m] * d[k - m];
        d.push_back(acc / (2.0 * static_cast<double>(k)));
        const double ck = c0 * d.back();
        coeff_.push_back(ck);
        const double prev = coeff_[coeff_.size() - 2];
        if (k > 8 && ck < prev) {
            const double r = ck / prev;
            remainder = ck * r / (1.0 - r);
            if (remainder < kSeriesTail) break;
        }
    }
    tail_.assign(coeff_.size(), 0.0);
    double acc = remainder;
    for (std::size_t k = coeff_.size(); k-- > 0;) {
        tail_[k] = acc;
        acc += coeff_[k];
    }
}

double QuadFormKind::survival(double x) const {
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double y = x / (2.0 * beta_);
    double q = special::gamma_q(a0_, y);
    KernelChain chain(a0_, y);
    double s = 0.0;
    for (std::size_t k = 0; k < coeff_.size(); ++k) {
        s += coeff_[k] * q;
        if (tail_[k] <= 1e-17 * s) break;
        q = std::min(1.0, q + chain.value());
        chain.advance();
    }
    return std::min(1.0, s);
}

double QuadFormKind::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    const double s = survival(x);
    if (s < 0.5) return 1.0 - s;
    const double y = x / (2.0 * beta_);
    const std::size_t terms = coeff_.size();
    std::vector<double> t(terms);
    KernelChain chain(a0_, y);
    for (std::size_t k = 0; k < terms; ++k) {
        t[k] = chain.value();
        chain.advance();
    }
    // P_k = t_k R_k with R_k = 1 + y/(a_k+1) R_{k+1}; downward is stable.
    double r = ratio_series(a0_ + static_cast<double>(terms - 1), y);
    double f = 0.0;
    for (std::size_t k = terms; k-- > 0;) {
        if (k + 1 < terms) r = 1.0 + y / (a0_ + static_cast<double>(k) + 1.0) * r;
        f += coeff_[k] * t[k] * r;
    }
    return std::min(1.0, f);
}

double QuadFormKind::pdf(double x) const {
    if (x < 0.0) return 0.0;
    if (x == 0.0) {
        if (n_ == 1) return kInf;
        return n_ == 2 ? coeff_.front() / (2.0 * beta_) : 0.0;
    }
    const double y = x / (2.0 * beta_);
    KernelChain chain(a0_, y);
    double f = 0.0;
    for (std::size_t k = 0; k < coeff_.size(); ++k) {
        f += coeff_[k] * chain.value() * (a0_ + static_cast<double>(k));
        chain.advance();
    }
    return f / y / (2.0 * beta_);
}

// ---------------------------------------------------------------------------
// ScalarLaw

ScalarLaw ScalarLaw::chi_square(int n) {
    require(n >= 1, "chi-square requires n >= 1");
    return ScalarLaw(ChiSquareKind{n});
}

ScalarLaw ScalarLaw::gamma_approx(double upsilon, double eta) {
    require(upsilon > 0.0 && eta > 0.0 && std::isfinite(upsilon) && std::isfinite(eta),
            "gamma approximation requires positive rate and shape");
    return ScalarLaw(GammaApproxKind{upsilon, eta});
}

ScalarLaw ScalarLaw::gamma_approx(const QuadraticBasin& basin) {
    return gamma_approx(basin.upsilon(), basin.eta());
}

ScalarLaw ScalarLaw::quadratic_form(const Vector& delta) {
    return ScalarLaw(std::make_shared<const QuadFormKind>(delta));
}

ScalarLaw ScalarLaw::winners(const ScalarLaw& base, std::int64_t lambda) {
    require(lambda >= 1, "winners law requires lambda >= 1");
    return ScalarLaw(WinnersKind{std::make_shared<const ScalarLaw>(base), lambda});
}

ScalarLaw ScalarLaw::gevd_min(double k1, double k2, double k3) {
    require(k2 > 0.0 && std::isfinite(k1) && std::isfinite(k2) && std::isfinite(k3),
            "GEVD requires finite parameters and k2 > 0");
    return ScalarLaw(GevdMinKind{k1, k2, k3});
}

ScalarLaw ScalarLaw::weibull_min(int n) {
    require(n >= 1, "Weibull limit requires n >= 1");
    return ScalarLaw(WeibullMinKind{n});
}

std::string ScalarLaw::name() const {
    return std::visit(
        overloaded{
            [](const ChiSquareKind& k) { return "chi_square(" + std::to_string(k.n) + ")"; },
            [](const GammaApproxKind& k) {
                return "gamma_approx(" + io::format_double(k.upsilon) + "," + io::format_double(k.eta) + ")";
            },
            [](const std::shared_ptr<const QuadFormKind>& k) {
                return "quadratic_form(n=" + std::to_string(k->n()) + ")";
            },
            [](const WinnersKind& k) {
                return "winners(" + k.base->name() + "," + std::to_string(k.lambda) + ")";
            },
            [](const GevdMinKind& k) {
                return "gevd_min(" + io::format_double(k.k1) + "," + io::format_double(k.k2) + "," +
                       io::format_double(k.k3) + ")";
            },
            [](const WeibullMinKind& k) { return "weibull_min(" + std::to_string(k.n) + ")"; },
        },
        kind_);
}

namespace {

// Bracket value 1 + k3 (psi - k1) / k2 and the GEVD survival.
double gevd_survival(const GevdMinKind& k, double psi) {
    if (std::abs(k.k3) < kGumbelThreshold) return std::exp(-std::exp((psi - k.k1) / k.k2));
    const double b = 1.0 + k.k3 * (psi - k.k1) / k.k2;
    if (b <= 0.0) return k.k3 > 0.0 ? 1.0 : 0.0;
    return std::exp(-std::pow(b, 1.0 / k.k3));
}

double gevd_log_survival(const GevdMinKind& k, double psi) {
    if (std::abs(k.k3) < kGumbelThreshold) return -std::exp((psi - k.k1) / k.k2);
    const double b = 1.0 + k.k3 * (psi - k.k1) / k.k2;
    if (b <= 0.0) return k.k3 > 0.0 ? 0.0 : -kInf;
    return -std::pow(b, 1.0 / k.k3);
}

double gevd_pdf(const GevdMinKind& k, double psi) {
    if (std::abs(k.k3) < kGumbelThreshold) {
        const double z = (psi - k.k1) / k.k2;
        return std::exp(z - std::exp(z)) / k.k2;
    }
    const double b = 1.0 + k.k3 * (psi - k.k1) / k.k2;
    if (b <= 0.0) return 0.0;
    const double e = 1.0 / k.k3;
    return std::exp(-std::pow(b, e)) * std::pow(b, e - 1.0) / k.k2;
}

}  // namespace

double ScalarLaw::survival(double psi) const {
    check_finite(psi);
    return std::visit(
        overloaded{
            [&](const ChiSquareKind& k) { return gamma_sf(0.5 * k.n, 0.5, psi); },
            [&](const GammaApproxKind& k) { return gamma_sf(k.eta, k.upsilon, psi); },
            [&](const std::shared_ptr<const QuadFormKind>& k) { return k->survival(psi); },
            [&](const WinnersKind&) { return std::exp(log_survival(psi)); },
            [&](const GevdMinKind& k) { return gevd_survival(k, psi); },
            [&](const WeibullMinKind& k) {
                return psi <= 0.0 ? 1.0 : std::exp(-std::pow(psi, 0.5 * k.n));
            },
        },
        kind_);
}

double ScalarLaw::cdf(double psi) const {
    check_finite(psi);
    return std::visit(
        overloaded{
            [&](const ChiSquareKind& k) { return gamma_cdf(0.5 * k.n, 0.5, psi); },
            [&](const GammaApproxKind& k) { return gamma_cdf(k.eta, k.upsilon, psi); },
            [&](const std::shared_ptr<const QuadFormKind>& k) { return k->cdf(psi); },
            [&](const WinnersKind&) { return -std::expm1(log_survival(psi)); },
            [&](const GevdMinKind& k) { return -std::expm1(gevd_log_survival(k, psi)); },
            [&](const WeibullMinKind& k) {
                return psi <= 0.0 ? 0.0 : -std::expm1(-std::pow(psi, 0.5 * k.n));
            },
        },
        kind_);
}

double ScalarLaw::pdf(double psi) const {
    check_finite(psi);
    return std::visit(
        overloaded{
            [&](const ChiSquareKind& k) { return gamma_pdf(0.5 * k.n, 0.5, psi); },
            [&](const GammaApproxKind& k) { return gamma_pdf(k.eta, k.upsilon, psi); },
            [&](const std::shared_ptr<const QuadFormKind>& k) { return k->pdf(psi); },
            [&](const WinnersKind& k) {
                if (psi < 0.0) return 0.0;
                const double ls = k.base->log_survival(psi);
                const double lam = static_cast<double>(k.lambda);
                const double fb = k.base->pdf(psi);
                if (fb == 0.0) return 0.0;
                return lam * std::exp((lam - 1.0) * ls) * fb;
            },
            [&](const GevdMinKind& k) { return gevd_pdf(k, psi); },
            [&](const WeibullMinKind& k) { return psi < 0.0 ? 0.0 : weibull_winner_pdf(k.n, psi); },
        },
        kind_);
}

double ScalarLaw::log_survival(double psi) const {
    check_finite(psi);
    return std::visit(
        overloaded{
            [&](const WinnersKind& k) { return static_cast<double>(k.lambda) * k.base->log_survival(psi); },
            [&](const GevdMinKind& k) { return gevd_log_survival(k, psi); },
            [&](const WeibullMinKind& k) { return psi <= 0.0 ? 0.0 : -std::pow(psi, 0.5 * k.n); },
            [&](const auto&) {
                if (psi <= 0.0) return 0.0;
                const double s = survival(psi);
                return s < 0.5 ? std::log(s) : std::log1p(-cdf(psi));
            },
        },
        kind_);
}

double ScalarLaw::log_cdf(double psi) const {
    check_finite(psi);
    return std::visit(
        overloaded{
            [&](const WinnersKind&) { return std::log(-std::expm1(log_survival(psi))); },
            [&](const GevdMinKind& k) { return std::log(-std::expm1(gevd_log_survival(k, psi))); },
            [&](const WeibullMinKind& k) {
                return psi <= 0.0 ? -kInf : std::log(-std::expm1(-std::pow(psi, 0.5 * k.n)));
            },
            [&](const auto&) {
                if (psi <= 0.0) return -kInf;
                const double f = cdf(psi);
                return f < 0.5 ? std::log(f) : std::log1p(-survival(psi));
            },
        },
        kind_);
}

double ScalarLaw::support_lower() const {
    return std::visit(
        overloaded{
            [](const WinnersKind& k) { return k.base->support_lower(); },
            [](const GevdMinKind& k) {
                if (std::abs(k.k3) < kGumbelThreshold || k.k3 < 0.0) return -kInf;
                return k.k1 - k.k2 / k.k3;
            },
            [](const auto&) { return 0.0; },
        },
        kind_);
}

double ScalarLaw::mean_hint() const {
    return std::visit(
        overloaded{
            [](const ChiSquareKind& k) { return static_cast<double>(k.n); },
            [](const GammaApproxKind& k) { return k.eta / k.upsilon; },
            [](const std::shared_ptr<const QuadFormKind>& k) {
                return std::accumulate(k->delta().begin(), k->delta().end(), 0.0);
            },
            [](const WinnersKind& k) { return k.base->mean_hint(); },
            [](const GevdMinKind& k) { return k.k1; },
            [](const WeibullMinKind&) { return 1.0; },
        },
        kind_);
}

double ScalarLaw::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile requires 0 < p < 1");
    return std::visit(
        overloaded{
            [&](const WinnersKind& k) {
                // 1 - S(psi)^lambda = p  <=>  F_base(psi) = 1 - (1-p)^{1/lambda}.
                const double pb = -std::expm1(std::log1p(-p) / static_cast<double>(k.lambda));
                return k.base->quantile(pb);
            },
            [&](const GevdMinKind& k) {
                const double e = -std::log1p(-p);
                if (std::abs(k.k3) < kGumbelThreshold) return k.k1 + k.k2 * std::log(e);
                return k.k1 + k.k2 * (std::pow(e, k.k3) - 1.0) / k.k3;
            },
            [&](const WeibullMinKind& k) { return std::pow(-std::log1p(-p), 2.0 / k.n); },
            [&](const auto&) { return numeric_quantile(*this, p, mean_hint()); },
        },
        kind_);
}

// ---------------------------------------------------------------------------

CdfPdf law_cdf_pdf(const ScalarLaw& law, double psi) { return {law.cdf(psi), law.pdf(psi)}; }

double law_quantile(const ScalarLaw& law, double p) { return law.quantile(p); }

CdfPdf winners_cdf_pdf(const ScalarLaw& base, std::int64_t lambda, double psi) {
    require(lambda >= 1, "lambda must be >= 1");
    check_finite(psi);
    if (lambda == 1) return law_cdf_pdf(base, psi);
    const ScalarLaw w = ScalarLaw::winners(base, lambda);
    return law_cdf_pdf(w, psi);
}

double gupta_even_cdf(int n, std::int64_t lambda, double psi) {
    require(n >= 2 && n % 2 == 0, "gupta_even_cdf requires an even dimension");
    require(lambda >= 1, "lambda must be >= 1");
    check_finite(psi);
    if (psi <= 0.0) return 0.0;
    const double half = 0.5 * psi;
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j < n / 2; ++j) {
        term *= half / j;
        sum += term;
    }
    const double lam = static_cast<double>(lambda);
    return -std::expm1(lam * (std::log(sum) - half));
}

double gevd_min_cdf(double psi, double k1, double k2, double k3) {
    return ScalarLaw::gevd_min(k1, k2, k3).cdf(psi);
}

double weibull_winner_pdf(int n, double psi_tilde) {
    require(n >= 1, "dimension must be >= 1");
    check_finite(psi_tilde);
    require(psi_tilde >= 0.0, "normalized value must be nonnegative");
    const double m = 0.5 * n;
    if (psi_tilde == 0.0) {
        if (n == 1) return kInf;
        return n == 2 ? 1.0 : 0.0;
    }
    return m * std::exp((m - 1.0) * std::log(psi_tilde) - std::pow(psi_tilde, m));
}

GevdMinKind weibull_as_gevd(int n) {
    require(n >= 1, "dimension must be >= 1");
    const double k3 = 2.0 / n;
    // Lower support end k1 - k2/k3 = 0 and bracket k3 x / k2 = x.
    return {1.0, k3, k3};
}

NormalizingConstants normalizing_constants(const ScalarLaw& base, std::int64_t lambda, int n) {
    require(lambda >= 2, "normalizing constants require lambda >= 2");
    require(n >= 1, "dimension must be >= 1");
    const double lam = static_cast<double>(lambda);
    NormalizingConstants nc{};
    nc.a_star = base.quantile(1.0 / lam);
    nc.b_star = 0.0;
    nc.a_star_asymptotic = 4.0 * n / std::numbers::e * std::pow(lam, -2.0 / n);
    nc.r_n = std::exp(0.5 * n * std::log(std::numbers::e / (4.0 * n)));
    return nc;
}

double tail_index_estimate(const ScalarLaw& base, double eps) {
    require(eps > 0.0 && eps < 0.125, "tail index requires 0 < eps < 1/8");
    const double q1 = base.quantile(eps);
    const double q2 = base.quantile(2.0 * eps);
    const double q4 = base.quantile(4.0 * eps);
    return -std::log2((q1 - q2) / (q2 - q4));
}

EmpiricalCdf mc_cdf_oracle(const QuadraticBasin& basin, std::span<const double> grid,
                           std::size_t samples, std::uint64_t seed, std::size_t threads) {
    require(!grid.empty(), "CDF oracle grid must not be empty");
    require(std::is_sorted(grid.begin(), grid.end()), "CDF oracle grid must be ascending");
    require(samples >= 10000, "CDF oracle requires at least 1e4 samples");
    if (threads == 0) threads = default_threads();
    const rng::Key key = rng::derive_key(seed, rng::Purpose::CdfOracle);
    const int n = basin.dim();
    const Matrix& h = basin.hessian();

    // Bucket b counts samples with grid[b-1] < J <= grid[b]; prefix sums give the CDF.
    using Counts = std::vector<std::uint64_t>;
    const auto partials = map_chunks<Counts>(samples, 1 << 15, threads, [&](ChunkRange r) {
        Counts counts(grid.size() + 1, 0);
        Vector z(n);
        for (std::size_t s = r.begin; s < r.end; ++s) {
            rng::Substream stream(key, s);
            for (int i = 0; i < n; ++i) z[i] = stream.normal();
            const double j = z.dot(h * z);
            const auto it = std::lower_bound(grid.begin(), grid.end(), j);
            ++counts[static_cast<std::size_t>(it - grid.begin())];
        }
        return counts;
    });
    Counts total(grid.size() + 1, 0);
    for (const auto& c : partials) {
        for (std::size_t b = 0; b < total.size(); ++b) total[b] += c[b];
    }
    EmpiricalCdf out{std::vector<double>(grid.begin(), grid.end()), {}, {}, samples};
    std::uint64_t cum = 0;
    const double m = static_cast<double>(samples);
    for (std::size_t b = 0; b < grid.size(); ++b) {
        cum += total[b];
        const double f = static_cast<double>(cum) / m;
        out.cdf.push_back(f);
        out.std_error.push_back(std::sqrt(f * (1.0 - f) / m));
    }
    return out;
}

std::uint64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

Histogram make_histogram(std::span<const double> values, int bins, double lo, double hi) {
    require(bins >= 2, "histogram requires at least 2 bins");
    require(std::isfinite(lo) && std::isfinite(hi) && hi >= lo, "invalid histogram range");
    if (hi == lo) hi = lo + 1.0;
    Histogram h;
    const double width = (hi - lo) / bins;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + width * i;
    h.edges.back() = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        if (!(v >= lo && v <= hi)) continue;
        auto b = static_cast<std::size_t>((v - lo) / width);
        b = std::min(b, static_cast<std::size_t>(bins - 1));
        ++h.counts[b];
    }
    const double total = static_cast<double>(h.total());
    h.density.resize(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double w = h.edges[b + 1] - h.edges[b];
        h.density[b] = total > 0.0 ? static_cast<double>(h.counts[b]) / (total * w) : 0.0;
    }
    return h;
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_left,bin_right,count,density\n";
    for (std::size_t b = 0; b < h.bins(); ++b) {
        out += io::format_double(h.edges[b]) + "," + io::format_double(h.edges[b + 1]) + "," +
               std::to_string(h.counts[b]) + "," + io::format_double(h.density[b]) + "\n";
    }
    return out;
}

Curve sample_curve(const ScalarLaw& law, double lo, double hi, int points) {
    require(points >= 2, "curve requires at least 2 points");
    require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "invalid curve range");
    Curve c;
    for (int i = 0; i < points; ++i) {
        const double x = i + 1 == points ? hi : lo + (hi - lo) * i / (points - 1);
        c.psi.push_back(x);
        c.cdf.push_back(law.cdf(x));
        c.pdf.push_back(law.pdf(x));
    }
    return c;
}

std::string curve_csv(const Curve& c) {
    std::string out = "psi,cdf,pdf\n";
    for (std::size_t i = 0; i < c.psi.size(); ++i) {
        out += io::format_double(c.psi[i]) + "," + io::format_double(c.cdf[i]) + "," +
               io::format_double(c.pdf[i]) + "\n";
    }
    return out;
}

}  // namespace wlab
