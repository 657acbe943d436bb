#pragma once

// Special functions used by the probability laws: log-gamma, the regularized
// incomplete gamma functions and the gamma density kernel.

namespace wlab::special {

/// log Γ(x) for x > 0 (Lanczos approximation, |error| ~ 1e-15).
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
/// directly so that small survival values keep full relative precision.
double gamma_q(double a, double x);

/// x^a e^{-x} / Γ(a+1), computed without forming the factors separately.
double poisson_kernel(double a, double x);

/// log of poisson_kernel; finite wherever x > 0.
double log_poisson_kernel(double a, double x);

/// Gamma density with shape a and unit rate: x^{a-1} e^{-x} / Γ(a).
double gamma_density(double a, double x);

/// log of gamma_density for x > 0.
double log_gamma_density(double a, double x);

}  // namespace wlab::special
