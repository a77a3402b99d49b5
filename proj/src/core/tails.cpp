/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/tails.hpp"

#include <cmath>
#include <limits>

#include "core/common.hpp"

namespace latopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Regularised lower incomplete gamma by power series (x < a + 1).
double gamma_p_series(double a, double x)
{
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Gamma(a,x)/ (e^{-x} x^a) by Lentz continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x)
{
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            break;
        }
    }
    return h;
}

} // namespace

double upper_incomplete_gamma(double a, double x)
{
    if (!(a > 0.0) || x < 0.0) {
        fail(errc::domain_error, "upper_incomplete_gamma needs a > 0, x >= 0");
    }
    if (x == 0.0) {
        return std::tgamma(a);
    }
    if (x < a + 1.0) {
        double p = gamma_p_series(a, x);
        return std::tgamma(a) * std::max(0.0, 1.0 - p);
    }
    double logpre = -x + a * std::log(x);
    if (logpre < -700.0) {
        return 0.0;
    }
    return std::exp(logpre) * gamma_q_cf(a, x);
}

namespace {

/// Integral of u^j e^{-c u^2} du from U to infinity.
double gaussian_power_integral(int j, double c, double u0)
{
    double a = 0.5 * (j + 1);
    return 0.5 * std::pow(c, -a) * upper_incomplete_gamma(a, c * u0 * u0);
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

} // namespace

double separated_tail_exponential(int dim, double rho, double cutoff, double c, int r_pow)
{
    double u0 = std::sqrt(cutoff) - 2.0 * rho;
    if (!(u0 > 0.0)) {
        return kInf;
    }
    // Weight w(r) = r^{r_pow} e^{-c r} must be nonincreasing past the cutoff.
    if (r_pow > 0 && u0 * u0 < static_cast<double>(r_pow) / c) {
        return kInf;
    }
    // (d / rho^d) * int_{u0}^inf u^{2 r_pow} (u + rho)^{d-1} e^{-c u^2} du,
    // with the binomial expansion of (u + rho)^{d-1}.
    double total = 0.0;
    for (int k = 0; k <= dim - 1; ++k) {
        double coef = binomial(dim - 1, k) * std::pow(rho, dim - 1 - k);
        total += coef * gaussian_power_integral(k + 2 * r_pow, c, u0);
    }
    double pre = dim * std::pow(rho, -dim);
    double bound = pre * total;
    return bound * 1.0000001; // absorb rounding of the special functions
}

double separated_tail_power(int dim, double rho, double cutoff, double s_eff)
{
    double u0 = std::sqrt(cutoff) - 2.0 * rho;
    if (!(u0 > 0.0)) {
        return kInf;
    }
    double p = dim - 2.0 * s_eff; // integrand ~ u^{p-1}
    if (p >= 0.0) {
        return kInf;
    }
    double pre = dim * std::pow(rho, -dim) * std::pow(1.0 + rho / u0, dim - 1);
    double integral = std::pow(u0, p) / (-p);
    return pre * integral * 1.0000001;
}

} // namespace latopt
