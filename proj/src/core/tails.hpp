/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_TAILS_HPP
#define LATOPT_CORE_TAILS_HPP

namespace latopt {

/// Upper incomplete gamma function Gamma(a, x), a > 0, x >= 0.
double upper_incomplete_gamma(double a, double x);

/// Rigorous upper bound on sum over points of a 2*rho-separated set with
/// squared norm > cutoff of (norm^2)^{r_pow} * exp(-c * norm^2).
///
/// The set is covered by disjoint balls of radius rho, which turns the sum
/// into a radial integral; returns +inf when the cutoff is too small for the
/// bound to apply (caller then grows the cutoff).
double separated_tail_exponential(int dim, double rho, double cutoff, double c, int r_pow);

/// Same bound for (norm^2)^{-s_eff}; finite only when 2*s_eff > dim + small.
double separated_tail_power(int dim, double rho, double cutoff, double s_eff);

} // namespace latopt

#endif
