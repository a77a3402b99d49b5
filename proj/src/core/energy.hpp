/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_ENERGY_HPP
#define LATOPT_CORE_ENERGY_HPP

#include "core/enumerate.hpp"
#include "core/forms.hpp"
#include "core/potential.hpp"

namespace latopt {

struct EnergyValue {
    double value{0.0};
    double tail_bound{0.0};
    double cutoff_norm_sq{0.0};
    std::int64_t terms_used{0};
};

struct EnergyBudget {
    /// When positive, use exactly this cutoff instead of searching for one.
    double cutoff_norm_sq{0.0};
    /// Abort with CutoffOverflow when the point-count estimate passes this.
    double max_points{4e9};
};

/// Coset-sum energy per point with a rigorous truncation bound at most
/// target_tail (default: 1e-12 relative to the first-shell contribution).
EnergyValue energy(const PeriodicForm& p, const Potential& pot, double target_tail = -1.0,
                   const EnergyBudget& budget = {});

/// Lattice specialisation sum over nonzero x of |x|^{-2s}; requires s > d/2.
EnergyValue epstein_zeta(const QuadForm& q, double s, double target_tail = -1.0,
                         const EnergyBudget& budget = {});

/// Lattice specialisation sum over nonzero x of e^{-c |x|^2}.
EnergyValue theta_minus_one(const QuadForm& q, double c, double target_tail = -1.0,
                            const EnergyBudget& budget = {});

/// Finite-window estimator: average pair energy over all points of the set
/// with Euclidean norm <= R.
double windowed_energy(const PeriodicForm& p, double radius, const Potential& pot);

/// Plain truncated coset sum at a fixed cutoff; deterministic, no tail
/// machinery. Finite differences and line searches use this so that the
/// truncation window is identical across evaluations.
double energy_truncated(const PeriodicForm& p, const Potential& pot, double cutoff_norm_sq,
                        std::int64_t* terms = nullptr);

/// Moves a requested cutoff into a gap of the squared-norm spectrum of the
/// form, so nearby retractions cannot push shells across the boundary.
double snap_cutoff(const PeriodicForm& p, double cutoff_norm_sq);

/// Rigorous per-coset tail bound for the potential past the cutoff.
double potential_tail_bound(const Potential& pot, int dim, double rho, double cutoff);

} // namespace latopt

#endif
