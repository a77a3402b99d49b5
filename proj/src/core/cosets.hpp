/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_COSETS_HPP
#define LATOPT_CORE_COSETS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "core/forms.hpp"

namespace latopt {

/// sigma[k][i] = index of the coset congruent to u_i - u_k.
struct PermutationTable {
    int m{0};
    std::vector<std::vector<int>> sigma;
};

struct NotALattice {
    int k{0};
    int i{0};
};

struct LatticeDetection {
    std::optional<PermutationTable> table;
    std::optional<NotALattice> failure;

    bool is_lattice() const { return table.has_value(); }
};

/// Resolves, for every k, the permutation with u_{sigma_k(i)} = u_i - u_k
/// mod Z^d (tolerance 1e-9); a full table exists iff the periodic set is a
/// lattice.
LatticeDetection detect_lattice(const PeriodicForm& p);

/// Writes a lattice Q as an m-coset periodic form over an index-m
/// sublattice chosen via a seeded Hermite-normal-form transform.
PeriodicForm coset_decomposition(const QuadForm& q, int m, std::uint64_t seed);

} // namespace latopt

#endif
