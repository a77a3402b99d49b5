/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_DESIGNS_HPP
#define LATOPT_CORE_DESIGNS_HPP

#include <vector>

#include "core/enumerate.hpp"
#include "core/forms.hpp"

namespace latopt {

struct DesignReport {
    double alpha{0.0};
    std::int64_t count{0};
    int t_checked{0};
    bool is_design{false};
    /// Worst deviation across the tested identities, relative to the
    /// right-hand-side scale; exactly 0 on the rational path.
    double max_residual{0.0};
    double c_t{0.0};
    bool exact_path{false};
    /// Identity sides at the worst residual (diagnostics for failures).
    double worst_lhs{0.0};
    double worst_rhs{0.0};
    /// False when only a sampled (non-complete) test was run (t >= 6).
    bool certifying{true};
};

/// Second-moment identity: sum over the shell of w w^T equals
/// (alpha |shell| / d) Id in Euclidean coordinates.
DesignReport check_2design(const Shell& shell, const QuadForm& q);

/// Fourth-moment identity over a complete basis of symmetric matrices plus
/// random redundancy checks.
DesignReport check_4design(const Shell& shell, const QuadForm& q);

/// Direction-sampling test of the moment identity for even t; complete for
/// no t, flagged non-certifying for t >= 6.
DesignReport check_design_even_t(const Shell& shell, const QuadForm& q, int t,
                                 int n_random = 50, std::uint64_t seed = 0x5eed);

struct AllShellsReport {
    std::vector<DesignReport> reports;
    bool all_design{false};
    double verified_up_to{0.0};
};

AllShellsReport all_shells_design(const QuadForm& q, int t, double max_norm_sq);

} // namespace latopt

#endif
