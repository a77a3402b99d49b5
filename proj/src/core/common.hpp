/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_COMMON_HPP
#define LATOPT_CORE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace latopt {

/// Stable error categories; mirrored one-to-one by the C API codes.
enum class errc : int {
    ok = 0,
    structural,            // dimension mismatch, malformed input
    invalid_form,          // not positive definite / invariant violation
    invalid_transform,     // non-unimodular matrix
    perturbation_too_large,
    divergent_sum,         // p_s with s <= d/2
    cutoff_overflow,       // required cutoff exceeds the configured budget
    window_too_small,
    empty_shell,
    unsupported_parity,    // odd t in a design check
    design_hypothesis_failed,
    precondition_failed,
    not_a_lattice,
    unknown_lattice,
    internal_inconsistency,
    line_search_stalled,
    domain_error,
    io_error,
};

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what)
{
    throw Error(code, what);
}

/// Neumaier-compensated accumulator. Summation stays deterministic as long
/// as terms arrive in a fixed order.
struct Kahan {
    double sum{0.0};
    double comp{0.0};

    void add(double term)
    {
        double t = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

inline constexpr double pi = 3.14159265358979323846264338327950288;

/// Number of worker threads; honours LATOPT_THREADS, defaults to the
/// hardware count clamped to [1, 16].
int thread_count();

} // namespace latopt

#endif
