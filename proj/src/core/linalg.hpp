/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_LINALG_HPP
#define LATOPT_CORE_LINALG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/common.hpp"

namespace latopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// exp(S) for symmetric S via eigendecomposition.
Matrix sym_expm(const Matrix& s);

/// Orthogonal projection of a symmetric matrix onto {K : Tr(Qinv*K) = 0}
/// along the Q direction: K - Tr(Qinv*K)/d * Q.
Matrix project_trace_constraint(const Matrix& k, const Matrix& q, const Matrix& q_inv);

/// Exact determinant of an integer matrix (Bareiss, fraction-free).
/// Throws on internal overflow of the 128-bit intermediates.
std::int64_t exact_det(const IMatrix& m);

/// Exact adjugate, so that m * adj = det * Id.
IMatrix exact_adjugate(const IMatrix& m);

/// Column-style Hermite normal form of a nonsingular integer matrix
/// (upper triangular, positive diagonal, entries reduced above the diagonal).
IMatrix hermite_normal_form(const IMatrix& m);

/// Small rational with 64-bit parts, always in lowest terms with den > 0.
struct Rat64 {
    std::int64_t num{0};
    std::int64_t den{1};

    Rat64() = default;
    Rat64(std::int64_t n, std::int64_t d);
    static Rat64 parse(const std::string& text); // "p/q" or integer or decimal
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    Rat64 operator+(const Rat64& o) const;
    Rat64 operator-(const Rat64& o) const;
    Rat64 operator*(const Rat64& o) const;
    bool operator==(const Rat64& o) const { return num == o.num && den == o.den; }
    /// Representative in [0,1).
    Rat64 mod1() const;
    std::string str() const;
};

/// Solves A x = b exactly over the rationals for integer A, b.
/// Returns nullopt if A is singular.
std::optional<std::vector<Rat64>> solve_exact(const IMatrix& a, const IVector& b);

} // namespace latopt

#endif
