/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_FORMS_HPP
#define LATOPT_CORE_FORMS_HPP

#include <optional>
#include <vector>

#include "core/linalg.hpp"

namespace latopt {

/// Integer Gram data over a common denominator; enables exact shell
/// grouping and exact design identities.
struct ExactGram {
    IMatrix num;
    std::int64_t den{1};
};

/// Positive definite Gram matrix with cached factorisation data.
/// Immutable after construction.
class QuadForm {
  public:
    explicit QuadForm(Matrix gram, std::optional<ExactGram> exact = std::nullopt);
    static QuadForm from_integer(const IMatrix& gram, std::int64_t den = 1);

    int dim() const { return static_cast<int>(gram_.rows()); }
    const Matrix& gram() const { return gram_; }
    double det() const { return det_; }
    const Matrix& inverse() const { return inv_; }
    /// Upper-triangular A with A^T A = gram; rows of A are the Euclidean
    /// images of the basis only up to O(d), which is all we ever need.
    const Matrix& chol_factor() const { return chol_; }
    const std::optional<ExactGram>& exact() const { return exact_; }
    bool is_exact() const { return exact_.has_value(); }

    /// gram[x] = x^T gram x for an integer vector.
    double norm_sq(const IVector& x) const;

  private:
    Matrix gram_;
    Matrix inv_;
    Matrix chol_;
    double det_{0.0};
    std::optional<ExactGram> exact_;
};

/// Full-rank basis (columns) together with its derived Gram matrix.
struct LatticeBasis {
    Matrix basis;
    Matrix gram;

    explicit LatticeBasis(Matrix a);
    int dim() const { return static_cast<int>(basis.rows()); }
};

/// Periodic form (Q, u_1..u_m) with u_1 = 0 and all coordinates in [0,1).
class PeriodicForm {
  public:
    PeriodicForm(QuadForm q, std::vector<Vector> translations);
    static PeriodicForm lattice(QuadForm q); // m = 1

    const QuadForm& q() const { return q_; }
    int dim() const { return q_.dim(); }
    int m() const { return static_cast<int>(u_.size()); }
    const std::vector<Vector>& translations() const { return u_; }

  private:
    QuadForm q_;
    std::vector<Vector> u_;
};

/// Tangent direction at a periodic form: trace-constrained symmetric block
/// plus translation block with t_1 pinned to zero.
struct TangentVec {
    Matrix h;
    std::vector<Vector> t;

    static TangentVec zero(int dim, int m);
    /// Pins t_1 = 0 by a common shift and symmetrises h.
    static TangentVec canonical(Matrix h, std::vector<Vector> t);
};

/// Checks the tangent invariants at a base form (throws errc::structural).
void validate_tangent(const TangentVec& v, const QuadForm& at, double tol = 1e-12);

/// Invariant scalar product Tr(Q^-1 h Q^-1 h') + sum_i t_i . t_i'.
double inner_product(const TangentVec& a, const TangentVec& b, const QuadForm& at);

double tangent_norm(const TangentVec& a, const QuadForm& at);

/// Manifold step (Q exp(Q^-1 s h), u + s t), renormalised to constant
/// determinant and reduced translations.
PeriodicForm retract(const PeriodicForm& base, const TangentVec& dir, double scale);

double point_density(const PeriodicForm& p);

/// Basis change by a unimodular integer matrix; same periodic set up to isometry.
PeriodicForm apply_unimodular(const PeriodicForm& p, const IMatrix& u);

/// Reduces a coordinate vector into [0,1)^d.
Vector reduce_mod1(const Vector& v);

/// Distance from v to the nearest integer vector (max norm).
double dist_to_integers(const Vector& v);

} // namespace latopt

#endif
