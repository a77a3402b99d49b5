/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_CALCULUS_HPP
#define LATOPT_CORE_CALCULUS_HPP

#include <string>

#include "core/cosets.hpp"
#include "core/energy.hpp"

namespace latopt {

/// Fixed ordered tangent basis in the Euclidean frame: normalised traceless
/// diagonal differences, normalised symmetric off-diagonal pairs, then
/// coordinate translation directions for cosets 2..m.
struct TangentBasis {
    int d{0};
    int m{1};
    std::vector<Matrix> h_mats;

    int h_count() const { return static_cast<int>(h_mats.size()); }
    int t_count() const { return (m - 1) * d; }
    int size() const { return h_count() + t_count(); }
    std::string description() const;
};

TangentBasis make_tangent_basis(int d, int m);

/// Converts a Euclidean-frame direction (H, tau) to manifold coordinates
/// (K, u') at the base form: K = A^T H A, u'_i = A^{-1} tau_i.
TangentVec euclid_to_tangent(const PeriodicForm& base, const Matrix& h_eucl,
                             const std::vector<Vector>& t_eucl);

TangentVec basis_direction(const PeriodicForm& base, const TangentBasis& basis, int index);

TangentVec basis_combination(const PeriodicForm& base, const TangentBasis& basis,
                             const Vector& coeffs);

/// First derivative of the energy in the Euclidean frame: the pairing is
/// dE = Tr(h . H) + sum_i t_i . tau_i.
struct GradientBlocks {
    Matrix h;               // traceless-projected covector
    std::vector<Vector> t;  // one Euclidean covector per coset
    double cutoff_norm_sq{0.0};
    double tail_bound{0.0};

    /// Riemannian norm of the gradient under the invariant scalar product.
    double norm(const QuadForm& q) const;
    /// Pairing with every basis direction.
    Vector components(const TangentBasis& basis) const;
    /// Steepest-descent direction in manifold coordinates.
    TangentVec descent_direction(const PeriodicForm& base) const;
};

/// Gradient of the energy for a general periodic form by term-wise
/// differentiation of the coset sums.
GradientBlocks gradient_general(const PeriodicForm& p, const Potential& pot, double cutoff_norm_sq);

/// Lattice (m = 1) closed form: sum of f'(|w|^2) w w^T, traceless-projected.
GradientBlocks gradient_at_lattice(const QuadForm& q, const Potential& pot, double cutoff_norm_sq);

/// Dense Hessian over the fixed tangent basis, assembled from the lattice
/// closed forms; the H-t cross block vanishes identically and is stored as
/// exact zeros.
struct DenseHessian {
    TangentBasis basis;
    Matrix mat;
    Matrix metric; // Gram matrix of the basis under the invariant product
    double cutoff_norm_sq{0.0};
    /// Rigorous operator-norm bound on the truncation error of the form.
    double tail_bound{0.0};

    /// Extremes of the generalized spectrum (form vs. invariant metric).
    double min_eigenvalue() const;
    double max_eigenvalue() const;
    double cross_block_max() const;
};

DenseHessian hessian_at_lattice(const PeriodicForm& p, const Potential& pot, double cutoff_norm_sq);

/// F/G shell-sum split of the Gaussian-potential Hessian at a lattice whose
/// shells are 4-designs: hess = y [ Tr(H^2)/(d(d+2)) G(y)
///   + (2 pi/(d m^2)) (sum_{i,k} |t_i - t_sigma_k(i)|^2) F(y) ].
struct SplitResult {
    double y{0.0};
    double f_value{0.0};
    double g_value{0.0};
    double f_tail{0.0};
    double g_tail{0.0};
    double lattice_coefficient{0.0};     // y G(y)
    double translation_coefficient{0.0}; // y 2 pi F(y) / (d m^2)
    double cutoff_used{0.0};
    double design_verified_up_to{0.0};
    int m{1};
    std::vector<std::pair<double, std::int64_t>> shell_data;
};

/// Evaluates F and G by extended-precision shell sums with rigorous tail
/// bounds, growing the cutoff until the requested relative resolution (or
/// the cutoff budget) is reached. Throws DesignHypothesisFailed when a shell
/// below the design bound is not a 4-design.
SplitResult hessian_split_design(const QuadForm& q, double y, double cutoff_budget, int m,
                                 ShellCountCache* cache = nullptr, double design_bound = 0.0,
                                 double rel_target = 1e-4);

/// Central finite differences of the truncated energy through the
/// retraction; the independent oracle for the closed forms above.
struct FdOptions {
    double step{0.0};        // <= 0: 1e-5 * sqrt(min_norm)
    double cutoff{0.0};      // <= 0: automatic, snapped into a shell gap
    bool richardson{false};  // second-order h, h/2 extrapolation
};

Vector fd_gradient(const PeriodicForm& p, const Potential& pot, const TangentBasis& basis,
                   const FdOptions& opt = {});

Matrix fd_hessian(const PeriodicForm& p, const Potential& pot, const TangentBasis& basis,
                  const FdOptions& opt = {});

/// Shared automatic cutoff choice for derivative sums.
double derivative_cutoff(const PeriodicForm& p, const Potential& pot);

} // namespace latopt

#endif
