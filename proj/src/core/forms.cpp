/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/forms.hpp"

#include <cmath>

namespace latopt {

namespace {

constexpr double kDisjointTol = 1e-9; // u_i - u_j must stay this far from Z^d

} // namespace

QuadForm::QuadForm(Matrix gram, std::optional<ExactGram> exact)
    : gram_(std::move(gram)), exact_(std::move(exact))
{
    const Eigen::Index d = gram_.rows();
    if (d == 0 || gram_.cols() != d) {
        fail(errc::structural, "Gram matrix must be square and non-empty");
    }
    if (!gram_.isApprox(gram_.transpose(), 0.0)) {
        // Symmetry is required exactly; reject rather than symmetrise.
        if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 0.0) {
            fail(errc::invalid_form, "Gram matrix is not symmetric");
        }
    }
    Eigen::LLT<Matrix> llt(gram_);
    if (llt.info() != Eigen::Success) {
        fail(errc::invalid_form, "Gram matrix is not positive definite");
    }
    chol_ = llt.matrixU();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        logdet += 2.0 * std::log(chol_(i, i));
    }
    det_ = std::exp(logdet);
    inv_ = llt.solve(Matrix::Identity(d, d));
    if (exact_) {
        if (exact_->num.rows() != d || exact_->num.cols() != d || exact_->den <= 0) {
            fail(errc::structural, "exact Gram data does not match the matrix");
        }
    }
}

QuadForm QuadForm::from_integer(const IMatrix& gram, std::int64_t den)
{
    Matrix g = gram.cast<double>() / static_cast<double>(den);
    return QuadForm(std::move(g), ExactGram{gram, den});
}

double QuadForm::norm_sq(const IVector& x) const
{
    if (exact_) {
        __int128 acc = 0;
        const auto& n = exact_->num;
        for (Eigen::Index i = 0; i < n.rows(); ++i) {
            __int128 row = 0;
            for (Eigen::Index j = 0; j < n.cols(); ++j) {
                row += static_cast<__int128>(n(i, j)) * x(j);
            }
            acc += row * x(i);
        }
        return static_cast<double>(acc) / static_cast<double>(exact_->den);
    }
    Vector xf = x.cast<double>();
    return xf.dot(gram_ * xf);
}

LatticeBasis::LatticeBasis(Matrix a) : basis(std::move(a))
{
    if (basis.rows() != basis.cols() || basis.rows() == 0) {
        fail(errc::structural, "lattice basis must be square");
    }
    if (std::abs(basis.determinant()) < 1e-12) {
        fail(errc::invalid_form, "lattice basis is singular");
    }
    gram = basis.transpose() * basis;
}

Vector reduce_mod1(const Vector& v)
{
    Vector r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double f = v(i) - std::floor(v(i));
        if (f >= 1.0) {
            f -= 1.0; // floor rounding at the upper edge
        }
        // Snap values within one ulp-scale of 1 back to 0.
        if (1.0 - f < 1e-13) {
            f = 0.0;
        }
        r(i) = f;
    }
    return r;
}

double dist_to_integers(const Vector& v)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double f = std::abs(v(i) - std::round(v(i)));
        worst = std::max(worst, f);
    }
    return worst;
}

PeriodicForm::PeriodicForm(QuadForm q, std::vector<Vector> translations) : q_(std::move(q))
{
    if (translations.empty()) {
        fail(errc::structural, "periodic form needs at least one translation");
    }
    const int d = q_.dim();
    for (const auto& u : translations) {
        if (u.size() != d) {
            fail(errc::structural, "translation dimension mismatch");
        }
    }
    // Representative normalisation: shift so u_1 = 0, then reduce into [0,1)^d.
    Vector base = translations.front();
    u_.reserve(translations.size());
    for (const auto& u : translations) {
        u_.push_back(reduce_mod1(u - base));
    }
    u_.front().setZero();
    for (size_t i = 0; i < u_.size(); ++i) {
        for (size_t j = i + 1; j < u_.size(); ++j) {
            if (dist_to_integers(u_[i] - u_[j]) < kDisjointTol) {
                fail(errc::invalid_form, "translations coincide modulo Z^d");
            }
        }
    }
}

PeriodicForm PeriodicForm::lattice(QuadForm q)
{
    int d = q.dim();
    return PeriodicForm(std::move(q), {Vector::Zero(d)});
}

TangentVec TangentVec::zero(int dim, int m)
{
    TangentVec v;
    v.h = Matrix::Zero(dim, dim);
    v.t.assign(m, Vector::Zero(dim));
    return v;
}

TangentVec TangentVec::canonical(Matrix h, std::vector<Vector> t)
{
    TangentVec v;
    v.h = 0.5 * (h + h.transpose());
    if (t.empty()) {
        fail(errc::structural, "tangent vector needs at least one translation slot");
    }
    Vector base = t.front();
    v.t.reserve(t.size());
    for (const auto& ti : t) {
        v.t.push_back(ti - base);
    }
    v.t.front().setZero();
    return v;
}

void validate_tangent(const TangentVec& v, const QuadForm& at, double tol)
{
    const int d = at.dim();
    if (v.h.rows() != d || v.h.cols() != d) {
        fail(errc::structural, "tangent h-block dimension mismatch");
    }
    if ((v.h - v.h.transpose()).cwiseAbs().maxCoeff() > tol) {
        fail(errc::structural, "tangent h-block is not symmetric");
    }
    if (std::abs((at.inverse() * v.h).trace()) > tol * std::max(1.0, v.h.cwiseAbs().maxCoeff())) {
        fail(errc::structural, "tangent h-block violates the trace constraint");
    }
    if (v.t.empty() || v.t.front().cwiseAbs().maxCoeff() != 0.0) {
        fail(errc::structural, "tangent t-block must pin t_1 = 0");
    }
    for (const auto& ti : v.t) {
        if (ti.size() != d) {
            fail(errc::structural, "tangent t-block dimension mismatch");
        }
    }
}

double inner_product(const TangentVec& a, const TangentVec& b, const QuadForm& at)
{
    if (a.h.rows() != at.dim() || b.h.rows() != at.dim() || a.t.size() != b.t.size()) {
        fail(errc::structural, "tangent vectors live at different base points");
    }
    const Matrix& qi = at.inverse();
    double val = (qi * a.h * qi * b.h).trace();
    for (size_t i = 0; i < a.t.size(); ++i) {
        val += a.t[i].dot(b.t[i]);
    }
    return val;
}

double tangent_norm(const TangentVec& a, const QuadForm& at)
{
    return std::sqrt(std::max(0.0, inner_product(a, a, at)));
}

PeriodicForm retract(const PeriodicForm& base, const TangentVec& dir, double scale)
{
    if (scale == 0.0) {
        return base;
    }
    const QuadForm& q0 = base.q();
    const int d = q0.dim();
    if (static_cast<int>(dir.t.size()) != base.m()) {
        fail(errc::structural, "tangent t-block count does not match m");
    }
    // Q0 exp(Q0^-1 sK) = A^T exp(s A^-T K A^-1) A with A the Cholesky factor;
    // the exponent is symmetric, so a self-adjoint eigensolve applies.
    const Matrix& a = q0.chol_factor();
    Matrix a_inv = a.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
    Matrix h_sym = a_inv.transpose() * (scale * dir.h) * a_inv;
    h_sym = 0.5 * (h_sym + h_sym.transpose());
    Matrix q_new = a.transpose() * sym_expm(h_sym) * a;
    q_new = 0.5 * (q_new + q_new.transpose());
    // Multiplicative determinant drift correction.
    double ratio = q_new.determinant() / q0.det();
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        fail(errc::perturbation_too_large, "retraction left the positive definite cone");
    }
    q_new *= std::pow(ratio, -1.0 / static_cast<double>(d));

    std::vector<Vector> u_new;
    u_new.reserve(base.m());
    for (int i = 0; i < base.m(); ++i) {
        u_new.push_back(base.translations()[i] + scale * dir.t[i]);
    }
    try {
        return PeriodicForm(QuadForm(std::move(q_new)), std::move(u_new));
    } catch (const Error& e) {
        if (e.code() == errc::invalid_form) {
            fail(errc::perturbation_too_large, "retracted translations collide modulo Z^d");
        }
        throw;
    }
}

double point_density(const PeriodicForm& p)
{
    return static_cast<double>(p.m()) / std::sqrt(p.q().det());
}

PeriodicForm apply_unimodular(const PeriodicForm& p, const IMatrix& u)
{
    const int d = p.dim();
    if (u.rows() != d || u.cols() != d) {
        fail(errc::structural, "unimodular transform dimension mismatch");
    }
    std::int64_t det = exact_det(u);
    if (det != 1 && det != -1) {
        fail(errc::invalid_transform, "transform matrix is not unimodular");
    }
    IMatrix u_inv = exact_adjugate(u);
    if (det == -1) {
        u_inv = -u_inv;
    }
    Matrix uf = u.cast<double>();
    Matrix g_new = uf.transpose() * p.q().gram() * uf;
    g_new = 0.5 * (g_new + g_new.transpose());
    std::optional<ExactGram> exact;
    if (p.q().is_exact()) {
        exact = ExactGram{u.transpose() * p.q().exact()->num * u, p.q().exact()->den};
    }
    Matrix ui = u_inv.cast<double>();
    std::vector<Vector> u_new;
    u_new.reserve(p.m());
    for (const auto& t : p.translations()) {
        u_new.push_back(ui * t);
    }
    return PeriodicForm(QuadForm(std::move(g_new), std::move(exact)), std::move(u_new));
}

} // namespace latopt
