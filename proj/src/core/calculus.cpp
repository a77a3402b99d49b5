/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/calculus.hpp"

#include <cmath>
#include <sstream>

#include "core/designs.hpp"
#include "core/tails.hpp"

#if defined(__SIZEOF_FLOAT128__)
#include <quadmath.h>
namespace latopt::detail {
using qreal = __float128;
inline qreal qexp(qreal x)
{
    return expq(x);
}
} // namespace latopt::detail
#else
namespace latopt::detail {
using qreal = long double;
inline qreal qexp(qreal x)
{
    return expl(x);
}
} // namespace latopt::detail
#endif

namespace latopt {

namespace {

// pi to extended precision: double value plus its residual.
const detail::qreal kQPi =
    static_cast<detail::qreal>(3.141592653589793115997963468544185161590576171875) +
    static_cast<detail::qreal>(1.2246467991473531772260659322749979970830839e-16);

Matrix chol_inverse(const QuadForm& q)
{
    const int d = q.dim();
    return q.chol_factor().triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
}

/// Hessian weight functions in the squared-norm variable r (see the packed
/// moment assembly below): the quadratic form at a lattice is
///   Q(H, t) = sum_w [ u1 H[w]^2 + u2 H^2[w]
///                     + (1/m^2) sum_{i,k} ( v1 (w.tau)^2 + v0 |tau|^2 ) ].
struct HessWeights {
    double u1, u2, v1, v0;
};

HessWeights hess_weights(const Potential& pot, double r)
{
    if (pot.kind() == Potential::Kind::exponential) {
        double c = pot.param();
        double e = std::exp(-c * r);
        return {0.5 * c * c * e, -0.5 * c * e, 2.0 * c * c * e, -c * e};
    }
    double s = pot.param();
    double rp = std::pow(r, -s - 2.0);
    return {0.5 * s * (s + 1.0) * rp, -0.5 * s * rp * r, 2.0 * s * (s + 1.0) * rp, -s * rp * r};
}

/// Tail bound of sum |u1| r^2 + |u2| r (H block) and 4 (|v1| r + |v0|)
/// (t block) past the cutoff, per coset.
double hessian_tail(const Potential& pot, int d, double rho, double cutoff)
{
    if (pot.kind() == Potential::Kind::exponential) {
        double c = pot.param();
        double t2 = separated_tail_exponential(d, rho, cutoff, c, 2);
        double t1 = separated_tail_exponential(d, rho, cutoff, c, 1);
        double t0 = separated_tail_exponential(d, rho, cutoff, c, 0);
        return 0.5 * c * c * t2 + 0.5 * c * t1 + 4.0 * (2.0 * c * c * t1 + c * t0);
    }
    double s = pot.param();
    double ts = separated_tail_power(d, rho, cutoff, s);       // r^{-s}
    double ts1 = separated_tail_power(d, rho, cutoff, s + 1.0); // r^{-s-1}
    return 0.5 * s * (s + 1.0) * ts + 0.5 * s * ts + 4.0 * (2.0 * s * (s + 1.0) * ts1 + s * ts1);
}

double gradient_tail(const Potential& pot, int d, double rho, double cutoff)
{
    // |f'(r)| r for the H block plus 2 |f'(r)| sqrt(r) for the t block,
    // bounded by (1 + 2/sqrt(alpha0)) |f'| r style terms.
    if (pot.kind() == Potential::Kind::exponential) {
        double c = pot.param();
        double t1 = separated_tail_exponential(d, rho, cutoff, c, 1);
        return 3.0 * c * t1;
    }
    double s = pot.param();
    double ts = separated_tail_power(d, rho, cutoff, s);
    return 3.0 * s * ts;
}

int packed_index(int p, int q, int d)
{
    // p <= q, row-major upper triangle
    return p * d - p * (p - 1) / 2 + (q - p);
}

/// Packed representation of a symmetric matrix S so that
/// S[w] = sum_a ps[a] * sv[a] with sv[a] = w_p w_q.
Vector pack_sym(const Matrix& s)
{
    const int d = static_cast<int>(s.rows());
    Vector ps(d * (d + 1) / 2);
    for (int p = 0; p < d; ++p) {
        for (int q = p; q < d; ++q) {
            ps(packed_index(p, q, d)) = (p == q) ? s(p, p) : 2.0 * s(p, q);
        }
    }
    return ps;
}

} // namespace

std::string TangentBasis::description() const
{
    std::ostringstream os;
    os << "Euclidean frame; H: (E_kk - E_{k+1,k+1})/sqrt2 for k=1.." << (d - 1)
       << ", then (E_pq + E_qp)/sqrt2 for p<q row-major; t: coordinate directions e_r "
       << "for cosets 2.." << m;
    return os.str();
}

TangentBasis make_tangent_basis(int d, int m)
{
    TangentBasis b;
    b.d = d;
    b.m = m;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k + 1 < d; ++k) {
        Matrix h = Matrix::Zero(d, d);
        h(k, k) = inv_sqrt2;
        h(k + 1, k + 1) = -inv_sqrt2;
        b.h_mats.push_back(std::move(h));
    }
    for (int p = 0; p < d; ++p) {
        for (int q = p + 1; q < d; ++q) {
            Matrix h = Matrix::Zero(d, d);
            h(p, q) = inv_sqrt2;
            h(q, p) = inv_sqrt2;
            b.h_mats.push_back(std::move(h));
        }
    }
    return b;
}

TangentVec euclid_to_tangent(const PeriodicForm& base, const Matrix& h_eucl,
                             const std::vector<Vector>& t_eucl)
{
    const QuadForm& q = base.q();
    const Matrix& a = q.chol_factor();
    Matrix a_inv = chol_inverse(q);
    TangentVec v;
    v.h = a.transpose() * h_eucl * a;
    v.h = 0.5 * (v.h + v.h.transpose());
    v.t.reserve(t_eucl.size());
    for (const auto& tau : t_eucl) {
        v.t.push_back(a_inv * tau);
    }
    if (!v.t.empty()) {
        Vector shift = v.t.front();
        for (auto& u : v.t) {
            u -= shift;
        }
        v.t.front().setZero();
    }
    return v;
}

TangentVec basis_direction(const PeriodicForm& base, const TangentBasis& basis, int index)
{
    const int d = basis.d;
    Matrix h = Matrix::Zero(d, d);
    std::vector<Vector> t(static_cast<size_t>(basis.m), Vector::Zero(d));
    if (index < basis.h_count()) {
        h = basis.h_mats[static_cast<size_t>(index)];
    } else {
        int k = index - basis.h_count();
        int coset = 1 + k / d;
        int coord = k % d;
        t[static_cast<size_t>(coset)](coord) = 1.0;
    }
    return euclid_to_tangent(base, h, t);
}

TangentVec basis_combination(const PeriodicForm& base, const TangentBasis& basis,
                             const Vector& coeffs)
{
    const int d = basis.d;
    Matrix h = Matrix::Zero(d, d);
    std::vector<Vector> t(static_cast<size_t>(basis.m), Vector::Zero(d));
    for (int k = 0; k < basis.h_count(); ++k) {
        h += coeffs(k) * basis.h_mats[static_cast<size_t>(k)];
    }
    for (int k = 0; k < basis.t_count(); ++k) {
        int coset = 1 + k / d;
        int coord = k % d;
        t[static_cast<size_t>(coset)](coord) += coeffs(basis.h_count() + k);
    }
    return euclid_to_tangent(base, h, t);
}

double GradientBlocks::norm(const QuadForm& q) const
{
    const Matrix& a = q.chol_factor();
    double acc = (h * h).trace();
    for (const auto& g : t) {
        acc += (a.transpose() * g).squaredNorm();
    }
    return std::sqrt(std::max(0.0, acc));
}

Vector GradientBlocks::components(const TangentBasis& basis) const
{
    Vector c(basis.size());
    for (int k = 0; k < basis.h_count(); ++k) {
        c(k) = (h * basis.h_mats[static_cast<size_t>(k)]).trace();
    }
    for (int k = 0; k < basis.t_count(); ++k) {
        int coset = 1 + k / basis.d;
        int coord = k % basis.d;
        c(basis.h_count() + k) =
            (coset < static_cast<int>(t.size())) ? t[static_cast<size_t>(coset)](coord) : 0.0;
    }
    return c;
}

TangentVec GradientBlocks::descent_direction(const PeriodicForm& base) const
{
    const QuadForm& q = base.q();
    const Matrix& a = q.chol_factor();
    // Riemannian steepest descent under the invariant product: H-part -h,
    // translation part u' = -A^T g in manifold coordinates.
    Matrix k = a.transpose() * (-h) * a;
    k = 0.5 * (k + k.transpose());
    TangentVec v;
    v.h = std::move(k);
    v.t.reserve(t.size());
    for (const auto& g : t) {
        v.t.push_back(-(a.transpose() * g));
    }
    if (!v.t.empty()) {
        Vector shift = v.t.front();
        for (auto& u : v.t) {
            u -= shift;
        }
        v.t.front().setZero();
    }
    return v;
}

namespace {

struct GradAccum {
    Matrix h;
    Kahan trace_comp; // unused slot keeps the struct copyable cheaply
};

/// Accumulates sum f'(r) w w^T over one coset (w = A(x + delta)).
void accumulate_pair_gradient(const QuadForm& q, const Vector& delta_reduced, const Potential& pot,
                              double cutoff, Matrix& h_acc, Vector& t_acc, bool lattice_pair)
{
    const int d = q.dim();
    const Matrix& a = q.chol_factor();
    Matrix h_local = Matrix::Zero(d, d);
    Vector t_local = Vector::Zero(d);
    Vector w(d);
    auto body = [&](const std::int64_t* x, double, double wgt) {
        for (int k = 0; k < d; ++k) {
            double yk = static_cast<double>(x[k]) + (lattice_pair ? 0.0 : delta_reduced(k));
            w(k) = yk;
        }
        Vector we = a * w;
        double r = we.squaredNorm();
        double fp = pot.deriv(r);
        h_local.noalias() += (wgt * fp) * (we * we.transpose());
        if (!lattice_pair && wgt == 1.0) {
            t_local.noalias() += fp * we;
        }
    };
    if (lattice_pair) {
        for_each_lattice_vector(q, cutoff, body);
    } else {
        for_each_coset_vector(q, delta_reduced, cutoff, body);
    }
    h_acc += h_local;
    t_acc += t_local;
}

} // namespace

GradientBlocks gradient_general(const PeriodicForm& p, const Potential& pot, double cutoff_norm_sq)
{
    const QuadForm& q = p.q();
    const int d = q.dim();
    const int m = p.m();
    if (pot.kind() == Potential::Kind::inverse_power && pot.param() <= 0.5 * d) {
        fail(errc::divergent_sum, "inverse power sum diverges for s <= d/2");
    }
    GradientBlocks out;
    out.cutoff_norm_sq = cutoff_norm_sq;
    out.h = Matrix::Zero(d, d);
    out.t.assign(static_cast<size_t>(m), Vector::Zero(d));

    Matrix h_acc = Matrix::Zero(d, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            Vector delta = p.translations()[i] - p.translations()[j];
            for (int k = 0; k < d; ++k) {
                delta(k) -= std::round(delta(k));
            }
            bool lattice_pair = (i == j) || dist_to_integers(delta) < 1e-12;
            Vector t_pair = Vector::Zero(d);
            accumulate_pair_gradient(q, delta, pot, cutoff_norm_sq, h_acc, t_pair, lattice_pair);
            // dE/dtau_i collects +4/m of the (i,j) coset sums; lattice pairs
            // contribute zero by antipodal symmetry.
            if (!lattice_pair) {
                out.t[static_cast<size_t>(i)] += (4.0 / m) * t_pair;
            }
        }
    }
    out.h = h_acc / static_cast<double>(m);
    // Traceless projection in the Euclidean frame.
    out.h -= (out.h.trace() / d) * Matrix::Identity(d, d);

    double rho = 0.5 * std::sqrt(min_norm(q));
    out.tail_bound = m * gradient_tail(pot, d, rho, cutoff_norm_sq);
    return out;
}

GradientBlocks gradient_at_lattice(const QuadForm& q, const Potential& pot, double cutoff_norm_sq)
{
    return gradient_general(PeriodicForm::lattice(q), pot, cutoff_norm_sq);
}

double DenseHessian::min_eigenvalue() const
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(mat, metric);
    return es.eigenvalues().minCoeff();
}

double DenseHessian::max_eigenvalue() const
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(mat, metric);
    return es.eigenvalues().maxCoeff();
}

double DenseHessian::cross_block_max() const
{
    int nh = basis.h_count();
    int nt = basis.t_count();
    if (nt == 0) {
        return 0.0;
    }
    return mat.block(0, nh, nh, nt).cwiseAbs().maxCoeff();
}

DenseHessian hessian_at_lattice(const PeriodicForm& p, const Potential& pot, double cutoff_norm_sq)
{
    const QuadForm& q = p.q();
    const int d = q.dim();
    const int m = p.m();
    if (pot.kind() == Potential::Kind::inverse_power && pot.param() <= 0.5 * d) {
        fail(errc::divergent_sum, "inverse power sum diverges for s <= d/2");
    }
    LatticeDetection det = detect_lattice(p);
    if (!det.is_lattice()) {
        fail(errc::not_a_lattice, "hessian_at_lattice needs a lattice coset structure");
    }
    const auto& sigma = det.table->sigma;

    DenseHessian out;
    out.basis = make_tangent_basis(d, m);
    out.cutoff_norm_sq = cutoff_norm_sq;
    const int nh = out.basis.h_count();
    const int nt = out.basis.t_count();
    const int n = nh + nt;
    const int dsym = d * (d + 1) / 2;

    // Weighted moment accumulators over lattice vectors w (Euclidean):
    //   pk4[a][b] = sum u1 sv_a sv_b   with sv = packed w w^T,
    //   w2_u2     = sum u2 w w^T,
    //   w2_v1     = sum v1 w w^T,
    //   w0_v0     = sum v0.
    struct MomentVisitor {
        const QuadForm* q;
        const Potential* pot;
        int d, dsym;
        Matrix pk4;
        Matrix w2_u2;
        Matrix w2_v1;
        double w0_v0{0.0};
        Vector sv;
        Vector w;

        void operator()(const std::int64_t* x, double, double wgt)
        {
            const Matrix& a = q->chol_factor();
            for (int k = 0; k < d; ++k) {
                w(k) = static_cast<double>(x[k]);
            }
            Vector we = a * w;
            double r = we.squaredNorm();
            HessWeights hw = hess_weights(*pot, r);
            int idx = 0;
            for (int pp = 0; pp < d; ++pp) {
                for (int qq = pp; qq < d; ++qq) {
                    sv(idx++) = we(pp) * we(qq);
                }
            }
            // Even-degree moments: an antipodal pair contributes twice one
            // representative, which is exactly the weight.
            pk4.selfadjointView<Eigen::Lower>().rankUpdate(sv, wgt * hw.u1);
            w2_u2.selfadjointView<Eigen::Lower>().rankUpdate(we, wgt * hw.u2);
            w2_v1.selfadjointView<Eigen::Lower>().rankUpdate(we, wgt * hw.v1);
            w0_v0 += wgt * hw.v0;
        }
    };

    detail::EnumData e(q);
    Matrix pk4 = Matrix::Zero(dsym, dsym);
    Matrix w2_u2 = Matrix::Zero(d, d);
    Matrix w2_v1 = Matrix::Zero(d, d);
    double w0_v0 = 0.0;
    detail::parallel_branches(
        e, nullptr, cutoff_norm_sq, true,
        [&] {
            return MomentVisitor{&q,
                                 &pot,
                                 d,
                                 dsym,
                                 Matrix::Zero(dsym, dsym),
                                 Matrix::Zero(d, d),
                                 Matrix::Zero(d, d),
                                 0.0,
                                 Vector::Zero(dsym),
                                 Vector::Zero(d)};
        },
        [&](MomentVisitor& v) {
            pk4 += v.pk4;
            w2_u2 += v.w2_u2;
            w2_v1 += v.w2_v1;
            w0_v0 += v.w0_v0;
        });
    pk4 = pk4.selfadjointView<Eigen::Lower>();
    w2_u2 = w2_u2.selfadjointView<Eigen::Lower>();
    w2_v1 = w2_v1.selfadjointView<Eigen::Lower>();

    out.mat = Matrix::Zero(n, n);
    // H block via the packed fourth moment plus the second-moment term.
    Matrix packed(nh, dsym);
    for (int a = 0; a < nh; ++a) {
        packed.row(a) = pack_sym(out.basis.h_mats[static_cast<size_t>(a)]).transpose();
    }
    Matrix hblock = packed * pk4 * packed.transpose();
    for (int a = 0; a < nh; ++a) {
        const Matrix& sa = out.basis.h_mats[static_cast<size_t>(a)];
        Matrix sa_w = sa * w2_u2;
        for (int b = a; b < nh; ++b) {
            const Matrix& sb = out.basis.h_mats[static_cast<size_t>(b)];
            double second = 0.5 * ((sa_w * sb).trace() + (sb * w2_u2 * sa).trace());
            hblock(a, b) += second;
            if (a != b) {
                hblock(b, a) = hblock(a, b);
            }
        }
    }
    out.mat.topLeftCorner(nh, nh) = hblock;

    // t block: (1/m^2) sum over k, i of the pair couplings induced by
    // tau = t_i - t_sigma_k(i).
    if (nt > 0) {
        Matrix tb = Matrix::Zero(nt, nt);
        for (int k = 0; k < m; ++k) {
            for (int i = 0; i < m; ++i) {
                int si = sigma[static_cast<size_t>(k)][static_cast<size_t>(i)];
                // tau(t) depends linearly on the basis: coefficient of coset c
                // is delta_{i,c} - delta_{si,c}.
                for (int c1 = 1; c1 < m; ++c1) {
                    double coef1 = (i == c1 ? 1.0 : 0.0) - (si == c1 ? 1.0 : 0.0);
                    if (coef1 == 0.0) {
                        continue;
                    }
                    for (int c2 = 1; c2 < m; ++c2) {
                        double coef2 = (i == c2 ? 1.0 : 0.0) - (si == c2 ? 1.0 : 0.0);
                        if (coef2 == 0.0) {
                            continue;
                        }
                        for (int r = 0; r < d; ++r) {
                            for (int s2 = 0; s2 < d; ++s2) {
                                double val = w2_v1(r, s2) + (r == s2 ? w0_v0 : 0.0);
                                tb((c1 - 1) * d + r, (c2 - 1) * d + s2) += coef1 * coef2 * val;
                            }
                        }
                    }
                }
            }
        }
        out.mat.bottomRightCorner(nt, nt) = tb / static_cast<double>(m * m);
    }

    // Invariant-metric Gram of the basis: Tr(S_a S_b) for the H part and
    // Q^{-1} blocks for the Euclidean translation directions.
    out.metric = Matrix::Zero(n, n);
    for (int a = 0; a < nh; ++a) {
        for (int b = a; b < nh; ++b) {
            double v = (out.basis.h_mats[static_cast<size_t>(a)] *
                        out.basis.h_mats[static_cast<size_t>(b)])
                           .trace();
            out.metric(a, b) = v;
            out.metric(b, a) = v;
        }
    }
    for (int c = 1; c < m; ++c) {
        out.metric.block(nh + (c - 1) * d, nh + (c - 1) * d, d, d) = q.inverse();
    }

    double rho = 0.5 * std::sqrt(min_norm(q));
    out.tail_bound = hessian_tail(pot, d, rho, cutoff_norm_sq);
    return out;
}

SplitResult hessian_split_design(const QuadForm& q, double y, double cutoff_budget, int m,
                                 ShellCountCache* cache, double design_bound, double rel_target)
{
    if (!(y > 0.0)) {
        fail(errc::domain_error, "split functions need y > 0");
    }
    if (m < 1) {
        fail(errc::domain_error, "split functions need m >= 1");
    }
    const int d = q.dim();
    double alpha0 = min_norm(q);
    double rho = 0.5 * std::sqrt(alpha0);

    SplitResult out;
    out.y = y;
    out.m = m;

    // Design hypothesis: every shell below the bound must be a 4-design.
    double dbound = design_bound > 0.0 ? design_bound : 4.0 * alpha0;
    AllShellsReport designs = all_shells_design(q, 4, dbound);
    if (!designs.all_design) {
        fail(errc::design_hypothesis_failed,
             "a shell below the design bound is not a 4-design; the split formula does not apply");
    }
    out.design_verified_up_to = dbound;

    ShellCountCache local(q);
    ShellCountCache& counts = cache != nullptr ? *cache : local;

    const detail::qreal qy = static_cast<detail::qreal>(y);
    const detail::qreal half_d = static_cast<detail::qreal>(0.5 * d);
    const detail::qreal half_d1 = half_d + 1;

    double cutoff = std::max({6.0 * alpha0, (d + 10.0) / (pi * y), 1.0});
    cutoff = std::min(cutoff, cutoff_budget);
    for (;;) {
        const ShellCounts& sc = counts.up_to(cutoff);
        detail::qreal f_acc = 0;
        detail::qreal g_acc = 0;
        for (const auto& [alpha, count] : sc.counts) {
            if (alpha > cutoff) {
                break;
            }
            detail::qreal qa = static_cast<detail::qreal>(alpha);
            detail::qreal x = kQPi * qy * qa;
            detail::qreal ex = detail::qexp(-x);
            detail::qreal nn = static_cast<detail::qreal>(count);
            f_acc += (x - half_d) * nn * ex;
            g_acc += kQPi * qa * (x - half_d1) * nn * ex;
        }
        double c = pi * y;
        double f_tail = c * separated_tail_exponential(d, rho, cutoff, c, 1) +
                        0.5 * d * separated_tail_exponential(d, rho, cutoff, c, 0);
        double g_tail = pi * c * separated_tail_exponential(d, rho, cutoff, c, 2) +
                        pi * (0.5 * d + 1.0) * separated_tail_exponential(d, rho, cutoff, c, 1);
        out.f_value = static_cast<double>(f_acc);
        out.g_value = static_cast<double>(g_acc);
        out.f_tail = f_tail;
        out.g_tail = g_tail;
        out.cutoff_used = cutoff;
        bool resolved = std::isfinite(f_tail) && std::isfinite(g_tail) &&
                        f_tail <= std::max(rel_target * std::abs(out.f_value), 1e-300) &&
                        g_tail <= std::max(rel_target * std::abs(out.g_value), 1e-300);
        if (resolved || cutoff >= cutoff_budget) {
            out.shell_data.assign(sc.counts.begin(), sc.counts.end());
            break;
        }
        cutoff = std::min(cutoff_budget, cutoff * 1.35);
    }

    out.lattice_coefficient = y * out.g_value;
    out.translation_coefficient = y * 2.0 * pi * out.f_value / (d * static_cast<double>(m) * m);
    return out;
}

double derivative_cutoff(const PeriodicForm& p, const Potential& pot)
{
    const QuadForm& q = p.q();
    const int d = q.dim();
    double alpha0 = min_norm(q);
    double rho = 0.5 * std::sqrt(alpha0);
    double scale = std::abs(pot.deriv(alpha0)) * alpha0;
    double target = 1e-10 * std::max(scale, 1e-300);
    double cutoff = 4.0 * alpha0;
    if (pot.kind() == Potential::Kind::exponential) {
        cutoff = std::max(cutoff, 4.0 / pot.param());
    }
    for (int it = 0; it < 200; ++it) {
        double tail = p.m() * gradient_tail(pot, d, rho, cutoff);
        if (tail <= target) {
            break;
        }
        double log_points = 0.5 * d * std::log(pi * cutoff) - std::lgamma(0.5 * d + 1.0) -
                            0.5 * std::log(q.det());
        if (log_points > std::log(2e8)) {
            break; // budget cap; the reported tail bound stays honest
        }
        cutoff *= 1.5;
    }
    return cutoff;
}

Vector fd_gradient(const PeriodicForm& p, const Potential& pot, const TangentBasis& basis,
                   const FdOptions& opt)
{
    double step = opt.step > 0.0 ? opt.step : 1e-5 * std::sqrt(min_norm(p.q()));
    double cutoff = opt.cutoff > 0.0 ? opt.cutoff : snap_cutoff(p, derivative_cutoff(p, pot));
    Vector g(basis.size());
    for (int k = 0; k < basis.size(); ++k) {
        TangentVec dir = basis_direction(p, basis, k);
        double ep = energy_truncated(retract(p, dir, step), pot, cutoff);
        double em = energy_truncated(retract(p, dir, -step), pot, cutoff);
        g(k) = (ep - em) / (2.0 * step);
    }
    return g;
}

namespace {

Matrix fd_hessian_once(const PeriodicForm& p, const Potential& pot, const TangentBasis& basis,
                       double step, double cutoff)
{
    const int n = basis.size();
    Matrix h(n, n);
    double e0 = energy_truncated(p, pot, cutoff);
    for (int a = 0; a < n; ++a) {
        TangentVec da = basis_direction(p, basis, a);
        double epp = energy_truncated(retract(p, da, step), pot, cutoff);
        double emm = energy_truncated(retract(p, da, -step), pot, cutoff);
        h(a, a) = (epp - 2.0 * e0 + emm) / (step * step);
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            Vector cplus = Vector::Zero(n);
            cplus(a) = 1.0;
            cplus(b) = 1.0;
            Vector cminus = Vector::Zero(n);
            cminus(a) = 1.0;
            cminus(b) = -1.0;
            TangentVec dp = basis_combination(p, basis, cplus);
            TangentVec dm = basis_combination(p, basis, cminus);
            double epp = energy_truncated(retract(p, dp, step), pot, cutoff);
            double emm = energy_truncated(retract(p, dp, -step), pot, cutoff);
            double epm = energy_truncated(retract(p, dm, step), pot, cutoff);
            double emp = energy_truncated(retract(p, dm, -step), pot, cutoff);
            h(a, b) = ((epp + emm) - (epm + emp)) / (4.0 * step * step);
            h(b, a) = h(a, b);
        }
    }
    return h;
}

} // namespace

Matrix fd_hessian(const PeriodicForm& p, const Potential& pot, const TangentBasis& basis,
                  const FdOptions& opt)
{
    double step = opt.step > 0.0 ? opt.step : 1e-3 * std::sqrt(min_norm(p.q()));
    double cutoff = opt.cutoff > 0.0 ? opt.cutoff : snap_cutoff(p, derivative_cutoff(p, pot));
    Matrix h1 = fd_hessian_once(p, pot, basis, step, cutoff);
    if (!opt.richardson) {
        return h1;
    }
    Matrix h2 = fd_hessian_once(p, pot, basis, 0.5 * step, cutoff);
    return (4.0 * h2 - h1) / 3.0;
}

} // namespace latopt
