/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/designs.hpp"

#include <algorithm>
#include <random>

namespace latopt {

namespace {

using i128 = __int128;

constexpr double kRelTol = 1e-9;

void require_shell(const Shell& shell)
{
    if (shell.vectors.empty()) {
        fail(errc::empty_shell, "design check on an empty shell");
    }
}

bool antipodal(const Shell& shell)
{
    auto less = [](const IVector& a, const IVector& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a(i) != b(i)) {
                return a(i) < b(i);
            }
        }
        return false;
    };
    std::vector<IVector> sorted = shell.vectors;
    std::sort(sorted.begin(), sorted.end(), less);
    for (const auto& v : shell.vectors) {
        IVector neg = -v;
        if (!std::binary_search(sorted.begin(), sorted.end(), neg, less)) {
            return false;
        }
    }
    return true;
}

/// Integer second moment sum of x x^T over the shell.
IMatrix second_moment(const Shell& shell, int d)
{
    IMatrix m = IMatrix::Zero(d, d);
    for (const auto& x : shell.vectors) {
        for (int p = 0; p < d; ++p) {
            for (int qd = p; qd < d; ++qd) {
                m(p, qd) += x(p) * x(qd);
            }
        }
    }
    for (int p = 0; p < d; ++p) {
        for (int qd = 0; qd < p; ++qd) {
            m(p, qd) = m(qd, p);
        }
    }
    return m;
}

struct I128Guard {
    bool overflow{false};
    i128 mul(i128 a, i128 b)
    {
        i128 r;
        if (__builtin_mul_overflow(a, b, &r)) {
            overflow = true;
            return 0;
        }
        return r;
    }
    i128 add(i128 a, i128 b)
    {
        i128 r;
        if (__builtin_add_overflow(a, b, &r)) {
            overflow = true;
            return 0;
        }
        return r;
    }
};

/// Symmetric basis E_pp and E_pq + E_qp as integer matrices.
std::vector<IMatrix> sym_int_basis(int d)
{
    std::vector<IMatrix> basis;
    for (int p = 0; p < d; ++p) {
        IMatrix e = IMatrix::Zero(d, d);
        e(p, p) = 1;
        basis.push_back(std::move(e));
    }
    for (int p = 0; p < d; ++p) {
        for (int qd = p + 1; qd < d; ++qd) {
            IMatrix e = IMatrix::Zero(d, d);
            e(p, qd) = 1;
            e(qd, p) = 1;
            basis.push_back(std::move(e));
        }
    }
    return basis;
}

std::vector<Matrix> random_sym(int d, int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        Matrix h(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                h(i, j) = nd(rng);
            }
        }
        out.push_back(0.5 * (h + h.transpose()));
    }
    return out;
}

} // namespace

DesignReport check_2design(const Shell& shell, const QuadForm& q)
{
    require_shell(shell);
    const int d = q.dim();
    const double n = static_cast<double>(shell.count());
    DesignReport rep;
    rep.alpha = shell.alpha;
    rep.count = shell.count();
    rep.t_checked = 2;
    rep.c_t = shell.alpha * n / static_cast<double>(d);

    if (q.is_exact() && shell.exact) {
        // Q M Q = (alpha N / d) Q in exact arithmetic, cleared of denominators:
        // d * Qn M Qn == alpha_num * N * Qn.
        IMatrix m2 = second_moment(shell, d);
        I128Guard g;
        const auto& qn = q.exact()->num;
        bool equal = true;
        for (int r = 0; r < d && equal; ++r) {
            for (int c = 0; c < d && equal; ++c) {
                i128 lhs = 0;
                for (int a = 0; a < d; ++a) {
                    i128 inner = 0;
                    for (int b = 0; b < d; ++b) {
                        inner = g.add(inner, g.mul(m2(a, b), qn(b, c)));
                    }
                    lhs = g.add(lhs, g.mul(qn(r, a), inner));
                }
                lhs = g.mul(lhs, d);
                i128 rhs = g.mul(g.mul(shell.alpha_num, static_cast<i128>(shell.count())), qn(r, c));
                if (g.overflow || lhs != rhs) {
                    equal = false;
                }
            }
        }
        if (!g.overflow) {
            rep.exact_path = true;
            rep.is_design = equal;
            rep.max_residual = 0.0;
            if (!equal) {
                // Fall through below only for the reported float residual.
            } else {
                return rep;
            }
        }
    }

    // Euclidean float check: M = sum (A w)(A w)^T vs (alpha N / d) Id.
    const Matrix& a = q.chol_factor();
    Matrix m = Matrix::Zero(d, d);
    for (const auto& x : shell.vectors) {
        Vector w = a * x.cast<double>();
        m.noalias() += w * w.transpose();
    }
    double target = shell.alpha * n / static_cast<double>(d);
    double worst = 0.0;
    double wl = 0.0, wr = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double want = (i == j) ? target : 0.0;
            double res = std::abs(m(i, j) - want) / target;
            if (res > worst) {
                worst = res;
                wl = m(i, j);
                wr = want;
            }
        }
    }
    if (!rep.exact_path) {
        rep.is_design = worst <= kRelTol;
        rep.max_residual = worst;
    } else {
        rep.max_residual = rep.is_design ? 0.0 : worst;
    }
    rep.worst_lhs = wl;
    rep.worst_rhs = wr;
    return rep;
}

DesignReport check_4design(const Shell& shell, const QuadForm& q)
{
    require_shell(shell);
    const int d = q.dim();
    const double n = static_cast<double>(shell.count());
    DesignReport rep;
    rep.alpha = shell.alpha;
    rep.count = shell.count();
    rep.t_checked = 4;
    rep.c_t = 3.0 * shell.alpha * shell.alpha * n / static_cast<double>(d * (d + 2));

    bool exact_done = false;
    if (q.is_exact() && shell.exact) {
        // For S = A^T H A the identity becomes, with adj = adjugate(Qn) and
        // det = det(Qn):
        //   d(d+2) det^2 sum_x S[x]^2 == alpha_num^2 N [(Tr S adj)^2 + 2 Tr(S adj S adj)].
        const auto& qn = q.exact()->num;
        std::int64_t det = exact_det(qn);
        IMatrix adj = exact_adjugate(qn);
        I128Guard g;
        bool equal = true;
        auto basis = sym_int_basis(d);
        for (const auto& s : basis) {
            i128 lhs = 0;
            for (const auto& x : shell.vectors) {
                i128 val = 0;
                for (int p = 0; p < d; ++p) {
                    i128 row = 0;
                    for (int c = 0; c < d; ++c) {
                        row = g.add(row, g.mul(s(p, c), x(c)));
                    }
                    val = g.add(val, g.mul(row, x(p)));
                }
                lhs = g.add(lhs, g.mul(val, val));
            }
            lhs = g.mul(lhs, static_cast<i128>(d) * (d + 2));
            lhs = g.mul(lhs, g.mul(det, det));

            IMatrix sa = s * adj;
            i128 tr = 0;
            for (int p = 0; p < d; ++p) {
                tr = g.add(tr, sa(p, p));
            }
            i128 tr2 = 0;
            for (int p = 0; p < d; ++p) {
                for (int c = 0; c < d; ++c) {
                    tr2 = g.add(tr2, g.mul(sa(p, c), sa(c, p)));
                }
            }
            i128 rhs = g.add(g.mul(tr, tr), g.mul(2, tr2));
            rhs = g.mul(rhs, g.mul(static_cast<i128>(shell.alpha_num), shell.alpha_num));
            rhs = g.mul(rhs, static_cast<i128>(shell.count()));
            if (g.overflow) {
                break;
            }
            if (lhs != rhs) {
                equal = false;
                break;
            }
        }
        if (!g.overflow) {
            rep.exact_path = true;
            rep.is_design = equal;
            exact_done = true;
            if (equal) {
                rep.max_residual = 0.0;
                return rep;
            }
        }
    }

    // Float identity over the complete symmetric basis plus random H.
    const Matrix& a = q.chol_factor();
    std::vector<Vector> ws;
    ws.reserve(shell.vectors.size());
    for (const auto& x : shell.vectors) {
        ws.push_back(a * x.cast<double>());
    }
    std::vector<Matrix> hs;
    for (const auto& s : sym_int_basis(d)) {
        hs.push_back(s.cast<double>());
    }
    for (auto& h : random_sym(d, 10, 0xd351)) {
        hs.push_back(std::move(h));
    }
    double pre = shell.alpha * shell.alpha * n / static_cast<double>(d * (d + 2));
    double worst = 0.0;
    double wl = 0.0, wr = 0.0;
    for (const auto& h : hs) {
        double lhs = 0.0;
        for (const auto& w : ws) {
            double hw = w.dot(h * w);
            lhs += hw * hw;
        }
        double trh = h.trace();
        double trh2 = (h * h).trace();
        double rhs = pre * (trh * trh + 2.0 * trh2);
        double res = std::abs(lhs - rhs) / std::abs(rhs);
        if (res > worst) {
            worst = res;
            wl = lhs;
            wr = rhs;
        }
    }
    if (!exact_done) {
        rep.is_design = worst <= kRelTol;
        rep.max_residual = worst;
    } else {
        rep.max_residual = rep.is_design ? 0.0 : worst;
    }
    rep.worst_lhs = wl;
    rep.worst_rhs = wr;
    return rep;
}

DesignReport check_design_even_t(const Shell& shell, const QuadForm& q, int t,
                                 int n_random, std::uint64_t seed)
{
    require_shell(shell);
    if (t < 2 || t % 2 != 0) {
        fail(errc::unsupported_parity, "moment test supports even t >= 2 only");
    }
    if (!antipodal(shell)) {
        fail(errc::invalid_form, "moment test requires an antipodally symmetric shell");
    }
    const int d = q.dim();
    DesignReport rep;
    rep.alpha = shell.alpha;
    rep.count = shell.count();
    rep.t_checked = t;
    rep.certifying = t <= 4;

    // Directions: all coordinates, all pairs e_p +- e_q, plus random units.
    std::vector<Vector> dirs;
    for (int p = 0; p < d; ++p) {
        Vector v = Vector::Zero(d);
        v(p) = 1.0;
        dirs.push_back(v);
    }
    for (int p = 0; p < d; ++p) {
        for (int qd = p + 1; qd < d; ++qd) {
            Vector v = Vector::Zero(d);
            v(p) = 1.0;
            v(qd) = 1.0;
            dirs.push_back(v);
            v(qd) = -1.0;
            dirs.push_back(v);
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int k = 0; k < n_random; ++k) {
        Vector v(d);
        for (int i = 0; i < d; ++i) {
            v(i) = nd(rng);
        }
        dirs.push_back(v.normalized());
    }

    // The moment ratio sum (w . y)^t / (y . y)^{t/2} must be a constant;
    // directions are Euclidean, y = A z.
    const Matrix& a = q.chol_factor();
    std::vector<Vector> ws;
    ws.reserve(shell.vectors.size());
    for (const auto& x : shell.vectors) {
        ws.push_back(a * x.cast<double>());
    }
    double cmin = 0.0, cmax = 0.0;
    bool first = true;
    for (const auto& y : dirs) {
        double yy = y.squaredNorm();
        double sum = 0.0;
        for (const auto& w : ws) {
            sum += std::pow(w.dot(y), t);
        }
        double ratio = sum / std::pow(yy, 0.5 * t);
        if (first) {
            cmin = cmax = ratio;
            first = false;
        } else {
            cmin = std::min(cmin, ratio);
            cmax = std::max(cmax, ratio);
        }
    }
    double scale = std::max(std::abs(cmax), std::abs(cmin));
    double spread = (cmax - cmin) / (scale > 0.0 ? scale : 1.0);
    rep.c_t = 0.5 * (cmin + cmax);
    rep.max_residual = spread;
    rep.worst_lhs = cmax;
    rep.worst_rhs = cmin;
    rep.is_design = spread <= kRelTol;
    return rep;
}

AllShellsReport all_shells_design(const QuadForm& q, int t, double max_norm_sq)
{
    if (t < 2 || t % 2 != 0) {
        fail(errc::unsupported_parity, "design sweep supports even t >= 2 only");
    }
    AllShellsReport out;
    out.verified_up_to = max_norm_sq;
    out.all_design = true;
    for (const Shell& s : enumerate_shells(q, max_norm_sq)) {
        DesignReport r;
        if (t == 2) {
            r = check_2design(s, q);
        } else if (t == 4) {
            r = check_4design(s, q);
        } else {
            r = check_design_even_t(s, q, t);
        }
        out.all_design = out.all_design && r.is_design;
        out.reports.push_back(std::move(r));
    }
    return out;
}

} // namespace latopt
