/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/linalg.hpp"

#include <numeric>
#include <sstream>

namespace latopt {

namespace {

using i128 = __int128;

i128 checked_mul(i128 a, i128 b)
{
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) {
        fail(errc::internal_inconsistency, "128-bit overflow in exact linear algebra");
    }
    return r;
}

std::int64_t narrow(i128 v, const char* ctx)
{
    if (v > INT64_MAX || v < INT64_MIN) {
        fail(errc::internal_inconsistency, std::string("exact value out of 64-bit range in ") + ctx);
    }
    return static_cast<std::int64_t>(v);
}

/// Fraction-free Gaussian elimination; returns det in 128 bits.
i128 bareiss_det(std::vector<std::vector<i128>> a)
{
    const int n = static_cast<int>(a.size());
    if (n == 0) {
        return 1;
    }
    i128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i) {
                if (a[i][k] != 0) {
                    p = i;
                    break;
                }
            }
            if (p < 0) {
                return 0;
            }
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                i128 t = checked_mul(a[i][j], a[k][k]) - checked_mul(a[i][k], a[k][j]);
                a[i][j] = t / prev; // exact division in Bareiss
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    return sign > 0 ? a[n - 1][n - 1] : -a[n - 1][n - 1];
}

std::vector<std::vector<i128>> to_i128(const IMatrix& m)
{
    std::vector<std::vector<i128>> a(m.rows(), std::vector<i128>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            a[i][j] = m(i, j);
        }
    }
    return a;
}

std::int64_t igcd(std::int64_t a, std::int64_t b)
{
    return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

} // namespace

Matrix sym_expm(const Matrix& s)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    if (es.info() != Eigen::Success) {
        fail(errc::internal_inconsistency, "eigendecomposition failed in sym_expm");
    }
    Vector lam = es.eigenvalues();
    Matrix v = es.eigenvectors();
    Vector e = lam.array().exp();
    return v * e.asDiagonal() * v.transpose();
}

Matrix project_trace_constraint(const Matrix& k, const Matrix& q, const Matrix& q_inv)
{
    const double d = static_cast<double>(q.rows());
    double tr = (q_inv * k).trace();
    return k - (tr / d) * q;
}

std::int64_t exact_det(const IMatrix& m)
{
    if (m.rows() != m.cols()) {
        fail(errc::structural, "determinant of non-square matrix");
    }
    return narrow(bareiss_det(to_i128(m)), "exact_det");
}

IMatrix exact_adjugate(const IMatrix& m)
{
    const Eigen::Index n = m.rows();
    if (n != m.cols()) {
        fail(errc::structural, "adjugate of non-square matrix");
    }
    IMatrix adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1;
        return adj;
    }
    auto base = to_i128(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            std::vector<std::vector<i128>> minor(n - 1, std::vector<i128>(n - 1));
            for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
                if (r == j) {
                    continue;
                }
                for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                    if (c == i) {
                        continue;
                    }
                    minor[rr][cc] = base[r][c];
                    ++cc;
                }
                ++rr;
            }
            i128 cof = bareiss_det(minor);
            if ((i + j) % 2 != 0) {
                cof = -cof;
            }
            adj(i, j) = narrow(cof, "exact_adjugate");
        }
    }
    return adj;
}

IMatrix hermite_normal_form(const IMatrix& m)
{
    const Eigen::Index n = m.rows();
    if (n != m.cols()) {
        fail(errc::structural, "HNF of non-square matrix");
    }
    IMatrix h = m;
    // Column reduction from the bottom row up.
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        Eigen::Index pivot_col = i;
        // Use the Euclidean algorithm across columns 0..i on row i.
        for (;;) {
            Eigen::Index best = -1;
            for (Eigen::Index j = 0; j <= i; ++j) {
                if (h(i, j) != 0 && (best < 0 || std::abs(h(i, j)) < std::abs(h(i, best)))) {
                    best = j;
                }
            }
            if (best < 0) {
                fail(errc::structural, "singular matrix in HNF");
            }
            bool reduced = true;
            for (Eigen::Index j = 0; j <= i; ++j) {
                if (j == best || h(i, j) == 0) {
                    continue;
                }
                std::int64_t q = h(i, j) / h(i, best);
                h.col(j) -= q * h.col(best);
                if (h(i, j) != 0) {
                    reduced = false;
                }
            }
            if (reduced) {
                pivot_col = best;
                break;
            }
        }
        h.col(i).swap(h.col(pivot_col));
        if (h(i, i) < 0) {
            h.col(i) = -h.col(i);
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            // Reduce entries to the right of the pivot into [0, h(i,i)).
            std::int64_t q = h(i, j) / h(i, i);
            if (h(i, j) % h(i, i) < 0) {
                q -= 1;
            }
            h.col(j) -= q * h.col(i);
        }
    }
    return h;
}

Rat64 Rat64::operator+(const Rat64& o) const
{
    i128 n = checked_mul(num, o.den) + checked_mul(o.num, den);
    i128 d = checked_mul(den, o.den);
    i128 g = 1;
    {
        i128 a = n < 0 ? -n : n, b = d;
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        g = a == 0 ? 1 : a;
    }
    return Rat64(narrow(n / g, "Rat64+"), narrow(d / g, "Rat64+"));
}

Rat64 Rat64::operator-(const Rat64& o) const
{
    return *this + Rat64(-o.num, o.den);
}

Rat64 Rat64::operator*(const Rat64& o) const
{
    i128 n = checked_mul(num, o.num);
    i128 d = checked_mul(den, o.den);
    i128 g = 1;
    {
        i128 a = n < 0 ? -n : n, b = d;
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        g = a == 0 ? 1 : a;
    }
    return Rat64(narrow(n / g, "Rat64*"), narrow(d / g, "Rat64*"));
}

Rat64::Rat64(std::int64_t n, std::int64_t d)
{
    if (d == 0) {
        fail(errc::domain_error, "rational with zero denominator");
    }
    if (d < 0) {
        n = -n;
        d = -d;
    }
    std::int64_t g = igcd(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    num = n;
    den = d;
}

Rat64 Rat64::mod1() const
{
    std::int64_t r = num % den;
    if (r < 0) {
        r += den;
    }
    return Rat64(r, den);
}

std::string Rat64::str() const
{
    std::ostringstream os;
    os << num;
    if (den != 1) {
        os << '/' << den;
    }
    return os.str();
}

Rat64 Rat64::parse(const std::string& text)
{
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            std::int64_t n = std::stoll(text.substr(0, slash));
            std::int64_t d = std::stoll(text.substr(slash + 1));
            return Rat64(n, d);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) {
            return Rat64(std::stoll(text), 1);
        }
        // Decimal: scale by a power of ten.
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::int64_t den = 1;
        for (size_t i = 0; i < text.size() - dot - 1; ++i) {
            den *= 10;
        }
        return Rat64(std::stoll(digits), den);
    } catch (const std::exception&) {
        fail(errc::io_error, "cannot parse rational '" + text + "'");
    }
}

std::optional<std::vector<Rat64>> solve_exact(const IMatrix& a, const IVector& b)
{
    std::int64_t det = exact_det(a);
    if (det == 0) {
        return std::nullopt;
    }
    IMatrix adj = exact_adjugate(a);
    IVector scaled = adj * b; // a^{-1} b = adj*b / det
    std::vector<Rat64> x;
    x.reserve(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        x.push_back(Rat64(scaled(i), det));
    }
    return x;
}

} // namespace latopt
