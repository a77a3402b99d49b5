/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/cosets.hpp"

#include <random>

namespace latopt {

LatticeDetection detect_lattice(const PeriodicForm& p)
{
    const int m = p.m();
    const auto& u = p.translations();
    LatticeDetection out;
    PermutationTable table;
    table.m = m;
    table.sigma.assign(m, std::vector<int>(m, -1));
    for (int k = 0; k < m; ++k) {
        std::vector<bool> used(m, false);
        for (int i = 0; i < m; ++i) {
            Vector target = u[i] - u[k];
            int found = -1;
            for (int j = 0; j < m; ++j) {
                if (dist_to_integers(target - u[j]) < 1e-9) {
                    found = j;
                    break;
                }
            }
            if (found < 0 || used[found]) {
                out.failure = NotALattice{k, i};
                return out;
            }
            used[found] = true;
            table.sigma[k][i] = found;
        }
    }
    out.table = std::move(table);
    return out;
}

namespace {

/// Ordered factorisations of m into dim positive factors, chosen uniformly
/// among a simple randomised split.
std::vector<std::int64_t> random_diagonal(int dim, int m, std::mt19937_64& rng)
{
    std::vector<std::int64_t> diag(dim, 1);
    int rest = m;
    while (rest > 1) {
        // Peel a prime factor and place it at a random position.
        int p = 2;
        while (rest % p != 0) {
            ++p;
        }
        std::uniform_int_distribution<int> pick(0, dim - 1);
        diag[pick(rng)] *= p;
        rest /= p;
    }
    return diag;
}

} // namespace

PeriodicForm coset_decomposition(const QuadForm& q, int m, std::uint64_t seed)
{
    const int d = q.dim();
    if (m < 1) {
        fail(errc::domain_error, "coset decomposition needs m >= 1");
    }
    if (m == 1) {
        return PeriodicForm::lattice(q);
    }
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto diag = random_diagonal(d, m, rng);
    // Upper-triangular HNF transform T with det m; the sublattice is A T Z^d.
    IMatrix t = IMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        t(i, i) = diag[i];
    }
    for (int j = 0; j < d; ++j) {
        if (diag[j] == 1) {
            continue;
        }
        for (int i = 0; i < j; ++i) {
            std::uniform_int_distribution<std::int64_t> pick(0, diag[j] - 1);
            t(i, j) = pick(rng);
        }
    }

    Matrix tf = t.cast<double>();
    Matrix g_new = tf.transpose() * q.gram() * tf;
    g_new = 0.5 * (g_new + g_new.transpose());
    std::optional<ExactGram> exact;
    if (q.is_exact()) {
        exact = ExactGram{t.transpose() * q.exact()->num * t, q.exact()->den};
    }

    // Coset representatives of Z^d / T Z^d via the mixed-radix box, mapped to
    // translations u = T^{-1} r.
    std::int64_t det_t = exact_det(t);
    if (det_t != m) {
        fail(errc::internal_inconsistency, "HNF transform has wrong index");
    }
    IMatrix adj = exact_adjugate(t);
    std::vector<Vector> translations;
    translations.reserve(static_cast<size_t>(m));
    std::vector<std::int64_t> idx(d, 0);
    for (int count = 0; count < m; ++count) {
        IVector r(d);
        for (int i = 0; i < d; ++i) {
            r(i) = idx[i];
        }
        IVector scaled = adj * r; // T^{-1} r = scaled / m
        Vector u(d);
        for (int i = 0; i < d; ++i) {
            u(i) = static_cast<double>(scaled(i)) / static_cast<double>(m);
        }
        translations.push_back(reduce_mod1(u));
        for (int i = 0; i < d; ++i) {
            if (++idx[i] < diag[i]) {
                break;
            }
            idx[i] = 0;
        }
    }
    // Put the zero representative first.
    for (size_t i = 0; i < translations.size(); ++i) {
        if (translations[i].cwiseAbs().maxCoeff() < 1e-12) {
            std::swap(translations[0], translations[i]);
            break;
        }
    }
    return PeriodicForm(QuadForm(std::move(g_new), std::move(exact)), std::move(translations));
}

} // namespace latopt
