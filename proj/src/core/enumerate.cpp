/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/enumerate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace latopt {

namespace detail {

EnumData::EnumData(const QuadForm& q) : d(q.dim()), qdiag(d), mu(static_cast<size_t>(d) * d, 0.0)
{
    const Matrix& r = q.chol_factor(); // upper triangular, R^T R = Q
    for (int i = 0; i < d; ++i) {
        double rii = r(i, i);
        qdiag[i] = rii * rii;
        for (int j = i + 1; j < d; ++j) {
            mu[static_cast<size_t>(i) * d + j] = r(i, j) / rii;
        }
    }
}

std::pair<std::int64_t, std::int64_t> top_range(const EnumData& e, const double* delta,
                                                double bound, bool halve)
{
    const int i = e.d - 1;
    double di = delta ? delta[i] : 0.0;
    double r = std::sqrt(std::max(0.0, bound / e.qdiag[i]));
    auto lo = static_cast<std::int64_t>(std::ceil(-r - di - 1e-9));
    auto hi = static_cast<std::int64_t>(std::floor(r - di + 1e-9));
    if (halve) {
        lo = std::max<std::int64_t>(lo, 0);
    }
    return {lo, hi};
}

namespace {

std::vector<std::pair<double, std::int64_t>> group_sorted(std::vector<std::pair<double, std::int64_t>>& norms)
{
    std::sort(norms.begin(), norms.end());
    std::vector<std::pair<double, std::int64_t>> out;
    for (const auto& [a, c] : norms) {
        if (!out.empty() && std::abs(a - out.back().first) <= 1e-9 * std::max(1.0, std::abs(a))) {
            out.back().second += c;
        } else {
            out.push_back({a, c});
        }
    }
    return out;
}

double estimated_points(const QuadForm& q, double bound)
{
    const int d = q.dim();
    double log_ball = 0.5 * d * std::log(pi * bound) - std::lgamma(0.5 * d + 1.0);
    return std::exp(log_ball - 0.5 * std::log(q.det()));
}

} // namespace

} // namespace detail

ShellCounts count_shells(const QuadForm& q, double max_norm_sq)
{
    if (!(max_norm_sq > 0.0)) {
        fail(errc::domain_error, "max_norm_sq must be positive");
    }
    detail::EnumData e(q);
    ShellCounts result;
    result.bound = max_norm_sq;
    if (q.is_exact()) {
        const double den = static_cast<double>(q.exact()->den);
        auto size = static_cast<std::int64_t>(std::floor(max_norm_sq * den)) + 2;
        if (size > (1 << 24)) {
            fail(errc::cutoff_overflow, "exact shell table would be too large");
        }
        struct ExactCounter {
            std::vector<std::int64_t> counts;
            double den;
            void operator()(const std::int64_t*, double norm, double w)
            {
                auto idx = static_cast<std::int64_t>(std::llround(norm * den));
                if (idx >= 0 && idx < static_cast<std::int64_t>(counts.size())) {
                    counts[static_cast<size_t>(idx)] += static_cast<std::int64_t>(w);
                }
            }
        };
        std::vector<std::int64_t> total(static_cast<size_t>(size), 0);
        detail::parallel_branches(
            e, nullptr, max_norm_sq, true,
            [&] { return ExactCounter{std::vector<std::int64_t>(static_cast<size_t>(size), 0), den}; },
            [&](ExactCounter& v) {
                for (size_t i = 0; i < total.size(); ++i) {
                    total[i] += v.counts[i];
                }
            });
        for (std::int64_t k = 1; k < size; ++k) {
            std::int64_t c = total[static_cast<size_t>(k)];
            if (c != 0) {
                double alpha = static_cast<double>(k) / den;
                if (alpha <= max_norm_sq * (1.0 + 1e-12)) {
                    result.counts.push_back({alpha, c});
                    result.total += c;
                }
            }
        }
        return result;
    }
    if (detail::estimated_points(q, max_norm_sq) > 1e7) {
        fail(errc::cutoff_overflow, "float-path enumeration beyond the configured budget");
    }
    std::vector<std::pair<double, std::int64_t>> norms;
    auto visit = [&](const std::int64_t*, double norm, double w) {
        norms.push_back({norm, static_cast<std::int64_t>(w)});
    };
    detail::Walker<decltype(visit)> w(e, nullptr, max_norm_sq, true, visit);
    w.run();
    result.counts = detail::group_sorted(norms);
    for (auto& [a, c] : result.counts) {
        result.total += c;
    }
    return result;
}

std::vector<Shell> enumerate_shells(const QuadForm& q, double max_norm_sq)
{
    if (!(max_norm_sq > 0.0)) {
        fail(errc::domain_error, "max_norm_sq must be positive");
    }
    if (detail::estimated_points(q, max_norm_sq) > 4e6) {
        fail(errc::cutoff_overflow, "shell materialisation beyond the configured budget");
    }
    detail::EnumData e(q);
    const int d = q.dim();
    struct Hit {
        double alpha;
        IVector x;
    };
    std::vector<Hit> hits;
    auto visit = [&](const std::int64_t* x, double norm, double) {
        if (q.is_exact()) {
            // Snap to the exact rational value.
            double den = static_cast<double>(q.exact()->den);
            norm = static_cast<double>(std::llround(norm * den)) / den;
        }
        if (norm > max_norm_sq * (1.0 + 1e-12)) {
            return;
        }
        IVector v(d);
        for (int k = 0; k < d; ++k) {
            v(k) = x[k];
        }
        hits.push_back({norm, v});
        hits.push_back({norm, (-v).eval()});
    };
    detail::Walker<decltype(visit)> w(e, nullptr, max_norm_sq, true, visit);
    w.run();

    auto lex_less = [](const IVector& a, const IVector& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a(i) != b(i)) {
                return a(i) < b(i);
            }
        }
        return false;
    };
    std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
        if (a.alpha != b.alpha) {
            return a.alpha < b.alpha;
        }
        return lex_less(a.x, b.x);
    });

    std::vector<Shell> shells;
    const double den = q.is_exact() ? static_cast<double>(q.exact()->den) : 1.0;
    for (auto& h : hits) {
        bool fresh = shells.empty() ||
                     std::abs(h.alpha - shells.back().alpha) > 1e-9 * std::max(1.0, h.alpha);
        if (fresh) {
            Shell s;
            s.alpha = h.alpha;
            s.exact = q.is_exact();
            if (s.exact) {
                s.alpha_num = std::llround(h.alpha * den);
            }
            shells.push_back(std::move(s));
        }
        shells.back().vectors.push_back(std::move(h.x));
    }
    return shells;
}

double sum_over_lattice(const QuadForm& q, double bound, const std::function<double(double)>& term)
{
    detail::EnumData e(q);
    struct SumVisitor {
        const std::function<double(double)>* term;
        Kahan acc;
        void operator()(const std::int64_t*, double norm, double w)
        {
            acc.add(w * (*term)(norm));
        }
    };
    Kahan total;
    detail::parallel_branches(
        e, nullptr, bound, true,
        [&] { return SumVisitor{&term, {}}; },
        [&](SumVisitor& v) { total.add(v.acc.value()); });
    return total.value();
}

double min_norm(const QuadForm& q)
{
    double bound = q.gram().diagonal().minCoeff();
    detail::EnumData e(q);
    for (int attempt = 0; attempt < 8; ++attempt) {
        double best = std::numeric_limits<double>::infinity();
        auto visit = [&](const std::int64_t*, double norm, double) {
            if (norm < best && norm > 1e-12) {
                best = norm;
            }
        };
        detail::Walker<decltype(visit)> w(e, nullptr, bound, true, visit);
        w.run();
        if (std::isfinite(best)) {
            if (q.is_exact()) {
                double den = static_cast<double>(q.exact()->den);
                best = static_cast<double>(std::llround(best * den)) / den;
            }
            return best;
        }
        bound *= 2.0;
    }
    fail(errc::internal_inconsistency, "min_norm search failed to find any vector");
}

std::vector<CosetPairShells> periodic_difference_shells(const PeriodicForm& p, double max_norm_sq)
{
    const int d = p.dim();
    const int m = p.m();
    std::vector<CosetPairShells> out;
    out.reserve(static_cast<size_t>(m) * m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            CosetPairShells pair;
            pair.i = i;
            pair.j = j;
            Vector delta = p.translations()[i] - p.translations()[j];
            // Center the representative so the traversal window is compact.
            for (int k = 0; k < d; ++k) {
                delta(k) -= std::round(delta(k));
            }
            if (dist_to_integers(delta) < 1e-12) {
                // Same coset: these are the lattice shells.
                for (const Shell& s : enumerate_shells(p.q(), max_norm_sq)) {
                    CosetShell cs;
                    cs.alpha = s.alpha;
                    for (const auto& x : s.vectors) {
                        cs.vectors.push_back(x.cast<double>());
                    }
                    pair.shells.push_back(std::move(cs));
                }
                out.push_back(std::move(pair));
                continue;
            }
            std::vector<std::pair<double, Vector>> hits;
            auto visit = [&](const std::int64_t* x, double norm, double) {
                if (norm > max_norm_sq * (1.0 + 1e-12)) {
                    return;
                }
                Vector v(d);
                for (int k = 0; k < d; ++k) {
                    v(k) = static_cast<double>(x[k]) + delta(k);
                }
                hits.push_back({norm, std::move(v)});
            };
            for_each_coset_vector(p.q(), delta, max_norm_sq, visit);
            std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) {
                    return a.first < b.first;
                }
                for (Eigen::Index k = 0; k < a.second.size(); ++k) {
                    if (a.second(k) != b.second(k)) {
                        return a.second(k) < b.second(k);
                    }
                }
                return false;
            });
            for (auto& [alpha, v] : hits) {
                bool fresh = pair.shells.empty() ||
                             std::abs(alpha - pair.shells.back().alpha) >
                                 1e-9 * std::max(1.0, alpha);
                if (fresh) {
                    pair.shells.push_back(CosetShell{alpha, {}});
                }
                pair.shells.back().vectors.push_back(std::move(v));
            }
            out.push_back(std::move(pair));
        }
    }
    return out;
}

const ShellCounts& ShellCountCache::up_to(double bound)
{
    if (data_.counts.empty() || data_.bound < bound) {
        data_ = count_shells(q_, bound);
    }
    return data_;
}

} // namespace latopt
