/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_ENUMERATE_HPP
#define LATOPT_CORE_ENUMERATE_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "core/forms.hpp"

namespace latopt {

/// One squared-norm level of a lattice: alpha plus every integer-coordinate
/// vector w with Q[w] = alpha.
struct Shell {
    double alpha{0.0};
    std::int64_t alpha_num{0}; // alpha = alpha_num / den on the exact path
    bool exact{false};
    std::vector<IVector> vectors;

    std::int64_t count() const { return static_cast<std::int64_t>(vectors.size()); }
};

/// (alpha, count) pairs in ascending alpha order.
struct ShellCounts {
    std::vector<std::pair<double, std::int64_t>> counts;
    double bound{0.0};
    std::int64_t total{0};
};

namespace detail {

/// Cholesky data in the layered form Q[y] = sum_i q_i (y_i + sum_{j>i} mu_ij y_j)^2.
struct EnumData {
    int d{0};
    std::vector<double> qdiag;
    std::vector<double> mu; // row-major, mu[i*d+j] valid for j > i

    explicit EnumData(const QuadForm& q);
};

/// Branch-and-bound traversal of {x : Q[x + delta] <= bound}. Vectors are
/// visited in a deterministic order (ascending coordinates, outermost first).
/// With halve = true (lattice case only) each antipodal pair is reported once
/// with weight 2 and the zero vector is skipped.
template <class Visit>
class Walker {
  public:
    Walker(const EnumData& e, const double* delta, double bound, bool halve, Visit& visit)
        : e_(e), delta_(delta), bound_(bound), halve_(halve), visit_(visit),
          x_(e.d, 0), yhat_(e.d, 0.0)
    {
    }

    void run()
    {
        // Zero-prefix tracking identifies the origin whenever there is no
        // affine shift, whether or not the traversal is halved.
        descend(e_.d - 1, 0.0, delta_ == nullptr);
    }

    /// Runs only the given value of the outermost coordinate (for parallel
    /// splits over the top branch).
    void run_branch(std::int64_t x_top, bool zero_prefix)
    {
        const int i = e_.d - 1;
        double di = delta_ ? delta_[i] : 0.0;
        double y = static_cast<double>(x_top) + di;
        double term = e_.qdiag[i] * y * y;
        if (term > bound_ * (1.0 + 1e-12) + 1e-9) {
            return;
        }
        x_[i] = x_top;
        yhat_[i] = y;
        if (i == 0) {
            leaf(term, zero_prefix && x_top == 0);
            return;
        }
        descend(i - 1, term, zero_prefix && x_top == 0);
    }

  private:
    void leaf(double norm, bool zero)
    {
        if (zero) {
            return; // origin excluded from every sum
        }
        if (norm > bound_ + 1e-9 * std::max(1.0, bound_)) {
            return;
        }
        visit_(x_.data(), norm, halve_ ? 2.0 : 1.0);
    }

    void descend(int i, double used, bool zero_prefix)
    {
        double c = delta_ ? delta_[i] : 0.0;
        const double* mu_row = e_.mu.data() + static_cast<size_t>(i) * e_.d;
        for (int j = i + 1; j < e_.d; ++j) {
            c += mu_row[j] * yhat_[j];
        }
        // Here c = delta_i + sum_{j>i} mu_ij yhat_j and the level contributes
        // qdiag_i * (x_i + c)^2 in the x-variable.
        double rem = bound_ - used;
        double r = std::sqrt(std::max(0.0, rem / e_.qdiag[i]));
        auto lo = static_cast<std::int64_t>(std::ceil(-c - r - 1e-9));
        auto hi = static_cast<std::int64_t>(std::floor(-c + r + 1e-9));
        if (halve_ && zero_prefix && lo < 0) {
            lo = 0;
        }
        const double qi = e_.qdiag[i];
        if (i == 0) {
            for (std::int64_t v = lo; v <= hi; ++v) {
                double y = static_cast<double>(v) + c;
                double norm = used + qi * y * y;
                x_[0] = v;
                leaf(norm, zero_prefix && v == 0);
            }
            return;
        }
        for (std::int64_t v = lo; v <= hi; ++v) {
            double y = static_cast<double>(v) + (delta_ ? delta_[i] : 0.0);
            double shifted = static_cast<double>(v) + c;
            double term = qi * shifted * shifted;
            if (term > rem + 1e-9 * std::max(1.0, bound_)) {
                continue;
            }
            x_[i] = v;
            yhat_[i] = y;
            descend(i - 1, used + term, zero_prefix && v == 0);
        }
    }

    const EnumData& e_;
    const double* delta_;
    double bound_;
    bool halve_;
    Visit& visit_;
    std::vector<std::int64_t> x_;
    std::vector<double> yhat_;
};

/// Inclusive range of the outermost coordinate for a given bound.
std::pair<std::int64_t, std::int64_t> top_range(const EnumData& e, const double* delta,
                                                double bound, bool halve);

/// Runs one walker per top-level branch across a thread pool; the factory
/// produces a per-branch visitor and merge folds them back in branch order,
/// so results do not depend on the thread count.
template <class VisitorFactory, class Merge>
void parallel_branches(const EnumData& e, const double* delta, double bound, bool halve,
                       VisitorFactory&& make, Merge&& merge)
{
    using VisitorT = std::decay_t<decltype(make())>;
    auto [lo, hi] = top_range(e, delta, bound, halve);
    if (lo > hi) {
        return;
    }
    const auto nb = static_cast<int>(hi - lo + 1);
    int nthreads = std::min(thread_count(), nb);
    std::vector<VisitorT> parts;
    parts.reserve(static_cast<size_t>(nb));
    for (int b = 0; b < nb; ++b) {
        parts.push_back(make());
    }
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            int b = next.fetch_add(1);
            if (b >= nb) {
                return;
            }
            Walker<VisitorT> w(e, delta, bound, halve, parts[static_cast<size_t>(b)]);
            w.run_branch(lo + b, delta == nullptr);
        }
    };
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (int b = 0; b < nb; ++b) {
        merge(parts[static_cast<size_t>(b)]);
    }
}

} // namespace detail

/// Visits every nonzero lattice vector x with Q[x] <= bound, one antipodal
/// representative per pair with weight 2. Single-threaded, deterministic.
template <class Visit>
void for_each_lattice_vector(const QuadForm& q, double bound, Visit&& visit)
{
    detail::EnumData e(q);
    detail::Walker<Visit> w(e, nullptr, bound, true, visit);
    w.run();
}

/// Visits every x with Q[x + delta] <= bound (delta in coordinates, not
/// necessarily reduced). The zero of the affine coset is never excluded;
/// callers pass genuinely non-integral delta.
template <class Visit>
void for_each_coset_vector(const QuadForm& q, const Vector& delta, double bound, Visit&& visit)
{
    detail::EnumData e(q);
    std::vector<double> d(delta.data(), delta.data() + delta.size());
    detail::Walker<Visit> w(e, d.data(), bound, false, visit);
    w.run();
}

/// Complete list of shells with 0 < alpha <= max_norm_sq, ascending, vectors
/// in lexicographic order, antipodally closed.
std::vector<Shell> enumerate_shells(const QuadForm& q, double max_norm_sq);

/// Shell population counts only; runs the traversal in parallel over the
/// outermost branch and merges exactly.
ShellCounts count_shells(const QuadForm& q, double max_norm_sq);

/// Deterministic parallel reduction of sum over nonzero lattice vectors of
/// term(alpha). Partial sums are formed per top-level branch and combined in
/// branch order, so the result does not depend on the thread count.
double sum_over_lattice(const QuadForm& q, double bound,
                        const std::function<double(double)>& term);

/// Smallest squared norm of a nonzero lattice vector.
double min_norm(const QuadForm& q);

/// Vectors of one coset difference u_i - u_j + Z^d grouped by squared norm.
struct CosetShell {
    double alpha{0.0};
    std::vector<Vector> vectors; // coordinates x + delta
};

struct CosetPairShells {
    int i{0};
    int j{0};
    std::vector<CosetShell> shells;
};

/// For each ordered coset pair (i, j), the nonzero difference vectors up to
/// the bound; (i, i) pairs carry the lattice shells.
std::vector<CosetPairShells> periodic_difference_shells(const PeriodicForm& p,
                                                        double max_norm_sq);

/// Grows a per-form shell count table on demand; used by the split-function
/// sums which probe many cutoffs.
class ShellCountCache {
  public:
    explicit ShellCountCache(QuadForm q) : q_(std::move(q)) {}

    const ShellCounts& up_to(double bound);
    const QuadForm& form() const { return q_; }

  private:
    QuadForm q_;
    ShellCounts data_;
};

} // namespace latopt

#endif
