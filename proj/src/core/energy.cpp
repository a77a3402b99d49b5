/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/energy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/tails.hpp"

namespace latopt {

namespace {

double ball_point_estimate(const QuadForm& q, double bound)
{
    const int d = q.dim();
    double log_ball = 0.5 * d * std::log(pi * bound) - std::lgamma(0.5 * d + 1.0);
    return std::exp(log_ball - 0.5 * std::log(q.det()));
}

void check_convergence(const Potential& pot, int d)
{
    if (pot.kind() == Potential::Kind::inverse_power && pot.param() <= 0.5 * d) {
        fail(errc::divergent_sum, "inverse power sum diverges for s <= d/2");
    }
}

/// Smallest squared norm over every coset difference of the form (the
/// quantity the paper calls rho_0 squared).
double min_difference_norm(const PeriodicForm& p, double lattice_min)
{
    double best = lattice_min;
    const int m = p.m();
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            Vector delta = p.translations()[i] - p.translations()[j];
            for (Eigen::Index k = 0; k < delta.size(); ++k) {
                delta(k) -= std::round(delta(k));
            }
            double bound = lattice_min;
            for (int attempt = 0; attempt < 12; ++attempt) {
                double local = std::numeric_limits<double>::infinity();
                auto visit = [&](const std::int64_t*, double norm, double) {
                    local = std::min(local, norm);
                };
                for_each_coset_vector(p.q(), delta, bound, visit);
                if (std::isfinite(local)) {
                    best = std::min(best, local);
                    break;
                }
                bound *= 2.0;
            }
        }
    }
    return best;
}

struct PairSum {
    double value{0.0};
    std::int64_t terms{0};
};

PairSum coset_sum(const QuadForm& q, const Vector& delta_raw, const Potential& pot, double cutoff)
{
    Vector delta = delta_raw;
    for (Eigen::Index k = 0; k < delta.size(); ++k) {
        delta(k) -= std::round(delta(k));
    }
    Kahan acc;
    std::int64_t terms = 0;
    auto visit = [&](const std::int64_t*, double norm, double w) {
        acc.add(w * pot.eval(norm));
        terms += static_cast<std::int64_t>(w);
    };
    for_each_coset_vector(q, delta, cutoff, visit);
    return {acc.value(), terms};
}

struct LatticeSum {
    double value{0.0};
    std::int64_t terms{0};
};

LatticeSum lattice_sum(const QuadForm& q, const Potential& pot, double cutoff)
{
    struct Visitor {
        const Potential* pot;
        Kahan acc;
        std::int64_t terms{0};
        void operator()(const std::int64_t*, double norm, double w)
        {
            acc.add(w * pot->eval(norm));
            terms += static_cast<std::int64_t>(w);
        }
    };
    // sum_over_lattice would lose the term count; run the deterministic
    // branch-parallel reduction directly.
    LatticeSum out;
    Kahan total;
    detail::EnumData e(q);
    detail::parallel_branches(
        e, nullptr, cutoff, true,
        [&] { return Visitor{&pot, {}, 0}; },
        [&](Visitor& v) {
            total.add(v.acc.value());
            out.terms += v.terms;
        });
    out.value = total.value();
    return out;
}

} // namespace

double potential_tail_bound(const Potential& pot, int dim, double rho, double cutoff)
{
    if (pot.kind() == Potential::Kind::exponential) {
        return separated_tail_exponential(dim, rho, cutoff, pot.param(), 0);
    }
    return separated_tail_power(dim, rho, cutoff, pot.param());
}

EnergyValue energy(const PeriodicForm& p, const Potential& pot, double target_tail,
                   const EnergyBudget& budget)
{
    const QuadForm& q = p.q();
    const int d = q.dim();
    const int m = p.m();
    check_convergence(pot, d);
    double alpha0 = min_norm(q);
    double rho = 0.5 * std::sqrt(alpha0);
    double rho0_sq = (m > 1) ? min_difference_norm(p, alpha0) : alpha0;

    double target = target_tail;
    if (!(target > 0.0)) {
        double first_count = static_cast<double>(count_shells(q, alpha0 * 1.0000001).total);
        target = 1e-12 * std::max(first_count, 2.0) * pot.eval(rho0_sq);
    }

    double cutoff = budget.cutoff_norm_sq;
    if (!(cutoff > 0.0)) {
        cutoff = std::max(4.0 * alpha0, rho0_sq * 4.0);
        if (pot.kind() == Potential::Kind::exponential) {
            cutoff = std::max(cutoff, 2.0 / pot.param());
        }
        for (;;) {
            double tail = m * potential_tail_bound(pot, d, rho, cutoff);
            if (tail <= target) {
                break;
            }
            if (static_cast<double>(m) * m * ball_point_estimate(q, cutoff) > budget.max_points) {
                fail(errc::cutoff_overflow, "energy cutoff exceeds the configured budget");
            }
            cutoff *= 1.5;
        }
        if (static_cast<double>(m) * m * ball_point_estimate(q, cutoff) > budget.max_points) {
            fail(errc::cutoff_overflow, "energy cutoff exceeds the configured budget");
        }
    }

    EnergyValue out;
    out.cutoff_norm_sq = cutoff;
    out.tail_bound = m * potential_tail_bound(pot, d, rho, cutoff);

    Kahan total;
    std::int64_t terms = 0;
    LatticeSum ls = lattice_sum(q, pot, cutoff);
    // The m diagonal pairs all contribute the lattice sum.
    total.add(static_cast<double>(m) * ls.value);
    terms += m * ls.terms;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i == j) {
                continue;
            }
            PairSum ps = coset_sum(q, p.translations()[i] - p.translations()[j], pot, cutoff);
            total.add(ps.value);
            terms += ps.terms;
        }
    }
    out.value = total.value() / static_cast<double>(m);
    out.terms_used = terms;
    return out;
}

EnergyValue epstein_zeta(const QuadForm& q, double s, double target_tail, const EnergyBudget& budget)
{
    return energy(PeriodicForm::lattice(q), Potential::inverse_power(s), target_tail, budget);
}

EnergyValue theta_minus_one(const QuadForm& q, double c, double target_tail, const EnergyBudget& budget)
{
    return energy(PeriodicForm::lattice(q), Potential::exponential(c), target_tail, budget);
}

double windowed_energy(const PeriodicForm& p, double radius, const Potential& pot)
{
    if (!(radius > 0.0)) {
        fail(errc::domain_error, "window radius must be positive");
    }
    const QuadForm& q = p.q();
    const int d = q.dim();
    double bound = radius * radius;
    if (ball_point_estimate(q, bound) * p.m() > 2e5) {
        fail(errc::cutoff_overflow, "window holds too many points");
    }
    const Matrix& a = q.chol_factor();
    std::vector<Vector> points;
    for (int i = 0; i < p.m(); ++i) {
        Vector delta = p.translations()[i];
        auto visit = [&](const std::int64_t* x, double norm, double) {
            if (norm > bound * (1.0 + 1e-12)) {
                return;
            }
            Vector y(d);
            for (int k = 0; k < d; ++k) {
                y(k) = static_cast<double>(x[k]) + delta(k);
            }
            points.push_back(a * y);
        };
        std::vector<double> dv(delta.data(), delta.data() + d);
        detail::EnumData e(q);
        detail::Walker<decltype(visit)> w(e, dv.data(), bound, false, visit);
        w.run();
    }
    if (points.size() < 2) {
        fail(errc::window_too_small, "window contains fewer than two points");
    }
    Kahan acc;
    for (size_t i = 0; i < points.size(); ++i) {
        for (size_t j = 0; j < points.size(); ++j) {
            if (i == j) {
                continue;
            }
            acc.add(pot.eval((points[i] - points[j]).squaredNorm()));
        }
    }
    return acc.value() / static_cast<double>(points.size());
}

double energy_truncated(const PeriodicForm& p, const Potential& pot, double cutoff_norm_sq,
                        std::int64_t* terms)
{
    const QuadForm& q = p.q();
    const int m = p.m();
    Kahan total;
    std::int64_t count = 0;
    LatticeSum ls = lattice_sum(q, pot, cutoff_norm_sq);
    total.add(static_cast<double>(m) * ls.value);
    count += m * ls.terms;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i == j) {
                continue;
            }
            PairSum ps = coset_sum(q, p.translations()[i] - p.translations()[j], pot, cutoff_norm_sq);
            total.add(ps.value);
            count += ps.terms;
        }
    }
    if (terms != nullptr) {
        *terms = count;
    }
    return total.value() / static_cast<double>(m);
}

double snap_cutoff(const PeriodicForm& p, double cutoff_norm_sq)
{
    const QuadForm& q = p.q();
    if (q.is_exact() && p.m() == 1) {
        double den = static_cast<double>(q.exact()->den);
        return (std::floor(cutoff_norm_sq * den) + 0.5) / den;
    }
    // Collect the squared-norm spectrum near the requested cutoff and pick
    // the midpoint of the widest gap.
    std::vector<double> norms;
    double lo = 0.85 * cutoff_norm_sq;
    double hi = 1.2 * cutoff_norm_sq;
    auto collect = [&](double norm) {
        if (norm >= lo && norm <= hi) {
            norms.push_back(norm);
        }
    };
    auto lattice_visit = [&](const std::int64_t*, double norm, double) { collect(norm); };
    for_each_lattice_vector(q, hi, lattice_visit);
    for (int i = 0; i < p.m(); ++i) {
        for (int j = 0; j < p.m(); ++j) {
            if (i == j) {
                continue;
            }
            Vector delta = p.translations()[i] - p.translations()[j];
            for (Eigen::Index k = 0; k < delta.size(); ++k) {
                delta(k) -= std::round(delta(k));
            }
            auto visit = [&](const std::int64_t*, double norm, double) { collect(norm); };
            for_each_coset_vector(q, delta, hi, visit);
        }
    }
    if (norms.empty()) {
        return cutoff_norm_sq;
    }
    std::sort(norms.begin(), norms.end());
    norms.erase(std::unique(norms.begin(), norms.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-10 * std::max(1.0, a); }),
                norms.end());
    double best_gap = 0.0;
    double best_mid = cutoff_norm_sq;
    double prev = lo;
    for (double n : norms) {
        double gap = n - prev;
        if (gap > best_gap) {
            best_gap = gap;
            best_mid = 0.5 * (prev + n);
        }
        prev = n;
    }
    double tail_gap = hi - prev;
    if (tail_gap > best_gap) {
        best_mid = 0.5 * (prev + hi);
    }
    return best_mid;
}

} // namespace latopt
