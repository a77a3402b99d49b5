/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LATOPT_CORE_POTENTIAL_HPP
#define LATOPT_CORE_POTENTIAL_HPP

#include <cmath>
#include <string>

#include "core/common.hpp"

namespace latopt {

/// Pair potential evaluated at squared distance r: either f_c(r) = e^{-c r}
/// or p_s(r) = r^{-s}. Derivatives are taken in the squared-norm variable.
class Potential {
  public:
    enum class Kind { exponential, inverse_power };

    static Potential exponential(double c)
    {
        if (!(c > 0.0)) {
            fail(errc::domain_error, "exponential potential needs c > 0");
        }
        return Potential(Kind::exponential, c);
    }

    static Potential inverse_power(double s)
    {
        if (!(s > 0.0)) {
            fail(errc::domain_error, "inverse power potential needs s > 0");
        }
        return Potential(Kind::inverse_power, s);
    }

    /// Parses the CLI grammar "exp:c=<v>" / "pow:s=<v>".
    static Potential parse(const std::string& spec);

    Kind kind() const { return kind_; }
    double param() const { return param_; }

    double eval(double r) const
    {
        if (!(r > 0.0)) {
            fail(errc::domain_error, "potential evaluated at non-positive squared distance");
        }
        if (kind_ == Kind::exponential) {
            return std::exp(-param_ * r);
        }
        return power_term(r);
    }

    /// f'(r), negative on (0, inf).
    double deriv(double r) const
    {
        if (!(r > 0.0)) {
            fail(errc::domain_error, "potential derivative at non-positive squared distance");
        }
        if (kind_ == Kind::exponential) {
            return -param_ * std::exp(-param_ * r);
        }
        return -param_ * power_term(r) / r;
    }

    std::string str() const;

  private:
    Potential(Kind k, double p) : kind_(k), param_(p) {}

    double power_term(double r) const
    {
        // Small integer exponents dominate the call profile.
        double s = param_;
        auto si = static_cast<int>(s);
        if (s == static_cast<double>(si) && si >= 1 && si <= 8) {
            double p = r;
            for (int k = 1; k < si; ++k) {
                p *= r;
            }
            return 1.0 / p;
        }
        return std::pow(r, -s);
    }

    Kind kind_;
    double param_;
};

} // namespace latopt

#endif
