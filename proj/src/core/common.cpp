/* This file is part of latopt, a toolkit for lattice energies and
 * local optimality certificates.
 *
 * Copyright (c) 2026 the latopt developers.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "core/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace latopt {

int thread_count()
{
    static const int n = [] {
        if (const char* env = std::getenv("LATOPT_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) {
                return std::min(v, 64);
            }
        }
        unsigned hw = std::thread::hardware_concurrency();
        return std::clamp<int>(static_cast<int>(hw ? hw : 1), 1, 16);
    }();
    return n;
}

} // namespace latopt
