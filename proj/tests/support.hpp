#pragma once

// Solved waves shared by the test binaries.  Solving is the slow part of most
// tests, so each (c, omega, N) point is computed once per process.

#include <map>
#include <tuple>

#include "rchwave/wave_family.hpp"

namespace rchwave::testing {

/// Converged wave at speed c.  By default steep waves (c > 0.75 omega) get 256
/// modes so that off-grid accuracy stays near roundoff.
inline const WavePoint& wave(double c, double omega = 1.0, int n_modes = 0)
{
    if (n_modes == 0) n_modes = c > 0.75 * omega ? 256 : 128;
    static std::map<std::tuple<double, double, int>, WavePoint> cache;
    const auto key = std::make_tuple(c, omega, n_modes);
    auto it = cache.find(key);
    if (it == cache.end()) {
        SolverOptions opt;
        opt.n_modes = n_modes;
        it = cache.emplace(key, solve_wave(c, omega, opt)).first;
    }
    return it->second;
}

/// Zero wave at speed c; the linear operators reduce to constant coefficients.
inline WavePoint trivial_point(double c, double omega, int n_modes = 16)
{
    WavePoint w;
    w.phi = WaveProfile(Grid(n_modes));
    w.c = c;
    w.omega = omega;
    w.min_gap = c;
    return w;
}

inline Vec samples(const Grid& g, double (*f)(double))
{
    Vec v(g.size());
    for (int j = 0; j < g.size(); ++j) v[j] = f(g.nodes()[j]);
    return v;
}

}  // namespace rchwave::testing
