// oracles.hpp: independent reference computations shared by the tests.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "mqed/mqed.hpp"

namespace oracle {

using mqed::cplx;

// Composite Simpson with n (even) panels.
template <class F>
auto simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    auto acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc = acc + (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * (h / 3.0);
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(g);
}

inline mqed::R3 random_vec(std::mt19937_64& g, double a, double b) {
    return {uniform(g, a, b), uniform(g, a, b), uniform(g, a, b)};
}

// Richardson extrapolation to h -> 0 of samples f(h), f(h/2), ... assuming an
// even power series in h.
inline double richardson_even(const std::vector<double>& v) {
    std::vector<double> t = v;
    double p = 4.0;
    for (std::size_t lvl = 1; lvl < t.size(); ++lvl, p *= 4.0)
        for (std::size_t i = t.size() - 1; i >= lvl; --i) t[i] = (p * t[i] - t[i - 1]) / (p - 1.0);
    return t.back();
}

} // namespace oracle
