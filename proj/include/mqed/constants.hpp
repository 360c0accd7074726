// constants.hpp: physical constants, unit presets and thermal occupation

#pragma once

#include <cmath>
#include <limits>

#include "mqed/errors.hpp"

namespace mqed {

inline constexpr double pi = 3.14159265358979323846;

// hbar, c, eps0, kB in one consistent unit system.
struct Constants {
    double hbar{1.0};
    double c{1.0};
    double eps0{1.0};
    double kB{1.0};

    static constexpr Constants natural() noexcept { return {}; }

    // CODATA 2018 exact/recommended values.
    static constexpr Constants si() noexcept {
        return {1.054571817e-34, 299792458.0, 8.8541878128e-12, 1.380649e-23};
    }

    bool valid() const noexcept { return hbar > 0.0 && c > 0.0 && eps0 > 0.0 && kB > 0.0; }
};

struct ThermalState {
    double temperature{0.0}; // 0 means vacuum
};

// Mean photon number nbar = 1/(exp(hbar w / kB T) - 1).
inline double thermal_occupation(const ThermalState& state, double omega,
                                 const Constants& k = Constants::natural()) {
    if (!(omega > 0.0)) throw DomainError("thermal_occupation: omega must be > 0");
    if (state.temperature < 0.0) throw DomainError("thermal_occupation: negative temperature");
    if (state.temperature == 0.0) return 0.0;
    const double x = k.hbar * omega / (k.kB * state.temperature);
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

// Occupation factor N(w, T) of the field correlation relation:
// 1 + 2/(exp(hbar w/kB T) - 1) for w > 0 and 2/(exp(hbar w/kB T) - 1) for w < 0.
// The negative branch is the literal expression (it is negative, -> -2 as T -> 0).
inline double correlation_factor(const ThermalState& state, double omega,
                                 const Constants& k = Constants::natural()) {
    if (omega == 0.0) throw DomainError("correlation_factor: omega must be nonzero");
    if (omega > 0.0) return 1.0 + 2.0 * thermal_occupation(state, omega, k);
    if (state.temperature == 0.0) return -2.0;
    return 2.0 / std::expm1(k.hbar * omega / (k.kB * state.temperature));
}

} // namespace mqed
