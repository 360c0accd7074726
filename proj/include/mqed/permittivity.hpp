// permittivity.hpp: causal relative permittivity models eps(r, w)

#pragma once

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "mqed/errors.hpp"
#include "mqed/linalg.hpp"

namespace mqed {

struct ConstantScalar {
    cplx eps{1.0, 0.0};
};

struct LorentzPole {
    double omega_p;   // oscillator strength (plasma frequency)
    double omega_0;   // resonance; 0 gives a Drude pole
    double gamma;     // damping
};

// eps(w) = eps_inf + sum_j wp_j^2 / (w0_j^2 - w^2 - i gamma_j w)
struct DrudeLorentz {
    double eps_inf{1.0};
    std::vector<LorentzPole> poles;
};

struct ConstantTensor {
    C33 eps{C33::Identity()};
};

struct Box {
    R3 lo;
    R3 hi;
    bool contains(const R3& r) const {
        return (r.array() >= lo.array()).all() && (r.array() <= hi.array()).all();
    }
};

struct Sphere {
    R3 center;
    double radius;
    bool contains(const R3& r) const { return (r - center).norm() <= radius; }
};

using Region = std::variant<Box, Sphere>;

inline bool region_contains(const Region& region, const R3& r) {
    return std::visit([&](const auto& g) { return g.contains(r); }, region);
}

class PermittivityModel;

// First matching region wins; background applies elsewhere (if present).
struct PiecewiseRegions {
    std::vector<std::pair<Region, std::shared_ptr<const PermittivityModel>>> regions;
    std::shared_ptr<const PermittivityModel> background;
};

class PermittivityModel {
public:
    using Variant = std::variant<ConstantScalar, DrudeLorentz, ConstantTensor, PiecewiseRegions>;

    PermittivityModel() : v_(ConstantScalar{}) {}
    PermittivityModel(ConstantScalar m) : v_(std::move(m)) {}
    PermittivityModel(DrudeLorentz m) : v_(std::move(m)) {}
    PermittivityModel(ConstantTensor m) : v_(std::move(m)) {}
    PermittivityModel(PiecewiseRegions m) : v_(std::move(m)) {}

    static PermittivityModel vacuum() { return ConstantScalar{1.0}; }

    const Variant& variant() const noexcept { return v_; }

    // eps(r, w) as a tensor; scalar variants return eps * I.
    C33 eval(const R3& r, cplx omega) const;

    // Scalar value for homogeneous isotropic models (bulk Green backends).
    cplx scalar(cplx omega) const;

    bool is_homogeneous() const noexcept { return !std::holds_alternative<PiecewiseRegions>(v_); }

private:
    Variant v_;
};

namespace detail {

// Constants are the w > 0 value, continued to Re w < 0 by eps(-w*) = eps*(w).
inline cplx reflect_constant(cplx eps, cplx omega) {
    return omega.real() < 0.0 ? std::conj(eps) : eps;
}

inline cplx drude_lorentz(const DrudeLorentz& m, cplx omega) {
    cplx eps = m.eps_inf;
    for (const auto& p : m.poles) {
        const cplx den = p.omega_0 * p.omega_0 - omega * omega - I_unit * p.gamma * omega;
        if (den == cplx{0.0, 0.0})
            throw DomainError("DrudeLorentz: frequency hits an undamped pole");
        eps += p.omega_p * p.omega_p / den;
    }
    return eps;
}

} // namespace detail

inline C33 PermittivityModel::eval(const R3& r, cplx omega) const {
    return std::visit(
        [&](const auto& m) -> C33 {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantScalar>) {
                return detail::reflect_constant(m.eps, omega) * C33::Identity();
            } else if constexpr (std::is_same_v<T, DrudeLorentz>) {
                return detail::drude_lorentz(m, omega) * C33::Identity();
            } else if constexpr (std::is_same_v<T, ConstantTensor>) {
                return omega.real() < 0.0 ? C33(m.eps.conjugate()) : m.eps;
            } else {
                for (const auto& [region, model] : m.regions)
                    if (region_contains(region, r)) return model->eval(r, omega);
                if (m.background) return m.background->eval(r, omega);
                throw DomainError("PiecewiseRegions: position outside all regions and no background");
            }
        },
        v_);
}

inline cplx PermittivityModel::scalar(cplx omega) const {
    if (!is_homogeneous()) throw DomainError("permittivity: piecewise model is not a bulk scalar");
    const C33 e = eval(R3::Zero(), omega);
    const C33 iso = e(0, 0) * C33::Identity();
    if (max_abs(C33(e - iso)) > 1e-14 * std::max(1.0, std::abs(e(0, 0))))
        throw DomainError("permittivity: anisotropic tensor where a scalar is required");
    return e(0, 0);
}

// (eps - eps^dagger)/2i, the loss tensor T T^dagger.
inline C33 loss_tensor(const C33& eps) { return (eps - eps.adjoint()) / (2.0 * I_unit); }

} // namespace mqed
