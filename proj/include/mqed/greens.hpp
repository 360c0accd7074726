// greens.hpp: dyadic Green tensor G(r, r0, w) of
//   curl curl G - (w^2/c^2) eps G = I delta(r - r0)
// by three backends: bulk closed form, bulk (2+1)-D Sommerfeld decomposition
// and the PEC-cavity mode sum.

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mqed/constants.hpp"
#include "mqed/errors.hpp"
#include "mqed/linalg.hpp"
#include "mqed/modes.hpp"
#include "mqed/permittivity.hpp"
#include "mqed/quadrature.hpp"

namespace mqed {

// k = sqrt(eps) w / c on the Im k >= 0 sheet.
inline cplx wavenumber(cplx eps, double omega, const Constants& k = Constants::natural()) {
    cplx kk = std::sqrt(eps) * (omega / k.c);
    if (kk.imag() < 0.0) kk = -kk;
    return kk;
}

// Closed-form bulk tensor for separation vector rho != 0 and wavenumber k,
// delta term excluded:
//   -exp(ik rho)/(4 pi k^2 rho^3) {[1 - ik rho - (k rho)^2] I - [3 - 3ik rho - (k rho)^2] e e}
inline C33 bulk_green_k(const R3& rho_vec, cplx k) {
    const double rho = rho_vec.norm();
    if (rho == 0.0)
        throw DomainError("bulk_green: coincidence limit r = r0; use im_green_coincidence");
    const R3 e = rho_vec / rho;
    const cplx ikr = I_unit * k * rho;
    const cplx kr2 = (k * rho) * (k * rho);
    const cplx pref = -std::exp(ikr) / (4.0 * pi * k * k * rho * rho * rho);
    const cplx a = 1.0 - ikr - kr2;
    const cplx b = 3.0 - 3.0 * ikr - kr2;
    return pref * (a * C33::Identity() - b * (e * e.transpose()).cast<cplx>());
}

inline C33 bulk_green(const R3& r, const R3& r0, double omega, cplx eps,
                      const Constants& k = Constants::natural()) {
    if (omega == 0.0) throw DomainError("bulk_green: omega must be nonzero");
    return bulk_green_k(r - r0, wavenumber(eps, omega, k));
}

// Finite coincidence limit of Im G for a lossless bulk: sqrt(eps) w/(6 pi c) I.
inline C33 im_green_coincidence(double omega, cplx eps, const Constants& k = Constants::natural()) {
    if (!(omega > 0.0)) throw DomainError("im_green_coincidence: omega must be > 0");
    if (eps.imag() > 0.0)
        throw DomainError("im_green_coincidence: Im G(r,r,w) diverges inside an absorbing medium");
    if (eps.imag() < 0.0 || !(eps.real() > 0.0))
        throw DomainError("im_green_coincidence: requires real eps > 0");
    return (std::sqrt(eps.real()) * omega / (6.0 * pi * k.c)) * C33::Identity();
}

// ---------------------------------------------------------------------------
// (2+1)-D decomposition
// ---------------------------------------------------------------------------

// s- and p-polarization vectors for in-plane wavevector (kx, ky) and branch
// sign (+1 for waves travelling to +z). Transverse to (kx, ky, +-k_perp) and
// normalized with the unconjugated product e . e = 1.
struct PolarizationPair {
    C3 s;
    C3 p;
};

inline PolarizationPair polarization_sp(double kx, double ky, cplx k, int branch) {
    const double kpar = std::hypot(kx, ky);
    if (kpar == 0.0) throw DomainError("polarization_sp: k_parallel must be > 0");
    const cplx kperp = sqrt_upper(k * k - kpar * kpar);
    const double sgn = branch >= 0 ? 1.0 : -1.0;
    PolarizationPair out;
    out.s = C3(ky / kpar, -kx / kpar, 0.0);
    out.p = C3(-sgn * kperp * kx / kpar, -sgn * kperp * ky / kpar, kpar) / k;
    return out;
}

struct SommerfeldGreen {
    C33 value{C33::Zero()};
    C33 propagating{C33::Zero()};
    C33 evanescent{C33::Zero()};
    double k_max{0.0};
    bool truncation_warning{false};
    bool rotated{false}; // decomposition axis tilted away from z
};

namespace detail {

// Decomposition axis: z unless the separation is nearly lateral, in which case
// the axis is tilted 45 degrees toward the separation so that exp(ik_perp|dz|)
// decays. The bulk medium is isotropic, so G rotates covariantly.
inline R33 decomposition_frame(const R3& sep) {
    const double rho = sep.norm();
    if (std::abs(sep.z()) >= 0.25 * rho) return R33::Identity();
    const R3 rhat = sep / rho;
    R3 u = R3::UnitZ() - rhat.z() * rhat;
    u.normalize();
    return frame_with_axis((rhat + u).normalized());
}

// Azimuthal averages of the s/p dyads for lateral offset (rho_par, phi0),
// multiplied by the radial weight kpar exp(i k_perp |dz|)/k_perp.
inline C33 sommerfeld_integrand(double kpar, cplx k, double rho_par, double cos1, double sin1,
                                double cos2, double sin2, double dz) {
    const cplx kperp = sqrt_upper(k * k - kpar * kpar);
    const double u = kpar * rho_par;
    const double j0 = std::cyl_bessel_j(0.0, u);
    const double j1 = std::cyl_bessel_j(1.0, u);
    const double j2 = std::cyl_bessel_j(2.0, u);
    const double avg_cc = pi * (j0 - j2 * cos2);
    const double avg_ss = pi * (j0 + j2 * cos2);
    const double avg_cs = -pi * j2 * sin2;
    const cplx avg_c = 2.0 * pi * I_unit * j1 * cos1;
    const cplx avg_s = 2.0 * pi * I_unit * j1 * sin1;
    const double avg_1 = 2.0 * pi * j0;
    const double sgn = dz >= 0.0 ? 1.0 : -1.0;
    const cplx q = kperp * kperp / (k * k);
    const cplx m = kperp * kpar / (k * k);

    C33 M;
    M(0, 0) = avg_ss + q * avg_cc;
    M(1, 1) = avg_cc + q * avg_ss;
    M(0, 1) = M(1, 0) = -avg_cs + q * avg_cs;
    M(0, 2) = M(2, 0) = -sgn * m * avg_c;
    M(1, 2) = M(2, 1) = -sgn * m * avg_s;
    M(2, 2) = (kpar * kpar / (k * k)) * avg_1;
    return M * (kpar * std::exp(I_unit * kperp * std::abs(dz)) / kperp);
}

} // namespace detail

inline SommerfeldGreen bulk_green_sommerfeld_detail(const R3& r, const R3& r0, double omega, cplx eps,
                                                    const QuadratureSpec& spec,
                                                    double k_max_multiplier = 30.0,
                                                    const Constants& kc = Constants::natural()) {
    const R3 sep = r - r0;
    if (sep.norm() == 0.0)
        throw DomainError("bulk_green_sommerfeld: coincidence limit r = r0; use im_green_coincidence");
    if (!(omega > 0.0)) throw DomainError("bulk_green_sommerfeld: omega must be > 0");
    const cplx k = wavenumber(eps, omega, kc);

    const R33 Q = detail::decomposition_frame(sep);
    const R3 loc = Q.transpose() * sep;
    const double dz = loc.z();
    const double rho_par = std::hypot(loc.x(), loc.y());
    const double phi0 = rho_par > 0.0 ? std::atan2(loc.y(), loc.x()) : 0.0;
    const double c1 = std::cos(phi0), s1 = std::sin(phi0);
    const double c2 = std::cos(2 * phi0), s2 = std::sin(2 * phi0);

    const double adz = std::abs(dz);
    double scale = adz;
    if (rho_par > 0.0 && rho_par < scale) scale = std::max(rho_par, 0.1 * adz);
    const double k_max = k_max_multiplier * std::abs(k) + 40.0 / scale;

    auto f = [&](double kpar) {
        return detail::sommerfeld_integrand(kpar, k, rho_par, c1, s1, c2, s2, dz);
    };
    const auto res = sommerfeld_radial(f, k, k_max, spec);
    const cplx pref = I_unit / (8.0 * pi * pi);
    const C33 Qc = Q.cast<cplx>();
    SommerfeldGreen out;
    out.propagating = Qc * (pref * res.propagating) * Qc.transpose();
    out.evanescent = Qc * (pref * res.evanescent) * Qc.transpose();
    out.value = out.propagating + out.evanescent;
    out.k_max = k_max;
    out.truncation_warning = res.truncation_warning;
    out.rotated = !Q.isIdentity();
    return out;
}

inline C33 bulk_green_sommerfeld(const R3& r, const R3& r0, double omega, cplx eps, const QuadratureSpec& spec,
                                 const Constants& kc = Constants::natural()) {
    return bulk_green_sommerfeld_detail(r, r0, omega, eps, spec, 30.0, kc).value;
}

// ---------------------------------------------------------------------------
// Cavity mode sum
// ---------------------------------------------------------------------------

struct CavityGreen {
    C33 value{C33::Zero()};
    double max_mode_omega{0.0};
};

// sum_k c^2 E_k(r) E_k^*(r0) / (w_k^2 - w^2 - i eta w)  (retarded softening).
inline CavityGreen cavity_green(const R3& r, const R3& r0, double omega, const ModeSet& modes, double eta,
                                const Constants& kc = Constants::natural()) {
    if (eta < 0.0) throw DomainError("cavity_green: eta must be >= 0");
    if (!modes.geometry.contains(r) || !modes.geometry.contains(r0))
        throw DomainError("cavity_green: point outside the cavity");
    CavityGreen out;
    const double c2 = kc.c * kc.c;
    for (const auto& mode : modes.entries) {
        const cplx den = mode.omega * mode.omega - omega * omega - I_unit * eta * omega;
        if (eta == 0.0 && std::abs(den) <= 1e-14 * mode.omega * mode.omega)
            throw DomainError("cavity_green: omega coincides with a cavity eigenfrequency and eta = 0");
        const R3 a = mode.field_real(r);
        const R3 b = mode.field_real(r0);
        out.value += (c2 / den) * (a * b.transpose()).cast<cplx>();
    }
    out.max_mode_omega = modes.max_omega();
    return out;
}

// Im G(r, r0, w) of the mode sum in the eta -> 0 limit is a sum of lines
// weight_k delta(w - w_k) with weight_k = (pi c^2 / 2 w_k) E_k(r) E_k^*(r0).
struct TensorLine {
    double omega;
    C33 weight;
};

inline std::vector<TensorLine> cavity_im_green_lines(const R3& r, const R3& r0, const ModeSet& modes,
                                                     const Constants& kc = Constants::natural()) {
    if (!modes.geometry.contains(r) || !modes.geometry.contains(r0))
        throw DomainError("cavity_im_green_lines: point outside the cavity");
    std::vector<TensorLine> lines;
    lines.reserve(modes.size());
    for (const auto& mode : modes.entries) {
        const R3 a = mode.field_real(r);
        const R3 b = mode.field_real(r0);
        const double w = pi * kc.c * kc.c / (2.0 * mode.omega);
        lines.push_back({mode.omega, (w * (a * b.transpose())).cast<cplx>()});
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

struct BulkClosedForm {
    PermittivityModel eps{PermittivityModel::vacuum()};
};

struct BulkSommerfeld {
    PermittivityModel eps{PermittivityModel::vacuum()};
    QuadratureSpec spec{};
    double k_max_multiplier{30.0};
};

struct CavityModeSum {
    std::shared_ptr<const ModeSet> modes;
    double eta{0.0};
};

class GreenEvaluator {
public:
    using Backend = std::variant<BulkClosedForm, BulkSommerfeld, CavityModeSum>;

    explicit GreenEvaluator(Backend backend, Constants constants = Constants::natural())
        : backend_(std::move(backend)), constants_(constants) {
        if (const auto* cav = std::get_if<CavityModeSum>(&backend_)) {
            if (!cav->modes) throw DomainError("GreenEvaluator: cavity backend without a ModeSet");
            if (cav->eta < 0.0) throw DomainError("GreenEvaluator: eta must be >= 0");
        }
    }

    const Backend& backend() const noexcept { return backend_; }
    const Constants& constants() const noexcept { return constants_; }

    bool is_bulk() const noexcept { return !std::holds_alternative<CavityModeSum>(backend_); }
    bool is_cavity() const noexcept { return std::holds_alternative<CavityModeSum>(backend_); }

    std::string name() const {
        switch (backend_.index()) {
            case 0: return "closed_form";
            case 1: return "sommerfeld";
            default: return "mode_sum";
        }
    }

    const PermittivityModel& bulk_model() const {
        if (const auto* b = std::get_if<BulkClosedForm>(&backend_)) return b->eps;
        if (const auto* s = std::get_if<BulkSommerfeld>(&backend_)) return s->eps;
        throw DomainError("GreenEvaluator: not a bulk backend");
    }

    cplx bulk_eps(double omega) const { return bulk_model().scalar(omega); }

    const ModeSet& modes() const {
        if (const auto* c = std::get_if<CavityModeSum>(&backend_)) return *c->modes;
        throw DomainError("GreenEvaluator: not a cavity backend");
    }

    double eta() const {
        if (const auto* c = std::get_if<CavityModeSum>(&backend_)) return c->eta;
        return 0.0;
    }

    C33 operator()(const R3& r, const R3& r0, double omega) const {
        return std::visit(
            [&](const auto& b) -> C33 {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, BulkClosedForm>) {
                    return bulk_green(r, r0, omega, b.eps.scalar(omega), constants_);
                } else if constexpr (std::is_same_v<T, BulkSommerfeld>) {
                    if (omega < 0.0) {
                        // Schwarz reflection G(-w) = G*(w) for real w.
                        return bulk_green_sommerfeld_detail(r, r0, -omega, b.eps.scalar(-omega), b.spec,
                                                            b.k_max_multiplier, constants_)
                            .value.conjugate();
                    }
                    return bulk_green_sommerfeld_detail(r, r0, omega, b.eps.scalar(omega), b.spec,
                                                        b.k_max_multiplier, constants_)
                        .value;
                } else {
                    return cavity_green(r, r0, omega, *b.modes, b.eta, constants_).value;
                }
            },
            backend_);
    }

    // Im G(r, r, w). Bulk backends use the finite lossless coincidence limit and
    // throw inside absorbing media; the cavity backend sums its softened modes.
    C33 im_coincidence(const R3& r, double omega) const {
        if (is_bulk()) return im_green_coincidence(omega, bulk_eps(omega), constants_);
        const auto& cav = std::get<CavityModeSum>(backend_);
        return im(cavity_green(r, r, omega, *cav.modes, cav.eta, constants_).value);
    }

    // Line representation of Im G(r, r0, .) in the eta -> 0 limit; only the
    // cavity backend has one.
    std::optional<std::vector<TensorLine>> im_lines(const R3& r, const R3& r0) const {
        if (!is_cavity()) return std::nullopt;
        return cavity_im_green_lines(r, r0, modes(), constants_);
    }

    // Frequencies where the backend's spectral weight is sharply peaked.
    std::vector<double> spectral_breakpoints() const {
        if (!is_cavity()) return {};
        return modes().distinct_omegas();
    }

private:
    Backend backend_;
    Constants constants_;
};

} // namespace mqed
