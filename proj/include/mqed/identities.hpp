// identities.hpp: numerical checks of the identities linking the normal-mode
// and Langevin-noise routes: mode-sum conversion, magic formula (scalar and
// isotropic-tensor loss), its surface-term correction, the planar-decomposition
// lossless limit, and the vacuum field correlation spectrum.

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mqed/constants.hpp"
#include "mqed/errors.hpp"
#include "mqed/greens.hpp"
#include "mqed/linalg.hpp"
#include "mqed/modes.hpp"
#include "mqed/permittivity.hpp"
#include "mqed/quadrature.hpp"

namespace mqed {

struct IdentityReport {
    C33 lhs{C33::Zero()};
    C33 rhs{C33::Zero()};
    double abs_residual{0.0};
    double rel_residual{0.0};
    std::map<std::string, double> metadata;
    std::map<std::string, C33> parts;
};

inline IdentityReport make_report(const C33& lhs, const C33& rhs) {
    IdentityReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.abs_residual = max_abs(C33(lhs - rhs));
    rep.rel_residual = rep.abs_residual / std::max({max_abs(lhs), max_abs(rhs), 1e-300});
    return rep;
}

// ---------------------------------------------------------------------------
// Conversion: (1/pi) int_0^inf dw (w^2/c^2) Im G(r, r0, w) = sum_k (w_k/2) E_k(r) E_k^*(r0)
// ---------------------------------------------------------------------------

enum class ConversionPath { Softened, AnalyticLimit };

inline IdentityReport check_conversion_p1(const ModeSet& modes, const R3& r, const R3& r0,
                                          const QuadratureSpec& spec,
                                          ConversionPath path = ConversionPath::Softened,
                                          const Constants& kc = Constants::natural()) {
    spec.validate();
    if (modes.empty()) throw DomainError("check_conversion_p1: empty ModeSet");
    if (!modes.geometry.contains(r) || !modes.geometry.contains(r0))
        throw DomainError("check_conversion_p1: point outside the cavity");

    C33 rhs = C33::Zero();
    for (const auto& m : modes.entries)
        rhs += (0.5 * m.omega) * (m.field_real(r) * m.field_real(r0).transpose()).cast<cplx>();

    C33 lhs = C33::Zero();
    const double c2 = kc.c * kc.c;
    int intervals = 0;
    if (path == ConversionPath::AnalyticLimit) {
        for (const auto& line : cavity_im_green_lines(r, r0, modes, kc))
            if (line.omega <= spec.omega_max) lhs += (line.omega * line.omega / c2 / pi) * line.weight;
    } else {
        if (!(spec.eta > 0.0)) throw DomainError("check_conversion_p1: softened path requires eta > 0");
        std::vector<C33> dyads;
        dyads.reserve(modes.size());
        for (const auto& m : modes.entries)
            dyads.push_back((m.field_real(r) * m.field_real(r0).transpose()).cast<cplx>());
        const double eta = spec.eta;
        auto f = [&](double w) -> C33 {
            C33 acc = C33::Zero();
            for (std::size_t i = 0; i < modes.size(); ++i) {
                const double d = modes[i].omega * modes[i].omega - w * w;
                acc += (eta * w / (d * d + eta * eta * w * w)) * dyads[i];
            }
            return acc * (w * w / pi);
        };
        std::vector<double> pts{0.0};
        for (double w : modes.distinct_omegas())
            if (w < spec.omega_max) pts.push_back(w);
        pts.push_back(spec.omega_max);
        const auto res = integrate_adaptive(f, std::span<const double>(pts), spec);
        lhs = res.value;
        intervals = res.intervals;
    }
    auto rep = make_report(lhs, rhs);
    rep.metadata["eta"] = path == ConversionPath::Softened ? spec.eta : 0.0;
    rep.metadata["omega_max"] = spec.omega_max;
    rep.metadata["n_modes"] = static_cast<double>(modes.size());
    rep.metadata["n_max"] = modes.n_max;
    rep.metadata["max_mode_omega"] = modes.max_omega();
    rep.metadata["intervals"] = intervals;
    return rep;
}

// ---------------------------------------------------------------------------
// Magic formula: (w^2/c^2) int d^3r' G(r, r') L G^dagger(r0, r') = Im G(r, r0),
// L = (eps - eps^dagger)/2i, for a homogeneous isotropic absorbing bulk.
// ---------------------------------------------------------------------------

namespace detail {

// 1 for t <= 1/2, 0 for t >= 1, C-infinity in between.
inline double smooth_cutoff(double t) {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    const double x = 2.0 * t - 1.0;
    const double a = std::exp(-1.0 / (1.0 - x));
    const double b = std::exp(-1.0 / x);
    return a / (a + b);
}

// Rotations by 2 pi j/6 about `axis`; the average of Rot M Rot^T over them
// is the exact azimuthal average of an equivariant tensor field.
inline std::array<C33, 6> axial_rotations(const R33& frame) {
    std::array<C33, 6> out;
    for (int j = 0; j < 6; ++j) {
        const double phi = 2.0 * pi * j / 6.0;
        R33 Rz = R33::Identity();
        Rz(0, 0) = std::cos(phi);
        Rz(0, 1) = -std::sin(phi);
        Rz(1, 0) = std::sin(phi);
        Rz(1, 1) = std::cos(phi);
        out[j] = (frame * Rz * frame.transpose()).cast<cplx>();
    }
    return out;
}

inline C33 azimuthal_integral(const std::array<C33, 6>& rots, const C33& M) {
    C33 acc = C33::Zero();
    for (const auto& R : rots) acc += R * M * R.transpose();
    return acc * (2.0 * pi / 6.0);
}

// Scalar s with int d^3r' chi(|r' - r|/a) G(r, r') = s I, delta term included.
inline cplx bump_green_integral(cplx k, double a, const QuadratureSpec& spec) {
    auto f = [&](double R) -> cplx { return R * smooth_cutoff(R / a) * std::exp(I_unit * k * R); };
    const std::array<double, 3> pts{0.0, 0.5 * a, a};
    const cplx radial = integrate_adaptive(f, std::span<const double>(pts), spec).value;
    return (2.0 / 3.0) * radial - 1.0 / (3.0 * k * k);
}

struct MagicVolume {
    C33 value{C33::Zero()};
    double bump_radius{0.0};
    double outer_radius{0.0};
};

// int over the ball |r' - (r + r0)/2| <= R_out of G(r, r') L G^dagger(r0, r')
// (without the w^2/c^2 prefactor), L = loss * I.
inline MagicVolume magic_volume_integral(const GreenEvaluator& green, double loss, const R3& r, const R3& r0,
                                         double omega, double R_out, const QuadratureSpec& spec) {
    const R3 sep = r - r0;
    const double rho = sep.norm();
    if (rho == 0.0)
        throw DomainError("magic formula: r = r0 makes the delta-delta product divergent; use r != r0");
    const cplx k = wavenumber(green.bulk_eps(omega), omega, green.constants());
    const R33 frame = frame_with_axis(sep / rho);
    const R3 e1 = frame.col(0), e3 = frame.col(2);
    const auto rots = axial_rotations(frame);
    const double a = 0.25 * rho;
    const R3 mid = 0.5 * (r + r0);

    // Tolerances are anchored to integrand magnitudes: near the singular
    // points the polar integrals cancel far below the size of their integrands.
    const double k0 = omega / green.constants().c;
    const double scale = std::max(max_abs(im(green(r, r0, omega))), std::abs(k) / (6.0 * pi) * 1e-3) /
                         (k0 * k0 * loss);
    QuadratureSpec inner = spec;
    inner.rel_tol = std::min(spec.rel_tol, 1e-10);
    QuadratureSpec outer = spec;
    outer.abs_tol = 1e-2 * spec.rel_tol * scale;

    auto G = [&](const R3& x, const R3& y) -> C33 { return green(x, y, omega); };
    auto point = [&](const R3& c, double R, double th) -> R3 {
        return c + R * (std::sin(th) * e1 + std::cos(th) * e3);
    };

    auto spherical = [&](const R3& c, double R_lo, double R_hi, std::span<const double> rpts, auto&& integrand) {
        auto radial = [&](double R) -> C33 {
            auto polar = [&](double th) -> C33 {
                const C33 M = integrand(point(c, R, th));
                return azimuthal_integral(rots, M) * std::sin(th);
            };
            double size = 0.0;
            for (int j = 1; j < 8; ++j) size = std::max(size, max_abs(polar(j * pi / 8.0)));
            QuadratureSpec local = inner;
            local.abs_tol = std::max(1e-12 * size, 1e-2 * outer.abs_tol / (R_out * std::max(R * R, a * a)));
            return integrate_adaptive(polar, 0.0, pi, local).value * (R * R);
        };
        std::vector<double> pts{R_lo};
        for (double p : rpts)
            if (p > R_lo && p < R_hi) pts.push_back(p);
        pts.push_back(R_hi);
        return integrate_adaptive(radial, std::span<const double>(pts), outer).value;
    };

    const C33 Lg = loss * C33::Identity();
    const cplx ball = bump_green_integral(k, a, inner);

    // Near r: G(r, r') [H(r') - H(r)] chi + ball H(r), H = L G^dagger(r0, .).
    const C33 H_r = Lg * G(r0, r).adjoint();
    auto near_r = [&](const R3& x) -> C33 {
        const double chi = smooth_cutoff((x - r).norm() / a);
        if (chi == 0.0) return C33::Zero();
        return chi * G(r, x) * C33(Lg * G(r0, x).adjoint() - H_r);
    };
    // Near r0: [K(r') - K(r0)] G^dagger(r0, r') chi + K(r0) conj(ball), K = G(r, .) L.
    const C33 K_r0 = G(r, r0) * Lg;
    auto near_r0 = [&](const R3& x) -> C33 {
        const double chi = smooth_cutoff((x - r0).norm() / a);
        if (chi == 0.0) return C33::Zero();
        return chi * C33(G(r, x) * Lg - K_r0) * G(r0, x).adjoint();
    };
    auto far = [&](const R3& x) -> C33 {
        const double w = 1.0 - smooth_cutoff((x - r).norm() / a) - smooth_cutoff((x - r0).norm() / a);
        if (w == 0.0) return C33::Zero();
        return w * G(r, x) * Lg * G(r0, x).adjoint();
    };

    const std::array<double, 1> half{0.5 * a};
    C33 total = spherical(r, 0.0, a, half, near_r) + ball * H_r;
    total += spherical(r0, 0.0, a, half, near_r0) + K_r0 * std::conj(ball);

    std::vector<double> rpts{0.5 * rho - a, 0.5 * rho - 0.5 * a, 0.5 * rho, 0.5 * rho + 0.5 * a, 0.5 * rho + a};
    for (double p = 2.0 * rho; p < R_out; p *= 2.0) rpts.push_back(p);
    total += spherical(mid, 0.0, R_out, rpts, far);

    MagicVolume out;
    out.value = total;
    out.bump_radius = a;
    out.outer_radius = R_out;
    return out;
}

// Isotropic loss level of a permittivity model at w that must match the
// evaluator's bulk medium.
inline double isotropic_loss(const PermittivityModel& eps_model, const GreenEvaluator& green, double omega) {
    if (!green.is_bulk()) throw DomainError("magic formula: requires a bulk Green backend");
    const cplx eps_g = green.bulk_eps(omega);
    const C33 eps = eps_model.eval(R3::Zero(), omega);
    if (!eps_model.is_homogeneous()) throw DomainError("magic formula: bulk reduction needs a homogeneous medium");
    const C33 L = loss_tensor(eps);
    const Eigen::SelfAdjointEigenSolver<C33> es(L);
    if (es.eigenvalues().minCoeff() < -1e-14 * std::max(1.0, max_abs(L)))
        throw DomainError("magic formula: (eps - eps^dagger)/2i must be positive semidefinite");
    if (rel_deviation(eps, C33(eps_g * C33::Identity())) > 1e-12)
        throw DomainError(
            "magic formula: permittivity must be isotropic and equal to the Green backend's bulk medium");
    return eps_g.imag();
}

} // namespace detail

inline IdentityReport check_magic_formula(const GreenEvaluator& green, const PermittivityModel& eps_model,
                                          const R3& r, const R3& r0, double omega,
                                          const QuadratureSpec& spec) {
    spec.validate();
    if (!(omega > 0.0)) throw DomainError("check_magic_formula: omega must be > 0");
    const double delta = detail::isotropic_loss(eps_model, green, omega);
    if (!(delta > 0.0))
        throw DomainError("check_magic_formula: Im eps must be > 0; some level of loss must be maintained");
    const cplx k = wavenumber(green.bulk_eps(omega), omega, green.constants());
    const double rho = (r - r0).norm();
    const double R_cut = std::max(std::log(1e8) / (2.0 * k.imag()), 4.0 * rho);
    const auto vol = detail::magic_volume_integral(green, delta, r, r0, omega, R_cut, spec);
    const double k0sq = omega * omega / (green.constants().c * green.constants().c);
    auto rep = make_report(C33(k0sq * vol.value), im(green(r, r0, omega)));
    rep.metadata["delta"] = delta;
    rep.metadata["omega"] = omega;
    rep.metadata["k_rho"] = std::abs(k) * rho;
    rep.metadata["R_cut"] = R_cut;
    rep.metadata["bump_radius"] = vol.bump_radius;
    return rep;
}

// ---------------------------------------------------------------------------
// Surface-corrected relation on a sphere Sigma of radius R about (r + r0)/2:
//   (w^2/c^2) int_ball Im eps G G^dagger + (w/c) sqrt(eps) oint G^T(r', r) (I - R R) G^*(r', r0) = Im G
// ---------------------------------------------------------------------------

namespace detail {

// Product rule: Gauss-Legendre in cos(theta), trapezoid in phi with 2 n nodes.
template <class F>
C33 sphere_quadrature(F&& f, int n_theta) {
    const auto gl = gauss_legendre(n_theta);
    const int n_phi = 2 * n_theta;
    C33 acc = C33::Zero();
    for (int i = 0; i < n_theta; ++i) {
        const double ct = gl.nodes[i];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * pi * j / n_phi;
            const R3 n{st * std::cos(phi), st * std::sin(phi), ct};
            acc += (gl.weights[i] * 2.0 * pi / n_phi) * f(n);
        }
    }
    return acc;
}

} // namespace detail

inline IdentityReport check_surface_term(const GreenEvaluator& green, double R, const R3& r, const R3& r0,
                                         double omega, const QuadratureSpec& spec,
                                         double surface_tol = 1e-8) {
    spec.validate();
    if (!green.is_bulk()) throw DomainError("check_surface_term: requires a bulk Green backend");
    if (!(omega > 0.0)) throw DomainError("check_surface_term: omega must be > 0");
    const cplx eps = green.bulk_eps(omega);
    const cplx k = wavenumber(eps, omega, green.constants());
    const R3 mid = 0.5 * (r + r0);
    const double clearance = R - std::max((r - mid).norm(), (r0 - mid).norm());
    if (!(clearance >= 2.0 / std::abs(k)))
        throw DomainError("check_surface_term: sphere too small, points must lie >= 2/|k| inside it");
    const double k0 = omega / green.constants().c;

    auto integrand = [&](const R3& n) -> C33 {
        const R3 x = mid + R * n;
        const C33 P = (R33::Identity() - n * n.transpose()).cast<cplx>();
        return green(x, r, omega).transpose() * P * green(x, r0, omega).conjugate();
    };
    int n_theta = 13; // 13 x 26 = 338 nodes
    C33 surf = detail::sphere_quadrature(integrand, n_theta);
    double change = 0.0;
    for (;;) {
        const C33 next = detail::sphere_quadrature(integrand, 2 * n_theta);
        n_theta *= 2;
        change = rel_deviation(next, surf);
        surf = next;
        if (change <= surface_tol) break;
        if (n_theta >= 832)
            throw ConvergenceError("check_surface_term: sphere quadrature not self-consistent",
                                   max_abs(surf), change * max_abs(surf));
    }
    surf *= k0 * std::sqrt(eps) * R * R;

    C33 vol = C33::Zero();
    if (eps.imag() > 0.0)
        vol = (k0 * k0) * detail::magic_volume_integral(green, eps.imag(), r, r0, omega, R, spec).value;

    auto rep = make_report(C33(vol + surf), im(green(r, r0, omega)));
    rep.parts["volume"] = vol;
    rep.parts["surface"] = surf;
    rep.metadata["R"] = R;
    rep.metadata["kR"] = std::abs(k) * R;
    rep.metadata["im_k_R"] = k.imag() * R;
    rep.metadata["sphere_nodes"] = 2.0 * n_theta * n_theta;
    rep.metadata["sphere_self_consistency"] = change;
    return rep;
}

// ---------------------------------------------------------------------------
// Lossless limit of the planar decomposition:
//   Im G = (1/16 pi^2) int d^2k e^{i k.R} [Re(1/k_perp)(T + T~) + i Im(1/k_perp)(T - T~)],
//   T(k) = sum_sigma e_sigma e_sigma e^{i k_perp |dz|},  T~(k) = T^*(-k).
// The azimuth is summed by the periodic trapezoid rule on the polarization
// vectors directly; the radial integral uses the Sommerfeld radial splitter.
// ---------------------------------------------------------------------------

inline IdentityReport check_appendix_lossless_limit(const R3& r, const R3& r0, double omega,
                                                    const QuadratureSpec& spec, double k_max = 0.0,
                                                    const Constants& kc = Constants::natural()) {
    spec.validate();
    if (!(omega > 0.0)) throw DomainError("check_appendix_lossless_limit: omega must be > 0");
    const R3 sep = r - r0;
    if (sep.norm() == 0.0)
        throw DomainError("check_appendix_lossless_limit: coincidence limit r = r0 (z = z0, no lateral offset)");
    const double k = omega / kc.c;
    const cplx kc_ = k;

    const R33 Q = detail::decomposition_frame(sep);
    const R3 loc = Q.transpose() * sep;
    const double dz = loc.z();
    const double adz = std::abs(dz);
    const double X = loc.x(), Y = loc.y();
    const double rho_par = std::hypot(X, Y);
    const int branch = dz >= 0.0 ? 1 : -1;
    if (!(k_max > 0.0)) {
        double scale = adz;
        if (rho_par > 0.0 && rho_par < scale) scale = std::max(rho_par, 0.1 * adz);
        k_max = 30.0 * k + 40.0 / scale;
    }

    auto T_of = [&](double kx, double ky) -> C33 {
        const auto e = polarization_sp(kx, ky, kc_, branch);
        const cplx kperp = sqrt_upper(kc_ * kc_ - (kx * kx + ky * ky));
        return (outer(e.s, e.s) + outer(e.p, e.p)) * std::exp(I_unit * kperp * adz);
    };
    auto integrand = [&](double kpar) -> C33 {
        const cplx kperp = sqrt_upper(kc_ * kc_ - kpar * kpar);
        const cplx inv = 1.0 / kperp;
        const double arg = kpar * rho_par;
        const int n_phi = 2 * static_cast<int>(std::ceil(0.5 * (arg + 12.0 * std::cbrt(arg + 1.0)))) + 24;
        C33 acc = C33::Zero();
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * pi * j / n_phi;
            const double kx = kpar * std::cos(phi), ky = kpar * std::sin(phi);
            const C33 T = T_of(kx, ky);
            const C33 Tt = T_of(-kx, -ky).conjugate();
            const C33 bracket = inv.real() * (T + Tt) + I_unit * inv.imag() * (T - Tt);
            acc += std::exp(I_unit * (kx * X + ky * Y)) * bracket;
        }
        return acc * (2.0 * pi / n_phi * kpar);
    };
    const auto res = sommerfeld_radial(integrand, kc_, k_max, spec);
    const C33 Qc = Q.cast<cplx>();
    const double pref = 1.0 / (16.0 * pi * pi);
    const C33 prop = Qc * (pref * res.propagating) * Qc.transpose();
    const C33 evan = Qc * (pref * res.evanescent) * Qc.transpose();

    auto rep = make_report(C33(prop + evan), im(bulk_green(r, r0, omega, 1.0, kc)));
    rep.parts["propagating"] = prop;
    rep.parts["evanescent"] = evan;
    rep.metadata["k_max"] = k_max;
    rep.metadata["k_rho"] = k * sep.norm();
    rep.metadata["truncation_warning"] = res.truncation_warning ? 1.0 : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Vacuum correlation spectrum: <E E^dagger> = (hbar k0^2 / 2 eps0^2) N(w, T) Im G(r, r, w) delta(w - w').
// Returns the tensor multiplying the delta function.
// ---------------------------------------------------------------------------

inline C33 vacuum_correlation_spectrum(const GreenEvaluator& green, const R3& r, double omega,
                                       const ThermalState& thermal) {
    if (!(omega > 0.0)) throw DomainError("vacuum_correlation_spectrum: omega must be > 0");
    const Constants& kc = green.constants();
    const double k0 = omega / kc.c;
    const double N = correlation_factor(thermal, omega, kc);
    return (kc.hbar * k0 * k0 / (2.0 * kc.eps0 * kc.eps0) * N) * green.im_coincidence(r, omega);
}

} // namespace mqed
