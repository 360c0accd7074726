// modes.hpp: PEC rectangular-cavity eigenmodes, plane-wave modes and
// normal-mode coupling constants

#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>
#include <vector>

#include "mqed/atom.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"
#include "mqed/linalg.hpp"
#include "mqed/permittivity.hpp"

namespace mqed {

// Box [0,Lx] x [0,Ly] x [0,Lz] with a uniform, real, nondispersive filling.
struct CavityGeometry {
    double Lx{1.0}, Ly{1.0}, Lz{1.0};
    PermittivityModel background{PermittivityModel::vacuum()};

    double volume() const noexcept { return Lx * Ly * Lz; }
    R3 lengths() const { return {Lx, Ly, Lz}; }

    bool contains(const R3& r) const {
        return r.x() >= 0.0 && r.x() <= Lx && r.y() >= 0.0 && r.y() <= Ly && r.z() >= 0.0 && r.z() <= Lz;
    }

    // Real scalar eps_b; throws for lossy, dispersive, anisotropic or piecewise fillings.
    double background_eps() const {
        if (!background.is_homogeneous())
            throw DomainError("CavityGeometry: NMQED requires a position-independent filling");
        if (const auto* dl = std::get_if<DrudeLorentz>(&background.variant()); dl && !dl->poles.empty())
            throw DomainError("CavityGeometry: NMQED requires a nondispersive filling");
        const cplx e = background.scalar(1.0);
        if (e.imag() != 0.0 || !(e.real() > 0.0))
            throw DomainError("CavityGeometry: NMQED requires a real, positive (Hermitian) permittivity");
        return e.real();
    }
};

struct ModeIndex {
    int m{0}, n{0}, p{0};
    int branch{1}; // polarization branch, 1 or 2

    auto tie() const { return std::tie(m, n, p, branch); }
    bool operator==(const ModeIndex& o) const { return tie() == o.tie(); }
    bool operator<(const ModeIndex& o) const { return tie() < o.tie(); }
    bool same_triple(const ModeIndex& o) const { return m == o.m && n == o.n && p == o.p; }
    int zero_count() const { return (m == 0) + (n == 0) + (p == 0); }
};

// E(r) = (Ax cx sy sz, Ay sx cy sz, Az sx sy cz), c/s = cos/sin(k_i x_i).
// The amplitude is transverse to the wavevector and normalized so that
// int eps_b |E|^2 d^3r = 1 over the box.
struct ModeEntry {
    ModeIndex index;
    double omega{0.0};
    R3 wavevector{R3::Zero()};
    R3 amplitude{R3::Zero()};

    R3 field_real(const R3& r) const {
        const R3 kr = wavevector.cwiseProduct(r);
        const double cx = std::cos(kr.x()), cy = std::cos(kr.y()), cz = std::cos(kr.z());
        const double sx = std::sin(kr.x()), sy = std::sin(kr.y()), sz = std::sin(kr.z());
        return {amplitude.x() * cx * sy * sz, amplitude.y() * sx * cy * sz, amplitude.z() * sx * sy * cz};
    }
    C3 field(const R3& r) const { return to_c3(field_real(r)); }
};

struct ModeSet {
    CavityGeometry geometry;
    double eps_b{1.0};
    int n_max{0};
    std::vector<ModeEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
    const ModeEntry& operator[](std::size_t i) const { return entries[i]; }
    double max_omega() const { return entries.empty() ? 0.0 : entries.back().omega; }

    // Distinct eigenfrequencies, ascending (breakpoints for frequency quadrature).
    std::vector<double> distinct_omegas(double rel_tol = 1e-13) const {
        std::vector<double> out;
        for (const auto& e : entries)
            if (out.empty() || e.omega - out.back() > rel_tol * e.omega) out.push_back(e.omega);
        return out;
    }
};

// 2 N^3 modes with all indices nonzero plus 3 N^2 with exactly one zero.
inline std::size_t expected_mode_count(int n_max) {
    const auto n = static_cast<std::size_t>(n_max);
    return 2 * n * n * n + 3 * n * n;
}

namespace detail {

// Orthonormal basis of the plane orthogonal to k, from Gram-Schmidt of the
// projected Cartesian axes in x, y, z order.
inline std::vector<R3> transverse_basis(const R3& k) {
    const R3 khat = k.normalized();
    std::vector<R3> basis;
    for (int axis = 0; axis < 3 && basis.size() < 2; ++axis) {
        R3 v = R3::Unit(axis);
        v -= v.dot(khat) * khat;
        for (const auto& b : basis) v -= v.dot(b) * b;
        if (v.norm() > 1e-8) basis.push_back(v.normalized());
    }
    return basis;
}

} // namespace detail

inline ModeSet build_pec_box_modes(const CavityGeometry& geometry, int n_max,
                                   const Constants& k = Constants::natural()) {
    if (n_max < 1) throw DomainError("build_pec_box_modes: N_max must be >= 1");
    if (!(geometry.Lx > 0.0 && geometry.Ly > 0.0 && geometry.Lz > 0.0))
        throw DomainError("build_pec_box_modes: box lengths must be > 0");
    const double eps_b = geometry.background_eps();
    const double V = geometry.volume();

    ModeSet set;
    set.geometry = geometry;
    set.eps_b = eps_b;
    set.n_max = n_max;
    for (int m = 0; m <= n_max; ++m)
        for (int n = 0; n <= n_max; ++n)
            for (int p = 0; p <= n_max; ++p) {
                const ModeIndex triple{m, n, p, 1};
                const int zeros = triple.zero_count();
                if (zeros > 1) continue;
                const R3 kv{m * pi / geometry.Lx, n * pi / geometry.Ly, p * pi / geometry.Lz};
                const double omega = k.c * kv.norm() / std::sqrt(eps_b);
                const double amp = std::sqrt(8.0 / (eps_b * V) / (1 << zeros));
                if (zeros == 1) {
                    const int axis = m == 0 ? 0 : (n == 0 ? 1 : 2);
                    set.entries.push_back({triple, omega, kv, amp * R3::Unit(axis)});
                } else {
                    const auto basis = detail::transverse_basis(kv);
                    for (int b = 0; b < 2; ++b)
                        set.entries.push_back({{m, n, p, b + 1}, omega, kv, amp * basis[b]});
                }
            }
    std::stable_sort(set.entries.begin(), set.entries.end(), [](const ModeEntry& a, const ModeEntry& b) {
        if (a.omega != b.omega) return a.omega < b.omega;
        return a.index < b.index;
    });
    return set;
}

// int E_i^* . eps_b . E_j d^3r over the box, from the closed-form
// trigonometric integrals.
inline double mode_overlap(const ModeSet& set, const ModeEntry& a, const ModeEntry& b) {
    if (!a.index.same_triple(b.index)) return 0.0;
    const R3 L = set.geometry.lengths();
    const R3 kv = a.wavevector;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double w = 1.0;
        for (int axis = 0; axis < 3; ++axis) {
            const bool nonzero = kv[axis] != 0.0;
            if (axis == c) w *= nonzero ? 0.5 * L[axis] : L[axis];
            else w *= nonzero ? 0.5 * L[axis] : 0.0;
        }
        total += a.amplitude[c] * b.amplitude[c] * w;
    }
    return set.eps_b * total;
}

// g_k = gamma . i sqrt(hbar w_k / 2 eps0) E_k(r0).
inline cplx coupling_constant(const TwoLevelAtom& atom, const ModeSet& set, const ModeEntry& mode,
                              const Constants& k = Constants::natural()) {
    if (!set.geometry.contains(atom.position))
        throw DomainError("coupling_constant: atom position outside the cavity");
    const double amp = std::sqrt(k.hbar * mode.omega / (2.0 * k.eps0));
    return I_unit * amp * atom.dipole.dot(mode.field_real(atom.position));
}

// Polarization pair with e1 x e2 = k/|k|; k = z gives (x, y).
inline std::pair<R3, R3> polarization_vectors(const R3& kvec) {
    if (kvec.norm() == 0.0) throw DomainError("polarization_vectors: k must be nonzero");
    const R3 khat = kvec.normalized();
    R3 e1 = R3::UnitY().cross(khat);
    if (e1.norm() < 1e-8) e1 = R3::UnitX().cross(khat);
    e1.normalize();
    const R3 e2 = khat.cross(e1);
    return {e1, e2};
}

// Periodic-box plane-wave mode e_ks exp(i k.r)/sqrt(V).
struct PlaneWaveMode {
    R3 k;
    R3 polarization;
    double volume;

    C3 operator()(const R3& r) const {
        return to_c3(polarization) * (std::exp(I_unit * k.dot(r)) / std::sqrt(volume));
    }
};

inline PlaneWaveMode plane_wave_mode(const R3& kvec, int s, double V) {
    if (!(V > 0.0)) throw DomainError("plane_wave_mode: V must be > 0");
    if (s != 1 && s != 2) throw DomainError("plane_wave_mode: polarization must be 1 or 2");
    const auto [e1, e2] = polarization_vectors(kvec);
    return {kvec, s == 1 ? e1 : e2, V};
}

} // namespace mqed
