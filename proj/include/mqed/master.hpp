// master.hpp: driven two-level atom in a structured reservoir: spectral
// densities from both quantization routes, the Born-Markov master equation
// with finite-memory or Markov-limit rates, and its steady state.

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqed/atom.hpp"
#include "mqed/constants.hpp"
#include "mqed/decay.hpp"
#include "mqed/errors.hpp"
#include "mqed/greens.hpp"
#include "mqed/modes.hpp"
#include "mqed/quadrature.hpp"

namespace mqed {

using M2 = Eigen::Matrix2cd;

struct SpectralDensity {
    enum class Kind { Discrete, Continuous };
    Kind kind{Kind::Continuous};
    SpectralMeasure measure;
    ThermalState thermal{};
    Constants constants{Constants::natural()};
    std::string fingerprint; // identifies the physical scenario behind the density

    // Continuous part J(w); lines are not included.
    double J(double w) const { return measure.density_at(w); }
};

namespace detail {

inline std::string mode_fingerprint(const ModeSet& modes, const TwoLevelAtom& atom) {
    std::ostringstream os;
    os.precision(17);
    os << "pec_box:" << modes.geometry.Lx << ',' << modes.geometry.Ly << ',' << modes.geometry.Lz << ','
       << modes.eps_b << ',' << modes.n_max << ',' << modes.size() << ";atom:" << atom.position.transpose() << ','
       << atom.dipole.transpose();
    return os.str();
}

} // namespace detail

// J_k = (w_k / 2 hbar eps0) (gamma . E_k(r0))^2
inline SpectralDensity spectral_density_nmqed(const ModeSet& modes, const TwoLevelAtom& atom,
                                              const ThermalState& thermal = {},
                                              const Constants& kc = Constants::natural()) {
    atom.validate();
    if (modes.empty()) throw DomainError("spectral_density_nmqed: empty ModeSet");
    if (!modes.geometry.contains(atom.position))
        throw DomainError("spectral_density_nmqed: atom position outside the cavity");
    SpectralDensity sd;
    sd.kind = SpectralDensity::Kind::Discrete;
    sd.thermal = thermal;
    sd.constants = kc;
    for (const auto& m : modes.entries) {
        const double proj = atom.dipole.dot(m.field_real(atom.position));
        sd.measure.lines.push_back({m.omega, m.omega / (2.0 * kc.hbar * kc.eps0) * proj * proj});
    }
    sd.measure.omega_max = modes.max_omega();
    sd.fingerprint = detail::mode_fingerprint(modes, atom);
    return sd;
}

// J(w) = (w^2/c^2) gamma . Im G(r0, r0, w) . gamma / (pi hbar eps0)
inline SpectralDensity spectral_density_lna(const GreenEvaluator& green, const TwoLevelAtom& atom,
                                            const QuadratureSpec& spec, const ThermalState& thermal = {}) {
    SpectralDensity sd;
    sd.kind = SpectralDensity::Kind::Continuous;
    sd.measure = lna_measure(green, atom, spec);
    sd.thermal = thermal;
    sd.constants = green.constants();
    if (green.is_cavity()) {
        sd.fingerprint = detail::mode_fingerprint(green.modes(), atom);
    } else {
        std::ostringstream os;
        os.precision(17);
        os << "bulk:" << green.name() << ";atom:" << atom.position.transpose() << ',' << atom.dipole.transpose();
        sd.fingerprint = os.str();
    }
    return sd;
}

// max_tau |sum_k J_k e^{-i w_k tau} - int J(w) e^{-i w tau} dw|
inline double kernel_equivalence_check(const SpectralDensity& discrete, const SpectralDensity& continuous,
                                       const std::vector<double>& taus) {
    if (discrete.kind != SpectralDensity::Kind::Discrete)
        throw DomainError("kernel_equivalence_check: first density must be discrete");
    if (continuous.kind != SpectralDensity::Kind::Continuous)
        throw DomainError("kernel_equivalence_check: second density must be continuous");
    if (discrete.fingerprint != continuous.fingerprint)
        throw DomainError("kernel_equivalence_check: densities come from different scenarios");
    double dev = 0.0;
    for (double tau : taus) {
        auto phase = [tau](double w) { return std::exp(-I_unit * (w * tau)); };
        dev = std::max(dev, std::abs(discrete.measure.integrate(phase) - continuous.measure.integrate(phase)));
    }
    return dev;
}

// ---------------------------------------------------------------------------
// Density matrix over {|e>, |g>}
// ---------------------------------------------------------------------------

struct DensityMatrix2 {
    M2 m{M2::Zero()};

    static DensityMatrix2 excited() {
        DensityMatrix2 r;
        r.m(0, 0) = 1.0;
        return r;
    }
    static DensityMatrix2 ground() {
        DensityMatrix2 r;
        r.m(1, 1) = 1.0;
        return r;
    }

    double rho_ee() const { return m(0, 0).real(); }
    double rho_gg() const { return m(1, 1).real(); }
    cplx rho_eg() const { return m(0, 1); }
    double trace_error() const { return std::abs(m.trace() - 1.0); }
    double hermiticity_error() const { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        const M2 h = 0.5 * (m + m.adjoint());
        return Eigen::SelfAdjointEigenSolver<M2>(h).eigenvalues().minCoeff();
    }

    void validate() const {
        if (!m.allFinite()) throw DomainError("DensityMatrix2: non-finite entries");
        if (hermiticity_error() > 1e-10) throw DomainError("DensityMatrix2: not Hermitian");
        if (trace_error() > 1e-10) throw DomainError("DensityMatrix2: trace != 1");
        if (min_eigenvalue() < -1e-8) throw DomainError("DensityMatrix2: negative eigenvalue");
    }
};

// ---------------------------------------------------------------------------
// Master equation in the frame rotating at w_L:
//   drho/dt = -i[H, rho] + (A1 + A1*) s- rho s+ - A1 s+s- rho - A1* rho s+s-
//                        + (A0 + A0*) s+ rho s- - A0* s-s+ rho - A0 rho s-s+
//   H = (w_d - w_L) s+s- + (Omega/2)(s+ + s-)
//   A1(t) = int_0^t dtau int dw J (nbar + 1) e^{-i (w - w_d) tau},  A0 likewise with J nbar.
// Markov limit: A(inf) = pi J(w_d)(...) - i PV int J(...)/(w - w_d).
// ---------------------------------------------------------------------------

enum class MemoryMode { FiniteMemory, MarkovLimit };

inline std::string to_string(MemoryMode m) { return m == MemoryMode::MarkovLimit ? "markov-limit" : "finite-memory"; }

struct MasterOptions {
    MemoryMode mode{MemoryMode::MarkovLimit};
    bool refine{false};
    double refine_tol{1e-8};
    int max_refinements{6};
};

struct MasterRates {
    cplx A1{};        // emission
    cplx A0{};        // absorption
    double gamma{0};  // 2 pi J(w_d)
    double shift{0};  // PV int J/(w - w_d)
};

struct MasterTrajectory {
    Grid1D grid;
    std::vector<DensityMatrix2> rho;
    MemoryMode mode{MemoryMode::MarkovLimit};
    MasterRates markov;
    double max_trace_drift{0.0};
    double max_hermiticity_error{0.0};
    double min_eigenvalue{1.0};
    double min_eigenvalue_time{0.0};
    int n_steps{0};
    int refinements{0};
    double refine_change{0.0};
    std::vector<std::string> warnings;
};

namespace detail {

inline SpectralMeasure thermal_weighted(const SpectralDensity& sd, bool emission) {
    SpectralMeasure mu = sd.measure;
    const ThermalState th = sd.thermal;
    const Constants kc = sd.constants;
    auto factor = [th, kc, emission](double w) {
        const double n = thermal_occupation(th, w, kc);
        return emission ? n + 1.0 : n;
    };
    for (auto& l : mu.lines) l.weight *= factor(l.omega);
    if (mu.has_density()) {
        auto base = mu.density;
        mu.density = [base, factor](double w) { return w > 0.0 ? base(w) * factor(w) : 0.0; };
        mu.scale = std::max(mu.scale, mu.spec.abs_tol);
    }
    return mu;
}

// A(inf) = pi mu(w_d) - i PV int dmu/(w - w_d)
inline cplx markov_coefficient(const SpectralMeasure& mu, double omega_d) {
    const auto r = markov_rate_and_shift(mu, omega_d);
    return cplx(0.5 * r.Gamma, -r.shift);
}

// A(t_j) = int dmu(w) t e^{-i x t/2} sinc(x t/2), x = w - w_d, on the given times.
inline std::vector<cplx> memory_table(const SpectralMeasure& mu, double omega_d, const std::vector<double>& times) {
    auto kernel = [omega_d](double w, double t) -> cplx {
        const double x = w - omega_d;
        const double y = 0.5 * x * t;
        const double sinc = std::abs(y) < 1e-8 ? 1.0 - y * y / 6.0 : std::sin(y) / y;
        return t * std::exp(-I_unit * y) * sinc;
    };
    std::vector<cplx> out(times.size(), cplx{});
    for (const auto& l : mu.lines)
        for (std::size_t j = 0; j < times.size(); ++j) out[j] += l.weight * kernel(l.omega, times[j]);
    if (!mu.has_density()) return out;

    const double t_max = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    if (!mu.breakpoints.empty()) {
        SpectralMeasure dens = mu;
        dens.lines.clear();
        for (std::size_t j = 0; j < times.size(); ++j)
            out[j] += dens.integrate([&](double w) { return kernel(w, times[j]); });
        return out;
    }
    double width = std::min(pi / std::max(t_max, 1e-300), 0.25 * mu.omega_max);
    const double tol = mu.spec.rel_tol * std::max(mu.scale, mu.spec.abs_tol) * std::max(t_max, 1.0);
    std::vector<cplx> prev;
    std::vector<double> nodes, weights;
    for (int level = 0;; ++level) {
        density_rule(mu, width, nodes, weights);
        std::vector<cplx> cur(times.size(), cplx{});
        for (std::size_t m = 0; m < nodes.size(); ++m)
            for (std::size_t j = 0; j < times.size(); ++j) cur[j] += weights[m] * kernel(nodes[m], times[j]);
        if (!prev.empty()) {
            double diff = 0.0;
            for (std::size_t j = 0; j < times.size(); ++j) diff = std::max(diff, std::abs(cur[j] - prev[j]));
            if (diff <= tol) {
                for (std::size_t j = 0; j < times.size(); ++j) out[j] += cur[j];
                return out;
            }
            if (level >= 8) throw ConvergenceError("memory_table: frequency rule did not converge", 0.0, diff);
        }
        prev = std::move(cur);
        width *= 0.5;
    }
}

inline M2 lindblad_rhs(const M2& rho, double Delta, double Omega, cplx A1, cplx A0) {
    M2 sm = M2::Zero();
    sm(1, 0) = 1.0; // |g><e|
    const M2 sp = sm.transpose();
    const M2 Pe = sp * sm;
    const M2 Pg = sm * sp;
    const M2 H = Delta * Pe + 0.5 * Omega * (sp + sm);
    M2 out = -I_unit * (H * rho - rho * H);
    out += (A1 + std::conj(A1)) * sm * rho * sp - A1 * Pe * rho - std::conj(A1) * rho * Pe;
    out += (A0 + std::conj(A0)) * sp * rho * sm - std::conj(A0) * Pg * rho - A0 * rho * Pg;
    return out;
}

} // namespace detail

inline MasterRates master_markov_rates(const SpectralDensity& sd, double omega_d) {
    MasterRates r;
    r.A1 = detail::markov_coefficient(detail::thermal_weighted(sd, true), omega_d);
    r.A0 = detail::markov_coefficient(detail::thermal_weighted(sd, false), omega_d);
    const auto bare = markov_rate_and_shift(sd.measure, omega_d);
    r.gamma = bare.Gamma;
    r.shift = bare.shift;
    return r;
}

namespace detail {

inline MasterTrajectory evolve_once(const TwoLevelAtom& atom, const SpectralDensity& sd, const DensityMatrix2& rho0,
                                    double t_max, int n_steps, const MasterOptions& opt) {
    MasterTrajectory tr;
    tr.grid = Grid1D(0.0, t_max, n_steps + 1);
    tr.mode = opt.mode;
    tr.n_steps = n_steps;
    const double h = tr.grid.h();
    const double omega_d = atom.omega0;
    const double omega_L = atom.drive ? atom.drive->omega_L : omega_d;
    const double Omega = atom.drive ? atom.drive->Omega : 0.0;
    const double Delta = omega_d - omega_L;
    if (atom.drive)
        tr.warnings.push_back("drive enters the bath-correlation rotation through the diagonal part of H_S only");

    tr.markov = master_markov_rates(sd, omega_d);

    std::vector<cplx> A1, A0;
    if (opt.mode == MemoryMode::FiniteMemory) {
        std::vector<double> half(2 * n_steps + 1);
        for (int j = 0; j <= 2 * n_steps; ++j) half[j] = 0.5 * h * j;
        A1 = memory_table(thermal_weighted(sd, true), omega_d, half);
        A0 = sd.thermal.temperature > 0.0 ? memory_table(thermal_weighted(sd, false), omega_d, half)
                                          : std::vector<cplx>(half.size(), cplx{});
    }
    auto rates = [&](double t) -> std::pair<cplx, cplx> {
        if (opt.mode == MemoryMode::MarkovLimit) return {tr.markov.A1, tr.markov.A0};
        const auto idx = static_cast<std::size_t>(std::llround(2.0 * t / h));
        return {A1[idx], A0[idx]};
    };
    auto rhs = [&](double t, const M2& rho) -> M2 {
        const auto [a1, a0] = rates(t);
        return lindblad_rhs(rho, Delta, Omega, a1, a0);
    };

    tr.rho.reserve(n_steps + 1);
    tr.rho.push_back(rho0);
    M2 y = rho0.m;
    for (int n = 0; n < n_steps; ++n) {
        y = rk4_step(rhs, n * h, y, h);
        DensityMatrix2 r{y};
        const double t = tr.grid[n + 1];
        if (!y.allFinite()) throw InstabilityError("evolve_master_equation: non-finite density matrix", t);
        const double drift = r.trace_error();
        tr.max_trace_drift = std::max(tr.max_trace_drift, drift);
        tr.max_hermiticity_error = std::max(tr.max_hermiticity_error, r.hermiticity_error());
        const double ev = r.min_eigenvalue();
        if (ev < tr.min_eigenvalue) {
            tr.min_eigenvalue = ev;
            tr.min_eigenvalue_time = t;
        }
        if (drift > 1e-6) throw InstabilityError("evolve_master_equation: trace drift exceeds 1e-6", t);
        if (ev < -1e-6 && opt.mode == MemoryMode::MarkovLimit)
            throw InstabilityError("evolve_master_equation: negative eigenvalue below -1e-6", t);
        tr.rho.push_back(r);
    }
    if (tr.min_eigenvalue < -1e-8)
        tr.warnings.push_back("positivity violated (min eigenvalue " + std::to_string(tr.min_eigenvalue) + ")");
    return tr;
}

} // namespace detail

inline MasterTrajectory evolve_master_equation(const TwoLevelAtom& atom, const SpectralDensity& sd,
                                               const DensityMatrix2& rho0, double t_max, int n_steps,
                                               const MasterOptions& opt = {}) {
    atom.validate();
    rho0.validate();
    if (!(t_max > 0.0)) throw DomainError("evolve_master_equation: t_max must be > 0");
    if (n_steps < 1) throw DomainError("evolve_master_equation: n_steps must be >= 1");
    if (atom.drive && !(atom.drive->omega_L > 0.0))
        throw DomainError("evolve_master_equation: laser frequency must be > 0");
    auto tr = detail::evolve_once(atom, sd, rho0, t_max, n_steps, opt);
    if (!opt.refine) return tr;
    for (int level = 1; level <= opt.max_refinements; ++level) {
        auto fine = detail::evolve_once(atom, sd, rho0, t_max, 2 * tr.n_steps, opt);
        double change = 0.0;
        for (int i = 0; i <= tr.n_steps; ++i)
            change = std::max(change, std::abs(fine.rho[2 * i].rho_ee() - tr.rho[i].rho_ee()));
        fine.refinements = level;
        fine.refine_change = change;
        tr = std::move(fine);
        if (change <= opt.refine_tol) return tr;
    }
    tr.warnings.push_back("step refinement stopped before reaching the requested tolerance");
    return tr;
}

// Stationary state of the Markov-limit generator: null vector of the 4x4
// superoperator, normalized to unit trace.
inline DensityMatrix2 markov_steady_state(const TwoLevelAtom& atom, const SpectralDensity& sd) {
    atom.validate();
    const double omega_d = atom.omega0;
    const double omega_L = atom.drive ? atom.drive->omega_L : omega_d;
    const double Omega = atom.drive ? atom.drive->Omega : 0.0;
    const auto r = master_markov_rates(sd, omega_d);
    Eigen::Matrix4cd L;
    for (int c = 0; c < 4; ++c) {
        M2 basis = M2::Zero();
        basis(c % 2, c / 2) = 1.0;
        const M2 out = detail::lindblad_rhs(basis, omega_d - omega_L, Omega, r.A1, r.A0);
        for (int k = 0; k < 4; ++k) L(k, c) = out(k % 2, k / 2);
    }
    // Replace one equation by the trace condition.
    Eigen::Matrix4cd A = L;
    Eigen::Vector4cd b = Eigen::Vector4cd::Zero();
    A.row(0).setZero();
    A(0, 0) = 1.0;
    A(0, 3) = 1.0;
    b(0) = 1.0;
    const Eigen::Vector4cd v = A.fullPivLu().solve(b);
    DensityMatrix2 out;
    for (int k = 0; k < 4; ++k) out.m(k % 2, k / 2) = v(k);
    return out;
}

} // namespace mqed
