// decay.hpp: Wigner-Weisskopf decay of an initially excited two-level atom:
// memory kernels from the mode sum and from the Green tensor, the Volterra
// integro-differential solver, and the Markov rate and shift.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mqed/atom.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"
#include "mqed/greens.hpp"
#include "mqed/linalg.hpp"
#include "mqed/modes.hpp"
#include "mqed/quadrature.hpp"

namespace mqed {

struct SpectralLine {
    double omega;
    double weight; // >= 0
};

// Nonnegative spectral measure: discrete lines plus an optional density on
// [0, omega_max]. Integrals against it are sum_k weight_k f(w_k) + int w f.
struct SpectralMeasure {
    std::vector<SpectralLine> lines;
    std::function<double(double)> density; // empty when purely discrete
    double omega_max{0.0};
    std::vector<double> breakpoints; // interior points where the density is sharp
    QuadratureSpec spec{};
    double scale{0.0}; // total weight; floors the absolute tolerance of oscillatory integrals

    bool has_density() const noexcept { return static_cast<bool>(density); }

    double density_at(double w) const { return has_density() && w >= 0.0 && w <= omega_max ? density(w) : 0.0; }

    std::vector<double> partition() const {
        std::vector<double> pts{0.0};
        for (double b : breakpoints)
            if (b > 0.0 && b < omega_max) pts.push_back(b);
        pts.push_back(omega_max);
        return pts;
    }

    // sum_k weight_k f(w_k) + int_0^omega_max density(w) f(w) dw
    template <class F>
    cplx integrate(F&& f) const {
        cplx acc{};
        for (const auto& l : lines) acc += l.weight * cplx(f(l.omega));
        if (has_density()) {
            const auto pts = partition();
            auto g = [&](double w) -> cplx { return density(w) * cplx(f(w)); };
            QuadratureSpec local = spec;
            local.abs_tol = std::max(spec.abs_tol, spec.rel_tol * scale);
            acc += integrate_adaptive(g, std::span<const double>(pts), local).value;
        }
        return acc;
    }

    double total_weight() const { return integrate([](double) { return 1.0; }).real(); }
};

enum class KernelProvenance { NMQED, LNA, Custom };

inline std::string to_string(KernelProvenance p) {
    switch (p) {
        case KernelProvenance::NMQED: return "nmqed";
        case KernelProvenance::LNA: return "lna";
        default: return "custom";
    }
}

// D(tau) = -int dmu(w) e^{-i (w - w0) tau}, or a user-supplied D for Custom.
struct MemoryKernel {
    KernelProvenance provenance{KernelProvenance::Custom};
    double omega0{1.0};
    SpectralMeasure measure;
    std::function<cplx(double)> custom;

    cplx operator()(double tau) const {
        if (custom) return custom(tau);
        return -measure.integrate([&](double w) { return std::exp(-I_unit * ((w - omega0) * tau)); });
    }
};

inline MemoryKernel custom_kernel(std::function<cplx(double)> D, double omega0 = 1.0) {
    MemoryKernel k;
    k.omega0 = omega0;
    k.custom = std::move(D);
    return k;
}

// Discrete weights |g_k|^2 / hbar^2 from the mode couplings.
inline MemoryKernel kernel_nmqed(const ModeSet& modes, const TwoLevelAtom& atom,
                                 const Constants& kc = Constants::natural()) {
    atom.validate();
    if (modes.empty()) throw DomainError("kernel_nmqed: empty ModeSet");
    MemoryKernel k;
    k.provenance = KernelProvenance::NMQED;
    k.omega0 = atom.omega0;
    for (const auto& m : modes.entries) {
        const double g2 = std::norm(coupling_constant(atom, modes, m, kc));
        k.measure.lines.push_back({m.omega, g2 / (kc.hbar * kc.hbar)});
    }
    k.measure.omega_max = modes.max_omega();
    return k;
}

// w(w) = (1/hbar pi eps0)(w^2/c^2) gamma . Im G(r0, r0, w) . gamma on [0, omega_max].
// A cavity backend with eta = 0 contributes its analytic eta -> 0 lines instead.
inline SpectralMeasure lna_measure(const GreenEvaluator& green, const TwoLevelAtom& atom,
                                   const QuadratureSpec& spec) {
    atom.validate();
    spec.validate();
    const Constants kc = green.constants();
    const double pref = 1.0 / (kc.hbar * pi * kc.eps0 * kc.c * kc.c);
    const C3 g = to_c3(atom.dipole);
    SpectralMeasure mu;
    mu.omega_max = spec.omega_max;
    mu.spec = spec;
    if (green.is_cavity() && green.eta() == 0.0) {
        const auto lines = cavity_im_green_lines(atom.position, atom.position, green.modes(), kc);
        for (const auto& line : lines)
            if (line.omega <= spec.omega_max)
                mu.lines.push_back({line.omega, pref * line.omega * line.omega * bilinear(g, line.weight, g).real()});
        return mu;
    }
    if (green.is_bulk()) {
        // Probe once so absorbing media fail at construction, not mid-quadrature.
        (void)green.im_coincidence(atom.position, atom.omega0);
    }
    mu.density = [green, pos = atom.position, g, pref](double w) -> double {
        if (w <= 0.0) return 0.0;
        return pref * w * w * bilinear(g, green.im_coincidence(pos, w), g).real();
    };
    mu.breakpoints = green.spectral_breakpoints();
    mu.scale = mu.total_weight();
    return mu;
}

inline MemoryKernel kernel_lna(const GreenEvaluator& green, const TwoLevelAtom& atom, const QuadratureSpec& spec) {
    MemoryKernel k;
    k.provenance = KernelProvenance::LNA;
    k.omega0 = atom.omega0;
    k.measure = lna_measure(green, atom, spec);
    return k;
}

// ---------------------------------------------------------------------------
// Markov limit: c(t) = exp(-Gamma t/2 + i delta t),
// Gamma = 2 pi w(w0), delta = PV int w(w)/(w - w0) dw.
// ---------------------------------------------------------------------------

struct MarkovRates {
    double Gamma{0.0};
    double shift{0.0};
    double shift_error{0.0};
};

inline MarkovRates markov_rate_and_shift(const SpectralMeasure& mu, double omega0) {
    MarkovRates out;
    for (const auto& l : mu.lines) {
        if (l.weight == 0.0) continue;
        if (l.omega == omega0)
            throw DomainError("markov_rate_and_shift: a discrete line sits exactly at the transition frequency");
        out.shift += l.weight / (l.omega - omega0);
    }
    if (mu.has_density()) {
        out.Gamma = 2.0 * pi * mu.density_at(omega0);
        if (omega0 < mu.omega_max) {
            const auto pv = integrate_pv([&](double w) { return mu.density(w) / (w - omega0); }, omega0, 0.0,
                                         mu.omega_max, mu.spec);
            out.shift += pv.value.real();
            out.shift_error = pv.error;
        } else {
            out.shift += integrate_adaptive([&](double w) { return mu.density(w) / (w - omega0); }, 0.0,
                                            mu.omega_max, mu.spec)
                             .value;
        }
    }
    return out;
}

inline MarkovRates markov_rate_and_shift(const MemoryKernel& kernel) {
    if (kernel.custom) throw DomainError("markov_rate_and_shift: custom kernel has no spectral weight");
    return markov_rate_and_shift(kernel.measure, kernel.omega0);
}

// ---------------------------------------------------------------------------
// Volterra solver for dc/dt = int_0^t D(t - t') c(t') dt', c(0) = 1.
// ---------------------------------------------------------------------------

struct MarkovFit {
    double Gamma{0.0};
    double shift{0.0};
    double t_lo{0.0};
    double t_hi{0.0};
};

struct DecayResult {
    Grid1D grid;
    std::vector<cplx> c;
    std::vector<double> P;
    std::optional<MarkovFit> markov_fit;
};

// Product trapezoid history with an implicit trapezoid step (the fixed point
// of the trapezoidal predictor-corrector, solved exactly since the step is linear):
//   c_{n+1} (1 - h^2 D_0 / 4) = c_n + (h/2)(F_n + S_{n+1}),
//   F_n = h [D_n c_0 / 2 + sum_{j=1}^{n-1} D_{n-j} c_j + D_0 c_n / 2],
//   S_{n+1} = h [D_{n+1} c_0 / 2 + sum_{j=1}^{n} D_{n+1-j} c_j].
inline DecayResult solve_volterra_samples(const std::vector<cplx>& D, double t_max, int n_steps) {
    if (n_steps < 10) throw DomainError("solve_volterra: n_steps must be >= 10");
    if (!(t_max > 0.0)) throw DomainError("solve_volterra: t_max must be > 0");
    if (static_cast<int>(D.size()) != n_steps + 1) throw DomainError("solve_volterra: kernel table size mismatch");
    DecayResult out;
    out.grid = Grid1D(0.0, t_max, n_steps + 1);
    const double h = out.grid.h();
    auto& c = out.c;
    c.assign(n_steps + 1, cplx{});
    c[0] = 1.0;
    const cplx denom = 1.0 - 0.25 * h * h * D[0];
    cplx F = 0.0;
    for (int n = 0; n < n_steps; ++n) {
        cplx S = 0.5 * D[n + 1] * c[0];
        for (int j = 1; j <= n; ++j) S += D[n + 1 - j] * c[j];
        S *= h;
        c[n + 1] = (c[n] + 0.5 * h * (F + S)) / denom;
        F = S + 0.5 * h * D[0] * c[n + 1];
        if (!std::isfinite(std::abs(c[n + 1])) || std::abs(c[n + 1]) > 10.0)
            throw InstabilityError("solve_volterra: |c| > 10; reduce the step h = t_max/n_steps", out.grid[n + 1]);
    }
    out.P.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out.P[i] = std::norm(c[i]);
    return out;
}

namespace detail {

// sum_m W_m e^{-i (w_m - w0) j h} for j = 0..n, by phase recurrence reset
// every 256 steps.
inline void accumulate_fourier(std::vector<cplx>& out, const std::vector<double>& nodes,
                               const std::vector<double>& weights, double omega0, double h) {
    const int n = static_cast<int>(out.size());
    for (std::size_t m = 0; m < nodes.size(); ++m) {
        const double phase = -(nodes[m] - omega0) * h;
        const cplx step = std::polar(1.0, phase);
        cplx z = 1.0;
        for (int j = 0; j < n; ++j) {
            if (j % 256 == 0) z = std::polar(1.0, phase * j);
            out[j] += weights[m] * z;
            z *= step;
        }
    }
}

// Composite 10-point Gauss-Legendre nodes over [pts.front(), pts.back()],
// panels respecting the breakpoints and no wider than max_width, with the
// density folded into the weights.
inline void density_rule(const SpectralMeasure& mu, double max_width, std::vector<double>& nodes,
                         std::vector<double>& weights) {
    static const GaussRule gl = gauss_legendre(10);
    nodes.clear();
    weights.clear();
    const auto pts = mu.partition();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const int panels = std::max(1, static_cast<int>(std::ceil((pts[i] - pts[i - 1]) / max_width)));
        const double w = (pts[i] - pts[i - 1]) / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = pts[i - 1] + p * w;
            for (int q = 0; q < 10; ++q) {
                const double x = lo + 0.5 * w * (gl.nodes[q] + 1.0);
                nodes.push_back(x);
                weights.push_back(0.5 * w * gl.weights[q] * mu.density(x));
            }
        }
    }
}

} // namespace detail

// D(j h), j = 0..n_steps. Lines are summed exactly; a smooth density uses a
// composite Gauss-Legendre Fourier sum with panel width halved until the table
// changes by <= rel_tol * total weight; densities with sharp breakpoints fall
// back to adaptive quadrature per tau.
inline std::vector<cplx> tabulate_kernel(const MemoryKernel& kernel, double t_max, int n_steps) {
    const Grid1D grid(0.0, t_max, n_steps + 1);
    const double h = grid.h();
    std::vector<cplx> D(n_steps + 1, cplx{});
    if (kernel.custom) {
        for (int j = 0; j <= n_steps; ++j) D[j] = kernel.custom(grid[j]);
        return D;
    }
    const auto& mu = kernel.measure;
    std::vector<double> nodes, weights;
    for (const auto& l : mu.lines) {
        nodes.push_back(l.omega);
        weights.push_back(l.weight);
    }
    detail::accumulate_fourier(D, nodes, weights, kernel.omega0, h);

    if (mu.has_density()) {
        if (!mu.breakpoints.empty()) {
            SpectralMeasure dens = mu;
            dens.lines.clear();
            for (int j = 0; j <= n_steps; ++j)
                D[j] += dens.integrate([&](double w) { return std::exp(-I_unit * ((w - kernel.omega0) * grid[j])); });
        } else {
            double width = std::min(pi / std::max(t_max, 1e-300), 0.25 * mu.omega_max);
            std::vector<cplx> prev;
            const double tol = mu.spec.rel_tol * std::max(mu.scale, mu.spec.abs_tol);
            for (int level = 0;; ++level) {
                std::vector<cplx> cur(n_steps + 1, cplx{});
                detail::density_rule(mu, width, nodes, weights);
                detail::accumulate_fourier(cur, nodes, weights, kernel.omega0, h);
                if (!prev.empty()) {
                    double diff = 0.0;
                    for (int j = 0; j <= n_steps; ++j) diff = std::max(diff, std::abs(cur[j] - prev[j]));
                    if (diff <= tol) {
                        for (int j = 0; j <= n_steps; ++j) D[j] += cur[j];
                        break;
                    }
                    if (level >= 8)
                        throw ConvergenceError("tabulate_kernel: Fourier table did not converge", std::abs(cur[0]),
                                               diff);
                }
                prev = std::move(cur);
                width *= 0.5;
            }
        }
    }
    for (auto& d : D) d = -d;
    return D;
}

inline DecayResult solve_volterra(const MemoryKernel& kernel, double t_max, int n_steps) {
    if (n_steps < 10) throw DomainError("solve_volterra: n_steps must be >= 10");
    if (!(t_max > 0.0)) throw DomainError("solve_volterra: t_max must be > 0");
    return solve_volterra_samples(tabulate_kernel(kernel, t_max, n_steps), t_max, n_steps);
}

// Least-squares fit of ln P(t) and the unwrapped phase of c over [t_lo, t_hi].
inline MarkovFit fit_markov(const DecayResult& res, double t_lo, double t_hi) {
    double st = 0, sp = 0, stt = 0, stp = 0, sph = 0, stph = 0;
    int n = 0;
    double phase = 0.0, prev = 0.0;
    bool started = false;
    for (int i = 0; i < res.grid.size(); ++i) {
        const double arg = std::arg(res.c[i]);
        if (i == 0) {
            phase = arg;
        } else {
            double d = arg - prev;
            d -= 2.0 * pi * std::round(d / (2.0 * pi));
            phase += d;
        }
        prev = arg;
        const double t = res.grid[i];
        if (t < t_lo || t > t_hi) continue;
        if (!(res.P[i] > 0.0)) throw DomainError("fit_markov: population vanished inside the fit window");
        started = true;
        const double lp = std::log(res.P[i]);
        st += t;
        sp += lp;
        stt += t * t;
        stp += t * lp;
        sph += phase;
        stph += t * phase;
        ++n;
    }
    if (!started || n < 3) throw DomainError("fit_markov: fewer than 3 samples in the fit window");
    const double den = n * stt - st * st;
    MarkovFit fit;
    fit.Gamma = -(n * stp - st * sp) / den;
    fit.shift = (n * stph - st * sph) / den;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    return fit;
}

} // namespace mqed
