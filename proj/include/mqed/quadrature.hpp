// quadrature.hpp: adaptive 1-D quadrature, principal values, Sommerfeld radial
// integrals and a fixed-step RK4 substrate.
//
// Every routine is deterministic: subdivision is driven by a heap with a total
// order (error, then left endpoint) and the final sum runs in interval order.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "mqed/errors.hpp"
#include "mqed/linalg.hpp"

namespace mqed {

struct QuadratureSpec {
    double abs_tol{1e-12};
    double rel_tol{1e-10};
    int max_subdivisions{20000};
    double omega_max{20.0};   // truncation of int_0^inf dw
    double pv_excision{1e-2}; // initial half-width h of the PV excision
    double eta{0.0};          // pole softening of the mode-sum Green tensor

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw DomainError("QuadratureSpec: abs_tol and rel_tol must be > 0");
        if (max_subdivisions < 1) throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
        if (!(omega_max > 0.0)) throw DomainError("QuadratureSpec: omega_max must be > 0");
        if (!(pv_excision > 0.0)) throw DomainError("QuadratureSpec: pv_excision must be > 0");
        if (!(eta >= 0.0)) throw DomainError("QuadratureSpec: eta must be >= 0");
    }
};

struct Grid1D {
    double start{0.0};
    double stop{1.0};
    int n_points{2};

    Grid1D() = default;
    Grid1D(double start_, double stop_, int n) : start(start_), stop(stop_), n_points(n) {
        if (n_points < 2) throw DomainError("Grid1D: n_points must be >= 2");
        if (!(stop > start)) throw DomainError("Grid1D: stop must exceed start");
    }

    double h() const noexcept { return (stop - start) / (n_points - 1); }
    double operator[](int i) const noexcept { return start + i * h(); }
    int size() const noexcept { return n_points; }
};

template <class T>
struct QuadResult {
    T value;
    double error{0.0};
    int intervals{0};
};

namespace detail {

template <class T>
T zero_value() {
    if constexpr (std::is_arithmetic_v<T> || std::is_same_v<T, cplx>) {
        return T{};
    } else {
        return T::Zero();
    }
}

inline double norm_of(double x) { return std::abs(x); }
inline double norm_of(cplx z) { return std::abs(z); }
template <class Derived>
double norm_of(const Eigen::MatrixBase<Derived>& m) { return m.cwiseAbs().maxCoeff(); }

template <class T>
double abs_sum_norm(const T& x) { return norm_of(x); }

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
    double a, b;
    T value;
    double error;
};

template <class T, class F>
Segment<T> gk15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const T fc = f(center);
    T kron = fc * wgk[7];
    T gauss = fc * wg[3];
    double resabs = norm_of(fc) * wgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const T f1 = f(center - dx);
        const T f2 = f(center + dx);
        const T s = f1 + f2;
        kron += s * wgk[j];
        resabs += (norm_of(f1) + norm_of(f2)) * wgk[j];
        if (j % 2 == 1) gauss += s * wg[j / 2];
    }
    const T value = kron * half;
    double err = norm_of(T((kron - gauss) * half));
    err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * resabs * std::abs(half));
    return {a, b, value, err};
}

} // namespace detail

// Global adaptive Gauss-Kronrod over [points.front(), points.back()] with
// forced breakpoints at every interior entry of `points` (sorted ascending).
template <class F>
auto integrate_adaptive(F&& f, std::span<const double> points, const QuadratureSpec& spec)
    -> QuadResult<std::decay_t<std::invoke_result_t<F&, double>>> {
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    using detail::Segment;
    if (points.size() < 2) throw DomainError("integrate_adaptive: need at least two points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1]))
            throw DomainError("integrate_adaptive: breakpoints must be strictly increasing");

    auto worse = [](const Segment<T>& x, const Segment<T>& y) {
        if (x.error != y.error) return x.error < y.error;
        return x.a > y.a;
    };
    std::priority_queue<Segment<T>, std::vector<Segment<T>>, decltype(worse)> heap(worse);
    std::vector<Segment<T>> done; // intervals too narrow to split further

    T total = detail::zero_value<T>();
    double total_err = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        auto s = detail::gk15<T>(f, points[i - 1], points[i]);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }

    auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * detail::norm_of(total)); };
    int n_intervals = static_cast<int>(points.size()) - 1;
    while (total_err > tolerance() && !heap.empty() && n_intervals < spec.max_subdivisions) {
        Segment<T> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 64.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(std::abs(worst.a), std::abs(worst.b))) {
            done.push_back(worst);
            continue;
        }
        auto left = detail::gk15<T>(f, worst.a, mid);
        auto right = detail::gk15<T>(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n_intervals;
    }

    std::vector<Segment<T>> all = std::move(done);
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    T sum = detail::zero_value<T>();
    double err = 0.0;
    for (const auto& s : all) {
        sum += s.value;
        err += s.error;
    }
    const double tol = std::max(spec.abs_tol, spec.rel_tol * detail::norm_of(sum));
    if (!std::isfinite(detail::norm_of(sum)))
        throw ConvergenceError("integrate_adaptive: non-finite integrand", detail::norm_of(sum), err);
    if (err > tol)
        throw ConvergenceError("integrate_adaptive: tolerance not met within " +
                                   std::to_string(spec.max_subdivisions) + " subdivisions",
                               detail::norm_of(sum), err);
    return {sum, err, static_cast<int>(all.size())};
}

template <class F>
auto integrate_adaptive(F&& f, double a, double b, const QuadratureSpec& spec) {
    if (!(a < b)) throw DomainError("integrate_adaptive: require a < b");
    const std::array<double, 2> pts{a, b};
    return integrate_adaptive(std::forward<F>(f), std::span<const double>(pts), spec);
}

// Principal value of int_a^b f over a simple pole at `pole`, by symmetric
// excision of half-width h, h/2, h/4, h/8 and Richardson elimination of the
// odd error terms h and h^3. The spread between the two extrapolants is the
// reported error.
template <class F>
QuadResult<cplx> integrate_pv(F&& f, double pole, double a, double b, const QuadratureSpec& spec) {
    if (!(a < pole && pole < b)) throw DomainError("integrate_pv: pole must lie strictly inside (a, b)");
    auto g = [&](double x) -> cplx { return cplx(f(x)); };
    const double h0 = std::min(spec.pv_excision, 0.25 * std::min(pole - a, b - pole));

    std::array<cplx, 4> excised{};
    double quad_err = 0.0;
    double magnitude = 0.0; // size of the one-sided pieces, which may cancel in the sum
    for (int level = 0; level < 4; ++level) {
        const double h = h0 / (1 << level);
        const auto lo = integrate_adaptive(g, a, pole - h, spec);
        const auto hi = integrate_adaptive(g, pole + h, b, spec);
        excised[level] = lo.value + hi.value;
        quad_err = std::max(quad_err, lo.error + hi.error);
        magnitude = std::max(magnitude, std::abs(lo.value) + std::abs(hi.value));
    }
    std::array<cplx, 3> r1{};
    for (int i = 0; i < 3; ++i) r1[i] = 2.0 * excised[i + 1] - excised[i];
    const cplx coarse = (8.0 * r1[1] - r1[0]) / 7.0;
    const cplx fine = (8.0 * r1[2] - r1[1]) / 7.0;
    const double err = std::abs(fine - coarse) + 10.0 * quad_err;
    const double tol = 100.0 * std::max(spec.abs_tol, spec.rel_tol * std::max(std::abs(fine), magnitude));
    if (!(err <= tol))
        throw ConvergenceError("integrate_pv: Richardson extrapolation did not converge", std::abs(fine), err);
    return {fine, err, 8};
}

struct SommerfeldResult {
    C33 value{C33::Zero()};
    C33 propagating{C33::Zero()}; // 0 <= kpar <= Re k
    C33 evanescent{C33::Zero()};  // Re k <= kpar <= k_max
    double error{0.0};
    bool truncation_warning{false};
};

// int_0^{k_max} f(kpar) dkpar split at the branch point kpar = Re k. Both
// pieces use square-root substitutions that absorb the 1/k_perp endpoint
// singularity: kpar = Re k (1 - u^2) and kpar = Re k + v^2.
template <class F>
SommerfeldResult sommerfeld_radial(F&& f, cplx k, double k_max, const QuadratureSpec& spec) {
    const double kr = k.real();
    if (!(kr > 0.0)) throw DomainError("sommerfeld_radial: Re k must be > 0");
    if (k.imag() < 0.0) throw DomainError("sommerfeld_radial: Im k must be >= 0");
    if (!(k_max > kr)) throw DomainError("sommerfeld_radial: k_max must exceed Re k");

    auto prop = [&](double u) -> C33 { return f(kr * (1.0 - u * u)) * (2.0 * kr * u); };
    auto evan = [&](double v) -> C33 { return f(kr + v * v) * (2.0 * v); };
    const auto p = integrate_adaptive(prop, 0.0, 1.0, spec);
    const auto e = integrate_adaptive(evan, 0.0, std::sqrt(k_max - kr), spec);

    SommerfeldResult out;
    out.propagating = p.value;
    out.evanescent = e.value;
    out.value = p.value + e.value;
    out.error = p.error + e.error;
    const double tail = detail::norm_of(C33(f(k_max))) * k_max;
    out.truncation_warning = tail > spec.rel_tol * detail::norm_of(out.value);
    return out;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const unsigned un = static_cast<unsigned>(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double p = std::legendre(un, x);
            const double pm = n > 1 ? std::legendre(un - 1, x) : 1.0;
            dp = n * (x * p - pm) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double p = std::legendre(un, x);
        const double pm = n > 1 ? std::legendre(un - 1, x) : 1.0;
        dp = n * (x * p - pm) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

// Classical fourth-order Runge-Kutta step for dy/dt = rhs(t, y).
template <class State, class Rhs>
State rk4_step(Rhs&& rhs, double t, const State& y, double h) {
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
    const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
    const State k4 = rhs(t + h, State(y + h * k3));
    return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

} // namespace mqed
