#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace mqed;

namespace {

ModeSet unit_cube(int n) { return build_pec_box_modes(CavityGeometry{}, n); }

// Dense RK4 for the 2x2 system equivalent to the detuned single-mode kernel:
// c' = -i g u, u' = -i D u - i g c.
double rabi_population(double g, double detuning, double t, int steps) {
    using V = Eigen::Vector2cd;
    Eigen::Matrix2cd A;
    A << 0.0, -I_unit * g, -I_unit * g, -I_unit * detuning;
    V y(1.0, 0.0);
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const V k1 = A * y, k2 = A * (y + 0.5 * h * k1), k3 = A * (y + 0.5 * h * k2), k4 = A * (y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return std::norm(y(0));
}

double cosine_error(int n) {
    const auto res = solve_volterra(custom_kernel([](double) { return cplx(-1.0); }), 10.0, n);
    double err = 0.0;
    for (int i = 0; i < res.grid.size(); ++i) err = std::max(err, std::abs(res.c[i] - std::cos(res.grid[i])));
    return err;
}

TwoLevelAtom cube_atom() {
    TwoLevelAtom a;
    a.position = R3(0.31, 0.47, 0.53);
    a.dipole = R3(0.2, 0.3, 0.9);
    a.omega0 = 6.0;
    return a;
}

} // namespace

TEST(Volterra, ZeroKernelStaysExcited) {
    const auto res = solve_volterra(custom_kernel([](double) { return cplx{}; }), 5.0, 100);
    for (const auto& c : res.c) EXPECT_EQ(c, cplx(1.0));
}

TEST(Volterra, CosineOracleAndSecondOrder) {
    const double e_coarse = cosine_error(2000), e_fine = cosine_error(4000);
    EXPECT_LE(e_fine, 1e-4);
    EXPECT_GE(e_coarse / e_fine, 3.5);
}

TEST(Volterra, DetunedRabiMatchesOdeOracle) {
    const double g = 0.7, detuning = 1.3, t_max = 12.0;
    const auto res = solve_volterra(custom_kernel([=](double tau) { return -g * g * std::exp(-I_unit * detuning * tau); }),
                                    t_max, 4000);
    const double omega_r = std::sqrt(detuning * detuning + 4 * g * g);
    double err = 0.0;
    for (int i = 0; i < res.grid.size(); i += 40) {
        const double t = res.grid[i];
        const double ref = rabi_population(g, detuning, t, 4000);
        EXPECT_NEAR(ref, 1.0 - 4 * g * g / (omega_r * omega_r) * std::pow(std::sin(omega_r * t / 2), 2), 1e-10);
        err = std::max(err, std::abs(res.P[i] - ref));
    }
    EXPECT_LE(err, 1e-4);
}

TEST(Volterra, Preconditions) {
    const auto k = custom_kernel([](double) { return cplx(-1.0); });
    EXPECT_THROW(solve_volterra(k, 1.0, 5), DomainError);
    EXPECT_THROW(solve_volterra(k, 0.0, 100), DomainError);
    EXPECT_THROW(solve_volterra(custom_kernel([](double) { return cplx(1.0); }), 10.0, 100), InstabilityError);
}

TEST(KernelNmqed, ZeroLagSumAndLinearity) {
    const auto set = unit_cube(2);
    const auto atom = cube_atom();
    const auto k = kernel_nmqed(set, atom);
    double sum = 0.0;
    for (const auto& m : set.entries) sum += std::norm(coupling_constant(atom, set, m));
    EXPECT_NEAR(k(0.0).real(), -sum, 1e-12 * sum);
    EXPECT_EQ(k(0.0).imag(), 0.0);

    ModeSet a = set, b = set, ab = set;
    a.entries = {set[3]};
    b.entries = {set[7]};
    ab.entries = {set[3], set[7]};
    const auto ka = kernel_nmqed(a, atom), kb = kernel_nmqed(b, atom), kab = kernel_nmqed(ab, atom);
    auto rng = oracle::rng(41);
    for (int i = 0; i < 20; ++i) {
        const double tau = oracle::uniform(rng, 0.0, 20.0);
        EXPECT_LE(std::abs(kab(tau) - ka(tau) - kb(tau)), 1e-13 * std::abs(kab(0.0)));
    }
}

TEST(KernelNmqed, ResonantSingleModeIsConstant) {
    auto set = unit_cube(1);
    set.entries = {set[0]};
    auto atom = cube_atom();
    atom.omega0 = set[0].omega;
    const auto k = kernel_nmqed(set, atom);
    for (double tau : {0.0, 1.0, 17.3, 400.0}) EXPECT_LE(std::abs(k(tau) - k(0.0)), 1e-15);
    ModeSet empty = set;
    empty.entries.clear();
    EXPECT_THROW(kernel_nmqed(empty, atom), DomainError);
}

TEST(KernelLna, VacuumCubicWeightAndRate) {
    TwoLevelAtom atom;
    atom.dipole = R3(0.1, -0.2, 0.25);
    atom.omega0 = 1.3;
    QuadratureSpec spec;
    spec.omega_max = 4.0;
    const auto k = kernel_lna(GreenEvaluator(BulkClosedForm{}), atom, spec);
    const double g2 = atom.dipole.squaredNorm();
    for (double w : {0.1, 0.7, 1.3, 3.9}) {
        const double ref = g2 * w * w * w / (6 * pi * pi);
        EXPECT_NEAR(k.measure.density(w), ref, 1e-14 * ref);
    }
    const auto rates = markov_rate_and_shift(k);
    EXPECT_NEAR(rates.Gamma, g2 * std::pow(atom.omega0, 3) / (3 * pi), 1e-14);
    EXPECT_NEAR(rates.Gamma, 2 * pi * k.measure.density(atom.omega0), 1e-15);
}

TEST(KernelLna, NonnegativeWeightAndLossyRejected) {
    TwoLevelAtom atom;
    atom.omega0 = 1.0;
    QuadratureSpec spec;
    spec.omega_max = 5.0;
    const auto k = kernel_lna(GreenEvaluator(BulkClosedForm{ConstantScalar{2.25}}), atom, spec);
    for (int i = 0; i <= 1000; ++i) EXPECT_GE(k.measure.density(5.0 * i / 1000), 0.0);
    EXPECT_THROW(kernel_lna(GreenEvaluator(BulkClosedForm{ConstantScalar{cplx(1.0, 0.1)}}), atom, spec), DomainError);
}

TEST(KernelLna, AnalyticLimitMatchesNmqedCubeSix) {
    auto set = std::make_shared<const ModeSet>(unit_cube(6));
    const auto atom = cube_atom();
    QuadratureSpec spec;
    spec.omega_max = set->max_omega() + 1.0;
    const auto lna = kernel_lna(GreenEvaluator(CavityModeSum{set, 0.0}), atom, spec);
    const auto nm = kernel_nmqed(*set, atom);
    auto rng = oracle::rng(42);
    const double omega1 = (*set)[0].omega;
    double dev = 0.0, peak = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double tau = oracle::uniform(rng, 0.0, 20.0 / omega1);
        dev = std::max(dev, std::abs(lna(tau) - nm(tau)));
        peak = std::max(peak, std::abs(nm(tau)));
    }
    EXPECT_LE(dev, 1e-10 * peak);
}

TEST(KernelLna, SoftenedPathApproachesNmqed) {
    auto set = std::make_shared<const ModeSet>(unit_cube(1));
    const auto atom = cube_atom();
    const double omega1 = (*set)[0].omega;
    QuadratureSpec spec;
    spec.omega_max = set->max_omega() + 3.0;
    const auto nm = kernel_nmqed(*set, atom);
    double prev = 1e300;
    for (double f : {1e-1, 1e-2, 1e-3}) {
        const auto lna = kernel_lna(GreenEvaluator(CavityModeSum{set, f * omega1}), atom, spec);
        double dev = 0.0;
        for (int i = 0; i <= 4; ++i) {
            const double tau = 5.0 * i / omega1;
            dev = std::max(dev, std::abs(lna(tau) - nm(tau)));
        }
        EXPECT_LT(dev, prev) << "eta = " << f << " omega1";
        prev = dev;
    }
    EXPECT_LE(prev, 2e-2 * std::abs(nm(0.0)));
}

TEST(Markov, ZeroRateAtNode) {
    auto set = unit_cube(1);
    TwoLevelAtom atom;
    atom.position = R3(0.5, 0.5, 0.5);
    atom.dipole = R3(0, 0, 1);
    atom.omega0 = 4.0;
    for (const auto m : set.entries)
        if (m.index.p == 1) {
            set.entries = {m};
            break;
        }
    const auto k = kernel_nmqed(set, atom);
    EXPECT_EQ(k.measure.lines[0].weight, 0.0);
    const auto r = markov_rate_and_shift(k);
    EXPECT_EQ(r.Gamma, 0.0);
    EXPECT_EQ(r.shift, 0.0);
}

TEST(Markov, SymmetricWeightHasNoShift) {
    SpectralMeasure mu;
    mu.omega_max = 10.0;
    mu.density = [](double w) { return 0.01 * std::exp(-std::pow((w - 5.0) / 0.5, 2)); };
    const auto r = markov_rate_and_shift(mu, 5.0);
    EXPECT_NEAR(r.shift, 0.0, 1e-10);
    EXPECT_NEAR(r.Gamma, 2 * pi * 0.01, 1e-15);
    mu.lines = {{5.0, 1.0}};
    EXPECT_THROW(markov_rate_and_shift(mu, 5.0), DomainError);
}

TEST(Markov, FittedExponentMatchesRate) {
    TwoLevelAtom atom;
    atom.omega0 = 1.0;
    atom.dipole = R3(0, 0, std::sqrt(0.03 * pi));
    QuadratureSpec spec;
    spec.omega_max = 2.0;
    const auto k = kernel_lna(GreenEvaluator(BulkClosedForm{}), atom, spec);
    const auto rates = markov_rate_and_shift(k);
    ASSERT_NEAR(rates.Gamma, 0.01, 1e-12);
    const auto res = solve_volterra(k, 5.0 / rates.Gamma, 5000);
    const auto fit = fit_markov(res, 2.0 / rates.Gamma, 5.0 / rates.Gamma);
    EXPECT_NEAR(fit.Gamma / rates.Gamma, 1.0, 5e-2);
    EXPECT_EQ(res.P[0], 1.0);
    for (double p : res.P) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0 + 1e-6);
    }
}

TEST(Markov, ShortTimeQuadratic) {
    SpectralMeasure mu;
    mu.omega_max = 2.0;
    mu.density = [](double w) { return 0.1 * w * (2.0 - w); };
    mu.scale = mu.total_weight();
    MemoryKernel k;
    k.omega0 = 1.0;
    k.measure = mu;
    const double W = mu.total_weight();
    EXPECT_NEAR(W, 0.1 * 4.0 / 3.0, 1e-14);
    const auto res = solve_volterra(k, 0.2, 400);
    // least squares of 1 - P against t^2 on t <= 0.1
    double num = 0, den = 0;
    for (int i = 1; i <= 200; ++i) {
        const double t2 = res.grid[i] * res.grid[i];
        num += t2 * (1.0 - res.P[i]);
        den += t2 * t2;
    }
    EXPECT_NEAR(num / den / W, 1.0, 2e-2);
}
