#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace mqed;

TEST(Constants, NaturalAndSiArePositive) {
    EXPECT_TRUE(Constants::natural().valid());
    EXPECT_TRUE(Constants::si().valid());
    EXPECT_EQ(Constants::natural().hbar, 1.0);
    EXPECT_NEAR(Constants::si().c, 299792458.0, 0.0);
}

TEST(Linalg, BilinearMatchesExplicitSum) {
    auto g = oracle::rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        C3 a, b;
        C33 M;
        for (int i = 0; i < 3; ++i) {
            a(i) = {oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)};
            b(i) = {oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)};
            for (int j = 0; j < 3; ++j) M(i, j) = {oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)};
        }
        cplx ref{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) ref += a(i) * M(i, j) * b(j);
        EXPECT_LE(std::abs(bilinear(a, M, b) - ref), 1e-14 * std::max(1.0, std::abs(ref)));
        const C33 back = M.adjoint().adjoint();
        EXPECT_TRUE(back == M);
    }
}

TEST(Linalg, SqrtUpperBranch) {
    auto g = oracle::rng(12);
    for (int i = 0; i < 100; ++i) {
        const cplx z{oracle::uniform(g, -5, 5), oracle::uniform(g, -5, 5)};
        const cplx s = sqrt_upper(z);
        EXPECT_GE(s.imag(), 0.0);
        EXPECT_LE(std::abs(s * s - z), 1e-13 * std::max(1.0, std::abs(z)));
    }
}

TEST(Permittivity, ConstantScalarIsDiagonal) {
    const PermittivityModel m = ConstantScalar{cplx(1.0, 0.01)};
    const C33 e = m.eval(R3(0.3, 0.1, -2.0), 1.7);
    EXPECT_EQ(e, (cplx(1.0, 0.01) * C33::Identity()).eval());
}

TEST(Permittivity, DrudeLorentzMatchesDirectPoleSum) {
    const PermittivityModel m = DrudeLorentz{1.0, {{1.0, 0.8, 0.1}}};
    const double w = 0.8;
    const cplx direct = 1.0 + 1.0 / (0.8 * 0.8 - w * w - cplx(0.0, 0.1 * w));
    EXPECT_NEAR(std::abs(m.scalar(w) - direct), 0.0, 1e-14);
    EXPECT_NEAR(m.scalar(w).imag(), 1.0 / (w * 0.1), 1e-12);
}

TEST(Permittivity, DrudeLorentzPassive) {
    const PermittivityModel m = DrudeLorentz{2.0, {{1.3, 0.0, 0.05}, {0.7, 2.1, 0.3}}};
    auto g = oracle::rng(13);
    for (int i = 0; i < 200; ++i) EXPECT_GT(m.scalar(oracle::uniform(g, 1e-3, 10)).imag(), 0.0);
}

TEST(Permittivity, CausalityReflectionAllVariants) {
    C33 t;
    t << cplx(2, 0.1), cplx(0, 0.05), 0, cplx(0, -0.05), cplx(2, 0.1), 0, 0, 0, cplx(3, 0.2);
    PiecewiseRegions pw;
    pw.regions.push_back({Box{R3(-1, -1, -1), R3(1, 1, 1)}, std::make_shared<PermittivityModel>(ConstantScalar{cplx(4, 0.3)})});
    pw.background = std::make_shared<PermittivityModel>(DrudeLorentz{1.5, {{1.0, 0.9, 0.2}}});
    const std::vector<PermittivityModel> models{ConstantScalar{cplx(1.0, 0.02)}, DrudeLorentz{1.0, {{1.0, 0.8, 0.1}}},
                                                ConstantTensor{t}, pw};
    auto g = oracle::rng(14);
    for (const auto& m : models)
        for (int i = 0; i < 100; ++i) {
            const R3 r = oracle::random_vec(g, -2, 2);
            const double w = oracle::uniform(g, 0.05, 5.0);
            const C33 lhs = m.eval(r, -w);
            const C33 rhs = m.eval(r, w).conjugate();
            EXPECT_LE(max_abs(C33(lhs - rhs)), 1e-12 * std::max(1.0, max_abs(rhs)));
        }
}

TEST(Permittivity, PiecewiseWithoutBackgroundRejectsOutsidePoints) {
    PiecewiseRegions pw;
    pw.regions.push_back({Sphere{R3::Zero(), 1.0}, std::make_shared<PermittivityModel>(ConstantScalar{2.0})});
    const PermittivityModel m = pw;
    EXPECT_EQ(m.eval(R3(0.1, 0, 0), 1.0)(0, 0), cplx(2.0));
    EXPECT_THROW(m.eval(R3(3, 0, 0), 1.0), DomainError);
}

TEST(Thermal, Occupation) {
    EXPECT_EQ(thermal_occupation({0.0}, 1.0), 0.0);
    EXPECT_NEAR(thermal_occupation({1.0 / std::log(2.0)}, 1.0), 1.0, 1e-14);
    EXPECT_NEAR(thermal_occupation({1.0}, 1.0), 1.0 / (std::exp(1.0) - 1.0), 1e-14);
    EXPECT_NEAR(thermal_occupation({1.0}, 1.0), 0.58197670686932645, 1e-14);
    EXPECT_THROW(thermal_occupation({1.0}, 0.0), DomainError);
    double prev = 1e300;
    for (double w = 0.1; w < 10; w += 0.1) {
        const double n = thermal_occupation({0.7}, w);
        EXPECT_GE(n, 0.0);
        EXPECT_LT(n, prev);
        prev = n;
    }
}

TEST(Thermal, CorrelationFactorPositiveBranch) {
    EXPECT_EQ(correlation_factor({0.0}, 1.0), 1.0);
    EXPECT_NEAR(correlation_factor({1.0 / std::log(2.0)}, 1.0), 3.0, 1e-13);
}
