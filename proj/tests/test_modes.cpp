#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"

using namespace mqed;

namespace {

// curl curl E by fourth-order central differences of every component.
R3 curl_curl_fd(const ModeEntry& m, const R3& r, double h) {
    auto E = [&](const R3& x) { return m.field_real(x); };
    auto d1 = [&](int axis, const std::function<R3(const R3&)>& f, const R3& x) {
        R3 e = R3::Zero();
        e[axis] = h;
        return R3((-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h));
    };
    auto d2 = [&](int axis, const R3& x) {
        R3 e = R3::Zero();
        e[axis] = h;
        return R3((-E(x + 2 * e) + 16 * E(x + e) - 30 * E(x) + 16 * E(x - e) - E(x - 2 * e)) / (12 * h * h));
    };
    R3 out = R3::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            // d_i d_j E_j - d_j d_j E_i
            std::function<R3(const R3&)> dj = [&, j](const R3& x) { return d1(j, E, x); };
            out[i] += d1(i, dj, r)[j] - d2(j, r)[i];
        }
    return out;
}

ModeSet cube(double L, int n, double eps = 1.0) {
    CavityGeometry g;
    g.Lx = g.Ly = g.Lz = L;
    g.background = ConstantScalar{eps};
    return build_pec_box_modes(g, n);
}

} // namespace

TEST(Modes, LowestCubeModeFrequency) {
    const auto set = cube(pi, 2);
    EXPECT_NEAR(set[0].omega, std::sqrt(2.0), 1e-14);
    EXPECT_EQ(set[0].index.zero_count(), 1);
}

TEST(Modes, CountMatchesEnumeration) {
    for (int n = 1; n <= 5; ++n) {
        std::size_t count = 0;
        for (int m = 0; m <= n; ++m)
            for (int q = 0; q <= n; ++q)
                for (int p = 0; p <= n; ++p) {
                    const int zeros = (m == 0) + (q == 0) + (p == 0);
                    if (zeros == 0) count += 2;
                    if (zeros == 1) count += 1;
                }
        EXPECT_EQ(cube(1.0, n).size(), count);
        EXPECT_EQ(expected_mode_count(n), count);
    }
}

TEST(Modes, SortedAscending) {
    const auto set = cube(1.3, 4);
    for (std::size_t i = 1; i < set.size(); ++i) EXPECT_LE(set[i - 1].omega, set[i].omega);
}

TEST(Modes, EigenproblemResidualByFiniteDifferences) {
    CavityGeometry g;
    g.Lx = 1.0;
    g.Ly = 1.3;
    g.Lz = 0.8;
    g.background = ConstantScalar{2.25};
    const auto set = build_pec_box_modes(g, 2);
    auto rng = oracle::rng(31);
    for (const auto& m : set.entries) {
        const double k2 = m.omega * m.omega * set.eps_b;
        for (int i = 0; i < 50; ++i) {
            const R3 r(oracle::uniform(rng, 0.05, 0.95) * g.Lx, oracle::uniform(rng, 0.05, 0.95) * g.Ly,
                       oracle::uniform(rng, 0.05, 0.95) * g.Lz);
            const R3 lhs = curl_curl_fd(m, r, 1e-3);
            const R3 rhs = k2 * m.field_real(r);
            const double scale = k2 * std::max(m.field_real(r).norm(), 0.1 * m.amplitude.norm());
            EXPECT_LE((lhs - rhs).norm(), 1e-8 * scale) << "mode " << m.index.m << m.index.n << m.index.p;
        }
    }
}

TEST(Modes, TangentialFieldVanishesOnWalls) {
    const auto set = cube(1.0, 3);
    auto rng = oracle::rng(32);
    for (const auto& m : set.entries)
        for (int i = 0; i < 50; ++i) {
            const int axis = i % 3;
            R3 r = oracle::random_vec(rng, 0.0, 1.0);
            r[axis] = (i / 3) % 2 ? 1.0 : 0.0;
            const R3 E = m.field_real(r);
            for (int t = 0; t < 3; ++t)
                if (t != axis) EXPECT_LE(std::abs(E[t]), 1e-10 * m.amplitude.norm());
        }
}

TEST(Modes, OrthonormalityClosedForm) {
    const auto set = cube(1.0, 3);
    for (std::size_t a = 0; a < set.size(); ++a)
        for (std::size_t b = 0; b < set.size(); ++b)
            EXPECT_NEAR(mode_overlap(set, set[a], set[b]), a == b ? 1.0 : 0.0, 1e-10);
}

TEST(Modes, OrthonormalityByCubature) {
    CavityGeometry g;
    g.Lx = 1.0;
    g.Ly = 1.3;
    g.Lz = 0.8;
    g.background = ConstantScalar{2.25};
    const auto set = build_pec_box_modes(g, 2);
    const auto rule = gauss_legendre(12);
    std::vector<std::pair<R3, double>> nodes;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
            for (int k = 0; k < 12; ++k) {
                const R3 r(0.5 * g.Lx * (1 + rule.nodes[i]), 0.5 * g.Ly * (1 + rule.nodes[j]), 0.5 * g.Lz * (1 + rule.nodes[k]));
                nodes.push_back({r, rule.weights[i] * rule.weights[j] * rule.weights[k] * g.volume() / 8});
            }
    for (std::size_t a = 0; a < set.size(); ++a)
        for (std::size_t b = a; b < set.size(); ++b) {
            double s = 0;
            for (const auto& [r, w] : nodes) s += w * set.eps_b * set[a].field_real(r).dot(set[b].field_real(r));
            EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-8);
        }
}

TEST(Modes, ScalingWithLengthAndPermittivity) {
    const auto base = cube(1.0, 3);
    const auto big = cube(2.5, 3);
    const auto filled = cube(1.0, 3, 4.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        EXPECT_NEAR(big[i].omega, base[i].omega / 2.5, 1e-12 * base[i].omega);
        EXPECT_NEAR(filled[i].omega, base[i].omega / 2.0, 1e-12 * base[i].omega);
    }
}

TEST(Modes, BranchStructure) {
    const auto set = cube(1.0, 3);
    std::map<std::tuple<int, int, int>, std::set<int>> branches;
    for (const auto& m : set.entries) {
        EXPECT_LE(m.index.zero_count(), 1);
        branches[{m.index.m, m.index.n, m.index.p}].insert(m.index.branch);
        EXPECT_NEAR(m.wavevector.dot(m.amplitude), 0.0, 1e-12 * m.wavevector.norm() * m.amplitude.norm());
    }
    for (const auto& [t, b] : branches) {
        const int zeros = (std::get<0>(t) == 0) + (std::get<1>(t) == 0) + (std::get<2>(t) == 0);
        EXPECT_EQ(b.size(), zeros == 1 ? 1u : 2u);
    }
}

TEST(Modes, RejectsLossyOrInvalidBackground) {
    CavityGeometry g;
    g.background = ConstantScalar{cplx(1.0, 0.1)};
    EXPECT_THROW(build_pec_box_modes(g, 2), DomainError);
    g.background = DrudeLorentz{1.0, {{1.0, 0.5, 0.1}}};
    EXPECT_THROW(build_pec_box_modes(g, 2), DomainError);
    EXPECT_THROW(cube(1.0, 0), DomainError);
    CavityGeometry bad;
    bad.Lx = -1;
    EXPECT_THROW(build_pec_box_modes(bad, 1), DomainError);
}

TEST(Modes, Deterministic) {
    const auto a = cube(1.0, 4), b = cube(1.0, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(a[i].index == b[i].index);
        EXPECT_EQ(a[i].amplitude, b[i].amplitude);
    }
}

TEST(PlaneWave, RightHandedTriad) {
    const auto [e1, e2] = polarization_vectors(R3::UnitZ());
    EXPECT_NEAR((e1 - R3::UnitX()).norm(), 0.0, 1e-15);
    EXPECT_NEAR((e2 - R3::UnitY()).norm(), 0.0, 1e-15);
    auto rng = oracle::rng(33);
    for (int i = 0; i < 100; ++i) {
        const R3 k = oracle::random_vec(rng, -3, 3);
        const auto [a, b] = polarization_vectors(k);
        EXPECT_NEAR(k.dot(a), 0.0, 1e-13);
        EXPECT_NEAR(k.dot(b), 0.0, 1e-13);
        EXPECT_NEAR(a.dot(b), 0.0, 1e-14);
        EXPECT_NEAR(a.norm(), 1.0, 1e-14);
        EXPECT_NEAR((a.cross(b) - k.normalized()).norm(), 0.0, 1e-13);
    }
}

TEST(PlaneWave, UnitNormOverPeriodicBox) {
    const double L = 2.0, V = L * L * L;
    const R3 k = R3(1, 2, -1) * (2 * pi / L);
    const auto mode = plane_wave_mode(k, 1, V);
    auto rng = oracle::rng(34);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(mode(oracle::random_vec(rng, 0, L)).squaredNorm() * V, 1.0, 1e-13);
    EXPECT_THROW(plane_wave_mode(R3::Zero(), 1, V), DomainError);
    EXPECT_THROW(plane_wave_mode(k, 3, V), DomainError);
}

TEST(Coupling, CenterAtomLowestMode) {
    const double L = 1.7;
    const auto set = cube(L, 2);
    TwoLevelAtom atom;
    atom.position = R3::Constant(L / 2);
    atom.dipole = R3(0, 0, 0.3);
    const ModeEntry* lowest = nullptr;
    for (const auto& m : set.entries)
        if (m.index.m == 1 && m.index.n == 1 && m.index.p == 0) lowest = &m;
    ASSERT_NE(lowest, nullptr);
    const double omega = std::sqrt(2.0) * pi / L;
    const double Az2 = 4.0 / (L * L * L);
    const double ref = 0.3 * 0.3 * omega / 2.0 * Az2;
    EXPECT_NEAR(std::norm(coupling_constant(atom, set, *lowest)), ref, 1e-13 * ref);
}

TEST(Coupling, ZerosAndDomain) {
    const auto set = cube(1.0, 1);
    TwoLevelAtom atom;
    atom.position = R3(0.5, 0.5, 0.5);
    atom.dipole = R3(0, 0, 1);
    for (const auto& m : set.entries) {
        const cplx g = coupling_constant(atom, set, m);
        if (m.index.p == 1) EXPECT_NEAR(std::abs(g), 0.0, 1e-15);  // node of cos(pi z)
        if (m.amplitude.z() == 0.0) EXPECT_EQ(std::abs(g), 0.0);  // dipole orthogonal to E
    }
    atom.position = R3(2, 0, 0);
    EXPECT_THROW(coupling_constant(atom, set, set[0]), DomainError);
}
