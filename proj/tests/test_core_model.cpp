#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dqlg/core_model.hpp"

using namespace dqlg;

namespace {

constexpr double pi = std::numbers::pi;

/// |<a|b>| for unit vectors: 1 when equal up to a global phase.
double phase_free_overlap(const Spinor2& a, const Spinor2& b) { return std::abs(a.dot(b)); }

} // namespace

TEST(ModelParams, CouplingsReproduceStepWeights) {
    for (double eps : {0.1, 0.3, 0.5, 0.77, 0.99}) {
        auto p = ModelParams::make(eps);
        ASSERT_TRUE(p.g && p.gprime);
        EXPECT_LT(std::abs(std::exp(-2.0 * *p.g) - cplx(0.0, -eps)), 1e-15);
        EXPECT_LT(std::abs(std::exp(-2.0 * *p.gprime) - std::sqrt(1.0 - eps * eps)), 1e-15);
    }
}

TEST(ModelParams, CouplingsUndefinedAtEdges) {
    auto massless = ModelParams::make(0.0);
    EXPECT_FALSE(massless.g.has_value());
    EXPECT_TRUE(massless.gprime.has_value());
    auto extreme = ModelParams::make(1.0);
    EXPECT_TRUE(extreme.g.has_value());
    EXPECT_FALSE(extreme.gprime.has_value());
    EXPECT_EQ(extreme.unbend_weight(), 0.0);
}

TEST(ModelParams, RejectsMassOutsideUnitInterval) {
    EXPECT_THROW(ModelParams::make(-0.01), DomainError);
    EXPECT_THROW(ModelParams::make(1.5), DomainError);
    EXPECT_THROW(ModelParams::make(std::nan("")), DomainError);
}

TEST(LatticeSpec, Validation) {
    EXPECT_NO_THROW(LatticeSpec::make(1, 64, 64));
    EXPECT_THROW(LatticeSpec::make(2, 64, 64), DomainError);
    EXPECT_THROW(LatticeSpec::make(1, 63, 64), DomainError);
    EXPECT_THROW(LatticeSpec::make(3, 8, 0), DomainError);
    EXPECT_EQ(LatticeSpec::make(3, 8, 8).sites(), 512u);
}

TEST(Spin4, EveryDirectionIsLightLike) {
    for (int s0 : {1, -1})
        for (int sz : {1, -1}) {
            auto s = Spin4::make_1d(s0, sz);
            EXPECT_EQ(scaled_contraction(s, s), 0);
            EXPECT_NEAR(minkowski(s.vec(), s.vec()), 0.0, 1e-15);
        }
    for (int code = 0; code < 16; ++code) {
        auto sgn = [&](int bit) { return (code >> bit) & 1 ? 1 : -1; };
        auto s = Spin4::make_3d(sgn(3), sgn(0), sgn(1), sgn(2));
        EXPECT_EQ(scaled_contraction(s, s), 0);
        EXPECT_NEAR(minkowski(s.vec(), s.vec()), 0.0, 1e-15);
    }
    EXPECT_THROW(Spin4::make_1d(1, 0), DomainError);
}

TEST(SpinChain, MagnetizationIsEndpointDisplacement) {
    // Walk a path on the bcc lattice and compare the chain sum with the walk.
    std::mt19937 rng(7);
    std::array<int, 3> pos{0, 0, 0};
    SpinChain chain;
    for (int w = 0; w < 11; ++w) {
        std::array<int, 3> d{rng() & 1 ? 1 : -1, rng() & 1 ? 1 : -1, rng() & 1 ? 1 : -1};
        for (int a = 0; a < 3; ++a) pos[a] += d[a];
        chain.steps.push_back(Spin4::make_3d(1, d[0], d[1], d[2]));
    }
    auto m = chain.magnetization();
    EXPECT_EQ(m[0], 11);
    EXPECT_EQ(m[1], pos[0]);
    EXPECT_EQ(m[2], pos[1]);
    EXPECT_EQ(m[3], pos[2]);
}

TEST(WaveVector4, ComponentsLieInZone) {
    auto lattice = LatticeSpec::make(3, 16, 8);
    for (int n = -8; n < 8; ++n) {
        Vec4 k = WaveVector4{0, n, -n == 8 ? 0 : -n, 0}.value(lattice);
        for (int a = 1; a < 4; ++a) {
            EXPECT_GE(k[a], -pi);
            EXPECT_LT(k[a], pi);
        }
    }
    EXPECT_NEAR((WaveVector4{2, 0, 0, 4}.value(lattice)[3]), 2 * pi * 4 / 16, 1e-15);
    EXPECT_NEAR((WaveVector4{2, 0, 0, 4}.value(lattice)[0]), 2 * pi * 2 / 8, 1e-15);
    EXPECT_THROW((WaveVector4{0, 8, 0, 0}.value(lattice)), DomainError);
}

TEST(ShiftedWavevector, ZeroPotentialIsIdentity) {
    auto p = ModelParams::make(0.4);
    Vec4 k(0.3, 0.1, -0.7, 2.0);
    EXPECT_EQ(shifted_wavevector(k, FourPotential::zero(), p), k);
}

TEST(ShiftedWavevector, ExactCancellation) {
    auto p = ModelParams::make(0.4);
    Vec4 k(0, 0, 0, pi / 2);
    auto out = shifted_wavevector(k, FourPotential::uniform(0.0, Vec3(0, 0, pi / 2)), p);
    EXPECT_EQ(out, Vec4::Zero().eval());
}

TEST(ShiftedWavevector, ComponentwiseSubtraction) {
    auto p = ModelParams::make(0.4);
    Vec4 k(0.0, pi / 4, 0.0, 0.0);
    auto out = shifted_wavevector(k, FourPotential::uniform(0.0, Vec3(0.1, 0.2, 0.3)), p);
    const double kx = pi / 4;
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], kx - 0.1);
    EXPECT_EQ(out[2], 0.0 - 0.2);
    EXPECT_EQ(out[3], 0.0 - 0.3);
}

TEST(ShiftedWavevector, LinearInPotential) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        auto p = ModelParams::make(0.5, 0.5 + u(rng));
        Vec4 k(u(rng), u(rng), u(rng), u(rng));
        Vec4 a(u(rng), u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng), u(rng));
        double s = u(rng);
        Vec4 lhs = shifted_wavevector(k, FourPotential::uniform(a + s * b), p) - k;
        Vec4 rhs = (shifted_wavevector(k, FourPotential::uniform(a), p) - k) +
                   s * (shifted_wavevector(k, FourPotential::uniform(b), p) - k);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(ShiftedWavevector, RejectsVaryingPotential) {
    auto p = ModelParams::make(0.4);
    auto varying = FourPotential::per_site({Vec4(0, 0, 0, 0.1), Vec4(0, 0, 0, 0.2)});
    EXPECT_THROW(shifted_wavevector(Vec4::Zero(), varying, p), DomainError);
}

TEST(FourPotential, RejectsNonFinite) {
    EXPECT_THROW(FourPotential::uniform(std::nan(""), Vec3::Zero()), DomainError);
    EXPECT_THROW(FourPotential::per_site({Vec4(0, INFINITY, 0, 0)}), DomainError);
}

TEST(ContractionIdentity, ZeroPotential) {
    auto p = ModelParams::make(0.3);
    auto s = Spin4::make_1d(1, 1), t = Spin4::make_1d(1, -1);
    EXPECT_EQ(contraction_identity_check(s, t, Vec4(0.2, 0, 0, 0.4), FourPotential::zero(), p), 0.0);
}

TEST(ContractionIdentity, RandomInputsFromFixedSeed) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    auto sign = [&] { return rng() & 1 ? 1 : -1; };
    for (int trial = 0; trial < 500; ++trial) {
        auto p = ModelParams::make(0.5, 0.25 + 0.5 * std::abs(u(rng)));
        Vec4 k(u(rng), u(rng), u(rng), u(rng));
        auto A = FourPotential::uniform(Vec4(u(rng), u(rng), u(rng), u(rng)));
        auto s = Spin4::make_3d(1, sign(), sign(), sign());
        auto t = Spin4::make_3d(1, sign(), sign(), sign());
        EXPECT_LT(contraction_identity_check(s, t, k, A, p), 1e-12);
        auto s1 = Spin4::make_1d(1, sign()), t1 = Spin4::make_1d(1, sign());
        EXPECT_LT(contraction_identity_check(s1, t1, k, A, p), 1e-12);
    }
}

TEST(ContractionIdentity, PotentialParallelToMomentum) {
    auto p = ModelParams::make(0.5);
    Vec4 k(0.8, 0.3, -0.6, 0.9);
    auto A = FourPotential::uniform(Vec4(0.4, 0.3 * 0.7, -0.6 * 0.7, 0.9 * 0.7));
    auto s = Spin4::make_3d(1, 1, -1, 1), t = Spin4::make_3d(1, 1, 1, -1);
    EXPECT_LT(contraction_identity_check(s, t, k, A, p), 1e-12);
}

TEST(QubitEncode, NorthPole) {
    Spinor2 expected(1.0, 0.0);
    EXPECT_NEAR(phase_free_overlap(qubit_encode(Vec3(0, 0, 1)), expected), 1.0, 1e-15);
}

TEST(QubitEncode, Equator) {
    Spinor2 expected(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    EXPECT_NEAR(phase_free_overlap(qubit_encode(Vec3(1, 0, 0)), expected), 1.0, 1e-15);
}

TEST(QubitEncode, EigenstatesOfSpinOperator) {
    const double theta = 1.0, phi = 2.0;
    Vec3 dir(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
    Mat2 S = spin_operator(dir);
    Spinor2 up = qubit_encode(dir), down = qubit_encode_minus(dir);
    EXPECT_LT((S * up - 0.5 * up).norm(), 1e-12);
    EXPECT_LT((S * down + 0.5 * down).norm(), 1e-12);
}

TEST(QubitEncode, UnitNormAndOrthogonalProperty) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 500; ++trial) {
        Vec3 dir(g(rng), g(rng), g(rng));
        dir.normalize();
        Spinor2 up = qubit_encode(dir), down = qubit_encode_minus(dir);
        EXPECT_NEAR(up.norm(), 1.0, 1e-12);
        EXPECT_NEAR(down.norm(), 1.0, 1e-12);
        EXPECT_LT(std::abs(up.dot(down)), 1e-12);
        // Bloch vector of |+> is the direction itself.
        Vec3 bloch((up.adjoint() * pauli::x() * up)(0).real(), (up.adjoint() * pauli::y() * up)(0).real(),
                   (up.adjoint() * pauli::z() * up)(0).real());
        EXPECT_LT((bloch - dir).norm(), 1e-12);
    }
}

TEST(QubitEncode, RejectsNonUnitDirection) { EXPECT_THROW(qubit_encode(Vec3(0, 0, 2)), DomainError); }
