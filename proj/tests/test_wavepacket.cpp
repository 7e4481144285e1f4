#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dqlg/analysis.hpp"
#include "dqlg/wavepacket.hpp"

using namespace dqlg;

namespace {

constexpr double pi = std::numbers::pi;

double max_diff(const SpinorField& a, const SpinorField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double l2_diff(const SpinorField& a, const SpinorField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += std::norm(a.data()[i] - b.data()[i]);
    return std::sqrt(s);
}

/// Periodic translation of a 1D field by d sites towards +z.
SpinorField translate_1d(const SpinorField& f, int d) {
    SpinorField out(f.lattice());
    const int L = f.lattice().L;
    for (int s = 0; s < L; ++s) out.set(static_cast<std::size_t>(((s + d) % L + L) % L), f.at(static_cast<std::size_t>(s)));
    return out;
}

/// One step computed by hand: transform, multiply each mode by U(k - eA), transform back.
SpinorField manual_step(const SpinorField& f, const ModelParams& p, const Vec3& ea) {
    SpinorField out = f;
    LatticeFft fft(f.lattice(), spinor_components);
    fft.forward(out.data());
    for (std::size_t m = 0; m < out.sites(); ++m) {
        const Mat4 u = transfer_op(Vec4(0, 0, 0, 0) + four(0.0, f.lattice().mode_wavevector(m)),
                                   FourPotential::uniform(0.0, ea), p)
                           .matrix;
        out.set(m, u * out.at(m));
    }
    fft.backward(out.data());
    return out;
}

GaussianPacket packet(double k0z, double width, Branch branch) {
    GaussianPacket g;
    g.k0 = Vec3(0, 0, k0z);
    g.width = width;
    g.branch = branch;
    g.center = Vec3(0, 0, 0);
    return g;
}

void no_warning(std::string_view msg) { FAIL() << "unexpected warning: " << msg; }

} // namespace

TEST(InitGaussian, UnitNorm) {
    auto lattice = LatticeSpec::make(1, 128, 1);
    auto f = init_gaussian(lattice, ModelParams::make(0.5), packet(0.3, 6, Branch::positive_energy), {}, no_warning);
    EXPECT_NEAR(f.norm(), 1.0, 1e-14);
}

TEST(InitGaussian, WidthAndCentre) {
    auto lattice = LatticeSpec::make(1, 256, 1);
    auto g = packet(0.0, 10.0, Branch::unprojected);
    g.center = Vec3(0, 0, 100);
    auto f = init_gaussian(lattice, ModelParams::make(0.5), g, {}, no_warning);
    double mean = 0.0, var = 0.0;
    for (int s = 0; s < 256; ++s) mean += s * f.at(s).squaredNorm();
    for (int s = 0; s < 256; ++s) var += (s - mean) * (s - mean) * f.at(s).squaredNorm();
    EXPECT_NEAR(mean, 100.0, 1e-9);
    EXPECT_NEAR(std::sqrt(var), 10.0, 1e-6);
}

TEST(InitGaussian, PlaneWaveLimit) {
    const int L = 64;
    auto lattice = LatticeSpec::make(1, L, 1);
    const double k0 = lattice.wavenumber(5);
    auto f = init_gaussian(lattice, ModelParams::make(0.5), packet(k0, L, Branch::positive_energy), {}, no_warning);
    for (int s = 0; s < L; ++s) EXPECT_NEAR(f.at(s).squaredNorm(), 1.0 / L, 1e-14);
    Evolver ev(lattice, ModelParams::make(0.5));
    EXPECT_NEAR(ev.observe(f, 0).momentum.z(), k0, 1e-14);
}

TEST(InitGaussian, RestEnergyOfPositiveBranch) {
    const int L = 64;
    auto lattice = LatticeSpec::make(1, L, 1);
    auto p = ModelParams::make(0.5);
    auto f = init_gaussian(lattice, p, packet(0.0, L, Branch::positive_energy), {}, no_warning);
    EXPECT_NEAR(Evolver(lattice, p).observe(f, 0).energy, 0.5, 1e-10);
}

TEST(InitGaussian, UnprojectedSplitsAcrossBranches) {
    const int L = 64;
    auto lattice = LatticeSpec::make(1, L, 1);
    auto p = ModelParams::make(0.5);
    auto g = packet(0.0, L, Branch::unprojected);
    g.spinor = Spinor4(1.0, 0.0, 0.0, 0.0);
    auto f = init_gaussian(lattice, p, g, {}, no_warning);
    // e0 has equal weight on the +/- eps eigenspaces of eps sigma_x (x) 1.
    LatticeFft fft(lattice, spinor_components);
    auto hat = f.data();
    fft.forward(hat);
    double plus = 0.0, total = 0.0;
    for (std::size_t m = 0; m < lattice.sites(); ++m) {
        Eigen::Map<const Spinor4> v(hat.data() + m * spinor_components);
        const Mat4 proj = hamiltonian_positive_projector(lattice.mode_wavevector(m), p);
        plus += (proj * v).squaredNorm();
        total += v.squaredNorm();
    }
    EXPECT_NEAR(plus / total, 0.5, 1e-12);
    EXPECT_NEAR(Evolver(lattice, p).observe(f, 0).energy, 0.0, 1e-12);
    g.spinor = Spinor4(1.0, 0.0, 1.0, 0.0);
    EXPECT_NEAR(Evolver(lattice, p).observe(init_gaussian(lattice, p, g, {}, no_warning), 0).energy, 0.5, 1e-12);
}

TEST(InitGaussian, WarnsWhenEnvelopeAliases) {
    int warnings = 0;
    auto lattice = LatticeSpec::make(1, 32, 1);
    init_gaussian(lattice, ModelParams::make(0.5), packet(0.0, 0.3, Branch::unprojected), {},
                  [&](std::string_view) { ++warnings; });
    EXPECT_EQ(warnings, 1);
    EXPECT_THROW(init_gaussian(lattice, ModelParams::make(0.5), packet(0.0, 0.0, Branch::unprojected)), DomainError);
}

TEST(Step, MasslessChiralShift) {
    const int L = 64;
    auto lattice = LatticeSpec::make(1, L, 1);
    auto p = ModelParams::make(0.0);
    auto g = packet(0.4, 5.0, Branch::unprojected);
    g.spinor = Spinor4(0.5, 0.5, 0.5, 0.5);
    g.center = Vec3(0, 0, 32);
    auto f = init_gaussian(lattice, p, g, {}, no_warning);
    auto next = step(f, p);
    // Components with chirality * spin = +1 move one site towards -z, the others towards +z.
    for (int s = 0; s < L; ++s) {
        const auto after = next.at(static_cast<std::size_t>(s));
        const auto left = f.at(static_cast<std::size_t>((s + 1) % L));
        const auto right = f.at(static_cast<std::size_t>((s - 1 + L) % L));
        EXPECT_LT(std::abs(after[0] - left[0]), 1e-13);
        EXPECT_LT(std::abs(after[3] - left[3]), 1e-13);
        EXPECT_LT(std::abs(after[1] - right[1]), 1e-13);
        EXPECT_LT(std::abs(after[2] - right[2]), 1e-13);
    }
}

TEST(Step, MasslessPlaneWavePhase) {
    const int L = 32;
    auto lattice = LatticeSpec::make(1, L, 1);
    auto p = ModelParams::make(0.0);
    const double k0 = lattice.wavenumber(3);
    auto g = packet(k0, L, Branch::unprojected);
    g.spinor = Spinor4(0.5, 0.5, 0.5, 0.5);
    auto f = init_gaussian(lattice, p, g, {}, no_warning);
    auto next = step(f, p);
    const Mat4 s = stream_op(Vec3(0, 0, k0)).matrix;
    for (int site = 0; site < L; ++site) EXPECT_LT((next.at(site) - s * f.at(site)).norm(), 1e-13);
}

TEST(Step, NormOverThousandSteps) {
    auto lattice = LatticeSpec::make(1, 256, 1);
    auto p = ModelParams::make(0.5);
    auto f = init_gaussian(lattice, p, packet(0.3, 8.0, Branch::positive_energy), {}, no_warning);
    Evolver ev(lattice, p);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        ev.step(f);
        worst = std::max(worst, std::abs(f.norm() - 1.0));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Step, UniformPotentialEqualsShiftedModes1d) {
    auto lattice = LatticeSpec::make(1, 128, 1);
    auto p = ModelParams::make(0.5, 0.8);
    const Vec3 a(0.0, 0.0, 0.37);
    auto f = init_gaussian(lattice, p, packet(0.2, 6.0, Branch::unprojected), {}, no_warning);
    auto ours = f, manual = f;
    Evolver ev(lattice, p, FourPotential::uniform(0.0, a));
    for (int n = 0; n < 20; ++n) {
        ev.step(ours);
        manual = manual_step(manual, ModelParams::make(0.5), 0.8 * a);
    }
    EXPECT_LT(max_diff(ours, manual), 1e-12);
}

TEST(Step, UniformPotentialEqualsShiftedModes3d) {
    auto lattice = LatticeSpec::make(3, 8, 1);
    auto p = ModelParams::make(0.3);
    const Vec3 a(0.1, -0.25, 0.4);
    GaussianPacket g;
    g.k0 = Vec3(0.2, 0.0, -0.3);
    g.width = 1.5;
    g.branch = Branch::unprojected;
    g.spinor = Spinor4(0.3, cplx(0.1, 0.5), 0.7, -0.2);
    auto f = init_gaussian(lattice, p, g, {}, nullptr);
    auto ours = f, manual = f;
    Evolver ev(lattice, p, FourPotential::uniform(0.0, a));
    for (int n = 0; n < 5; ++n) {
        ev.step(ours);
        manual = manual_step(manual, p, a);
    }
    EXPECT_LT(max_diff(ours, manual), 1e-12);
    EXPECT_NEAR(ours.norm(), 1.0, 1e-12);
}

TEST(Step, ScalarPotentialIsGlobalPhase) {
    auto lattice = LatticeSpec::make(1, 64, 1);
    auto p = ModelParams::make(0.5);
    auto f = init_gaussian(lattice, p, packet(0.2, 6.0, Branch::unprojected), {}, no_warning);
    auto with_phase = f;
    Evolver ev(lattice, p, FourPotential::uniform(0.3, Vec3::Zero())), free(lattice, p);
    for (int n = 0; n < 7; ++n) {
        ev.step(with_phase);
        free.step(f);
    }
    for (std::size_t i = 0; i < f.data().size(); ++i)
        EXPECT_LT(std::abs(with_phase.data()[i] - std::exp(I * (0.3 * 7)) * f.data()[i]), 1e-13);
}

TEST(Step, VaryingPotentialPreservesNorm) {
    const int L = 64;
    auto lattice = LatticeSpec::make(1, L, 1);
    auto p = ModelParams::make(0.5);
    std::vector<Vec4> table;
    for (int s = 0; s < L; ++s) table.emplace_back(0.2 * std::sin(2 * pi * s / L), 0.0, 0.0, 0.05 * std::cos(2 * pi * s / L));
    auto f = init_gaussian(lattice, p, packet(0.2, 6.0, Branch::positive_energy), {}, no_warning);
    Evolver ev(lattice, p, FourPotential::per_site(table));
    for (int n = 0; n < 200; ++n) ev.step(f);
    EXPECT_NEAR(f.norm(), 1.0, 1e-12);
    EXPECT_THROW(Evolver(LatticeSpec::make(1, 32, 1), p, FourPotential::per_site(table)), DomainError);
}

TEST(Step, TranslationCovariance) {
    auto lattice = LatticeSpec::make(1, 128, 1);
    auto p = ModelParams::make(0.4);
    auto g = packet(0.3, 7.0, Branch::unprojected);
    g.spinor = Spinor4(0.6, cplx(0.0, 0.3), 0.2, 0.5);
    auto f = init_gaussian(lattice, p, g, {}, no_warning);
    auto [evolved, s1] = evolve(f, p, FourPotential::zero(), 30);
    auto [evolved_shifted, s2] = evolve(translate_1d(f, 13), p, FourPotential::zero(), 30);
    EXPECT_LT(max_diff(translate_1d(evolved, 13), evolved_shifted), 1e-12);
}

TEST(Step, ModePopulationsConserved) {
    auto lattice = LatticeSpec::make(1, 128, 1);
    auto p = ModelParams::make(0.6);
    auto g = packet(0.5, 5.0, Branch::unprojected);
    auto f = init_gaussian(lattice, p, g, {}, no_warning);
    LatticeFft fft(lattice, spinor_components);
    auto populations = [&](const SpinorField& field) {
        auto hat = field.data();
        fft.forward(hat);
        std::vector<double> out(field.sites());
        for (std::size_t m = 0; m < out.size(); ++m)
            out[m] = Eigen::Map<const Spinor4>(hat.data() + m * spinor_components).squaredNorm() / field.sites();
        return out;
    };
    const auto before = populations(f);
    Evolver ev(lattice, p, FourPotential::uniform(0.1, Vec3(0, 0, 0.2)));
    for (int n = 0; n < 200; ++n) ev.step(f);
    const auto after = populations(f);
    for (std::size_t m = 0; m < before.size(); ++m) EXPECT_NEAR(after[m], before[m], 1e-12);
}

TEST(Evolve, ZeroStepsLeavesFieldUnchanged) {
    auto lattice = LatticeSpec::make(1, 64, 1);
    auto p = ModelParams::make(0.5);
    auto f = init_gaussian(lattice, p, packet(0.2, 6.0, Branch::positive_energy), {}, no_warning);
    auto [out, series] = evolve(f, p, FourPotential::zero(), 0);
    EXPECT_EQ(out.data(), f.data());
    ASSERT_EQ(series.records.size(), 1u);
    EXPECT_EQ(series.records[0].step, 0);
    EXPECT_THROW(evolve(f, p, FourPotential::zero(), -1), DomainError);
}

TEST(Evolve, RecordsAreConsistent) {
    auto lattice = LatticeSpec::make(1, 64, 1);
    auto p = ModelParams::make(0.5);
    auto f = init_gaussian(lattice, p, packet(0.2, 6.0, Branch::unprojected), {}, no_warning);
    auto [out, series] = evolve(f, p, FourPotential::zero(), 50);
    ASSERT_EQ(series.records.size(), 51u);
    for (const auto& r : series.records) {
        EXPECT_NEAR(r.norm, 1.0, 1e-12);
        EXPECT_NEAR(r.populations[0] + r.populations[1] + r.populations[2] + r.populations[3], 1.0, 1e-12);
        EXPECT_NEAR(r.momentum.z(), series.records[0].momentum.z(), 1e-12);
    }
}

TEST(Evolve, GroupVelocity) {
    const double eps = 0.3, k0 = 0.5;
    auto lattice = LatticeSpec::make(1, 512, 1);
    auto p = ModelParams::make(eps);
    auto g = packet(k0, 16.0, Branch::positive_energy);
    g.center = Vec3(0, 0, 256);
    auto f = init_gaussian(lattice, p, g, {}, no_warning);
    auto [out, series] = evolve(f, p, FourPotential::zero(), 200);
    const double measured = (series.records.back().position.z() - series.records.front().position.z()) / 200.0;
    const double h = 1e-6;
    const double predicted =
        (eigenphase(Vec3(0, 0, k0 + h), p).phi - eigenphase(Vec3(0, 0, k0 - h), p).phi) / (2 * h);
    EXPECT_NEAR(measured / predicted, 1.0, 0.02) << "measured " << measured << " predicted " << predicted;
}

TEST(Evolve, PositionUnwrapsAcrossSeam) {
    auto lattice = LatticeSpec::make(1, 64, 1);
    auto p = ModelParams::make(0.0);
    auto g = packet(0.5, 4.0, Branch::unprojected);
    g.spinor = Spinor4(0.0, 1.0, 0.0, 0.0);  // moves towards +z at one site per step
    g.center = Vec3(0, 0, 50);
    auto f = init_gaussian(lattice, p, g, {}, no_warning);
    auto [out, series] = evolve(f, p, FourPotential::zero(), 40);
    EXPECT_NEAR(series.records.back().position.z() - series.records.front().position.z(), 40.0, 1e-9);
}

// Same physical packet on finer lattices: eps, k0 halve, width, L and steps double.
TEST(Evolve, ContinuumConvergence) {
    std::vector<double> errors, scales;
    for (int level = 0; level < 3; ++level) {
        const double h = 1.0 / (1 << level);
        const int L = 64 << level, steps = 20 << level;
        auto lattice = LatticeSpec::make(1, L, 1);
        auto p = ModelParams::make(0.2 * h);
        auto g = packet(0.2 * h, 6.0 / h, Branch::positive_energy);
        g.center = Vec3(0, 0, L / 2);
        auto f = init_gaussian(lattice, p, g, {}, no_warning);
        auto [lat, series] = evolve(f, p, FourPotential::zero(), steps);

        SpinorField exact = f;
        LatticeFft fft(lattice, spinor_components);
        fft.forward(exact.data());
        for (std::size_t m = 0; m < exact.sites(); ++m)
            exact.set(m, hamiltonian_propagator(lattice.mode_wavevector(m), p, steps) * exact.at(m));
        fft.backward(exact.data());
        errors.push_back(l2_diff(lat, exact));
        scales.push_back(h);
    }
    const auto fit = fit_order(errors, scales);
    EXPECT_GE(fit.order, 1.8) << errors[0] << " " << errors[1] << " " << errors[2];
}

TEST(Snapshot, RoundTrip) {
    auto lattice = LatticeSpec::make(3, 4, 9);
    GaussianPacket g;
    g.width = 1.0;
    g.branch = Branch::unprojected;
    g.spinor = Spinor4(0.3, cplx(0.1, 0.5), 0.7, -0.2);
    auto f = init_gaussian(lattice, ModelParams::make(0.25), g, {}, nullptr);
    std::stringstream buf;
    write_snapshot(buf, f, 0.25);
    const std::string bytes = buf.str();
    ASSERT_EQ(bytes.size(), 32u + f.data().size() * 16u);
    EXPECT_EQ(bytes.substr(0, 4), "DQLG");
    auto snap = read_snapshot(buf);
    EXPECT_EQ(snap.epsilon, 0.25);
    EXPECT_TRUE(snap.field.lattice() == lattice);
    EXPECT_EQ(snap.field.data(), f.data());
}

TEST(Snapshot, RejectsGarbage) {
    std::stringstream bad("XXXXjunk");
    EXPECT_THROW(read_snapshot(bad), IoError);
    auto lattice = LatticeSpec::make(1, 8, 1);
    std::stringstream buf;
    write_snapshot(buf, SpinorField(lattice), 0.5);
    std::stringstream truncated(buf.str().substr(0, 60));
    EXPECT_THROW(read_snapshot(truncated), IoError);
}
