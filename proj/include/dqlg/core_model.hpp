#pragma once

// Natural units throughout: hbar = c = lattice spacing = time step = 1.
// The mass parameter epsilon is then also the particle mass, and wavevector
// components are dimensionless angles in [-pi, pi).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dqlg/errors.hpp"
#include "dqlg/pauli.hpp"

namespace dqlg {

// ---------------------------------------------------------------------------
// Model parameters

struct ModelParams {
    double epsilon = 0.0;         ///< dimensionless mass, in [0, 1]
    double charge = 1.0;          ///< coupling e; only e*A enters the dynamics
    std::optional<cplx> g;        ///< -1/2 log(-i epsilon); absent at epsilon = 0
    std::optional<cplx> gprime;   ///< -1/2 log(sqrt(1 - epsilon^2)); absent at epsilon = 1

    static ModelParams make(double epsilon, double charge = 1.0) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw DomainError("epsilon must lie in [0, 1], got " + std::to_string(epsilon));
        if (!std::isfinite(charge)) throw DomainError("charge must be finite");
        ModelParams p;
        p.epsilon = epsilon;
        p.charge = charge;
        if (epsilon > 0.0) p.g = -0.5 * std::log(cplx(0.0, -epsilon));
        if (epsilon < 1.0) p.gprime = -0.5 * std::log(cplx(unbend_of(epsilon), 0.0));
        return p;
    }

    /// sqrt(1 - epsilon^2), evaluated without cancellation near epsilon = 1.
    static double unbend_of(double epsilon) { return std::sqrt((1.0 - epsilon) * (1.0 + epsilon)); }

    double unbend_weight() const { return unbend_of(epsilon); }
    cplx bend_weight() const { return cplx(0.0, -epsilon); }
};

// ---------------------------------------------------------------------------
// Lattice geometry

struct LatticeSpec {
    int dims = 1;  ///< 1 or 3 spatial dimensions
    int L = 64;    ///< sites per spatial axis (even)
    int T = 64;    ///< time extent in steps

    static LatticeSpec make(int dims, int L, int T) {
        if (dims != 1 && dims != 3) throw DomainError("spatial dims must be 1 or 3");
        if (L <= 0 || L % 2 != 0) throw DomainError("L must be a positive even integer");
        if (T <= 0) throw DomainError("T must be positive");
        return LatticeSpec{dims, L, T};
    }

    std::size_t sites() const {
        std::size_t l = static_cast<std::size_t>(L);
        return dims == 1 ? l : l * l * l;
    }

    /// Integer mode index for FFT slot j: 0..L/2-1 then -L/2..-1.
    int mode_index(int j) const { return j < L / 2 ? j : j - L; }

    double wavenumber(int n) const { return 2.0 * std::numbers::pi * n / L; }

    /// Spatial wavevector of a flat site/mode index (row-major, z fastest).
    /// In one dimension the lattice axis is z.
    Vec3 mode_wavevector(std::size_t flat) const {
        if (dims == 1) return Vec3(0.0, 0.0, wavenumber(mode_index(static_cast<int>(flat))));
        std::size_t l = static_cast<std::size_t>(L);
        int iz = static_cast<int>(flat % l);
        int iy = static_cast<int>((flat / l) % l);
        int ix = static_cast<int>(flat / (l * l));
        return Vec3(wavenumber(mode_index(ix)), wavenumber(mode_index(iy)), wavenumber(mode_index(iz)));
    }

    /// Site coordinates (0..L-1 per axis) of a flat index.
    std::array<int, 3> site_coords(std::size_t flat) const {
        if (dims == 1) return {0, 0, static_cast<int>(flat)};
        std::size_t l = static_cast<std::size_t>(L);
        return {static_cast<int>(flat / (l * l)), static_cast<int>((flat / l) % l), static_cast<int>(flat % l)};
    }

    friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

// ---------------------------------------------------------------------------
// Minkowski helpers, metric (+, -, -, -)

inline double minkowski(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

inline Vec3 spatial(const Vec4& v) { return Vec3(v[1], v[2], v[3]); }

inline Vec4 four(double t, const Vec3& s) { return Vec4(t, s.x(), s.y(), s.z()); }

// ---------------------------------------------------------------------------
// Spin 4-vectors

/// Light-like spin 4-vector. The spatial part is stored as integer signs:
/// 1D uses (0, 0, +-1); 3D uses the bcc directions (+-1, +-1, +-1)/sqrt(3).
struct Spin4 {
    int s0 = 1;
    std::array<int, 3> sign{0, 0, 1};
    int dims = 1;

    static Spin4 make_1d(int s0, int sz) {
        check_sign(s0);
        check_sign(sz);
        return Spin4{s0, {0, 0, sz}, 1};
    }

    static Spin4 make_3d(int s0, int sx, int sy, int sz) {
        check_sign(s0);
        check_sign(sx);
        check_sign(sy);
        check_sign(sz);
        return Spin4{s0, {sx, sy, sz}, 3};
    }

    /// Integer factor that makes every contraction an exact integer.
    int scale() const { return dims == 1 ? 1 : 3; }

    Vec3 spatial() const {
        double norm = dims == 1 ? 1.0 : 1.0 / std::sqrt(3.0);
        return Vec3(sign[0], sign[1], sign[2]) * norm;
    }

    Vec4 vec() const { return four(s0, spatial()); }

    friend bool operator==(const Spin4&, const Spin4&) = default;

private:
    static void check_sign(int v) {
        if (v != 1 && v != -1) throw DomainError("spin components must be +1 or -1");
    }
};

/// scale * s^mu s'_mu, exact in integer arithmetic.
inline int scaled_contraction(const Spin4& a, const Spin4& b) {
    if (a.dims != b.dims) throw DomainError("contraction of spins with different dimensionality");
    int dot = a.sign[0] * b.sign[0] + a.sign[1] * b.sign[1] + a.sign[2] * b.sign[2];
    return a.scale() * a.s0 * b.s0 - dot;
}

/// Closed chain of spins, s_N == s_0.
struct SpinChain {
    std::vector<Spin4> steps;

    std::size_t size() const { return steps.size(); }
    int dims() const { return steps.empty() ? 1 : steps.front().dims; }

    const Spin4& at_closed(std::size_t w) const { return steps[w % steps.size()]; }

    /// Sum of s0 and of the integer spatial signs: the endpoint displacement
    /// (N, M_x, M_y, M_z) in lattice units.
    std::array<int, 4> magnetization() const {
        std::array<int, 4> m{0, 0, 0, 0};
        for (const auto& s : steps) {
            m[0] += s.s0;
            for (int a = 0; a < 3; ++a) m[a + 1] += s.sign[a];
        }
        return m;
    }
};

// ---------------------------------------------------------------------------
// Wavevectors and potentials

struct WaveVector4 {
    int n_t = 0;
    int n_x = 0;
    int n_y = 0;
    int n_z = 0;

    /// k^mu = 2 pi (n_t / T, n_x / L, n_y / L, n_z / L)
    Vec4 value(const LatticeSpec& lattice) const {
        for (int n : {n_x, n_y, n_z})
            if (n < -lattice.L / 2 || n >= lattice.L / 2)
                throw DomainError("spatial mode index outside [-L/2, L/2)");
        constexpr double two_pi = 2.0 * std::numbers::pi;
        return Vec4(two_pi * n_t / lattice.T, two_pi * n_x / lattice.L, two_pi * n_y / lattice.L,
                    two_pi * n_z / lattice.L);
    }
};

/// Background 4-potential (A_0, A). Either uniform or one value per site.
class FourPotential {
public:
    FourPotential() : values_{Vec4::Zero()}, uniform_(true) {}

    static FourPotential zero() { return {}; }

    static FourPotential uniform(double a0, const Vec3& a) { return uniform(four(a0, a)); }

    static FourPotential uniform(const Vec4& a) {
        check_finite(a);
        FourPotential p;
        p.values_[0] = a;
        return p;
    }

    static FourPotential per_site(std::vector<Vec4> values) {
        if (values.empty()) throw DomainError("per-site potential needs at least one site");
        for (const auto& v : values) check_finite(v);
        FourPotential p;
        p.values_ = std::move(values);
        p.uniform_ = false;
        return p;
    }

    bool is_uniform() const { return uniform_; }
    std::size_t sites() const { return values_.size(); }

    const Vec4& uniform_value() const {
        if (!uniform_) throw DomainError("operation requires a uniform potential");
        return values_[0];
    }

    const Vec4& at(std::size_t site) const { return uniform_ ? values_[0] : values_.at(site); }

    Vec4 mean() const {
        Vec4 acc = Vec4::Zero();
        for (const auto& v : values_) acc += v;
        return acc / static_cast<double>(values_.size());
    }

private:
    static void check_finite(const Vec4& v) {
        if (!v.allFinite()) throw DomainError("potential values must be finite");
    }

    std::vector<Vec4> values_;
    bool uniform_;
};

// ---------------------------------------------------------------------------
// Operations

/// k'^mu = k^mu - e A^mu for a uniform potential.
inline Vec4 shifted_wavevector(const Vec4& k, const FourPotential& potential, const ModelParams& params) {
    if (!potential.is_uniform())
        throw DomainError("shifted_wavevector needs a uniform potential; varying potentials enter as phases");
    return k - params.charge * potential.uniform_value();
}

/// |s'^mu p_mu - s^mu p'_mu| for the step pair (s, s_next), maximised over both.
/// The momentum is written in spin variables, p = (|k_0| s_0, |k| s), and the
/// shifted spin is s' = s - (e A_0 / |p_0|, e A / |p|).
inline double contraction_identity_check(const Spin4& s, const Spin4& s_next, const Vec4& k,
                                         const FourPotential& potential, const ModelParams& params) {
    const Vec4 eA = params.charge * potential.uniform_value();
    const double p0 = std::abs(k[0]);
    const double p3 = spatial(k).norm();

    auto residual = [&](const Spin4& spin) {
        const Vec4 sv = spin.vec();
        const Vec4 p = four(p0 * spin.s0, p3 * spin.spatial());
        Vec4 shift = Vec4::Zero();
        if (eA[0] != 0.0) {
            if (p0 == 0.0) throw DomainError("temporal wavevector must be nonzero when eA_0 != 0");
            shift[0] = eA[0] / p0;
        }
        if (spatial(eA).squaredNorm() != 0.0) {
            if (p3 == 0.0) throw DomainError("spatial wavevector must be nonzero when eA != 0");
            shift.tail<3>() = spatial(eA) / p3;
        }
        const Vec4 sprime = sv - shift;
        const Vec4 pprime = p - eA;
        return std::abs(minkowski(sprime, p) - minkowski(sv, pprime));
    };
    return std::max(residual(s), residual(s_next));
}

struct BlochAngles {
    double theta;
    double phi;
};

inline BlochAngles bloch_angles(const Vec3& direction) {
    if (std::abs(direction.norm() - 1.0) > 1e-12) throw DomainError("direction must be a unit vector");
    double z = std::clamp(direction.z(), -1.0, 1.0);
    return {std::acos(z), std::atan2(direction.y(), direction.x())};
}

/// |+>_s amplitudes on the Bloch sphere for a spatial unit direction.
inline Spinor2 qubit_encode(const Vec3& direction) {
    auto [theta, phi] = bloch_angles(direction);
    Spinor2 v;
    v << std::cos(theta / 2) * std::exp(-I * (phi / 2)), std::sin(theta / 2) * std::exp(I * (phi / 2));
    return v;
}

/// |->_s, orthogonal partner of qubit_encode.
inline Spinor2 qubit_encode_minus(const Vec3& direction) {
    auto [theta, phi] = bloch_angles(direction);
    Spinor2 v;
    v << -std::sin(theta / 2) * std::exp(-I * (phi / 2)), std::cos(theta / 2) * std::exp(I * (phi / 2));
    return v;
}

/// Spin operator (1/2) sigma . u.
inline Mat2 spin_operator(const Vec3& direction) { return 0.5 * pauli::dot(direction); }

} // namespace dqlg
