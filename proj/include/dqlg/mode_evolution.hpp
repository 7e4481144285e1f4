#pragma once

// Per-mode 4x4 operators. Basis ordering is chirality (x) spin, index 2c + s,
// with chirality +1 first. For a spatial wavevector k' with unit direction n,
// K = sigma_z (x) sigma.n satisfies K^2 = 1, and the flip F = sigma_x (x) 1
// anticommutes with it. Every operator below lives in the algebra generated by
// K and F, so exponentials reduce to cos/sin of scalar angles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include "dqlg/core_model.hpp"

namespace dqlg {

enum class OperatorKind { stream, collide, transfer, hamiltonian };

inline const char* to_string(OperatorKind kind) {
    switch (kind) {
    case OperatorKind::stream: return "stream";
    case OperatorKind::collide: return "collide";
    case OperatorKind::transfer: return "transfer";
    case OperatorKind::hamiltonian: return "hamiltonian";
    }
    return "?";
}

struct ModeOperator {
    Mat4 matrix;
    OperatorKind kind;
    Vec3 mode;                   ///< shifted spatial wavevector k'
    cplx global_phase = 1.0;     ///< exp(-i (E - e A_0)) tag; never part of `matrix`

    Mat4 with_global_phase() const { return global_phase * matrix; }
};

/// Spectral projectors of K = sigma_z (x) sigma.k^ onto its +1 / -1 eigenspaces.
/// At k' = 0 the direction defaults to z.
struct ChiralProjectors {
    Mat4 plus;
    Mat4 minus;
};

inline ChiralProjectors chiral_projectors(const Vec3& kprime) {
    const double norm = kprime.norm();
    const Vec3 dir = norm > 0.0 ? Vec3(kprime / norm) : Vec3::UnitZ();
    const Mat4 k = chiral_spin(dir);
    return {0.5 * (Mat4::Identity() + k), 0.5 * (Mat4::Identity() - k)};
}

/// S = exp(i sigma_z (x) sigma.k'): phase e^{+i|k'|} on K = +1, e^{-i|k'|} on K = -1.
inline ModeOperator stream_op(const Vec3& kprime) {
    const double mag = kprime.norm();
    const auto [plus, minus] = chiral_projectors(kprime);
    return {std::exp(I * mag) * plus + std::exp(-I * mag) * minus, OperatorKind::stream, kprime};
}

/// Kept for call sites that carry the lattice dimensionality; the 4x4 form
/// does not depend on it because 1D modes lie along z.
inline ModeOperator stream_op(const Vec3& kprime, int spatial_dims) {
    if (spatial_dims != 1 && spatial_dims != 3) throw DomainError("spatial dims must be 1 or 3");
    if (spatial_dims == 1 && (kprime.x() != 0.0 || kprime.y() != 0.0))
        throw DomainError("1D wavevectors lie along z");
    return stream_op(kprime);
}

/// X = (sigma_x (x) 1) S(k'); involutory.
inline Mat4 collide_generator(const Vec3& kprime) { return chirality_flip() * stream_op(kprime).matrix; }

/// C = sqrt(1 - eps^2) 1 - i eps X.
inline ModeOperator collide_op(const Vec3& kprime, const ModelParams& params) {
    const Mat4 x = collide_generator(kprime);
    return {params.unbend_weight() * Mat4::Identity() + params.bend_weight() * x, OperatorKind::collide, kprime};
}

/// U = sqrt(1 - eps^2) S(k') - i eps sigma_x (x) 1 with k' = k - eA. When an
/// energy reference is given, exp(-i (E - e A_0)) is attached as a tag.
inline ModeOperator transfer_op(const Vec4& k, const FourPotential& potential, const ModelParams& params,
                                std::optional<double> energy = std::nullopt) {
    const Vec4 shifted = shifted_wavevector(k, potential, params);
    const Vec3 kprime = spatial(shifted);
    ModeOperator u{params.unbend_weight() * stream_op(kprime).matrix + params.bend_weight() * chirality_flip(),
                   OperatorKind::transfer, kprime};
    if (energy) {
        const double ea0 = params.charge * potential.uniform_value()[0];
        u.global_phase = std::exp(-I * (*energy - ea0));
    }
    return u;
}

/// Transfer operator for an already shifted spatial wavevector, without phase tag.
inline ModeOperator transfer_op(const Vec3& kprime, const ModelParams& params) {
    return {params.unbend_weight() * stream_op(kprime).matrix + params.bend_weight() * chirality_flip(),
            OperatorKind::transfer, kprime};
}

/// h_D = -sigma_z (x) sigma.k' + eps sigma_x (x) 1.
inline ModeOperator dirac_hamiltonian(const Vec3& kprime, const ModelParams& params) {
    return {-chiral_spin(kprime) + params.epsilon * chirality_flip(), OperatorKind::hamiltonian, kprime};
}

/// Continuum energy sqrt(|k'|^2 + eps^2).
inline double continuum_energy(const Vec3& kprime, double epsilon) { return std::hypot(kprime.norm(), epsilon); }

/// Solution of x = sin(x zeta) on the principal branch: zeta = arcsin(x) / x.
inline double zeta_solve(double x) {
    if (!(x > 0.0 && x <= 1.0)) throw DomainError("zeta_solve needs x in (0, 1], got " + std::to_string(x));
    return std::asin(x) / x;
}

struct DispersionPoint {
    double k_mag;
    double phi;          ///< per-step eigenphase, in [0, pi]
    double E_continuum;  ///< sqrt(k'^2 + eps^2)

    double relative_error() const { return std::abs(phi - E_continuum) / E_continuum; }
};

/// cos(phi) = sqrt(1 - eps^2) cos|k'|, evaluated as an atan2 so small phases
/// keep full relative precision.
inline DispersionPoint eigenphase(const Vec3& kprime, const ModelParams& params) {
    const double mag = kprime.norm();
    const double a = params.unbend_weight();
    const double cosine = a * std::cos(mag);
    const double sine = std::hypot(a * std::sin(mag), params.epsilon);
    return {mag, std::atan2(sine, cosine), continuum_energy(kprime, params.epsilon)};
}

/// Unit generator direction B^ of the phase-stripped transfer operator,
/// U = cos(phi) + i sin(phi) B^, B^ Hermitian with B^2 = 1. At the degenerate
/// point eps = 0, sin|k'| = 0 the z-axis limit is used.
inline Mat4 transfer_generator(const Vec3& kprime, const ModelParams& params) {
    const double mag = kprime.norm();
    const Vec3 dir = mag > 0.0 ? Vec3(kprime / mag) : Vec3::UnitZ();
    const double along = params.unbend_weight() * std::sin(mag);
    const double b = std::hypot(along, params.epsilon);
    if (b == 0.0) return chiral_spin(Vec3::UnitZ());
    return (along * chiral_spin(dir) - params.epsilon * chirality_flip()) / b;
}

/// Projector onto the positive-energy branch of U: eigenvalue e^{-i phi}.
/// It coincides with the +E' eigenspace of h_D at k' = 0 and at eps = 0.
inline Mat4 positive_branch_projector(const Vec3& kprime, const ModelParams& params) {
    return 0.5 * (Mat4::Identity() - transfer_generator(kprime, params));
}

/// Projector onto the +E' eigenspace of h_D: (1 + h_D / E') / 2.
inline Mat4 hamiltonian_positive_projector(const Vec3& kprime, const ModelParams& params) {
    const double e = continuum_energy(kprime, params.epsilon);
    if (e == 0.0) return 0.5 * (Mat4::Identity() - chiral_spin(Vec3::UnitZ()));
    return 0.5 * (Mat4::Identity() + dirac_hamiltonian(kprime, params).matrix / e);
}

/// exp(-i t h_D) in closed form; h_D^2 = E'^2.
inline Mat4 hamiltonian_propagator(const Vec3& kprime, const ModelParams& params, double t) {
    const double e = continuum_energy(kprime, params.epsilon);
    if (e == 0.0) return Mat4::Identity();
    const Mat4 h = dirac_hamiltonian(kprime, params).matrix;
    return std::cos(t * e) * Mat4::Identity() - I * (std::sin(t * e) / e) * h;
}

struct GeneratorOptions {
    /// Use zeta instead of zeta_solve(E').
    std::optional<double> zeta_override;
    /// Compare against h_D at the lattice-dispersion wavevector
    /// sqrt(1 - eps^2) sin|k'| k^ instead of the continuum one. Off by default.
    bool lattice_dispersion = false;
};

/// ||U_stripped - exp(-i zeta h_D)||_max.
inline double generator_residual(const Vec3& kprime, const ModelParams& params, const GeneratorOptions& options = {}) {
    const Mat4 u = transfer_op(kprime, params).matrix;
    Vec3 kh = kprime;
    if (options.lattice_dispersion) {
        const double mag = kprime.norm();
        kh = mag > 0.0 ? Vec3(kprime * (params.unbend_weight() * std::sin(mag) / mag)) : Vec3::Zero();
    }
    const double e = continuum_energy(kh, params.epsilon);
    double zeta = 1.0;
    if (options.zeta_override) {
        zeta = *options.zeta_override;
    } else if (e > 0.0) {
        if (e > 1.0 + 1e-15)
            throw DomainError("generator_residual: E' = " + std::to_string(e) + " exceeds 1, outside the zeta relation");
        zeta = zeta_solve(std::min(e, 1.0));
    }
    return max_abs(u - hamiltonian_propagator(kh, params, zeta));
}

} // namespace dqlg
