#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dqlg {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Spinor2 = Eigen::Vector2cd;
using Spinor4 = Eigen::Vector4cd;

inline constexpr cplx I{0.0, 1.0};

namespace pauli {

inline Mat2 identity() { return Mat2::Identity(); }

inline Mat2 x() {
    Mat2 m;
    m << 0, 1, 1, 0;
    return m;
}

inline Mat2 y() {
    Mat2 m;
    m << 0, -I, I, 0;
    return m;
}

inline Mat2 z() {
    Mat2 m;
    m << 1, 0, 0, -1;
    return m;
}

/// sigma . v
inline Mat2 dot(const Vec3& v) { return v.x() * x() + v.y() * y() + v.z() * z(); }

} // namespace pauli

/// Kronecker product; index of (i, j) is 2*i + j.
inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            out.block<2, 2>(2 * i, 2 * k) = a(i, k) * b;
    return out;
}

/// sigma_z (x) (sigma . v): the chirality-weighted spin projection.
inline Mat4 chiral_spin(const Vec3& v) { return kron(pauli::z(), pauli::dot(v)); }

/// sigma_x (x) 1: the chirality flip.
inline Mat4 chirality_flip() { return kron(pauli::x(), pauli::identity()); }

/// Largest entry magnitude.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.cwiseAbs().maxCoeff();
}

/// ||M^dagger M - I||_max
inline double unitarity_defect(const Mat4& m) { return max_abs(m.adjoint() * m - Mat4::Identity()); }

/// ||M - M^dagger||_max
inline double hermiticity_defect(const Mat4& m) { return max_abs(m - m.adjoint()); }

} // namespace dqlg
