// linalg.hpp: complex 3-vectors / 3x3 tensors and the few helpers built on them

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace mqed {

using cplx = std::complex<double>;
using R3 = Eigen::Vector3d;
using C3 = Eigen::Vector3cd;
using C33 = Eigen::Matrix3cd;
using R33 = Eigen::Matrix3d;

inline constexpr cplx I_unit{0.0, 1.0};

// a . M . b without conjugation.
inline cplx bilinear(const C3& a, const C33& M, const C3& b) {
    return a.transpose() * M * b;
}

inline C33 outer(const C3& a, const C3& b) { return a * b.transpose(); }

inline double max_abs(const C33& M) { return M.cwiseAbs().maxCoeff(); }
inline double max_abs(cplx z) { return std::abs(z); }

inline bool all_finite(const C33& M) { return M.allFinite(); }

inline C3 to_c3(const R3& v) { return v.cast<cplx>(); }

// Entrywise imaginary part as a real tensor lifted back to complex.
inline C33 im(const C33& M) { return M.imag().cast<cplx>(); }
inline C33 re(const C33& M) { return M.real().cast<cplx>(); }

// Principal square root with Im >= 0 (outgoing / decaying wave branch).
inline cplx sqrt_upper(cplx z) {
    cplx s = std::sqrt(z);
    if (s.imag() < 0.0) s = -s;
    return s;
}

// Rotation whose third column is the unit vector `axis`; columns are an
// orthonormal right-handed frame. Deterministic for a given axis.
inline R33 frame_with_axis(const R3& axis) {
    const R3 e3 = axis.normalized();
    const R3 trial = std::abs(e3.x()) < 0.9 ? R3::UnitX() : R3::UnitY();
    const R3 e1 = (trial - trial.dot(e3) * e3).normalized();
    const R3 e2 = e3.cross(e1);
    R33 Q;
    Q.col(0) = e1;
    Q.col(1) = e2;
    Q.col(2) = e3;
    return Q;
}

// Relative deviation max|a - b| / max(max|a|, max|b|, tiny).
inline double rel_deviation(const C33& a, const C33& b) {
    const double scale = std::max({max_abs(a), max_abs(b), 1e-300});
    return max_abs(C33(a - b)) / scale;
}

} // namespace mqed
