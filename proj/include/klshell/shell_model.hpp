/** @file shell_model.hpp

    @brief Pointwise Kirchhoff-Love kinematics and constitutive operators.

    Voigt ordering is (11, 22, 12). Strain-like vectors carry the engineering
    shear 2e_12, stress-like vectors carry s^12, so e . s is the full double
    contraction.
*/
#pragma once

#include "geometry.hpp"

#include <Eigen/Dense>

namespace klshell {

using Eigen::Matrix3d;

struct MaterialParams
{
    double E = 1.0;
    double nu = 0.0;
    double t = 1.0;

    void validate() const
    {
        if (!(E > 0.0) || !(nu >= 0.0 && nu < 0.5) || !(t > 0.0))
            throw InvalidArgument("material: require E > 0, 0 <= nu < 0.5, t > 0");
    }
};

/// Contravariant material tensor at one point, in Voigt form.
struct MaterialOperator
{
    Matrix3d C;    // stress-like = C * strain-like
    Matrix3d Cinv; // strain-like = Cinv * stress-like
    double scaleM = 0.0; // sqrtA t^3 / 12
    double scaleN = 0.0; // sqrtA t

    /// Compliance of C_hat_M = scaleM * C.
    Matrix3d compliance_M() const { return Cinv / scaleM; }
    /// Compliance of C_hat_N = scaleN * C.
    Matrix3d compliance_N() const { return Cinv / scaleN; }
};

/// C^{abst} for the contravariant metric Ainv.
inline double material_component(const Matrix2d& Ainv, double E, double nu, int a, int b, int s, int t)
{
    return E / (2.0 * (1.0 + nu))
           * (Ainv(a, s) * Ainv(b, t) + Ainv(a, t) * Ainv(b, s) + 2.0 * nu / (1.0 - nu) * Ainv(a, b) * Ainv(s, t));
}

/// Closed-form compliance: maps contravariant S to covariant
/// (1+nu)/E S_ab - nu/E (A_st S^st) A_ab.
inline Matrix2d apply_compliance(const Matrix2d& Aab, double E, double nu, const Matrix2d& S)
{
    const Matrix2d lowered = Aab * S * Aab;
    const double trace = (Aab.array() * S.array()).sum();
    return (1.0 + nu) / E * lowered - nu / E * trace * Aab;
}

inline MaterialOperator material_tensor(const GeometryFrame& frame, const MaterialParams& mat)
{
    static constexpr int ia[3] = {0, 1, 0};
    static constexpr int ib[3] = {0, 1, 1};
    MaterialOperator op;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            op.C(r, c) = material_component(frame.Ainv, mat.E, mat.nu, ia[r], ib[r], ia[c], ib[c]);

    // columns: unit stress-like inputs S^11, S^22, S^12 = S^21
    for (int c = 0; c < 3; ++c) {
        Matrix2d S = Matrix2d::Zero();
        S(ia[c], ib[c]) = 1.0;
        S(ib[c], ia[c]) = 1.0;
        const Matrix2d e = apply_compliance(frame.Aab, mat.E, mat.nu, S);
        op.Cinv.col(c) << e(0, 0), e(1, 1), 2.0 * e(0, 1);
    }
    op.scaleM = frame.sqrtA * mat.t * mat.t * mat.t / 12.0;
    op.scaleN = frame.sqrtA * mat.t;
    return op;
}

/// Strain rows per active scalar basis function. Columns are ordered
/// component-major: column c * n + k is component c (u1, u2, u3) of basis k.
struct StrainOperators
{
    Eigen::Matrix<double, 3, Eigen::Dynamic> Bm;   // membrane strain (Voigt)
    Eigen::Matrix<double, 3, Eigen::Dynamic> Bk1;  // bending strain minus Hessian of u3
    Eigen::Matrix<double, 3, Eigen::Dynamic> Hess; // Hessian of u3, per basis (n columns)
    Eigen::Matrix<double, 2, Eigen::Dynamic> Grad3; // gradient of u3, per basis (n columns)
};

inline StrainOperators strain_operators(const GeometryFrame& f, const BasisEval& basis)
{
    const int n = basis.size();
    if (basis.d2.rows() != n || basis.d1.rows() != n)
        throw InvalidArgument("strain_operators: basis needs derivatives up to order 2");
    StrainOperators op;
    op.Bm.setZero(3, 3 * n);
    op.Bk1.setZero(3, 3 * n);
    op.Hess.setZero(3, n);
    op.Grad3.setZero(2, n);

    static constexpr int ia[3] = {0, 1, 0};
    static constexpr int ib[3] = {0, 1, 1};
    const Matrix2d BB = f.Bmix.transpose() * f.Bab; // B^s_a B_sb

    for (int k = 0; k < n; ++k) {
        const double N = basis.values[k];
        const Vector2d dN(basis.d1(k, 0), basis.d1(k, 1));
        for (int v = 0; v < 3; ++v) {
            const int a = ia[v], b = ib[v];
            const double w = v == 2 ? 2.0 : 1.0;
            // tangential components u_r = N
            for (int r = 0; r < 2; ++r) {
                // u_{s|b} for u_r = N: delta_sr dN_b - Gamma^r_{sb} N
                auto cd = [&](int s, int bb) { return (s == r ? dN[bb] : 0.0) - f.Gamma[r](s, bb) * N; };
                op.Bm(v, r * n + k) = w * 0.5 * (cd(a, b) + cd(b, a));
                double k1 = 0.0;
                for (int s = 0; s < 2; ++s)
                    k1 += f.Bmix(s, a) * cd(s, b) + f.Bmix(s, b) * cd(s, a);
                k1 += f.BCd[a](r, b) * N;
                op.Bk1(v, r * n + k) = w * k1;
            }
            // transverse component u_3 = N
            op.Bm(v, 2 * n + k) = -w * f.Bab(a, b) * N;
            double k1 = -BB(a, b) * N;
            for (int s = 0; s < 2; ++s)
                k1 -= f.Gamma[s](a, b) * dN[s];
            op.Bk1(v, 2 * n + k) = w * k1;
        }
        op.Hess.col(k) << basis.d2(k, 0), basis.d2(k, 2), 2.0 * basis.d2(k, 1);
        op.Grad3.col(k) = dN;
    }
    return op;
}

/// symCurl psi as a stress-like Voigt vector from the first partials of psi:
/// psi_d1(i, a) = d psi_i / d xi^a.
inline Eigen::Vector3d sym_curl(const Matrix2d& psi_d1)
{
    return {psi_d1(0, 1), -psi_d1(1, 0), 0.5 * (psi_d1(1, 1) - psi_d1(0, 0))};
}

} // namespace klshell
