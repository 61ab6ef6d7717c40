/** @file postprocess.hpp

    @brief Field evaluation on a solved system (displacements, bending
    moments, membrane forces) and VTK / CSV export.
*/
#pragma once

#include "linsolve.hpp"

#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

namespace klshell {

/// Solved problem. Owns copies of everything it needs.
struct SolutionFields
{
    ShellProblem problem;
    DofMap dofs;
    Eigen::VectorXd z; // full solution vector [x | N | u | lambda], physical units

    SolutionFields() = default;
    SolutionFields(ShellProblem p, const SaddleSystem& sys, Eigen::VectorXd sol)
        : problem(std::move(p)), dofs(sys.dofs), z(std::move(sol))
    {
        if (z.size() != sys.size())
            throw InvalidArgument("solution size does not match the system");
        z.segment(dofs.offset_x(), dofs.n_x + dofs.n_N) *= sys.stress_unit;
    }

    Eigen::VectorXd x_block() const { return z.segment(dofs.offset_x(), dofs.n_x); }
    Eigen::VectorXd u_block() const { return z.segment(dofs.offset_u(), dofs.n_u); }
};

/// Value and first partials of a scalar main field.
struct ScalarEval
{
    double value = 0.0;
    Vector2d grad = Vector2d::Zero();
};

inline ScalarEval field_at(const SolutionFields& sol, Field f, int patch, const BasisEval& b)
{
    ScalarEval r;
    const auto& g = sol.dofs.field(f).global[patch];
    const bool with_d1 = b.d1.rows() == b.size();
    for (int k = 0; k < b.size(); ++k) {
        const int i = g[b.active[k]];
        if (i < 0)
            continue;
        r.value += sol.z[i] * b.values[k];
        if (with_d1)
            r.grad += sol.z[i] * Vector2d(b.d1(k, 0), b.d1(k, 1));
    }
    return r;
}

inline void check_patch(const SolutionFields& sol, int patch)
{
    if (patch < 0 || patch >= sol.problem.surface.size())
        throw InvalidArgument("invalid patch index " + std::to_string(patch));
}

/// Cartesian displacement u_i A^i.
inline Vector3d displacement_at(const SolutionFields& sol, int patch, const Vector2d& xi)
{
    check_patch(sol, patch);
    const GeometryFrame fr = surface_frame(sol.problem.surface.patches[patch], xi);
    const BasisEval b = eval_basis(sol.dofs.spaces[patch], xi, 0);
    Vector3d u = Vector3d::Zero();
    for (int c = 0; c < 3; ++c)
        u += field_at(sol, static_cast<Field>(c), patch, b).value * fr.con(c);
    return u;
}

struct MomentEval
{
    Matrix2d M;        // contravariant components, measure sqrtA removed
    Eigen::Matrix3d cartesian; // M^ab A_a (x) A_b
    double Mxx = 0.0;  // component along e_x = A1/|A1|
    double Myy = 0.0;  // along e_y = A3 x e_x
    double Mxy = 0.0;
};

/// Bending moment M = pI + symCurl phi, reported without the sqrtA factor.
inline MomentEval moment_at(const SolutionFields& sol, int patch, const Vector2d& xi)
{
    check_patch(sol, patch);
    const GeometryFrame fr = surface_frame(sol.problem.surface.patches[patch], xi);
    const BasisEval b = eval_basis(sol.dofs.spaces[patch], xi, 1);
    const ScalarEval p = field_at(sol, Field::P, patch, b);
    const ScalarEval f1 = field_at(sol, Field::Phi1, patch, b);
    const ScalarEval f2 = field_at(sol, Field::Phi2, patch, b);
    Matrix2d d;
    d.row(0) = f1.grad.transpose();
    d.row(1) = f2.grad.transpose();
    const Eigen::Vector3d s = sym_curl(d);
    MomentEval m;
    m.M << p.value + s[0], s[2], s[2], p.value + s[1];
    m.M /= fr.sqrtA;
    m.cartesian.setZero();
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
            m.cartesian += m.M(a, c) * fr.cov(a) * fr.cov(c).transpose();
    const Vector3d ex = fr.A1.normalized();
    const Vector3d ey = fr.A3.cross(ex);
    m.Mxx = ex.dot(m.cartesian * ex);
    m.Myy = ey.dot(m.cartesian * ey);
    m.Mxy = ex.dot(m.cartesian * ey);
    return m;
}

/// Contravariant membrane force components, measure sqrtA removed. Taken
/// from the independent field for the M-N-mixed formulation, otherwise
/// recovered as t C eps(u).
inline Matrix2d membrane_force_at(const SolutionFields& sol, int patch, const Vector2d& xi)
{
    check_patch(sol, patch);
    const GeometryFrame fr = surface_frame(sol.problem.surface.patches[patch], xi);
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    if (sol.dofs.has_membrane) {
        for (int c = 0; c < 3; ++c) {
            const BasisEval b = eval_basis(sol.dofs.n_spaces[patch][c], xi, 0);
            for (int k = 0; k < b.size(); ++k)
                n[c] += sol.z[sol.dofs.membrane[c].global[patch][b.active[k]]] * b.values[k];
        }
        n /= fr.sqrtA;
    } else {
        const BasisEval b = eval_basis(sol.dofs.spaces[patch], xi, 2);
        const StrainOperators so = strain_operators(fr, b);
        Eigen::VectorXd uloc = Eigen::VectorXd::Zero(3 * b.size());
        for (int c = 0; c < 3; ++c) {
            const auto& g = sol.dofs.field(static_cast<Field>(c)).global[patch];
            for (int k = 0; k < b.size(); ++k)
                if (g[b.active[k]] >= 0)
                    uloc[c * b.size() + k] = sol.z[g[b.active[k]]];
        }
        n = sol.problem.mat.t * (material_tensor(fr, sol.problem.mat).C * (so.Bm * uloc));
    }
    Matrix2d N;
    N << n[0], n[2], n[2], n[1];
    return N;
}

namespace detail {

/// Frames are singular on collapsed edges; sample just inside instead.
inline Vector2d regular_point(const NurbsPatch& patch, Vector2d xi)
{
    const Vector2d c(0.5, 0.5);
    for (int k = 0; k < 8; ++k) {
        try {
            surface_frame(patch, xi);
            return xi;
        } catch (const SingularGeometry&) {
            xi += 1e-6 * std::pow(10.0, k) * (c - xi);
        }
    }
    return xi;
}

} // namespace detail

/// Legacy ASCII VTK unstructured grid of the undeformed midsurface sampled on
/// resolution x resolution points per patch, with point data ux, uy, uz,
/// Mxx and, for the M-N-mixed formulation, N11, N22, N12.
inline void write_vtk(std::ostream& os, const SolutionFields& sol, int resolution)
{
    if (resolution < 2)
        throw InvalidArgument("vtk export: resolution must be >= 2");
    const int np = sol.problem.surface.size();
    const int per = resolution * resolution;
    std::vector<Vector3d> pts, disp;
    std::vector<double> mxx;
    std::vector<Matrix2d> nf;
    for (int p = 0; p < np; ++p) {
        const NurbsPatch& g = sol.problem.surface.patches[p];
        for (int j = 0; j < resolution; ++j)
            for (int i = 0; i < resolution; ++i) {
                const Vector2d xi(double(i) / (resolution - 1), double(j) / (resolution - 1));
                pts.push_back(nurbs_eval(g, xi, 0).x);
                const Vector2d xr = detail::regular_point(g, xi);
                disp.push_back(displacement_at(sol, p, xr));
                mxx.push_back(moment_at(sol, p, xr).Mxx);
                if (sol.dofs.has_membrane)
                    nf.push_back(membrane_force_at(sol, p, xr));
            }
    }
    const int ncell = np * (resolution - 1) * (resolution - 1);
    os << "# vtk DataFile Version 3.0\n";
    os << "klshell solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(12);
    os << "POINTS " << pts.size() << " double\n";
    for (const auto& x : pts)
        os << x[0] << " " << x[1] << " " << x[2] << "\n";
    os << "CELLS " << ncell << " " << 5 * ncell << "\n";
    for (int p = 0; p < np; ++p)
        for (int j = 0; j + 1 < resolution; ++j)
            for (int i = 0; i + 1 < resolution; ++i) {
                const int a = p * per + j * resolution + i;
                os << "4 " << a << " " << a + 1 << " " << a + 1 + resolution << " " << a + resolution << "\n";
            }
    os << "CELL_TYPES " << ncell << "\n";
    for (int c = 0; c < ncell; ++c)
        os << "9\n";
    os << "POINT_DATA " << pts.size() << "\n";
    auto scalar = [&](const char* name, auto get) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t k = 0; k < pts.size(); ++k)
            os << get(k) << "\n";
    };
    scalar("ux", [&](std::size_t k) { return disp[k][0]; });
    scalar("uy", [&](std::size_t k) { return disp[k][1]; });
    scalar("uz", [&](std::size_t k) { return disp[k][2]; });
    scalar("Mxx", [&](std::size_t k) { return mxx[k]; });
    if (sol.dofs.has_membrane) {
        scalar("N11", [&](std::size_t k) { return nf[k](0, 0); });
        scalar("N22", [&](std::size_t k) { return nf[k](1, 1); });
        scalar("N12", [&](std::size_t k) { return nf[k](0, 1); });
    }
}

inline void write_vtk(const std::string& path, const SolutionFields& sol, int resolution)
{
    std::ofstream f(path);
    if (!f)
        throw Error("cannot open '" + path + "' for writing");
    write_vtk(f, sol, resolution);
    if (!f)
        throw Error("write failed for '" + path + "'");
}

/// One probe sample: location, displacement and the surveyed quantity.
struct ProbeRow
{
    std::string label;
    int patch = 0;
    Vector2d xi = Vector2d::Zero();
    Vector3d u = Vector3d::Zero();
    double value = 0.0;
};

/// CSV with header row; the surveyed quantity is the last column.
inline void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows)
{
    os << "label,patch,xi1,xi2,ux,uy,uz,value\n";
    os << std::setprecision(12);
    for (const auto& r : rows)
        os << r.label << "," << r.patch << "," << r.xi[0] << "," << r.xi[1] << "," << r.u[0] << "," << r.u[1] << ","
           << r.u[2] << "," << r.value << "\n";
}

inline void write_probe_csv(const std::string& path, const std::vector<ProbeRow>& rows)
{
    std::ofstream f(path);
    if (!f)
        throw Error("cannot open '" + path + "' for writing");
    write_probe_csv(f, rows);
}

} // namespace klshell
