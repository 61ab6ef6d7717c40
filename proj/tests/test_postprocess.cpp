#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace kltest;

namespace {

/// Unloaded free plate with an all-zero solution vector.
SolutionFields zero_solution(int degree = 2, int ne = 3)
{
    const ShellProblem pr = flat_plate(degree, ne, EdgeCondition::Free);
    const SaddleSystem sys = assemble(pr);
    return SolutionFields(pr, sys, Eigen::VectorXd::Zero(sys.size()));
}

void set_field(SolutionFields& sol, Field f, const std::function<double(double, double)>& g)
{
    const TensorSpace& s = sol.dofs.spaces[0];
    const auto gu = detail::greville(s.u), gv = detail::greville(s.v);
    for (int j = 0; j < s.size_v(); ++j)
        for (int i = 0; i < s.size_u(); ++i) {
            const int id = sol.dofs.field(f).global[0][s.index(i, j)];
            if (id >= 0)
                sol.z[id] = g(gu[i], gv[j]);
        }
}

SolutionFields solve_case(const RunConfig& c) { return run_case(c).fields; }

/// Moment from the displacement: t^3/12 C kappa(u), contravariant.
Matrix2d constitutive_moment(const SolutionFields& sol, int patch, const Vector2d& xi)
{
    const GeometryFrame fr = surface_frame(sol.problem.surface.patches[patch], xi);
    const BasisEval b = eval_basis(sol.dofs.spaces[patch], xi, 2);
    const StrainOperators op = strain_operators(fr, b);
    const int n = b.size();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(3 * n);
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < n; ++k) {
            const int id = sol.dofs.field(static_cast<Field>(c)).global[patch][b.active[k]];
            if (id >= 0)
                u[c * n + k] = sol.z[id];
        }
    const Eigen::Vector3d kappa = op.Bk1 * u + op.Hess * u.segment(2 * n, n);
    const double t = sol.problem.mat.t;
    const Eigen::Vector3d m = t * t * t / 12.0 * (material_tensor(fr, sol.problem.mat).C * kappa);
    Matrix2d M;
    M << m[0], m[2], m[2], m[1];
    return M;
}

} // namespace

TEST(Fields, ZeroSolution)
{
    const SolutionFields sol = zero_solution();
    for (int k = 0; k < 5; ++k) {
        const Vector2d xi = random_xi();
        EXPECT_EQ(displacement_at(sol, 0, xi).norm(), 0.0);
        EXPECT_EQ(moment_at(sol, 0, xi).M.norm(), 0.0);
        EXPECT_EQ(membrane_force_at(sol, 0, xi).norm(), 0.0);
    }
}

TEST(Fields, UnitNormalDisplacement)
{
    SolutionFields sol = zero_solution();
    set_field(sol, Field::U3, [](double, double) { return 1.0; });
    for (int k = 0; k < 5; ++k)
        EXPECT_LT((displacement_at(sol, 0, random_xi()) - Vector3d(0, 0, 1)).norm(), 1e-14);
}

TEST(Fields, MomentFromStressFunctions)
{
    SolutionFields sol = zero_solution(3, 2);
    set_field(sol, Field::P, [](double, double) { return 2.5; });
    for (int k = 0; k < 5; ++k) {
        const MomentEval m = moment_at(sol, 0, random_xi());
        EXPECT_LT((m.M - 2.5 * Matrix2d::Identity()).norm(), 1e-13);
        EXPECT_NEAR(m.Mxx, 2.5, 1e-13);
        EXPECT_NEAR(m.Mxy, 0.0, 1e-13);
    }
    set_field(sol, Field::P, [](double, double) { return 0.0; });
    set_field(sol, Field::Phi1, [](double, double y) { return y; });
    for (int k = 0; k < 5; ++k) {
        const MomentEval m = moment_at(sol, 0, random_xi());
        EXPECT_NEAR(m.M(0, 0), 1.0, 1e-13);
        EXPECT_NEAR(m.M(1, 1), 0.0, 1e-13);
        EXPECT_NEAR(m.M(0, 1), 0.0, 1e-13);
    }
}

TEST(Fields, InvalidPatchThrows)
{
    const SolutionFields sol = zero_solution();
    EXPECT_THROW(displacement_at(sol, 1, {0.5, 0.5}), InvalidArgument);
    EXPECT_THROW(moment_at(sol, -1, {0.5, 0.5}), InvalidArgument);
}

TEST(Fields, RoofThirtyControlPoints)
{
    RunConfig c;
    c.cps = 30;
    EXPECT_NEAR(run_case(c).report.probe, 0.3004, 1e-4);
}

TEST(Fields, SingleValuedAcrossInterfaces)
{
    RunConfig c;
    c.cps = 10;
    c.layout = PatchLayout::Four;
    const SolutionFields sol = solve_case(c);
    double mmax = 0.0, jump = 0.0;
    for (const auto& itf : sol.problem.surface.interfaces)
        for (int k = 1; k < 10; ++k) {
            const double t = k / 10.0;
            const Vector2d a = side_point(itf.side_a, t), b = side_point(itf.side_b, t);
            const Vector3d ua = displacement_at(sol, itf.patch_a, a), ub = displacement_at(sol, itf.patch_b, b);
            EXPECT_LT((ua - ub).norm(), 1e-12 * (1.0 + ua.norm()));
            const double ma = moment_at(sol, itf.patch_a, a).Mxx, mb = moment_at(sol, itf.patch_b, b).Mxx;
            mmax = std::max({mmax, std::abs(ma), std::abs(mb)});
            jump = std::max(jump, std::abs(ma - mb));
        }
    EXPECT_GT(mmax, 0.0);
    EXPECT_LT(jump, 0.01 * mmax);
}

TEST(Fields, MomentApproachesConstitutiveMoment)
{
    std::vector<double> gap;
    for (int cps : {6, 10, 18}) {
        RunConfig c;
        c.cps = cps;
        const SolutionFields sol = solve_case(c);
        double num = 0.0, den = 0.0;
        for (int i = 1; i < 8; ++i)
            for (int j = 1; j < 8; ++j) {
                const Vector2d xi(i / 8.0 + 0.013, j / 8.0 + 0.007);
                const Matrix2d M = moment_at(sol, 0, xi).M;
                num += (M - constitutive_moment(sol, 0, xi)).squaredNorm();
                den += M.squaredNorm();
            }
        gap.push_back(std::sqrt(num / den));
    }
    EXPECT_LT(gap[1], gap[0]);
    EXPECT_LT(gap[2], gap[1]);
}

TEST(Vtk, SingleCellLayout)
{
    const SolutionFields sol = zero_solution();
    std::ostringstream os;
    write_vtk(os, sol, 2);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
    EXPECT_NE(s.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
    EXPECT_NE(s.find("POINTS 4 double"), std::string::npos);
    EXPECT_NE(s.find("CELLS 1 5\n4 0 1 3 2\n"), std::string::npos);
    EXPECT_NE(s.find("CELL_TYPES 1\n9\n"), std::string::npos);
    EXPECT_NE(s.find("SCALARS Mxx double 1"), std::string::npos);
    EXPECT_EQ(s.find("N11"), std::string::npos);
    EXPECT_THROW(write_vtk(os, sol, 1), InvalidArgument);
}

TEST(Vtk, MembraneFieldsForMnFormulation)
{
    ShellProblem pr = flat_plate(2, 2, EdgeCondition::Free);
    pr.formulation = Formulation::MNMixed;
    const SaddleSystem sys = assemble(pr);
    const SolutionFields sol(pr, sys, Eigen::VectorXd::Zero(sys.size()));
    std::ostringstream os;
    write_vtk(os, sol, 3);
    EXPECT_NE(os.str().find("CELLS 4 20"), std::string::npos);
    EXPECT_NE(os.str().find("SCALARS N12 double 1"), std::string::npos);
}

TEST(Vtk, ReportsUnwritablePath)
{
    const SolutionFields sol = zero_solution();
    try {
        write_vtk(std::string("/nonexistent/dir/out.vtk"), sol, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out.vtk"), std::string::npos);
    }
}

TEST(ProbeCsv, Schema)
{
    std::ostringstream os;
    write_probe_csv(os, {{"a", 0, {0.0, 0.5}, {1, 2, 3}, -3.0}, {"b", 2, {1.0, 0.0}, {0, 0, 0}, 0.25}});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "label,patch,xi1,xi2,ux,uy,uz,value");
    std::getline(is, line);
    EXPECT_EQ(line, "a,0,0,0.5,1,2,3,-3");
    std::getline(is, line);
    EXPECT_EQ(line, "b,2,1,0,0,0,0,0.25");
    EXPECT_FALSE(std::getline(is, line));
}

TEST(SolutionFieldsTest, SizeMismatchThrows)
{
    const ShellProblem pr = flat_plate(2, 2, EdgeCondition::Free);
    const SaddleSystem sys = assemble(pr);
    EXPECT_THROW(SolutionFields(pr, sys, Eigen::VectorXd::Zero(3)), InvalidArgument);
}
