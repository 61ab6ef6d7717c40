#include "support.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace kltest;

namespace {

RunConfig roof(PatchLayout layout, int cps = 5, int degree = 2)
{
    RunConfig c;
    c.id = BenchmarkCase::ScordelisLo;
    c.layout = layout;
    c.cps = cps;
    c.degree = degree;
    return c;
}

DofMap dofs_of(const ShellProblem& p, bool mn = false) { return build_dof_map(p.surface, p.spaces(), p.bc, mn); }

/// Physical positions of the Greville points of every patch.
std::vector<std::vector<Vector3d>> greville_points(const ShellProblem& p)
{
    std::vector<std::vector<Vector3d>> out;
    const auto spaces = p.spaces();
    for (int k = 0; k < p.surface.size(); ++k) {
        const auto gu = detail::greville(spaces[k].u), gv = detail::greville(spaces[k].v);
        std::vector<Vector3d> pts(spaces[k].dof_count());
        for (int j = 0; j < spaces[k].size_v(); ++j)
            for (int i = 0; i < spaces[k].size_u(); ++i)
                pts[spaces[k].index(i, j)] = nurbs_eval(p.surface.patches[k], {gu[i], gv[j]}, 0).x;
        out.push_back(std::move(pts));
    }
    return out;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel = 1e-10)
{
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        r += s[i] > rel * s[0];
    return r;
}

} // namespace

TEST(EdgeCondition, NamesRoundTrip)
{
    for (auto c : {EdgeCondition::Clamped, EdgeCondition::SimplySupported, EdgeCondition::Free})
        EXPECT_EQ(condition_from_name(condition_name(c)), c);
    EXPECT_THROW(condition_from_name("hinged"), InvalidArgument);
}

TEST(DofMap, ClampedFlatPlate)
{
    // p = 2, 2 elements: 4 x 4 functions, only the 2 x 2 interior ones are free
    const ShellProblem pr = flat_plate(2, 2, EdgeCondition::Clamped);
    const DofMap d = dofs_of(pr);
    for (Field f : {Field::U1, Field::U2, Field::U3, Field::P})
        EXPECT_EQ(d.field(f).count, 4);
    // symCurl kernel: two constants plus the rotation mode
    EXPECT_EQ(d.field(Field::Phi1).count, 14);
    EXPECT_EQ(d.field(Field::Phi2).count, 15);
    EXPECT_EQ(d.n_u, 12);
    EXPECT_EQ(d.n_x, 4 + 14 + 15);
    EXPECT_EQ(d.n_N, 0);
    EXPECT_TRUE(d.cuts.empty());
    EXPECT_EQ(d.offset_lambda(), d.primal_count());
}

TEST(DofMap, StripClampedOnOneSide)
{
    RunConfig c;
    c.id = BenchmarkCase::CylinderStrip;
    const ShellProblem pr = make_problem(c);
    const DofMap d = dofs_of(pr);
    const int nu = pr.spaces()[0].size_u(), nv = pr.spaces()[0].size_v();
    for (Field f : {Field::U1, Field::U2, Field::U3, Field::P})
        EXPECT_EQ(d.field(f).count, (nu - 1) * nv);
    // free edges: only the constant mode of phi is pinned
    EXPECT_EQ(d.field(Field::Phi1).count, nu * nv - 1);
    EXPECT_EQ(d.field(Field::Phi2).count, nu * nv - 1);
}

TEST(DofMap, FourPatchGluingMatchesPhysicalPoints)
{
    const ShellProblem pr = make_problem(roof(PatchLayout::Four, 6, 3));
    const DofMap d = dofs_of(pr);
    const auto pts = greville_points(pr);

    // independent count: unique Greville point positions
    std::vector<Vector3d> unique;
    for (const auto& patch : pts)
        for (const auto& x : patch) {
            bool found = false;
            for (const auto& y : unique)
                found = found || (x - y).norm() < 1e-9;
            if (!found)
                unique.push_back(x);
        }
    EXPECT_EQ(d.glued_count, static_cast<int>(unique.size()));

    // every shared unknown sits at one physical point
    std::map<int, Vector3d> where;
    int shared = 0;
    for (int p = 0; p < pr.surface.size(); ++p)
        for (std::size_t loc = 0; loc < pts[p].size(); ++loc) {
            const int g = d.field(Field::U3).global[p][loc];
            if (g < 0)
                continue;
            auto [it, inserted] = where.emplace(g, pts[p][loc]);
            if (!inserted) {
                ++shared;
                EXPECT_LT((it->second - pts[p][loc]).norm(), 1e-12 * 25.0);
            }
        }
    EXPECT_GT(shared, 0);
}

TEST(DofMap, BoundaryConditionsRemoveTheRightComponents)
{
    const ShellProblem pr = make_problem(roof(PatchLayout::Single, 6));
    const DofMap d = dofs_of(pr);
    const TensorSpace s = pr.spaces()[0];
    for (Side side : {Side::South, Side::North}) {
        ASSERT_EQ(pr.bc.at(0, side), EdgeCondition::SimplySupported);
        for (int loc : side_dofs(s, side)) {
            EXPECT_EQ(d.field(Field::U1).global[0][loc], -1);
            EXPECT_EQ(d.field(Field::U3).global[0][loc], -1);
            EXPECT_EQ(d.field(Field::P).global[0][loc], -1);
        }
        // the transverse tangential component stays free away from corners
        const auto ids = side_dofs(s, side);
        for (std::size_t k = 1; k + 1 < ids.size(); ++k)
            EXPECT_GE(d.field(Field::U2).global[0][ids[k]], 0);
    }
    const auto west = side_dofs(s, Side::West);
    for (std::size_t k = 1; k + 1 < west.size(); ++k)
        EXPECT_GE(d.field(Field::P).global[0][west[k]], 0);
}

TEST(DofMap, ClampedEdgesFixEveryDisplacementAndP)
{
    const ShellProblem pr = flat_plate(3, 3, EdgeCondition::Clamped);
    const DofMap d = dofs_of(pr);
    const TensorSpace s = pr.spaces()[0];
    for (Side side : {Side::West, Side::East, Side::South, Side::North})
        for (int loc : side_dofs(s, side))
            for (Field f : {Field::U1, Field::U2, Field::U3, Field::P})
                EXPECT_EQ(d.field(f).global[0][loc], -1);
}

TEST(DofMap, MembraneForceSpacesAreOneDegreeLower)
{
    const ShellProblem pr = flat_plate(3, 4, EdgeCondition::Clamped);
    const DofMap d = dofs_of(pr, true);
    ASSERT_TRUE(d.has_membrane);
    const TensorSpace s = pr.spaces()[0];
    // N11 in S^{p-1,p}, N22 in S^{p,p-1}, N12 in S^{p-1,p-1}
    const int lo = s.u.derivative_space().dimension(), hi = s.u.dimension();
    EXPECT_EQ(d.membrane[0].count, lo * hi);
    EXPECT_EQ(d.membrane[1].count, hi * lo);
    EXPECT_EQ(d.membrane[2].count, lo * lo);
    EXPECT_EQ(d.n_N, 2 * lo * hi + lo * lo);
}

TEST(DofMap, PeriodicCylinderGetsPhiJump)
{
    RunConfig c;
    c.id = BenchmarkCase::PinchedCylinder;
    c.cps = 5;
    c.degree = 3;
    const DofMap d = dofs_of(make_problem(c));
    EXPECT_EQ(d.cuts.size(), 1u);
}

TEST(DofMap, HemispherePoleLoopIsNotCut)
{
    RunConfig c;
    c.id = BenchmarkCase::Hemisphere;
    c.cps = 5;
    c.degree = 3;
    EXPECT_TRUE(dofs_of(make_problem(c)).cuts.empty());
}

TEST(DofMap, RejectsReversedInterface)
{
    ShellProblem pr = make_problem(roof(PatchLayout::Four));
    pr.surface.interfaces[0].reversed = true;
    EXPECT_THROW(dofs_of(pr), Unsupported);
}

TEST(DofMap, RejectsNonconformingInterface)
{
    const ShellProblem pr = make_problem(roof(PatchLayout::Four));
    auto spaces = pr.spaces();
    spaces[1] = TensorSpace{open_knot_vector(2, 4, 1), open_knot_vector(2, 4, 1)};
    EXPECT_THROW(build_dof_map(pr.surface, spaces, pr.bc, false), Unsupported);
}

TEST(BoundarySpec, RequiresEveryExteriorSide)
{
    ShellProblem pr = flat_plate(2, 2, EdgeCondition::Clamped);
    pr.bc.edges.erase({0, Side::North});
    EXPECT_THROW(pr.bc.validate(pr.surface), InvalidSetup);
    // interface sides must not carry a condition
    ShellProblem four = make_problem(roof(PatchLayout::Four));
    const auto& itf = four.surface.interfaces[0];
    four.bc.set(itf.patch_a, itf.side_a, EdgeCondition::Free);
    EXPECT_THROW(four.bc.validate(four.surface), InvalidSetup);
}

TEST(MultiplierSpace, EmptyWhenAllClamped)
{
    const ShellProblem pr = flat_plate(2, 4, EdgeCondition::Clamped);
    EXPECT_TRUE(build_multiplier_space(pr.surface, pr.spaces(), pr.bc).empty());
}

TEST(MultiplierSpace, FreeSquareCornerCoupling)
{
    // 4 edges x (mu_n, mu_tau) x 5 trace functions (degree 1, C0, 4 elements);
    // each corner ties 4 raw values to one 2-vector
    ShellProblem pr = flat_plate(2, 4, EdgeCondition::Free);
    for (CornerPolicy policy : {CornerPolicy::Gradient, CornerPolicy::TraceConsistent}) {
        const MultiplierSpace m = build_multiplier_space(pr.surface, pr.spaces(), pr.bc, policy);
        EXPECT_EQ(m.raw_count, 40);
        EXPECT_EQ(m.count(), 32);
        for (const auto& e : m.edges) {
            EXPECT_EQ(e.trace.degree, 1);
            EXPECT_EQ(e.trace.dimension(), 5);
        }
    }
}

TEST(MultiplierSpace, SimplySupportedEdgesCarryNormalComponentOnly)
{
    const ShellProblem pr = make_problem(roof(PatchLayout::Single, 6));
    const MultiplierSpace m = build_multiplier_space(pr.surface, pr.spaces(), pr.bc);
    int ss = 0, free = 0;
    for (const auto& e : m.edges) {
        if (e.cond == EdgeCondition::SimplySupported) {
            ++ss;
            EXPECT_EQ(e.raw_offset_tau, -1);
        } else {
            ++free;
            EXPECT_EQ(e.cond, EdgeCondition::Free);
            EXPECT_GE(e.raw_offset_tau, 0);
        }
    }
    EXPECT_EQ(ss, 2);
    EXPECT_EQ(free, 2);
}

TEST(MultiplierSpace, PrunedCouplingHasFullRowRank)
{
    for (EdgeCondition c : {EdgeCondition::Free, EdgeCondition::SimplySupported}) {
        ShellProblem pr = flat_plate(2, 3, c);
        const DofMap d = dofs_of(pr);
        const MultiplierSpace m = build_multiplier_space(pr.surface, pr.spaces(), pr.bc, pr.corner_policy);
        const Eigen::MatrixXd D = Eigen::MatrixXd(SparseMatrix(m.T.transpose() * assemble_coupling_raw(pr, d, m)));
        const std::vector<int> kept = independent_rows(SparseMatrix(D.sparseView()));
        Eigen::MatrixXd Dk(kept.size(), D.cols());
        for (std::size_t i = 0; i < kept.size(); ++i)
            Dk.row(i) = D.row(kept[i]);
        const int r = numerical_rank(D);
        EXPECT_EQ(static_cast<int>(kept.size()), r);
        EXPECT_EQ(numerical_rank(Dk), r);
    }
}
