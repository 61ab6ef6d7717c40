/** @file assembly.hpp

    @brief Quadrature-driven assembly of the M-mixed and M-N-mixed saddle
    point systems and of the load vector.

    The assembled matrix K acts on [x | N | u | lambda] (see DofMap):

        [ A    0    B^T   D^T ] [x]   [ 0 ]
        [ 0    AN  -E     0   ] [N] = [ 0 ]
        [ B   -E^T -C     0   ] [u]   [-F ]
        [ D    0    0     0   ] [l]   [ 0 ]

    with a(x,y) = (M(x), M(y))_{C_M^-1}, M(x) = pI + symCurl phi,
    b(y,u) = (grad u3, grad q) - (kappa1(u), M(y)), c(u,v) = (t eps(u), C eps(v))_sqrtA,
    AN = (N, K)_{C_N^-1}, E = (eps(u), K), and D the boundary coupling
    constraint. The M-mixed system has no N block; the M-N-mixed system has
    C = 0.
*/
#pragma once

#include "discretization.hpp"
#include "shell_model.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace klshell {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// n-point Gauss-Legendre rule on [0, 1].
struct GaussRule
{
    std::vector<double> points;
    std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n)
{
    if (n < 1)
        throw InvalidArgument("gauss_legendre: need at least one point");
    GaussRule r;
    r.points.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.points[i] = 0.5 * (1.0 - x);
        r.points[n - 1 - i] = 0.5 * (1.0 + x);
        r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
    }
    return r;
}

struct QuadPoint
{
    Vector2d xi;
    double weight;
};

/// (p+1) x (p+1) Gauss points on every knot span of a tensor space.
inline std::vector<std::vector<QuadPoint>> gauss_rule(const TensorSpace& space, int p)
{
    if (p < 1)
        throw InvalidArgument("gauss_rule: degree must be >= 1");
    const GaussRule g = gauss_legendre(p + 1);
    const auto bu = space.u.breakpoints();
    const auto bv = space.v.breakpoints();
    std::vector<std::vector<QuadPoint>> out;
    for (std::size_t j = 0; j + 1 < bv.size(); ++j)
        for (std::size_t i = 0; i + 1 < bu.size(); ++i) {
            const double hu = bu[i + 1] - bu[i], hv = bv[j + 1] - bv[j];
            std::vector<QuadPoint> el;
            for (std::size_t b = 0; b < g.points.size(); ++b)
                for (std::size_t a = 0; a < g.points.size(); ++a)
                    el.push_back({Vector2d(bu[i] + hu * g.points[a], bv[j] + hv * g.points[b]),
                                  g.weights[a] * g.weights[b] * hu * hv});
            out.push_back(std::move(el));
        }
    return out;
}

enum class Formulation { MMixed, MNMixed };

enum class LoadKind { Area, EdgeLine, Point };

/// Cartesian load. Area loads are per unit surface area (patch = -1: all
/// patches), edge line loads per unit physical length along (patch, side),
/// point loads act at (patch, xi).
struct LoadSpec
{
    LoadKind kind = LoadKind::Area;
    Vector3d direction = Vector3d::UnitZ();
    double magnitude = 0.0;
    int patch = -1;
    Vector2d xi = Vector2d::Zero();
    Side side = Side::South;

    Vector3d vector() const { return magnitude * direction; }
};

struct ShellProblem
{
    MultiPatchSurface surface;
    MaterialParams mat;
    BoundarySpec bc;
    std::vector<LoadSpec> loads;
    Formulation formulation = Formulation::MMixed;
    int degree = 2;
    int elements_u = 1; // per patch
    int elements_v = 1;
    CornerPolicy corner_policy = CornerPolicy::TraceConsistent;
    /// Assemble in units where the bending stiffness E t^3 / 12(1-nu^2) is 1:
    /// E and loads are divided by it, u is unchanged, x and N come out in
    /// units of it.
    bool nondimensional = true;

    double stress_unit() const
    {
        return nondimensional ? mat.E * mat.t * mat.t * mat.t / (12.0 * (1.0 - mat.nu * mat.nu)) : 1.0;
    }

    /// Displacement-type space S^{p,p}_{p-1,p-1} per patch.
    std::vector<TensorSpace> spaces() const
    {
        const TensorSpace s{open_knot_vector(degree, elements_u, degree - 1),
                            open_knot_vector(degree, elements_v, degree - 1)};
        return std::vector<TensorSpace>(surface.size(), s);
    }

    void validate() const
    {
        if (degree < 1)
            throw InvalidArgument("shell problem: degree must be >= 1");
        mat.validate();
        surface.validate();
        bc.validate(surface);
        for (const auto& l : loads)
            if (l.patch >= surface.size() || (l.kind != LoadKind::Area && l.patch < 0))
                throw InvalidArgument("load references an invalid patch");
    }
};

/// Assembled system and its layout.
struct SaddleSystem
{
    SparseMatrix K;
    Eigen::VectorXd rhs;
    DofMap dofs;
    MultiplierSpace mult;
    std::vector<int> kept_multipliers; // reduced multipliers kept after rank pruning
    int n_lambda = 0;
    double stress_unit = 1.0; // x and N unknowns are in these units

    int size() const { return static_cast<int>(K.rows()); }

    /// Block rows/cols: 0 = x, 1 = N, 2 = u, 3 = lambda.
    SparseMatrix block(int r, int c) const
    {
        const int off[5] = {dofs.offset_x(), dofs.offset_N(), dofs.offset_u(), dofs.offset_lambda(),
                            dofs.offset_lambda() + n_lambda};
        return K.block(off[r], off[c], off[r + 1] - off[r], off[c + 1] - off[c]);
    }
};

namespace detail {

/// Inserts a local block into global triplets. Every (i,j) with i != j in the
/// global numbering is written together with its mirror so the result is
/// bitwise symmetric.
struct SymmetricInserter
{
    Triplets& trip;

    /// Diagonal block: local symmetric matrix, same index list for rows and cols.
    void diagonal(const Eigen::MatrixXd& loc, const std::vector<int>& idx)
    {
        const int n = static_cast<int>(idx.size());
        for (int i = 0; i < n; ++i) {
            if (idx[i] < 0)
                continue;
            for (int j = i; j < n; ++j) {
                if (idx[j] < 0)
                    continue;
                const double v = loc(i, j);
                if (v == 0.0)
                    continue;
                if (idx[i] == idx[j]) {
                    trip.emplace_back(idx[i], idx[j], i == j ? v : 2.0 * v);
                } else {
                    trip.emplace_back(idx[i], idx[j], v);
                    trip.emplace_back(idx[j], idx[i], v);
                }
            }
        }
    }

    /// Off-diagonal block: rows/cols in different blocks.
    void coupling(const Eigen::MatrixXd& loc, const std::vector<int>& rows, const std::vector<int>& cols)
    {
        for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
            if (rows[i] < 0)
                continue;
            for (int j = 0; j < static_cast<int>(cols.size()); ++j) {
                if (cols[j] < 0)
                    continue;
                const double v = loc(i, j);
                if (v == 0.0)
                    continue;
                trip.emplace_back(rows[i], cols[j], v);
                trip.emplace_back(cols[j], rows[i], v);
            }
        }
    }
};

inline std::vector<int> local_indices(const DofMap& dofs, int patch, const BasisEval& b, std::initializer_list<Field> fields,
                                      int shift)
{
    std::vector<int> idx;
    idx.reserve(b.size() * fields.size());
    for (Field f : fields)
        for (int a : b.active) {
            const int g = dofs.field(f).global[patch][a];
            idx.push_back(g < 0 ? -1 : g + shift);
        }
    return idx;
}

/// Stress-like Voigt rows of M(y) = q I + symCurl psi for y = (q, psi1, psi2).
inline Eigen::Matrix<double, 3, Eigen::Dynamic> moment_operator(const BasisEval& b)
{
    const int n = b.size();
    Eigen::Matrix<double, 3, Eigen::Dynamic> M = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 3 * n);
    for (int k = 0; k < n; ++k) {
        const double N = b.values[k], d1 = b.d1(k, 0), d2 = b.d1(k, 1);
        M(0, k) = N;
        M(1, k) = N;
        Matrix2d g1 = Matrix2d::Zero(), g2 = Matrix2d::Zero();
        g1.row(0) << d1, d2;
        g2.row(1) << d1, d2;
        M.col(n + k) = sym_curl(g1);
        M.col(2 * n + k) = sym_curl(g2);
    }
    return M;
}

} // namespace detail

/// Load vector F over the u block: <F, v> = int f . (v_i A^i) sqrtA dxi.
inline Eigen::VectorXd assemble_load(const ShellProblem& problem, const DofMap& dofs)
{
    Eigen::VectorXd F = Eigen::VectorXd::Zero(dofs.n_u);
    const int shift = -dofs.offset_u();
    const int p = problem.degree;

    auto add_point = [&](int patch, const BasisEval& b, const GeometryFrame& fr, const Vector3d& f, double w) {
        const auto idx = detail::local_indices(dofs, patch, b, {Field::U1, Field::U2, Field::U3}, shift);
        const int n = b.size();
        for (int c = 0; c < 3; ++c) {
            const double proj = f.dot(fr.con(c));
            for (int k = 0; k < n; ++k)
                if (idx[c * n + k] >= 0)
                    F[idx[c * n + k]] += w * proj * b.values[k];
        }
    };

    for (const auto& load : problem.loads) {
        const Vector3d f = load.vector();
        switch (load.kind) {
        case LoadKind::Area:
            for (int patch = 0; patch < problem.surface.size(); ++patch) {
                if (load.patch >= 0 && load.patch != patch)
                    continue;
                const TensorSpace& sp = dofs.spaces[patch];
                for (const auto& el : gauss_rule(sp, p))
                    for (const auto& q : el) {
                        const GeometryFrame fr = surface_frame(problem.surface.patches[load.patch < 0 ? patch : load.patch], q.xi);
                        add_point(patch, eval_basis(sp, q.xi, 0), fr, f, q.weight * fr.sqrtA);
                    }
            }
            break;
        case LoadKind::EdgeLine: {
            const TensorSpace& sp = dofs.spaces[load.patch];
            const int dir = side_direction(load.side);
            const auto bp = (dir == 0 ? sp.u : sp.v).breakpoints();
            const GaussRule g = gauss_legendre(p + 1);
            for (std::size_t e = 0; e + 1 < bp.size(); ++e)
                for (std::size_t a = 0; a < g.points.size(); ++a) {
                    const double h = bp[e + 1] - bp[e];
                    const Vector2d xi = side_point(load.side, bp[e] + h * g.points[a]);
                    const GeometryFrame fr = surface_frame(problem.surface.patches[load.patch], xi);
                    const double ds = (dir == 0 ? fr.A1 : fr.A2).norm();
                    add_point(load.patch, eval_basis(sp, xi, 0), fr, f, g.weights[a] * h * ds);
                }
            break;
        }
        case LoadKind::Point: {
            const GeometryFrame fr = surface_frame(problem.surface.patches[load.patch], load.xi);
            add_point(load.patch, eval_basis(dofs.spaces[load.patch], load.xi, 0), fr, f, 1.0);
            break;
        }
        }
    }
    return F / problem.stress_unit();
}

/// Raw coupling matrix: rows = raw multiplier coefficients, cols = x block.
inline SparseMatrix assemble_coupling_raw(const ShellProblem& problem, const DofMap& dofs, const MultiplierSpace& mult)
{
    Triplets trip;
    const GaussRule g = gauss_legendre(problem.degree + 1);
    for (const auto& e : mult.edges) {
        const TensorSpace& sp = dofs.spaces[e.patch];
        const int dir = side_direction(e.side);
        const auto bp = (dir == 0 ? sp.u : sp.v).breakpoints();
        const Vector2d n = side_normal(e.side), tau = side_tangent(e.side);
        for (std::size_t el = 0; el + 1 < bp.size(); ++el) {
            const double h = bp[el + 1] - bp[el];
            for (std::size_t a = 0; a < g.points.size(); ++a) {
                const double t = bp[el] + h * g.points[a];
                const double w = g.weights[a] * h;
                const BasisEval b = eval_basis(sp, side_point(e.side, t), 1);
                const UnivariateBasis mu = univariate_basis(e.trace, t, 0);
                const auto xidx = detail::local_indices(dofs, e.patch, b, {Field::P, Field::Phi1, Field::Phi2}, 0);
                const int nb = b.size();
                for (std::size_t j = 0; j < mu.ders[0].size(); ++j) {
                    const double m = mu.ders[0][j] * w;
                    if (m == 0.0)
                        continue;
                    const int rn = e.raw_offset_n + mu.first + static_cast<int>(j);
                    const int rt = e.raw_offset_tau >= 0 ? e.raw_offset_tau + mu.first + static_cast<int>(j) : -1;
                    for (int k = 0; k < nb; ++k) {
                        const double dtau = tau[0] * b.d1(k, 0) + tau[1] * b.d1(k, 1);
                        // (d_tau psi . n + q) mu_n
                        if (xidx[k] >= 0)
                            trip.emplace_back(rn, xidx[k], m * b.values[k]);
                        if (xidx[nb + k] >= 0)
                            trip.emplace_back(rn, xidx[nb + k], m * dtau * n[0]);
                        if (xidx[2 * nb + k] >= 0)
                            trip.emplace_back(rn, xidx[2 * nb + k], m * dtau * n[1]);
                        // d_tau psi . tau mu_tau
                        if (rt >= 0) {
                            if (xidx[nb + k] >= 0)
                                trip.emplace_back(rt, xidx[nb + k], m * dtau * tau[0]);
                            if (xidx[2 * nb + k] >= 0)
                                trip.emplace_back(rt, xidx[2 * nb + k], m * dtau * tau[1]);
                        }
                    }
                }
            }
        }
    }
    SparseMatrix D(mult.raw_count, dofs.n_x);
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

/// Rows phi_b - phi_a - jump = 0 for every coefficient pair on a cut
/// periodic interface; cols = x block.
inline SparseMatrix assemble_cut_constraints(const MultiPatchSurface& surface, const DofMap& dofs)
{
    Triplets trip;
    int row = 0;
    const auto& g1 = dofs.field(Field::Phi1).global;
    const auto& g2 = dofs.field(Field::Phi2).global;
    for (const auto& cut : dofs.cuts) {
        const Interface& itf = surface.interfaces[cut.interface];
        const TensorSpace& sa = dofs.spaces[itf.patch_a];
        const TensorSpace& sb = dofs.spaces[itf.patch_b];
        const auto da = side_dofs(sa, itf.side_a);
        const auto db = side_dofs(sb, itf.side_b);
        const int dir = side_direction(itf.side_a);
        const auto g = detail::greville(dir == 0 ? sa.u : sa.v);
        // running coordinate enters phi1 for xi2 = const sides, phi2 otherwise
        const int slope_comp = dir == 0 ? 0 : 1;
        for (int comp = 0; comp < 2; ++comp) {
            const auto& gl = comp == 0 ? g1 : g2;
            for (std::size_t i = 0; i < da.size(); ++i, ++row) {
                if (gl[itf.patch_b][db[i]] >= 0)
                    trip.emplace_back(row, gl[itf.patch_b][db[i]], 1.0);
                if (gl[itf.patch_a][da[i]] >= 0)
                    trip.emplace_back(row, gl[itf.patch_a][da[i]], -1.0);
                trip.emplace_back(row, cut.offset + comp, -1.0);
                if (comp == slope_comp && g[i] != 0.0)
                    trip.emplace_back(row, cut.offset + 2, -g[i]);
            }
        }
    }
    SparseMatrix D(row, dofs.n_x);
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

/// Indices of a maximal set of linearly independent rows of D, in increasing
/// order (column-pivoted QR of the dense nonzero-column restriction).
inline std::vector<int> independent_rows(const SparseMatrix& D, double rel_tol = 1e-10)
{
    if (D.rows() == 0)
        return {};
    SparseMatrix Dc = D;
    Dc.makeCompressed();
    std::vector<int> used_cols;
    for (int c = 0; c < Dc.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(Dc, c); it; ++it)
            if (it.value() != 0.0) {
                used_cols.push_back(c);
                break;
            }
    Eigen::MatrixXd Dt(used_cols.size(), D.rows()); // transpose, compact columns
    Dt.setZero();
    for (std::size_t i = 0; i < used_cols.size(); ++i)
        for (SparseMatrix::InnerIterator it(Dc, used_cols[i]); it; ++it)
            Dt(i, it.row()) = it.value();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Dt);
    qr.setThreshold(rel_tol);
    const int rank = static_cast<int>(qr.rank());
    std::vector<int> rows;
    for (int i = 0; i < rank; ++i)
        rows.push_back(qr.colsPermutation().indices()[i]);
    std::sort(rows.begin(), rows.end());
    return rows;
}

namespace detail {

inline SaddleSystem assemble_system(const ShellProblem& problem, const DofMap& dofs, const MultiplierSpace& mult,
                                    bool membrane_mixed)
{
    problem.validate();
    if (membrane_mixed != dofs.has_membrane)
        throw InvalidSetup("dof map does not match the formulation (membrane force fields)");
    if ((problem.bc.has(EdgeCondition::SimplySupported) || problem.bc.has(EdgeCondition::Free)) && mult.raw_count == 0)
        throw InvalidSetup("simply supported or free edges require a multiplier space");

    SaddleSystem sys;
    sys.dofs = dofs;
    sys.mult = mult;

    const int p = problem.degree;
    const int ou = dofs.offset_u();
    const double t = problem.mat.t;
    sys.stress_unit = problem.stress_unit();
    MaterialParams mat = problem.mat;
    mat.E /= sys.stress_unit;

    Triplets trip;
    SymmetricInserter ins{trip};

    // the active basis sets are constant on a knot span: accumulate element
    // matrices, insert once per element
    for (int patch = 0; patch < problem.surface.size(); ++patch) {
        const TensorSpace& sp = dofs.spaces[patch];
        const NurbsPatch& geo = problem.surface.patches[patch];
        for (const auto& el : gauss_rule(sp, p)) {
            Eigen::MatrixXd A, B, C, AN, E;
            std::vector<int> xidx, uidx, nidx;
            for (std::size_t iq = 0; iq < el.size(); ++iq) {
                const QuadPoint& q = el[iq];
                const GeometryFrame fr = surface_frame(geo, q.xi);
                const MaterialOperator mo = material_tensor(fr, mat);
                const BasisEval b = eval_basis(sp, q.xi, 2);
                const StrainOperators so = strain_operators(fr, b);
                const int n = b.size();
                const double w = q.weight;
                if (iq == 0) {
                    xidx = local_indices(dofs, patch, b, {Field::P, Field::Phi1, Field::Phi2}, 0);
                    uidx = local_indices(dofs, patch, b, {Field::U1, Field::U2, Field::U3}, 0);
                    A.setZero(3 * n, 3 * n);
                    B.setZero(3 * n, 3 * n);
                    C.setZero(3 * n, 3 * n);
                }

                const auto Mop = moment_operator(b);
                A.noalias() += w * (Mop.transpose() * mo.compliance_M() * Mop);
                B.noalias() -= w * (so.Bk1.transpose() * Mop); // rows u, cols x
                B.block(2 * n, 0, n, n).noalias() += w * (so.Grad3.transpose() * so.Grad3);

                if (!membrane_mixed) {
                    C.noalias() -= (w * t * fr.sqrtA) * (so.Bm.transpose() * mo.C * so.Bm);
                } else {
                    const auto& ns = dofs.n_spaces[patch];
                    std::array<BasisEval, 3> nb;
                    int total = 0;
                    for (int c = 0; c < 3; ++c) {
                        nb[c] = eval_basis(ns[c], q.xi, 0);
                        total += nb[c].size();
                    }
                    Eigen::MatrixXd Nop = Eigen::MatrixXd::Zero(3, total);
                    int col = 0;
                    for (int c = 0; c < 3; ++c)
                        for (int k = 0; k < nb[c].size(); ++k) {
                            Nop(c, col++) = nb[c].values[k];
                            if (iq == 0)
                                nidx.push_back(dofs.membrane[c].global[patch][nb[c].active[k]]);
                        }
                    if (iq == 0) {
                        AN.setZero(total, total);
                        E.setZero(total, 3 * n);
                    }
                    AN.noalias() += w * (Nop.transpose() * mo.compliance_N() * Nop);
                    E.noalias() -= w * (Nop.transpose() * so.Bm); // rows N, cols u
                }
            }
            ins.diagonal(A, xidx);
            ins.coupling(B, uidx, xidx);
            if (!membrane_mixed) {
                ins.diagonal(C, uidx);
            } else {
                ins.diagonal(AN, nidx);
                ins.coupling(E, nidx, uidx);
            }
        }
    }

    // boundary coupling constraint
    const SparseMatrix Draw = assemble_coupling_raw(problem, dofs, mult);
    const SparseMatrix Dbnd = SparseMatrix(mult.T.transpose()) * Draw;
    const SparseMatrix Dcut = assemble_cut_constraints(problem.surface, dofs);
    SparseMatrix Dred(Dbnd.rows() + Dcut.rows(), dofs.n_x);
    {
        Triplets dt;
        for (const auto* M : {&Dbnd, &Dcut}) {
            const int r0 = M == &Dbnd ? 0 : static_cast<int>(Dbnd.rows());
            for (int c = 0; c < M->outerSize(); ++c)
                for (SparseMatrix::InnerIterator it(*M, c); it; ++it)
                    dt.emplace_back(r0 + it.row(), it.col(), it.value());
        }
        Dred.setFromTriplets(dt.begin(), dt.end());
    }
    sys.kept_multipliers = independent_rows(Dred);
    sys.n_lambda = static_cast<int>(sys.kept_multipliers.size());
    {
        const int ol = dofs.offset_lambda();
        const SparseMatrix Dr = Dred;
        std::vector<int> row_to_kept(Dr.rows(), -1);
        for (int i = 0; i < sys.n_lambda; ++i)
            row_to_kept[sys.kept_multipliers[i]] = i;
        for (int c = 0; c < Dr.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(Dr, c); it; ++it) {
                const int r = row_to_kept[it.row()];
                if (r < 0 || it.value() == 0.0)
                    continue;
                trip.emplace_back(ol + r, it.col(), it.value());
                trip.emplace_back(it.col(), ol + r, it.value());
            }
    }

    const int N = dofs.primal_count() + sys.n_lambda;
    sys.K.resize(N, N);
    sys.K.setFromTriplets(trip.begin(), trip.end());
    sys.K.prune(0.0);

    const SparseMatrix asym = sys.K - SparseMatrix(sys.K.transpose());
    for (int c = 0; c < asym.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(asym, c); it; ++it)
            if (it.value() != 0.0)
                throw Error("assembly: assembled matrix is not exactly symmetric");

    sys.rhs = Eigen::VectorXd::Zero(N);
    sys.rhs.segment(ou, dofs.n_u) = -assemble_load(problem, dofs);
    return sys;
}

} // namespace detail

inline SaddleSystem assemble_m_mixed(const ShellProblem& problem, const DofMap& dofs, const MultiplierSpace& mult)
{
    if (problem.formulation != Formulation::MMixed)
        throw InvalidSetup("assemble_m_mixed: problem formulation is not M-mixed");
    return detail::assemble_system(problem, dofs, mult, false);
}

inline SaddleSystem assemble_mn_mixed(const ShellProblem& problem, const DofMap& dofs, const MultiplierSpace& mult)
{
    if (problem.formulation != Formulation::MNMixed)
        throw InvalidSetup("assemble_mn_mixed: problem formulation is not M-N-mixed");
    return detail::assemble_system(problem, dofs, mult, true);
}

/// Builds spaces, DOF map and multipliers for a problem and assembles it.
inline SaddleSystem assemble(const ShellProblem& problem)
{
    const auto spaces = problem.spaces();
    const bool mn = problem.formulation == Formulation::MNMixed;
    const DofMap dofs = build_dof_map(problem.surface, spaces, problem.bc, mn);
    const MultiplierSpace mult = build_multiplier_space(problem.surface, spaces, problem.bc, problem.corner_policy);
    return mn ? assemble_mn_mixed(problem, dofs, mult) : assemble_m_mixed(problem, dofs, mult);
}

} // namespace klshell
