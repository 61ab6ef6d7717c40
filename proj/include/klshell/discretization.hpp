/** @file discretization.hpp

    @brief Degrees of freedom: C0 multi-patch gluing, essential boundary
    conditions by elimination, membrane-force spaces and the boundary
    multiplier space with corner coupling.
*/
#pragma once

#include "geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace klshell {

enum class EdgeCondition { Clamped, SimplySupported, Free };

inline const char* condition_name(EdgeCondition c)
{
    switch (c) {
    case EdgeCondition::Clamped: return "clamped";
    case EdgeCondition::SimplySupported: return "simply_supported";
    default: return "free";
    }
}

inline EdgeCondition condition_from_name(const std::string& s)
{
    if (s == "clamped")
        return EdgeCondition::Clamped;
    if (s == "simply_supported" || s == "simply-supported")
        return EdgeCondition::SimplySupported;
    if (s == "free")
        return EdgeCondition::Free;
    throw InvalidArgument("unknown edge condition '" + s + "'");
}

/// Condition per boundary side. Interface sides must not appear.
struct BoundarySpec
{
    std::map<std::pair<int, Side>, EdgeCondition> edges;

    void set(int patch, Side s, EdgeCondition c) { edges[{patch, s}] = c; }

    EdgeCondition at(int patch, Side s) const
    {
        auto it = edges.find({patch, s});
        if (it == edges.end())
            throw InvalidSetup(std::string("boundary side without condition: patch ") + std::to_string(patch) + " "
                               + side_name(s));
        return it->second;
    }

    bool has(EdgeCondition c) const
    {
        for (const auto& [k, v] : edges)
            if (v == c)
                return true;
        return false;
    }

    void validate(const MultiPatchSurface& surface) const
    {
        for (int p = 0; p < surface.size(); ++p)
            for (int s = 0; s < 4; ++s) {
                const Side side = static_cast<Side>(s);
                const bool itf = surface.is_interface(p, side);
                const bool set = edges.count({p, side}) > 0;
                if (itf && set)
                    throw InvalidSetup("boundary condition given on an interface side");
                if (!itf && !set)
                    throw InvalidSetup(std::string("boundary side without condition: patch ") + std::to_string(p)
                                       + " " + side_name(side));
            }
    }
};

/// Fields on the displacement-type space S^{p,p}_{p-1,p-1}.
enum class Field { U1 = 0, U2, U3, P, Phi1, Phi2 };
inline constexpr int kMainFields = 6;

/// Global numbering of one scalar field: local -> global per patch, -1 when
/// eliminated.
struct FieldDofs
{
    std::vector<std::vector<int>> global;
    int offset = 0;
    int count = 0;
};

/// Layout of the unknown vector: [x = (p, phi1, phi2) | N = (N11, N22, N12) |
/// u = (u1, u2, u3) | lambda]. The N block is empty for the M-mixed system.
struct DofMap
{
    std::vector<TensorSpace> spaces;                  // per patch, main fields
    std::vector<std::array<TensorSpace, 3>> n_spaces; // per patch, N11 N22 N12
    std::array<FieldDofs, kMainFields> main;
    std::array<FieldDofs, 3> membrane;
    bool has_membrane = false;

    /// Cut periodic interface: phi on patch_b minus phi on patch_a equals a
    /// symCurl kernel element (a, b + c s) or (a + c s, b), s the running
    /// coordinate; (a, b, c) are x unknowns at offset, offset+1, offset+2.
    struct CutJump
    {
        int interface;
        int offset;
    };
    std::vector<CutJump> cuts;

    int n_x = 0, n_N = 0, n_u = 0;
    int glued_count = 0; // scalar DOFs after gluing, before elimination

    int offset_x() const { return 0; }
    int offset_N() const { return n_x; }
    int offset_u() const { return n_x + n_N; }
    int offset_lambda() const { return n_x + n_N + n_u; }
    int primal_count() const { return n_x + n_N + n_u; }

    const FieldDofs& field(Field f) const { return main[static_cast<int>(f)]; }
};

namespace detail {

struct UnionFind
{
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i)
    {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

/// True when all control points of a side coincide.
inline bool collapsed_side(const NurbsPatch& p, Side side, double tol_rel = 1e-12)
{
    double scale = 1.0;
    for (const auto& c : p.control_points)
        scale = std::max(scale, c.norm());
    const auto ids = side_dofs(p.space, side);
    for (int i : ids)
        if ((p.control_points[i] - p.control_points[ids.front()]).norm() > tol_rel * scale)
            return false;
    return true;
}

/// Parametric shift from patch_a to patch_b across an interface.
inline Vector2d interface_shift(const Interface& itf)
{
    if (itf.reversed)
        throw Unsupported("reversed interfaces are not supported (parametric orientation must match)");
    if (itf.side_a == Side::East && itf.side_b == Side::West)
        return {1.0, 0.0};
    if (itf.side_a == Side::North && itf.side_b == Side::South)
        return {0.0, 1.0};
    if (itf.side_a == Side::West && itf.side_b == Side::East)
        return {-1.0, 0.0};
    if (itf.side_a == Side::South && itf.side_b == Side::North)
        return {0.0, -1.0};
    throw Unsupported("interfaces must join opposite sides (E-W or N-S) with matching orientation");
}

/// Patches placed in one global parameter plane along a spanning tree of the
/// interface graph. Interfaces closing a loop with a nonzero shift (periodic
/// closures) are cut: the parameter domain becomes simply connected.
struct InterfaceLayout
{
    std::vector<Vector2d> offsets;
    std::vector<char> cut; // per interface

    bool has_cut() const { return std::find(cut.begin(), cut.end(), 1) != cut.end(); }
};

inline InterfaceLayout interface_layout(const MultiPatchSurface& s)
{
    const int ni = static_cast<int>(s.interfaces.size());
    std::vector<std::optional<Vector2d>> off(s.size());
    std::vector<char> tree(ni, 0);
    off[0] = Vector2d::Zero();
    for (bool changed = true; changed;) {
        changed = false;
        for (int k = 0; k < ni; ++k) {
            const auto& itf = s.interfaces[k];
            const Vector2d d = interface_shift(itf);
            auto& a = off[itf.patch_a];
            auto& b = off[itf.patch_b];
            if (a && !b) {
                b = *a + d;
                tree[k] = changed = true;
            } else if (!a && b) {
                a = *b - d;
                tree[k] = changed = true;
            }
        }
    }
    InterfaceLayout out;
    for (const auto& o : off) {
        if (!o)
            throw Unsupported("multi-patch surface is not connected");
        out.offsets.push_back(*o);
    }
    out.cut.assign(ni, 0);
    for (int k = 0; k < ni; ++k) {
        const auto& itf = s.interfaces[k];
        const Vector2d gap = out.offsets[itf.patch_b] - out.offsets[itf.patch_a] - interface_shift(itf);
        if (tree[k] || gap.norm() <= 1e-12)
            continue;
        // a loop around a collapsed side (pole) is contractible
        const int dir = std::abs(gap[0]) > std::abs(gap[1]) ? 0 : 1;
        bool contractible = false;
        for (const auto& p : s.patches)
            for (Side side : {Side::West, Side::East, Side::South, Side::North})
                if (side_direction(side) == dir && collapsed_side(p, side))
                    contractible = true;
        if (!contractible)
            out.cut[k] = 1;
    }
    return out;
}

/// Greville abscissae of a knot vector.
inline std::vector<double> greville(const KnotVector& kv)
{
    std::vector<double> g(kv.dimension(), 0.0);
    for (int i = 0; i < kv.dimension(); ++i) {
        for (int j = 1; j <= kv.degree; ++j)
            g[i] += kv.knots[i + j];
        g[i] = kv.degree > 0 ? g[i] / kv.degree : 0.5 * (kv.knots[i] + kv.knots[i + 1]);
    }
    return g;
}

} // namespace detail

/// Membrane-force spaces of a displacement space: N11 reduced in xi1,
/// N22 reduced in xi2, N12 reduced in both.
inline std::array<TensorSpace, 3> membrane_force_spaces(const TensorSpace& s)
{
    return {TensorSpace{s.u.derivative_space(), s.v}, TensorSpace{s.u, s.v.derivative_space()},
            TensorSpace{s.u.derivative_space(), s.v.derivative_space()}};
}

/// Builds the global numbering. Essential conditions:
///   clamped:          u1 = u2 = u3 = 0, p = 0
///   simply supported: u3 = 0, covariant component along the edge = 0, p = 0
///                     (u1 on south/north sides, u2 on west/east sides)
///   free:             none
/// phi carries no essential condition; its symCurl kernel (constants, plus
/// the rotation mode when no free edge exists) is removed by fixing the
/// corresponding coefficients to zero. phi is not glued across cut periodic
/// interfaces (see InterfaceLayout); the jump there is a kernel element with
/// three extra unknowns per cut.
inline DofMap build_dof_map(const MultiPatchSurface& surface, const std::vector<TensorSpace>& spaces,
                            const BoundarySpec& bc, bool with_membrane_forces)
{
    if (static_cast<int>(spaces.size()) != surface.size())
        throw InvalidArgument("build_dof_map: one space per patch required");
    bc.validate(surface);

    DofMap map;
    map.spaces = spaces;
    map.has_membrane = with_membrane_forces;

    // patch-local -> flat index
    std::vector<int> base(surface.size() + 1, 0);
    for (int p = 0; p < surface.size(); ++p)
        base[p + 1] = base[p] + spaces[p].dof_count();
    const detail::InterfaceLayout layout = detail::interface_layout(surface);
    detail::UnionFind uf(base.back()), uf_phi(base.back());

    for (std::size_t k = 0; k < surface.interfaces.size(); ++k) {
        const auto& itf = surface.interfaces[k];
        const TensorSpace& sa = spaces[itf.patch_a];
        const TensorSpace& sb = spaces[itf.patch_b];
        const KnotVector& ka = side_direction(itf.side_a) == 0 ? sa.u : sa.v;
        const KnotVector& kb = side_direction(itf.side_b) == 0 ? sb.u : sb.v;
        bool match = ka.degree == kb.degree && ka.knots.size() == kb.knots.size();
        if (match)
            for (std::size_t i = 0; i < ka.knots.size(); ++i)
                match = match && std::abs(ka.knots[i] - kb.knots[i]) < 1e-14;
        if (!match)
            throw Unsupported("nonconforming interface: knot vectors along the shared side differ");
        const auto da = side_dofs(sa, itf.side_a);
        const auto db = side_dofs(sb, itf.side_b);
        for (std::size_t i = 0; i < da.size(); ++i) {
            uf.unite(base[itf.patch_a] + da[i], base[itf.patch_b] + db[i]);
            if (!layout.cut[k])
                uf_phi.unite(base[itf.patch_a] + da[i], base[itf.patch_b] + db[i]);
        }
    }

    auto classes = [&](detail::UnionFind& u, int& count) {
        std::vector<int> c(base.back(), -1);
        std::map<int, int> root_to_class;
        count = 0;
        for (int i = 0; i < base.back(); ++i) {
            auto [it, inserted] = root_to_class.emplace(u.find(i), count);
            if (inserted)
                ++count;
            c[i] = it->second;
        }
        return c;
    };
    int n_classes = 0, n_phi_classes = 0;
    const std::vector<int> cls = classes(uf, n_classes);
    const std::vector<int> cls_phi = classes(uf_phi, n_phi_classes);
    map.glued_count = n_classes;

    auto is_phi = [](Field f) { return f == Field::Phi1 || f == Field::Phi2; };
    auto class_of = [&](Field f) -> const std::vector<int>& { return is_phi(f) ? cls_phi : cls; };

    std::array<std::vector<char>, kMainFields> fixed;
    for (int f = 0; f < kMainFields; ++f)
        fixed[f].assign(is_phi(static_cast<Field>(f)) ? n_phi_classes : n_classes, 0);

    auto fix_side = [&](int patch, Side s, Field f) {
        for (int loc : side_dofs(spaces[patch], s))
            fixed[static_cast<int>(f)][class_of(f)[base[patch] + loc]] = 1;
    };
    for (const auto& [key, cond] : bc.edges) {
        const auto [patch, side] = key;
        if (cond == EdgeCondition::Clamped) {
            for (Field f : {Field::U1, Field::U2, Field::U3, Field::P})
                fix_side(patch, side, f);
        } else if (cond == EdgeCondition::SimplySupported) {
            fix_side(patch, side, side_direction(side) == 0 ? Field::U1 : Field::U2);
            fix_side(patch, side, Field::U3);
            fix_side(patch, side, Field::P);
        }
    }

    // symCurl kernel of phi
    {
        const int c0 = cls_phi[0];
        fixed[static_cast<int>(Field::Phi1)][c0] = 1;
        fixed[static_cast<int>(Field::Phi2)][c0] = 1;
        if (!bc.has(EdgeCondition::Free)) {
            // rotation mode (xi1, xi2): with phi = 0 at the first coefficient,
            // fix phi1 at the class of largest global xi1 as well.
            double best = -1e300;
            int best_cls = -1;
            for (int p = 0; p < surface.size(); ++p) {
                const auto gu = detail::greville(spaces[p].u);
                for (int j = 0; j < spaces[p].size_v(); ++j)
                    for (int i = 0; i < spaces[p].size_u(); ++i) {
                        const double x = gu[i] + layout.offsets[p][0];
                        if (x > best + 1e-14) {
                            best = x;
                            best_cls = cls_phi[base[p] + spaces[p].index(i, j)];
                        }
                    }
            }
            fixed[static_cast<int>(Field::Phi1)][best_cls] = 1;
        }
    }

    // number: x block (p, phi1, phi2, cut jumps), then u block (u1, u2, u3)
    auto number = [&](Field f, int& next) {
        FieldDofs& fd = map.main[static_cast<int>(f)];
        const std::vector<int>& c_of = class_of(f);
        const auto& fx = fixed[static_cast<int>(f)];
        std::vector<int> class_to_global(fx.size(), -1);
        fd.offset = next;
        for (std::size_t c = 0; c < fx.size(); ++c)
            if (!fx[c])
                class_to_global[c] = next++;
        fd.count = next - fd.offset;
        fd.global.resize(surface.size());
        for (int p = 0; p < surface.size(); ++p) {
            fd.global[p].resize(spaces[p].dof_count());
            for (int loc = 0; loc < spaces[p].dof_count(); ++loc)
                fd.global[p][loc] = class_to_global[c_of[base[p] + loc]];
        }
    };

    int next = 0;
    for (Field f : {Field::P, Field::Phi1, Field::Phi2})
        number(f, next);
    for (std::size_t k = 0; k < surface.interfaces.size(); ++k)
        if (layout.cut[k]) {
            map.cuts.push_back({static_cast<int>(k), next});
            next += 3;
        }
    map.n_x = next;

    if (with_membrane_forces) {
        for (int p = 0; p < surface.size(); ++p)
            map.n_spaces.push_back(membrane_force_spaces(spaces[p]));
        for (int c = 0; c < 3; ++c) {
            FieldDofs& fd = map.membrane[c];
            fd.offset = next;
            fd.global.resize(surface.size());
            for (int p = 0; p < surface.size(); ++p) {
                fd.global[p].resize(map.n_spaces[p][c].dof_count());
                for (auto& g : fd.global[p])
                    g = next++;
            }
            fd.count = next - fd.offset;
        }
    }
    map.n_N = next - map.n_x;

    for (Field f : {Field::U1, Field::U2, Field::U3})
        number(f, next);
    map.n_u = next - map.n_x - map.n_N;
    return map;
}

/// How multiplier corner values of adjacent boundary edges are tied together.
/// Both represent (d/dtau, d/dn) of one gradient vector g at the corner.
///  - Gradient: g is unconstrained; components absent on an edge impose
///    nothing.
///  - TraceConsistent: additionally g . tau = 0 on simply supported edges and
///    g = 0 on clamped edges.
enum class CornerPolicy { Gradient, TraceConsistent };

/// One boundary side carrying multipliers.
struct MultiplierEdge
{
    int patch = 0;
    Side side = Side::South;
    EdgeCondition cond = EdgeCondition::Free;
    KnotVector trace;     // degree p-1, one order less smooth
    int raw_offset_n = 0; // mu_n coefficients
    int raw_offset_tau = -1; // mu_tau coefficients (free edges only)
};

/// Raw edge-wise multiplier coefficients and the map T (raw x reduced) that
/// applies corner coupling: raw = T * reduced.
struct MultiplierSpace
{
    std::vector<MultiplierEdge> edges;
    int raw_count = 0;
    Eigen::SparseMatrix<double> T;

    int count() const { return static_cast<int>(T.cols()); }
    bool empty() const { return count() == 0; }
};

inline MultiplierSpace build_multiplier_space(const MultiPatchSurface& surface, const std::vector<TensorSpace>& spaces,
                                              const BoundarySpec& bc, CornerPolicy policy = CornerPolicy::Gradient)
{
    bc.validate(surface);
    MultiplierSpace ms;
    for (const auto& [key, cond] : bc.edges) {
        if (cond == EdgeCondition::Clamped)
            continue;
        const auto [patch, side] = key;
        MultiplierEdge e;
        e.patch = patch;
        e.side = side;
        e.cond = cond;
        const KnotVector& kv = side_direction(side) == 0 ? spaces[patch].u : spaces[patch].v;
        e.trace = kv.derivative_space();
        e.raw_offset_n = ms.raw_count;
        ms.raw_count += e.trace.dimension();
        if (cond == EdgeCondition::Free) {
            e.raw_offset_tau = ms.raw_count;
            ms.raw_count += e.trace.dimension();
        }
        ms.edges.push_back(e);
    }

    // Patch corners: id = 4 * patch + c, c = 0:(0,0) 1:(1,0) 2:(0,1) 3:(1,1)
    auto side_ends = [](Side s) -> std::array<int, 2> {
        switch (s) {
        case Side::South: return {0, 1};
        case Side::North: return {2, 3};
        case Side::West: return {0, 2};
        default: return {1, 3};
        }
    };
    detail::UnionFind uf(4 * surface.size());
    for (const auto& itf : surface.interfaces) {
        auto ea = side_ends(itf.side_a);
        auto eb = side_ends(itf.side_b);
        if (itf.reversed)
            std::swap(eb[0], eb[1]);
        uf.unite(4 * itf.patch_a + ea[0], 4 * itf.patch_b + eb[0]);
        uf.unite(4 * itf.patch_a + ea[1], 4 * itf.patch_b + eb[1]);
    }

    struct CornerDof
    {
        int raw;
        Vector2d dir;
    };
    struct Vertex
    {
        std::vector<CornerDof> dofs;
        std::vector<std::pair<Side, EdgeCondition>> sides;
    };
    std::map<int, Vertex> vertices;

    // all boundary sides take part (clamped ones constrain g only)
    for (const auto& [key, cond] : bc.edges) {
        const auto [patch, side] = key;
        const auto ends = side_ends(side);
        for (int end = 0; end < 2; ++end)
            vertices[uf.find(4 * patch + ends[end])].sides.emplace_back(side, cond);
    }

    std::vector<char> is_corner(ms.raw_count, 0);
    for (const auto& e : ms.edges) {
        if (e.trace.degree < 1)
            continue; // discontinuous traces have no point values to couple
        const auto ends = side_ends(e.side);
        const int m = e.trace.dimension();
        for (int end = 0; end < 2; ++end) {
            Vertex& v = vertices[uf.find(4 * e.patch + ends[end])];
            const int local = end == 0 ? 0 : m - 1;
            v.dofs.push_back({e.raw_offset_n + local, side_normal(e.side)});
            is_corner[e.raw_offset_n + local] = 1;
            if (e.raw_offset_tau >= 0) {
                v.dofs.push_back({e.raw_offset_tau + local, side_tangent(e.side)});
                is_corner[e.raw_offset_tau + local] = 1;
            }
        }
    }

    std::vector<Eigen::Triplet<double>> trip;
    int col = 0;
    for (int r = 0; r < ms.raw_count; ++r)
        if (!is_corner[r])
            trip.emplace_back(r, col++, 1.0);

    for (const auto& [id, v] : vertices) {
        if (v.dofs.empty())
            continue;
        // admissible gradients g = G * c
        Eigen::MatrixXd G = Eigen::Matrix2d::Identity();
        if (policy == CornerPolicy::TraceConsistent) {
            Eigen::MatrixXd cons(0, 2);
            for (const auto& [side, cond] : v.sides) {
                if (cond == EdgeCondition::SimplySupported) {
                    cons.conservativeResize(cons.rows() + 1, 2);
                    cons.row(cons.rows() - 1) = side_tangent(side).transpose();
                } else if (cond == EdgeCondition::Clamped) {
                    cons.conservativeResize(cons.rows() + 2, 2);
                    cons.bottomRows(2) = Eigen::Matrix2d::Identity();
                }
            }
            if (cons.rows() > 0) {
                Eigen::FullPivLU<Eigen::MatrixXd> lu(cons);
                lu.setThreshold(1e-12);
                G = lu.kernel();
                if (lu.rank() == 2)
                    G.resize(2, 0);
            }
        }
        Eigen::MatrixXd L(static_cast<int>(v.dofs.size()), 2);
        for (std::size_t i = 0; i < v.dofs.size(); ++i)
            L.row(i) = v.dofs[i].dir.transpose();
        const Eigen::MatrixXd LG = L * G;
        int rank = 0;
        Eigen::MatrixXd Z;
        if (LG.cols() > 0) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(LG, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            for (int i = 0; i < sv.size(); ++i)
                if (sv[i] > 1e-12 * std::max(1.0, sv[0]))
                    ++rank;
            Z = svd.matrixV().leftCols(rank);
        }
        if (rank == 0)
            continue;
        // Orient the reduced basis deterministically: make the first nonzero
        // entry of every column of LG * Z positive and snap round-off.
        Eigen::MatrixXd TZ = LG * Z;
        for (int c = 0; c < rank; ++c) {
            for (int r = 0; r < TZ.rows(); ++r)
                if (std::abs(TZ(r, c)) > 1e-12) {
                    if (TZ(r, c) < 0)
                        TZ.col(c) *= -1.0;
                    break;
                }
        }
        for (int c = 0; c < rank; ++c) {
            for (std::size_t i = 0; i < v.dofs.size(); ++i) {
                double val = TZ(i, c);
                if (std::abs(val) < 1e-14)
                    continue;
                trip.emplace_back(v.dofs[i].raw, col, val);
            }
            ++col;
        }
    }

    ms.T.resize(ms.raw_count, col);
    ms.T.setFromTriplets(trip.begin(), trip.end());
    return ms;
}

} // namespace klshell
