/** @file geometry.hpp

    @brief Differential geometry of the undeformed midsurface and the catalog
    of benchmark surfaces.

    All benchmark surfaces are exact NURBS, rational quadratic in every curved
    direction, with the normal A1 x A2 pointing away from the curvature center.
*/
#pragma once

#include "splines.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace klshell {

using Eigen::Matrix2d;

/// Pointwise surface quantities at one parametric point.
struct GeometryFrame
{
    Vector3d x;
    Vector3d A1, A2, A3;      // covariant bases, A3 unit normal
    Vector3d Acon1, Acon2;    // contravariant bases (A^3 = A3)
    Matrix2d Aab, Ainv;       // A_{ab}, A^{ab}
    double sqrtA = 0.0;
    std::array<Matrix2d, 2> Gamma; // Gamma[s](a,b) = Gamma^s_{ab}
    Matrix2d Bab;                  // B_{ab}
    Matrix2d Bmix;                 // Bmix(t,b) = B^t_b
    std::array<Matrix2d, 2> BCd;   // BCd[a](t,b) = B^t_b|_a

    const Vector3d& cov(int i) const { return i == 0 ? A1 : (i == 1 ? A2 : A3); }
    const Vector3d& con(int i) const { return i == 0 ? Acon1 : (i == 1 ? Acon2 : A3); }
};

/// Frame from the map and its partials up to third order.
inline GeometryFrame frame_from_derivatives(const SurfacePoint& s, const Vector2d& xi)
{
    GeometryFrame f;
    f.x = s.x;
    f.A1 = s.d1[0];
    f.A2 = s.d1[1];
    const Vector3d n = f.A1.cross(f.A2);
    const double scale = std::max(f.A1.squaredNorm(), f.A2.squaredNorm());
    if (!(n.norm() > 1e-12 * scale)) {
        std::ostringstream os;
        os << "surface_frame: degenerate tangent plane at xi = (" << xi[0] << ", " << xi[1] << ")";
        throw SingularGeometry(os.str());
    }
    f.sqrtA = n.norm();
    f.A3 = n / f.sqrtA;
    f.Aab << f.A1.dot(f.A1), f.A1.dot(f.A2), f.A2.dot(f.A1), f.A2.dot(f.A2);
    const double det = f.Aab.determinant();
    f.Ainv << f.Aab(1, 1) / det, -f.Aab(0, 1) / det, -f.Aab(1, 0) / det, f.Aab(0, 0) / det;
    f.Acon1 = f.Ainv(0, 0) * f.A1 + f.Ainv(0, 1) * f.A2;
    f.Acon2 = f.Ainv(1, 0) * f.A1 + f.Ainv(1, 1) * f.A2;

    // second partials R_{,ab}: d2 = (11, 12, 22)
    auto R2 = [&](int a, int b) -> const Vector3d& { return s.d2[a + b]; };
    // third partials R_{,abc}: number of 2-indices selects the column
    auto R3 = [&](int a, int b, int c) -> const Vector3d& { return s.d3[a + b + c]; };

    for (int sg = 0; sg < 2; ++sg)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                f.Gamma[sg](a, b) = f.con(sg).dot(R2(a, b));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            f.Bab(a, b) = f.A3.dot(R2(a, b));
    f.Bmix = f.Ainv * f.Bab;

    // d_a A3 = -B^m_a A_m
    std::array<Vector3d, 2> dA3;
    for (int a = 0; a < 2; ++a)
        dA3[a] = -(f.Bmix(0, a) * f.A1 + f.Bmix(1, a) * f.A2);

    for (int a = 0; a < 2; ++a) {
        Matrix2d dAab, dB;
        for (int m = 0; m < 2; ++m)
            for (int nn = 0; nn < 2; ++nn) {
                dAab(m, nn) = R2(m, a).dot(f.cov(nn)) + f.cov(m).dot(R2(nn, a));
                dB(m, nn) = dA3[a].dot(R2(m, nn)) + f.A3.dot(R3(m, nn, a));
            }
        const Matrix2d dAinv = -f.Ainv * dAab * f.Ainv;
        const Matrix2d dBmix = dAinv * f.Bab + f.Ainv * dB; // d_a B^t_b
        for (int t = 0; t < 2; ++t)
            for (int b = 0; b < 2; ++b) {
                double v = dBmix(t, b);
                for (int sg = 0; sg < 2; ++sg)
                    v += f.Gamma[t](a, sg) * f.Bmix(sg, b) - f.Gamma[sg](a, b) * f.Bmix(t, sg);
                f.BCd[a](t, b) = v;
            }
    }
    return f;
}

inline GeometryFrame surface_frame(const NurbsPatch& patch, const Vector2d& xi)
{
    return frame_from_derivatives(nurbs_eval(patch, xi, 3), xi);
}

/// Patch sides: West xi1 = 0, East xi1 = 1, South xi2 = 0, North xi2 = 1.
enum class Side { West = 0, East = 1, South = 2, North = 3 };

inline const char* side_name(Side s)
{
    static constexpr const char* names[] = {"west", "east", "south", "north"};
    return names[static_cast<int>(s)];
}

inline Side side_from_name(const std::string& s)
{
    for (int i = 0; i < 4; ++i)
        if (s == side_name(static_cast<Side>(i)))
            return static_cast<Side>(i);
    throw InvalidArgument("unknown side '" + s + "'");
}

/// Parametric unit outer normal of a side.
inline Vector2d side_normal(Side s)
{
    switch (s) {
    case Side::West: return {-1.0, 0.0};
    case Side::East: return {1.0, 0.0};
    case Side::South: return {0.0, -1.0};
    default: return {0.0, 1.0};
    }
}

/// Counterclockwise unit tangent tau = (-n2, n1).
inline Vector2d side_tangent(Side s)
{
    const Vector2d n = side_normal(s);
    return {-n[1], n[0]};
}

/// Direction (0: xi1, 1: xi2) in which the side runs.
inline int side_direction(Side s) { return (s == Side::West || s == Side::East) ? 1 : 0; }

/// Parametric point on a side at running coordinate t.
inline Vector2d side_point(Side s, double t)
{
    switch (s) {
    case Side::West: return {0.0, t};
    case Side::East: return {1.0, t};
    case Side::South: return {t, 0.0};
    default: return {t, 1.0};
    }
}

/// Local DOF indices of a tensor space along a side, ordered by increasing
/// running coordinate.
inline std::vector<int> side_dofs(const TensorSpace& sp, Side s)
{
    std::vector<int> out;
    if (side_direction(s) == 0) {
        const int iv = s == Side::South ? 0 : sp.size_v() - 1;
        for (int i = 0; i < sp.size_u(); ++i)
            out.push_back(sp.index(i, iv));
    } else {
        const int iu = s == Side::West ? 0 : sp.size_u() - 1;
        for (int j = 0; j < sp.size_v(); ++j)
            out.push_back(sp.index(iu, j));
    }
    return out;
}

/// Two patch sides identified with each other. `reversed` flips the running
/// coordinate of side_b relative to side_a.
struct Interface
{
    int patch_a = 0;
    Side side_a = Side::East;
    int patch_b = 0;
    Side side_b = Side::West;
    bool reversed = false;
};

struct MultiPatchSurface
{
    std::vector<NurbsPatch> patches;
    std::vector<Interface> interfaces;

    int size() const { return static_cast<int>(patches.size()); }

    bool is_interface(int patch, Side s) const
    {
        for (const auto& i : interfaces)
            if ((i.patch_a == patch && i.side_a == s) || (i.patch_b == patch && i.side_b == s))
                return true;
        return false;
    }

    /// Checks that identified sides coincide geometrically (sampled).
    void validate(double tol_rel = 1e-10) const
    {
        double scale = 0.0;
        for (const auto& p : patches) {
            p.validate();
            for (const auto& c : p.control_points)
                scale = std::max(scale, c.norm());
        }
        scale = std::max(scale, 1.0);
        for (const auto& itf : interfaces) {
            if (itf.patch_a < 0 || itf.patch_a >= size() || itf.patch_b < 0 || itf.patch_b >= size())
                throw InvalidArgument("interface references unknown patch");
            for (int k = 0; k <= 8; ++k) {
                const double t = k / 8.0;
                const Vector3d xa = nurbs_eval(patches[itf.patch_a], side_point(itf.side_a, t), 0).x;
                const Vector3d xb
                    = nurbs_eval(patches[itf.patch_b], side_point(itf.side_b, itf.reversed ? 1.0 - t : t), 0).x;
                if ((xa - xb).norm() > tol_rel * scale)
                    throw InvalidArgument("interface sides do not coincide geometrically");
            }
        }
    }
};

enum class BenchmarkCase { ScordelisLo, Hemisphere, PinchedCylinder, CylinderStrip };
enum class PatchLayout { Single, Four };

/// Benchmark dimensions (lengths, angles in radians).
namespace dims {
inline constexpr double roof_radius = 25.0;
inline constexpr double roof_length = 50.0;
inline constexpr double roof_half_angle = 40.0 * std::numbers::pi / 180.0;
inline constexpr double hemisphere_radius = 10.0;
inline constexpr double cylinder_radius = 300.0;
inline constexpr double cylinder_length = 600.0;
inline constexpr double strip_radius = 10.0;
inline constexpr double strip_width = 1.0;
} // namespace dims

namespace detail {

/// Rational quadratic arc over [t0, t1] (span < pi): planar points (cos, sin)
/// and weights.
struct Arc
{
    std::array<Vector2d, 3> pts;
    std::array<double, 3> w;
};

inline Arc unit_arc(double t0, double t1)
{
    const double half = 0.5 * (t1 - t0);
    const double tm = 0.5 * (t0 + t1);
    Arc a;
    a.pts = {Vector2d(std::cos(t0), std::sin(t0)), Vector2d(std::cos(tm), std::sin(tm)) / std::cos(half),
             Vector2d(std::cos(t1), std::sin(t1))};
    a.w = {1.0, std::cos(half), 1.0};
    return a;
}

inline KnotVector bezier_knots(int degree)
{
    KnotVector kv;
    kv.degree = degree;
    kv.knots.assign(degree + 1, 0.0);
    kv.knots.insert(kv.knots.end(), degree + 1, 1.0);
    return kv;
}

/// Cylindrical panel: x = radius (cos t e1 + sin t e2) + s axis, t in [t0,t1]
/// along xi1, s in [s0,s1] along xi2.
inline NurbsPatch cylinder_panel(double radius, double t0, double t1, double s0, double s1, const Vector3d& e1,
                                 const Vector3d& e2, const Vector3d& axis)
{
    const Arc arc = unit_arc(t0, t1);
    NurbsPatch p;
    p.space = {bezier_knots(2), bezier_knots(1)};
    for (int j = 0; j < 2; ++j) {
        const double s = j == 0 ? s0 : s1;
        for (int i = 0; i < 3; ++i) {
            p.control_points.push_back(radius * (arc.pts[i].x() * e1 + arc.pts[i].y() * e2) + s * axis);
            p.weights.push_back(arc.w[i]);
        }
    }
    return p;
}

/// Spherical patch: longitude t in [t0,t1] along xi1, latitude f in [f0,f1]
/// along xi2.
inline NurbsPatch sphere_panel(double radius, double t0, double t1, double f0, double f1)
{
    const Arc lon = unit_arc(t0, t1);
    const Arc lat = unit_arc(f0, f1);
    NurbsPatch p;
    p.space = {bezier_knots(2), bezier_knots(2)};
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            const Vector2d c = lon.pts[i], d = lat.pts[j];
            p.control_points.push_back(radius * Vector3d(c.x() * d.x(), c.y() * d.x(), d.y()));
            p.weights.push_back(lon.w[i] * lat.w[j]);
        }
    return p;
}

} // namespace detail

/// Exact NURBS midsurface of a benchmark. Orientation per case:
///  - ScordelisLo: arc in the x-z plane (crown on +z) along xi1, axis +y
///    along xi2, y in [0, 50]; Four = 2x2 split, patch index i + 2 j.
///  - Hemisphere: patch k spans longitude [k pi/2, (k+1) pi/2] along xi1 and
///    latitude [0, pi/2] along xi2 (xi2 = 1 collapses to the pole).
///  - PinchedCylinder: patch k spans the angle [k pi/2, (k+1) pi/2] measured
///    from +z towards +x along xi1, axis +y along xi2, y in [-300, 300].
///  - CylinderStrip: quarter circle from (0,0,R) to (R,0,0) along xi1, width
///    along +y (xi2).
inline MultiPatchSurface benchmark_geometry(BenchmarkCase c, PatchLayout layout)
{
    using std::numbers::pi;
    const Vector3d ex = Vector3d::UnitX(), ey = Vector3d::UnitY(), ez = Vector3d::UnitZ();
    MultiPatchSurface s;
    switch (c) {
    case BenchmarkCase::ScordelisLo: {
        const double R = dims::roof_radius, L = dims::roof_length, h = dims::roof_half_angle;
        if (layout == PatchLayout::Single) {
            s.patches.push_back(detail::cylinder_panel(R, -h, h, 0.0, L, ez, ex, ey));
        } else {
            for (int j = 0; j < 2; ++j)
                for (int i = 0; i < 2; ++i)
                    s.patches.push_back(
                        detail::cylinder_panel(R, -h + i * h, i * h, j * L / 2, (j + 1) * L / 2, ez, ex, ey));
            s.interfaces = {{0, Side::East, 1, Side::West, false},
                            {2, Side::East, 3, Side::West, false},
                            {0, Side::North, 2, Side::South, false},
                            {1, Side::North, 3, Side::South, false}};
        }
        break;
    }
    case BenchmarkCase::Hemisphere: {
        if (layout != PatchLayout::Four)
            throw InvalidArgument("benchmark_geometry: hemisphere supports the four-patch layout only");
        for (int k = 0; k < 4; ++k)
            s.patches.push_back(detail::sphere_panel(dims::hemisphere_radius, k * pi / 2, (k + 1) * pi / 2, 0.0, pi / 2));
        for (int k = 0; k < 4; ++k)
            s.interfaces.push_back({k, Side::East, (k + 1) % 4, Side::West, false});
        break;
    }
    case BenchmarkCase::PinchedCylinder: {
        if (layout != PatchLayout::Four)
            throw InvalidArgument("benchmark_geometry: pinched cylinder supports the four-patch layout only");
        const double R = dims::cylinder_radius, L = dims::cylinder_length;
        for (int k = 0; k < 4; ++k)
            s.patches.push_back(detail::cylinder_panel(R, k * pi / 2, (k + 1) * pi / 2, -L / 2, L / 2, ez, ex, ey));
        for (int k = 0; k < 4; ++k)
            s.interfaces.push_back({k, Side::East, (k + 1) % 4, Side::West, false});
        break;
    }
    case BenchmarkCase::CylinderStrip: {
        if (layout != PatchLayout::Single)
            throw InvalidArgument("benchmark_geometry: cylinder strip supports the single-patch layout only");
        s.patches.push_back(detail::cylinder_panel(dims::strip_radius, 0.0, pi / 2, 0.0, dims::strip_width, ez, ex, ey));
        break;
    }
    }
    s.validate();
    return s;
}

} // namespace klshell
