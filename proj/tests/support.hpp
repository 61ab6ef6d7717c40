// Shared fixtures and independent oracles for the test suite.
#pragma once

#include <klshell/bench.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace kltest {

using namespace klshell;
using std::numbers::pi;

/// Bilinear flat patch [0,lx] x [0,ly] in the plane z = 0.
inline NurbsPatch flat_patch(double lx = 1.0, double ly = 1.0)
{
    NurbsPatch p;
    p.space = {open_knot_vector(1, 1, 0), open_knot_vector(1, 1, 0)};
    p.control_points = {Vector3d(0, 0, 0), Vector3d(lx, 0, 0), Vector3d(0, ly, 0), Vector3d(lx, ly, 0)};
    p.weights = {1, 1, 1, 1};
    return p;
}

/// Flat unit square of degree p with ne x ne elements, control points at the Greville abscissae.
inline NurbsPatch flat_patch_degree(int p, int ne)
{
    NurbsPatch q;
    q.space = {open_knot_vector(p, ne, p - 1), open_knot_vector(p, ne, p - 1)};
    const int n = q.space.u.dimension();
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        g[i] = 0.0;
        for (int k = 1; k <= p; ++k)
            g[i] += q.space.u.knots[i + k];
        g[i] /= p;
    }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            q.control_points.emplace_back(g[i], g[j], 0.0);
            q.weights.push_back(1.0);
        }
    return q;
}

inline MultiPatchSurface single(const NurbsPatch& p)
{
    MultiPatchSurface s;
    s.patches = {p};
    return s;
}

inline BoundarySpec all_sides(EdgeCondition c, int patches = 1)
{
    BoundarySpec bc;
    for (int p = 0; p < patches; ++p)
        for (Side s : {Side::West, Side::East, Side::South, Side::North})
            bc.set(p, s, c);
    return bc;
}

/// Flat square plate problem, D = 1 when nu = 0.3 and t = 1.
inline ShellProblem flat_plate(int degree, int elements, EdgeCondition c)
{
    ShellProblem pr;
    pr.surface = single(flat_patch());
    pr.mat = {12.0 * (1.0 - 0.09), 0.3, 1.0};
    pr.bc = all_sides(c);
    pr.degree = degree;
    pr.elements_u = pr.elements_v = elements;
    return pr;
}

/// Navier double sine series for the simply supported unit square under
/// uniform pressure q (positive along -z): w(x, y) downward, D = 1.
inline double navier_uniform(double x, double y, int terms = 200)
{
    double w = 0.0;
    for (int m = 1; m <= terms; m += 2)
        for (int n = 1; n <= terms; n += 2)
            w += std::sin(m * pi * x) * std::sin(n * pi * y) / (m * n * std::pow(m * m + n * n, 2));
    return 16.0 / std::pow(pi, 6) * w;
}

/// Map value and partials up to third order of an analytic surface.
struct AnalyticMap
{
    virtual ~AnalyticMap() = default;
    virtual SurfacePoint eval(const Vector2d& xi) const = 0;
    virtual Vector3d normal(const Vector2d& xi) const = 0;
    /// partials of the unit normal: first (a) and second (ab, index a + b)
    virtual std::array<Vector3d, 2> normal_d1(const Vector2d& xi) const = 0;
    virtual std::array<Vector3d, 3> normal_d2(const Vector2d& xi) const = 0;
};

/// R = (r cos(s xi1), r sin(s xi1), L xi2).
struct AnalyticCylinder : AnalyticMap
{
    double r, s, L;
    AnalyticCylinder(double r_, double s_, double L_) : r(r_), s(s_), L(L_) {}

    SurfacePoint eval(const Vector2d& xi) const override
    {
        const double c = std::cos(s * xi[0]), n = std::sin(s * xi[0]);
        SurfacePoint p;
        p.x = {r * c, r * n, L * xi[1]};
        p.d1 = {Vector3d(-r * s * n, r * s * c, 0), Vector3d(0, 0, L)};
        p.d2 = {Vector3d(-r * s * s * c, -r * s * s * n, 0), Vector3d::Zero(), Vector3d::Zero()};
        p.d3 = {Vector3d(r * s * s * s * n, -r * s * s * s * c, 0), Vector3d::Zero(), Vector3d::Zero(),
                Vector3d::Zero()};
        return p;
    }
    Vector3d normal(const Vector2d& xi) const override { return {std::cos(s * xi[0]), std::sin(s * xi[0]), 0}; }
    std::array<Vector3d, 2> normal_d1(const Vector2d& xi) const override
    {
        return {Vector3d(-s * std::sin(s * xi[0]), s * std::cos(s * xi[0]), 0), Vector3d::Zero()};
    }
    std::array<Vector3d, 3> normal_d2(const Vector2d& xi) const override
    {
        return {Vector3d(-s * s * std::cos(s * xi[0]), -s * s * std::sin(s * xi[0]), 0), Vector3d::Zero(),
                Vector3d::Zero()};
    }
};

/// R = r (cos a cos b, sin a cos b, sin b), a = xi1, b = xi2 (radians).
struct AnalyticSphere : AnalyticMap
{
    double r;
    explicit AnalyticSphere(double r_) : r(r_) {}

    // unit sphere point and partials d^(i,j) / da^i db^j
    static Vector3d unit(double a, double b, int i, int j)
    {
        auto dc = [](double x, int k) {
            switch (k % 4) {
            case 0: return std::cos(x);
            case 1: return -std::sin(x);
            case 2: return -std::cos(x);
            default: return std::sin(x);
            }
        };
        auto ds = [](double x, int k) {
            switch (k % 4) {
            case 0: return std::sin(x);
            case 1: return std::cos(x);
            case 2: return -std::sin(x);
            default: return -std::cos(x);
            }
        };
        return {dc(a, i) * dc(b, j), ds(a, i) * dc(b, j), i == 0 ? ds(b, j) : 0.0};
    }

    SurfacePoint eval(const Vector2d& xi) const override
    {
        const double a = xi[0], b = xi[1];
        SurfacePoint p;
        p.x = r * unit(a, b, 0, 0);
        p.d1 = {r * unit(a, b, 1, 0), r * unit(a, b, 0, 1)};
        p.d2 = {r * unit(a, b, 2, 0), r * unit(a, b, 1, 1), r * unit(a, b, 0, 2)};
        p.d3 = {r * unit(a, b, 3, 0), r * unit(a, b, 2, 1), r * unit(a, b, 1, 2), r * unit(a, b, 0, 3)};
        return p;
    }
    Vector3d normal(const Vector2d& xi) const override { return unit(xi[0], xi[1], 0, 0); }
    std::array<Vector3d, 2> normal_d1(const Vector2d& xi) const override
    {
        return {unit(xi[0], xi[1], 1, 0), unit(xi[0], xi[1], 0, 1)};
    }
    std::array<Vector3d, 3> normal_d2(const Vector2d& xi) const override
    {
        return {unit(xi[0], xi[1], 2, 0), unit(xi[0], xi[1], 1, 1), unit(xi[0], xi[1], 0, 2)};
    }
};

/// Three pseudo basis functions carrying the covariant components
/// u_i = t . A_i of a rigid translation t, their gradients and Hessians.
inline BasisEval rigid_translation_basis(const AnalyticMap& m, const Vector2d& xi, const Vector3d& t)
{
    const SurfacePoint s = m.eval(xi);
    const auto n1 = m.normal_d1(xi);
    const auto n2 = m.normal_d2(xi);
    BasisEval b;
    b.active = {0, 1, 2};
    b.values.resize(3);
    b.d1.resize(3, 2);
    b.d2.resize(3, 3);
    b.d2.setZero();
    for (int a = 0; a < 2; ++a) {
        b.values[a] = t.dot(s.d1[a]);
        b.d1.row(a) << t.dot(s.d2[a]), t.dot(s.d2[a + 1]);
    }
    b.values[2] = t.dot(m.normal(xi));
    b.d1.row(2) << t.dot(n1[0]), t.dot(n1[1]);
    b.d2.row(2) << t.dot(n2[0]), t.dot(n2[1]), t.dot(n2[2]);
    return b;
}

/// Quadratic Cartesian displacement v = c0 + c1 x1 + c2 x2 + c3 x1^2 + c4 x1 x2 + c5 x2^2.
struct QuadraticField
{
    std::array<Vector3d, 6> c;
    Vector3d v(const Vector2d& x) const
    {
        return c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1];
    }
    std::array<Vector3d, 2> d1(const Vector2d& x) const
    {
        return {c[1] + 2 * c[3] * x[0] + c[4] * x[1], c[2] + c[4] * x[0] + 2 * c[5] * x[1]};
    }
    std::array<Vector3d, 3> d2() const { return {2 * c[3], c[4], 2 * c[5]}; }
};

/// Covariant components of v as three pseudo basis functions (u1, u2, u3).
inline BasisEval field_basis(const AnalyticMap& m, const QuadraticField& q, const Vector2d& xi)
{
    const SurfacePoint s = m.eval(xi);
    const Vector3d n = m.normal(xi);
    const auto n1 = m.normal_d1(xi);
    const auto n2 = m.normal_d2(xi);
    const Vector3d v = q.v(xi);
    const auto v1 = q.d1(xi);
    const auto v2 = q.d2();
    BasisEval b;
    b.active = {0, 1, 2};
    b.values.resize(3);
    b.d1.resize(3, 2);
    b.d2.setZero(3, 3);
    for (int a = 0; a < 2; ++a) {
        b.values[a] = v.dot(s.d1[a]);
        for (int g = 0; g < 2; ++g)
            b.d1(a, g) = v1[g].dot(s.d1[a]) + v.dot(s.d2[a + g]);
    }
    b.values[2] = v.dot(n);
    for (int g = 0; g < 2; ++g)
        b.d1(2, g) = v1[g].dot(n) + v.dot(n1[g]);
    for (int a = 0; a < 2; ++a)
        for (int g = a; g < 2; ++g)
            b.d2(2, a + g) = v2[a + g].dot(n) + v1[a].dot(n1[g]) + v1[g].dot(n1[a]) + v.dot(n2[a + g]);
    return b;
}

struct Strains
{
    Eigen::Vector3d membrane, bending;
};

/// Strains of the three pseudo basis functions taken as u1, u2, u3.
inline Strains apply(const StrainOperators& op)
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(9);
    c[0] = c[4] = c[8] = 1.0;
    return {op.Bm * c, op.Bk1 * c + op.Hess * c.segment(6, 3)};
}

// eps_ab = (A_a . v,b + A_b . v,a) / 2, kappa_ab = (v,ab - Gamma^s_ab v,s) . A3
inline Strains direct(const AnalyticMap& m, const QuadraticField& q, const Vector2d& xi)
{
    const GeometryFrame f = frame_from_derivatives(m.eval(xi), xi);
    const auto v1 = q.d1(xi);
    const auto v2 = q.d2();
    auto eps = [&](int a, int b) { return 0.5 * (f.cov(a).dot(v1[b]) + f.cov(b).dot(v1[a])); };
    auto kap = [&](int a, int b) {
        Vector3d w = v2[a + b];
        for (int s = 0; s < 2; ++s)
            w -= f.Gamma[s](a, b) * v1[s];
        return w.dot(f.A3);
    };
    return {{eps(0, 0), eps(1, 1), 2 * eps(0, 1)}, {kap(0, 0), kap(1, 1), 2 * kap(0, 1)}};
}

inline std::mt19937& rng()
{
    static std::mt19937 g(20240611u);
    return g;
}

inline double uniform(double a = 0.0, double b = 1.0)
{
    return std::uniform_real_distribution<double>(a, b)(rng());
}

inline Vector2d random_xi(double margin = 0.0) { return {uniform(margin, 1.0 - margin), uniform(margin, 1.0 - margin)}; }

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace kltest
