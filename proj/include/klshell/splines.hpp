/** @file splines.hpp

    @brief Univariate and tensor-product B-spline / NURBS evaluation with
    derivatives up to third order.

    Parametric domain is [0,1] per direction. Tensor-product DOFs are numbered
    lexicographically with the first direction running fastest.
*/
#pragma once

#include "errors.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace klshell {

using Eigen::Vector2d;
using Eigen::Vector3d;

/// Open (clamped) knot vector of a univariate spline space.
struct KnotVector
{
    int degree = 0;
    std::vector<double> knots;

    int dimension() const { return static_cast<int>(knots.size()) - degree - 1; }

    /// Distinct breakpoints, including 0 and 1.
    std::vector<double> breakpoints() const
    {
        std::vector<double> b;
        for (double k : knots)
            if (b.empty() || k > b.back())
                b.push_back(k);
        return b;
    }

    int num_elements() const { return static_cast<int>(breakpoints().size()) - 1; }

    /// Index s of the knot span [k_s, k_{s+1}) containing x; x = 1 maps to the
    /// last non-empty span.
    int find_span(double x) const
    {
        const int n = dimension();
        if (x >= knots[n])
            return n - 1;
        if (x <= knots[degree])
            return degree;
        auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n + 1, x);
        return static_cast<int>(it - knots.begin()) - 1;
    }

    void validate() const
    {
        if (degree < 0)
            throw InvalidArgument("knot vector: negative degree");
        if (static_cast<int>(knots.size()) < 2 * (degree + 1))
            throw InvalidArgument("knot vector: too few knots for degree");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (knots[i] < knots[i - 1])
                throw InvalidArgument("knot vector: knots must be nondecreasing");
        for (int i = 0; i <= degree; ++i)
            if (knots[i] != knots.front() || knots[knots.size() - 1 - i] != knots.back())
                throw InvalidArgument("knot vector: ends must be repeated degree+1 times");
        // interior multiplicity <= degree
        std::size_t i = degree + 1;
        const std::size_t last = knots.size() - degree - 1;
        while (i < last) {
            std::size_t j = i;
            while (j < last && knots[j] == knots[i])
                ++j;
            if (static_cast<int>(j - i) > degree)
                throw InvalidArgument("knot vector: interior multiplicity exceeds degree");
            i = j;
        }
    }

    /// Same breakpoints, one degree lower, one order less smooth (the space
    /// of derivatives). Requires degree >= 1.
    KnotVector derivative_space() const
    {
        if (degree < 1)
            throw InvalidArgument("derivative_space: degree must be >= 1");
        return {degree - 1, std::vector<double>(knots.begin() + 1, knots.end() - 1)};
    }
};

/// Uniform open knot vector with interior multiplicity degree - continuity.
inline KnotVector open_knot_vector(int degree, int n_elements, int continuity)
{
    if (degree < 0 || n_elements < 1)
        throw InvalidArgument("open_knot_vector: degree >= 0 and n_elements >= 1 required");
    if (continuity < -1 || continuity > degree - 1)
        throw InvalidArgument("open_knot_vector: continuity must lie in [-1, degree-1]");
    KnotVector kv;
    kv.degree = degree;
    kv.knots.assign(degree + 1, 0.0);
    const int mult = degree - continuity;
    for (int e = 1; e < n_elements; ++e)
        kv.knots.insert(kv.knots.end(), mult, static_cast<double>(e) / n_elements);
    kv.knots.insert(kv.knots.end(), degree + 1, 1.0);
    return kv;
}

/// Nonzero basis functions of a univariate space at x and their derivatives.
/// ders[k][j] is the k-th derivative of N_{span-degree+j}.
struct UnivariateBasis
{
    int first = 0; // global index of ders[.][0]
    std::vector<std::vector<double>> ders;
};

inline UnivariateBasis univariate_basis(const KnotVector& kv, double x, int nd)
{
    const int p = kv.degree;
    const auto& U = kv.knots;
    const int span = kv.find_span(x);

    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1), right(p + 1);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U[span + 1 - j];
        right[j] = U[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    UnivariateBasis out;
    out.first = span - p;
    out.ders.assign(nd + 1, std::vector<double>(p + 1, 0.0));
    for (int j = 0; j <= p; ++j)
        out.ders[0][j] = ndu[j][p];

    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= std::min(nd, p); ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            out.ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    double fac = p;
    for (int k = 1; k <= std::min(nd, p); ++k) {
        for (int j = 0; j <= p; ++j)
            out.ders[k][j] *= fac;
        fac *= (p - k);
    }
    return out;
}

/// Bivariate tensor-product space S^{p1,p2}.
struct TensorSpace
{
    KnotVector u, v;

    int size_u() const { return u.dimension(); }
    int size_v() const { return v.dimension(); }
    int dof_count() const { return size_u() * size_v(); }
    int index(int iu, int iv) const { return iu + size_u() * iv; }
    int active_count() const { return (u.degree + 1) * (v.degree + 1); }
};

/// Active basis functions at one parametric point (local support only).
/// Derivative columns: d1 = (1, 2), d2 = (11, 12, 22), d3 = (111, 112, 122, 222).
struct BasisEval
{
    std::vector<int> active;
    Eigen::VectorXd values;
    Eigen::MatrixX2d d1;
    Eigen::MatrixX3d d2;
    Eigen::MatrixX4d d3;

    int size() const { return static_cast<int>(active.size()); }
};

inline BasisEval eval_basis(const TensorSpace& space, const Vector2d& xi, int max_deriv)
{
    if (max_deriv < 0 || max_deriv > 3)
        throw Unsupported("eval_basis: max_deriv must be in 0..3");
    const auto bu = univariate_basis(space.u, xi[0], max_deriv);
    const auto bv = univariate_basis(space.v, xi[1], max_deriv);
    const int nu = space.u.degree + 1, nv = space.v.degree + 1;
    const int n = nu * nv;

    BasisEval out;
    out.active.resize(n);
    out.values.resize(n);
    if (max_deriv >= 1)
        out.d1.resize(n, 2);
    if (max_deriv >= 2)
        out.d2.resize(n, 3);
    if (max_deriv >= 3)
        out.d3.resize(n, 4);

    auto du = [&](int k, int i) { return k < static_cast<int>(bu.ders.size()) ? bu.ders[k][i] : 0.0; };
    auto dv = [&](int k, int j) { return k < static_cast<int>(bv.ders.size()) ? bv.ders[k][j] : 0.0; };

    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            const int a = i + nu * j;
            out.active[a] = space.index(bu.first + i, bv.first + j);
            out.values[a] = du(0, i) * dv(0, j);
            if (max_deriv >= 1)
                out.d1.row(a) << du(1, i) * dv(0, j), du(0, i) * dv(1, j);
            if (max_deriv >= 2)
                out.d2.row(a) << du(2, i) * dv(0, j), du(1, i) * dv(1, j), du(0, i) * dv(2, j);
            if (max_deriv >= 3)
                out.d3.row(a) << du(3, i) * dv(0, j), du(2, i) * dv(1, j), du(1, i) * dv(2, j),
                    du(0, i) * dv(3, j);
        }
    return out;
}

/// Rational tensor-product patch; the midsurface map R(xi1, xi2).
struct NurbsPatch
{
    TensorSpace space;
    std::vector<Vector3d> control_points;
    std::vector<double> weights;

    void validate() const
    {
        space.u.validate();
        space.v.validate();
        if (static_cast<int>(control_points.size()) != space.dof_count()
            || static_cast<int>(weights.size()) != space.dof_count())
            throw InvalidArgument("nurbs patch: control point / weight count does not match space");
        for (double w : weights)
            if (!(w > 0.0))
                throw InvalidArgument("nurbs patch: weights must be positive");
    }
};

/// R and its partial derivatives at one point. Index layout as in BasisEval.
struct SurfacePoint
{
    Vector3d x = Vector3d::Zero();
    std::array<Vector3d, 2> d1{Vector3d::Zero(), Vector3d::Zero()};
    std::array<Vector3d, 3> d2{Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero()};
    std::array<Vector3d, 4> d3{Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero()};

    /// Mixed partial d^{a+b} R / d xi1^a d xi2^b, a + b <= 3.
    const Vector3d& partial(int a, int b) const
    {
        switch (a + b) {
        case 0: return x;
        case 1: return d1[b];
        case 2: return d2[b];
        default: return d3[b];
        }
    }
};

namespace detail {
inline double binom(int n, int k)
{
    static constexpr double table[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    return table[n][k];
}
} // namespace detail

/// Evaluates R and its partials up to order max_deriv by repeated quotient-rule
/// differentiation of the weighted (homogeneous) form.
inline SurfacePoint nurbs_eval(const NurbsPatch& patch, const Vector2d& xi, int max_deriv)
{
    const BasisEval b = eval_basis(patch.space, xi, max_deriv);
    // Homogeneous sums Aw^{(a,b)}, W^{(a,b)}; stored by (a,b) with a + b <= 3.
    std::array<std::array<Vector3d, 4>, 4> Aw{};
    std::array<std::array<double, 4>, 4> W{};
    for (auto& row : Aw)
        row.fill(Vector3d::Zero());
    for (auto& row : W)
        row.fill(0.0);

    auto basis_der = [&](int k, int a, int bb) -> double {
        switch (a + bb) {
        case 0: return b.values[k];
        case 1: return b.d1(k, bb);
        case 2: return b.d2(k, bb);
        default: return b.d3(k, bb);
        }
    };
    for (int k = 0; k < b.size(); ++k) {
        const int g = b.active[k];
        const double w = patch.weights[g];
        const Vector3d& P = patch.control_points[g];
        for (int order = 0; order <= max_deriv; ++order)
            for (int bb = 0; bb <= order; ++bb) {
                const int a = order - bb;
                const double nw = basis_der(k, a, bb) * w;
                W[a][bb] += nw;
                Aw[a][bb] += nw * P;
            }
    }

    std::array<std::array<Vector3d, 4>, 4> S{};
    for (int order = 0; order <= max_deriv; ++order)
        for (int l = 0; l <= order; ++l) {
            const int k = order - l;
            Vector3d v = Aw[k][l];
            for (int i = 0; i <= k; ++i)
                for (int j = 0; j <= l; ++j) {
                    if (i == 0 && j == 0)
                        continue;
                    v -= detail::binom(k, i) * detail::binom(l, j) * W[i][j] * S[k - i][l - j];
                }
            S[k][l] = v / W[0][0];
        }

    SurfacePoint out;
    out.x = S[0][0];
    if (max_deriv >= 1)
        out.d1 = {S[1][0], S[0][1]};
    if (max_deriv >= 2)
        out.d2 = {S[2][0], S[1][1], S[0][2]};
    if (max_deriv >= 3)
        out.d3 = {S[3][0], S[2][1], S[1][2], S[0][3]};
    return out;
}

/// Boehm knot insertion in direction dir (0 = xi1, 1 = xi2), performed on the
/// homogeneous control net so the represented surface is unchanged.
inline NurbsPatch insert_knot(const NurbsPatch& patch, int dir, double t)
{
    const KnotVector& kv = dir == 0 ? patch.space.u : patch.space.v;
    const int p = kv.degree;
    const int n = kv.dimension();
    const int k = kv.find_span(t);
    const int m_other = dir == 0 ? patch.space.size_v() : patch.space.size_u();

    KnotVector nk = kv;
    nk.knots.insert(nk.knots.begin() + k + 1, t);

    NurbsPatch out;
    out.space = patch.space;
    (dir == 0 ? out.space.u : out.space.v) = nk;
    out.control_points.resize(out.space.dof_count());
    out.weights.resize(out.space.dof_count());

    auto old_index = [&](int i, int o) { return dir == 0 ? patch.space.index(i, o) : patch.space.index(o, i); };
    auto new_index = [&](int i, int o) { return dir == 0 ? out.space.index(i, o) : out.space.index(o, i); };

    for (int o = 0; o < m_other; ++o) {
        for (int i = 0; i <= n; ++i) {
            Eigen::Vector4d q;
            if (i <= k - p) {
                const int g = old_index(i, o);
                q << patch.weights[g] * patch.control_points[g], patch.weights[g];
            } else if (i > k) {
                const int g = old_index(i - 1, o);
                q << patch.weights[g] * patch.control_points[g], patch.weights[g];
            } else {
                const double alpha = (t - kv.knots[i]) / (kv.knots[i + p] - kv.knots[i]);
                const int g1 = old_index(i, o), g0 = old_index(i - 1, o);
                Eigen::Vector4d q1, q0;
                q1 << patch.weights[g1] * patch.control_points[g1], patch.weights[g1];
                q0 << patch.weights[g0] * patch.control_points[g0], patch.weights[g0];
                q = alpha * q1 + (1.0 - alpha) * q0;
            }
            const int g = new_index(i, o);
            out.weights[g] = q[3];
            out.control_points[g] = q.head<3>() / q[3];
        }
    }
    return out;
}

/// Inserts uniformly spaced knots so each direction has the given number of
/// equal elements. Requires the patch to be a single element per direction.
inline NurbsPatch refine_uniform(NurbsPatch patch, int n_u, int n_v)
{
    if (patch.space.u.num_elements() != 1 || patch.space.v.num_elements() != 1)
        throw Unsupported("refine_uniform: expects a single-element patch");
    for (int e = 1; e < n_u; ++e)
        patch = insert_knot(patch, 0, static_cast<double>(e) / n_u);
    for (int e = 1; e < n_v; ++e)
        patch = insert_knot(patch, 1, static_cast<double>(e) / n_v);
    return patch;
}

// JSON patch format:
// {degree_u, degree_v, knots_u, knots_v, control_points: [[x,y,z,w], ...]}
// with Cartesian coordinates (not premultiplied by w), first direction fastest.

inline nlohmann::json patch_to_json(const NurbsPatch& patch)
{
    nlohmann::json j;
    j["degree_u"] = patch.space.u.degree;
    j["degree_v"] = patch.space.v.degree;
    j["knots_u"] = patch.space.u.knots;
    j["knots_v"] = patch.space.v.knots;
    auto cps = nlohmann::json::array();
    for (std::size_t i = 0; i < patch.control_points.size(); ++i) {
        const auto& c = patch.control_points[i];
        cps.push_back({c.x(), c.y(), c.z(), patch.weights[i]});
    }
    j["control_points"] = std::move(cps);
    return j;
}

inline NurbsPatch patch_from_json(const nlohmann::json& j)
{
    NurbsPatch patch;
    try {
        patch.space.u = {j.at("degree_u").get<int>(), j.at("knots_u").get<std::vector<double>>()};
        patch.space.v = {j.at("degree_v").get<int>(), j.at("knots_v").get<std::vector<double>>()};
        for (const auto& c : j.at("control_points")) {
            const auto v = c.get<std::vector<double>>();
            if (v.size() != 4)
                throw InvalidArgument("patch json: control points must be [x,y,z,w]");
            patch.control_points.emplace_back(v[0], v[1], v[2]);
            patch.weights.push_back(v[3]);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("patch json: ") + e.what());
    }
    patch.validate();
    return patch;
}

} // namespace klshell
