/** @file bench.hpp

    @brief Benchmark presets (Scordelis-Lo roof, pinched hemisphere, pinched
    cylinder, cylindrical strip), end-to-end runs, convergence sweeps and
    JSON/CSV reports.
*/
#pragma once

#include "postprocess.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace klshell {

/// Probe: quantity = sign * axis . u(patch, xi).
struct Probe
{
    int patch = 0;
    Vector2d xi = Vector2d::Zero();
    Vector3d axis = Vector3d::UnitZ();
    double sign = 1.0;
    std::string quantity;
};

struct BenchmarkPreset
{
    BenchmarkCase id;
    std::string name;      // CLI name
    double reference;      // reference value of the probe
    MaterialParams mat;    // thickness replaced by R / slenderness for the strip
    PatchLayout default_layout;
    std::vector<int> cps_list;
};

inline const std::vector<BenchmarkPreset>& benchmark_presets()
{
    static const std::vector<BenchmarkPreset> presets = {
        {BenchmarkCase::ScordelisLo, "scordelis-lo", 0.3024, {4.32e8, 0.0, 0.25}, PatchLayout::Single,
         {5, 9, 13, 20, 25, 30}},
        {BenchmarkCase::Hemisphere, "hemisphere", 0.0924, {6.825e7, 0.3, 0.04}, PatchLayout::Four,
         {5, 9, 13, 20, 25, 30}},
        {BenchmarkCase::PinchedCylinder, "pinched-cylinder", 1.8248e-5, {3e6, 0.3, 3.0}, PatchLayout::Four,
         {5, 9, 13, 20, 25, 30}},
        {BenchmarkCase::CylinderStrip, "strip", 0.25 * std::numbers::pi * 1.2, {1000.0, 0.0, 0.1},
         PatchLayout::Single, {}},
    };
    return presets;
}

inline const BenchmarkPreset& preset(BenchmarkCase c)
{
    for (const auto& p : benchmark_presets())
        if (p.id == c)
            return p;
    throw InvalidArgument("unknown benchmark case");
}

inline BenchmarkCase case_from_name(const std::string& name)
{
    for (const auto& p : benchmark_presets())
        if (p.name == name)
            return p.id;
    throw InvalidArgument("unknown benchmark case '" + name + "'");
}

inline Formulation formulation_from_name(const std::string& s)
{
    if (s == "m")
        return Formulation::MMixed;
    if (s == "mn")
        return Formulation::MNMixed;
    throw InvalidArgument("unknown formulation '" + s + "' (expected m or mn)");
}

inline const char* formulation_name(Formulation f) { return f == Formulation::MMixed ? "m" : "mn"; }

/// Strip mesh: 10 elements along the arc, one across the width.
inline constexpr int strip_elements_u = 10;
inline constexpr int strip_elements_v = 1;

struct RunConfig
{
    BenchmarkCase id = BenchmarkCase::ScordelisLo;
    Formulation formulation = Formulation::MMixed;
    int degree = 2;
    int cps = 5;                  // control points per patch edge (ignored for the strip)
    double slenderness = 100.0;   // R / t, strip only
    std::optional<PatchLayout> layout;
    CornerPolicy corner_policy = CornerPolicy::TraceConsistent;
};

struct RunReport
{
    std::string case_name;
    std::string formulation;
    int degree = 0;
    int cps = 0;
    double slenderness = 0.0;
    int patches = 1;
    double probe = 0.0;
    double reference = 0.0;
    double rel_error = 0.0;
    double wall_time = 0.0;
    int n_x = 0, n_N = 0, n_u = 0, n_lambda = 0, n_total = 0;
    double residual = 0.0;
};

inline void to_json(nlohmann::json& j, const RunReport& r)
{
    j = nlohmann::json{{"case", r.case_name},
                       {"formulation", r.formulation},
                       {"degree", r.degree},
                       {"cps", r.cps},
                       {"slenderness", r.slenderness},
                       {"patches", r.patches},
                       {"probe", r.probe},
                       {"reference", r.reference},
                       {"rel_error", r.rel_error},
                       {"wall_time_s", r.wall_time},
                       {"dofs", {{"x", r.n_x}, {"N", r.n_N}, {"u", r.n_u}, {"lambda", r.n_lambda}, {"total", r.n_total}}},
                       {"residual", r.residual}};
}

struct RunResult
{
    RunReport report;
    SaddleSystem system;
    SolutionFields fields;
    Probe probe;
};

inline PatchLayout layout_of(const RunConfig& cfg)
{
    return cfg.layout ? *cfg.layout : preset(cfg.id).default_layout;
}

/// Problem definition of a preset: geometry, material, supports, loads.
inline ShellProblem make_problem(const RunConfig& cfg)
{
    using std::numbers::pi;
    const BenchmarkPreset& pre = preset(cfg.id);
    const PatchLayout layout = layout_of(cfg);
    if (cfg.degree < 1)
        throw InvalidArgument("degree must be >= 1");
    ShellProblem pr;
    pr.surface = benchmark_geometry(cfg.id, layout);
    pr.mat = pre.mat;
    pr.formulation = cfg.formulation;
    pr.degree = cfg.degree;
    pr.corner_policy = cfg.corner_policy;
    if (cfg.id != BenchmarkCase::CylinderStrip) {
        if (cfg.cps < cfg.degree + 1)
            throw InvalidArgument("cps must be at least degree + 1");
        pr.elements_u = pr.elements_v = cfg.cps - cfg.degree;
    }

    auto boundary = [&](EdgeCondition c) {
        for (int p = 0; p < pr.surface.size(); ++p)
            for (int s = 0; s < 4; ++s)
                if (!pr.surface.is_interface(p, static_cast<Side>(s)))
                    pr.bc.set(p, static_cast<Side>(s), c);
    };

    switch (cfg.id) {
    case BenchmarkCase::ScordelisLo: {
        boundary(EdgeCondition::Free);
        for (int p = 0; p < pr.surface.size(); ++p)
            for (Side s : {Side::South, Side::North})
                if (!pr.surface.is_interface(p, s))
                    pr.bc.set(p, s, EdgeCondition::SimplySupported);
        LoadSpec g;
        g.kind = LoadKind::Area;
        g.direction = -Vector3d::UnitZ();
        g.magnitude = 90.0;
        pr.loads.push_back(g);
        break;
    }
    case BenchmarkCase::Hemisphere: {
        boundary(EdgeCondition::Free);
        for (int p = 0; p < 4; ++p)
            pr.bc.set(p, Side::North, EdgeCondition::Clamped);
        // equator points at longitude k pi/2: outward on x, inward on y
        for (int k = 0; k < 4; ++k) {
            LoadSpec f;
            f.kind = LoadKind::Point;
            f.patch = k;
            f.xi = Vector2d(0.0, 0.0);
            const Vector3d radial(std::cos(k * pi / 2), std::sin(k * pi / 2), 0.0);
            f.direction = radial.array().round().matrix();
            f.magnitude = k % 2 == 0 ? 2.0 : -2.0;
            pr.loads.push_back(f);
        }
        break;
    }
    case BenchmarkCase::PinchedCylinder: {
        boundary(EdgeCondition::SimplySupported);
        LoadSpec top, bottom;
        top.kind = bottom.kind = LoadKind::Point;
        top.patch = 0;
        bottom.patch = 2;
        top.xi = bottom.xi = Vector2d(0.0, 0.5);
        top.direction = -Vector3d::UnitZ();
        bottom.direction = Vector3d::UnitZ();
        top.magnitude = bottom.magnitude = 1.0;
        pr.loads = {top, bottom};
        break;
    }
    case BenchmarkCase::CylinderStrip: {
        if (!(cfg.slenderness > 0.0))
            throw InvalidArgument("slenderness must be positive");
        pr.mat.t = dims::strip_radius / cfg.slenderness;
        pr.elements_u = strip_elements_u;
        pr.elements_v = strip_elements_v;
        boundary(EdgeCondition::Free);
        pr.bc.set(0, Side::West, EdgeCondition::Clamped);
        LoadSpec q;
        q.kind = LoadKind::EdgeLine;
        q.patch = 0;
        q.side = Side::East;
        q.direction = Vector3d::UnitX();
        q.magnitude = 0.1 * pr.mat.t * pr.mat.t * pr.mat.t;
        pr.loads.push_back(q);
        break;
    }
    }
    return pr;
}

inline Probe make_probe(const RunConfig& cfg)
{
    Probe pr;
    switch (cfg.id) {
    case BenchmarkCase::ScordelisLo:
        // free edge midpoint
        if (layout_of(cfg) == PatchLayout::Single)
            pr = {0, Vector2d(0.0, 0.5), Vector3d::UnitZ(), -1.0, "-uz"};
        else
            pr = {0, Vector2d(0.0, 1.0), Vector3d::UnitZ(), -1.0, "-uz"};
        break;
    case BenchmarkCase::Hemisphere:
        pr = {0, Vector2d(0.0, 0.0), Vector3d::UnitX(), 1.0, "ux"};
        break;
    case BenchmarkCase::PinchedCylinder:
        pr = {0, Vector2d(0.0, 0.5), Vector3d::UnitZ(), -1.0, "-uz"};
        break;
    case BenchmarkCase::CylinderStrip:
        pr = {0, Vector2d(1.0, 0.5), Vector3d::UnitX(), 1.0, "ux"};
        break;
    }
    return pr;
}

inline double probe_value(const SolutionFields& sol, const Probe& p)
{
    return p.sign * p.axis.dot(displacement_at(sol, p.patch, p.xi));
}

/// Geometry, spaces, assembly, solve, probe.
inline RunResult run_case(const RunConfig& cfg, const SolveOptions& opt = {})
{
    const BenchmarkPreset& pre = preset(cfg.id);
    try {
        const auto t0 = std::chrono::steady_clock::now();
        ShellProblem problem = make_problem(cfg);
        RunResult r;
        r.system = assemble(problem);
        SolveStats st;
        Eigen::VectorXd z = solve_saddle(r.system, &st, opt);
        r.fields = SolutionFields(std::move(problem), r.system, std::move(z));
        r.probe = make_probe(cfg);
        const double value = probe_value(r.fields, r.probe);
        const auto t1 = std::chrono::steady_clock::now();

        RunReport& rep = r.report;
        rep.case_name = pre.name;
        rep.formulation = formulation_name(cfg.formulation);
        rep.degree = cfg.degree;
        rep.cps = cfg.id == BenchmarkCase::CylinderStrip ? 0 : cfg.cps;
        rep.slenderness = cfg.id == BenchmarkCase::CylinderStrip ? cfg.slenderness : 0.0;
        rep.patches = r.fields.problem.surface.size();
        rep.probe = value;
        rep.reference = pre.reference;
        rep.rel_error = std::abs(value - pre.reference) / std::abs(pre.reference);
        rep.wall_time = std::chrono::duration<double>(t1 - t0).count();
        rep.n_x = r.system.dofs.n_x;
        rep.n_N = r.system.dofs.n_N;
        rep.n_u = r.system.dofs.n_u;
        rep.n_lambda = r.system.n_lambda;
        rep.n_total = r.system.size();
        rep.residual = st.residual;
        return r;
    } catch (const Error& e) {
        throw Error(pre.name + " (" + formulation_name(cfg.formulation) + ", p=" + std::to_string(cfg.degree)
                    + ", cps=" + std::to_string(cfg.cps) + "): " + e.what());
    }
}

/// Sweep axes. Empty cps list means the preset list; the strip sweeps
/// slenderness instead of cps.
struct SweepConfig
{
    BenchmarkCase id = BenchmarkCase::ScordelisLo;
    std::vector<Formulation> formulations{Formulation::MMixed};
    std::vector<int> degrees{2};
    std::vector<int> cps;
    std::vector<double> slenderness{10.0, 100.0, 1000.0, 10000.0};
    std::optional<PatchLayout> layout;
    int max_cps = 60;
};

inline SweepConfig sweep_from_json(const nlohmann::json& j)
{
    SweepConfig s;
    s.id = case_from_name(j.at("case").get<std::string>());
    if (j.contains("formulations")) {
        s.formulations.clear();
        for (const auto& f : j.at("formulations"))
            s.formulations.push_back(formulation_from_name(f.get<std::string>()));
    }
    if (j.contains("degrees"))
        s.degrees = j.at("degrees").get<std::vector<int>>();
    if (j.contains("cps"))
        s.cps = j.at("cps").get<std::vector<int>>();
    if (j.contains("slenderness"))
        s.slenderness = j.at("slenderness").get<std::vector<double>>();
    if (j.contains("patches")) {
        const int n = j.at("patches").get<int>();
        if (n != 1 && n != 4)
            throw InvalidArgument("patches must be 1 or 4");
        s.layout = n == 1 ? PatchLayout::Single : PatchLayout::Four;
    }
    if (j.contains("max_cps"))
        s.max_cps = j.at("max_cps").get<int>();
    if (s.formulations.empty() || s.degrees.empty())
        throw InvalidArgument("sweep: empty axes");
    return s;
}

/// Runs every combination, ordered by formulation, degree, then cps (or
/// slenderness) ascending.
inline std::vector<RunReport> convergence_sweep(const SweepConfig& s, const SolveOptions& opt = {})
{
    std::vector<RunReport> out;
    const bool strip = s.id == BenchmarkCase::CylinderStrip;
    std::vector<int> cps = s.cps.empty() ? preset(s.id).cps_list : s.cps;
    std::vector<double> sl = s.slenderness;
    std::sort(cps.begin(), cps.end());
    std::sort(sl.begin(), sl.end());
    if ((strip && sl.empty()) || (!strip && cps.empty()))
        throw InvalidArgument("sweep: empty axes");
    if (!strip && cps.back() > s.max_cps)
        throw InvalidArgument("sweep: cps " + std::to_string(cps.back()) + " exceeds max_cps "
                              + std::to_string(s.max_cps));
    for (Formulation f : s.formulations) {
        std::vector<int> degrees = s.degrees;
        std::sort(degrees.begin(), degrees.end());
        for (int p : degrees) {
            RunConfig cfg;
            cfg.id = s.id;
            cfg.formulation = f;
            cfg.degree = p;
            cfg.layout = s.layout;
            if (strip) {
                for (double r : sl) {
                    cfg.slenderness = r;
                    out.push_back(run_case(cfg, opt).report);
                }
            } else {
                for (int c : cps) {
                    if (c < p + 1)
                        continue;
                    cfg.cps = c;
                    out.push_back(run_case(cfg, opt).report);
                }
            }
        }
    }
    return out;
}

/// Plot-ready table; one row per run.
inline void write_sweep_csv(std::ostream& os, const std::vector<RunReport>& rows)
{
    os << "case,formulation,degree,cps,slenderness,patches,dofs,probe,reference,normalized,rel_error,wall_time_s\n";
    os << std::setprecision(10);
    for (const auto& r : rows)
        os << r.case_name << "," << r.formulation << "," << r.degree << "," << r.cps << "," << r.slenderness << ","
           << r.patches << "," << r.n_total << "," << r.probe << "," << r.reference << "," << r.probe / r.reference
           << "," << r.rel_error << "," << r.wall_time << "\n";
}

} // namespace klshell
