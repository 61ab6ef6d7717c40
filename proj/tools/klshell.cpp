// klshell command line: single benchmark runs and convergence sweeps.

#include <klshell/bench.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace klshell;

int run_command(const std::string& case_name, const std::string& form, int degree, int cps, double slenderness,
                int patches, const std::string& out, const std::string& vtk, const std::string& dump,
                const std::string& csv, int resolution, const std::string& corners)
{
    RunConfig cfg;
    cfg.id = case_from_name(case_name);
    cfg.formulation = formulation_from_name(form);
    cfg.degree = degree;
    cfg.cps = cps;
    cfg.slenderness = slenderness;
    if (patches == 1)
        cfg.layout = PatchLayout::Single;
    else if (patches == 4)
        cfg.layout = PatchLayout::Four;
    if (corners == "gradient")
        cfg.corner_policy = CornerPolicy::Gradient;

    const RunResult r = run_case(cfg);
    const RunReport& rep = r.report;
    std::cout << rep.case_name << " formulation=" << rep.formulation << " p=" << rep.degree;
    if (cfg.id == BenchmarkCase::CylinderStrip)
        std::cout << " R/t=" << rep.slenderness;
    else
        std::cout << " cps=" << rep.cps;
    std::cout << " patches=" << rep.patches << " dofs=" << rep.n_total << "\n"
              << "  probe " << r.probe.quantity << " = " << std::setprecision(8) << rep.probe
              << "  reference = " << rep.reference << "  rel.error = " << std::setprecision(3) << rep.rel_error
              << "\n  residual = " << rep.residual << "  time = " << rep.wall_time << " s\n";

    if (!out.empty()) {
        std::ofstream f(out);
        if (!f)
            throw Error("cannot open '" + out + "' for writing");
        f << nlohmann::json(rep).dump(2) << "\n";
    }
    if (!vtk.empty())
        write_vtk(vtk, r.fields, resolution);
    if (!dump.empty())
        write_matrix_market(dump, r.system.K);
    if (!csv.empty()) {
        ProbeRow row;
        row.label = rep.case_name;
        row.patch = r.probe.patch;
        row.xi = r.probe.xi;
        row.u = displacement_at(r.fields, r.probe.patch, r.probe.xi);
        row.value = rep.probe;
        write_probe_csv(csv, {row});
    }
    return 0;
}

int sweep_command(const std::string& config, const std::string& out, const std::string& csv)
{
    std::ifstream f(config);
    if (!f)
        throw Error("cannot open '" + config + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(config + ": " + e.what());
    }
    const SweepConfig s = sweep_from_json(j);
    const auto rows = convergence_sweep(s);
    write_sweep_csv(std::cout, rows);
    const std::string json_out = !out.empty() ? out : j.value("out_json", std::string());
    const std::string csv_out = !csv.empty() ? csv : j.value("out_csv", std::string());
    if (!json_out.empty()) {
        std::ofstream o(json_out);
        if (!o)
            throw Error("cannot open '" + json_out + "' for writing");
        o << nlohmann::json(rows).dump(2) << "\n";
    }
    if (!csv_out.empty()) {
        std::ofstream o(csv_out);
        if (!o)
            throw Error("cannot open '" + csv_out + "' for writing");
        write_sweep_csv(o, rows);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mixed isogeometric Kirchhoff-Love shell solver"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Solve one benchmark configuration");
    std::string case_name, form = "m", out, vtk, dump, csv, corners = "trace";
    int degree = 2, cps = 9, patches = 0, resolution = 21;
    double slenderness = 100.0;
    run->add_option("--case", case_name, "scordelis-lo | hemisphere | pinched-cylinder | strip")->required();
    run->add_option("--formulation", form, "m | mn")->check(CLI::IsMember({"m", "mn"}));
    run->add_option("--degree", degree, "spline degree p")->check(CLI::PositiveNumber);
    run->add_option("--cps", cps, "control points per patch edge");
    run->add_option("--slenderness", slenderness, "R/t (strip only)");
    run->add_option("--patches", patches, "1 or 4 (default per case)")->check(CLI::IsMember({1, 4}));
    run->add_option("--out", out, "JSON report path");
    run->add_option("--vtk", vtk, "VTK output path");
    run->add_option("--vtk-resolution", resolution, "VTK samples per patch edge")->check(CLI::Range(2, 1000));
    run->add_option("--csv", csv, "probe CSV path");
    run->add_option("--dump-system", dump, "Matrix Market dump of the system matrix");
    run->add_option("--corners", corners, "multiplier corner coupling: trace | gradient")
        ->check(CLI::IsMember({"trace", "gradient"}));

    auto* sweep = app.add_subcommand("sweep", "Run a convergence sweep from a JSON config");
    std::string config, sweep_out, sweep_csv;
    sweep->add_option("--config", config, "sweep configuration (JSON)")->required();
    sweep->add_option("--out", sweep_out, "JSON report path");
    sweep->add_option("--csv", sweep_csv, "CSV table path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return run_command(case_name, form, degree, cps, slenderness, patches, out, vtk, dump, csv, resolution,
                               corners);
        return sweep_command(config, sweep_out, sweep_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
