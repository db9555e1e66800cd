#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pgl/run.hpp"

namespace {

struct Options {
    std::string p, p_list, solver = "auto", modes = "1..8", format = "both", out = ".";
    double R = 0.0, tol = 0.0;
    std::size_t nodes = 2001, workers = 0, eigenvalues = 6;
};

void add_common(CLI::App* cmd, Options& o, bool spectral) {
    cmd->add_option("--p", o.p, "exponent p > 2; a comma list is allowed");
    cmd->add_option("--p-list", o.p_list, "comma-separated exponents");
    cmd->add_option("--R", o.R, "truncation radius (default depends on p)");
    cmd->add_option("--nodes", o.nodes, "grid nodes")->capture_default_str();
    cmd->add_option("--solver", o.solver, "auto, shooting, variational or both")->capture_default_str();
    cmd->add_option("--tol", o.tol, "solver tolerance (0: solver default)");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--workers", o.workers, "parallel workers (0: all cores)");
    cmd->add_option("--format", o.format, "json, csv or both")->capture_default_str();
    if (spectral) {
        cmd->add_option("--modes", o.modes, "mode range N..M")->capture_default_str();
        cmd->add_option("--eigenvalues", o.eigenvalues, "eigenvalues per mode")->capture_default_str();
    }
}

pgl::RunConfig to_config(const Options& o) {
    pgl::RunConfig c;
    c.p_list = pgl::parse_p_list(o.p);
    for (double p : pgl::parse_p_list(o.p_list)) c.p_list.push_back(p);
    if (o.R != 0.0) c.R = o.R;
    c.nodes = o.nodes;
    c.solver = pgl::parse_solver(o.solver);
    c.tol = o.tol;
    std::tie(c.mode_min, c.mode_max) = pgl::parse_modes(o.modes);
    c.eigenvalues = o.eigenvalues;
    c.out = o.out;
    c.workers = o.workers;
    c.format = pgl::parse_format(o.format);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radial degree-one p-Ginzburg-Landau minimizers"};
    app.set_version_flag("--version", pgl::kVersion);
    app.require_subcommand(1);
    Options o;
    auto* solve = app.add_subcommand("solve", "solve for f_p and write the profile and a report");
    auto* sweep = app.add_subcommand("sweep", "solve over a list of p and tabulate rates");
    auto* audit = app.add_subcommand("audit", "print the invariant checks");
    auto* spectrum = app.add_subcommand("spectrum", "second-variation spectra per mode");
    auto* report = app.add_subcommand("report", "summarize report_p*.json files in --out");
    add_common(solve, o, false);
    add_common(sweep, o, false);
    add_common(audit, o, false);
    add_common(spectrum, o, true);
    report->add_option("--out", o.out, "directory with reports")->capture_default_str();
    report->add_option("--format", o.format, "json, csv or both")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        pgl::RunConfig c = to_config(o);
        if (report->parsed()) return pgl::cmd_report(c, std::cout, std::cerr);
        if (solve->parsed()) return pgl::cmd_solve(c, std::cout, std::cerr);
        if (sweep->parsed()) return pgl::cmd_sweep(c, std::cout, std::cerr);
        if (audit->parsed()) return pgl::cmd_audit(c, std::cout, std::cerr);
        return pgl::cmd_spectrum(c, std::cout, std::cerr);
    } catch (const pgl::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
