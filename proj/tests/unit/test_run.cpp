#include "doctest.h"

#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "pgl/run.hpp"

using namespace pgl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("pgl_test_run_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

RunConfig config(std::vector<double> p, const fs::path& out) {
    RunConfig c;
    c.p_list = std::move(p);
    c.out = out;
    return c;
}

}  // namespace

TEST_CASE("parsers") {
    CHECK(parse_p_list("3") == std::vector<double>{3.0});
    CHECK(parse_p_list("2.5, 3,4") == std::vector<double>{2.5, 3.0, 4.0});
    CHECK(parse_p_list("").empty());
    CHECK_THROWS_AS(parse_p_list("3x"), UsageError);
    // empty items are skipped, so a trailing comma is harmless
    CHECK(parse_p_list("3,,4,") == std::vector<double>{3.0, 4.0});
    CHECK(parse_modes("1..8") == std::pair{1, 8});
    CHECK(parse_modes("3") == std::pair{3, 3});
    CHECK_THROWS_AS(parse_modes("8..x"), UsageError);
    CHECK(parse_solver("both") == SolverChoice::both);
    CHECK(parse_solver("auto") == SolverChoice::automatic);
    CHECK_THROWS_AS(parse_solver("newton"), UsageError);
    CHECK(parse_format("csv") == Format::csv);
    CHECK_THROWS_AS(parse_format("xml"), UsageError);
    CHECK(p_tag(3.0) == "3");
    CHECK(p_tag(2.5) == "2.5");
}

TEST_CASE("validation") {
    RunConfig c;
    CHECK_THROWS_WITH_AS(validate(c), "no p given (use --p or --p-list)", UsageError);
    c.p_list = {1.5};
    CHECK_THROWS_WITH_AS(validate(c), "p must exceed 2", UsageError);
    c.p_list = {2000.0};
    CHECK_THROWS_AS(validate(c), UsageError);
    c.p_list = {3.0};
    CHECK_NOTHROW(validate(c));
    c.nodes = 50;
    CHECK_THROWS_AS(validate(c), UsageError);
    c.nodes = 2000;
    CHECK_NOTHROW(validate(c));
    CHECK_THROWS_AS(validate(c, true), UsageError);
    c.nodes = 2001;
    c.R = 2.0;
    CHECK_THROWS_AS(validate(c), UsageError);
    c.R.reset();
    c.mode_min = 5;
    c.mode_max = 2;
    CHECK_THROWS_AS(validate(c), UsageError);
}

TEST_CASE("config hash ignores where and how, not what") {
    RunConfig a = config({3.0}, "/tmp/x");
    RunConfig b = a;
    b.out = "/tmp/y";
    b.workers = 7;
    b.format = Format::csv;
    CHECK(config_hash(a) == config_hash(b));
    b.p_list = {4.0};
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.nodes = 4001;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 64);
    const json j = to_json(a);
    CHECK(j.at("R") == "default");
    CHECK(j.at("solver") == "auto");
}

TEST_CASE("solve writes the profile and report, and reruns reproduce them") {
    const fs::path d = scratch_dir("solve");
    RunConfig c = config({3.0}, d);
    std::ostringstream out, err;
    CHECK(cmd_solve(c, out, err) == 0);
    CHECK(err.str().empty());
    CHECK(out.str().find("p = 3: m_p = ") != std::string::npos);
    for (const char* f : {"profile_p3.csv", "profile_p3.json", "report_p3.json"}) CHECK(fs::exists(d / f));
    const json rep = json::parse(read_file(d / "report_p3.json"));
    CHECK(rep.at("schema") == 1);
    CHECK(rep.at("config_hash") == config_hash(c));
    CHECK(rep.at("config").at("p_list") == json::array({3.0}));
    CHECK(rep.contains("energy"));
    CHECK(rep.contains("invariants"));
    CHECK(rep.contains("asymptotics"));
    const std::string csv = read_file(d / "profile_p3.csv");
    CHECK(csv.find("# config_hash " + config_hash(c)) != std::string::npos);
    CHECK(csv.find("r,f,df,h,grad_norm") != std::string::npos);

    std::ostringstream out2, err2;
    CHECK(cmd_solve(c, out2, err2) == 0);
    CHECK(read_file(d / "profile_p3.csv") == csv);
    fs::remove_all(d);
}

TEST_CASE("solve with both solvers reports the cross distance") {
    const fs::path d = scratch_dir("both");
    RunConfig c = config({3.0}, d);
    c.solver = SolverChoice::both;
    c.format = Format::json;
    std::ostringstream out, err;
    CHECK(cmd_solve(c, out, err) == 0);
    const json rep = json::parse(read_file(d / "report_p3.json"));
    CHECK(rep.at("cross_solver_sup_distance").get<double>() <= 1e-6);
    CHECK_FALSE(fs::exists(d / "profile_p3.csv"));
    CHECK(out.str().find("|f_shoot - f_var|") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("usage errors exit 2") {
    const fs::path d = scratch_dir("usage");
    std::ostringstream out, err;
    CHECK(cmd_solve(config({1.5}, d), out, err) == 2);
    CHECK(err.str().find("p must exceed 2") != std::string::npos);
    CHECK(cmd_sweep(config({}, d), out, err) == 2);
    CHECK(cmd_audit(config({}, d), out, err) == 2);
    RunConfig even = config({3.0}, d);
    even.nodes = 2000;
    CHECK(cmd_spectrum(even, out, err) == 2);
    fs::remove_all(d);
}

TEST_CASE("sweep writes rates and tail constants") {
    const fs::path d = scratch_dir("sweep");
    std::ostringstream out, err;
    CHECK(cmd_sweep(config({20.0, 50.0, 100.0}, d), out, err) == 0);
    const std::string rates = read_file(d / "rates.csv");
    std::istringstream in(rates);
    std::string line, header;
    std::vector<std::string> rows;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') (header.empty() ? header : rows.emplace_back()) = line;
    CHECK(header.rfind("p,m_p,distance_to_limit,distance_ratio", 0) == 0);
    CHECK(rows.size() == 3);
    CHECK(fs::exists(d / "tail_constants.csv"));
    fs::remove_all(d);
}

TEST_CASE("audit prints every check") {
    const fs::path d = scratch_dir("audit");
    std::ostringstream out, err;
    CHECK(cmd_audit(config({4.0}, d), out, err) == 0);
    for (const char* name : {"f_range", "df_positive", "h_bounds", "h_nonincreasing", "f_over_r_decreasing",
                             "concavity", "h_at_origin", "f_prime_at_zero_positive"})
        CHECK(out.str().find(name) != std::string::npos);
    CHECK(out.str().find("FAIL") == std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("spectrum verdicts") {
    const fs::path d = scratch_dir("spectrum");
    {
        std::ostringstream out, err;
        CHECK(cmd_spectrum(config({3.0}, d), out, err) == 0);
        CHECK(out.str().find("STABLE") != std::string::npos);
        CHECK(out.str().find("UNSTABLE") == std::string::npos);
        CHECK(out.str().find("kernel: 3 near-zero directions") != std::string::npos);
        CHECK(fs::exists(d / "spectra_p3.csv"));
        const json j = json::parse(read_file(d / "spectrum_p3.json"));
        CHECK(j.contains("coefficient_signs"));
    }
    {
        std::ostringstream out, err;
        CHECK(cmd_spectrum(config({6.0}, d), out, err) == 0);
        CHECK(out.str().find("outside certified range") != std::string::npos);
        CHECK(out.str().find("STABLE") == std::string::npos);
    }
    fs::remove_all(d);
}

TEST_CASE("report summarizes solved runs") {
    const fs::path d = scratch_dir("report");
    std::ostringstream out, err;
    CHECK(cmd_report(config({}, d), out, err) == 1);
    CHECK(cmd_solve(config({4.0, 3.0}, d), out, err) == 0);
    std::ostringstream rout, rerr;
    CHECK(cmd_report(config({}, d), rout, rerr) == 0);
    const std::string s = rout.str();
    CHECK(s.find("3 ") < s.find("4 "));
    CHECK(fs::exists(d / "summary.csv"));
    CHECK(fs::exists(d / "summary.json"));
    fs::remove_all(d);
}
