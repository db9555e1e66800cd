#include "pgl/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "pgl/asymptotics.hpp"
#include "pgl/energy.hpp"
#include "pgl/stability.hpp"

namespace pgl {

SolverChoice parse_solver(const std::string& s) {
    if (s == "auto") return SolverChoice::automatic;
    if (s == "shooting") return SolverChoice::shooting;
    if (s == "variational") return SolverChoice::variational;
    if (s == "both") return SolverChoice::both;
    throw UsageError("--solver must be one of auto, shooting, variational, both (got '" + s + "')");
}

Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    if (s == "both") return Format::both;
    throw UsageError("--format must be json, csv or both (got '" + s + "')");
}

std::vector<double> parse_p_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("not a number in p list: '" + item + "'");
        }
        if (used != item.size()) throw UsageError("not a number in p list: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::pair<int, int> parse_modes(const std::string& s) {
    auto to_int = [&](const std::string& t) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(t, &used);
        } catch (const std::exception&) {
            throw UsageError("--modes expects N or N..M (got '" + s + "')");
        }
        if (used != t.size()) throw UsageError("--modes expects N or N..M (got '" + s + "')");
        return v;
    };
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
        const int n = to_int(s);
        return {n, n};
    }
    return {to_int(s.substr(0, dots)), to_int(s.substr(dots + 2))};
}

void validate(const RunConfig& c, bool need_odd_nodes) {
    if (c.p_list.empty()) throw UsageError("no p given (use --p or --p-list)");
    for (double p : c.p_list) {
        if (!(p > 2.0)) throw UsageError("p must exceed 2");
        if (!(p <= 1000.0)) throw UsageError("p must not exceed 1000");
    }
    if (c.R && !(*c.R >= 4.0)) throw UsageError("--R must be at least 4");
    if (c.nodes < 101) throw UsageError("--nodes must be at least 101");
    if (need_odd_nodes && c.nodes % 2 == 0) throw UsageError("--nodes must be odd for spectra");
    if (!(c.tol >= 0.0)) throw UsageError("--tol must be nonnegative");
    if (c.mode_min < 1 || c.mode_max < c.mode_min) throw UsageError("--modes needs 1 <= N <= M");
    if (c.eigenvalues < 1) throw UsageError("need at least one eigenvalue per mode");
}

namespace {

const char* name(SolverChoice s) {
    switch (s) {
    case SolverChoice::automatic: return "auto";
    case SolverChoice::shooting: return "shooting";
    case SolverChoice::variational: return "variational";
    case SolverChoice::both: return "both";
    }
    return "?";
}

const char* name(Format f) { return f == Format::json ? "json" : f == Format::csv ? "csv" : "both"; }

bool wants_csv(Format f) { return f != Format::json; }
bool wants_json(Format f) { return f != Format::csv; }

std::size_t worker_count(const RunConfig& c, std::size_t jobs) {
    std::size_t w = c.workers ? c.workers : std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(w, jobs));
}

template <class F>
void parallel_for(std::size_t n, std::size_t workers, F fn) {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < n;) fn(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

RadialGrid grid_for(const RunConfig& c, double p) {
    return RadialGrid::graded(c.R ? *c.R : default_radius(Params(p)), c.nodes);
}

json header(const RunConfig& c, double p) {
    return {{"schema", 1}, {"version", kVersion}, {"config", to_json(c)}, {"config_hash", config_hash(c)},
            {"p", p}};
}

std::string csv_comment(const RunConfig& c) {
    return "config " + to_json(c).dump() + "\nconfig_hash " + config_hash(c);
}

// Result of the per-p solve pipeline.
struct Outcome {
    double p = 0.0;
    bool ok = false;
    std::string error;
    std::optional<Profile> profile;
    json report;
    double m_p = NAN, distance = NAN, grad_sup = NAN;
    AsymptoticFit fit;
    bool fit_ok = false;
};

Outcome solve_one(const RunConfig& c, double p, bool write) {
    Outcome o;
    o.p = p;
    const Params params(p);
    const RadialGrid grid = grid_for(c, p);
    std::vector<SolverKind> kinds;
    switch (c.solver) {
    case SolverChoice::automatic: kinds = {default_solver(params)}; break;
    case SolverChoice::shooting: kinds = {SolverKind::shooting}; break;
    case SolverChoice::variational: kinds = {SolverKind::variational}; break;
    case SolverChoice::both: kinds = {SolverKind::shooting, SolverKind::variational}; break;
    }
    std::vector<Profile> profiles;
    try {
        for (SolverKind k : kinds) profiles.push_back(solve(params, grid, k, c.tol));
    } catch (const Error& e) {
        o.error = e.what();
        return o;
    }
    const Profile& pr = profiles.front();
    json rep = header(c, p);
    rep["R"] = grid.radius();
    rep["nodes"] = grid.size();
    rep["solver"] = to_json(pr.info);
    rep["f_prime_at_zero"] = pr.f_prime_at_zero;
    if (profiles.size() == 2) {
        rep["variational_solver"] = to_json(profiles[1].info);
        rep["cross_solver_sup_distance"] = sup_distance(profiles[0], profiles[1]);
    }
    const InvariantReport inv = audit(pr);
    rep["invariants"] = to_json(inv);
    try {
        const EnergyReport e = energy(pr);
        rep["energy"] = to_json(e);
        o.m_p = e.total;
        const UpperBoundCheck ub = upper_bound_check(pr);
        rep["upper_bound"] = {{"bound", ub.bound}, {"m_p", ub.m_p}, {"pass", ub.pass}};
    } catch (const Error& e) {
        rep["energy"] = nullptr;
        rep["energy_error"] = e.what();
    }
    try {
        o.fit = tail_constants(pr);
        o.fit_ok = true;
        rep["asymptotics"] = to_json(o.fit);
    } catch (const Error& e) {
        rep["asymptotics"] = nullptr;
        rep["asymptotics_error"] = e.what();
    }
    const GradientBound gb = gradient_bound_check(pr);
    o.grad_sup = gb.sup_norm;
    o.distance = distance_to_limit(pr);
    rep["gradient_bound"] = {{"sup_norm", gb.sup_norm}, {"location", gb.location}, {"at_origin", gb.at_origin}};
    rep["distance_to_limit"] = o.distance;

    if (write) {
        const std::string tag = p_tag(p);
        if (wants_csv(c.format)) write_atomic(c.out / ("profile_p" + tag + ".csv"), profile_csv(pr, csv_comment(c)));
        if (wants_json(c.format)) {
            json pj = header(c, p);
            pj["profile"] = to_json(pr);
            write_atomic(c.out / ("profile_p" + tag + ".json"), pj.dump(1) + "\n");
        }
        write_atomic(c.out / ("report_p" + tag + ".json"), rep.dump(2) + "\n");
    }
    o.ok = inv.all_pass() && !rep["energy"].is_null();
    if (!inv.all_pass()) {
        for (const auto& chk : inv.checks)
            if (!chk.pass) o.error += (o.error.empty() ? "" : ", ") + chk.name;
        o.error = "invariant audit failed: " + o.error;
    } else if (rep["energy"].is_null()) {
        o.error = rep["energy_error"].get<std::string>();
    }
    o.report = std::move(rep);
    o.profile = pr;
    return o;
}

std::vector<Outcome> solve_all(const RunConfig& c, bool write) {
    std::vector<Outcome> out(c.p_list.size());
    parallel_for(out.size(), worker_count(c, out.size()), [&](std::size_t i) {
        try {
            out[i] = solve_one(c, c.p_list[i], write);
        } catch (const std::exception& e) {
            out[i].p = c.p_list[i];
            out[i].error = e.what();
        }
    });
    return out;
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
}

int usage(const UsageError& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    return 2;
}

}  // namespace

json to_json(const RunConfig& c) {
    json j = {{"p_list", c.p_list},
              {"R", c.R ? json(*c.R) : json("default")},
              {"nodes", c.nodes},
              {"grading", "graded"},
              {"solver", name(c.solver)},
              {"tol", c.tol},
              {"modes", {c.mode_min, c.mode_max}},
              {"eigenvalues", c.eigenvalues},
              {"out", c.out.string()},
              {"workers", c.workers},
              {"format", name(c.format)}};
    return j;
}

std::string config_hash(const RunConfig& c) {
    json j = to_json(c);
    // where files go and how many threads run does not change any number
    j.erase("out");
    j.erase("workers");
    j.erase("format");
    return sha256_hex(j.dump() + "|" + kVersion);
}

std::string p_tag(double p) { return format_double(p); }

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate(c);
    } catch (const UsageError& e) {
        return usage(e, err);
    }
    int status = 0;
    for (const Outcome& o : solve_all(c, true)) {
        if (!o.profile) {
            err << "p = " << o.p << ": solve failed: " << o.error << "\n";
            status = 1;
            continue;
        }
        out << "p = " << o.p << ": m_p = " << fmt(o.m_p, 12) << ", f'(0) = " << fmt(o.profile->f_prime_at_zero, 12)
            << ", solver " << to_string(o.profile->info.kind);
        if (o.report.contains("cross_solver_sup_distance"))
            out << ", |f_shoot - f_var| = " << fmt(o.report["cross_solver_sup_distance"].get<double>(), 3);
        out << "\n";
        if (!o.ok) {
            err << "p = " << o.p << ": " << o.error << "\n";
            status = 1;
        }
    }
    return status;
}

int cmd_audit(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate(c);
    } catch (const UsageError& e) {
        return usage(e, err);
    }
    int status = 0;
    for (const Outcome& o : solve_all(c, false)) {
        if (!o.profile) {
            err << "p = " << o.p << ": solve failed: " << o.error << "\n";
            status = 1;
            continue;
        }
        const InvariantReport inv = audit(*o.profile);
        out << "p = " << o.p << "\n";
        for (const auto& chk : inv.checks)
            out << "  " << std::left << std::setw(28) << chk.name << (chk.pass ? "pass" : "FAIL") << "  worst "
                << fmt(chk.worst, 3) << " at r = " << fmt(chk.radius, 4) << "\n";
        if (!inv.all_pass()) status = 1;
    }
    return status;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate(c);
    } catch (const UsageError& e) {
        return usage(e, err);
    }
    const std::vector<Outcome> results = solve_all(c, true);
    std::string rates = "# " + csv_comment(c);
    rates.insert(rates.find('\n') + 1, "# ");
    rates += "\np,m_p,distance_to_limit,distance_ratio,tail_const_potential,tail_const_derivative,gradient_sup\n";
    std::string tails = "# " + csv_comment(c);
    tails.insert(tails.find('\n') + 1, "# ");
    tails += "\np,quantity,estimate,target,rel_err\n";
    std::vector<std::string> failures;
    for (const Outcome& o : results) {
        if (!o.profile) {
            failures.push_back(fmt(o.p) + " (" + o.error + ")");
            continue;
        }
        if (!o.ok) failures.push_back(fmt(o.p) + " (" + o.error + ")");
        const double ratio = o.distance / std::sqrt(std::log(o.p) / o.p);
        const double tp = o.fit_ok ? o.fit.tail_const_potential : NAN;
        const double td = o.fit_ok ? o.fit.tail_const_derivative : NAN;
        rates += format_double(o.p) + ',' + format_double(o.m_p) + ',' + format_double(o.distance) + ',' +
                 format_double(ratio) + ',' + format_double(tp) + ',' + format_double(td) + ',' +
                 format_double(o.grad_sup) + '\n';
        if (o.fit_ok) {
            tails += format_double(o.p) + ",potential," + format_double(tp) + ',' +
                     format_double(o.fit.target_potential) + ',' + format_double(o.fit.relative_errors.first) + '\n';
            tails += format_double(o.p) + ",derivative," + format_double(td) + ',' +
                     format_double(o.fit.target_derivative) + ',' + format_double(o.fit.relative_errors.second) +
                     '\n';
        }
        out << "p = " << o.p << ": m_p = " << fmt(o.m_p, 10) << ", distance/sqrt(ln p/p) = " << fmt(ratio, 4)
            << "\n";
    }
    write_atomic(c.out / "rates.csv", rates);
    write_atomic(c.out / "tail_constants.csv", tails);
    if (!failures.empty()) {
        err << failures.size() << " of " << results.size() << " failed:\n";
        for (const auto& f : failures) err << "  p = " << f << "\n";
        return 1;
    }
    return 0;
}

int cmd_spectrum(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate(c, true);
    } catch (const UsageError& e) {
        return usage(e, err);
    }
    RunConfig sc = c;
    if (sc.solver == SolverChoice::both) sc.solver = SolverChoice::automatic;
    const std::vector<Outcome> solved = solve_all(sc, false);
    struct Spec {
        std::optional<StabilitySurvey> survey;
        std::optional<SignCertificate> signs;
        std::optional<TranslationIdentity> identity;
        std::string error;
    };
    std::vector<Spec> specs(solved.size());
    parallel_for(specs.size(), worker_count(c, specs.size()), [&](std::size_t i) {
        if (!solved[i].profile) return;
        try {
            const Profile& pr = *solved[i].profile;
            specs[i].survey = stability_survey(pr, std::max(2, c.mode_max), c.eigenvalues);
            specs[i].signs = coefficient_signs(assemble_G2(pr).tables, pr.params.p());
            specs[i].identity = translation_identity(pr);
        } catch (const std::exception& e) {
            specs[i].error = e.what();
        }
    });

    int status = 0;
    for (std::size_t i = 0; i < solved.size(); ++i) {
        const double p = solved[i].p;
        if (!solved[i].profile) {
            err << "p = " << p << ": solve failed: " << solved[i].error << "\n";
            status = 1;
            continue;
        }
        if (!specs[i].survey) {
            err << "p = " << p << ": spectrum failed: " << specs[i].error << "\n";
            status = 1;
            continue;
        }
        StabilitySurvey s = *specs[i].survey;
        // keep the requested modes only
        std::erase_if(s.modes, [&](const ModeSpectrum& m) { return m.n < c.mode_min || m.n > c.mode_max; });
        s.kernel_dimension = 0;
        s.negative_count = 0;
        s.min_kernel_overlap = 1.0;
        for (const auto& m : s.modes) {
            s.kernel_dimension += m.copies * m.near_zero;
            s.negative_count += m.copies * m.report.negative_count;
            for (std::size_t k = 0; k < m.report.eigenvalues.size(); ++k)
                if (std::abs(m.report.eigenvalues[k]) <= 100.0 * m.drift[k])
                    s.min_kernel_overlap =
                        std::min(s.min_kernel_overlap, m.report.zero_mode_overlaps.empty() ? 0.0
                                                                                            : m.report.zero_mode_overlaps[k]);
        }

        const std::string tag = p_tag(p);
        if (wants_csv(c.format)) write_atomic(c.out / ("spectra_p" + tag + ".csv"), spectra_csv(s, csv_comment(c)));
        if (wants_json(c.format)) {
            json j = header(c, p);
            j["solver"] = to_json(solved[i].profile->info);
            j["spectrum"] = to_json(s);
            j["coefficient_signs"] = to_json(*specs[i].signs);
            const auto& id = *specs[i].identity;
            j["identities"] = {{"F2_translation", id.f2.value},
                               {"F2_scale", id.f2.scale},
                               {"G2_translation", id.g2.value},
                               {"G2_scale", id.g2.scale}};
            write_atomic(c.out / ("spectrum_p" + tag + ".json"), j.dump(2) + "\n");
        }

        out << "p = " << p << ", modes " << c.mode_min << ".." << c.mode_max << "\n";
        out << "  n  part      copies  lambda_1        overlap   near_zero  negative\n";
        for (const auto& m : s.modes)
            out << "  " << std::left << std::setw(3) << m.n << std::setw(10) << to_string(m.kind) << std::setw(8)
                << m.copies << std::setw(16) << fmt(m.report.eigenvalues.front(), 6) << std::setw(10)
                << fmt(m.report.zero_mode_overlaps.front(), 6) << std::setw(11) << m.near_zero
                << m.report.negative_count << "\n";
        out << "  kernel: " << s.kernel_dimension << " near-zero directions, min overlap "
            << fmt(s.min_kernel_overlap, 8) << "\n";
        const SignCertificate& sg = *specs[i].signs;
        out << "  coefficient signs: alpha>0 " << (sg.alpha_positive ? "yes" : "no") << ", beta>0 "
            << (sg.beta_positive ? "yes" : "no") << ", b<0 " << (sg.b_negative ? "yes" : "no");
        if (sg.first_alpha_violation) out << " (alpha first fails at r = " << fmt(*sg.first_alpha_violation, 4) << ")";
        out << "\n";
        if (p > 4.0) {
            out << "outside certified range (p > 4): no stability verdict\n";
            continue;
        }
        if (s.negative_count == 0) {
            out << "STABLE\n";
        } else {
            out << "UNSTABLE: " << s.negative_count << " negative eigenvalues\n";
            status = 1;
        }
        const bool full = c.mode_min <= 1 && c.mode_max >= 2;
        if (full && (s.kernel_dimension != 3 || s.min_kernel_overlap <= 0.999)) {
            err << "p = " << p << ": kernel check failed (dimension " << s.kernel_dimension << ", min overlap "
                << fmt(s.min_kernel_overlap, 6) << "; expected 3 and > 0.999)\n";
            status = 1;
        }
    }
    return status;
}

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
    std::vector<json> reports;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(c.out, ec)) {
        const std::string fn = entry.path().filename().string();
        if (fn.rfind("report_p", 0) != 0 || entry.path().extension() != ".json") continue;
        try {
            reports.push_back(json::parse(read_file(entry.path())));
        } catch (const std::exception& e) {
            err << "skipping " << fn << ": " << e.what() << "\n";
        }
    }
    if (ec) {
        err << "error: cannot read " << c.out.string() << ": " << ec.message() << "\n";
        return 2;
    }
    if (reports.empty()) {
        err << "no report_p*.json files in " << c.out.string() << "\n";
        return 1;
    }
    std::sort(reports.begin(), reports.end(),
              [](const json& a, const json& b) { return a.at("p").get<double>() < b.at("p").get<double>(); });
    auto get = [](const json& j, std::initializer_list<const char*> path) -> double {
        const json* cur = &j;
        for (const char* k : path) {
            if (!cur->is_object() || !cur->contains(k) || (*cur)[k].is_null()) return NAN;
            cur = &(*cur)[k];
        }
        return cur->is_number() ? cur->get<double>() : NAN;
    };
    std::string csv = "p,solver,m_p,pohozaev_relative,audit_pass,tail_potential_rel_err,tail_derivative_rel_err,"
                      "distance_to_limit\n";
    json summary = json::array();
    out << "p        solver       m_p              pohozaev   audit  tail errors\n";
    for (const json& r : reports) {
        const double p = r.at("p").get<double>();
        const std::string solver = r.at("solver").at("kind").get<std::string>();
        const bool pass = r.at("invariants").at("all_pass").get<bool>();
        const double m = get(r, {"energy", "total"}), poh = get(r, {"energy", "pohozaev_relative"});
        double e1 = NAN, e2 = NAN;
        if (r.contains("asymptotics") && !r["asymptotics"].is_null()) {
            e1 = r["asymptotics"]["relative_errors"][0].is_null() ? NAN : r["asymptotics"]["relative_errors"][0].get<double>();
            e2 = r["asymptotics"]["relative_errors"][1].is_null() ? NAN : r["asymptotics"]["relative_errors"][1].get<double>();
        }
        const double dist = get(r, {"distance_to_limit"});
        out << std::left << std::setw(9) << fmt(p) << std::setw(13) << solver << std::setw(17) << fmt(m, 12)
            << std::setw(11) << fmt(poh, 3) << std::setw(7) << (pass ? "pass" : "FAIL") << fmt(e1, 3) << ", "
            << fmt(e2, 3) << "\n";
        csv += format_double(p) + ',' + solver + ',' + format_double(m) + ',' + format_double(poh) + ',' +
               (pass ? "1" : "0") + ',' + format_double(e1) + ',' + format_double(e2) + ',' + format_double(dist) +
               '\n';
        summary.push_back({{"p", p},
                           {"solver", solver},
                           {"m_p", std::isfinite(m) ? json(m) : json(nullptr)},
                           {"pohozaev_relative", std::isfinite(poh) ? json(poh) : json(nullptr)},
                           {"audit_pass", pass},
                           {"config_hash", r.value("config_hash", "")}});
    }
    if (wants_csv(c.format)) write_atomic(c.out / "summary.csv", csv);
    if (wants_json(c.format))
        write_atomic(c.out / "summary.json", json({{"schema", 1}, {"reports", summary}}).dump(2) + "\n");
    return 0;
}

}  // namespace pgl
