#include "pgl/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "pgl/error.hpp"

namespace pgl {

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::filesystem::create_directories(dir);
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

void put_comment(std::string& out, std::string_view comment) {
    std::size_t start = 0;
    while (start < comment.size()) {
        std::size_t end = comment.find('\n', start);
        if (end == std::string_view::npos) end = comment.size();
        out += "# ";
        out += comment.substr(start, end - start);
        out += '\n';
        start = end + 1;
    }
}

double parse_double(std::string_view s) {
    if (s == "nan") return NAN;
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidArgument("not a number: '" + std::string(s) + "'");
    return v;
}

// JSON has no nan/inf; they go out as null and come back as nan
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> doubles(const json& a) {
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& v : a) out.push_back(v.is_null() ? NAN : v.get<double>());
    return out;
}

json array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

}  // namespace

std::string profile_csv(const Profile& pr, std::string_view comment) {
    std::string out;
    put_comment(out, comment);
    out += "r,f,df,h,grad_norm\n";
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        out += format_double(pr.grid[i]) + ',' + format_double(pr.f[i]) + ',' + format_double(pr.df[i]) + ',' +
               format_double(pr.h[i]) + ',' + format_double(pr.gradient_norm[i]) + '\n';
    }
    return out;
}

ProfileColumns read_profile_csv(std::string_view text) {
    ProfileColumns c;
    bool header = false;
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != "r,f,df,h,grad_norm")
                throw InvalidArgument("profile csv: unexpected header '" + std::string(line) + "'");
            header = true;
            continue;
        }
        std::vector<double> row;
        std::size_t s = 0;
        while (true) {
            const std::size_t comma = line.find(',', s);
            row.push_back(parse_double(line.substr(s, comma == std::string_view::npos ? std::string_view::npos
                                                                                       : comma - s)));
            if (comma == std::string_view::npos) break;
            s = comma + 1;
        }
        if (row.size() != 5)
            throw InvalidArgument("profile csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(row.size()) + " fields");
        c.r.push_back(row[0]);
        c.f.push_back(row[1]);
        c.df.push_back(row[2]);
        c.h.push_back(row[3]);
        c.grad_norm.push_back(row[4]);
    }
    if (!header) throw InvalidArgument("profile csv: missing header");
    return c;
}

json to_json(const SolverInfo& info) {
    return {{"kind", to_string(info.kind)},
            {"tol", info.tol},
            {"iterations", info.iterations},
            {"residual", num(info.residual)},
            {"analytic_tail_from", info.analytic_tail_from}};
}

json to_json(const Profile& pr) {
    std::vector<double> r(pr.grid.nodes().begin(), pr.grid.nodes().end());
    return {{"p", pr.params.p()},
            {"R", pr.grid.radius()},
            {"nodes", pr.grid.size()},
            {"f_prime_at_zero", pr.f_prime_at_zero},
            {"solver", to_json(pr.info)},
            {"r", array(r)},
            {"f", array(pr.f)},
            {"df", array(pr.df)},
            {"h", array(pr.h)},
            {"grad_norm", array(pr.gradient_norm)},
            {"tail", array(pr.tail)}};
}

Profile profile_from_json(const json& j) {
    try {
        SolverInfo info;
        const json& s = j.at("solver");
        const std::string kind = s.at("kind").get<std::string>();
        if (kind == "shooting") info.kind = SolverKind::shooting;
        else if (kind == "variational") info.kind = SolverKind::variational;
        else throw InvalidArgument("profile json: unknown solver '" + kind + "'");
        info.tol = s.at("tol").get<double>();
        info.iterations = s.at("iterations").get<std::size_t>();
        info.residual = s.at("residual").is_null() ? NAN : s.at("residual").get<double>();
        info.analytic_tail_from = s.at("analytic_tail_from").get<double>();
        Profile pr{Params(j.at("p").get<double>()),
                   RadialGrid(doubles(j.at("r"))),
                   doubles(j.at("f")),
                   doubles(j.at("df")),
                   doubles(j.at("h")),
                   doubles(j.at("grad_norm")),
                   doubles(j.at("tail")),
                   j.at("f_prime_at_zero").get<double>(),
                   info};
        const std::size_t n = pr.grid.size();
        if (pr.f.size() != n || pr.df.size() != n || pr.h.size() != n || pr.gradient_norm.size() != n ||
            pr.tail.size() != n)
            throw InvalidArgument("profile json: field lengths differ from the grid");
        return pr;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("profile json: ") + e.what());
    }
}

json to_json(const EnergyReport& e) {
    return {{"kinetic", e.kinetic},
            {"potential", e.potential},
            {"total", e.total},
            {"pohozaev_residual", e.pohozaev_residual},
            {"pohozaev_relative", e.pohozaev_residual / e.total},
            {"tail_correction", e.tail_correction}};
}

json to_json(const InvariantReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"worst", num(c.worst)}, {"radius", c.radius}});
    return {{"all_pass", r.all_pass()}, {"checks", checks}};
}

json to_json(const AsymptoticFit& fit) {
    return {{"tail_const_potential", num(fit.tail_const_potential)},
            {"tail_const_derivative", num(fit.tail_const_derivative)},
            {"target_potential", fit.target_potential},
            {"target_derivative", fit.target_derivative},
            {"fit_window", {fit.fit_window.first, fit.fit_window.second}},
            {"relative_errors", {num(fit.relative_errors.first), num(fit.relative_errors.second)}}};
}

json to_json(const SpectrumReport& s) {
    return {{"eigenvalues", array(s.eigenvalues)},
            {"zero_mode_overlaps", array(s.zero_mode_overlaps)},
            {"negative_count", s.negative_count},
            {"norm", s.norm},
            {"tol", s.tol}};
}

json to_json(const SignCertificate& s) {
    json j = {{"alpha_positive", s.alpha_positive},
              {"beta_positive", s.beta_positive},
              {"b_negative", s.b_negative},
              {"all_hold", s.all_hold()},
              {"certified_range", s.certified_range},
              {"first_alpha_violation", nullptr},
              {"first_b_violation", nullptr}};
    if (s.first_alpha_violation) j["first_alpha_violation"] = *s.first_alpha_violation;
    if (s.first_b_violation) j["first_b_violation"] = *s.first_b_violation;
    return j;
}

json to_json(const StabilitySurvey& s) {
    json modes = json::array();
    for (const auto& m : s.modes) {
        json j = to_json(m.report);
        j["n"] = m.n;
        j["part"] = to_string(m.kind);
        j["copies"] = m.copies;
        j["drift"] = array(m.drift);
        j["near_zero"] = m.near_zero;
        modes.push_back(std::move(j));
    }
    return {{"p", s.p},
            {"modes", modes},
            {"kernel_dimension", s.kernel_dimension},
            {"negative_count", s.negative_count},
            {"min_kernel_overlap", s.min_kernel_overlap}};
}

std::string spectra_csv(const StabilitySurvey& s, std::string_view comment) {
    std::string out;
    put_comment(out, comment);
    const std::size_t k = s.modes.empty() ? 0 : s.modes.front().report.eigenvalues.size();
    out += "p,n,part,copies";
    for (std::size_t i = 1; i <= k; ++i) out += ",lambda_" + std::to_string(i);
    for (std::size_t i = 1; i <= k; ++i) out += ",overlap_" + std::to_string(i);
    out += ",near_zero,negative_count\n";
    for (const auto& m : s.modes) {
        out += format_double(s.p) + ',' + std::to_string(m.n) + ',' + to_string(m.kind) + ',' +
               std::to_string(m.copies);
        for (double v : m.report.eigenvalues) out += ',' + format_double(v);
        for (double v : m.report.zero_mode_overlaps) out += ',' + format_double(v);
        out += ',' + std::to_string(m.near_zero) + ',' + std::to_string(m.report.negative_count) + '\n';
    }
    return out;
}

}  // namespace pgl
