#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pgl/error.hpp"
#include "pgl/io.hpp"
#include "pgl/profile.hpp"

namespace pgl {

enum class SolverChoice { automatic, shooting, variational, both };
enum class Format { json, csv, both };

/// Everything a command needs; serialized into every artifact it writes.
struct RunConfig {
    std::vector<double> p_list;
    std::optional<double> R;       ///< default_radius(p) when unset
    std::size_t nodes = 2001;
    SolverChoice solver = SolverChoice::automatic;
    double tol = 0.0;              ///< 0: solver default
    int mode_min = 1, mode_max = 8;
    std::size_t eigenvalues = 6;
    std::filesystem::path out = ".";
    std::size_t workers = 0;       ///< 0: hardware concurrency
    Format format = Format::both;
};

/// Thrown for configurations that no command can run (exit status 2).
class UsageError : public Error {
public:
    using Error::Error;
};

SolverChoice parse_solver(const std::string& s);
Format parse_format(const std::string& s);
/// "3", "2.5,3,4"
std::vector<double> parse_p_list(const std::string& s);
/// "1..8" or "3"
std::pair<int, int> parse_modes(const std::string& s);

/// Throws UsageError. need_odd_nodes: the stability survey coarsens by two.
void validate(const RunConfig& config, bool need_odd_nodes = false);

json to_json(const RunConfig& config);
/// SHA-256 of the config JSON (keys sorted) and the library version.
std::string config_hash(const RunConfig& config);

/// p as it appears in file names: shortest round-trip decimal.
std::string p_tag(double p);

/// Exit status: 0 success, 1 numerical failure or failed check, 2 usage error.
/// Human-readable progress goes to out, failures to err.
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_audit(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_spectrum(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Summarizes the report_p*.json files found in config.out.
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pgl
