#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pgl/asymptotics.hpp"
#include "pgl/energy.hpp"
#include "pgl/profile.hpp"
#include "pgl/stability.hpp"

namespace pgl {

using json = nlohmann::json;

/// Writes to a temporary file in the same directory and renames it over path.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Columns r,f,df,h,grad_norm, one row per node. Lines starting with '#' before
/// the header carry run metadata.
std::string profile_csv(const Profile& profile, std::string_view comment = {});

struct ProfileColumns {
    std::vector<double> r, f, df, h, grad_norm;
};

/// Skips '#' lines; throws InvalidArgument on a wrong header or a malformed row.
ProfileColumns read_profile_csv(std::string_view text);

json to_json(const SolverInfo& info);
json to_json(const Profile& profile);
/// Inverse of to_json(const Profile&).
Profile profile_from_json(const json& j);

json to_json(const EnergyReport& e);
json to_json(const InvariantReport& r);
json to_json(const AsymptoticFit& fit);
json to_json(const SpectrumReport& s);
json to_json(const SignCertificate& s);
json to_json(const StabilitySurvey& s);

/// Rows p,n,part,copies,lambda_1..lambda_k,overlap_1..overlap_k,near_zero,negative_count.
std::string spectra_csv(const StabilitySurvey& survey, std::string_view comment = {});

}  // namespace pgl
