#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace facruin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAccuracy = 3;

struct Table {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// "%.12g" with '.' decimal regardless of locale.
std::string format_number(double x);

/// Comment line with the config hash, header row, then one LF-terminated line per row.
std::string format_csv(const Table& table, const std::string& config_hash);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// One sweep axis, "name=start:stop:step" or "name=v1,v2,...".
struct SweepAxis {
    std::string path;  // resolved dotted field path
    std::vector<double> values;
};

SweepAxis parse_sweep_axis(const std::string& text);

/// Entry point for the facility_ruin tool.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace facruin::cli
