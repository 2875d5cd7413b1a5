#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lacuna {

enum class Format { json, csv, both };

struct RunConfig {
    long precision_bits = 256;
    double tolerance = 1e-30;
    std::uint64_t seed = 0;
    int degree_cap = 20000;
    double c1 = 8.0;
    std::filesystem::path output_dir = ".";
    Format format = Format::both;

    /// Throws InvalidArgument unless precision_bits >= 64 and tolerance > 0.
    void validate() const;
    bool wants_json() const { return format != Format::csv; }
    bool wants_csv() const { return format != Format::json; }
    nlohmann::json to_json() const;
};

Format parse_format(const std::string& s);
std::string to_string(Format f);

/// Applies `key = value` lines (blank lines and # comments ignored).
/// Keys: precision, tol, seed, degree_cap, c1, out, format.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Writes to a temporary sibling, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// One JSON object per line.
std::string to_jsonl(const std::vector<nlohmann::json>& rows);

/// Writes <stem>.json and/or <stem>.csv under cfg.output_dir; returns the paths written.
std::vector<std::filesystem::path> emit_report(const std::string& stem, const nlohmann::json& doc,
                                               const std::string& csv, const RunConfig& cfg);

/// Minimal CSV field quoting.
std::string csv_field(const std::string& s);

}  // namespace lacuna
