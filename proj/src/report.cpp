#include "lacuna/report.hpp"

#include "lacuna/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace lacuna {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const
{
    if (precision_bits < 64) throw Error(ErrorKind::InvalidArgument, "precision must be at least 64 bits");
    if (!(tolerance > 0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    if (degree_cap < 1) throw Error(ErrorKind::InvalidArgument, "degree cap must be positive");
    if (!(c1 > 0)) throw Error(ErrorKind::InvalidArgument, "C1 must be positive");
}

nlohmann::json RunConfig::to_json() const
{
    return {{"precision_bits", precision_bits}, {"tolerance", tolerance}, {"seed", seed},
            {"degree_cap", degree_cap},         {"c1", c1},               {"format", to_string(format)}};
}

Format parse_format(const std::string& s)
{
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    if (s == "both") return Format::both;
    throw Error(ErrorKind::InvalidArgument, "format must be json, csv or both");
}

std::string to_string(Format f)
{
    switch (f) {
    case Format::json: return "json";
    case Format::csv: return "csv";
    case Format::both: return "both";
    }
    return "both";
}

void apply_config_text(RunConfig& cfg, const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "precision" || key == "precision_bits") cfg.precision_bits = std::stol(value);
            else if (key == "tol" || key == "tolerance") cfg.tolerance = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "degree_cap" || key == "degree-cap") cfg.degree_cap = std::stoi(value);
            else if (key == "c1") cfg.c1 = std::stod(value);
            else if (key == "out" || key == "output_dir") cfg.output_dir = value;
            else if (key == "format") cfg.format = parse_format(value);
            else throw Error(ErrorKind::InvalidArgument, "unknown key '" + key + "'");
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::InvalidArgument,
                        "config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorKind::Io, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string to_jsonl(const std::vector<nlohmann::json>& rows)
{
    std::string out;
    for (const auto& r : rows) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::filesystem::path> emit_report(const std::string& stem, const nlohmann::json& doc,
                                               const std::string& csv, const RunConfig& cfg)
{
    std::vector<std::filesystem::path> written;
    if (cfg.wants_json()) {
        auto p = cfg.output_dir / (stem + ".json");
        write_atomic(p, doc.dump(2) + "\n");
        written.push_back(p);
    }
    if (cfg.wants_csv()) {
        auto p = cfg.output_dir / (stem + ".csv");
        write_atomic(p, csv);
        written.push_back(p);
    }
    return written;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace lacuna
