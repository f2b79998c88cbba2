#pragma once

// =============================================================================
// File output helpers: atomic writes, CSV encoding, run manifests
// =============================================================================
//
// Outputs are written to a temporary sibling and renamed into place, so a
// crash never leaves a truncated report. CSV output is RFC 4180: CRLF row
// terminators, fields quoted when they contain a comma, quote, or newline,
// embedded quotes doubled. Every CLI run also writes a manifest recording the
// command, its arguments, and the files it produced.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace thermofix {

/// Writes `content` to `path` via a temporary file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Quotes one CSV field when its content requires it.
[[nodiscard]] inline std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Shortest round-trip decimal form of a number, for CSV cells.
[[nodiscard]] inline std::string csv_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

/// Encodes rows as an RFC 4180 document with CRLF terminators.
[[nodiscard]] inline std::string to_csv(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out += ',';
            out += csv_field(row[i]);
        }
        out += "\r\n";
    }
    return out;
}

/// Writes `<out_dir>/manifest.json` describing one CLI run.
inline void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                           const std::vector<std::string>& argv,
                           const std::vector<std::string>& outputs) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["argv"] = argv;
    j["outputs"] = outputs;
    write_file_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace thermofix
