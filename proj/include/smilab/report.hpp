#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "smilab/runner.hpp"

namespace smilab {

// Full artifact: digest + version + canonical config + payload. Everything
// except duration_seconds is a pure function of the config.
inline Json report_document(const RunResult& result) {
    Json doc;
    doc["digest"] = result.digest;
    doc["version"] = result.version;
    doc["kind"] = result.kind;
    doc["config"] = result.config.canonical();
    doc["payload"] = result.payload;
    doc["duration_seconds"] = result.duration_seconds;
    return doc;
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// tau,measured,analytic,mc_error with round-trip-exact doubles; the analytic
// column is left empty for ensembles without a closed form.
inline std::string csv_report(const RunResult& result) {
    if (result.kind != "decay-curve")
        throw ConfigError("csv: only kind 'decay-curve' has a csv form");
    const Json& p = result.payload;
    const bool analytic = p.contains("analytic");
    std::string out = "tau,measured,analytic,mc_error\n";
    const auto& taus = p.at("taus");
    for (std::size_t k = 0; k < taus.size(); ++k) {
        out += format_g17(taus[k].get<double>());
        out += ',';
        out += format_g17(p.at("measured")[k].get<double>());
        out += ',';
        if (analytic) out += format_g17(p.at("analytic")[k].get<double>());
        out += ',';
        out += format_g17(p.at("mc_errors")[k].get<double>());
        out += '\n';
    }
    return out;
}

inline std::string render_report(const RunResult& result, const std::string& format) {
    if (format == "csv") return csv_report(result);
    if (format == "json") return report_document(result).dump(2) + "\n";
    throw ConfigError("output.format: '" + format + "' is not recognized");
}

inline void write_text_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out.good()) throw IoError("write to '" + path + "' failed");
}

inline void write_report(const RunResult& result, const std::string& path,
                         const std::string& format) {
    write_text_file(path, render_report(result, format));
}

} // namespace smilab
