#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <unistd.h>

#include "comolife/cli.hpp"
#include "comolife/errors.hpp"

namespace comolife::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const ordered_json& v, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
    case ordered_json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, item] : v.items()) {
            if (!first) out += ",\n";
            first = false;
            out += pad + ordered_json(key).dump() + ": ";
            emit(item, out, depth + 1);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case ordered_json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        // Rows of scalars stay on one line.
        const bool flat = std::none_of(v.begin(), v.end(), [](const auto& x) { return x.is_structured(); });
        out += flat ? "[" : "[\n";
        bool first = true;
        for (const auto& item : v) {
            if (!first) out += flat ? ", " : ",\n";
            first = false;
            if (!flat) out += pad;
            emit(item, out, depth + 1);
        }
        out += flat ? "]" : "\n" + close_pad + "]";
        return;
    }
    case ordered_json::value_t::number_float:
        out += format_double(v.get<double>());
        return;
    default:
        out += v.dump();
        return;
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string csv_cell(const ordered_json& v) {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

} // namespace

std::string to_json_text(const ordered_json& value) {
    std::string out;
    emit(value, out, 0);
    return out;
}

std::string render_json(const Report& report, bool with_timestamp) {
    ordered_json doc = ordered_json::object();
    doc["command"] = report.command;
    doc["version"] = kVersion;
    if (with_timestamp) doc["timestamp"] = utc_timestamp();
    doc["inputs"] = report.inputs;
    ordered_json tables = ordered_json::array();
    for (const auto& t : report.tables) {
        ordered_json rows = ordered_json::array();
        for (const auto& r : t.rows) rows.push_back(ordered_json(r));
        tables.push_back(ordered_json{{"name", t.name},
                                      {"provenance", t.provenance},
                                      {"columns", t.columns},
                                      {"rows", std::move(rows)}});
    }
    doc["tables"] = std::move(tables);
    doc["diagnostics"] = report.diagnostics;
    doc["warnings"] = report.warnings;
    return to_json_text(doc) + "\n";
}

std::string render_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + csv_cell(row[c]);
        out += "\n";
    }
    return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

} // namespace comolife::cli
