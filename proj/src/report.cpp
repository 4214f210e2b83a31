#include "gstab/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace gstab {

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvBuilder::CsvBuilder(std::vector<std::string> columns)
    : columns_(columns.size()) {
    if (columns.empty())
        throw std::invalid_argument("csv: need at least one column");
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) text_ += ',';
        text_ += columns[i];
    }
    text_ += '\n';
}

void CsvBuilder::row(const std::vector<double>& values) {
    if (values.size() != columns_)
        throw std::invalid_argument("csv: row width does not match header");
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) text_ += ',';
        text_ += format_g17(values[i]);
    }
    text_ += '\n';
}

nlohmann::ordered_json table_json(
    const std::vector<std::string>& columns,
    const std::vector<std::vector<double>>& rows) {
    nlohmann::ordered_json j;
    j["columns"] = columns;
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& row : rows) r.push_back(row);
    j["rows"] = std::move(r);
    return j;
}

nlohmann::ordered_json base_report(const std::string& command,
                                   const nlohmann::ordered_json& config_echo) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["config"] = config_echo;
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec)
            throw std::runtime_error("cannot create directory " +
                                     p.parent_path().string() + ": " +
                                     ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("GSTAB_LOG");
        if (!env) return LogLevel::Info;
        const std::string v(env);
        if (v == "quiet" || v == "0") return LogLevel::Quiet;
        if (v == "debug" || v == "2") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::Info) std::cerr << message << "\n";
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::Debug) std::cerr << message << "\n";
}

}  // namespace gstab
