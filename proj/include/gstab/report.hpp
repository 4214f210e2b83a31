#pragma once

#include <string>
#include <vector>

#include "json.hpp"

// Deterministic report emission. CSV cells are printed with %.17g so doubles
// round-trip exactly and output bytes depend only on the computed values;
// JSON uses ordered_json so key order is the insertion order. Nothing
// machine-specific (paths, timestamps) enters a report.

namespace gstab {

std::string format_g17(double x);

class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> columns);
    void row(const std::vector<double>& values);   // size must match header
    const std::string& str() const { return text_; }

private:
    size_t columns_;
    std::string text_;
};

/// {"columns": [...], "rows": [[...], ...]} for format=json reports.
nlohmann::ordered_json table_json(const std::vector<std::string>& columns,
                                  const std::vector<std::vector<double>>& rows);

/// Common report skeleton: schema_version, command, resolved config echo.
nlohmann::ordered_json base_report(const std::string& command,
                                   const nlohmann::ordered_json& config_echo);

/// Writes content, creating parent directories as needed; throws
/// std::runtime_error on I/O failure.
void write_file(const std::string& path, const std::string& content);

// Log verbosity from the GSTAB_LOG environment variable: quiet, info
// (default), debug. Messages go to stderr; report bytes are unaffected.
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };
LogLevel log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace gstab
