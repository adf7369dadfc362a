#pragma once

#include "shiftlab/shift_diagnostics.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace shiftlab {

/// Serializes a diagnostic report with a fixed key order. `extra_config`
/// must be a JSON object whose keys are appended to the "config" section.
/// Throws DataError when a statistic is not finite or per_question is empty.
std::string report_to_json(const diagnostics::DiagnosticReport& report, std::string_view extra_config = "{}");

diagnostics::DiagnosticReport report_from_json(std::string_view json);

void save_report(const diagnostics::DiagnosticReport& report, const std::filesystem::path& path,
                 std::string_view extra_config = "{}");

diagnostics::DiagnosticReport load_report(const std::filesystem::path& path);

} // namespace shiftlab
