#pragma once

#include "shiftlab/shift_diagnostics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace shiftlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one shiftlab invocation. `args` excludes the program name.
/// Returns 0 on success, 1 on a data or I/O error, 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Plain-text table of a diagnostic report; identical reports render
/// identically.
std::string render_report(const diagnostics::DiagnosticReport& report);

} // namespace shiftlab::cli
