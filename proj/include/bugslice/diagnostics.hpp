#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bugslice {

enum class Severity { info, warning, error };

struct Diagnostic {
  std::string file;
  int line = 0;
  Severity severity = Severity::warning;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

const char* to_string(Severity severity);

// One JSON object per line: {"file":..,"line":..,"severity":..,"message":..}
void write_diagnostics_jsonl(std::ostream& out, const Diagnostics& diagnostics);

} // namespace bugslice
