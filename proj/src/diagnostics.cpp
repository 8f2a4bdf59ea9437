#include "bugslice/diagnostics.hpp"

#include <json.hpp>

namespace bugslice {

const char* to_string(Severity severity) {
  switch (severity) {
  case Severity::info: return "info";
  case Severity::warning: return "warning";
  case Severity::error: return "error";
  }
  return "info";
}

void write_diagnostics_jsonl(std::ostream& out, const Diagnostics& diagnostics) {
  for (const auto& d : diagnostics) {
    nlohmann::json j = {{"file", d.file}, {"line", d.line}, {"severity", to_string(d.severity)}, {"message", d.message}};
    out << j.dump() << '\n';
  }
}

} // namespace bugslice
