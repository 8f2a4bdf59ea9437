#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bugslice {

enum class ErrorCode {
  parse_error,
  graph_error,
  unknown_node,
  empty_result,
  no_root_statement,
  criterion_mismatch,
  mixed_functions,
  provider_unavailable,
  empty_input,
  span_mismatch,
  zero_vector,
  dim_mismatch,
  no_eligible_occurrence,
  all_pairs_failed,
  manifest_mismatch,
  corrupt_index,
  seed_analysis_failed,
  index_required,
  invalid_argument,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Callers switch on code() rather than on type.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::parse_error: return "ParseError";
  case ErrorCode::graph_error: return "GraphError";
  case ErrorCode::unknown_node: return "UnknownNode";
  case ErrorCode::empty_result: return "EmptyResult";
  case ErrorCode::no_root_statement: return "NoRootStatement";
  case ErrorCode::criterion_mismatch: return "CriterionMismatch";
  case ErrorCode::mixed_functions: return "MixedFunctions";
  case ErrorCode::provider_unavailable: return "ProviderUnavailable";
  case ErrorCode::empty_input: return "EmptyInput";
  case ErrorCode::span_mismatch: return "SpanMismatch";
  case ErrorCode::zero_vector: return "ZeroVector";
  case ErrorCode::dim_mismatch: return "DimMismatch";
  case ErrorCode::no_eligible_occurrence: return "NoEligibleOccurrence";
  case ErrorCode::all_pairs_failed: return "AllPairsFailed";
  case ErrorCode::manifest_mismatch: return "ManifestMismatch";
  case ErrorCode::corrupt_index: return "CorruptIndex";
  case ErrorCode::seed_analysis_failed: return "SeedAnalysisFailed";
  case ErrorCode::index_required: return "IndexRequired";
  case ErrorCode::invalid_argument: return "InvalidArgument";
  case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

} // namespace bugslice
