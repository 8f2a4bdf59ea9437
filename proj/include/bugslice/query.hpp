#pragma once

#include "bugslice/code_model.hpp"
#include "bugslice/diagnostics.hpp"
#include "bugslice/embedding.hpp"
#include "bugslice/graphs.hpp"
#include "bugslice/index_store.hpp"
#include "bugslice/pinpoint.hpp"
#include "bugslice/seed_analysis.hpp"
#include "bugslice/slicer.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bugslice {

enum class TargetSliceMode { slice, direct_mask_mapping };

const char* to_string(TargetSliceMode mode);
std::optional<TargetSliceMode> parse_target_slice_mode(std::string_view text);

struct QueryConfig {
  SliceOptions slice;
  PinpointOptions pinpoint;
  TargetSliceMode target_slice = TargetSliceMode::slice;
  std::size_t screen_top_k = 1000;
  std::size_t report_top_n = 10;
  int jobs = 1;
};

struct Query {
  Function seed_function;
  FunctionGraphs seed_graphs;
  std::vector<std::string> key_variables;
  SeedSignature signature;
  std::vector<EmbeddingVector> kvar_vectors; // one per signature pair
  FeatureSlice query_slice;
  EmbeddingVector query_slice_vector;
  EmbeddingVector seed_function_vector;
  // For the direct-mask-mapping target mode: one masked vector per query-slice
  // statement that has a variable, and the statement it came from.
  std::vector<EmbeddingVector> direct_vectors;
  std::vector<int> direct_statements;
};

/// Seed analysis on the buggy/fixed pair, then the merged query slice.
/// Throws SeedAnalysisFailed when no (rStmt, kVar) pair survives.
Query prepare_query(const Function& buggy, const Function& fixed, const EmbeddingProvider& provider,
                    const QueryConfig& config = {});

/// Same with explicit criteria instead of diff analysis.
Query prepare_query(const Function& buggy, const std::vector<SeedPair>& pairs, const EmbeddingProvider& provider,
                    const QueryConfig& config = {});

struct RankedCandidate {
  std::string function_id;
  std::string name;
  std::string file;
  int start_line = 0;
  std::vector<PinpointResult> pinpoints;
  FeatureSlice slice;
  double score = 0.0;
  int rank = 0;
};

struct QueryResult {
  std::vector<RankedCandidate> ranked; // truncated to report_top_n
  std::size_t screened = 0;            // functions kept by screening
  std::size_t scored = 0;              // candidates that produced a slice score
  Diagnostics diagnostics;
};

/// Screening, pinpointing, target slices, cosine ranking. Throws IndexRequired
/// when `index` is null and ManifestMismatch for a foreign provider.
QueryResult run_query(const Query& query, const Index* index, const EmbeddingProvider& provider,
                      const QueryConfig& config = {});

/// Candidate slice for one target under the configured mode (pinpoints included).
RankedCandidate target_candidate(const Query& query, const Function& target, const EmbeddingProvider& provider,
                                 const QueryConfig& config, const Index* index = nullptr,
                                 const FunctionRecord* record = nullptr, Diagnostics* diagnostics = nullptr);

enum class ReportFormat { text, json };

std::string render_report(const Query& query, const QueryResult& result, ReportFormat format);

} // namespace bugslice
