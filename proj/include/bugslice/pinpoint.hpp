#pragma once

#include "bugslice/code_model.hpp"
#include "bugslice/diagnostics.hpp"
#include "bugslice/embedding.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugslice {

/// A candidate criterion: occurrence `occurrence` of statement `statement`.
struct OccurrenceRef {
  int statement = -1;
  int occurrence = -1; // index into Statement::occurrences

  friend bool operator==(const OccurrenceRef&, const OccurrenceRef&) = default;
};

/// Non-declaration occurrences of keys that occur at least twice (declarations
/// not counted), in statement then token order.
std::vector<OccurrenceRef> eligible_occurrences(const Function& func);

enum class PinpointEmbedding { mask, aggregate };

const char* to_string(PinpointEmbedding mode);
std::optional<PinpointEmbedding> parse_pinpoint_embedding(std::string_view text);

struct PinpointOptions {
  PinpointEmbedding embedding = PinpointEmbedding::mask;
  MaskContext context = MaskContext::statement;
};

/// Variable vector for one occurrence under the chosen mode.
EmbeddingVector occurrence_vector(const EmbeddingProvider& provider, const Function& func, const OccurrenceRef& ref,
                                  const PinpointOptions& options = {});

/// Vector of the seed kVar: its first occurrence in the rStmt, embedded like a candidate.
EmbeddingVector seed_variable_vector(const EmbeddingProvider& provider, const Function& func, int statement,
                                     const std::string& key, const PinpointOptions& options = {});

struct PinpointResult {
  std::string function_id;
  OccurrenceRef ref;
  int statement = -1;
  std::string key;
  int line = 0;
  double score = 0.0;
  int seed_pair = 0; // index of the seed pair this result answers
};

/// Argmax of cosine(seed, v) over the eligible occurrences. Ties go to the
/// lower line, then lower statement ordinal, then lower span start.
/// `vectors`, when given, holds one precomputed vector per eligible occurrence
/// (same order as eligible_occurrences). Throws NoEligibleOccurrence.
PinpointResult pinpoint_candidate(const EmbeddingProvider& provider, std::span<const float> seed_vector,
                                  const Function& func, const PinpointOptions& options = {},
                                  const std::vector<EmbeddingVector>* vectors = nullptr);

/// One result per seed vector. Throws AllPairsFailed when nothing can be pinpointed.
std::vector<PinpointResult> pinpoint_all(const EmbeddingProvider& provider, std::span<const EmbeddingVector> seed_vectors,
                                         const Function& func, const PinpointOptions& options = {},
                                         const std::vector<EmbeddingVector>* vectors = nullptr,
                                         Diagnostics* diagnostics = nullptr);

} // namespace bugslice
