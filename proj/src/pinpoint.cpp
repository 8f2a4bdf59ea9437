#include "bugslice/pinpoint.hpp"

#include "bugslice/error.hpp"

#include <map>
#include <tuple>

namespace bugslice {

std::vector<OccurrenceRef> eligible_occurrences(const Function& func) {
  std::map<std::string, int> counts;
  for (const auto& st : func.statements) {
    for (const auto& o : st.occurrences) {
      if (!o.is_declaration) ++counts[o.key];
    }
  }
  std::vector<OccurrenceRef> out;
  for (const auto& st : func.statements) {
    for (std::size_t k = 0; k < st.occurrences.size(); ++k) {
      const auto& o = st.occurrences[k];
      if (!o.is_declaration && counts[o.key] >= 2) out.push_back({st.index, static_cast<int>(k)});
    }
  }
  return out;
}

const char* to_string(PinpointEmbedding mode) { return mode == PinpointEmbedding::mask ? "mask" : "aggregate"; }

std::optional<PinpointEmbedding> parse_pinpoint_embedding(std::string_view text) {
  if (text == "mask") return PinpointEmbedding::mask;
  if (text == "aggregate") return PinpointEmbedding::aggregate;
  return std::nullopt;
}

EmbeddingVector occurrence_vector(const EmbeddingProvider& provider, const Function& func, const OccurrenceRef& ref,
                                  const PinpointOptions& options) {
  const Statement& st = func.statements.at(ref.statement);
  const VariableOccurrence& occ = st.occurrences.at(ref.occurrence);
  if (options.embedding == PinpointEmbedding::aggregate) return embed_variable_aggregated(provider, st, occ);
  return embed_variable_masked(provider, func, st, occ, options.context);
}

EmbeddingVector seed_variable_vector(const EmbeddingProvider& provider, const Function& func, int statement,
                                     const std::string& key, const PinpointOptions& options) {
  const Statement& st = func.statements.at(statement);
  int pick = -1;
  for (std::size_t k = 0; k < st.occurrences.size(); ++k) {
    if (st.occurrences[k].key != key) continue;
    if (pick < 0 || (st.occurrences[pick].is_declaration && !st.occurrences[k].is_declaration)) {
      pick = static_cast<int>(k);
    }
  }
  if (pick < 0) {
    throw Error(ErrorCode::criterion_mismatch, "'" + key + "' does not occur in statement at line " + std::to_string(st.line));
  }
  return occurrence_vector(provider, func, {statement, pick}, options);
}

PinpointResult pinpoint_candidate(const EmbeddingProvider& provider, std::span<const float> seed_vector,
                                  const Function& func, const PinpointOptions& options,
                                  const std::vector<EmbeddingVector>* vectors) {
  const auto eligible = eligible_occurrences(func);
  if (eligible.empty()) throw Error(ErrorCode::no_eligible_occurrence, func.id + " has no recurring variable");
  if (vectors && vectors->size() != eligible.size()) {
    throw Error(ErrorCode::corrupt_index, "precomputed vector count differs from the eligible occurrences of " + func.id);
  }

  PinpointResult best;
  bool have = false;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    const OccurrenceRef& ref = eligible[i];
    const Statement& st = func.statements[ref.statement];
    const VariableOccurrence& occ = st.occurrences[ref.occurrence];
    const double score = vectors ? cosine_similarity(seed_vector, (*vectors)[i])
                                 : cosine_similarity(seed_vector, occurrence_vector(provider, func, ref, options));
    bool better = !have || score > best.score;
    if (have && score == best.score) {
      const Statement& bst = func.statements[best.statement];
      const int bfirst = bst.occurrences[best.ref.occurrence].span.first;
      better = std::tuple(st.line, st.ordinal, occ.span.first) < std::tuple(bst.line, bst.ordinal, bfirst);
    }
    if (better) {
      best = {func.id, ref, ref.statement, occ.key, st.line, score, 0};
      have = true;
    }
  }
  return best;
}

std::vector<PinpointResult> pinpoint_all(const EmbeddingProvider& provider, std::span<const EmbeddingVector> seed_vectors,
                                         const Function& func, const PinpointOptions& options,
                                         const std::vector<EmbeddingVector>* vectors, Diagnostics* diagnostics) {
  if (seed_vectors.empty()) throw Error(ErrorCode::empty_input, "no seed pairs to pinpoint");
  std::vector<PinpointResult> out;
  for (std::size_t p = 0; p < seed_vectors.size(); ++p) {
    try {
      auto r = pinpoint_candidate(provider, seed_vectors[p], func, options, vectors);
      r.seed_pair = static_cast<int>(p);
      out.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_eligible_occurrence) throw;
      if (diagnostics) diagnostics->push_back({func.file, func.start_line, Severity::info, e.what()});
    }
  }
  if (out.empty()) throw Error(ErrorCode::all_pairs_failed, "no seed pair could be pinpointed in " + func.id);
  return out;
}

} // namespace bugslice
