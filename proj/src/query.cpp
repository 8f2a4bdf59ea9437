#include "bugslice/query.hpp"

#include "bugslice/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace bugslice {

using nlohmann::json;

const char* to_string(TargetSliceMode mode) {
  return mode == TargetSliceMode::slice ? "slice" : "direct-mask-mapping";
}

std::optional<TargetSliceMode> parse_target_slice_mode(std::string_view text) {
  if (text == "slice") return TargetSliceMode::slice;
  if (text == "direct-mask-mapping") return TargetSliceMode::direct_mask_mapping;
  return std::nullopt;
}

namespace {

Query finish_query(const Function& buggy, SeedSignature signature, std::vector<std::string> keys,
                   const EmbeddingProvider& provider, const QueryConfig& config) {
  Query q;
  q.seed_function = buggy;
  q.seed_graphs = build_graphs(buggy);
  q.key_variables = std::move(keys);
  q.signature = std::move(signature);

  std::vector<FeatureSlice> slices;
  for (const auto& pair : q.signature.pairs) {
    q.kvar_vectors.push_back(seed_variable_vector(provider, buggy, pair.statement, pair.key, config.pinpoint));
    slices.push_back(customized_slice(buggy, q.seed_graphs, {pair.statement, pair.key}, config.slice));
  }
  q.query_slice = merge_slices(buggy, slices);
  q.query_slice_vector = sequence_embedding(provider, slice_tokens(buggy, q.query_slice.statements));
  q.seed_function_vector = sequence_embedding(provider, token_texts(buggy.tokens()));

  const std::set<std::string> kvars(q.key_variables.begin(), q.key_variables.end());
  for (int s : q.query_slice.statements) {
    const auto& occs = buggy.statements[s].occurrences;
    if (occs.empty()) continue;
    int pick = 0;
    for (std::size_t k = 0; k < occs.size(); ++k) {
      if (kvars.contains(occs[k].key)) {
        pick = static_cast<int>(k);
        break;
      }
    }
    q.direct_vectors.push_back(occurrence_vector(provider, buggy, {s, pick}, config.pinpoint));
    q.direct_statements.push_back(s);
  }
  return q;
}

bool index_masks_usable(const Index* index, const QueryConfig& config) {
  return index && config.pinpoint.embedding == PinpointEmbedding::mask &&
         index->manifest.mask_context == to_string(config.pinpoint.context);
}

bool index_slices_usable(const Index* index, const QueryConfig& config) {
  return index && index->manifest.slicing_strategy == to_string(config.slice.strategy) &&
         index->manifest.coverage_metric == to_string(config.slice.coverage);
}

} // namespace

Query prepare_query(const Function& buggy, const Function& fixed, const EmbeddingProvider& provider,
                    const QueryConfig& config) {
  const Patch patch = compute_patch(buggy, fixed);
  if (patch.empty()) throw Error(ErrorCode::seed_analysis_failed, "buggy and fixed versions do not differ");
  std::vector<std::string> keys;
  try {
    keys = identify_key_variables(patch);
  } catch (const Error& e) {
    throw Error(ErrorCode::seed_analysis_failed, e.what());
  }
  SeedSignature sig = screen_root_statements(patch, keys);
  if (sig.pairs.empty()) {
    throw Error(ErrorCode::seed_analysis_failed, "NoRootStatement: no key variable has a root statement");
  }
  return finish_query(buggy, std::move(sig), std::move(keys), provider, config);
}

Query prepare_query(const Function& buggy, const std::vector<SeedPair>& pairs, const EmbeddingProvider& provider,
                    const QueryConfig& config) {
  if (pairs.empty()) throw Error(ErrorCode::seed_analysis_failed, "no criteria given");
  SeedSignature sig;
  std::vector<std::string> keys;
  for (const auto& p : pairs) {
    if (p.statement < 0 || p.statement >= static_cast<int>(buggy.statements.size()) ||
        !buggy.statements[p.statement].has_key(p.key)) {
      throw Error(ErrorCode::criterion_mismatch, "criterion '" + p.key + "' does not match a statement of " + buggy.id);
    }
    sig.pairs.push_back(p);
    if (std::find(keys.begin(), keys.end(), p.key) == keys.end()) keys.push_back(p.key);
  }
  return finish_query(buggy, std::move(sig), std::move(keys), provider, config);
}

RankedCandidate target_candidate(const Query& query, const Function& target, const EmbeddingProvider& provider,
                                 const QueryConfig& config, const Index* index, const FunctionRecord* record,
                                 Diagnostics* diagnostics) {
  RankedCandidate c;
  c.function_id = target.id;
  c.name = target.name;
  c.file = target.file;
  c.start_line = target.start_line;

  std::vector<EmbeddingVector> cached;
  const std::vector<EmbeddingVector>* vectors = nullptr;
  if (record && index_masks_usable(index, config)) {
    cached = index->mask_vectors_of(*record);
    vectors = &cached;
  }

  std::optional<std::span<const float>> stored_vector;
  if (config.target_slice == TargetSliceMode::direct_mask_mapping) {
    if (query.direct_vectors.empty()) throw Error(ErrorCode::all_pairs_failed, "query slice has no variables");
    c.pinpoints = pinpoint_all(provider, query.direct_vectors, target, config.pinpoint, vectors, diagnostics);
    std::set<int> stmts;
    c.slice.function_id = target.id;
    for (const auto& p : c.pinpoints) {
      stmts.insert(p.statement);
      c.slice.criteria.push_back({p.statement, p.key});
    }
    c.slice.statements.assign(stmts.begin(), stmts.end());
    c.slice.rendered_text = render_slice(target, c.slice.statements);
  } else {
    c.pinpoints = pinpoint_all(provider, query.kvar_vectors, target, config.pinpoint, vectors, diagnostics);
    const bool use_index = record && index_slices_usable(index, config);
    std::optional<FunctionGraphs> graphs;
    std::vector<FeatureSlice> slices;
    std::vector<std::optional<std::span<const float>>> slice_vectors;
    for (const auto& p : c.pinpoints) {
      const SliceEntry* entry = nullptr;
      if (use_index) {
        for (const auto& s : record->slices) {
          if (s.ref == p.ref) entry = &s;
        }
      }
      if (entry) {
        FeatureSlice fs;
        fs.function_id = target.id;
        fs.criteria.push_back({p.statement, p.key});
        fs.statements = entry->statements;
        fs.rendered_text = render_slice(target, fs.statements);
        slices.push_back(std::move(fs));
        slice_vectors.push_back(index->slice_vectors.at(entry->vector));
      } else {
        if (!graphs) graphs = build_graphs(target);
        slices.push_back(customized_slice(target, *graphs, {p.statement, p.key}, config.slice));
        slice_vectors.emplace_back();
      }
    }
    c.slice = merge_slices(target, slices);
    // A stored vector is valid only if merging left its statement set unchanged.
    for (std::size_t i = 0; i < slices.size() && !stored_vector; ++i) {
      if (slice_vectors[i] && slices[i].statements == c.slice.statements) stored_vector = slice_vectors[i];
    }
  }

  if (c.slice.statements.empty()) throw Error(ErrorCode::empty_result, "empty candidate slice in " + target.id);
  if (stored_vector) {
    c.score = cosine_similarity(query.query_slice_vector, *stored_vector);
  } else {
    const auto v = sequence_embedding(provider, slice_tokens(target, c.slice.statements));
    c.score = cosine_similarity(query.query_slice_vector, v);
  }
  return c;
}

QueryResult run_query(const Query& query, const Index* index, const EmbeddingProvider& provider,
                      const QueryConfig& config) {
  if (!index) throw Error(ErrorCode::index_required, "a query needs a built index");
  check_provider(index->manifest, provider.info());
  QueryResult result;
  const auto hits = screen_top_k(*index, query.seed_function_vector, std::max<std::size_t>(1, config.screen_top_k));
  std::vector<std::size_t> todo;
  for (const auto& h : hits) {
    if (h.id != query.seed_function.id) todo.push_back(h.function);
  }
  result.screened = todo.size();

  std::vector<std::optional<RankedCandidate>> scored(todo.size());
  std::vector<Diagnostics> diags(todo.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr fatal;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      const FunctionRecord& record = index->functions[todo[k]];
      try {
        const Function target = index->parse(record);
        scored[k] = target_candidate(query, target, provider, config, index, &record, &diags[k]);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::provider_unavailable || e.code() == ErrorCode::corrupt_index) {
          std::lock_guard lock(mu);
          if (!fatal) fatal = std::current_exception();
          next = todo.size();
          return;
        }
        diags[k].push_back({record.file, record.start_line, Severity::info, std::string("not ranked: ") + e.what()});
      }
    }
  };
  const int jobs = std::max(1, config.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (fatal) std::rethrow_exception(fatal);

  for (auto& d : diags) result.diagnostics.insert(result.diagnostics.end(), d.begin(), d.end());
  for (auto& c : scored) {
    if (c) result.ranked.push_back(std::move(*c));
  }
  result.scored = result.ranked.size();
  std::sort(result.ranked.begin(), result.ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.function_id < b.function_id;
  });
  if (result.ranked.size() > config.report_top_n) result.ranked.resize(config.report_top_n);
  for (std::size_t i = 0; i < result.ranked.size(); ++i) result.ranked[i].rank = static_cast<int>(i + 1);
  return result;
}

std::string render_report(const Query& query, const QueryResult& result, ReportFormat format) {
  const Function& seed = query.seed_function;
  if (format == ReportFormat::json) {
    json criteria = json::array();
    for (std::size_t i = 0; i < query.signature.pairs.size(); ++i) {
      const auto& p = query.signature.pairs[i];
      criteria.push_back({{"statement", p.statement}, {"line", seed.statements[p.statement].line}, {"key", p.key}});
    }
    std::vector<int> qlines;
    for (int s : query.query_slice.statements) qlines.push_back(seed.statements[s].line);
    json candidates = json::array();
    for (const auto& c : result.ranked) {
      json pins = json::array();
      for (const auto& p : c.pinpoints) {
        pins.push_back({{"seed_pair", p.seed_pair},
                        {"statement", p.statement},
                        {"occurrence", p.ref.occurrence},
                        {"line", p.line},
                        {"key", p.key},
                        {"score", p.score}});
      }
      candidates.push_back({{"rank", c.rank},
                            {"score", c.score},
                            {"function_id", c.function_id},
                            {"name", c.name},
                            {"file", c.file},
                            {"start_line", c.start_line},
                            {"pinpoints", pins},
                            {"slice", {{"statements", c.slice.statements}, {"text", c.slice.rendered_text}}}});
    }
    json doc = {{"query",
                 {{"function_id", seed.id},
                  {"key_variables", query.key_variables},
                  {"criteria", criteria},
                  {"slice", {{"statements", query.query_slice.statements}, {"lines", qlines},
                             {"text", query.query_slice.rendered_text}}}}},
                {"screened", result.screened},
                {"scored", result.scored},
                {"candidates", candidates}};
    return doc.dump(2) + '\n';
  }

  std::ostringstream os;
  os << "query " << seed.id << '\n';
  for (const auto& p : query.signature.pairs) {
    os << "  criterion line " << seed.statements[p.statement].line << " kvar " << p.key << '\n';
  }
  os << "screened " << result.screened << ", ranked " << result.scored << ", showing " << result.ranked.size() << '\n';
  for (const auto& c : result.ranked) {
    char score[32];
    std::snprintf(score, sizeof score, "%.4f", c.score);
    os << '\n' << '#' << c.rank << "  " << score << "  " << c.name << "  " << c.file << ':' << c.start_line << '\n';
    os << "  rstmt";
    for (const auto& p : c.pinpoints) os << ' ' << p.line << '(' << p.key << ')';
    os << '\n';
    std::istringstream lines(c.slice.rendered_text);
    std::string line;
    while (std::getline(lines, line)) os << "    " << line << '\n';
  }
  return os.str();
}

} // namespace bugslice
