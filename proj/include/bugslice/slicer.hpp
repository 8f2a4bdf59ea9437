#pragma once

#include "bugslice/code_model.hpp"
#include "bugslice/graphs.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugslice {

enum class SlicingStrategy {
  customized,      // depth-limited: one extra step through unary assignments
  strict_one_step, // never follows a counterpart variable
  unconstrained,   // follows unary chains without a depth limit
};

const char* to_string(SlicingStrategy strategy);
std::optional<SlicingStrategy> parse_slicing_strategy(std::string_view text);

enum class CoverageMetric { statements, variables };

const char* to_string(CoverageMetric metric);

struct SliceOptions {
  SlicingStrategy strategy = SlicingStrategy::customized;
  CoverageMetric coverage = CoverageMetric::statements;
};

struct Criterion {
  int statement = -1;
  std::string key;

  friend bool operator==(const Criterion&, const Criterion&) = default;
};

struct FeatureSlice {
  std::string function_id;
  std::vector<Criterion> criteria;
  std::vector<int> statements; // strictly increasing statement indices
  std::string rendered_text;   // statement texts joined by '\n'
};

/// One worklist step of customized_slice, for instrumentation.
struct SliceTraceStep {
  std::string key;
  int depth = 0;
  int context = -1;
  bool expanded = false;
  std::vector<int> newly_collected;
};

using SliceTrace = std::vector<SliceTraceStep>;

/// Input to the coverage filter: a collected statement, the depth of the
/// tracked variable that collected it, and the tracked keys it carries.
struct CollectedStatement {
  int statement = -1;
  int tier = 0;
  std::vector<std::string> keys;
};

bool is_normal_statement(const Statement& stmt);

/// Target of a plain `=` assignment (or an initialized single declarator)
/// when it is exactly one variable or member chain.
std::optional<std::string> assignment_lhs(const Statement& stmt);

/// The single right-hand operand of a unary assignment: one variable or
/// chain, optionally under casts, parentheses, `&` or `*`. Calls never qualify.
std::optional<std::string> unary_rhs_operand(const Statement& stmt);

/// Throws CriterionMismatch when the key does not occur in the statement.
FeatureSlice customized_slice(const Function& func, const FunctionGraphs& graphs, const Criterion& criterion,
                              const SliceOptions& options = {}, SliceTrace* trace = nullptr);

/// Statements of `collected` on the best entry-to-exit path through `root`.
/// Every back edge may be taken at most once. Tiers are resolved in order:
/// tier t keeps its statements on the lexicographically smallest path that
/// maximizes coverage of tiers 0..t (lexicographically, lower tiers first).
std::vector<int> filter_by_max_coverage_path(const Cfg& cfg, int root, std::span<const CollectedStatement> collected,
                                             CoverageMetric metric = CoverageMetric::statements);

/// Single-tier form.
std::vector<int> filter_by_max_coverage_path(const Cfg& cfg, int root, const std::vector<int>& collected);

/// Union of slices of one function. Throws MixedFunctions.
FeatureSlice merge_slices(const Function& func, std::span<const FeatureSlice> slices);

std::string render_slice(const Function& func, const std::vector<int>& statements);

/// Concatenated tokens of the slice's statements (what the embedder sees).
std::vector<std::string> slice_tokens(const Function& func, const std::vector<int>& statements);

/// Unrestricted closure: every statement sharing a key with the slice, transitively.
std::vector<int> classic_slice(const Function& func, const Criterion& criterion);

} // namespace bugslice
