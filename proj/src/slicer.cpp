#include "bugslice/slicer.hpp"

#include "bugslice/error.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

namespace bugslice {

const char* to_string(SlicingStrategy strategy) {
  switch (strategy) {
  case SlicingStrategy::customized: return "default";
  case SlicingStrategy::strict_one_step: return "strict-one-step";
  case SlicingStrategy::unconstrained: return "unconstrained";
  }
  return "?";
}

std::optional<SlicingStrategy> parse_slicing_strategy(std::string_view text) {
  if (text == "default" || text == "customized") return SlicingStrategy::customized;
  if (text == "strict-one-step") return SlicingStrategy::strict_one_step;
  if (text == "unconstrained") return SlicingStrategy::unconstrained;
  return std::nullopt;
}

const char* to_string(CoverageMetric metric) {
  return metric == CoverageMetric::statements ? "statements" : "variables";
}

namespace {

// Index of the top-level `=` of a statement, or -1.
int top_level_assign(const std::vector<Token>& toks) {
  int depth = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i].text;
    if (t == "(" || t == "[" || t == "{") ++depth;
    else if (t == ")" || t == "]" || t == "}") --depth;
    else if (depth == 0 && t == "=") return static_cast<int>(i);
  }
  return -1;
}

bool has_top_level_comma(const std::vector<Token>& toks, int from, int to) {
  int depth = 0;
  for (int i = from; i < to; ++i) {
    const auto& t = toks[i].text;
    if (t == "(" || t == "[" || t == "{") ++depth;
    else if (t == ")" || t == "]" || t == "}") --depth;
    else if (depth == 0 && t == ",") return true;
  }
  return false;
}

int matching_paren(const std::vector<Token>& toks, int open, int end) {
  int depth = 0;
  for (int i = open; i < end; ++i) {
    if (toks[i].text == "(") ++depth;
    else if (toks[i].text == ")" && --depth == 0) return i;
  }
  return -1;
}

bool is_cast_body(const std::vector<Token>& toks, int from, int to) {
  if (from >= to) return false;
  if (!is_type_like(toks[from].text)) return false;
  for (int i = from; i < to; ++i) {
    const auto& t = toks[i];
    if (t.kind != TokenKind::identifier && t.kind != TokenKind::keyword && t.text != "*") return false;
  }
  return true;
}

const VariableOccurrence* occurrence_spanning(const Statement& st, int first, int last) {
  for (const auto& o : st.occurrences) {
    if (o.span.first == first && o.span.last == last) return &o;
  }
  return nullptr;
}

using Bits = std::vector<std::uint64_t>;

bool test_bit(const Bits& b, int i) { return (b[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1U; }
void set_bit(Bits& b, int i) { b[static_cast<std::size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63); }

constexpr int kMaxBackEdges = 20;

// Best-path search over the CFG expanded by the set of back edges already taken.
class CoverageSearch {
public:
  CoverageSearch(const Cfg& cfg, int root) : cfg_(cfg), root_(root), words_((cfg.node_count() + 63) / 64) {
    classify_back_edges();
  }

  // tier_of[node] = -1 for nodes that carry no collected statement.
  void set_items(std::vector<int> tier_of, std::vector<std::vector<int>> items_of, int item_count) {
    tier_of_ = std::move(tier_of);
    items_of_ = std::move(items_of);
    item_count_ = item_count;
  }

  // Nodes of the best path for coverage of tiers 0..max_tier; empty if none exists.
  std::vector<int> best_path(int max_tier) {
    max_tier_ = max_tier;
    cover_.assign(static_cast<std::size_t>(max_tier + 1), std::vector<int>(static_cast<std::size_t>(item_count_), 0));
    score_.assign(static_cast<std::size_t>(max_tier + 1), 0);
    on_path_.assign(static_cast<std::size_t>(cfg_.node_count()), 0);
    totals_.assign(static_cast<std::size_t>(max_tier + 1), 0);
    for (int u = 0; u <= max_tier; ++u) {
      std::set<int> all;
      for (int v = 0; v < cfg_.node_count(); ++v) {
        if (tier_of_[v] >= 0 && tier_of_[v] <= u) all.insert(items_of_[v].begin(), items_of_[v].end());
      }
      totals_[u] = static_cast<int>(all.size());
    }
    best_.clear();
    best_nodes_.clear();
    path_.clear();
    const Bits& r = reach(cfg_.entry(), 0);
    if (test_bit(r, cfg_.exit()) && test_bit(r, root_)) dfs(cfg_.entry(), 0, false);
    return best_nodes_;
  }

private:
  void classify_back_edges() {
    const int n = cfg_.node_count();
    std::vector<int> color(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<int, std::size_t>> stack{{cfg_.entry(), 0}};
    color[cfg_.entry()] = 1;
    while (!stack.empty()) {
      auto& [u, k] = stack.back();
      const auto& succ = cfg_.successors(u);
      if (k == succ.size()) {
        color[u] = 2;
        stack.pop_back();
        continue;
      }
      const int w = succ[k++];
      if (color[w] == 1) {
        const int bit = static_cast<int>(back_bit_.size());
        back_bit_[{u, w}] = bit < kMaxBackEdges ? bit : -1;
      } else if (color[w] == 0) {
        color[w] = 1;
        stack.emplace_back(w, 0);
      }
    }
  }

  // -2: forbidden transition; otherwise the mask after taking u -> w.
  std::int64_t step(int u, int w, std::uint32_t mask) const {
    const auto it = back_bit_.find({u, w});
    if (it == back_bit_.end()) return mask;
    if (it->second < 0) return -2;
    const std::uint32_t b = std::uint32_t{1} << it->second;
    if (mask & b) return -2;
    return mask | b;
  }

  const Bits& reach(int node, std::uint32_t mask) {
    const std::uint64_t key = (static_cast<std::uint64_t>(mask) << 32) | static_cast<std::uint32_t>(node);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Bits out(words_, 0);
    set_bit(out, node);
    for (int w : cfg_.successors(node)) {
      const auto next = step(node, w, mask);
      if (next < 0) continue;
      const Bits& sub = reach(w, static_cast<std::uint32_t>(next));
      for (std::size_t i = 0; i < words_; ++i) out[i] |= sub[i];
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

  void enter(int node) {
    path_.push_back(node);
    ++on_path_[node];
    const int t = tier_of_[node];
    if (t < 0) return;
    for (int u = std::max(t, 0); u <= max_tier_; ++u) {
      for (int item : items_of_[node]) {
        if (cover_[u][item]++ == 0) ++score_[u];
      }
    }
  }

  void leave(int node) {
    path_.pop_back();
    --on_path_[node];
    const int t = tier_of_[node];
    if (t < 0) return;
    for (int u = std::max(t, 0); u <= max_tier_; ++u) {
      for (int item : items_of_[node]) {
        if (--cover_[u][item] == 0) --score_[u];
      }
    }
  }

  std::vector<int> bound(const Bits& r) const {
    std::vector<int> ub = score_;
    for (int v = 0; v < cfg_.statement_count(); ++v) {
      const int t = tier_of_[v];
      if (t < 0 || t > max_tier_ || on_path_[v] || !test_bit(r, v)) continue;
      for (int u = t; u <= max_tier_; ++u) ub[u] += static_cast<int>(items_of_[v].size());
    }
    for (int u = 0; u <= max_tier_; ++u) ub[u] = std::min(ub[u], totals_[u]);
    return ub;
  }

  void dfs(int node, std::uint32_t mask, bool root_seen) {
    enter(node);
    root_seen = root_seen || node == root_;
    if (node == cfg_.exit()) {
      if (root_seen && (best_.empty() || score_ > best_)) {
        best_ = score_;
        best_nodes_ = path_;
      }
    } else {
      for (int w : cfg_.successors(node)) {
        const auto next = step(node, w, mask);
        if (next < 0) continue;
        const auto m = static_cast<std::uint32_t>(next);
        const Bits& r = reach(w, m);
        if (!test_bit(r, cfg_.exit())) continue;
        if (!root_seen && !test_bit(r, root_)) continue;
        if (!best_.empty() && !(bound(r) > best_)) continue;
        dfs(w, m, root_seen);
      }
    }
    leave(node);
  }

  const Cfg& cfg_;
  int root_;
  std::size_t words_;
  std::map<std::pair<int, int>, int> back_bit_;
  std::unordered_map<std::uint64_t, Bits> memo_;

  std::vector<int> tier_of_;
  std::vector<std::vector<int>> items_of_;
  int item_count_ = 0;
  int max_tier_ = 0;

  std::vector<std::vector<int>> cover_;
  std::vector<int> score_, totals_, on_path_, path_;
  std::vector<int> best_, best_nodes_;
};

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

} // namespace

bool is_normal_statement(const Statement& stmt) {
  if (stmt.is_label || stmt.tokens.empty()) return false;
  const bool braces_only = std::all_of(stmt.tokens.begin(), stmt.tokens.end(), [](const Token& t) {
    return t.text == "{" || t.text == "}" || t.text == ";";
  });
  if (braces_only) return false;
  if (stmt.kind == StatementKind::declaration) {
    return std::any_of(stmt.occurrences.begin(), stmt.occurrences.end(), [](const VariableOccurrence& o) {
      return o.is_declaration && o.role == OccurrenceRole::definition;
    });
  }
  return true;
}

std::optional<std::string> assignment_lhs(const Statement& stmt) {
  const auto& toks = stmt.tokens;
  const int eq = top_level_assign(toks);
  if (eq < 0) return std::nullopt;
  if (stmt.kind == StatementKind::assignment) {
    if (const auto* o = occurrence_spanning(stmt, 0, eq - 1)) return o->key;
    return std::nullopt;
  }
  if (stmt.kind == StatementKind::declaration) {
    if (has_top_level_comma(toks, 0, static_cast<int>(toks.size()))) return std::nullopt;
    for (const auto& o : stmt.occurrences) {
      if (o.is_declaration && o.role == OccurrenceRole::definition && o.span.last < eq) return o.key;
    }
  }
  return std::nullopt;
}

std::optional<std::string> unary_rhs_operand(const Statement& stmt) {
  if (!assignment_lhs(stmt)) return std::nullopt;
  const auto& toks = stmt.tokens;
  int b = top_level_assign(toks) + 1;
  int e = static_cast<int>(toks.size());
  if (e > b && toks[e - 1].text == ";") --e;
  bool changed = true;
  while (changed && b < e) {
    changed = false;
    if (toks[b].text == "(") {
      const int close = matching_paren(toks, b, e);
      if (close == e - 1) {
        ++b;
        --e;
        changed = true;
      } else if (close > b && is_cast_body(toks, b + 1, close)) {
        b = close + 1;
        changed = true;
      }
    } else if (toks[b].text == "&" || toks[b].text == "*") {
      ++b;
      changed = true;
    }
  }
  if (b >= e) return std::nullopt;
  if (const auto* o = occurrence_spanning(stmt, b, e - 1)) return o->key;
  return std::nullopt;
}

FeatureSlice customized_slice(const Function& func, const FunctionGraphs& graphs, const Criterion& criterion,
                              const SliceOptions& options, SliceTrace* trace) {
  const int n = static_cast<int>(func.statements.size());
  if (criterion.statement < 0 || criterion.statement >= n) {
    throw Error(ErrorCode::unknown_node, "criterion statement out of range");
  }
  const Statement& root = func.statements[criterion.statement];
  if (!root.has_key(criterion.key)) {
    throw Error(ErrorCode::criterion_mismatch,
                "'" + criterion.key + "' does not occur in statement at line " + std::to_string(root.line));
  }

  struct Tracked {
    std::string key;
    int depth;
    int context;
    bool defined_at_context;
  };

  std::deque<Tracked> work;
  work.push_back({criterion.key, 0, criterion.statement, root.defines(criterion.key)});
  std::map<int, int> tier_of;
  tier_of[criterion.statement] = 0;
  std::map<std::string, int> tracked_depth;
  std::set<std::tuple<std::string, int, bool>> seen;
  SliceTraceStep* step = nullptr;

  auto collect = [&](const Tracked& var, int s) {
    const Statement& st = func.statements[s];
    if (!is_normal_statement(st)) return;
    auto [it, inserted] = tier_of.emplace(s, var.depth);
    if (inserted) {
      if (step) step->newly_collected.push_back(s);
    } else {
      it->second = std::min(it->second, var.depth);
    }
    if (options.strategy == SlicingStrategy::strict_one_step) return;
    const auto lhs = assignment_lhs(st);
    if (!lhs) return;
    const auto rhs = unary_rhs_operand(st);
    if (!rhs) return;
    if (*lhs == var.key) work.push_back({*rhs, var.depth + 1, s, false});
    else if (*rhs == var.key) work.push_back({*lhs, var.depth + 1, s, true});
  };

  while (!work.empty()) {
    const Tracked gamma = work.front();
    work.pop_front();
    if (trace) {
      trace->push_back({gamma.key, gamma.depth, gamma.context, false, {}});
      step = &trace->back();
    }
    if (options.strategy != SlicingStrategy::unconstrained && gamma.depth > 1) continue;
    if (options.strategy == SlicingStrategy::unconstrained &&
        !seen.emplace(gamma.key, gamma.context, gamma.defined_at_context).second) {
      continue;
    }
    if (step) step->expanded = true;
    auto [dit, fresh] = tracked_depth.emplace(gamma.key, gamma.depth);
    if (!fresh) dit->second = std::min(dit->second, gamma.depth);

    const Definition def = get_definition(graphs.ddg, gamma.key, gamma.context, gamma.defined_at_context);
    for (int d : def.statements) collect(gamma, d);
    for (int use : get_all_uses(graphs.ddg, gamma.key)) {
      if (has_fwd_path(graphs.cfg, use, criterion.statement) || has_fwd_path(graphs.cfg, criterion.statement, use)) {
        collect(gamma, use);
      }
    }
  }

  std::vector<CollectedStatement> collected;
  for (const auto& [s, tier] : tier_of) {
    CollectedStatement c{s, tier, {}};
    for (const auto& [key, depth] : tracked_depth) {
      if (depth <= tier && func.statements[s].has_key(key)) c.keys.push_back(key);
    }
    collected.push_back(std::move(c));
  }

  FeatureSlice slice;
  slice.function_id = func.id;
  slice.criteria.push_back(criterion);
  slice.statements = filter_by_max_coverage_path(graphs.cfg, criterion.statement, collected, options.coverage);
  slice.rendered_text = render_slice(func, slice.statements);
  return slice;
}

std::vector<int> filter_by_max_coverage_path(const Cfg& cfg, int root, std::span<const CollectedStatement> collected,
                                             CoverageMetric metric) {
  if (collected.empty()) return {};
  const int nodes = cfg.node_count();
  std::vector<int> tier_of(static_cast<std::size_t>(nodes), -1);
  std::vector<std::vector<int>> items_of(static_cast<std::size_t>(nodes));
  std::map<std::string, int> key_ids;
  int max_tier = 0;
  for (std::size_t i = 0; i < collected.size(); ++i) {
    const auto& c = collected[i];
    if (c.statement < 0 || c.statement >= cfg.statement_count()) {
      throw Error(ErrorCode::unknown_node, "collected statement out of range");
    }
    tier_of[c.statement] = tier_of[c.statement] < 0 ? c.tier : std::min(tier_of[c.statement], c.tier);
    max_tier = std::max(max_tier, c.tier);
    if (metric == CoverageMetric::statements) {
      items_of[c.statement] = {c.statement};
    } else {
      for (const auto& k : c.keys) {
        const int id = key_ids.emplace(k, static_cast<int>(key_ids.size())).first->second;
        items_of[c.statement].push_back(id);
      }
    }
  }
  for (auto& items : items_of) items = sorted_unique(std::move(items));
  const int item_count = metric == CoverageMetric::statements ? cfg.statement_count() : static_cast<int>(key_ids.size());

  CoverageSearch search(cfg, root);
  search.set_items(tier_of, items_of, item_count);
  std::vector<int> kept;
  for (int t = 0; t <= max_tier; ++t) {
    const auto path = search.best_path(t);
    std::vector<char> on(static_cast<std::size_t>(nodes), 0);
    for (int v : path) on[v] = 1;
    for (const auto& c : collected) {
      if (tier_of[c.statement] != t) continue;
      if (path.empty() || on[c.statement]) kept.push_back(c.statement);
    }
  }
  return sorted_unique(std::move(kept));
}

std::vector<int> filter_by_max_coverage_path(const Cfg& cfg, int root, const std::vector<int>& collected) {
  std::vector<CollectedStatement> in;
  in.reserve(collected.size());
  for (int s : collected) in.push_back({s, 0, {}});
  return filter_by_max_coverage_path(cfg, root, in, CoverageMetric::statements);
}

FeatureSlice merge_slices(const Function& func, std::span<const FeatureSlice> slices) {
  if (slices.empty()) throw Error(ErrorCode::empty_input, "no slices to merge");
  FeatureSlice out;
  out.function_id = func.id;
  std::vector<int> all;
  for (const auto& s : slices) {
    if (s.function_id != func.id) {
      throw Error(ErrorCode::mixed_functions, "slice of " + s.function_id + " merged into " + func.id);
    }
    out.criteria.insert(out.criteria.end(), s.criteria.begin(), s.criteria.end());
    all.insert(all.end(), s.statements.begin(), s.statements.end());
  }
  out.statements = sorted_unique(std::move(all));
  out.rendered_text = render_slice(func, out.statements);
  return out;
}

std::string render_slice(const Function& func, const std::vector<int>& statements) {
  std::string out;
  for (int s : statements) {
    if (!out.empty()) out += '\n';
    out += func.statements.at(s).text();
  }
  return out;
}

std::vector<std::string> slice_tokens(const Function& func, const std::vector<int>& statements) {
  std::vector<std::string> out;
  for (int s : statements) {
    for (const auto& t : func.statements.at(s).tokens) out.push_back(t.text);
  }
  return out;
}

std::vector<int> classic_slice(const Function& func, const Criterion& criterion) {
  std::set<std::string> keys{criterion.key};
  for (const auto& o : func.statements.at(criterion.statement).occurrences) keys.insert(o.key);
  std::set<int> stmts{criterion.statement};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& st : func.statements) {
      if (st.is_label || stmts.contains(st.index)) continue;
      const bool shares = std::any_of(st.occurrences.begin(), st.occurrences.end(),
                                      [&](const VariableOccurrence& o) { return keys.contains(o.key); });
      if (!shares) continue;
      stmts.insert(st.index);
      for (const auto& o : st.occurrences) keys.insert(o.key);
      grew = true;
    }
  }
  return {stmts.begin(), stmts.end()};
}

} // namespace bugslice
