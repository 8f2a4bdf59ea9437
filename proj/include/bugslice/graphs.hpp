#pragma once

#include "bugslice/code_model.hpp"
#include "bugslice/diagnostics.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bugslice {

/// Control-flow graph over statement indices. Statement `i` is node `i`;
/// two virtual nodes follow: entry() == size and exit() == size + 1.
class Cfg {
public:
  Cfg() = default;
  explicit Cfg(int statement_count);

  int statement_count() const { return statement_count_; }
  int node_count() const { return statement_count_ + 2; }
  int entry() const { return statement_count_; }
  int exit() const { return statement_count_ + 1; }

  void add_edge(int from, int to);
  /// Must be called once all edges are in; builds the reachability closure.
  void finalize();

  const std::vector<int>& successors(int node) const { return succ_.at(node); }
  std::vector<std::pair<int, int>> edges() const;

  /// Reflexive: has_fwd_path(x, x) is true. Throws UnknownNode.
  bool has_fwd_path(int from, int to) const;

private:
  int statement_count_ = 0;
  std::vector<std::vector<int>> succ_;
  std::vector<std::vector<std::uint64_t>> reach_;
};

struct DefUseEdge {
  int def_statement = -1;
  int use_statement = -1;
  std::string key;

  friend bool operator==(const DefUseEdge&, const DefUseEdge&) = default;
};

/// Data-dependence graph from reaching definitions over textual variable keys.
class Ddg {
public:
  /// Sentinel for the virtual definition at function entry (parameters, globals).
  static constexpr int entry_definition = -1;

  const std::vector<DefUseEdge>& edges() const { return edges_; }

  /// Definitions of `key` reaching the start of `statement` (sorted; may hold entry_definition).
  std::vector<int> reaching(int statement, const std::string& key) const;

  /// Statements with a non-declaration occurrence of `key`, in statement order.
  const std::vector<int>& uses_of(const std::string& key) const;

private:
  friend struct GraphBuilder;

  std::vector<DefUseEdge> edges_;
  std::vector<std::map<std::string, std::vector<int>>> reaching_in_;
  std::map<std::string, std::vector<int>> uses_;
};

struct FunctionGraphs {
  Cfg cfg;
  Ddg ddg;
  Diagnostics diagnostics;
};

FunctionGraphs build_graphs(const Function& func);

inline bool has_fwd_path(const Cfg& cfg, int from, int to) { return cfg.has_fwd_path(from, to); }

struct Definition {
  std::string key;
  std::vector<int> statements; // real definition statements, sorted
  bool from_entry = false;     // the virtual entry definition also reaches
};

/// Reaching definitions of `occ`'s key at its statement; an occurrence that is
/// itself a definition resolves to its own statement.
Definition get_definition(const Ddg& ddg, const VariableOccurrence& occ);

/// Same query phrased as (key, statement, key-defined-there).
Definition get_definition(const Ddg& ddg, const std::string& key, int statement, bool defined_at_statement);

std::vector<int> get_all_uses(const Ddg& ddg, const std::string& key);

/// Graphviz rendering of the CFG (solid) and DDG (dashed, labelled) edges.
std::string to_dot(const Function& func, const FunctionGraphs& graphs);

} // namespace bugslice
