#include "bugslice/graphs.hpp"

#include "bugslice/error.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace bugslice {

Cfg::Cfg(int statement_count) : statement_count_(statement_count), succ_(statement_count + 2) {}

void Cfg::add_edge(int from, int to) {
  auto& s = succ_.at(from);
  if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
}

void Cfg::finalize() {
  const int n = node_count();
  const std::size_t words = (static_cast<std::size_t>(n) + 63) / 64;
  for (auto& s : succ_) std::sort(s.begin(), s.end());
  reach_.assign(n, std::vector<std::uint64_t>(words, 0));
  for (int src = 0; src < n; ++src) {
    auto& bits = reach_[src];
    std::deque<int> work{src};
    bits[src / 64] |= std::uint64_t{1} << (src % 64);
    while (!work.empty()) {
      const int v = work.front();
      work.pop_front();
      for (int w : succ_[v]) {
        auto& word = bits[w / 64];
        const auto mask = std::uint64_t{1} << (w % 64);
        if (!(word & mask)) {
          word |= mask;
          work.push_back(w);
        }
      }
    }
  }
}

std::vector<std::pair<int, int>> Cfg::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < node_count(); ++v) {
    for (int w : succ_[v]) out.emplace_back(v, w);
  }
  return out;
}

bool Cfg::has_fwd_path(int from, int to) const {
  if (from < 0 || to < 0 || from >= node_count() || to >= node_count()) {
    throw Error(ErrorCode::unknown_node, "node " + std::to_string(from < 0 || from >= node_count() ? from : to));
  }
  return (reach_[from][to / 64] >> (to % 64)) & 1U;
}

std::vector<int> Ddg::reaching(int statement, const std::string& key) const {
  const auto& in = reaching_in_.at(statement);
  auto it = in.find(key);
  if (it == in.end()) return {entry_definition};
  return it->second;
}

const std::vector<int>& Ddg::uses_of(const std::string& key) const {
  static const std::vector<int> none;
  auto it = uses_.find(key);
  return it == uses_.end() ? none : it->second;
}

struct GraphBuilder {
  const Function& fn;
  Cfg cfg;
  Diagnostics diags;
  std::map<std::string, int> labels;
  std::vector<std::pair<int, std::string>> gotos;
  std::vector<std::vector<int>*> break_stack;
  std::vector<int> continue_stack;
  std::vector<int> switch_stack;
  std::vector<bool> switch_has_default;

  explicit GraphBuilder(const Function& f) : fn(f), cfg(static_cast<int>(f.statements.size())) {}

  static int first_entry(const SyntaxNode& n) {
    if (n.type == SyntaxNode::Type::block) {
      for (const auto& c : n.children) {
        const int e = first_entry(c);
        if (e >= 0) return e;
      }
      return -1;
    }
    if (n.type == SyntaxNode::Type::do_while) {
      const int e = first_entry(n.children.front());
      return e >= 0 ? e : n.statement;
    }
    return n.statement;
  }

  void link(const std::vector<int>& preds, int to) {
    for (int p : preds) cfg.add_edge(p, to);
  }

  std::vector<int> build(const SyntaxNode& n, std::vector<int> preds) {
    using T = SyntaxNode::Type;
    switch (n.type) {
    case T::block:
      for (const auto& c : n.children) preds = build(c, std::move(preds));
      return preds;
    case T::simple: return build_simple(n.statement, preds);
    case T::if_else: {
      link(preds, n.statement);
      auto outs = build(n.children[0], {n.statement});
      if (n.children.size() > 1) {
        auto e = build(n.children[1], {n.statement});
        outs.insert(outs.end(), e.begin(), e.end());
      } else {
        outs.push_back(n.statement);
      }
      return outs;
    }
    case T::while_loop:
    case T::for_loop: {
      link(preds, n.statement);
      std::vector<int> breaks;
      break_stack.push_back(&breaks);
      continue_stack.push_back(n.statement);
      auto body = build(n.children[0], {n.statement});
      link(body, n.statement);
      continue_stack.pop_back();
      break_stack.pop_back();
      breaks.push_back(n.statement);
      return breaks;
    }
    case T::do_while: {
      std::vector<int> breaks;
      break_stack.push_back(&breaks);
      continue_stack.push_back(n.statement);
      auto body = build(n.children[0], preds);
      continue_stack.pop_back();
      break_stack.pop_back();
      link(body, n.statement);
      const int head = first_entry(n.children[0]);
      cfg.add_edge(n.statement, head >= 0 ? head : n.statement);
      breaks.push_back(n.statement);
      return breaks;
    }
    case T::switch_block: {
      link(preds, n.statement);
      std::vector<int> breaks;
      break_stack.push_back(&breaks);
      switch_stack.push_back(n.statement);
      switch_has_default.push_back(false);
      auto outs = build(n.children[0], {});
      const bool has_default = switch_has_default.back();
      switch_has_default.pop_back();
      switch_stack.pop_back();
      break_stack.pop_back();
      outs.insert(outs.end(), breaks.begin(), breaks.end());
      if (!has_default) outs.push_back(n.statement);
      return outs;
    }
    }
    return preds;
  }

  std::vector<int> build_simple(int s, const std::vector<int>& preds) {
    const Statement& st = fn.statements[s];
    link(preds, s);
    const std::string& head = st.tokens.front().text;
    if (st.is_label) {
      if (head == "case" || head == "default") {
        if (!switch_stack.empty()) {
          cfg.add_edge(switch_stack.back(), s);
          if (head == "default") switch_has_default.back() = true;
        } else {
          diags.push_back({fn.file, st.line, Severity::warning, "case label outside switch"});
        }
      } else {
        labels[head] = s;
      }
      return {s};
    }
    if (st.kind == StatementKind::return_stmt) {
      cfg.add_edge(s, cfg.exit());
      return {};
    }
    if (head == "goto" && st.tokens.size() >= 2) {
      gotos.emplace_back(s, st.tokens[1].text);
      return {};
    }
    if (head == "break") {
      if (!break_stack.empty()) {
        break_stack.back()->push_back(s);
        return {};
      }
      diags.push_back({fn.file, st.line, Severity::warning, "break outside loop or switch"});
      return {s};
    }
    if (head == "continue") {
      if (!continue_stack.empty()) {
        cfg.add_edge(s, continue_stack.back());
        return {};
      }
      diags.push_back({fn.file, st.line, Severity::warning, "continue outside loop"});
      return {s};
    }
    return {s};
  }

  void build_cfg() {
    auto outs = build(fn.body, {cfg.entry()});
    link(outs, cfg.exit());
    for (const auto& [s, label] : gotos) {
      auto it = labels.find(label);
      if (it == labels.end()) {
        diags.push_back({fn.file, fn.statements[s].line, Severity::error,
                         "GraphError: goto to unknown label '" + label + "'"});
        cfg.add_edge(s, cfg.exit());
      } else {
        cfg.add_edge(s, it->second);
      }
    }
    cfg.finalize();
  }

  Ddg build_ddg() const {
    Ddg ddg;
    const int n = static_cast<int>(fn.statements.size());
    // Definition sites: (statement, key).
    std::vector<std::pair<int, std::string>> defs;
    std::map<std::string, std::vector<int>> defs_by_key;
    std::vector<std::vector<int>> gen(n);
    for (int s = 0; s < n; ++s) {
      std::vector<std::string> seen;
      for (const auto& o : fn.statements[s].occurrences) {
        if (o.role != OccurrenceRole::definition) continue;
        if (std::find(seen.begin(), seen.end(), o.key) != seen.end()) continue;
        seen.push_back(o.key);
        const int id = static_cast<int>(defs.size());
        defs.emplace_back(s, o.key);
        defs_by_key[o.key].push_back(id);
        gen[s].push_back(id);
      }
      for (const auto& o : fn.statements[s].occurrences) {
        if (o.is_declaration) continue;
        auto& u = ddg.uses_[o.key];
        if (u.empty() || u.back() != s) u.push_back(s);
      }
    }
    const std::size_t d = defs.size();
    using Bits = std::vector<bool>;
    std::vector<Bits> in(cfg.node_count(), Bits(d, false));
    std::vector<Bits> out(cfg.node_count(), Bits(d, false));
    std::vector<std::vector<int>> preds(cfg.node_count());
    for (const auto& [a, b] : cfg.edges()) preds[b].push_back(a);

    auto transfer = [&](int v, const Bits& inb) {
      Bits o = inb;
      if (v < n) {
        for (int g : gen[v]) {
          for (int k : defs_by_key.at(defs[g].second)) o[k] = false;
        }
        for (int g : gen[v]) o[g] = true;
      }
      return o;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (int v = 0; v < cfg.node_count(); ++v) {
        Bits inb(d, false);
        for (int p : preds[v]) {
          for (std::size_t k = 0; k < d; ++k) {
            if (out[p][k]) inb[k] = true;
          }
        }
        Bits ob = transfer(v, inb);
        if (inb != in[v] || ob != out[v]) {
          in[v] = std::move(inb);
          out[v] = std::move(ob);
          changed = true;
        }
      }
    }
    // The virtual entry definition of a key reaches every node on a path from
    // entry that avoids a statement defining the key.
    std::map<std::string, std::vector<bool>> entry_reaches;
    std::vector<std::string> all_keys;
    for (int s = 0; s < n; ++s) {
      for (const auto& o : fn.statements[s].occurrences) {
        if (std::find(all_keys.begin(), all_keys.end(), o.key) == all_keys.end()) all_keys.push_back(o.key);
      }
    }
    for (const auto& key : all_keys) {
      std::vector<bool> reach_in(cfg.node_count(), false);
      std::deque<int> work;
      // entry_out = true; propagate until a statement defining key kills it.
      for (int w : cfg.successors(cfg.entry())) {
        if (!reach_in[w]) {
          reach_in[w] = true;
          work.push_back(w);
        }
      }
      while (!work.empty()) {
        const int v = work.front();
        work.pop_front();
        if (v < n && fn.statements[v].defines(key)) continue;
        for (int w : cfg.successors(v)) {
          if (!reach_in[w]) {
            reach_in[w] = true;
            work.push_back(w);
          }
        }
      }
      entry_reaches.emplace(key, std::move(reach_in));
    }

    ddg.reaching_in_.resize(n);
    for (int s = 0; s < n; ++s) {
      auto& m = ddg.reaching_in_[s];
      for (const auto& key : all_keys) {
        std::vector<int> r;
        if (entry_reaches.at(key)[s]) r.push_back(Ddg::entry_definition);
        auto it = defs_by_key.find(key);
        if (it != defs_by_key.end()) {
          for (int id : it->second) {
            if (in[s][id]) r.push_back(defs[id].first);
          }
        }
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        m.emplace(key, std::move(r));
      }
      // Def-use edges: every reading occurrence in s.
      std::vector<std::string> done;
      for (const auto& o : fn.statements[s].occurrences) {
        const bool reads = !o.is_declaration && (o.role != OccurrenceRole::definition || o.compound);
        if (!reads || std::find(done.begin(), done.end(), o.key) != done.end()) continue;
        done.push_back(o.key);
        for (int def : m.at(o.key)) {
          if (def != Ddg::entry_definition) ddg.edges_.push_back({def, s, o.key});
        }
      }
    }
    return ddg;
  }
};

FunctionGraphs build_graphs(const Function& func) {
  GraphBuilder b(func);
  b.build_cfg();
  FunctionGraphs g;
  g.ddg = b.build_ddg();
  g.cfg = std::move(b.cfg);
  g.diagnostics = std::move(b.diags);
  return g;
}

Definition get_definition(const Ddg& ddg, const std::string& key, int statement, bool defined_at_statement) {
  Definition d;
  d.key = key;
  if (defined_at_statement) {
    d.statements = {statement};
    return d;
  }
  for (int s : ddg.reaching(statement, key)) {
    if (s == Ddg::entry_definition) d.from_entry = true;
    else d.statements.push_back(s);
  }
  return d;
}

Definition get_definition(const Ddg& ddg, const VariableOccurrence& occ) {
  return get_definition(ddg, occ.key, occ.statement, occ.role == OccurrenceRole::definition);
}

std::vector<int> get_all_uses(const Ddg& ddg, const std::string& key) { return ddg.uses_of(key); }

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

} // namespace

std::string to_dot(const Function& func, const FunctionGraphs& graphs) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(func.name) << "\" {\n  node [shape=box, fontname=monospace];\n";
  os << "  n" << graphs.cfg.entry() << " [label=\"ENTRY\"];\n";
  os << "  n" << graphs.cfg.exit() << " [label=\"EXIT\"];\n";
  for (const auto& st : func.statements) {
    os << "  n" << st.index << " [label=\"" << st.line << ": " << dot_escape(st.text()) << "\"];\n";
  }
  for (const auto& [a, b] : graphs.cfg.edges()) os << "  n" << a << " -> n" << b << ";\n";
  for (const auto& e : graphs.ddg.edges()) {
    os << "  n" << e.def_statement << " -> n" << e.use_statement << " [style=dashed, color=blue, label=\""
       << dot_escape(e.key) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

} // namespace bugslice
