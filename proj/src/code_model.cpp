#include "bugslice/code_model.hpp"

#include "bugslice/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <unordered_set>

namespace bugslice {

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> set = {
      "auto",     "break",         "case",       "char",          "const",        "continue",
      "default",  "do",            "double",     "else",          "enum",         "extern",
      "float",    "for",           "goto",       "if",            "inline",       "int",
      "long",     "register",      "restrict",   "return",        "short",        "signed",
      "sizeof",   "static",        "struct",     "switch",        "typedef",      "union",
      "unsigned", "void",          "volatile",   "while",         "_Bool",        "_Complex",
      "_Static_assert", "__attribute__", "__inline", "__inline__", "__restrict", "__volatile__",
      "__asm__",  "asm",           "typeof",     "__typeof__",    "bool",         "true",
      "false",    "alignof",       "_Alignof",   "__func__",
  };
  return set;
}

const std::unordered_set<std::string_view>& type_keywords() {
  static const std::unordered_set<std::string_view> set = {
      "void",     "char",    "short",  "int",      "long",   "float",  "double",
      "signed",   "unsigned", "_Bool", "bool",     "const",  "volatile", "static",
      "extern",   "register", "auto",  "struct",   "union",  "enum",   "typedef",
      "inline",   "restrict", "_Complex", "typeof", "__typeof__",
  };
  return set;
}

bool is_known_type_name(std::string_view word) {
  static const std::unordered_set<std::string_view> set = {
      "u8",     "u16",    "u32",    "u64",    "s8",     "s16",    "s32",    "s64",
      "__u8",   "__u16",  "__u32",  "__u64",  "__s8",   "__s16",  "__s32",  "__s64",
      "__le16", "__le32", "__le64", "__be16", "__be32", "__be64",
  };
  if (set.contains(word)) return true;
  return word.size() > 2 && word.ends_with("_t");
}

// Macro constants (`NULL`, `GFP_KERNEL`, `ENOMEM`) are treated as literals.
bool is_constant_like(std::string_view word) {
  bool has_upper = false;
  for (char c : word) {
    if (std::islower(static_cast<unsigned char>(c))) return false;
    if (std::isupper(static_cast<unsigned char>(c))) has_upper = true;
  }
  return has_upper;
}

bool is_assignment_op(std::string_view t) {
  static constexpr std::array<std::string_view, 11> ops = {"=",  "+=", "-=", "*=",  "/=", "%=",
                                                           "&=", "|=", "^=", "<<=", ">>="};
  return std::find(ops.begin(), ops.end(), t) != ops.end();
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

} // namespace

bool is_c_keyword(std::string_view word) { return keywords().contains(word); }

bool is_type_like(std::string_view word) { return type_keywords().contains(word) || is_known_type_name(word); }

const char* to_string(StatementKind kind) {
  switch (kind) {
  case StatementKind::declaration: return "declaration";
  case StatementKind::assignment: return "assignment";
  case StatementKind::call: return "call";
  case StatementKind::condition: return "condition";
  case StatementKind::return_stmt: return "return";
  case StatementKind::jump: return "jump";
  case StatementKind::other: return "other";
  }
  return "other";
}

const char* to_string(OccurrenceRole role) {
  switch (role) {
  case OccurrenceRole::definition: return "definition";
  case OccurrenceRole::use: return "use";
  case OccurrenceRole::unknown: return "unknown";
  }
  return "unknown";
}

std::vector<Token> lex(std::string_view src, int first_line) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  int line = first_line;
  bool at_line_start = true;
  bool space = false;

  auto push = [&](std::size_t begin, std::size_t end, TokenKind kind, int tok_line) {
    out.push_back(Token{std::string(src.substr(begin, end - begin)), kind, tok_line, begin, space});
    space = false;
    at_line_start = false;
  };

  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      at_line_start = true;
      space = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      ++i;
      continue;
    }
    if (c == '#' && at_line_start) {
      // Preprocessor directive, including backslash continuations.
      while (i < n && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
          ++line;
          i += 2;
          continue;
        }
        ++i;
      }
      space = true;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      space = true;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const int start = line;
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') ++line;
        ++i;
      }
      if (i + 1 >= n) {
        throw Error(ErrorCode::parse_error, "line " + std::to_string(start) + ": unterminated comment");
      }
      i += 2;
      space = true;
      continue;
    }
    const std::size_t begin = i;
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(src[i])) ++i;
      const std::string_view word = src.substr(begin, i - begin);
      // Wide/UTF string prefixes.
      if (i < n && (src[i] == '"' || src[i] == '\'') && (word == "L" || word == "u" || word == "U" || word == "u8")) {
        // fall through to the literal scanner with the prefix attached
      } else {
        push(begin, i, is_c_keyword(word) ? TokenKind::keyword : TokenKind::identifier, line);
        continue;
      }
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      ++i;
      while (i < n) {
        const char d = src[i];
        if (is_ident_char(d) || d == '.') {
          ++i;
        } else if ((d == '+' || d == '-') && (src[i - 1] == 'e' || src[i - 1] == 'E' || src[i - 1] == 'p' ||
                                              src[i - 1] == 'P')) {
          ++i;
        } else {
          break;
        }
      }
      push(begin, i, TokenKind::number, line);
      continue;
    }
    if (src[i] == '"' || src[i] == '\'') {
      const char quote = src[i];
      ++i;
      while (i < n && src[i] != quote) {
        if (src[i] == '\\' && i + 1 < n) {
          if (src[i + 1] == '\n') ++line;
          i += 2;
          continue;
        }
        if (src[i] == '\n') {
          throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": unterminated literal");
        }
        ++i;
      }
      if (i >= n) {
        throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": unterminated literal");
      }
      ++i;
      push(begin, i, quote == '"' ? TokenKind::string_literal : TokenKind::char_literal, line);
      continue;
    }
    static constexpr std::array<std::string_view, 3> three = {"<<=", ">>=", "..."};
    static constexpr std::array<std::string_view, 20> two = {"->", "++", "--", "<<", ">>", "<=", ">=",
                                                             "==", "!=", "&&", "||", "+=", "-=", "*=",
                                                             "/=", "%=", "&=", "|=", "^=", "##"};
    std::size_t len = 1;
    for (auto op : three) {
      if (src.substr(i, 3) == op) len = 3;
    }
    if (len == 1) {
      for (auto op : two) {
        if (src.substr(i, 2) == op) len = 2;
      }
    }
    i += len;
    push(begin, i, TokenKind::punct, line);
  }
  return out;
}

std::string Statement::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && tokens[i].space_before) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

bool Statement::has_key(std::string_view key) const {
  return std::any_of(occurrences.begin(), occurrences.end(), [&](const auto& o) { return o.key == key; });
}

bool Statement::defines(std::string_view key) const {
  return std::any_of(occurrences.begin(), occurrences.end(),
                     [&](const auto& o) { return o.key == key && o.role == OccurrenceRole::definition; });
}

std::vector<Token> Function::tokens() const { return lex(source_text, start_line); }

namespace {

// Finds the token closing the bracket opened at `open`; returns `limit` if unbalanced.
std::size_t match_bracket(const std::vector<Token>& toks, std::size_t open, std::size_t limit) {
  int depth = 0;
  for (std::size_t i = open; i < limit; ++i) {
    const auto& t = toks[i].text;
    if (t == "(" || t == "[" || t == "{") ++depth;
    else if (t == ")" || t == "]" || t == "}") {
      if (--depth == 0) return i;
    }
  }
  return limit;
}

class OccurrenceScanner {
public:
  OccurrenceScanner(const Statement& stmt, const ParseOptions& options, std::vector<VariableOccurrence>& out)
      : stmt_(stmt), toks_(stmt.tokens), options_(options), out_(out) {}

  void scan_expression(int b, int e) {
    int i = b;
    while (i < e) {
      const Token& t = toks_[i];
      if (t.kind != TokenKind::identifier) {
        ++i;
        continue;
      }
      const std::string_view prev = i > 0 ? std::string_view(toks_[i - 1].text) : std::string_view();
      if (prev == "->" || prev == "." || prev == "struct" || prev == "union" || prev == "enum" || prev == "goto" ||
          is_constant_like(t.text) || is_known_type_name(t.text)) {
        ++i;
        continue;
      }
      int j = i;
      std::string key = t.text;
      while (j + 2 < e) {
        const auto& op = toks_[j + 1].text;
        const bool member = op == "->" || (options_.fuse_dot_access && op == ".");
        if (!member || toks_[j + 2].kind != TokenKind::identifier) break;
        key += op;
        key += toks_[j + 2].text;
        j += 2;
      }
      const std::string_view next = j + 1 < static_cast<int>(toks_.size()) ? std::string_view(toks_[j + 1].text)
                                                                             : std::string_view();
      if (next == "(") {
        i = j + 1;
        continue;
      }
      VariableOccurrence occ;
      occ.key = std::move(key);
      occ.statement = stmt_.index;
      occ.span = {i, j};
      occ.role = OccurrenceRole::use;
      if (next == "=") {
        occ.role = OccurrenceRole::definition;
      } else if (is_assignment_op(next) || next == "++" || next == "--" || prev == "++" || prev == "--") {
        occ.role = OccurrenceRole::definition;
        occ.compound = true;
      }
      out_.push_back(std::move(occ));
      i = j + 1;
    }
  }

  void scan_declaration(int e) {
    // Split declarators at top-level commas.
    int depth = 0;
    int chunk = 0;
    for (int i = 0; i <= e; ++i) {
      if (i == e) {
        scan_declarator(chunk, e);
        break;
      }
      const auto& t = toks_[i].text;
      if (t == "(" || t == "[" || t == "{") ++depth;
      else if (t == ")" || t == "]" || t == "}") --depth;
      else if (t == "," && depth == 0) {
        scan_declarator(chunk, i);
        chunk = i + 1;
      }
    }
  }

private:
  void scan_declarator(int b, int e) {
    int eq = e;
    int depth = 0;
    for (int i = b; i < e; ++i) {
      const auto& t = toks_[i].text;
      if (t == "(" || t == "[" || t == "{") ++depth;
      else if (t == ")" || t == "]" || t == "}") --depth;
      else if (t == "=" && depth == 0) {
        eq = i;
        break;
      }
    }
    int name = -1;
    // Function-pointer declarator: the name follows `(*`.
    for (int i = b; i + 1 < eq && name < 0; ++i) {
      if (toks_[i].text == "(" && toks_[i + 1].text == "*") {
        int k = i + 1;
        while (k < eq && toks_[k].text == "*") ++k;
        if (k < eq && toks_[k].kind == TokenKind::identifier) name = k;
      }
    }
    if (name < 0) {
      int bracket = 0;
      for (int i = b; i < eq; ++i) {
        const auto& t = toks_[i].text;
        if (t == "[") ++bracket;
        else if (t == "]") --bracket;
        else if (bracket == 0 && toks_[i].kind == TokenKind::identifier) name = i;
      }
    }
    if (name >= 0) {
      VariableOccurrence occ;
      occ.key = toks_[name].text;
      occ.statement = stmt_.index;
      occ.span = {name, name};
      occ.is_declaration = true;
      occ.role = eq < e ? OccurrenceRole::definition : OccurrenceRole::unknown;
      out_.push_back(std::move(occ));
    }
    // Array dimensions are ordinary expressions.
    for (int i = b; i < eq; ++i) {
      if (toks_[i].text == "[") {
        const int close = static_cast<int>(match_bracket(toks_, i, eq));
        scan_expression(i + 1, close);
        i = close;
      }
    }
    if (eq < e) scan_expression(eq + 1, e);
  }

  const Statement& stmt_;
  const std::vector<Token>& toks_;
  const ParseOptions& options_;
  std::vector<VariableOccurrence>& out_;
};

bool looks_like_declaration(const std::vector<Token>& t) {
  if (t.empty()) return false;
  if (type_keywords().contains(t[0].text)) return true;
  if (t[0].kind != TokenKind::identifier) return false;
  if (is_known_type_name(t[0].text) && t.size() > 1 && (t[1].kind == TokenKind::identifier || t[1].text == "*")) {
    return true;
  }
  if (t.size() > 1 && t[1].kind == TokenKind::identifier) return true;
  std::size_t k = 1;
  while (k < t.size() && t[k].text == "*") ++k;
  if (k > 1 && k + 1 < t.size() && t[k].kind == TokenKind::identifier) {
    const auto& after = t[k + 1].text;
    return after == ";" || after == "=" || after == "," || after == "[";
  }
  return false;
}

StatementKind classify_simple(const std::vector<Token>& t) {
  const auto& first = t.front().text;
  if (first == "return") return StatementKind::return_stmt;
  if (first == "goto" || first == "break" || first == "continue") return StatementKind::jump;
  if (looks_like_declaration(t)) return StatementKind::declaration;
  int depth = 0;
  bool call = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& s = t[i].text;
    if (s == "(" || s == "[" || s == "{") {
      if (s == "(" && depth == 0 && i > 0 && t[i - 1].kind == TokenKind::identifier) call = true;
      ++depth;
    } else if (s == ")" || s == "]" || s == "}") {
      --depth;
    } else if (depth == 0 && (is_assignment_op(s) || s == "++" || s == "--")) {
      return StatementKind::assignment;
    }
  }
  if (call) {
    // Upper-case callees are macro invocations.
    return is_constant_like(t.front().text) ? StatementKind::other : StatementKind::call;
  }
  return StatementKind::other;
}

class BodyParser {
public:
  BodyParser(const std::vector<Token>& toks, std::size_t end, Function& fn, const ParseOptions& options)
      : toks_(toks), end_(end), fn_(fn), options_(options) {}

  SyntaxNode parse_block(std::size_t begin) {
    SyntaxNode block;
    std::size_t i = begin;
    while (i < end_) {
      SyntaxNode child = parse_statement(i);
      if (!is_empty(child)) block.children.push_back(std::move(child));
    }
    return block;
  }

private:
  static bool is_empty(const SyntaxNode& n) {
    return n.type == SyntaxNode::Type::block && n.children.empty();
  }

  [[noreturn]] void fail(std::size_t at, const std::string& reason) const {
    const int line = at < toks_.size() ? toks_[at].line : fn_.end_line;
    throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + reason);
  }

  const std::string& text(std::size_t i) const {
    static const std::string empty;
    return i < end_ ? toks_[i].text : empty;
  }

  std::size_t expect_group(std::size_t open) const {
    if (text(open) != "(") fail(open, "expected '('");
    const std::size_t close = match_bracket(toks_, open, end_);
    if (close >= end_) fail(open, "unbalanced parentheses");
    return close;
  }

  // Adds tokens [first, last] as a statement.
  int add_statement(std::size_t first, std::size_t last, std::optional<StatementKind> forced, bool label = false) {
    Statement st;
    st.index = static_cast<int>(fn_.statements.size());
    st.function_id = fn_.id;
    st.line = toks_[first].line;
    st.ordinal = per_line_[st.line]++;
    st.tokens.assign(toks_.begin() + static_cast<std::ptrdiff_t>(first),
                     toks_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    st.is_label = label;
    st.kind = forced ? *forced : classify_simple(st.tokens);
    if (!label) {
      OccurrenceScanner scanner(st, options_, st.occurrences);
      const int n = static_cast<int>(st.tokens.size());
      const int body_end = st.tokens.back().text == ";" ? n - 1 : n;
      if (st.kind == StatementKind::declaration) {
        scanner.scan_declaration(body_end);
      } else {
        scanner.scan_expression(0, body_end);
      }
      std::sort(st.occurrences.begin(), st.occurrences.end(),
                [](const auto& a, const auto& b) { return a.span.first < b.span.first; });
    }
    fn_.statements.push_back(std::move(st));
    return static_cast<int>(fn_.statements.size()) - 1;
  }

  SyntaxNode simple(int stmt) {
    SyntaxNode n;
    n.type = SyntaxNode::Type::simple;
    n.statement = stmt;
    return n;
  }

  SyntaxNode parse_statement(std::size_t& i) {
    const std::string& t = text(i);
    if (t == "{") {
      const std::size_t close = match_bracket(toks_, i, end_);
      if (close >= end_) fail(i, "unbalanced braces");
      SyntaxNode block;
      std::size_t j = i + 1;
      BodyParser inner(toks_, close, fn_, options_);
      inner.per_line_ = std::move(per_line_);
      block = inner.parse_block(j);
      per_line_ = std::move(inner.per_line_);
      i = close + 1;
      return block;
    }
    if (t == ";") {
      ++i;
      return {};
    }
    if (t == "if" || t == "while" || t == "switch" || t == "for") {
      const std::size_t close = expect_group(i + 1);
      SyntaxNode node;
      node.type = t == "if"       ? SyntaxNode::Type::if_else
                  : t == "while"  ? SyntaxNode::Type::while_loop
                  : t == "switch" ? SyntaxNode::Type::switch_block
                                  : SyntaxNode::Type::for_loop;
      node.statement = add_statement(i, close, StatementKind::condition);
      i = close + 1;
      if (i >= end_) fail(i, "missing statement body");
      node.children.push_back(parse_statement(i));
      if (node.type == SyntaxNode::Type::if_else && text(i) == "else") {
        ++i;
        if (i >= end_) fail(i, "missing else body");
        node.children.push_back(parse_statement(i));
      }
      return node;
    }
    if (t == "do") {
      ++i;
      SyntaxNode node;
      node.type = SyntaxNode::Type::do_while;
      SyntaxNode body = parse_statement(i);
      if (text(i) != "while") fail(i, "expected 'while' after do body");
      const std::size_t close = expect_group(i + 1);
      if (text(close + 1) != ";") fail(close + 1, "expected ';' after do-while");
      node.statement = add_statement(i, close + 1, StatementKind::condition);
      node.children.push_back(std::move(body));
      i = close + 2;
      return node;
    }
    if (t == "else") fail(i, "'else' without 'if'");
    if (t == "case" || (t == "default" && text(i + 1) == ":")) {
      std::size_t j = i + 1;
      int depth = 0;
      while (j < end_) {
        const auto& s = toks_[j].text;
        if (s == "(" || s == "[") ++depth;
        else if (s == ")" || s == "]") --depth;
        else if (s == ":" && depth == 0) break;
        ++j;
      }
      if (j >= end_) fail(i, "case label without ':'");
      const int st = add_statement(i, j, StatementKind::other, true);
      i = j + 1;
      return simple(st);
    }
    if (i < end_ && toks_[i].kind == TokenKind::identifier && text(i + 1) == ":") {
      const int st = add_statement(i, i + 1, StatementKind::other, true);
      i += 2;
      return simple(st);
    }
    // Iteration macro: `list_for_each_entry(pos, head, member) { ... }`.
    if (i < end_ && toks_[i].kind == TokenKind::identifier && text(i + 1) == "(") {
      const std::size_t close = match_bracket(toks_, i + 1, end_);
      if (close < end_ && text(close + 1) == "{") {
        SyntaxNode node;
        node.type = SyntaxNode::Type::for_loop;
        node.statement = add_statement(i, close, StatementKind::condition);
        auto& occs = fn_.statements[node.statement].occurrences;
        for (auto& o : occs) {
          if (o.span.first == 2) {
            o.role = OccurrenceRole::definition;
            break;
          }
        }
        i = close + 1;
        node.children.push_back(parse_statement(i));
        return node;
      }
    }
    // Plain statement up to the next top-level ';'.
    std::size_t j = i;
    while (j < end_ && toks_[j].text != ";") {
      const auto& s = toks_[j].text;
      if (s == "(" || s == "[" || s == "{") {
        const std::size_t close = match_bracket(toks_, j, end_);
        if (close >= end_) fail(j, "unbalanced brackets");
        j = close + 1;
        continue;
      }
      if (s == "}" || s == ")" || s == "]") fail(j, "unexpected '" + s + "'");
      ++j;
    }
    if (j >= end_) fail(i, "missing ';'");
    const int st = add_statement(i, j, std::nullopt);
    i = j + 1;
    return simple(st);
  }

  const std::vector<Token>& toks_;
  std::size_t end_;
  Function& fn_;
  const ParseOptions& options_;
  std::map<int, int> per_line_;
};

struct HeaderInfo {
  std::size_t name = 0;
  std::size_t params_open = 0;
  std::size_t params_close = 0;
};

std::optional<HeaderInfo> function_header(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
  if (end - begin < 3 || toks[end - 1].text != ")") return std::nullopt;
  int depth = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& t = toks[i].text;
    if (t == "(" || t == "[") ++depth;
    else if (t == ")" || t == "]") --depth;
    else if (depth == 0 && t == "=") return std::nullopt;
  }
  std::size_t close = end - 1;
  while (true) {
    // Walk back to the '(' matching `close`.
    int d = 0;
    std::size_t open = close;
    bool found = false;
    for (std::size_t k = close + 1; k-- > begin;) {
      const auto& t = toks[k].text;
      if (t == ")") ++d;
      else if (t == "(" && --d == 0) {
        open = k;
        found = true;
        break;
      }
    }
    if (!found || open == begin) return std::nullopt;
    const Token& name = toks[open - 1];
    if (name.kind != TokenKind::identifier) return std::nullopt;
    // Trailing annotations such as `__releases(lock)` follow the parameter list.
    if (name.text.starts_with("__") && open - 1 > begin && toks[open - 2].text == ")") {
      close = open - 2;
      continue;
    }
    return HeaderInfo{open - 1, open, close};
  }
}

std::vector<std::string> parameter_names(const std::vector<Token>& toks, std::size_t open, std::size_t close) {
  std::vector<std::string> names;
  std::size_t chunk = open + 1;
  int depth = 0;
  for (std::size_t i = open + 1; i <= close; ++i) {
    const auto& t = toks[i].text;
    const bool at_end = i == close;
    if (!at_end && (t == "(" || t == "[")) ++depth;
    else if (!at_end && (t == ")" || t == "]")) --depth;
    if (at_end || (t == "," && depth == 0)) {
      int name = -1;
      for (std::size_t k = chunk; k + 1 < i; ++k) {
        if (toks[k].text == "(" && toks[k + 1].text == "*" && k + 2 < i &&
            toks[k + 2].kind == TokenKind::identifier) {
          name = static_cast<int>(k + 2);
          break;
        }
      }
      if (name < 0) {
        int bracket = 0;
        for (std::size_t k = chunk; k < i; ++k) {
          if (toks[k].text == "[") ++bracket;
          else if (toks[k].text == "]") --bracket;
          else if (bracket == 0 && toks[k].kind == TokenKind::identifier) name = static_cast<int>(k);
        }
      }
      // A lone type (`void`, `struct foo *`) has no name.
      if (name >= 0 && !(static_cast<std::size_t>(name) == chunk && i - chunk == 1 &&
                         is_known_type_name(toks[name].text))) {
        const bool only_type = static_cast<std::size_t>(name) > chunk &&
                               (toks[name - 1].text == "struct" || toks[name - 1].text == "union" ||
                                toks[name - 1].text == "enum");
        if (!only_type) names.push_back(toks[name].text);
      }
      chunk = i + 1;
    }
  }
  return names;
}

} // namespace

ExtractResult extract_functions(std::string_view source, const std::string& file_origin,
                                const ParseOptions& options, int first_line) {
  ExtractResult result;
  std::vector<Token> toks;
  try {
    toks = lex(source, first_line);
  } catch (const Error& e) {
    result.diagnostics.push_back({file_origin, first_line, Severity::error, e.what()});
    return result;
  }
  const std::size_t n = toks.size();
  std::size_t header = 0;
  std::size_t i = 0;
  while (i < n) {
    const auto& t = toks[i].text;
    if (t == ";") {
      header = ++i;
      continue;
    }
    if (t == "(" || t == "[") {
      const std::size_t close = match_bracket(toks, i, n);
      if (close >= n) {
        result.diagnostics.push_back({file_origin, toks[i].line, Severity::error, "unbalanced brackets at top level"});
        break;
      }
      i = close + 1;
      continue;
    }
    if (t == "}") {
      result.diagnostics.push_back({file_origin, toks[i].line, Severity::warning, "stray '}' at top level"});
      header = ++i;
      continue;
    }
    if (t != "{") {
      ++i;
      continue;
    }
    const std::size_t close = match_bracket(toks, i, n);
    if (close >= n) {
      result.diagnostics.push_back({file_origin, toks[i].line, Severity::error, "unbalanced braces; rest of file skipped"});
      break;
    }
    const auto info = function_header(toks, header, i);
    if (!info) {
      i = close + 1;
      continue;
    }
    Function fn;
    fn.name = toks[info->name].text;
    fn.file = file_origin;
    fn.start_line = toks[header].line;
    fn.end_line = toks[close].line;
    fn.id = file_origin + ":" + fn.name + ":" + std::to_string(fn.start_line);
    fn.parameters = parameter_names(toks, info->params_open, info->params_close);
    fn.source_text = std::string(source.substr(toks[header].offset, toks[close].offset + 1 - toks[header].offset));
    try {
      BodyParser parser(toks, close, fn, options);
      fn.body = parser.parse_block(i + 1);
      result.functions.push_back(std::move(fn));
    } catch (const Error& e) {
      result.diagnostics.push_back({file_origin, fn.start_line, Severity::error,
                                    "skipped function " + fn.name + ": " + e.what()});
    }
    header = close + 1;
    i = close + 1;
  }
  return result;
}

std::vector<VariableOccurrence> collect_variable_occurrences(const Function& func) {
  std::vector<VariableOccurrence> out;
  for (const auto& st : func.statements) {
    out.insert(out.end(), st.occurrences.begin(), st.occurrences.end());
  }
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    const auto& sa = func.statements[a.statement];
    const auto& sb = func.statements[b.statement];
    if (sa.line != sb.line) return sa.line < sb.line;
    if (sa.ordinal != sb.ordinal) return sa.ordinal < sb.ordinal;
    return a.span.first < b.span.first;
  });
  return out;
}

std::size_t occurrence_count(const Function& func, std::string_view key) {
  std::size_t count = 0;
  for (const auto& st : func.statements) {
    for (const auto& o : st.occurrences) {
      if (!o.is_declaration && o.key == key) ++count;
    }
  }
  return count;
}

const Function* find_function(const std::vector<Function>& functions, std::string_view name) {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

} // namespace bugslice
