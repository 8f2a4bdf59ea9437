#pragma once

#include "bugslice/diagnostics.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bugslice {

enum class TokenKind { identifier, keyword, number, string_literal, char_literal, punct };

struct Token {
  std::string text;
  TokenKind kind = TokenKind::punct;
  int line = 0;
  std::size_t offset = 0; // byte offset of the first character in the lexed text
  // Whitespace (or a comment) preceded this token in the source.
  bool space_before = false;
};

/// Lexes C source into tokens. Comments and preprocessor lines are dropped.
/// Lines are numbered from `first_line`.
std::vector<Token> lex(std::string_view source, int first_line = 1);

bool is_c_keyword(std::string_view word);

/// Type keywords, `*_t` typedefs and the fixed-width kernel integer types.
bool is_type_like(std::string_view word);

enum class StatementKind { declaration, assignment, call, condition, return_stmt, jump, other };

const char* to_string(StatementKind kind);

enum class OccurrenceRole { definition, use, unknown };

const char* to_string(OccurrenceRole role);

struct TokenSpan {
  int first = 0;
  int last = 0; // inclusive

  int size() const { return last - first + 1; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct VariableOccurrence {
  // Canonical variable text; member-access chains are kept whole (`a->b->c`).
  std::string key;
  int statement = -1; // index into Function::statements
  TokenSpan span;
  bool is_declaration = false;
  OccurrenceRole role = OccurrenceRole::unknown;
  // Read-modify-write (`x += y`, `x++`): a definition that also reads the value.
  bool compound = false;

  friend bool operator==(const VariableOccurrence&, const VariableOccurrence&) = default;
};

struct StatementId {
  std::string function_id;
  int line = 0;
  int ordinal = 0;

  friend bool operator==(const StatementId&, const StatementId&) = default;
};

struct Statement {
  int index = -1;
  std::string function_id;
  int line = 0;
  int ordinal = 0; // position among statements starting on the same line
  StatementKind kind = StatementKind::other;
  bool is_label = false; // goto label, `case X:` or `default:`
  std::vector<Token> tokens;
  std::vector<VariableOccurrence> occurrences;

  StatementId id() const { return {function_id, line, ordinal}; }

  /// Source spelling with whitespace runs collapsed to one space.
  std::string text() const;

  bool has_key(std::string_view key) const;
  bool defines(std::string_view key) const;
};

/// Structured view of the body used to build the control-flow graph.
struct SyntaxNode {
  enum class Type { block, simple, if_else, while_loop, do_while, for_loop, switch_block };

  Type type = Type::block;
  int statement = -1; // simple statement, or the condition/header of compound forms
  std::vector<SyntaxNode> children;

  // if_else: children = {then, else?}; loops/switch: children = {body}
};

struct Function {
  std::string id; // "<file>:<name>:<start line>"
  std::string name;
  std::string file;
  int start_line = 0;
  int end_line = 0;
  std::vector<std::string> parameters;
  std::vector<Statement> statements;
  SyntaxNode body;
  std::string source_text;

  /// Every token of the definition, header included, in source order.
  std::vector<Token> tokens() const;
};

struct ParseOptions {
  // Fuse `a.b` chains like `a->b` chains.
  bool fuse_dot_access = true;
};

struct ExtractResult {
  std::vector<Function> functions;
  Diagnostics diagnostics;
};

ExtractResult extract_functions(std::string_view source, const std::string& file_origin,
                                const ParseOptions& options = {}, int first_line = 1);

/// All occurrences in (line, span.first) order.
std::vector<VariableOccurrence> collect_variable_occurrences(const Function& func);

/// Non-declaration occurrences of `key` in `func`.
std::size_t occurrence_count(const Function& func, std::string_view key);

const Function* find_function(const std::vector<Function>& functions, std::string_view name);

} // namespace bugslice
