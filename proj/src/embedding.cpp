#include "bugslice/embedding.hpp"

#include "bugslice/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

namespace bugslice {

namespace {

std::uint64_t fnv1a(std::string_view a, std::string_view b, std::int64_t salt) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (char c : a) mix(static_cast<unsigned char>(c));
  mix(0x1f);
  for (char c : b) mix(static_cast<unsigned char>(c));
  mix(0x1f);
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((static_cast<std::uint64_t>(salt) >> (8 * i)) & 0xff));
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Adds w * h(feature) where h expands the seed into dim uniform values in [-1, 1].
void add_feature(std::vector<double>& acc, std::uint64_t seed, double w) {
  std::uint64_t state = seed;
  for (double& a : acc) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    a += w * (2.0 * u - 1.0);
  }
}

// Identifier pieces split on '_' and lower/upper transitions; empty for single-piece words.
std::vector<std::string> pieces(std::string_view word) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const char c = word[i];
    if (c == '_') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (!cur.empty() && std::isupper(static_cast<unsigned char>(c)) &&
        std::islower(static_cast<unsigned char>(cur.back()))) {
      out.push_back(std::move(cur));
      cur.clear();
    }
    cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  if (out.size() < 2) out.clear();
  return out;
}

} // namespace

ReferenceEmbedder::ReferenceEmbedder(int dim, int max_tokens) {
  if (dim <= 0 || max_tokens <= 0) throw Error(ErrorCode::invalid_argument, "dim and max_tokens must be positive");
  info_ = {"reference", "3", dim, max_tokens, "[MASK]"};
}

std::vector<EmbeddingVector> ReferenceEmbedder::encode_tokens(std::span<const std::string> tokens,
                                                              std::span<const int> mask_positions) const {
  const int n = static_cast<int>(tokens.size());
  std::vector<std::string> text(tokens.begin(), tokens.end());
  for (int p : mask_positions) {
    if (p >= 0 && p < n) text[p] = info_.mask_token;
  }
  std::vector<std::vector<std::string>> split(text.size());
  for (int i = 0; i < n; ++i) {
    if (text[i] != info_.mask_token) split[i] = pieces(text[i]);
  }

  // Name before the innermost open paren enclosing each token, if any.
  std::vector<int> callee(text.size(), -1);
  std::vector<int> open;
  for (int i = 0; i < n; ++i) {
    if (!open.empty()) callee[i] = open.back();
    if (text[i] == "(") {
      const bool named = i > 0 && (std::isalpha(static_cast<unsigned char>(text[i - 1][0])) || text[i - 1][0] == '_');
      open.push_back(named ? i - 1 : -1);
    } else if (text[i] == ")" && !open.empty()) {
      open.pop_back();
    }
  }

  std::vector<EmbeddingVector> out;
  out.reserve(text.size());
  std::vector<double> acc(static_cast<std::size_t>(info_.dim));
  for (int i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    double total = 0.0;
    auto feature = [&](std::string_view tag, std::string_view value, std::int64_t salt, double w) {
      add_feature(acc, fnv1a(tag, value, salt), w);
      total += w;
    };

    feature("tok", text[i], 0, 1.0);
    for (const auto& p : split[i]) feature("piece", p, 0, 0.5 / static_cast<double>(split[i].size()));
    for (int d = -kWindow; d <= kWindow; ++d) {
      if (d == 0) continue;
      const double w = 0.8 * std::pow(0.6, std::abs(d) - 1);
      const int j = i + d;
      if (j < 0 || j >= n) {
        feature("ctx", j < 0 ? "<s>" : "</s>", d, w);
        continue;
      }
      feature("ctx", text[j], d, w);
      // Same neighbor keyed only by side, so an inserted `&` or `*` does not erase the match.
      feature("side", text[j], d < 0 ? -1 : 1, 0.6 * w);
      for (const auto& p : split[j]) feature("ctxpiece", p, d, 0.4 * w / static_cast<double>(split[j].size()));
    }
    if (callee[i] >= 0) {
      feature("callee", text[callee[i]], 0, 0.8);
      for (const auto& p : split[callee[i]]) feature("calleepiece", p, 0, 0.3 / static_cast<double>(split[callee[i]].size()));
    }
    feature("pos", "", i, 0.05);

    EmbeddingVector v(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) v[k] = static_cast<float>(acc[k] / total);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> encode(const EmbeddingProvider& provider, std::span<const std::string> tokens,
                                    std::span<const int> mask_positions) {
  if (tokens.empty()) throw Error(ErrorCode::empty_input, "encode called with no tokens");
  const auto& info = provider.info();
  const std::size_t n = std::min(tokens.size(), static_cast<std::size_t>(info.max_tokens));
  std::vector<int> masks;
  for (int p : mask_positions) {
    if (p < 0 || static_cast<std::size_t>(p) >= tokens.size()) {
      throw Error(ErrorCode::span_mismatch, "mask position " + std::to_string(p) + " outside the token sequence");
    }
    if (static_cast<std::size_t>(p) < n) masks.push_back(p);
  }
  auto vectors = provider.encode_tokens(tokens.first(n), masks);
  if (vectors.size() != n) {
    throw Error(ErrorCode::dim_mismatch, "provider returned " + std::to_string(vectors.size()) + " vectors for " +
                                             std::to_string(n) + " tokens");
  }
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != info.dim) throw Error(ErrorCode::dim_mismatch, "provider vector length differs from dim");
    for (float x : v) {
      if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "provider returned a non-finite value");
    }
  }
  return vectors;
}

EmbeddingVector sequence_embedding(const EmbeddingProvider& provider, std::span<const std::string> tokens) {
  const auto vectors = encode(provider, tokens);
  std::vector<double> sum(static_cast<std::size_t>(provider.info().dim), 0.0);
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += v[k];
  }
  EmbeddingVector out(sum.size());
  const double n = static_cast<double>(vectors.size());
  for (std::size_t k = 0; k < sum.size(); ++k) out[k] = static_cast<float>(sum[k] / n);
  return out;
}

std::vector<std::string> token_texts(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

MaskedTokens mask_occurrence(const Statement& stmt, const VariableOccurrence& occ, std::string_view mask_token) {
  const bool owned = std::find(stmt.occurrences.begin(), stmt.occurrences.end(), occ) != stmt.occurrences.end();
  const int n = static_cast<int>(stmt.tokens.size());
  if (!owned || occ.span.first < 0 || occ.span.last >= n || occ.span.first > occ.span.last) {
    throw Error(ErrorCode::span_mismatch, "occurrence '" + occ.key + "' does not belong to the statement at line " +
                                              std::to_string(stmt.line));
  }
  MaskedTokens out;
  for (int i = 0; i < occ.span.first; ++i) out.tokens.push_back(stmt.tokens[i].text);
  out.mask_position = occ.span.first;
  out.tokens.emplace_back(mask_token);
  for (int i = occ.span.last + 1; i < n; ++i) out.tokens.push_back(stmt.tokens[i].text);
  return out;
}

const char* to_string(MaskContext context) { return context == MaskContext::statement ? "statement" : "function"; }

EmbeddingVector embed_variable_masked(const EmbeddingProvider& provider, const Function& func, const Statement& stmt,
                                      const VariableOccurrence& occ, MaskContext context) {
  MaskedTokens masked = mask_occurrence(stmt, occ, provider.info().mask_token);
  if (context == MaskContext::function) {
    const auto all = token_texts(func.tokens());
    const auto lexed = func.tokens();
    const auto stmt_texts = token_texts(stmt.tokens);
    int start = -1;
    for (std::size_t k = 0; k + stmt_texts.size() <= lexed.size() && start < 0; ++k) {
      if (lexed[k].line != stmt.line) continue;
      if (std::equal(stmt_texts.begin(), stmt_texts.end(), all.begin() + static_cast<long>(k))) start = static_cast<int>(k);
    }
    if (start < 0) throw Error(ErrorCode::span_mismatch, "statement not found in its function's tokens");
    std::vector<std::string> tokens(all.begin(), all.begin() + start);
    const int mask_at = start + masked.mask_position;
    tokens.insert(tokens.end(), masked.tokens.begin(), masked.tokens.end());
    tokens.insert(tokens.end(), all.begin() + start + static_cast<long>(stmt_texts.size()), all.end());
    masked = {std::move(tokens), mask_at};
  }
  if (masked.mask_position >= provider.info().max_tokens) {
    throw Error(ErrorCode::span_mismatch, "mask position falls beyond the provider's token limit");
  }
  const int pos[] = {masked.mask_position};
  auto vectors = encode(provider, masked.tokens, pos);
  return std::move(vectors[masked.mask_position]);
}

EmbeddingVector embed_variable_aggregated(const EmbeddingProvider& provider, const Statement& stmt,
                                          const VariableOccurrence& occ) {
  (void)mask_occurrence(stmt, occ); // ownership check
  const auto texts = token_texts(stmt.tokens);
  const auto vectors = encode(provider, texts);
  std::vector<double> sum(static_cast<std::size_t>(provider.info().dim), 0.0);
  for (int i = occ.span.first; i <= occ.span.last && i < static_cast<int>(vectors.size()); ++i) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += vectors[i][k];
  }
  return EmbeddingVector(sum.begin(), sum.end());
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::dim_mismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::zero_vector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

} // namespace bugslice
