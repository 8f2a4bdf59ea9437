#pragma once

#include "bugslice/code_model.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugslice {

using EmbeddingVector = std::vector<float>;

struct ProviderInfo {
  std::string name;
  std::string version;
  int dim = 768;
  int max_tokens = 1024;
  std::string mask_token = "[MASK]";
};

/// Contextual token encoder. One vector per input token.
class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;

  virtual const ProviderInfo& info() const = 0;

  /// Tokens at `mask_positions` are encoded as the mask token. Callers go
  /// through encode(), which validates and truncates first.
  virtual std::vector<EmbeddingVector> encode_tokens(std::span<const std::string> tokens,
                                                     std::span<const int> mask_positions) const = 0;
};

/// Deterministic in-process encoder. Each token vector mixes seeded hash
/// features of the token itself, its identifier pieces, the neighbors within
/// four positions and the absolute position; components lie in [-1, 1].
class ReferenceEmbedder final : public EmbeddingProvider {
public:
  explicit ReferenceEmbedder(int dim = 768, int max_tokens = 1024);

  const ProviderInfo& info() const override { return info_; }
  std::vector<EmbeddingVector> encode_tokens(std::span<const std::string> tokens,
                                             std::span<const int> mask_positions) const override;

  static constexpr int kWindow = 4;

private:
  ProviderInfo info_;
};

struct RemoteOptions {
  int retries = 3;
  int backoff_ms = 200;
  int timeout_ms = 30000;
};

/// HTTP client for the embedding service (`GET /info`, `POST /encode`).
/// Throws ProviderUnavailable when the service cannot be reached.
std::unique_ptr<EmbeddingProvider> make_remote_provider(const std::string& base_url, const RemoteOptions& options = {});

/// Validated encode: throws EmptyInput on no tokens, truncates to max_tokens,
/// and checks the provider returned one vector of `dim` values per token.
std::vector<EmbeddingVector> encode(const EmbeddingProvider& provider, std::span<const std::string> tokens,
                                    std::span<const int> mask_positions = {});

/// Mean of the token vectors.
EmbeddingVector sequence_embedding(const EmbeddingProvider& provider, std::span<const std::string> tokens);

std::vector<std::string> token_texts(std::span<const Token> tokens);

struct MaskedTokens {
  std::vector<std::string> tokens;
  int mask_position = -1;
};

/// The statement's tokens with the occurrence's span collapsed to one mask
/// token. Throws SpanMismatch if the occurrence does not belong to the statement.
MaskedTokens mask_occurrence(const Statement& stmt, const VariableOccurrence& occ,
                             std::string_view mask_token = "[MASK]");

enum class MaskContext { statement, function };

const char* to_string(MaskContext context);

/// Vector at the mask position after masking `occ` (statement or whole-function context).
EmbeddingVector embed_variable_masked(const EmbeddingProvider& provider, const Function& func,
                                      const Statement& stmt, const VariableOccurrence& occ,
                                      MaskContext context = MaskContext::statement);

/// Sum of the token vectors over the occurrence's span, encoding the statement unmasked.
EmbeddingVector embed_variable_aggregated(const EmbeddingProvider& provider, const Statement& stmt,
                                          const VariableOccurrence& occ);

/// Throws DimMismatch or ZeroVector.
double cosine_similarity(std::span<const float> u, std::span<const float> v);

} // namespace bugslice
