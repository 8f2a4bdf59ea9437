#pragma once

#include "bugslice/code_model.hpp"
#include "bugslice/diagnostics.hpp"
#include "bugslice/embedding.hpp"
#include "bugslice/pinpoint.hpp"
#include "bugslice/slicer.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bugslice {

/// Dense row-major float32 vectors of one dimension.
class VectorTable {
public:
  VectorTable() = default;
  explicit VectorTable(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ > 0 ? data_.size() / static_cast<std::size_t>(dim_) : 0; }
  std::span<const float> at(std::size_t row) const;
  std::size_t push(std::span<const float> v);
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

private:
  int dim_ = 0;
  std::vector<float> data_;
};

struct MaskEntry {
  OccurrenceRef ref;
  std::string key;
  std::size_t vector = 0; // row in Index::mask_vectors
};

struct SliceEntry {
  OccurrenceRef ref;
  std::vector<int> statements;
  std::size_t vector = 0; // row in Index::slice_vectors
};

struct FunctionRecord {
  std::string id;
  std::string name;
  std::string file; // relative to the corpus root
  int start_line = 0;
  int end_line = 0;
  std::string content_hash;
  std::string source; // definition text, re-parsed on demand
  std::size_t vector = 0; // row in Index::function_vectors
  std::vector<MaskEntry> masks;   // eligible occurrences, in eligible_occurrences order
  std::vector<SliceEntry> slices; // same order as masks
};

struct IndexManifest {
  int format_version = 2;
  ProviderInfo provider;
  std::string pooling_method = "mean";
  std::string mask_context = "statement";
  std::string slicing_strategy = "default";
  std::string coverage_metric = "statements";
  bool fuse_dot_access = true;
  std::string corpus_root;
  std::string created_at;
  std::size_t screen_top_k = 1000; // default for queries against this index
  std::size_t function_count = 0;
  std::size_t mask_count = 0;
  std::size_t slice_count = 0;
};

struct Index {
  IndexManifest manifest;
  std::vector<FunctionRecord> functions; // ordered by (file, start_line)
  VectorTable function_vectors;
  VectorTable mask_vectors;
  VectorTable slice_vectors;

  const FunctionRecord* find(const std::string& id) const;
  /// Re-extracts the function from its stored source. Throws CorruptIndex if it no longer parses to the same id.
  Function parse(const FunctionRecord& record) const;
  /// Mask vectors of a record in eligible-occurrence order.
  std::vector<EmbeddingVector> mask_vectors_of(const FunctionRecord& record) const;
};

struct IndexConfig {
  ParseOptions parse;
  SliceOptions slice;
  MaskContext mask_context = MaskContext::statement;
  int jobs = 1;
  std::size_t screen_top_k = 1000;
  std::vector<std::string> extensions = {".c", ".h"};
};

struct BuildStats {
  std::size_t functions = 0;
  std::size_t embedded = 0; // computed in this run
  std::size_t reused = 0;   // carried over from a previous (possibly partial) build
  std::size_t masks = 0;
  std::size_t slices = 0;
  Diagnostics diagnostics;
};

/// Precomputes function vectors, mask vectors, slices and slice vectors for
/// every function under `corpus_root` and writes them to `out_dir`.
/// Functions whose content hash matches an earlier build of `out_dir` with
/// the same provider and settings are reused. Throws ProviderUnavailable.
BuildStats build_index(const std::filesystem::path& corpus_root, const std::filesystem::path& out_dir,
                       const EmbeddingProvider& provider, const IndexConfig& config = {});

/// Throws CorruptIndex on checksum or size mismatch, ManifestMismatch when
/// `expected` is given and names a different provider.
Index load_index(const std::filesystem::path& dir, const ProviderInfo* expected = nullptr);

void check_provider(const IndexManifest& manifest, const ProviderInfo& provider);

struct ScreenHit {
  std::size_t function = 0; // position in Index::functions
  std::string id;
  double score = 0.0;
};

/// Top min(k, n) functions by cosine to `seed_vector`; ties by id.
std::vector<ScreenHit> screen_top_k(const Index& index, std::span<const float> seed_vector, std::size_t k);

std::string fnv1a64_hex(std::string_view bytes);

} // namespace bugslice
