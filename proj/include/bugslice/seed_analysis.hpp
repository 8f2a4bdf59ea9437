#pragma once

#include "bugslice/code_model.hpp"
#include "bugslice/diagnostics.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bugslice {

/// Statement-level difference between a buggy function and its fix.
struct Patch {
  Function buggy;
  Function fixed;
  std::vector<int> deleted;                   // buggy statement indices
  std::vector<int> inserted;                  // fixed statement indices
  // For each inserted statement: how many buggy statements precede it in the alignment.
  std::vector<int> insert_anchor;
  std::vector<std::pair<int, int>> modified;  // (buggy, fixed)
  std::vector<std::pair<int, int>> unchanged; // LCS matches (buggy, fixed)

  bool empty() const { return deleted.empty() && inserted.empty() && modified.empty(); }
};

/// Dice coefficient over token bigrams of two statements' normalized token texts.
double bigram_dice(const Statement& a, const Statement& b);

/// Pairs at or above this Dice similarity are classified as modified.
inline constexpr double kModifiedThreshold = 0.5;

Patch compute_patch(const Function& buggy, const Function& fixed);

/// Highest-frequency variables of the changed statements that exist in the
/// buggy function and never appear in a return statement. Throws EmptyResult.
std::vector<std::string> identify_key_variables(const Patch& patch);

struct SeedPair {
  int statement = -1; // rStmt, index into the buggy function
  std::string key;    // kVar
};

struct SeedSignature {
  std::vector<SeedPair> pairs;
  Diagnostics diagnostics;
};

/// Root-statement screening for each kVar. kVars for which neither rule fires
/// are dropped with a NoRootStatement diagnostic.
SeedSignature screen_root_statements(const Patch& patch, const std::vector<std::string>& key_variables);

/// Applies a unified diff to `original`. Hunks are located by their context
/// lines, tolerating line offsets. Throws InvalidArgument on a hunk that does not apply.
std::string apply_unified_diff(std::string_view original, std::string_view diff);

} // namespace bugslice
