#include "bugslice/seed_analysis.hpp"

#include "bugslice/error.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace bugslice {

namespace {

std::string normalized(const Statement& st) {
  std::string out;
  for (const auto& t : st.tokens) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

} // namespace

double bigram_dice(const Statement& a, const Statement& b) {
  auto bigrams = [](const Statement& s) {
    std::multiset<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i + 1 < s.tokens.size(); ++i) out.emplace(s.tokens[i].text, s.tokens[i + 1].text);
    return out;
  };
  const auto ba = bigrams(a);
  const auto bb = bigrams(b);
  if (ba.empty() && bb.empty()) return normalized(a) == normalized(b) ? 1.0 : 0.0;
  std::vector<std::pair<std::string, std::string>> common;
  std::set_intersection(ba.begin(), ba.end(), bb.begin(), bb.end(), std::back_inserter(common));
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(ba.size() + bb.size());
}

Patch compute_patch(const Function& buggy, const Function& fixed) {
  Patch p;
  p.buggy = buggy;
  p.fixed = fixed;
  const std::size_t n = buggy.statements.size();
  const std::size_t m = fixed.statements.size();
  std::vector<std::string> a(n), b(m);
  for (std::size_t i = 0; i < n; ++i) a[i] = normalized(buggy.statements[i]);
  for (std::size_t j = 0; j < m; ++j) b[j] = normalized(fixed.statements[j]);

  std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  std::vector<int> gap_b, gap_f;
  auto flush_gap = [&](int buggy_boundary) {
    std::vector<bool> f_used(gap_f.size(), false);
    std::size_t f_floor = 0;
    for (int bi : gap_b) {
      bool paired = false;
      for (std::size_t k = f_floor; k < gap_f.size(); ++k) {
        if (bigram_dice(buggy.statements[bi], fixed.statements[gap_f[k]]) >= kModifiedThreshold) {
          p.modified.emplace_back(bi, gap_f[k]);
          f_used[k] = true;
          f_floor = k + 1;
          paired = true;
          break;
        }
      }
      if (!paired) p.deleted.push_back(bi);
    }
    for (std::size_t k = 0; k < gap_f.size(); ++k) {
      if (!f_used[k]) {
        p.inserted.push_back(gap_f[k]);
        p.insert_anchor.push_back(buggy_boundary);
      }
    }
    gap_b.clear();
    gap_f.clear();
  };

  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      flush_gap(static_cast<int>(i));
      p.unchanged.emplace_back(static_cast<int>(i), static_cast<int>(j));
      ++i;
      ++j;
    } else if (j >= m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) {
      gap_b.push_back(static_cast<int>(i++));
    } else {
      gap_f.push_back(static_cast<int>(j++));
    }
  }
  flush_gap(static_cast<int>(n));
  return p;
}

std::vector<std::string> identify_key_variables(const Patch& patch) {
  std::map<std::string, int> freq;
  std::vector<std::string> order;
  auto count = [&](const Statement& st) {
    for (const auto& o : st.occurrences) {
      if (freq[o.key]++ == 0) order.push_back(o.key);
    }
  };
  for (int b : patch.deleted) count(patch.buggy.statements[b]);
  for (const auto& [b, f] : patch.modified) {
    count(patch.buggy.statements[b]);
    count(patch.fixed.statements[f]);
  }
  for (int f : patch.inserted) count(patch.fixed.statements[f]);

  std::set<std::string> in_buggy, returned;
  for (const auto& st : patch.buggy.statements) {
    for (const auto& o : st.occurrences) {
      in_buggy.insert(o.key);
      if (st.kind == StatementKind::return_stmt) returned.insert(o.key);
    }
  }
  for (const auto& st : patch.fixed.statements) {
    if (st.kind != StatementKind::return_stmt) continue;
    for (const auto& o : st.occurrences) returned.insert(o.key);
  }

  int best = 0;
  for (const auto& key : order) {
    if (in_buggy.contains(key) && !returned.contains(key)) best = std::max(best, freq[key]);
  }
  std::vector<std::string> out;
  for (const auto& key : order) {
    if (best > 0 && freq[key] == best && in_buggy.contains(key) && !returned.contains(key)) out.push_back(key);
  }
  if (out.empty()) throw Error(ErrorCode::empty_result, "no key variable survives the patch heuristics");
  return out;
}

SeedSignature screen_root_statements(const Patch& patch, const std::vector<std::string>& key_variables) {
  SeedSignature sig;
  std::set<std::pair<int, std::string>> pairs;
  const auto& buggy = patch.buggy.statements;
  for (const auto& key : key_variables) {
    bool found = false;
    for (int b : patch.deleted) {
      if (buggy[b].has_key(key)) {
        pairs.emplace(b, key);
        found = true;
      }
    }
    for (const auto& [b, f] : patch.modified) {
      if (buggy[b].has_key(key)) {
        pairs.emplace(b, key);
        found = true;
      } else if (patch.fixed.statements[f].has_key(key)) {
        // The key only enters on the fixed side: route like an insertion.
        for (int q = b; q >= 0; --q) {
          if (buggy[q].has_key(key)) {
            pairs.emplace(q, key);
            found = true;
            break;
          }
        }
      }
    }
    for (std::size_t k = 0; k < patch.inserted.size(); ++k) {
      if (!patch.fixed.statements[patch.inserted[k]].has_key(key)) continue;
      for (int b = patch.insert_anchor[k] - 1; b >= 0; --b) {
        if (buggy[b].has_key(key)) {
          pairs.emplace(b, key);
          found = true;
          break;
        }
      }
    }
    if (!found) {
      sig.diagnostics.push_back({patch.buggy.file, patch.buggy.start_line, Severity::warning,
                                 "NoRootStatement: key variable '" + key + "' dropped"});
    }
  }
  for (const auto& [s, key] : pairs) sig.pairs.push_back({s, key});
  return sig;
}

std::string apply_unified_diff(std::string_view original, std::string_view diff) {
  std::vector<std::string> lines = split_lines(original);
  const bool trailing_newline = !original.empty() && original.back() == '\n';
  const auto diff_lines = split_lines(diff);

  long offset = 0;
  std::size_t k = 0;
  while (k < diff_lines.size()) {
    const std::string& hl = diff_lines[k];
    if (!hl.starts_with("@@")) {
      ++k;
      continue;
    }
    long old_start = 0;
    {
      const auto minus = hl.find('-');
      if (minus == std::string::npos) throw Error(ErrorCode::invalid_argument, "malformed hunk header: " + hl);
      old_start = std::stol(hl.substr(minus + 1));
    }
    ++k;
    std::vector<std::string> old_block, new_block;
    while (k < diff_lines.size() && !diff_lines[k].starts_with("@@") && !diff_lines[k].starts_with("--- ") &&
           !diff_lines[k].starts_with("diff ")) {
      const std::string& l = diff_lines[k];
      if (l.empty()) {
        old_block.emplace_back();
        new_block.emplace_back();
      } else if (l[0] == ' ') {
        old_block.push_back(l.substr(1));
        new_block.push_back(l.substr(1));
      } else if (l[0] == '-') {
        old_block.push_back(l.substr(1));
      } else if (l[0] == '+') {
        new_block.push_back(l.substr(1));
      }
      ++k;
    }
    auto matches_at = [&](long pos) {
      if (pos < 0 || pos + static_cast<long>(old_block.size()) > static_cast<long>(lines.size())) return false;
      for (std::size_t q = 0; q < old_block.size(); ++q) {
        if (lines[pos + q] != old_block[q]) return false;
      }
      return true;
    };
    const long expected = std::max(0L, old_start - 1 + offset);
    long found = -1;
    for (long delta = 0; delta <= static_cast<long>(lines.size()) && found < 0; ++delta) {
      if (matches_at(expected - delta)) found = expected - delta;
      else if (matches_at(expected + delta)) found = expected + delta;
    }
    if (found < 0) {
      throw Error(ErrorCode::invalid_argument, "hunk at line " + std::to_string(old_start) + " does not apply");
    }
    lines.erase(lines.begin() + found, lines.begin() + found + static_cast<long>(old_block.size()));
    lines.insert(lines.begin() + found, new_block.begin(), new_block.end());
    offset += static_cast<long>(new_block.size()) - static_cast<long>(old_block.size());
  }
  std::ostringstream os;
  for (std::size_t q = 0; q < lines.size(); ++q) {
    os << lines[q];
    if (q + 1 < lines.size() || trailing_newline) os << '\n';
  }
  return os.str();
}

} // namespace bugslice
