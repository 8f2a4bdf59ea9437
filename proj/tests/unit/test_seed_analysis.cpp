#include "test_support.hpp"

#include "bugslice/error.hpp"
#include "bugslice/seed_analysis.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace bugslice;
using bugslice::testing::parse_single;

namespace {

struct NtbPair {
  Function buggy = parse_single(bugslice::testing::read_text(bugslice::testing::data_dir() / "seeds/ntb_client/buggy.c"));
  Function fixed = parse_single(bugslice::testing::read_text(bugslice::testing::data_dir() / "seeds/ntb_client/fixed.c"));
};

} // namespace

TEST(Patch, IdenticalFunctionsGiveEmptyPatch) {
  NtbPair fig;
  EXPECT_TRUE(compute_patch(fig.buggy, fig.buggy).empty());
}

TEST(Patch, NtbClientModifiedOrReplaced) {
  NtbPair fig;
  const auto p = compute_patch(fig.buggy, fig.fixed);
  const std::size_t changes = p.modified.size() + p.deleted.size() + p.inserted.size();
  ASSERT_FALSE(p.empty());
  if (p.modified.size() == 1) {
    EXPECT_EQ(changes, 1U);
    EXPECT_EQ(fig.buggy.statements[p.modified[0].first].text(), "kfree(client_dev);");
    EXPECT_EQ(fig.fixed.statements[p.modified[0].second].text(), "put_device(dev);");
  } else {
    ASSERT_EQ(p.deleted.size(), 1U);
    ASSERT_EQ(p.inserted.size(), 1U);
    EXPECT_EQ(fig.buggy.statements[p.deleted[0]].text(), "kfree(client_dev);");
    EXPECT_EQ(fig.fixed.statements[p.inserted[0]].text(), "put_device(dev);");
  }
}

TEST(Patch, InsertOnly) {
  const auto b = parse_single("int f(int a)\n{\n  use(a);\n  return 0;\n}\n");
  const auto f = parse_single("int f(int a)\n{\n  use(a);\n  release(a);\n  return 0;\n}\n");
  const auto p = compute_patch(b, f);
  EXPECT_TRUE(p.deleted.empty());
  EXPECT_TRUE(p.modified.empty());
  ASSERT_EQ(p.inserted.size(), 1U);
  EXPECT_EQ(p.insert_anchor[0], 1);
}

TEST(Patch, SimilarStatementsAreModified) {
  const auto b = parse_single("int f(int a)\n{\n  x = get(a, 1);\n  return x;\n}\n");
  const auto f = parse_single("int f(int a)\n{\n  x = get(a, 2);\n  return x;\n}\n");
  const auto p = compute_patch(b, f);
  ASSERT_EQ(p.modified.size(), 1U);
  EXPECT_GE(bigram_dice(b.statements[0], f.statements[0]), kModifiedThreshold);
}

TEST(KeyVariables, NtbClient) {
  NtbPair fig;
  auto keys = identify_key_variables(compute_patch(fig.buggy, fig.fixed));
  std::sort(keys.begin(), keys.end());
  EXPECT_EQ(keys, (std::vector<std::string>{"client_dev", "dev"}));
}

TEST(KeyVariables, ReturnedVariableExcluded) {
  const auto b = parse_single("int f(int a)\n{\n  int rc;\n  rc = get(a);\n  return 0;\n}\n");
  const auto f = parse_single("int f(int a)\n{\n  int rc;\n  rc = get(a);\n  return 0;\n  return rc;\n}\n");
  try {
    identify_key_variables(compute_patch(b, f));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_result);
  }
}

TEST(KeyVariables, HighestFrequencyWins) {
  const auto b = parse_single("void f(int x, int y)\n{\n  use(x);\n}\n");
  const auto f = parse_single("void f(int x, int y)\n{\n  use(x);\n  pair(x, x);\n  other(x, y);\n}\n");
  EXPECT_EQ(identify_key_variables(compute_patch(b, f)), std::vector<std::string>{"x"});
}

TEST(RootStatements, NtbClient) {
  NtbPair fig;
  const auto patch = compute_patch(fig.buggy, fig.fixed);
  const auto sig = screen_root_statements(patch, identify_key_variables(patch));
  ASSERT_EQ(sig.pairs.size(), 2U);
  std::vector<std::pair<int, std::string>> got;
  for (const auto& p : sig.pairs) got.emplace_back(fig.buggy.statements[p.statement].line, p.key);
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<std::pair<int, std::string>>{{31, "dev"}, {33, "client_dev"}}));
  EXPECT_EQ(fig.buggy.statements[sig.pairs[0].statement].text() == "rc = device_register(dev);" ||
                fig.buggy.statements[sig.pairs[1].statement].text() == "rc = device_register(dev);",
            true);
}

TEST(RootStatements, InsertedOnlyVariableHasNoRoot) {
  const auto b = parse_single("void f(int a)\n{\n  use(a);\n}\n");
  const auto f = parse_single("void f(int a)\n{\n  int tmp;\n  use(a);\n  tmp = fresh();\n  keep(tmp);\n}\n");
  const auto patch = compute_patch(b, f);
  const auto sig = screen_root_statements(patch, {"tmp"});
  EXPECT_TRUE(sig.pairs.empty());
  ASSERT_FALSE(sig.diagnostics.empty());
}

TEST(RootStatements, InsertedUseFindsPrecedingUse) {
  const auto b = parse_single("int f(struct d *d)\n{\n  int rc;\n  rc = reg(d);\n  if (rc)\n    return rc;\n  return 0;\n}\n");
  const auto f = parse_single(
      "int f(struct d *d)\n{\n  int rc;\n  rc = reg(d);\n  if (rc) {\n    put(d);\n    return rc;\n  }\n  return 0;\n}\n");
  const auto patch = compute_patch(b, f);
  const auto sig = screen_root_statements(patch, {"d"});
  ASSERT_EQ(sig.pairs.size(), 1U);
  EXPECT_EQ(b.statements[sig.pairs[0].statement].text(), "rc = reg(d);");
}

TEST(UnifiedDiff, AppliesNtbClientFix) {
  const auto buggy = bugslice::testing::read_text(bugslice::testing::data_dir() / "seeds/ntb_client/buggy.c");
  const auto fixed = bugslice::testing::read_text(bugslice::testing::data_dir() / "seeds/ntb_client/fixed.c");
  const std::string diff = "--- a/ntb.c\n+++ b/ntb.c\n@@ -31,5 +31,5 @@\n \t\trc = device_register(dev);\n"
                           " \t\tif (rc) {\n-\t\t\tkfree(client_dev);\n+\t\t\tput_device(dev);\n \t\t\tgoto err;\n"
                           " \t\t}\n";
  EXPECT_EQ(apply_unified_diff(buggy, diff), fixed);
}

TEST(UnifiedDiff, ToleratesOffsetAndRejectsMismatch) {
  const std::string src = "a\nb\nc\nd\n";
  EXPECT_EQ(apply_unified_diff(src, "@@ -1,2 +1,2 @@\n c\n-d\n+e\n"), "a\nb\nc\ne\n");
  EXPECT_THROW(apply_unified_diff(src, "@@ -1,2 +1,2 @@\n x\n-y\n+z\n"), Error);
}
