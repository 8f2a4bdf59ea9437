#include "test_support.hpp"

#include "bugslice/error.hpp"
#include "bugslice/query.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <functional>

using namespace bugslice;
using bugslice::testing::parse_single;
using bugslice::testing::read_text;
using bugslice::testing::TempDir;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io_error;
}

fs::path ntb_dir() { return bugslice::testing::data_dir() / "seeds/ntb_client"; }

// Desk corpus plus a verbatim copy of the NTB client buggy function under another path.
class QueryFixture : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    corpus_ = new TempDir("query-corpus");
    out_ = new TempDir("query-index");
    provider_ = new ReferenceEmbedder();
    fs::copy(bugslice::testing::data_dir() / "desk/corpus", corpus_->path(), fs::copy_options::recursive);
    fs::create_directories(corpus_->path() / "clones");
    fs::copy_file(ntb_dir() / "buggy.c", corpus_->path() / "clones/ntb_copy.c");
    build_index(corpus_->path(), out_->path(), *provider_);
    index_ = new Index(load_index(out_->path()));
  }
  static void TearDownTestSuite() {
    delete index_;
    delete provider_;
    delete out_;
    delete corpus_;
  }

  static Query ntb_query(const QueryConfig& config = {}) {
    return prepare_query(parse_single(read_text(ntb_dir() / "buggy.c"), "seed/buggy.c"),
                         parse_single(read_text(ntb_dir() / "fixed.c"), "seed/fixed.c"), *provider_, config);
  }

  static TempDir* corpus_;
  static TempDir* out_;
  static ReferenceEmbedder* provider_;
  static Index* index_;
};

TempDir* QueryFixture::corpus_ = nullptr;
TempDir* QueryFixture::out_ = nullptr;
ReferenceEmbedder* QueryFixture::provider_ = nullptr;
Index* QueryFixture::index_ = nullptr;

} // namespace

TEST(TargetSliceMode, Names) {
  EXPECT_EQ(parse_target_slice_mode("slice"), TargetSliceMode::slice);
  EXPECT_EQ(parse_target_slice_mode("direct-mask-mapping"), TargetSliceMode::direct_mask_mapping);
  EXPECT_FALSE(parse_target_slice_mode("direct"));
  EXPECT_STREQ(to_string(TargetSliceMode::direct_mask_mapping), "direct-mask-mapping");
}

TEST(PrepareQuery, NtbClientSignatureAndSlice) {
  ReferenceEmbedder p;
  const auto buggy = parse_single(read_text(ntb_dir() / "buggy.c"));
  const auto q = prepare_query(buggy, parse_single(read_text(ntb_dir() / "fixed.c")), p);
  ASSERT_EQ(q.signature.pairs.size(), 2U);
  EXPECT_EQ(q.kvar_vectors.size(), 2U);
  EXPECT_EQ(q.query_slice_vector.size(), 768U);
  EXPECT_EQ(q.seed_function_vector, sequence_embedding(p, token_texts(buggy.tokens())));
  for (const auto& pair : q.signature.pairs) {
    const auto& stmts = q.query_slice.statements;
    EXPECT_NE(std::find(stmts.begin(), stmts.end(), pair.statement), stmts.end());
  }
  EXPECT_EQ(q.query_slice_vector, sequence_embedding(p, slice_tokens(buggy, q.query_slice.statements)));
}

TEST(PrepareQuery, SeedAnalysisFailures) {
  ReferenceEmbedder p;
  const auto buggy = parse_single(read_text(ntb_dir() / "buggy.c"));
  EXPECT_EQ(code_of([&] { prepare_query(buggy, buggy, p); }), ErrorCode::seed_analysis_failed);
  const auto a = parse_single("void f(int a)\n{\n  use(a);\n}\n");
  const auto b = parse_single("void f(int a)\n{\n  int tmp;\n  use(a);\n  tmp = fresh();\n  keep(tmp);\n}\n");
  EXPECT_EQ(code_of([&] { prepare_query(a, b, p); }), ErrorCode::seed_analysis_failed);
  EXPECT_EQ(code_of([&] { prepare_query(a, std::vector<SeedPair>{}, p); }), ErrorCode::seed_analysis_failed);
}

TEST(PrepareQuery, ManualCriteriaMatchDiffAnalysis) {
  ReferenceEmbedder p;
  const auto buggy = parse_single(read_text(ntb_dir() / "buggy.c"));
  const auto auto_q = prepare_query(buggy, parse_single(read_text(ntb_dir() / "fixed.c")), p);
  const auto manual = prepare_query(buggy, auto_q.signature.pairs, p);
  EXPECT_EQ(manual.query_slice.statements, auto_q.query_slice.statements);
  EXPECT_EQ(manual.kvar_vectors, auto_q.kvar_vectors);
  EXPECT_EQ(manual.query_slice_vector, auto_q.query_slice_vector);
  const std::vector<SeedPair> bad{{0, "no_such_var"}};
  EXPECT_EQ(code_of([&] { prepare_query(buggy, bad, p); }), ErrorCode::criterion_mismatch);
  const std::vector<SeedPair> out_of_range{{999, "dev"}};
  EXPECT_EQ(code_of([&] { prepare_query(buggy, out_of_range, p); }), ErrorCode::criterion_mismatch);
}

TEST_F(QueryFixture, IndexRequired) {
  const auto q = ntb_query();
  EXPECT_EQ(code_of([&] { run_query(q, nullptr, *provider_); }), ErrorCode::index_required);
}

TEST_F(QueryFixture, ForeignProviderRejected) {
  const auto q = ntb_query();
  ReferenceEmbedder small(16);
  EXPECT_EQ(code_of([&] { run_query(q, index_, small); }), ErrorCode::manifest_mismatch);
}

TEST_F(QueryFixture, VerbatimCloneRanksFirst) {
  const auto r = run_query(ntb_query(), index_, *provider_);
  ASSERT_FALSE(r.ranked.empty());
  EXPECT_EQ(r.ranked[0].file, "clones/ntb_copy.c");
  EXPECT_NEAR(r.ranked[0].score, 1.0, 1e-6);
  EXPECT_EQ(r.ranked[0].rank, 1);
  EXPECT_EQ(r.screened, index_->functions.size());
}

TEST_F(QueryFixture, SeedFunctionExcludedFromItsOwnResults) {
  const auto buggy = parse_single(read_text(ntb_dir() / "buggy.c"), "clones/ntb_copy.c");
  const auto fixed = parse_single(read_text(ntb_dir() / "fixed.c"), "clones/ntb_copy.c");
  const auto r = run_query(prepare_query(buggy, fixed, *provider_), index_, *provider_);
  EXPECT_EQ(r.screened, index_->functions.size() - 1);
  for (const auto& c : r.ranked) EXPECT_NE(c.function_id, buggy.id);
}

TEST_F(QueryFixture, TopNOrderingAndRanks) {
  QueryConfig config;
  config.report_top_n = 5;
  const auto r = run_query(ntb_query(config), index_, *provider_, config);
  ASSERT_EQ(r.ranked.size(), 5U);
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    EXPECT_EQ(r.ranked[i].rank, static_cast<int>(i + 1));
    if (i > 0) {
      const auto& a = r.ranked[i - 1];
      const auto& b = r.ranked[i];
      EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.function_id < b.function_id));
    }
  }
  EXPECT_GE(r.scored, r.ranked.size());
}

TEST_F(QueryFixture, ScreeningLimitsCandidates) {
  QueryConfig config;
  config.screen_top_k = 4;
  config.report_top_n = 100;
  const auto q = ntb_query(config);
  const auto r = run_query(q, index_, *provider_, config);
  const auto hits = screen_top_k(*index_, q.seed_function_vector, 4);
  EXPECT_EQ(r.screened, 4U);
  for (const auto& c : r.ranked) {
    EXPECT_TRUE(std::any_of(hits.begin(), hits.end(), [&](const ScreenHit& h) { return h.id == c.function_id; }));
  }
}

TEST_F(QueryFixture, DeterministicAcrossRunsAndJobs) {
  QueryConfig serial, parallel;
  serial.report_top_n = parallel.report_top_n = 100;
  parallel.jobs = 3;
  const auto q = ntb_query();
  const auto a = run_query(q, index_, *provider_, serial);
  const auto b = run_query(q, index_, *provider_, serial);
  const auto c = run_query(q, index_, *provider_, parallel);
  ASSERT_EQ(a.ranked.size(), c.ranked.size());
  for (std::size_t i = 0; i < a.ranked.size(); ++i) {
    EXPECT_EQ(a.ranked[i].function_id, b.ranked[i].function_id);
    EXPECT_EQ(a.ranked[i].function_id, c.ranked[i].function_id);
    EXPECT_EQ(a.ranked[i].score, c.ranked[i].score);
  }
  EXPECT_EQ(render_report(q, a, ReportFormat::json), render_report(q, c, ReportFormat::json));
}

TEST_F(QueryFixture, StoredVectorsAgreeWithRecomputation) {
  const auto q = ntb_query();
  for (const auto& record : index_->functions) {
    const Function target = index_->parse(record);
    RankedCandidate fresh, cached;
    try {
      fresh = target_candidate(q, target, *provider_, {});
    } catch (const Error&) {
      EXPECT_THROW(target_candidate(q, target, *provider_, {}, index_, &record), Error);
      continue;
    }
    cached = target_candidate(q, target, *provider_, {}, index_, &record);
    EXPECT_EQ(fresh.slice.statements, cached.slice.statements) << record.id;
    EXPECT_NEAR(fresh.score, cached.score, 1e-12) << record.id;
    ASSERT_EQ(fresh.pinpoints.size(), cached.pinpoints.size());
    for (std::size_t i = 0; i < fresh.pinpoints.size(); ++i) EXPECT_EQ(fresh.pinpoints[i].ref, cached.pinpoints[i].ref);
  }
}

TEST_F(QueryFixture, StrategyDifferentFromIndexIsRecomputed) {
  QueryConfig strict;
  strict.slice.strategy = SlicingStrategy::strict_one_step;
  strict.report_top_n = 100;
  const auto q = ntb_query(strict);
  const auto r = run_query(q, index_, *provider_, strict);
  for (const auto& c : r.ranked) {
    const Function target = index_->parse(*index_->find(c.function_id));
    const auto direct = target_candidate(q, target, *provider_, strict);
    EXPECT_EQ(direct.slice.statements, c.slice.statements) << c.function_id;
    EXPECT_NEAR(direct.score, c.score, 1e-12);
  }
}

TEST_F(QueryFixture, DirectMaskMappingMode) {
  QueryConfig config;
  config.target_slice = TargetSliceMode::direct_mask_mapping;
  const auto q = ntb_query(config);
  EXPECT_EQ(q.direct_vectors.size(), q.direct_statements.size());
  ASSERT_FALSE(q.direct_vectors.empty());
  const auto r = run_query(q, index_, *provider_, config);
  ASSERT_FALSE(r.ranked.empty());
  EXPECT_EQ(r.ranked[0].pinpoints.size(), q.direct_vectors.size());
}

TEST_F(QueryFixture, ReportFormats) {
  QueryConfig config;
  config.report_top_n = 3;
  const auto q = ntb_query(config);
  const auto r = run_query(q, index_, *provider_, config);
  const auto text = render_report(q, r, ReportFormat::text);
  EXPECT_EQ(text.rfind("query seed/buggy.c:", 0), 0U);
  EXPECT_NE(text.find("  criterion line 31 kvar dev\n"), std::string::npos);
  EXPECT_NE(text.find("  criterion line 33 kvar client_dev\n"), std::string::npos);
  EXPECT_NE(text.find("\n#1  1.0000  "), std::string::npos);
  EXPECT_NE(text.find("#3  "), std::string::npos);
  EXPECT_EQ(text.find("#4  "), std::string::npos);

  const auto doc = nlohmann::json::parse(render_report(q, r, ReportFormat::json));
  EXPECT_EQ(doc.at("query").at("key_variables").size(), 2U);
  EXPECT_EQ(doc.at("query").at("criteria").size(), 2U);
  EXPECT_EQ(doc.at("candidates").size(), 3U);
  const auto& top = doc.at("candidates")[0];
  EXPECT_EQ(top.at("rank"), 1);
  EXPECT_EQ(top.at("file"), "clones/ntb_copy.c");
  EXPECT_EQ(top.at("pinpoints").size(), 2U);
  EXPECT_FALSE(top.at("slice").at("text").get<std::string>().empty());
  EXPECT_EQ(doc.at("screened"), r.screened);
}

namespace {

struct DeskRun {
  int default_rank = 0;
  int direct_rank = 0;
};

int rank_of(const QueryResult& r, const std::string& name) {
  for (const auto& c : r.ranked) {
    if (c.name == name) return c.rank;
  }
  return 0;
}

} // namespace

TEST(DeskQuery, NtbReplicaRanksFirst) {
  const fs::path seed = bugslice::testing::data_dir() / "desk/seeds/01_ntb_client";
  TempDir out("desk-ntb");
  ReferenceEmbedder p;
  build_index(bugslice::testing::data_dir() / "desk/corpus", out.path(), p);
  const auto index = load_index(out.path());
  ASSERT_GE(index.functions.size(), 51U);
  const auto q = prepare_query(parse_single(read_text(seed / "buggy.c")), parse_single(read_text(seed / "fixed.c")), p);
  QueryConfig config;
  config.report_top_n = 1000;
  const auto r = run_query(q, &index, p, config);
  DeskRun run;
  run.default_rank = rank_of(r, "locomo_init_one_child");
  config.target_slice = TargetSliceMode::direct_mask_mapping;
  const auto q2 = prepare_query(parse_single(read_text(seed / "buggy.c")), parse_single(read_text(seed / "fixed.c")), p, config);
  run.direct_rank = rank_of(run_query(q2, &index, p, config), "locomo_init_one_child");
  ASSERT_GT(run.default_rank, 0);
  ASSERT_GT(run.direct_rank, 0);
  EXPECT_GE(run.direct_rank, run.default_rank);
  EXPECT_EQ(run.default_rank, 1) << "top: " << r.ranked[0].name;
}

TEST(Report, EmptyRankingIsHeaderOnly) {
  ReferenceEmbedder p;
  const auto q = prepare_query(parse_single(read_text(ntb_dir() / "buggy.c")),
                               parse_single(read_text(ntb_dir() / "fixed.c")), p);
  QueryResult empty;
  const auto text = render_report(q, empty, ReportFormat::text);
  EXPECT_EQ(text, "query fixture.c:ntb_transport_register_client_dev:1\n"
                  "  criterion line 31 kvar dev\n"
                  "  criterion line 33 kvar client_dev\n"
                  "screened 0, ranked 0, showing 0\n");
  const auto doc = nlohmann::json::parse(render_report(q, empty, ReportFormat::json));
  EXPECT_TRUE(doc.at("candidates").empty());
}

TEST(Report, SingleCandidateGolden) {
  const fs::path golden = bugslice::testing::data_dir() / "golden";
  TempDir corpus("golden-corpus"), out("golden-index");
  fs::copy_file(golden / "target.c", corpus.path() / "target.c");
  ReferenceEmbedder p;
  build_index(corpus.path(), out.path(), p);
  const auto index = load_index(out.path());
  const auto q = prepare_query(parse_single(read_text(ntb_dir() / "buggy.c")),
                               parse_single(read_text(ntb_dir() / "fixed.c")), p);
  const auto r = run_query(q, &index, p);
  ASSERT_EQ(r.ranked.size(), 1U);
  EXPECT_EQ(render_report(q, r, ReportFormat::text), read_text(golden / "one_candidate.txt"));
}

TEST(DeskQuery, RankingInvariantUnderFileOrder) {
  const fs::path src = bugslice::testing::data_dir() / "desk/corpus/drivers";
  TempDir a("order-a"), b("order-b"), ia("order-ia"), ib("order-ib");
  int n = 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(src)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    // Same files, opposite lexicographic order in the second corpus.
    fs::copy_file(f, a.path() / ("f" + std::to_string(100 + n) + ".c"));
    fs::copy_file(f, b.path() / ("f" + std::to_string(999 - n) + ".c"));
    ++n;
  }
  ReferenceEmbedder p;
  build_index(a.path(), ia.path(), p);
  build_index(b.path(), ib.path(), p);
  const auto index_a = load_index(ia.path());
  const auto index_b = load_index(ib.path());
  const auto q = prepare_query(parse_single(read_text(ntb_dir() / "buggy.c")),
                               parse_single(read_text(ntb_dir() / "fixed.c")), p);
  QueryConfig config;
  config.report_top_n = 1000;
  const auto ra = run_query(q, &index_a, p, config);
  const auto rb = run_query(q, &index_b, p, config);
  ASSERT_EQ(ra.ranked.size(), rb.ranked.size());
  for (std::size_t i = 0; i < ra.ranked.size(); ++i) {
    EXPECT_EQ(ra.ranked[i].score, rb.ranked[i].score) << i;
    const bool tied = (i > 0 && ra.ranked[i - 1].score == ra.ranked[i].score) ||
                      (i + 1 < ra.ranked.size() && ra.ranked[i + 1].score == ra.ranked[i].score);
    if (!tied) EXPECT_EQ(ra.ranked[i].name, rb.ranked[i].name) << i;
  }
}
