// bugslice: index a C corpus, then query it with a known bug fix.
#include "bugslice/error.hpp"
#include "bugslice/graphs.hpp"
#include "bugslice/index_store.hpp"
#include "bugslice/query.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace bugslice;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec) {
  if (spec == "reference") return std::make_unique<ReferenceEmbedder>();
  std::string url = spec;
  if (url.starts_with("remote:")) url = url.substr(7);
  if (url.starts_with("http://") || url.starts_with("https://")) return make_remote_provider(url);
  throw Error(ErrorCode::invalid_argument, "provider must be 'reference' or an http(s) URL, got '" + spec + "'");
}

template <class T, class Parse>
T parse_flag(const std::string& text, Parse parse, const char* flag) {
  auto v = parse(text);
  if (!v) throw Error(ErrorCode::invalid_argument, std::string("unknown value '") + text + "' for " + flag);
  return *v;
}

std::optional<MaskContext> parse_mask_context(std::string_view t) {
  if (t == "statement") return MaskContext::statement;
  if (t == "function") return MaskContext::function;
  return std::nullopt;
}

std::optional<CoverageMetric> parse_coverage(std::string_view t) {
  if (t == "statements") return CoverageMetric::statements;
  if (t == "variables") return CoverageMetric::variables;
  return std::nullopt;
}

// The id a file would get inside the index, so the seed can be excluded from its own ranking.
std::string origin_for(const std::string& path, const std::string& corpus_root) {
  if (corpus_root.empty()) return path;
  std::error_code ec;
  const fs::path abs = fs::weakly_canonical(fs::absolute(path), ec);
  const fs::path root = fs::weakly_canonical(fs::path(corpus_root), ec);
  const auto rel = abs.lexically_relative(root);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return path;
}

// An empty name selects the only function in the file.
const Function& pick_function(const std::vector<Function>& functions, const std::string& name, const std::string& where) {
  if (name.empty()) {
    if (functions.size() != 1) {
      throw Error(ErrorCode::invalid_argument,
                  where + " defines " + std::to_string(functions.size()) + " functions; pick one with --function");
    }
    return functions.front();
  }
  const Function* f = find_function(functions, name);
  if (!f) throw Error(ErrorCode::invalid_argument, "function '" + name + "' not found in " + where);
  return *f;
}

Function load_function(const std::string& path, const std::string& origin, const std::string& name,
                       const ParseOptions& opts, std::string* text = nullptr) {
  const std::string src = slurp(path);
  if (text) *text = src;
  return pick_function(extract_functions(src, origin, opts).functions, name, path);
}

std::vector<SeedPair> parse_criteria(const Function& fn, const std::vector<std::string>& specs) {
  std::vector<SeedPair> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "criterion must be LINE:VAR, got " + s);
    const int line = std::stoi(s.substr(0, colon));
    const std::string key = s.substr(colon + 1);
    int found = -1;
    for (const auto& st : fn.statements) {
      if (st.line == line && st.has_key(key)) {
        found = st.index;
        break;
      }
    }
    if (found < 0) throw Error(ErrorCode::criterion_mismatch, "no statement on line " + std::to_string(line) + " uses " + key);
    out.push_back({found, key});
  }
  return out;
}

struct SeedArgs {
  std::string buggy, fixed, diff, function;
  std::vector<std::string> criteria;
};

Query build_query(const SeedArgs& a, const std::string& origin, const ParseOptions& popts,
                  const EmbeddingProvider& provider, const QueryConfig& qc) {
  std::string buggy_text;
  const Function buggy = load_function(a.buggy, origin, a.function, popts, &buggy_text);
  if (!a.criteria.empty()) return prepare_query(buggy, parse_criteria(buggy, a.criteria), provider, qc);
  std::string fixed_text;
  if (!a.fixed.empty()) {
    fixed_text = slurp(a.fixed);
  } else if (!a.diff.empty()) {
    fixed_text = apply_unified_diff(buggy_text, slurp(a.diff));
  } else {
    throw Error(ErrorCode::invalid_argument, "give --fixed, --diff or at least one --criterion");
  }
  const auto extracted = extract_functions(fixed_text, origin, popts);
  const std::string& name = a.function.empty() ? buggy.name : a.function;
  return prepare_query(buggy, pick_function(extracted.functions, name, "the fixed version"), provider, qc);
}

} // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("bugslice"));
  spdlog::set_pattern("%^%l%$: %v");

  CLI::App app{"Find functions that may repeat a known bug."};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress");

  // index
  auto* index_cmd = app.add_subcommand("index", "Precompute embeddings and slices for a corpus");
  std::string corpus, out, provider_spec = "reference", strategy = "default", coverage = "statements",
                           mask_ctx = "statement", diag_path;
  std::size_t index_topk = 1000;
  int jobs = 1;
  bool no_fuse_dot = false;
  index_cmd->add_option("--corpus", corpus, "Directory of C sources")->required()->check(CLI::ExistingDirectory);
  index_cmd->add_option("--out", out, "Index directory")->required();
  index_cmd->add_option("--provider", provider_spec, "'reference' or the embedding service URL");
  index_cmd->add_option("--screen-top-k", index_topk, "Default screening width recorded for queries");
  index_cmd->add_option("--strategy", strategy, "default|strict-one-step|unconstrained");
  index_cmd->add_option("--coverage-metric", coverage, "statements|variables");
  index_cmd->add_option("--mask-context", mask_ctx, "statement|function");
  index_cmd->add_option("-j,--jobs", jobs, "Worker threads");
  index_cmd->add_flag("--no-fuse-dot", no_fuse_dot, "Treat a.b as two variables");
  index_cmd->add_option("--diagnostics", diag_path, "Write parse diagnostics as JSON lines");

  // query
  auto* query_cmd = app.add_subcommand("query", "Rank indexed functions against a known bug");
  std::string index_dir, pin_mode = "mask", target_mode = "slice", format = "text";
  std::size_t top_n = 10, query_topk = 0;
  SeedArgs seed;
  query_cmd->add_option("--index", index_dir, "Index directory")->required();
  query_cmd->add_option("--buggy", seed.buggy, "Buggy source file")->required()->check(CLI::ExistingFile);
  query_cmd->add_option("--fixed", seed.fixed, "Fixed source file")->check(CLI::ExistingFile);
  query_cmd->add_option("--diff", seed.diff, "Unified diff turning --buggy into the fix")->check(CLI::ExistingFile);
  query_cmd->add_option("--function", seed.function, "Name of the buggy function (default: the only one)");
  query_cmd->add_option("--criterion", seed.criteria, "LINE:VAR criterion, skips diff analysis");
  query_cmd->add_option("--top-n", top_n, "Candidates to report");
  query_cmd->add_option("--screen-top-k", query_topk, "Functions kept by whole-function screening");
  query_cmd->add_option("--strategy", strategy, "default|strict-one-step|unconstrained");
  query_cmd->add_option("--coverage-metric", coverage, "statements|variables");
  query_cmd->add_option("--pinpoint-embedding", pin_mode, "mask|aggregate");
  query_cmd->add_option("--target-slice", target_mode, "slice|direct-mask-mapping");
  query_cmd->add_option("--format", format, "text|json");
  query_cmd->add_option("--provider", provider_spec, "'reference' or the embedding service URL");
  query_cmd->add_option("-j,--jobs", jobs, "Worker threads");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "Show the seed signature, query slice and graphs");
  SeedArgs iseed;
  bool dot = false;
  inspect_cmd->add_option("--buggy", iseed.buggy, "Buggy source file")->required()->check(CLI::ExistingFile);
  inspect_cmd->add_option("--fixed", iseed.fixed, "Fixed source file")->check(CLI::ExistingFile);
  inspect_cmd->add_option("--diff", iseed.diff, "Unified diff")->check(CLI::ExistingFile);
  inspect_cmd->add_option("--function", iseed.function, "Function name (default: the only one)");
  inspect_cmd->add_option("--criterion", iseed.criteria, "LINE:VAR criterion");
  inspect_cmd->add_option("--strategy", strategy, "default|strict-one-step|unconstrained");
  inspect_cmd->add_flag("--dot", dot, "Print the CFG and DDG in Graphviz format");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    ParseOptions popts;
    popts.fuse_dot_access = !no_fuse_dot;
    SliceOptions sopts;
    sopts.strategy = parse_flag<SlicingStrategy>(strategy, parse_slicing_strategy, "--strategy");
    sopts.coverage = parse_flag<CoverageMetric>(coverage, parse_coverage, "--coverage-metric");

    if (*index_cmd) {
      const auto provider = make_provider(provider_spec);
      IndexConfig cfg;
      cfg.parse = popts;
      cfg.slice = sopts;
      cfg.mask_context = parse_flag<MaskContext>(mask_ctx, parse_mask_context, "--mask-context");
      cfg.jobs = jobs;
      cfg.screen_top_k = index_topk;
      const auto stats = build_index(corpus, out, *provider, cfg);
      if (!diag_path.empty()) {
        std::ofstream d(diag_path);
        write_diagnostics_jsonl(d, stats.diagnostics);
      }
      std::cout << "functions " << stats.functions << " (embedded " << stats.embedded << ", reused " << stats.reused
                << "), masks " << stats.masks << ", slices " << stats.slices << ", diagnostics "
                << stats.diagnostics.size() << '\n';
      return 0;
    }

    if (*query_cmd) {
      const auto provider = make_provider(provider_spec);
      const Index index = load_index(index_dir, &provider->info());
      QueryConfig qc;
      qc.slice = sopts;
      qc.pinpoint.embedding = parse_flag<PinpointEmbedding>(pin_mode, parse_pinpoint_embedding, "--pinpoint-embedding");
      qc.pinpoint.context = index.manifest.mask_context == "function" ? MaskContext::function : MaskContext::statement;
      qc.target_slice = parse_flag<TargetSliceMode>(target_mode, parse_target_slice_mode, "--target-slice");
      qc.screen_top_k = query_topk > 0 ? query_topk : index.manifest.screen_top_k;
      qc.report_top_n = top_n;
      qc.jobs = jobs;
      if (format != "text" && format != "json") throw Error(ErrorCode::invalid_argument, "--format must be text or json");
      popts.fuse_dot_access = index.manifest.fuse_dot_access;
      const Query q = build_query(seed, origin_for(seed.buggy, index.manifest.corpus_root), popts, *provider, qc);
      const QueryResult result = run_query(q, &index, *provider, qc);
      for (const auto& d : result.diagnostics) spdlog::info("{}:{}: {}", d.file, d.line, d.message);
      std::cout << render_report(q, result, format == "json" ? ReportFormat::json : ReportFormat::text);
      return 0;
    }

    if (*inspect_cmd) {
      ReferenceEmbedder provider;
      QueryConfig qc;
      qc.slice = sopts;
      const Query q = build_query(iseed, iseed.buggy, popts, provider, qc);
      const Function& f = q.seed_function;
      std::cout << "function " << f.id << " (" << f.statements.size() << " statements)\n";
      std::cout << "key variables:";
      for (const auto& k : q.key_variables) std::cout << ' ' << k;
      std::cout << "\nseed pairs:\n";
      for (const auto& p : q.signature.pairs) {
        std::cout << "  line " << f.statements[p.statement].line << "  " << p.key << "  | "
                  << f.statements[p.statement].text() << '\n';
      }
      for (const auto& d : q.signature.diagnostics) std::cout << "  note: " << d.message << '\n';
      std::cout << "query slice:\n";
      for (int s : q.query_slice.statements) {
        std::cout << "  " << f.statements[s].line << ": " << f.statements[s].text() << '\n';
      }
      if (dot) std::cout << to_dot(f, q.seed_graphs);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
