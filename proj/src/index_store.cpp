#include "bugslice/index_store.hpp"

#include "bugslice/error.hpp"
#include "bugslice/graphs.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace bugslice {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "vector blobs are written in native little-endian order");

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kFunctions = "functions.jsonl";
constexpr const char* kFunctionVectors = "function_vectors.vec";
constexpr const char* kMaskVectors = "mask_vectors.vec";
constexpr const char* kSliceVectors = "slice_vectors.vec";
constexpr const char* kJournal = "journal.jsonl";
constexpr const char* kJournalVectors = "journal.vec";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const fs::path& p, std::string_view bytes) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string_view as_bytes(const std::vector<float>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float)};
}

std::vector<float> floats_from(std::string_view bytes) {
  std::vector<float> out(bytes.size() / sizeof(float));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(float));
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json identity_json(const IndexManifest& m) {
  return {{"provider_name", m.provider.name},     {"provider_version", m.provider.version},
          {"dim", m.provider.dim},                {"max_tokens", m.provider.max_tokens},
          {"mask_token", m.provider.mask_token},  {"pooling_method", m.pooling_method},
          {"mask_context", m.mask_context},       {"slicing_strategy", m.slicing_strategy},
          {"coverage_metric", m.coverage_metric}, {"fuse_dot_access", m.fuse_dot_access},
          {"format_version", m.format_version}};
}

IndexManifest manifest_for(const EmbeddingProvider& provider, const IndexConfig& config) {
  IndexManifest m;
  m.provider = provider.info();
  m.mask_context = to_string(config.mask_context);
  m.slicing_strategy = to_string(config.slice.strategy);
  m.coverage_metric = to_string(config.slice.coverage);
  m.fuse_dot_access = config.parse.fuse_dot_access;
  return m;
}

json record_json(const FunctionRecord& r) {
  json masks = json::array();
  for (const auto& m : r.masks) {
    masks.push_back({{"stmt", m.ref.statement}, {"occ", m.ref.occurrence}, {"key", m.key}, {"vector", m.vector}});
  }
  json slices = json::array();
  for (const auto& s : r.slices) {
    slices.push_back(
        {{"stmt", s.ref.statement}, {"occ", s.ref.occurrence}, {"statements", s.statements}, {"vector", s.vector}});
  }
  return {{"id", r.id},         {"name", r.name},         {"file", r.file},     {"start_line", r.start_line},
          {"end_line", r.end_line}, {"hash", r.content_hash}, {"source", r.source}, {"vector", r.vector},
          {"masks", masks},     {"slices", slices}};
}

FunctionRecord record_from(const json& j) {
  FunctionRecord r;
  r.id = j.at("id").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.file = j.at("file").get<std::string>();
  r.start_line = j.at("start_line").get<int>();
  r.end_line = j.at("end_line").get<int>();
  r.content_hash = j.at("hash").get<std::string>();
  r.source = j.at("source").get<std::string>();
  r.vector = j.at("vector").get<std::size_t>();
  for (const auto& m : j.at("masks")) {
    r.masks.push_back({{m.at("stmt").get<int>(), m.at("occ").get<int>()}, m.at("key").get<std::string>(),
                       m.at("vector").get<std::size_t>()});
  }
  for (const auto& s : j.at("slices")) {
    r.slices.push_back({{s.at("stmt").get<int>(), s.at("occ").get<int>()}, s.at("statements").get<std::vector<int>>(),
                        s.at("vector").get<std::size_t>()});
  }
  return r;
}

// A function's record plus its own vectors: [function, masks..., slices...].
struct Computed {
  FunctionRecord record;
  std::vector<float> vectors;
};

std::string content_hash(const Function& f) {
  return fnv1a64_hex(f.file + '\n' + std::to_string(f.start_line) + '\n' + f.source_text);
}

Computed compute_function(const Function& fn, const EmbeddingProvider& provider, const IndexConfig& config) {
  Computed c;
  FunctionRecord& r = c.record;
  r.id = fn.id;
  r.name = fn.name;
  r.file = fn.file;
  r.start_line = fn.start_line;
  r.end_line = fn.end_line;
  r.content_hash = content_hash(fn);
  r.source = fn.source_text;

  std::size_t row = 0;
  auto append = [&](const EmbeddingVector& v) {
    c.vectors.insert(c.vectors.end(), v.begin(), v.end());
    return row++;
  };
  r.vector = append(sequence_embedding(provider, token_texts(fn.tokens())));

  const auto graphs = build_graphs(fn);
  const auto eligible = eligible_occurrences(fn);
  const PinpointOptions popt{PinpointEmbedding::mask, config.mask_context};
  for (const auto& ref : eligible) {
    const auto& occ = fn.statements[ref.statement].occurrences[ref.occurrence];
    r.masks.push_back({ref, occ.key, append(occurrence_vector(provider, fn, ref, popt))});
  }
  std::map<std::vector<int>, std::size_t> by_statements;
  std::vector<std::pair<OccurrenceRef, std::vector<int>>> slices;
  for (const auto& ref : eligible) {
    const auto& occ = fn.statements[ref.statement].occurrences[ref.occurrence];
    auto slice = customized_slice(fn, graphs, {ref.statement, occ.key}, config.slice);
    slices.emplace_back(ref, std::move(slice.statements));
  }
  // Slice vectors follow all mask vectors so the row layout is [f, masks, slices].
  for (auto& [ref, stmts] : slices) {
    auto it = by_statements.find(stmts);
    std::size_t v;
    if (it != by_statements.end()) {
      v = it->second;
    } else {
      v = append(sequence_embedding(provider, slice_tokens(fn, stmts)));
      by_statements.emplace(stmts, v);
    }
    r.slices.push_back({ref, std::move(stmts), v});
  }
  return c;
}

// Rows in Computed are local; Index rows are global. Converts one way or the other.
void place(Index& index, const Computed& c) {
  const std::size_t dim = static_cast<std::size_t>(index.function_vectors.dim());
  auto row = [&](std::size_t k) { return std::span<const float>(c.vectors.data() + k * dim, dim); };
  FunctionRecord r = c.record;
  r.vector = index.function_vectors.push(row(c.record.vector));
  for (auto& m : r.masks) m.vector = index.mask_vectors.push(row(m.vector));
  std::map<std::size_t, std::size_t> slice_rows;
  for (auto& s : r.slices) {
    auto it = slice_rows.find(s.vector);
    if (it == slice_rows.end()) it = slice_rows.emplace(s.vector, index.slice_vectors.push(row(s.vector))).first;
    s.vector = it->second;
  }
  index.functions.push_back(std::move(r));
}

Computed extract(const Index& index, const FunctionRecord& r) {
  Computed c;
  c.record = r;
  std::size_t row = 0;
  auto append = [&](std::span<const float> v) {
    c.vectors.insert(c.vectors.end(), v.begin(), v.end());
    return row++;
  };
  c.record.vector = append(index.function_vectors.at(r.vector));
  for (auto& m : c.record.masks) m.vector = append(index.mask_vectors.at(m.vector));
  std::map<std::size_t, std::size_t> rows;
  for (auto& s : c.record.slices) {
    auto it = rows.find(s.vector);
    if (it == rows.end()) it = rows.emplace(s.vector, append(index.slice_vectors.at(s.vector))).first;
    s.vector = it->second;
  }
  return c;
}

class Journal {
public:
  Journal(const fs::path& dir, const json& identity) : lines_(dir / kJournal), blob_(dir / kJournalVectors) {
    jl_.open(lines_, std::ios::binary | std::ios::trunc);
    jv_.open(blob_, std::ios::binary | std::ios::trunc);
    if (!jl_ || !jv_) throw Error(ErrorCode::io_error, "cannot open the build journal in " + dir.string());
    jl_ << json{{"identity", identity}}.dump() << '\n';
    jl_.flush();
  }

  void append(const Computed& c) {
    std::lock_guard lock(mu_);
    jv_.write(as_bytes(c.vectors).data(), static_cast<std::streamsize>(c.vectors.size() * sizeof(float)));
    jv_.flush();
    json j = record_json(c.record);
    j["journal_offset"] = offset_;
    j["journal_floats"] = c.vectors.size();
    offset_ += c.vectors.size();
    jl_ << j.dump() << '\n';
    jl_.flush();
  }

  void remove() {
    jl_.close();
    jv_.close();
    fs::remove(lines_);
    fs::remove(blob_);
  }

  // Entries of an interrupted build with a matching identity; a torn tail is dropped.
  static std::vector<Computed> recover(const fs::path& dir, const json& identity) {
    std::vector<Computed> out;
    if (!fs::exists(dir / kJournal) || !fs::exists(dir / kJournalVectors)) return out;
    std::ifstream in(dir / kJournal, std::ios::binary);
    const std::string blob = read_file(dir / kJournalVectors);
    std::string line;
    if (!std::getline(in, line)) return out;
    try {
      if (json::parse(line).at("identity") != identity) return out;
    } catch (const json::exception&) {
      return out;
    }
    while (std::getline(in, line)) {
      try {
        const json j = json::parse(line);
        const std::size_t off = j.at("journal_offset").get<std::size_t>();
        const std::size_t n = j.at("journal_floats").get<std::size_t>();
        if ((off + n) * sizeof(float) > blob.size()) break;
        Computed c;
        c.record = record_from(j);
        c.vectors = floats_from(std::string_view(blob).substr(off * sizeof(float), n * sizeof(float)));
        out.push_back(std::move(c));
      } catch (const json::exception&) {
        break;
      }
    }
    return out;
  }

private:
  fs::path lines_, blob_;
  std::ofstream jl_, jv_;
  std::mutex mu_;
  std::size_t offset_ = 0;
};

void write_index(const fs::path& dir, Index& index) {
  std::string functions;
  for (const auto& r : index.functions) functions += record_json(r).dump() + '\n';
  const std::map<std::string, std::string> blobs = {
      {kFunctions, functions},
      {kFunctionVectors, std::string(as_bytes(index.function_vectors.data()))},
      {kMaskVectors, std::string(as_bytes(index.mask_vectors.data()))},
      {kSliceVectors, std::string(as_bytes(index.slice_vectors.data()))},
  };
  json files = json::object();
  for (const auto& [name, bytes] : blobs) {
    write_file_atomic(dir / name, bytes);
    files[name] = {{"bytes", bytes.size()}, {"fnv1a64", fnv1a64_hex(bytes)}};
  }
  const auto& m = index.manifest;
  json manifest = identity_json(m);
  manifest["corpus_root"] = m.corpus_root;
  manifest["created_at"] = m.created_at;
  manifest["screen_top_k"] = m.screen_top_k;
  manifest["counts"] = {{"functions", m.function_count}, {"masks", m.mask_count}, {"slices", m.slice_count}};
  manifest["files"] = files;
  manifest["manifest_fnv1a64"] = fnv1a64_hex(manifest.dump());
  write_file_atomic(dir / kManifest, manifest.dump(2) + '\n');
}

} // namespace

std::span<const float> VectorTable::at(std::size_t row) const {
  if (row >= size()) throw Error(ErrorCode::corrupt_index, "vector row " + std::to_string(row) + " out of range");
  return {data_.data() + row * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
}

std::size_t VectorTable::push(std::span<const float> v) {
  if (static_cast<int>(v.size()) != dim_) throw Error(ErrorCode::dim_mismatch, "vector length differs from table dim");
  data_.insert(data_.end(), v.begin(), v.end());
  return size() - 1;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const FunctionRecord* Index::find(const std::string& id) const {
  for (const auto& r : functions) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

Function Index::parse(const FunctionRecord& record) const {
  ParseOptions opts;
  opts.fuse_dot_access = manifest.fuse_dot_access;
  auto extracted = extract_functions(record.source, record.file, opts, record.start_line);
  for (auto& f : extracted.functions) {
    if (f.id == record.id) return std::move(f);
  }
  throw Error(ErrorCode::corrupt_index, "stored source of " + record.id + " does not re-parse");
}

std::vector<EmbeddingVector> Index::mask_vectors_of(const FunctionRecord& record) const {
  std::vector<EmbeddingVector> out;
  out.reserve(record.masks.size());
  for (const auto& m : record.masks) {
    const auto v = mask_vectors.at(m.vector);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

void check_provider(const IndexManifest& manifest, const ProviderInfo& provider) {
  const auto& p = manifest.provider;
  if (p.name != provider.name || p.version != provider.version || p.dim != provider.dim ||
      p.max_tokens != provider.max_tokens || p.mask_token != provider.mask_token) {
    throw Error(ErrorCode::manifest_mismatch, "index was built with " + p.name + " " + p.version + " (dim " +
                                                  std::to_string(p.dim) + "), query uses " + provider.name + " " +
                                                  provider.version + " (dim " + std::to_string(provider.dim) + ")");
  }
}

BuildStats build_index(const fs::path& corpus_root, const fs::path& out_dir, const EmbeddingProvider& provider,
                       const IndexConfig& config) {
  if (!fs::is_directory(corpus_root)) throw Error(ErrorCode::io_error, corpus_root.string() + " is not a directory");
  fs::create_directories(out_dir);
  BuildStats stats;

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(corpus_root)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (std::find(config.extensions.begin(), config.extensions.end(), ext) != config.extensions.end()) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<Function> functions;
  for (const auto& path : files) {
    const std::string rel = fs::relative(path, corpus_root).generic_string();
    try {
      auto extracted = extract_functions(read_file(path), rel, config.parse);
      stats.diagnostics.insert(stats.diagnostics.end(), extracted.diagnostics.begin(), extracted.diagnostics.end());
      for (auto& f : extracted.functions) functions.push_back(std::move(f));
    } catch (const Error& e) {
      stats.diagnostics.push_back({rel, 0, Severity::error, e.what()});
    }
  }
  stats.functions = functions.size();

  IndexManifest manifest = manifest_for(provider, config);
  const json identity = identity_json(manifest);

  // Earlier results: a complete index first, then an interrupted build's journal.
  std::map<std::string, Computed> prior;
  if (fs::exists(out_dir / kManifest)) {
    try {
      const Index old = load_index(out_dir, &manifest.provider);
      if (identity_json(old.manifest) == identity) {
        for (const auto& r : old.functions) prior.emplace(r.id, extract(old, r));
      }
    } catch (const Error& e) {
      spdlog::warn("ignoring previous index in {}: {}", out_dir.string(), e.what());
    }
  }
  for (auto& c : Journal::recover(out_dir, identity)) prior.insert_or_assign(c.record.id, std::move(c));

  Journal journal(out_dir, identity);
  std::vector<std::optional<Computed>> results(functions.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < functions.size(); ++i) {
    auto it = prior.find(functions[i].id);
    if (it != prior.end() && it->second.record.content_hash == content_hash(functions[i])) {
      journal.append(it->second);
      results[i] = std::move(it->second);
      ++stats.reused;
    } else {
      todo.push_back(i);
    }
  }
  if (fs::exists(out_dir / kManifest)) fs::remove(out_dir / kManifest);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  std::exception_ptr fatal;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size() || abort) return;
      const Function& fn = functions[todo[k]];
      try {
        Computed c = compute_function(fn, provider, config);
        journal.append(c);
        std::lock_guard lock(mu);
        results[todo[k]] = std::move(c);
        if (++stats.embedded % 50 == 0) spdlog::info("indexed {}/{} functions", stats.embedded, todo.size());
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (e.code() == ErrorCode::provider_unavailable) {
          if (!fatal) fatal = std::current_exception();
          abort = true;
          return;
        }
        stats.diagnostics.push_back({fn.file, fn.start_line, Severity::error, std::string("skipped: ") + e.what()});
        spdlog::warn("{}: {}", fn.id, e.what());
      }
    }
  };
  const int jobs = std::max(1, config.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (fatal) std::rethrow_exception(fatal);

  Index index;
  index.manifest = manifest;
  index.manifest.corpus_root = fs::absolute(corpus_root).lexically_normal().generic_string();
  index.manifest.created_at = utc_now();
  index.manifest.screen_top_k = config.screen_top_k;
  const int dim = manifest.provider.dim;
  index.function_vectors = VectorTable(dim);
  index.mask_vectors = VectorTable(dim);
  index.slice_vectors = VectorTable(dim);
  std::vector<const Computed*> ordered;
  for (const auto& r : results) {
    if (r) ordered.push_back(&*r);
  }
  std::sort(ordered.begin(), ordered.end(), [](const Computed* a, const Computed* b) {
    return std::tie(a->record.file, a->record.start_line, a->record.id) <
           std::tie(b->record.file, b->record.start_line, b->record.id);
  });
  for (const Computed* c : ordered) place(index, *c);
  index.manifest.function_count = index.functions.size();
  for (const auto& r : index.functions) {
    index.manifest.mask_count += r.masks.size();
    index.manifest.slice_count += r.slices.size();
  }
  stats.masks = index.manifest.mask_count;
  stats.slices = index.manifest.slice_count;
  write_index(out_dir, index);
  journal.remove();
  spdlog::info("index written to {}: {} functions ({} reused), {} masks, {} slices", out_dir.string(),
               index.functions.size(), stats.reused, stats.masks, stats.slices);
  return stats;
}

Index load_index(const fs::path& dir, const ProviderInfo* expected) {
  if (!fs::exists(dir / kManifest)) throw Error(ErrorCode::corrupt_index, "no manifest in " + dir.string());
  json mj;
  try {
    const std::string text = read_file(dir / kManifest);
    mj = json::parse(text);
    // Written by us in one canonical form; any other byte sequence is damage.
    if (text != mj.dump(2) + '\n') throw Error(ErrorCode::corrupt_index, "manifest is not in canonical form");
    const std::string sum = mj.at("manifest_fnv1a64").get<std::string>();
    mj.erase("manifest_fnv1a64");
    if (fnv1a64_hex(mj.dump()) != sum) throw Error(ErrorCode::corrupt_index, "manifest fails its checksum");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt_index, std::string("unreadable manifest: ") + e.what());
  }

  Index index;
  std::map<std::string, std::string> blobs;
  try {
    auto& m = index.manifest;
    m.format_version = mj.at("format_version").get<int>();
    if (m.format_version != IndexManifest{}.format_version) {
      throw Error(ErrorCode::corrupt_index, "unsupported index format " + std::to_string(m.format_version));
    }
    m.provider.name = mj.at("provider_name").get<std::string>();
    m.provider.version = mj.at("provider_version").get<std::string>();
    m.provider.dim = mj.at("dim").get<int>();
    m.provider.max_tokens = mj.at("max_tokens").get<int>();
    m.provider.mask_token = mj.at("mask_token").get<std::string>();
    m.pooling_method = mj.at("pooling_method").get<std::string>();
    m.mask_context = mj.at("mask_context").get<std::string>();
    m.slicing_strategy = mj.at("slicing_strategy").get<std::string>();
    m.coverage_metric = mj.at("coverage_metric").get<std::string>();
    m.fuse_dot_access = mj.at("fuse_dot_access").get<bool>();
    m.corpus_root = mj.at("corpus_root").get<std::string>();
    m.created_at = mj.at("created_at").get<std::string>();
    m.screen_top_k = mj.value("screen_top_k", std::size_t{1000});
    m.function_count = mj.at("counts").at("functions").get<std::size_t>();
    m.mask_count = mj.at("counts").at("masks").get<std::size_t>();
    m.slice_count = mj.at("counts").at("slices").get<std::size_t>();
    for (const char* name : {kFunctions, kFunctionVectors, kMaskVectors, kSliceVectors}) {
      const auto& f = mj.at("files").at(name);
      if (!fs::exists(dir / name)) throw Error(ErrorCode::corrupt_index, std::string(name) + " is missing");
      std::string bytes = read_file(dir / name);
      if (bytes.size() != f.at("bytes").get<std::size_t>() || fnv1a64_hex(bytes) != f.at("fnv1a64").get<std::string>()) {
        throw Error(ErrorCode::corrupt_index, std::string(name) + " fails its size or checksum check");
      }
      blobs.emplace(name, std::move(bytes));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt_index, std::string("malformed manifest: ") + e.what());
  }
  if (expected) check_provider(index.manifest, *expected);

  const int dim = index.manifest.provider.dim;
  const std::size_t row_bytes = static_cast<std::size_t>(dim) * sizeof(float);
  auto table = [&](const char* name) {
    const std::string& bytes = blobs.at(name);
    if (dim <= 0 || bytes.size() % row_bytes != 0) {
      throw Error(ErrorCode::corrupt_index, std::string(name) + " is not a whole number of vectors");
    }
    VectorTable t(dim);
    t.data() = floats_from(bytes);
    return t;
  };
  index.function_vectors = table(kFunctionVectors);
  index.mask_vectors = table(kMaskVectors);
  index.slice_vectors = table(kSliceVectors);

  std::istringstream lines(blobs.at(kFunctions));
  std::string line;
  try {
    while (std::getline(lines, line)) {
      if (!line.empty()) index.functions.push_back(record_from(json::parse(line)));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt_index, std::string("malformed function record: ") + e.what());
  }

  const auto& m = index.manifest;
  std::size_t masks = 0, slices = 0;
  for (const auto& r : index.functions) {
    masks += r.masks.size();
    slices += r.slices.size();
    bool ok = r.vector < index.function_vectors.size() && r.masks.size() == r.slices.size();
    for (const auto& e : r.masks) ok = ok && e.vector < index.mask_vectors.size();
    for (const auto& e : r.slices) ok = ok && e.vector < index.slice_vectors.size();
    if (!ok) throw Error(ErrorCode::corrupt_index, "record " + r.id + " references missing vectors");
  }
  if (index.functions.size() != m.function_count || masks != m.mask_count || slices != m.slice_count ||
      index.function_vectors.size() != m.function_count || index.mask_vectors.size() != m.mask_count) {
    throw Error(ErrorCode::corrupt_index, "record counts disagree with the manifest");
  }
  return index;
}

std::vector<ScreenHit> screen_top_k(const Index& index, std::span<const float> seed_vector, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "screen k must be at least 1");
  std::vector<ScreenHit> hits;
  hits.reserve(index.functions.size());
  for (std::size_t i = 0; i < index.functions.size(); ++i) {
    const auto& r = index.functions[i];
    hits.push_back({i, r.id, cosine_similarity(seed_vector, index.function_vectors.at(r.vector))});
  }
  auto order = [](const ScreenHit& a, const ScreenHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  const std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(n), hits.end(), order);
  hits.resize(n);
  return hits;
}

} // namespace bugslice
