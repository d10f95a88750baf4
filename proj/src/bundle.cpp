#include "prockit/bundle.hpp"

#include <set>

#include "json_io.hpp"
#include "prockit/error.hpp"

namespace prockit {

namespace {

constexpr int kBundleVersion = 1;

template <typename F>
auto with_path(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace

std::string article_search_text(const Article& article) {
  std::string text = article.title;
  for (const Step* s : article.steps()) {
    text += '\n';
    text += s->headline;
  }
  return text;
}

IndexBundle build_index_bundle(const Corpus& corpus, const Embedder& embedder,
                               const std::vector<std::string>& candidate_fields,
                               Bm25Params params) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no articles");
  std::vector<std::pair<std::string, std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& a : corpus.articles()) docs.emplace_back(a.id, article_search_text(a));
  return {InvertedIndex::build(docs, params), SuggestIndex::build(corpus, embedder, candidate_fields)};
}

void save_index_bundle(const IndexBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, dir.string() + ": " + ec.message());
  Json manifest = {{"version", kBundleVersion},
                   {"search", "search.idx"},
                   {"embedder", "embedder.cfg"},
                   {"candidates", "candidates.vec"},
                   {"headlines", "headlines.vec"},
                   {"candidate_fields", bundle.steps.fields()},
                   {"embedder_kind", std::string(embedder_kind_name(bundle.steps.embedder().kind()))},
                   {"documents", bundle.search.doc_count()},
                   {"steps", bundle.steps.candidates().size()}};
  bundle.search.save(dir / "search.idx");
  persist::write_file(dir / "embedder.cfg", bundle.steps.embedder().serialize());
  bundle.steps.candidates().save(dir / "candidates.vec");
  bundle.steps.headlines().save(dir / "headlines.vec");
  persist::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

IndexBundle load_index_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const Json manifest = with_path(manifest_path, [&] {
    const auto text = persist::read_file(manifest_path);
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw Error(ErrorCode::kConfig, "manifest is not a JSON object");
    if (j.value("version", 0) != kBundleVersion)
      throw Error(ErrorCode::kConfig, "unsupported index version");
    return j;
  });
  auto file = [&](const char* key) {
    const auto it = manifest.find(key);
    if (it == manifest.end() || !it->is_string())
      throw Error(ErrorCode::kConfig, manifest_path.string() + ": missing \"" + key + "\"");
    return dir / it->get<std::string>();
  };
  std::vector<std::string> fields;
  const auto f = manifest.find("candidate_fields");
  if (f == manifest.end() || !f->is_array())
    throw Error(ErrorCode::kConfig, manifest_path.string() + ": missing \"candidate_fields\"");
  for (const auto& x : *f) {
    if (!x.is_string()) throw Error(ErrorCode::kConfig, manifest_path.string() + ": bad candidate field");
    fields.push_back(x.get<std::string>());
  }

  const auto search_path = file("search");
  const auto embedder_path = file("embedder");
  const auto cand_path = file("candidates");
  const auto head_path = file("headlines");
  IndexBundle bundle;
  bundle.search = with_path(search_path, [&] { return InvertedIndex::load(search_path); });
  auto embedder = with_path(embedder_path,
                            [&] { return Embedder::deserialize(persist::read_file(embedder_path)); });
  auto cand = with_path(cand_path, [&] { return VectorIndex::load(cand_path); });
  auto head = with_path(head_path, [&] { return VectorIndex::load(head_path); });
  bundle.steps = with_path(dir, [&] {
    return SuggestIndex::assemble(std::move(embedder), std::move(cand), std::move(head), fields);
  });
  return bundle;
}

void check_index_bundle(const IndexBundle& bundle, const Corpus& corpus) {
  std::vector<std::string> ids;
  for (const auto& a : corpus.articles()) ids.push_back(a.id);
  if (bundle.search.doc_ids() != ids)
    throw Error(ErrorCode::kConfig, "search index was built from a different corpus");
  std::size_t steps = 0;
  for (const auto& a : corpus.articles()) steps += a.step_count();
  const auto& cand = bundle.steps.candidates();
  if (cand.size() != steps)
    throw Error(ErrorCode::kConfig, "step vectors were built from a different corpus");
  for (const auto& id : cand.ids())
    if (!corpus.find_step(id))
      throw Error(ErrorCode::kConfig, "step vectors reference unknown step '" + id + "'");
}

}  // namespace prockit
