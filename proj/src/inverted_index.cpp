#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "lexicon.hpp"
#include "prockit/error.hpp"
#include "prockit/text.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

namespace {

constexpr std::string_view kMagic = "PROCKIT-BM25 1";

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::kValidation, "bad number '" + std::string(s) + "'");
  return value;
}

// Query term -> weight, in term order so score sums are reproducible.
std::map<std::string, double> query_weights(std::string_view query,
                                            const QueryOptions& options) {
  const auto tokens = text::tokenize(query);
  if (tokens.empty())
    throw Error(ErrorCode::kEmptyQuery, "query has no tokens");
  std::map<std::string, double> weights;
  for (const auto& t : tokens) weights[t] += 1.0;
  if (options.emphasize_verb_object) {
    weights[tokens.front()] *= 2.0;
    for (std::size_t i = tokens.size(); i-- > 1;) {
      if (!lexicon::is_function_word(tokens[i])) {
        if (tokens[i] != tokens.front()) weights[tokens[i]] *= 2.0;
        break;
      }
    }
  }
  return weights;
}

}  // namespace

InvertedIndex InvertedIndex::build(
    const std::vector<std::pair<std::string, std::string>>& docs,
    Bm25Params params) {
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return docs[a].first < docs[b].first;
  });
  InvertedIndex index;
  index.params_ = params;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& [id, body] = docs[order[rank]];
    if (rank > 0 && index.doc_ids_.back() == id)
      throw Error(ErrorCode::kDuplicateId, "duplicate document id '" + id + "'");
    const auto tokens = text::tokenize(body);
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf)
      index.postings_[term].push_back({static_cast<std::uint32_t>(rank), count});
    index.doc_ids_.push_back(id);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
  }
  index.finish();
  return index;
}

void InvertedIndex::finish() {
  double total = 0.0;
  for (auto len : doc_lengths_) total += len;
  avg_doc_length_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

std::size_t InvertedIndex::document_frequency(const std::string& term) const {
  const auto* p = postings(term);
  return p ? p->size() : 0;
}

const std::vector<InvertedIndex::Posting>* InvertedIndex::postings(
    const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double InvertedIndex::idf(std::size_t df) const {
  const double n = static_cast<double>(doc_count());
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
  return params_.k1 == other.params_.k1 && params_.b == other.params_.b &&
         doc_ids_ == other.doc_ids_ && doc_lengths_ == other.doc_lengths_ &&
         postings_ == other.postings_;
}

std::vector<ScoredDoc> bm25_score_all(const InvertedIndex& index,
                                      std::string_view query,
                                      const QueryOptions& options) {
  const auto weights = query_weights(query, options);
  const double k1 = index.params().k1;
  const double b = index.params().b;
  const double avgdl = index.avg_doc_length();
  std::vector<double> scores(index.doc_count(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto& [term, weight] : weights) {
    const auto* plist = index.postings(term);
    if (!plist) continue;
    const double idf = index.idf(plist->size());
    for (const auto& p : *plist) {
      const double tf = p.tf;
      const double dl = index.doc_length(p.doc);
      const double norm = avgdl > 0.0 ? dl / avgdl : 0.0;
      const double s = weight * idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm));
      if (scores[p.doc] == 0.0) touched.push_back(p.doc);
      scores[p.doc] += s;
    }
  }
  std::vector<ScoredDoc> out;
  out.reserve(touched.size());
  // Postings are doc-ordered per term, so `touched` needs sorting only to make
  // the tie order explicit.
  std::sort(touched.begin(), touched.end());
  for (auto d : touched)
    if (scores[d] > 0.0) out.push_back({index.doc_ids()[d], scores[d]});
  std::stable_sort(out.begin(), out.end(), [](const ScoredDoc& x, const ScoredDoc& y) {
    return x.score > y.score;
  });
  return out;
}

std::vector<ScoredDoc> bm25_search(const InvertedIndex& index,
                                   std::string_view query, std::size_t k,
                                   const QueryOptions& options) {
  if (k == 0) throw Error(ErrorCode::kUsage, "k must be at least 1");
  auto all = bm25_score_all(index, query, options);
  if (all.size() > k) all.resize(k);
  return all;
}

std::string InvertedIndex::serialize() const {
  std::string body;
  body += "params k1=" + text::format_double(params_.k1) +
          " b=" + text::format_double(params_.b) + "\n";
  body += "docs " + std::to_string(doc_ids_.size()) + "\n";
  for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
    if (doc_ids_[i].find_first_of("\t\n") != std::string::npos)
      throw Error(ErrorCode::kValidation, "document id contains tab or newline");
    body += doc_ids_[i] + "\t" + std::to_string(doc_lengths_[i]) + "\n";
  }
  std::vector<const std::string*> terms;
  terms.reserve(postings_.size());
  for (const auto& [t, _] : postings_) terms.push_back(&t);
  std::sort(terms.begin(), terms.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  body += "terms " + std::to_string(terms.size()) + "\n";
  for (const auto* t : terms) {
    const auto& plist = postings_.at(*t);
    body += *t + "\t" + std::to_string(plist.size()) + "\t";
    for (std::size_t i = 0; i < plist.size(); ++i) {
      if (i) body.push_back(' ');
      body += std::to_string(plist[i].doc) + ":" + std::to_string(plist[i].tf);
    }
    body.push_back('\n');
  }
  return persist::seal(std::move(body), kMagic);
}

InvertedIndex InvertedIndex::deserialize(std::string_view data) {
  const auto lines = persist::open(data, kMagic);
  std::size_t li = 0;
  auto next = [&]() -> const std::string& {
    if (li >= lines.size()) throw Error(ErrorCode::kValidation, "truncated index");
    return lines[li++];
  };
  InvertedIndex index;
  {
    const auto parts = split(next(), ' ');
    if (parts.size() != 3 || parts[0] != "params" || parts[1].rfind("k1=", 0) != 0 ||
        parts[2].rfind("b=", 0) != 0)
      throw Error(ErrorCode::kValidation, "bad params line");
    index.params_.k1 = parse_number<double>(std::string_view(parts[1]).substr(3));
    index.params_.b = parse_number<double>(std::string_view(parts[2]).substr(2));
  }
  auto count_line = [&](std::string_view label) {
    const auto parts = split(next(), ' ');
    if (parts.size() != 2 || parts[0] != label)
      throw Error(ErrorCode::kValidation, "expected '" + std::string(label) + "' line");
    return parse_number<std::size_t>(parts[1]);
  };
  const std::size_t n_docs = count_line("docs");
  for (std::size_t i = 0; i < n_docs; ++i) {
    const auto parts = split(next(), '\t');
    if (parts.size() != 2) throw Error(ErrorCode::kValidation, "bad document line");
    index.doc_ids_.push_back(parts[0]);
    index.doc_lengths_.push_back(parse_number<std::uint32_t>(parts[1]));
  }
  const std::size_t n_terms = count_line("terms");
  for (std::size_t i = 0; i < n_terms; ++i) {
    const auto parts = split(next(), '\t');
    if (parts.size() != 3) throw Error(ErrorCode::kValidation, "bad term line");
    std::vector<Posting> plist;
    for (const auto& entry : split(parts[2], ' ')) {
      const auto colon = entry.find(':');
      if (colon == std::string::npos) throw Error(ErrorCode::kValidation, "bad posting");
      Posting p{parse_number<std::uint32_t>(std::string_view(entry).substr(0, colon)),
                parse_number<std::uint32_t>(std::string_view(entry).substr(colon + 1))};
      if (p.doc >= n_docs) throw Error(ErrorCode::kValidation, "posting references unknown doc");
      plist.push_back(p);
    }
    if (plist.size() != parse_number<std::size_t>(parts[1]))
      throw Error(ErrorCode::kValidation, "posting count mismatch");
    index.postings_.emplace(parts[0], std::move(plist));
  }
  if (li != lines.size()) throw Error(ErrorCode::kValidation, "trailing data in index");
  index.finish();
  return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  persist::write_file(path, serialize());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  return deserialize(persist::read_file(path));
}

}  // namespace prockit
