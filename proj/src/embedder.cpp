#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "prockit/error.hpp"
#include "prockit/random.hpp"
#include "prockit/text.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

namespace {

constexpr std::string_view kMagic = "PROCKIT-EMB 1";

void normalize(Vector& v) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  if (norm == 0.0) return;
  norm = std::sqrt(norm);
  for (float& x : v) x = static_cast<float>(x / norm);
}

Vector parse_vector(std::string_view s, std::size_t line) {
  Vector v;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos >= s.size()) break;
    auto end = s.find(' ', pos);
    if (end == std::string_view::npos) end = s.size();
    float value = 0.0f;
    const auto res = std::from_chars(s.data() + pos, s.data() + end, value);
    if (res.ec != std::errc() || res.ptr != s.data() + end || !std::isfinite(value))
      throw Error(ErrorCode::kValidation, "bad vector component", line);
    v.push_back(value);
    pos = end;
  }
  return v;
}

void parse_external(std::string_view data, std::unordered_map<std::string, Vector>& table,
                    std::size_t& dim) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    if (nl == std::string_view::npos) nl = data.size();
    std::string_view line = data.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw Error(ErrorCode::kValidation, "expected key<TAB>vector", line_no);
    Vector v = parse_vector(line.substr(tab + 1), line_no);
    if (v.empty()) throw Error(ErrorCode::kValidation, "empty vector", line_no);
    if (dim == 0) dim = v.size();
    if (v.size() != dim)
      throw Error(ErrorCode::kDimensionMismatch,
                  "expected " + std::to_string(dim) + " components, got " +
                      std::to_string(v.size()),
                  line_no);
    if (!table.emplace(std::string(line.substr(0, tab)), std::move(v)).second)
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate key '" + std::string(line.substr(0, tab)) + "'", line_no);
  }
  if (table.empty()) throw Error(ErrorCode::kValidation, "vector file has no entries");
}

std::string format_vector(const Vector& v) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(' ');
    const auto res = std::to_chars(buf, buf + sizeof(buf), v[i]);
    out.append(buf, res.ptr);
  }
  return out;
}

}  // namespace

std::string_view embedder_kind_name(EmbedderKind kind) {
  switch (kind) {
    case EmbedderKind::kTfidf: return "tfidf";
    case EmbedderKind::kHashedCharNgram: return "hashed-char-ngram";
    case EmbedderKind::kExternal: return "external";
  }
  return "unknown";
}

Embedder Embedder::tfidf(const std::vector<std::string>& texts) {
  std::map<std::string, std::size_t> df;
  for (const auto& t : texts) {
    auto tokens = text::tokenize(t);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& tok : tokens) ++df[tok];
  }
  Embedder e;
  e.kind_ = EmbedderKind::kTfidf;
  const double n = static_cast<double>(texts.size());
  std::size_t slot = 0;
  for (const auto& [term, count] : df)
    e.vocab_.emplace(term, std::make_pair(slot++, std::log((1.0 + n) / (1.0 + count)) + 1.0));
  e.dim_ = slot;
  return e;
}

Embedder Embedder::hashed_char_ngram(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::kConfig, "embedding dimension must be positive");
  Embedder e;
  e.kind_ = EmbedderKind::kHashedCharNgram;
  e.dim_ = dim;
  e.seed_ = seed;
  return e;
}

Embedder Embedder::external(const std::filesystem::path& path) {
  Embedder e;
  e.kind_ = EmbedderKind::kExternal;
  parse_external(persist::read_file(path), e.external_, e.dim_);
  return e;
}

Vector Embedder::embed(std::string_view input) const {
  switch (kind_) {
    case EmbedderKind::kExternal: {
      auto it = external_.find(std::string(input));
      if (it == external_.end())
        throw Error(ErrorCode::kUnknownDocument,
                    "no vector for '" + std::string(input) + "'");
      return it->second;
    }
    case EmbedderKind::kTfidf: {
      Vector v(dim_, 0.0f);
      std::map<std::size_t, double> tf;
      for (const auto& tok : text::tokenize(input)) {
        auto it = vocab_.find(tok);
        if (it != vocab_.end()) tf[it->second.first] += it->second.second;
      }
      for (const auto& [slot, w] : tf) v[slot] = static_cast<float>(w);
      normalize(v);
      return v;
    }
    case EmbedderKind::kHashedCharNgram: {
      Vector v(dim_, 0.0f);
      auto add = [&](std::string_view feature) {
        const std::uint64_t h = derive_seed(seed_, feature);
        v[h % dim_] += 1.0f;
      };
      for (const auto& tok : text::tokenize(input)) {
        add("w:" + tok);
        const std::string padded = "<" + tok + ">";
        for (std::size_t n = 3; n <= 4; ++n)
          for (std::size_t i = 0; i + n <= padded.size(); ++i)
            add(std::string_view(padded).substr(i, n));
      }
      normalize(v);
      return v;
    }
  }
  return {};
}

Vector Embedder::embed_document(std::string_view id, std::string_view input) const {
  if (kind_ == EmbedderKind::kExternal) {
    auto it = external_.find(std::string(id));
    if (it != external_.end()) return it->second;
  }
  return embed(input);
}

std::string Embedder::serialize() const {
  std::string body = "kind " + std::string(embedder_kind_name(kind_)) + "\n";
  body += "dim " + std::to_string(dim_) + "\n";
  switch (kind_) {
    case EmbedderKind::kHashedCharNgram:
      body += "seed " + std::to_string(seed_) + "\n";
      break;
    case EmbedderKind::kTfidf: {
      std::vector<std::pair<std::size_t, const std::string*>> slots;
      for (const auto& [term, entry] : vocab_) slots.emplace_back(entry.first, &term);
      std::sort(slots.begin(), slots.end());
      for (const auto& [slot, term] : slots)
        body += *term + "\t" + text::format_double(vocab_.at(*term).second) + "\n";
      break;
    }
    case EmbedderKind::kExternal: {
      std::vector<const std::string*> keys;
      for (const auto& [k, _] : external_) keys.push_back(&k);
      std::sort(keys.begin(), keys.end(),
                [](const std::string* a, const std::string* b) { return *a < *b; });
      for (const auto* k : keys) body += *k + "\t" + format_vector(external_.at(*k)) + "\n";
      break;
    }
  }
  return persist::seal(std::move(body), kMagic);
}

Embedder Embedder::deserialize(std::string_view data) {
  const auto lines = persist::open(data, kMagic);
  if (lines.size() < 2 || lines[0].rfind("kind ", 0) != 0 || lines[1].rfind("dim ", 0) != 0)
    throw Error(ErrorCode::kValidation, "bad embedder header");
  const std::string kind = lines[0].substr(5);
  const std::size_t dim = std::stoull(lines[1].substr(4));
  Embedder e;
  if (kind == "hashed-char-ngram") {
    if (lines.size() != 3 || lines[2].rfind("seed ", 0) != 0)
      throw Error(ErrorCode::kValidation, "bad embedder seed");
    e = hashed_char_ngram(dim, std::stoull(lines[2].substr(5)));
  } else if (kind == "tfidf") {
    e.kind_ = EmbedderKind::kTfidf;
    for (std::size_t i = 2; i < lines.size(); ++i) {
      const auto tab = lines[i].find('\t');
      if (tab == std::string::npos) throw Error(ErrorCode::kValidation, "bad vocabulary line");
      e.vocab_.emplace(lines[i].substr(0, tab),
                       std::make_pair(i - 2, std::stod(lines[i].substr(tab + 1))));
    }
    e.dim_ = e.vocab_.size();
    if (e.dim_ != dim) throw Error(ErrorCode::kValidation, "vocabulary size mismatch");
  } else if (kind == "external") {
    e.kind_ = EmbedderKind::kExternal;
    std::string table;
    for (std::size_t i = 2; i < lines.size(); ++i) table += lines[i] + "\n";
    parse_external(table, e.external_, e.dim_);
    if (e.dim_ != dim) throw Error(ErrorCode::kValidation, "vector dimension mismatch");
  } else {
    throw Error(ErrorCode::kValidation, "unknown embedder kind '" + kind + "'");
  }
  return e;
}

}  // namespace prockit
