#include <fstream>
#include <set>
#include <sstream>

#include "html_subset.hpp"
#include "json_io.hpp"
#include "prockit/corpus.hpp"
#include "prockit/error.hpp"
#include "prockit/text.hpp"

namespace prockit {

std::size_t Article::step_count() const {
  std::size_t n = 0;
  for (const auto& m : methods) n += m.steps.size();
  return n;
}

std::vector<const Step*> Article::steps() const {
  std::vector<const Step*> out;
  for (const auto& m : methods)
    for (const auto& s : m.steps) out.push_back(&s);
  return out;
}

const Step* Article::find_step(std::string_view step_id) const {
  for (const auto& m : methods)
    for (const auto& s : m.steps)
      if (s.id == step_id) return &s;
  return nullptr;
}

namespace {

std::string step_id_for(const std::string& article_id, std::size_t method,
                        std::size_t step) {
  return article_id + "#" + std::to_string(method) + "#" +
         std::to_string(step);
}

// Splits a step block: the first sentence becomes the headline and the rest
// become details.
void segment_block(const std::string& block, Step& step) {
  auto sentences = text::split_sentences(block);
  if (sentences.empty()) return;
  step.headline = sentences.front();
  step.details.insert(step.details.begin(), sentences.begin() + 1,
                      sentences.end());
}

std::vector<std::string> string_list(const Json& j, const char* field) {
  std::vector<std::string> out;
  if (!j.contains(field) || j[field].is_null()) return out;
  if (!j[field].is_array())
    throw Error(ErrorCode::kValidation,
                std::string("field '") + field + "' must be an array");
  for (const auto& v : j[field]) {
    if (!v.is_string())
      throw Error(ErrorCode::kValidation,
                  std::string("field '") + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<std::string> optional_string(const Json& j, const char* field) {
  if (!j.contains(field) || j[field].is_null()) return std::nullopt;
  if (!j[field].is_string())
    throw Error(ErrorCode::kValidation,
                std::string("field '") + field + "' must be a string");
  return j[field].get<std::string>();
}

Step step_from_json(const Json& js) {
  Step step;
  if (js.is_string()) {
    segment_block(js.get<std::string>(), step);
    return step;
  }
  if (!js.is_object())
    throw Error(ErrorCode::kValidation, "step must be a string or an object");
  step.id = optional_string(js, "id").value_or("");
  step.details = string_list(js, "details");
  step.bullets = string_list(js, "bullets");
  step.link_target = optional_string(js, "link_target");
  if (auto headline = optional_string(js, "headline")) {
    auto sentences = text::split_sentences(*headline);
    if (!sentences.empty()) {
      step.headline = sentences.front();
      step.details.insert(step.details.begin(), sentences.begin() + 1,
                          sentences.end());
    }
  } else if (auto block = optional_string(js, "text")) {
    Step seg;
    segment_block(*block, seg);
    step.headline = seg.headline;
    step.details.insert(step.details.begin(), seg.details.begin(),
                        seg.details.end());
  }
  for (auto& d : step.details) d = text::normalize_space(d);
  for (auto& b : step.bullets) b = text::normalize_space(b);
  return step;
}

// Fills missing ids and reconciles Step::link_target with the hyperlink list.
void finalize(Article& a) {
  a.title = text::normalize_space(a.title);
  if (a.id.empty()) a.id = text::slugify(a.title);
  for (std::size_t m = 0; m < a.methods.size(); ++m) {
    auto& method = a.methods[m];
    if (method.name) {
      *method.name = text::normalize_space(*method.name);
      if (method.name->empty()) method.name.reset();
    }
    for (std::size_t s = 0; s < method.steps.size(); ++s) {
      auto& step = method.steps[s];
      if (step.id.empty()) step.id = step_id_for(a.id, m, s);
      step.headline = text::normalize_space(step.headline);
    }
  }
  std::vector<Hyperlink> links;
  std::set<std::pair<std::string, std::string>> seen;
  auto add = [&](const std::string& step_id, const std::string& target) {
    if (seen.insert({step_id, target}).second) links.push_back({step_id, target});
  };
  for (const auto& m : a.methods)
    for (const auto& s : m.steps)
      if (s.link_target) add(s.id, *s.link_target);
  for (const auto& h : a.hyperlinks) add(h.step_id, h.target_article_id);
  a.hyperlinks = std::move(links);
  for (auto& m : a.methods)
    for (auto& s : m.steps)
      if (!s.link_target)
        for (const auto& h : a.hyperlinks)
          if (h.step_id == s.id) {
            s.link_target = h.target_article_id;
            break;
          }
}

bool is_language_code(const std::string& s) {
  return s.size() == 2 && s[0] >= 'a' && s[0] <= 'z' && s[1] >= 'a' &&
         s[1] <= 'z';
}

}  // namespace

Json article_to_json(const Article& a) {
  Json methods = Json::array();
  for (const auto& m : a.methods) {
    Json steps = Json::array();
    for (const auto& s : m.steps) {
      steps.push_back({{"id", s.id},
                       {"headline", s.headline},
                       {"details", s.details},
                       {"bullets", s.bullets},
                       {"link_target", s.link_target ? Json(*s.link_target)
                                                     : Json(nullptr)}});
    }
    methods.push_back(
        {{"name", m.name ? Json(*m.name) : Json(nullptr)}, {"steps", steps}});
  }
  Json links = Json::array();
  for (const auto& h : a.hyperlinks)
    links.push_back(
        {{"step_id", h.step_id}, {"target_article_id", h.target_article_id}});
  return {{"id", a.id},
          {"title", a.title},
          {"category_path", a.category_path},
          {"language", a.language},
          {"methods", methods},
          {"hyperlinks", links}};
}

Article article_from_json(const Json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::kMalformedMarkup, "record must be a JSON object");
  Article a;
  a.id = optional_string(j, "id").value_or("");
  a.title = optional_string(j, "title").value_or("");
  a.category_path = string_list(j, "category_path");
  a.language = optional_string(j, "language").value_or("en");
  if (j.contains("methods") && j["methods"].is_array()) {
    for (const auto& jm : j["methods"]) {
      if (!jm.is_object())
        throw Error(ErrorCode::kValidation, "method must be an object");
      MethodSection m;
      m.name = optional_string(jm, "name");
      if (jm.contains("steps") && jm["steps"].is_array())
        for (const auto& js : jm["steps"]) m.steps.push_back(step_from_json(js));
      a.methods.push_back(std::move(m));
    }
  } else if (j.contains("steps") && j["steps"].is_array()) {
    MethodSection m;
    for (const auto& js : j["steps"]) m.steps.push_back(step_from_json(js));
    a.methods.push_back(std::move(m));
  }
  if (j.contains("hyperlinks") && j["hyperlinks"].is_array()) {
    for (const auto& jh : j["hyperlinks"]) {
      if (jh.is_array() && jh.size() == 2 && jh[0].is_string() &&
          jh[1].is_string()) {
        a.hyperlinks.push_back({jh[0].get<std::string>(), jh[1].get<std::string>()});
      } else if (jh.is_object()) {
        a.hyperlinks.push_back({optional_string(jh, "step_id").value_or(""),
                                optional_string(jh, "target_article_id").value_or("")});
      } else {
        throw Error(ErrorCode::kValidation, "malformed hyperlink entry");
      }
    }
  }
  if (text::trim(a.title).empty())
    throw Error(ErrorCode::kNotAnArticle, "record has no title");
  bool any_step = false;
  for (const auto& m : a.methods)
    for (const auto& s : m.steps) any_step |= !s.headline.empty();
  if (!any_step) throw Error(ErrorCode::kNotAnArticle, "record has no steps");
  finalize(a);
  validate_article(a);
  return a;
}

void validate_article(const Article& a) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kValidation, "article '" + a.id + "': " + what);
  };
  if (a.id.empty()) fail("empty id");
  if (text::trim(a.title).empty()) fail("empty title");
  if (!is_language_code(a.language)) fail("language must be a 2-letter code");
  if (a.methods.empty()) fail("no methods");
  std::set<std::string> ids;
  for (const auto& m : a.methods) {
    if (m.steps.empty()) fail("method without steps");
    for (const auto& s : m.steps) {
      if (s.id.empty()) fail("step with empty id");
      if (!ids.insert(s.id).second) fail("duplicate step id '" + s.id + "'");
      if (text::trim(s.headline).empty()) fail("step '" + s.id + "' has no headline");
      if (text::split_sentences(s.headline).size() != 1)
        fail("headline of step '" + s.id + "' is not a single sentence");
    }
  }
  for (const auto& h : a.hyperlinks) {
    if (!ids.count(h.step_id))
      fail("hyperlink from unknown step '" + h.step_id + "'");
    if (h.target_article_id.empty()) fail("hyperlink with empty target");
  }
}

std::string serialize_article(const Article& article) {
  return article_to_json(article).dump();
}

Article parse_article(std::string_view markup, MarkupFormat format) {
  if (text::trim(markup).empty())
    throw Error(ErrorCode::kMalformedMarkup, "empty markup");
  if (format == MarkupFormat::kHtmlSubset) {
    Article a = html::parse_article_html(markup);
    finalize(a);
    validate_article(a);
    return a;
  }
  Json j;
  try {
    j = Json::parse(markup);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kMalformedMarkup, e.what());
  }
  return article_from_json(j);
}

std::vector<Procedure> extract_procedures(const Article& article,
                                          Granularity granularity) {
  std::vector<Procedure> out;
  if (granularity == Granularity::kTitle) {
    Procedure p;
    p.goal = article.title;
    p.source_article = article.id;
    p.granularity = Granularity::kTitle;
    for (const auto* s : article.steps()) {
      p.steps.push_back(s->headline);
      p.step_ids.push_back(s->id);
    }
    out.push_back(std::move(p));
    return out;
  }
  for (const auto& m : article.methods) {
    if (!m.name) continue;
    Procedure p;
    p.goal = *m.name;
    p.source_article = article.id;
    p.source_method = m.name;
    p.granularity = Granularity::kMethod;
    for (const auto& s : m.steps) {
      p.steps.push_back(s.headline);
      p.step_ids.push_back(s.id);
    }
    out.push_back(std::move(p));
  }
  if (out.empty())
    throw Error(ErrorCode::kNoNamedMethods,
                "article '" + article.id + "' has no named methods");
  return out;
}

Corpus::Corpus(Corpus&& other) noexcept { *this = std::move(other); }

Corpus& Corpus::operator=(Corpus&& other) noexcept {
  if (this != &other) {
    articles_ = std::move(other.articles_);
    other.articles_.clear();
    other.by_id_.clear();
    other.steps_.clear();
    build_lookup();
  }
  return *this;
}

Corpus Corpus::from_articles(std::vector<Article> articles) {
  std::set<std::string> ids;
  std::set<std::string> step_ids;
  for (const auto& a : articles) {
    if (!ids.insert(a.id).second)
      throw Error(ErrorCode::kDuplicateId, "duplicate article id '" + a.id + "'");
    for (const auto* s : a.steps())
      if (!step_ids.insert(s->id).second)
        throw Error(ErrorCode::kDuplicateId, "duplicate step id '" + s->id + "'");
  }
  std::sort(articles.begin(), articles.end(),
            [](const Article& x, const Article& y) { return x.id < y.id; });
  Corpus c;
  c.articles_ = std::move(articles);
  c.build_lookup();
  return c;
}

void Corpus::build_lookup() {
  by_id_.clear();
  steps_.clear();
  for (std::size_t i = 0; i < articles_.size(); ++i) {
    const Article& a = articles_[i];
    by_id_.emplace(a.id, i);
    std::size_t flat = 0;
    for (std::size_t m = 0; m < a.methods.size(); ++m)
      for (std::size_t s = 0; s < a.methods[m].steps.size(); ++s) {
        const Step& step = a.methods[m].steps[s];
        steps_.emplace(step.id, StepRef{&a, &step, m, s, flat++});
      }
  }
}

const Article* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &articles_[it->second];
}

const Corpus::StepRef* Corpus::find_step(std::string_view step_id) const {
  auto it = steps_.find(std::string(step_id));
  return it == steps_.end() ? nullptr : &it->second;
}

std::vector<Procedure> Corpus::procedures() const {
  std::vector<Procedure> out;
  out.reserve(articles_.size());
  for (const auto& a : articles_) {
    auto p = extract_procedures(a, Granularity::kTitle);
    out.push_back(std::move(p.front()));
  }
  return out;
}

void Corpus::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& a : articles_) out << serialize_article(a) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<Article> articles;
  std::unordered_map<std::string, std::size_t> article_line;
  std::unordered_map<std::string, std::size_t> step_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Article a;
    try {
      a = parse_article(line, MarkupFormat::kRecord);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), line_no);
    }
    if (!article_line.emplace(a.id, line_no).second)
      throw Error(ErrorCode::kDuplicateId,
                  "article id '" + a.id + "' already defined on line " +
                      std::to_string(article_line[a.id]),
                  line_no);
    for (const auto* s : a.steps())
      if (!step_line.emplace(s->id, line_no).second)
        throw Error(ErrorCode::kDuplicateId,
                    "step id '" + s->id + "' already defined on line " +
                        std::to_string(step_line[s->id]),
                    line_no);
    articles.push_back(std::move(a));
  }
  return Corpus::from_articles(std::move(articles));
}

}  // namespace prockit
