#include "html_subset.hpp"

#include <algorithm>
#include <cctype>

#include "prockit/error.hpp"
#include "prockit/text.hpp"

namespace prockit::html {

const std::string* Node::attribute(std::string_view name) const {
  for (const auto& [k, v] : attributes)
    if (k == name) return &v;
  return nullptr;
}

bool Node::has_class(std::string_view cls) const {
  const auto* value = attribute("class");
  if (!value) return false;
  for (const auto& part : text::tokenize(*value))
    if (part == cls) return true;
  return false;
}

namespace {

[[noreturn]] void malformed(const std::string& what, std::size_t pos) {
  throw Error(ErrorCode::kMalformedMarkup,
              what + " at byte " + std::to_string(pos));
}

bool is_void(std::string_view tag) {
  static const char* kVoid[] = {"br", "hr", "img", "meta", "link", "input",
                                "wbr", "source"};
  return std::any_of(std::begin(kVoid), std::end(kVoid),
                     [&](const char* v) { return tag == v; });
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    std::string rep;
    if (name == "amp") rep = "&";
    else if (name == "lt") rep = "<";
    else if (name == "gt") rep = ">";
    else if (name == "quot") rep = "\"";
    else if (name == "apos" || name == "#39") rep = "'";
    else if (name == "nbsp") rep = " ";
    else if (!name.empty() && name[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                 ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                 : std::stoul(std::string(name.substr(1)), nullptr, 10);
      } catch (...) {
        cp = 0;
      }
      if (cp == 0 || cp > 0x10FFFF) {
        out.push_back('&');
        continue;
      }
      if (cp < 0x80) {
        rep.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        rep.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        rep.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp < 0x10000) {
        rep.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        rep.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        rep.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        rep.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        rep.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        rep.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        rep.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
    } else {
      out.push_back('&');
      continue;
    }
    out += rep;
    i = semi;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::unique_ptr<Node> run() {
    auto root = std::make_unique<Node>();
    root->tag = "#root";
    std::vector<Node*> stack{root.get()};
    while (pos_ < src_.size()) {
      if (src_[pos_] != '<') {
        const auto next = src_.find('<', pos_);
        const auto end = next == std::string_view::npos ? src_.size() : next;
        auto node = std::make_unique<Node>();
        node->text = decode_entities(src_.substr(pos_, end - pos_));
        stack.back()->children.push_back(std::move(node));
        pos_ = end;
        continue;
      }
      if (src_.compare(pos_, 4, "<!--") == 0) {
        const auto end = src_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) malformed("unterminated comment", pos_);
        pos_ = end + 3;
        continue;
      }
      if (src_.compare(pos_, 2, "<!") == 0 || src_.compare(pos_, 2, "<?") == 0) {
        const auto end = src_.find('>', pos_);
        if (end == std::string_view::npos) malformed("unterminated declaration", pos_);
        pos_ = end + 1;
        continue;
      }
      if (src_.compare(pos_, 2, "</") == 0) {
        const auto start = pos_;
        const auto end = src_.find('>', pos_);
        if (end == std::string_view::npos) malformed("unterminated closing tag", pos_);
        const std::string name = lower(text::trim(src_.substr(pos_ + 2, end - pos_ - 2)));
        pos_ = end + 1;
        if (is_void(name)) continue;
        if (stack.size() < 2 || stack.back()->tag != name)
          malformed("unexpected </" + name + ">", start);
        stack.pop_back();
        continue;
      }
      auto node = read_open_tag();
      Node* raw = node.get();
      const bool self_closing = last_self_closing_;
      stack.back()->children.push_back(std::move(node));
      if (!self_closing && !is_void(raw->tag)) stack.push_back(raw);
    }
    if (stack.size() != 1) malformed("unclosed <" + stack.back()->tag + ">", src_.size());
    return root;
  }

 private:
  std::unique_ptr<Node> read_open_tag() {
    const auto start = pos_;
    ++pos_;  // '<'
    auto node = std::make_unique<Node>();
    const auto name_begin = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '-'))
      ++pos_;
    if (pos_ == name_begin) malformed("bad tag name", start);
    node->tag = lower(src_.substr(name_begin, pos_ - name_begin));
    last_self_closing_ = false;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) malformed("unterminated tag <" + node->tag + ">", start);
      if (src_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (src_[pos_] == '/') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
          last_self_closing_ = true;
          pos_ += 2;
          break;
        }
        malformed("stray '/' in tag", pos_);
      }
      const auto key_begin = pos_;
      while (pos_ < src_.size() && src_[pos_] != '=' && src_[pos_] != '>' &&
             src_[pos_] != '/' &&
             !std::isspace(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
      if (pos_ == key_begin) malformed("bad attribute", pos_);
      std::string key = lower(src_.substr(key_begin, pos_ - key_begin));
      skip_space();
      std::string value;
      if (pos_ < src_.size() && src_[pos_] == '=') {
        ++pos_;
        skip_space();
        if (pos_ >= src_.size()) malformed("unterminated attribute", pos_);
        const char q = src_[pos_];
        if (q == '"' || q == '\'') {
          const auto end = src_.find(q, pos_ + 1);
          if (end == std::string_view::npos) malformed("unterminated attribute value", pos_);
          value = decode_entities(src_.substr(pos_ + 1, end - pos_ - 1));
          pos_ = end + 1;
        } else {
          const auto vb = pos_;
          while (pos_ < src_.size() && src_[pos_] != '>' &&
                 !std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
          value = decode_entities(src_.substr(vb, pos_ - vb));
        }
      }
      node->attributes.emplace_back(std::move(key), std::move(value));
    }
    return node;
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  bool last_self_closing_ = false;
};

const Node* find_first(const Node& n, std::string_view tag) {
  for (const auto& c : n.children) {
    if (c->tag == tag) return c.get();
    if (const Node* hit = find_first(*c, tag)) return hit;
  }
  return nullptr;
}

void collect(const Node& n, std::string_view tag, bool want_class,
             std::string_view cls, std::vector<const Node*>& out) {
  for (const auto& c : n.children) {
    if (c->tag == tag && (!want_class || c->has_class(cls))) {
      out.push_back(c.get());
      continue;  // do not descend into a match
    }
    collect(*c, tag, want_class, cls, out);
  }
}

// Concatenated text below `n`, skipping subtrees for which `skip` is true.
template <typename Skip>
void gather_text(const Node& n, const Skip& skip, std::string& out) {
  for (const auto& c : n.children) {
    if (c->is_text()) {
      out += c->text;
      continue;
    }
    if (skip(*c)) continue;
    if (c->tag == "br" || c->tag == "p" || c->tag == "div") out.push_back(' ');
    gather_text(*c, skip, out);
    if (c->tag == "p" || c->tag == "div") out.push_back(' ');
  }
}

std::string all_text(const Node& n) {
  std::string out;
  gather_text(n, [](const Node&) { return false; }, out);
  return text::normalize_space(out);
}

std::string strip_how_to(const std::string& title) {
  static constexpr std::string_view kPrefix = "how to ";
  if (title.size() > kPrefix.size() &&
      text::casefold(title.substr(0, kPrefix.size())) == kPrefix)
    return text::trim(title.substr(kPrefix.size()));
  return title;
}

std::string link_target_from_href(std::string href) {
  href = text::trim(href);
  const auto q = href.find_first_of("?#");
  if (q != std::string::npos) href.resize(q);
  while (!href.empty() && href.front() == '/') href.erase(href.begin());
  if (href.size() > 5 && href.ends_with(".html")) href.resize(href.size() - 5);
  return href;
}

// Direct step <li> items of a method: items of the method's <ol>/<ul> lists
// that are not nested inside another list item.
void step_items(const Node& n, std::vector<const Node*>& out) {
  for (const auto& c : n.children) {
    if (c->tag == "li") {
      out.push_back(c.get());
      continue;
    }
    step_items(*c, out);
  }
}

Step parse_step(const Node& li) {
  Step step;
  const Node* bold = nullptr;
  const Node* anchor = nullptr;
  std::vector<const Node*> bullet_lists;
  // Walk the item, keeping nested lists separate from the step body.
  std::vector<const Node*> todo{&li};
  while (!todo.empty()) {
    const Node* n = todo.back();
    todo.pop_back();
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) {
      const Node* c = it->get();
      if (c->tag == "ul" || c->tag == "ol") {
        bullet_lists.push_back(c);
        continue;
      }
      todo.push_back(c);
    }
    if (n->tag == "b" || n->tag == "strong") {
      if (!bold) bold = n;
    }
    if (n->tag == "a" && !anchor && n->attribute("href")) anchor = n;
  }
  std::reverse(bullet_lists.begin(), bullet_lists.end());
  if (bold) {
    auto sentences = text::split_sentences(all_text(*bold));
    if (!sentences.empty()) {
      step.headline = sentences.front();
      step.details.assign(sentences.begin() + 1, sentences.end());
    }
  }
  std::string body;
  gather_text(li,
              [&](const Node& c) {
                return &c == bold || c.tag == "ul" || c.tag == "ol";
              },
              body);
  auto rest = text::split_sentences(body);
  if (step.headline.empty() && !rest.empty()) {
    step.headline = rest.front();
    rest.erase(rest.begin());
  }
  step.details.insert(step.details.end(), rest.begin(), rest.end());
  for (const Node* list : bullet_lists) {
    std::vector<const Node*> items;
    collect(*list, "li", false, "", items);
    for (const Node* item : items) {
      auto b = all_text(*item);
      if (!b.empty()) step.bullets.push_back(std::move(b));
    }
  }
  if (anchor) {
    auto target = link_target_from_href(*anchor->attribute("href"));
    if (!target.empty()) step.link_target = std::move(target);
  }
  return step;
}

}  // namespace

std::unique_ptr<Node> parse_document(std::string_view markup) {
  return Parser(markup).run();
}

Article parse_article_html(std::string_view markup) {
  auto root = parse_document(markup);
  Article a;
  const Node* scope = root.get();
  if (const Node* article = find_first(*root, "article")) {
    scope = article;
    if (const auto* id = article->attribute("id")) a.id = text::trim(*id);
    if (const auto* lang = article->attribute("lang")) a.language = text::trim(*lang);
  }
  const Node* h1 = find_first(*scope, "h1");
  if (!h1 || all_text(*h1).empty())
    throw Error(ErrorCode::kNotAnArticle, "no <h1> title");
  a.title = strip_how_to(all_text(*h1));
  std::vector<const Node*> navs;
  collect(*scope, "nav", true, "breadcrumbs", navs);
  if (!navs.empty()) {
    std::vector<const Node*> crumbs;
    collect(*navs.front(), "a", false, "", crumbs);
    for (const Node* c : crumbs) {
      auto t = all_text(*c);
      if (!t.empty()) a.category_path.push_back(std::move(t));
    }
  }
  std::vector<const Node*> methods;
  collect(*scope, "div", true, "method", methods);
  for (const Node* div : methods) {
    MethodSection m;
    if (const Node* h3 = find_first(*div, "h3")) {
      auto name = all_text(*h3);
      if (!name.empty()) m.name = std::move(name);
    }
    std::vector<const Node*> items;
    step_items(*div, items);
    for (const Node* li : items) {
      Step s = parse_step(*li);
      if (!s.headline.empty()) m.steps.push_back(std::move(s));
    }
    if (!m.steps.empty()) a.methods.push_back(std::move(m));
  }
  if (a.methods.empty())
    throw Error(ErrorCode::kNotAnArticle, "no method with steps");
  return a;
}

}  // namespace prockit::html
