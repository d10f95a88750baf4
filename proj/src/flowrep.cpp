#include "prockit/flowrep.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json_io.hpp"
#include "lexicon.hpp"
#include "prockit/error.hpp"
#include "prockit/text.hpp"

namespace prockit {

namespace {

using text::Span;

constexpr std::string_view kSpatial[] = {
    "above", "across", "along", "around", "at", "behind", "below", "beneath",
    "beside", "between", "from", "in", "inside", "into", "near", "on", "onto",
    "over", "through", "to", "toward", "towards", "under", "within"};
constexpr std::string_view kDestination[] = {"in", "into", "onto", "to"};
constexpr std::string_view kParticles[] = {"away", "back", "down", "off", "out", "up"};
constexpr std::string_view kHedges[] = {"about", "almost", "approximately", "around", "nearly", "roughly"};
constexpr std::string_view kFrontedCues[] = {"after", "before", "if",   "once",
                                             "unless", "until", "when", "while"};

template <std::size_t N>
bool in(const std::string_view (&words)[N], std::string_view w) {
  return std::find(std::begin(words), std::end(words), w) != std::end(words);
}

bool is_number(const Span& s) {
  if (lexicon::is_number_word(s.lower)) return true;
  bool digit = false;
  for (char c : s.text) {
    if (c >= '0' && c <= '9') digit = true;
    else if (c != '.' && c != '/' && c != '-' && c != ',') return false;
  }
  return digit;
}

enum class Cue { kNone, kSpatial, kPurpose, kTemporal, kInstrument, kPre, kPost };

struct CueHit {
  Cue kind = Cue::kNone;
  std::size_t content = 0;  // first token of the slot text
  std::size_t width = 0;    // fixed segment width, 0 when open-ended
  std::size_t scan = 0;     // tokens before this offset never end the segment
};

struct Extraction {
  FlowStep step;
  std::optional<std::string> destination;
};

class Extractor {
 public:
  explicit Extractor(std::string_view source) : src_(source), t_(text::spans(source)) {
    while (!t_.empty() && !t_.back().is_word) t_.pop_back();
  }

  Extraction run() {
    if (t_.empty()) throw Error(ErrorCode::kValidation, "empty step text");
    Extraction out;
    FlowStep& fs = out.step;
    const std::size_t n = t_.size();

    std::size_t i = 0;
    if (n > 1 && t_[0].is_word && t_[0].lower.size() > 3 && t_[0].lower.ends_with("ly") &&
        !lexicon::is_verb(t_[0].lower)) {
      i = 1;
      if (i < n && t_[i].text == ",") ++i;
    }

    std::size_t main = i;
    const std::string& first = t_[i].lower;
    if (in(kFrontedCues, first) || (first == "to" && i + 1 < n && lexicon::is_verb(t_[i + 1].lower))) {
      std::size_t comma = i + 1;
      while (comma < n && t_[comma].text != ",") ++comma;
      if (comma >= n) not_imperative();
      if (comma > i + 1) {
        if (first == "until") fs.postconditions.push_back(slice(i + 1, comma));
        else if (first == "before" || first == "while") fs.temporal = slice(i, comma);
        else if (first == "to") fs.purpose = slice(i + 1, comma);
        else fs.preconditions.push_back(slice(i + 1, comma));
      }
      main = comma + 1;
    } else if (!t_[i].is_word || lexicon::is_non_verb(first)) {
      main = n;
      for (std::size_t p = i + 1; p + 1 < n; ++p) {
        if (!clause_break(p) && !(t_[p].lower == "and" || t_[p].lower == "then")) continue;
        std::size_t q = p + 1;
        if (q < n && t_[q].lower == "then") ++q;
        if (q < n && lexicon::is_verb(t_[q].lower)) {
          main = q;
          break;
        }
      }
    }
    if (main >= n || !t_[main].is_word || lexicon::is_non_verb(t_[main].lower)) not_imperative();

    fs.action_verb = t_[main].text;
    std::size_t q = main + 1;
    if (q + 1 < n && in(kParticles, t_[q].lower) && t_[q + 1].is_word) ++q;

    std::size_t actee_end = q;
    while (actee_end < n && !clause_break(actee_end) && cue_at(actee_end).kind == Cue::kNone)
      ++actee_end;
    if (actee_end > q) fs.actee = slice(q, actee_end);

    bool secondary = false;
    std::optional<std::size_t> spatial_begin, spatial_end;
    q = actee_end;
    while (q < n) {
      if (clause_break(q)) {
        ++q;
        if (q < n && t_[q].lower == "then") ++q;
        if (q < n && lexicon::is_verb(t_[q].lower)) secondary = true;
        continue;
      }
      const CueHit hit = cue_at(q);
      if (hit.kind == Cue::kNone) {
        ++q;
        continue;
      }
      const bool condition = hit.kind == Cue::kPre || hit.kind == Cue::kPost;
      std::size_t end = std::max(hit.content, hit.scan);
      if (hit.width) {
        end = q + hit.width;
      } else {
        while (end < n && !clause_break(end) && (condition || end == hit.content ||
                                                 cue_at(end).kind == Cue::kNone))
          ++end;
      }
      if (!secondary || condition) {
        const bool has_content = end > hit.content;
        switch (hit.kind) {
          case Cue::kSpatial:
            if (!spatial_begin) {
              spatial_begin = q;
              spatial_end = end;
              if (in(kDestination, t_[q].lower) && has_content)
                out.destination = slice(hit.content, end);
            } else if (*spatial_end == q) {
              spatial_end = end;
            }
            break;
          case Cue::kPurpose:
            if (!fs.purpose && has_content) fs.purpose = slice(hit.content, end);
            break;
          case Cue::kTemporal:
            if (!fs.temporal) fs.temporal = slice(q, end);
            break;
          case Cue::kInstrument:
            if (has_content) fs.instruments.push_back(slice(hit.content, end));
            break;
          case Cue::kPre:
            if (has_content) fs.preconditions.push_back(slice(hit.content, end));
            break;
          case Cue::kPost:
            if (has_content) fs.postconditions.push_back(slice(hit.content, end));
            break;
          case Cue::kNone:
            break;
        }
      }
      q = std::max(end, q + 1);
    }
    if (spatial_begin && *spatial_end > *spatial_begin + 1)
      fs.spatial = slice(*spatial_begin, *spatial_end);

    for (std::size_t p = 0; p < n; ++p) {
      if (!is_number(t_[p])) continue;
      std::size_t u = p + 1;
      if (u < n && is_number(t_[u])) ++u;
      if (u < n && lexicon::is_unit(t_[u].lower)) {
        fs.quantitative = slice(p, u + 1);
        break;
      }
    }
    return out;
  }

 private:
  [[noreturn]] void not_imperative() const {
    throw Error(ErrorCode::kNotImperative, "not an imperative: '" + std::string(src_) + "'");
  }

  std::string slice(std::size_t a, std::size_t b) const {
    return std::string(src_.substr(t_[a].begin, t_[b - 1].end - t_[a].begin));
  }

  bool verb_at(std::size_t p) const { return p < t_.size() && lexicon::is_verb(t_[p].lower); }

  bool clause_break(std::size_t p) const {
    const Span& s = t_[p];
    if (!s.is_word) return s.text == "," || s.text == ";" || s.text == ":";
    if (s.lower == "and")
      return verb_at(p + 1) || (p + 1 < t_.size() && t_[p + 1].lower == "then");
    if (s.lower == "then") return verb_at(p + 1);
    return false;
  }

  CueHit cue_at(std::size_t q) const {
    const std::size_t n = t_.size();
    const std::string& w = t_[q].lower;
    auto next = [&](std::size_t k) -> const std::string& {
      static const std::string empty;
      return q + k < n ? t_[q + k].lower : empty;
    };
    if (w == "in" && next(1) == "order" && next(2) == "to") return {Cue::kPurpose, q + 3, 0};
    if (w == "to" && verb_at(q + 1) && q + 2 < n && t_[q + 2].is_word &&
        !lexicon::is_determiner(next(1)))
      return {Cue::kPurpose, q + 1, 0};
    if (in(kSpatial, w)) return {Cue::kSpatial, q + 1, 0};
    if (w == "for" && q + 1 < n) {
      std::size_t r = 1;
      if (in(kHedges, next(1))) r = 2;
      else if ((next(1) == "up" && next(2) == "to") || (next(1) == "at" && (next(2) == "least" || next(2) == "most")))
        r = 3;
      if ((q + r < n && is_number(t_[q + r])) ||
          ((next(r) == "a" || next(r) == "an") && lexicon::is_unit(next(r + 1))))
        return {Cue::kTemporal, q + 1, 0, q + r + 1};
      return {Cue::kPurpose, q + 1, 0};
    }
    if (w == "with" || w == "using") return {Cue::kInstrument, q + 1, 0};
    if (w == "until") return {Cue::kPost, q + 1, 0};
    if (w == "when" || w == "if" || w == "once" || w == "unless") return {Cue::kPre, q + 1, 0};
    if (w == "during" || w == "before" || w == "after" || w == "while")
      return {Cue::kTemporal, q + 1, 0};
    if (w == "overnight") return {Cue::kTemporal, q + 1, 1};
    return {};
  }

  std::string_view src_;
  std::vector<Span> t_;
};

std::vector<std::string> content_tokens(const std::string& label) {
  std::vector<std::string> out;
  for (auto& tok : text::tokenize(label))
    if (!lexicon::is_determiner(tok)) out.push_back(std::move(tok));
  return out;
}

class GraphBuilder {
 public:
  std::string entity(const std::string& label) {
    const std::string key = text::casefold(label);
    if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
    const std::string id = "e" + std::to_string(entities_.size());
    const auto tokens = content_tokens(label);
    const std::set<std::string> mine(tokens.begin(), tokens.end());
    for (const auto& [other_id, other_tokens] : entities_) {
      if (tokens.empty() || other_tokens.empty()) continue;
      const std::set<std::string> theirs(other_tokens.begin(), other_tokens.end());
      if (tokens == other_tokens) {
        add_edge(id, other_id, Relation::kEquality, false);
      } else if (mine != theirs &&
                 (std::includes(theirs.begin(), theirs.end(), mine.begin(), mine.end()) ||
                  std::includes(mine.begin(), mine.end(), theirs.begin(), theirs.end()))) {
        add_edge(id, other_id, Relation::kSubset, false);
      }
    }
    graph_.vertices.push_back({id, VertexKind::kEntity, label, std::nullopt});
    entities_.emplace_back(id, tokens);
    by_key_.emplace(key, id);
    return id;
  }

  void add_edge(const std::string& from, const std::string& to, Relation rel, bool inferred) {
    GraphEdge e{from, to, rel, inferred};
    if (std::find(graph_.edges.begin(), graph_.edges.end(), e) == graph_.edges.end())
      graph_.edges.push_back(std::move(e));
  }

  void action(std::size_t index, const std::string& label) {
    graph_.vertices.push_back({"a" + std::to_string(index), VertexKind::kAction, label, index});
    if (index > 0)
      add_edge("a" + std::to_string(index - 1), "a" + std::to_string(index), Relation::kOther,
               false);
  }

  EntityGraph take() { return std::move(graph_); }

 private:
  EntityGraph graph_;
  std::vector<std::pair<std::string, std::vector<std::string>>> entities_;
  std::map<std::string, std::string> by_key_;
};

Json optional_json(const std::optional<std::string>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

FlowStep extract_flow_step(std::string_view step_text) {
  return Extractor(step_text).run().step;
}

std::string_view relation_name(Relation relation) {
  switch (relation) {
    case Relation::kEquality: return "equality";
    case Relation::kSubset: return "subset";
    case Relation::kApplication: return "application";
    case Relation::kOther: return "other";
  }
  return "other";
}

EntityGraph build_entity_graph(const std::vector<std::string>& steps) {
  GraphBuilder builder;
  // Product of the most recent step that had an actee: its destination when
  // the step moved the actee somewhere, otherwise the actee itself. Vertices
  // for destinations are created only once something refers to them.
  std::optional<std::string> product;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Extraction ex;
    try {
      ex = Extractor(steps[i]).run();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotImperative) throw;
      const auto toks = text::spans(steps[i]);
      builder.action(i, toks.empty() ? std::string() : toks.front().text);
      continue;
    }
    const std::string action_id = "a" + std::to_string(i);
    builder.action(i, ex.step.action_verb);
    if (ex.step.actee) {
      builder.add_edge(action_id, builder.entity(*ex.step.actee), Relation::kApplication, false);
      product = ex.destination ? ex.destination : ex.step.actee;
    } else if (product) {
      builder.add_edge(action_id, builder.entity(*product), Relation::kApplication, true);
    }
    for (const auto& instrument : ex.step.instruments)
      builder.add_edge(action_id, builder.entity(instrument), Relation::kApplication, false);
  }
  return builder.take();
}

EntityGraph build_entity_graph(const Procedure& procedure) {
  return build_entity_graph(procedure.steps);
}

std::string entity_graph_to_edge_list(const EntityGraph& graph) {
  std::string out;
  for (const auto& v : graph.vertices) {
    out += "V\t" + v.id + "\t" + (v.kind == VertexKind::kAction ? "action" : "entity") + "\t" +
           (v.step_index ? std::to_string(*v.step_index) : "-") + "\t" + v.label + "\n";
  }
  for (const auto& e : graph.edges) {
    out += "E\t" + e.from + "\t" + e.to + "\t" + std::string(relation_name(e.relation));
    if (e.inferred) out += "\tinferred";
    out += "\n";
  }
  return out;
}

std::string entity_graph_to_json(const EntityGraph& graph) {
  Json vertices = Json::array();
  for (const auto& v : graph.vertices) {
    Json j = {{"id", v.id},
              {"kind", v.kind == VertexKind::kAction ? "action" : "entity"},
              {"label", v.label}};
    j["step_index"] = v.step_index ? Json(*v.step_index) : Json(nullptr);
    vertices.push_back(std::move(j));
  }
  Json edges = Json::array();
  for (const auto& e : graph.edges)
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"relation", relation_name(e.relation)},
                     {"inferred", e.inferred}});
  return Json{{"vertices", vertices}, {"edges", edges}}.dump();
}

std::string flow_step_to_json(const FlowStep& s) {
  return Json{{"action_verb", s.action_verb},
              {"actee", optional_json(s.actee)},
              {"temporal", optional_json(s.temporal)},
              {"spatial", optional_json(s.spatial)},
              {"quantitative", optional_json(s.quantitative)},
              {"preconditions", s.preconditions},
              {"postconditions", s.postconditions},
              {"instruments", s.instruments},
              {"purpose", optional_json(s.purpose)}}
      .dump();
}

}  // namespace prockit
