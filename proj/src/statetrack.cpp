#include "prockit/statetrack.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json_io.hpp"
#include "prockit/error.hpp"
#include "prockit/text.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

namespace {

std::vector<std::string> split_lines(std::string_view data) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    if (nl == std::string_view::npos) nl = data.size();
    std::string_view line = data.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    pos = nl + 1;
  }
  return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

bool has_control(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x20; });
}

const StateGrid& checked(const StateGrid& grid) {
  const auto v = validate_grid(grid);
  if (!v.empty()) throw Error(ErrorCode::kInvalidGrid, v.front().message);
  return grid;
}

}  // namespace

StateValue parse_state_value(std::string_view cell) {
  if (cell == "?") return StateValue::unknown();
  if (cell == "-") return StateValue::absent();
  return StateValue::location(std::string(cell));
}

std::string format_state_value(const StateValue& v) {
  switch (v.kind) {
    case StateValue::Kind::kUnknown: return "?";
    case StateValue::Kind::kAbsent: return "-";
    case StateValue::Kind::kLocation: break;
  }
  return v.name;
}

StateGrid parse_grid(std::string_view tsv) {
  auto lines = split_lines(tsv);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0].rfind("#\t", 0) != 0)
    throw Error(ErrorCode::kInvalidGrid, "grid needs a '#<TAB>entity...' header");
  StateGrid g;
  auto header = split_tabs(lines[0]);
  g.entities.assign(header.begin() + 1, header.end());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_tabs(lines[i]);
    if (i > 1) g.steps.push_back(fields[0]);
    std::vector<StateValue> row;
    for (std::size_t j = 1; j < fields.size(); ++j) row.push_back(parse_state_value(fields[j]));
    g.cells.push_back(std::move(row));
  }
  return g;
}

StateGrid load_grid(const std::filesystem::path& path) { return parse_grid(persist::read_file(path)); }

std::string format_grid(const StateGrid& grid) {
  std::string out = "#";
  for (const auto& e : grid.entities) out += "\t" + e;
  out += "\n";
  for (std::size_t r = 0; r < grid.cells.size(); ++r) {
    out += r == 0 ? std::string("(before)") : (r - 1 < grid.steps.size() ? grid.steps[r - 1] : "");
    for (const auto& c : grid.cells[r]) out += "\t" + format_state_value(c);
    out += "\n";
  }
  return out;
}

std::string_view grid_violation_name(GridViolation::Kind kind) {
  switch (kind) {
    case GridViolation::Kind::kDimension: return "dimension";
    case GridViolation::Kind::kMalformedCell: return "malformed_cell";
    case GridViolation::Kind::kEmptyLocation: return "empty_location";
    case GridViolation::Kind::kBadEntity: return "bad_entity";
  }
  return "unknown";
}

std::vector<GridViolation> validate_grid(const StateGrid& grid) {
  using K = GridViolation::Kind;
  std::vector<GridViolation> out;
  if (grid.entities.empty()) out.push_back({K::kDimension, {}, {}, "grid has no entities"});
  std::set<std::string> seen;
  for (std::size_t j = 0; j < grid.entities.size(); ++j) {
    const auto& e = grid.entities[j];
    if (text::trim(e).empty())
      out.push_back({K::kBadEntity, {}, j, "entity " + std::to_string(j) + " has an empty name"});
    else if (!seen.insert(text::casefold(e)).second)
      out.push_back({K::kBadEntity, {}, j, "duplicate entity '" + e + "'"});
  }
  if (grid.cells.size() != grid.steps.size() + 1)
    out.push_back({K::kDimension, {}, {},
                   "expected " + std::to_string(grid.steps.size() + 1) + " state rows, found " +
                       std::to_string(grid.cells.size())});
  for (std::size_t r = 0; r < grid.cells.size(); ++r) {
    const auto& row = grid.cells[r];
    if (row.size() != grid.entities.size())
      out.push_back({K::kDimension, r, {},
                     "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                         " cells for " + std::to_string(grid.entities.size()) + " entities"});
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& v = row[c];
      const std::string where = " at row " + std::to_string(r) + ", column " + std::to_string(c);
      if (!v.is_location()) {
        if (!v.name.empty()) out.push_back({K::kMalformedCell, r, c, "marker carries a name" + where});
        continue;
      }
      if (v.name.empty()) {
        out.push_back({K::kEmptyLocation, r, c, "empty location name" + where});
      } else if (text::trim(v.name) != v.name || has_control(v.name)) {
        out.push_back({K::kMalformedCell, r, c, "location name has stray whitespace" + where});
      } else if (v.name == "?" || v.name == "-") {
        out.push_back({K::kMalformedCell, r, c, "location named like a marker" + where});
      }
    }
  }
  return out;
}

std::string_view transition_kind_name(TransitionEvent::Kind kind) {
  switch (kind) {
    case TransitionEvent::Kind::kCreate: return "create";
    case TransitionEvent::Kind::kDestroy: return "destroy";
    case TransitionEvent::Kind::kMove: return "move";
  }
  return "unknown";
}

std::vector<TransitionEvent> grid_events(const StateGrid& grid) {
  checked(grid);
  using SK = StateValue::Kind;
  std::vector<TransitionEvent> out;
  for (std::size_t i = 1; i < grid.cells.size(); ++i)
    for (std::size_t e = 0; e < grid.entities.size(); ++e) {
      const auto& from = grid.cells[i - 1][e];
      const auto& to = grid.cells[i][e];
      if (from == to) continue;
      if (from.kind == SK::kAbsent)
        out.push_back({TransitionEvent::Kind::kCreate, grid.entities[e], i, from, to});
      else if (to.kind == SK::kAbsent)
        out.push_back({TransitionEvent::Kind::kDestroy, grid.entities[e], i, from, to});
      else if (from.is_location() && to.is_location())
        out.push_back({TransitionEvent::Kind::kMove, grid.entities[e], i, from, to});
    }
  return out;
}

std::vector<std::vector<StateValue>> apply_events(const std::vector<std::string>& entities,
                                                  const std::vector<StateValue>& initial,
                                                  const std::vector<TransitionEvent>& events,
                                                  std::size_t n_steps) {
  if (initial.size() != entities.size())
    throw Error(ErrorCode::kInvalidGrid, "initial row width does not match the entities");
  std::map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < entities.size(); ++j) column.emplace(entities[j], j);
  std::vector<std::vector<StateValue>> rows{initial};
  std::size_t next = 0;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    auto row = rows.back();
    for (; next < events.size() && events[next].step_index == step; ++next) {
      const auto it = column.find(events[next].entity);
      if (it == column.end())
        throw Error(ErrorCode::kUnknownEntity, "unknown entity '" + events[next].entity + "'");
      row[it->second] = events[next].to;
    }
    rows.push_back(std::move(row));
  }
  if (next != events.size()) throw Error(ErrorCode::kInvalidGrid, "events out of order or out of range");
  return rows;
}

std::vector<StateChange> parse_timeline(std::string_view jsonl) {
  std::vector<StateChange> out;
  const auto lines = split_lines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    Json j;
    try {
      j = Json::parse(lines[i]);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kValidation, std::string("bad JSON: ") + e.what(), line_no);
    }
    auto str = [&](const char* key) {
      if (!j.is_object() || !j.contains(key) || !j[key].is_string())
        throw Error(ErrorCode::kValidation, std::string("missing string field '") + key + "'", line_no);
      return j[key].get<std::string>();
    };
    StateChange c{str("entity"), str("attribute"), str("before"), str("after"), 0};
    if (!j.contains("step_index") || !j["step_index"].is_number_unsigned())
      throw Error(ErrorCode::kValidation, "step_index must be a non-negative integer", line_no);
    c.step_index = j["step_index"].get<std::size_t>();
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<StateChange> load_timeline(const std::filesystem::path& path) {
  return parse_timeline(persist::read_file(path));
}

std::string_view timeline_violation_name(TimelineViolation::Kind kind) {
  switch (kind) {
    case TimelineViolation::Kind::kNoChange: return "no_change";
    case TimelineViolation::Kind::kBadStep: return "bad_step";
    case TimelineViolation::Kind::kBrokenChain: return "broken_chain";
    case TimelineViolation::Kind::kDuplicateStep: return "duplicate_step";
  }
  return "unknown";
}

std::vector<TimelineViolation> validate_timeline(const std::vector<StateChange>& changes,
                                                 std::optional<std::size_t> n_steps) {
  using K = TimelineViolation::Kind;
  std::vector<TimelineViolation> out;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const auto& c = changes[i];
    if (c.before == c.after)
      out.push_back({K::kNoChange, i, c.entity + "/" + c.attribute + " does not change"});
    if (c.step_index == 0 || (n_steps && c.step_index > *n_steps))
      out.push_back({K::kBadStep, i, "step_index " + std::to_string(c.step_index) + " out of range"});
    groups[{c.entity, c.attribute}].push_back(i);
  }
  for (auto& [key, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return changes[a].step_index < changes[b].step_index;
    });
    for (std::size_t k = 1; k < idx.size(); ++k) {
      const auto& prev = changes[idx[k - 1]];
      const auto& cur = changes[idx[k]];
      const std::string name = key.first + "/" + key.second;
      if (prev.step_index == cur.step_index)
        out.push_back({K::kDuplicateStep, idx[k],
                       name + " changes twice at step " + std::to_string(cur.step_index)});
      else if (prev.after != cur.before)
        out.push_back({K::kBrokenChain, idx[k],
                       name + ": step " + std::to_string(prev.step_index) + " leaves '" + prev.after +
                           "' but step " + std::to_string(cur.step_index) + " starts from '" +
                           cur.before + "'"});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TimelineViolation& a, const TimelineViolation& b) {
    return a.index < b.index;
  });
  return out;
}

StateAnswer query_state(const StateGrid& grid, std::string_view entity, std::string_view attribute,
                        std::size_t state_index) {
  checked(grid);
  const auto it = std::find(grid.entities.begin(), grid.entities.end(), entity);
  if (it == grid.entities.end())
    throw Error(ErrorCode::kUnknownEntity, "unknown entity '" + std::string(entity) + "'");
  if (state_index >= grid.cells.size())
    throw Error(ErrorCode::kUsage, "state index " + std::to_string(state_index) + " beyond the last state " +
                                       std::to_string(grid.cells.size() - 1));
  const auto& v = grid.cells[state_index][static_cast<std::size_t>(it - grid.entities.begin())];
  if (attribute == "location") {
    switch (v.kind) {
      case StateValue::Kind::kLocation: return {StateAnswer::Kind::kValue, v.name};
      case StateValue::Kind::kUnknown: return {StateAnswer::Kind::kUnknown, {}};
      case StateValue::Kind::kAbsent: return {StateAnswer::Kind::kAbsent, {}};
    }
  }
  if (attribute == "existence") {
    if (v.kind == StateValue::Kind::kAbsent) return {StateAnswer::Kind::kAbsent, {}};
    return {StateAnswer::Kind::kValue, "exists"};
  }
  throw Error(ErrorCode::kUsage, "grids answer 'location' or 'existence', not '" +
                                     std::string(attribute) + "'");
}

StateAnswer query_state(const std::vector<StateChange>& timeline, std::string_view entity,
                        std::string_view attribute, std::size_t state_index) {
  const StateChange* latest = nullptr;
  const StateChange* first = nullptr;
  bool known = false;
  for (const auto& c : timeline) {
    if (c.entity != entity) continue;
    known = true;
    if (c.attribute != attribute) continue;
    if (c.step_index <= state_index && (!latest || c.step_index >= latest->step_index)) latest = &c;
    if (!first || c.step_index < first->step_index) first = &c;
  }
  if (!known) throw Error(ErrorCode::kUnknownEntity, "unknown entity '" + std::string(entity) + "'");
  if (latest) return {StateAnswer::Kind::kValue, latest->after};
  if (first) return {StateAnswer::Kind::kValue, first->before};
  return {StateAnswer::Kind::kUnknown, {}};
}

std::string state_answer_to_json(const StateAnswer& a) {
  switch (a.kind) {
    case StateAnswer::Kind::kValue: return Json{{"kind", "value"}, {"value", a.value}}.dump();
    case StateAnswer::Kind::kUnknown: return Json{{"kind", "unknown"}, {"value", nullptr}}.dump();
    case StateAnswer::Kind::kAbsent: return Json{{"kind", "absent"}, {"value", nullptr}}.dump();
  }
  return "{}";
}

}  // namespace prockit
