#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prockit {

// One grid cell: a named location, "?" (exists, location unknown) or "-"
// (does not exist).
struct StateValue {
  enum class Kind { kLocation, kUnknown, kAbsent };

  Kind kind = Kind::kUnknown;
  std::string name;  // kLocation only

  static StateValue location(std::string name) { return {Kind::kLocation, std::move(name)}; }
  static StateValue unknown() { return {Kind::kUnknown, {}}; }
  static StateValue absent() { return {Kind::kAbsent, {}}; }

  bool is_location() const { return kind == Kind::kLocation; }
  bool operator==(const StateValue&) const = default;
};

// "?" and "-" map to the markers; any other text is a location name.
StateValue parse_state_value(std::string_view cell);
std::string format_state_value(const StateValue& v);

// Existence and location of entities before the first step (row 0) and after
// each step (row i).
struct StateGrid {
  std::vector<std::string> entities;
  std::vector<std::string> steps;
  std::vector<std::vector<StateValue>> cells;  // rows x entities

  bool operator==(const StateGrid&) const = default;
};

// Tab-separated: a header "#<TAB>entity...", then one row per state whose
// first field is "(before)" for row 0 and the step text afterwards. Rows of
// the wrong width are kept so validate_grid can report them. Throws
// Error{kInvalidGrid} only when there is no header.
StateGrid parse_grid(std::string_view tsv);
StateGrid load_grid(const std::filesystem::path& path);
std::string format_grid(const StateGrid& grid);

struct GridViolation {
  enum class Kind { kDimension, kMalformedCell, kEmptyLocation, kBadEntity };

  Kind kind = Kind::kDimension;
  std::optional<std::size_t> row;
  std::optional<std::size_t> column;
  std::string message;

  bool operator==(const GridViolation&) const = default;
};

std::string_view grid_violation_name(GridViolation::Kind kind);

// Dimension errors (row count != steps + 1, row width != entity count),
// malformed cells (markers carrying a name, names with surrounding
// whitespace, control characters, or spelled like a marker), empty location
// names, and empty or duplicate entity names.
std::vector<GridViolation> validate_grid(const StateGrid& grid);

struct TransitionEvent {
  enum class Kind { kCreate, kDestroy, kMove };

  Kind kind = Kind::kMove;
  std::string entity;
  std::size_t step_index = 0;  // 1-based
  StateValue from;
  StateValue to;

  bool operator==(const TransitionEvent&) const = default;
};

std::string_view transition_kind_name(TransitionEvent::Kind kind);

// One event per changed cell between adjacent rows: Absent -> other is a
// create, other -> Absent a destroy, Location -> different Location a move.
// Changes into or out of Unknown (other than create/destroy) produce no
// event. Ordered by step, then entity column. Throws Error{kInvalidGrid}
// when validate_grid reports anything.
std::vector<TransitionEvent> grid_events(const StateGrid& grid);

// Rows 0..n obtained by replaying `events` over `initial`.
std::vector<std::vector<StateValue>> apply_events(const std::vector<std::string>& entities,
                                                  const std::vector<StateValue>& initial,
                                                  const std::vector<TransitionEvent>& events,
                                                  std::size_t n_steps);

// An open-vocabulary attribute change made by one step.
struct StateChange {
  std::string entity;
  std::string attribute;
  std::string before;
  std::string after;
  std::size_t step_index = 0;  // 1-based

  bool operator==(const StateChange&) const = default;
};

// JSON Lines of {entity, attribute, before, after, step_index}. Errors carry
// the line number: Error{kValidation}; Error{kIo} when unreadable.
std::vector<StateChange> parse_timeline(std::string_view jsonl);
std::vector<StateChange> load_timeline(const std::filesystem::path& path);

struct TimelineViolation {
  enum class Kind { kNoChange, kBadStep, kBrokenChain, kDuplicateStep };

  Kind kind = Kind::kBrokenChain;
  std::size_t index = 0;  // position in the input list
  std::string message;

  bool operator==(const TimelineViolation&) const = default;
};

std::string_view timeline_violation_name(TimelineViolation::Kind kind);

// Per (entity, attribute), changes sorted by step must chain: each after
// equals the next before. Also reports before == after, step_index 0 or
// beyond `n_steps`, and two changes at the same step.
std::vector<TimelineViolation> validate_timeline(const std::vector<StateChange>& changes,
                                                 std::optional<std::size_t> n_steps = std::nullopt);

struct StateAnswer {
  enum class Kind { kValue, kUnknown, kAbsent };

  Kind kind = Kind::kUnknown;
  std::string value;

  bool operator==(const StateAnswer&) const = default;
};

// attribute "location": the cell (Absent for "-"); attribute "existence":
// "exists" or Absent. Throws Error{kUnknownEntity}, Error{kUsage} for other
// attributes or a state index beyond the last row, Error{kInvalidGrid} for
// an invalid grid.
StateAnswer query_state(const StateGrid& grid, std::string_view entity,
                        std::string_view attribute, std::size_t state_index);

// Value after the latest change at or before `state_index`; before the first
// change, that change's `before`; Unknown when the attribute never changes.
// Throws Error{kUnknownEntity} when the entity never appears.
StateAnswer query_state(const std::vector<StateChange>& timeline, std::string_view entity,
                        std::string_view attribute, std::size_t state_index);

std::string state_answer_to_json(const StateAnswer& a);

}  // namespace prockit
