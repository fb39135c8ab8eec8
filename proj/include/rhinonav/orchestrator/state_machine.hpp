#pragma once

#include <array>
#include <string_view>

namespace rhinonav {

enum class ExhibitState { idle, goal_received, localizing, planning, navigating, arrived };

// The six information texts shown to visitors, a) to f).
enum class SnippetId { a, b, c, d, e, f };

inline constexpr std::string_view state_name(ExhibitState s) {
  constexpr std::array<std::string_view, 6> names{"idle",     "goal_received", "localizing",
                                                  "planning", "navigating",    "arrived"};
  return names[static_cast<std::size_t>(s)];
}

inline constexpr std::string_view snippet_name(SnippetId s) {
  constexpr std::array<std::string_view, 6> names{"a", "b", "c", "d", "e", "f"};
  return names[static_cast<std::size_t>(s)];
}

// Reset (any state to idle) is always allowed; everything else follows the
// exhibit's fixed sequence.
inline constexpr bool is_valid_transition(ExhibitState from, ExhibitState to) {
  using S = ExhibitState;
  if (to == S::idle) {
    return true;
  }
  switch (from) {
    case S::idle:
      return to == S::goal_received;
    case S::goal_received:
      return to == S::localizing;
    case S::localizing:
      return to == S::planning;
    case S::planning:
      return to == S::navigating;
    case S::navigating:
      return to == S::arrived || to == S::planning || to == S::goal_received;
    case S::arrived:
      return to == S::goal_received;
  }
  return false;
}

// While navigating the text cycles d, e, f with `period` seconds per snippet,
// counted from the moment navigation began.
inline constexpr SnippetId snippet_for(ExhibitState s, double seconds_navigating = 0.0,
                                       double period = 10.0) {
  using S = ExhibitState;
  switch (s) {
    case S::idle:
      return SnippetId::a;
    case S::goal_received:
    case S::arrived:
      return SnippetId::b;
    case S::localizing:
      return SnippetId::c;
    case S::planning:
      return SnippetId::d;
    case S::navigating: {
      const auto slot = static_cast<long>(seconds_navigating / period) % 3;
      return slot == 0 ? SnippetId::d : slot == 1 ? SnippetId::e : SnippetId::f;
    }
  }
  return SnippetId::a;
}

}  // namespace rhinonav
