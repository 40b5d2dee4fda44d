#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <string_view>

namespace dmst {

enum class Phase : std::size_t {
  local_preprocessing,
  min_edges,
  contraction,
  label_exchange,
  redistribute,
  base_case,
  filter,
  pivot_selection,
  mst_redistribution,
  other,
};
inline constexpr std::size_t kPhaseCount = 10;

inline constexpr std::array<std::string_view, kPhaseCount> kPhaseNames{
    "local_preprocessing", "min_edges", "contraction",     "label_exchange",     "redistribute",
    "base_case",           "filter",    "pivot_selection", "mst_redistribution", "other"};

using PhaseTimes = std::array<double, kPhaseCount>;

/// Stopwatch that is always charging exactly one phase, so the phases add up
/// to the elapsed time.
class PhaseClock {
 public:
  using clock = std::chrono::steady_clock;

  PhaseClock() : last_(clock::now()) {}

  /// Charges the time since the last switch to the current phase and makes
  /// `next` current. Returns the previous phase.
  Phase enter(Phase next) {
    const auto now = clock::now();
    times_[static_cast<std::size_t>(current_)] += std::chrono::duration<double>(now - last_).count();
    last_ = now;
    const Phase prev = current_;
    current_ = next;
    return prev;
  }

  const PhaseTimes& flush() {
    enter(current_);
    return times_;
  }

  const PhaseTimes& times() const { return times_; }

 private:
  PhaseTimes times_{};
  Phase current_ = Phase::other;
  clock::time_point last_;
};

/// Switches a clock to a phase for the lifetime of the guard.
class PhaseScope {
 public:
  PhaseScope(PhaseClock* clock, Phase p) : clock_(clock) {
    if (clock_) prev_ = clock_->enter(p);
  }
  ~PhaseScope() {
    if (clock_) clock_->enter(prev_);
  }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  PhaseClock* clock_;
  Phase prev_ = Phase::other;
};

}  // namespace dmst
