#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scaffold/scoring.hpp"
#include "scaffold/types.hpp"

namespace scaffold::drl {

using logic::RuleId;

inline constexpr std::size_t kStateSize = 74;
inline constexpr int kSessionLength = 30;

enum class FeatureKind : std::uint8_t {
  Ratio,  // already in [0,1]; 0.5 when there is no data
  Count,  // min-max scaled; 0 when there is no data
  Time,   // min-max scaled seconds; 0 when there is no data
};

enum class FeatureGroup : std::uint8_t { Mastery, Temporal, HelpSeeking, History };

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
  FeatureGroup group;
};

class FeatureRegistry {
 public:
  /// Throws Error{RegistryMismatch} on duplicate names.
  explicit FeatureRegistry(std::vector<FeatureSpec> specs);

  std::size_t size() const { return specs_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<FeatureSpec>& specs() const { return specs_; }
  std::vector<std::string> names() const;
  /// Throws Error{RegistryMismatch} for an unknown name.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<FeatureSpec> specs_;
};

/// The fixed 74-slot layout.
const FeatureRegistry& default_registry();

std::string_view to_string(FeatureKind kind);
std::string_view to_string(FeatureGroup group);

enum class Stage : std::uint8_t { Intro, Pretest, Training, LevelEnd, Posttest };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view s);

/// One completed problem as seen by the state extractor.
struct HistoryEvent {
  int level = 1;
  int slot = 1;  // 1-based position within the level
  Stage stage = Stage::Training;
  ProblemType type = ProblemType::PS;
  std::vector<scoring::RuleApplication> applications;
  double duration_seconds = 0.0;
  int hints = 0;
  double score = 0.0;                  // composite, 0-100; unused for intro
  std::map<RuleId, double> mastery;   // knowledge-tracing estimates after the problem
};

/// The upcoming adaptive slot.
struct DecisionPoint {
  int level = 2;
  int slot = 1;
};

struct TimeRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const TimeRange&) const = default;
};

/// Frozen scaling constants: per-level problem time range and per-feature
/// min/max for Count and Time features.
struct Normalizer {
  std::array<TimeRange, 8> level_time{};  // index = level
  std::vector<double> feature_lo;
  std::vector<double> feature_hi;

  /// Min-max within the level, clamped to [0,1]; 0 for an empty range.
  double normalized_time(int level, double seconds) const;

  bool operator==(const Normalizer&) const = default;
};

/// Unscaled feature values; NaN marks "no data yet".
std::vector<double> raw_features(std::span<const HistoryEvent> history, DecisionPoint decision,
                                 const Normalizer& normalizer);

/// Raw features scaled into [0,1] with the documented defaults. Throws
/// Error{RegistryMismatch} if the registry or normalizer is not 74 wide.
std::vector<double> extract_state(std::span<const HistoryEvent> history, DecisionPoint decision,
                                  const FeatureRegistry& registry, const Normalizer& normalizer);

/// Indices of training events, i.e. the adaptive decisions of a session.
std::vector<std::size_t> decision_indices(std::span<const HistoryEvent> session);

/// Level time ranges from every non-intro event, then feature ranges from
/// the raw features at every decision point.
Normalizer fit_normalizer(std::span<const std::vector<HistoryEvent>> sessions,
                          const FeatureRegistry& registry = default_registry());

}  // namespace scaffold::drl
