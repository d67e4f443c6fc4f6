#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rallyviz {

enum class DataCategory { Tracking, NonTracking };

// Ordered from low to high semantic level; the underlying value is the rank.
enum class DataLevel { Image = 0, Object = 1, Event = 2, Tactic = 3 };

enum class NarrativeOrder { Linear, FlashForward, FlashBack, TimeFork, ZigZag, Grouped };

enum class Subject { Ball, Player, Table, Rally };

enum class VisualFamily { GraphicalMark, VideoEffect };

inline constexpr int rank(DataLevel level) { return static_cast<int>(level); }

inline constexpr bool is_schedulable(NarrativeOrder order) {
  return order != NarrativeOrder::Grouped;
}

inline constexpr NarrativeOrder kAllOrders[] = {
    NarrativeOrder::Linear,   NarrativeOrder::FlashForward, NarrativeOrder::FlashBack,
    NarrativeOrder::TimeFork, NarrativeOrder::ZigZag,       NarrativeOrder::Grouped};

inline constexpr DataLevel kAllLevels[] = {DataLevel::Image, DataLevel::Object,
                                           DataLevel::Event, DataLevel::Tactic};

std::string_view to_string(DataCategory v);
std::string_view to_string(DataLevel v);
std::string_view to_string(NarrativeOrder v);
std::string_view to_string(Subject v);
std::string_view to_string(VisualFamily v);

// Parsers throw Error(Validation) on unknown names.
DataCategory parse_category(std::string_view s);
DataLevel parse_level(std::string_view s);
NarrativeOrder parse_order(std::string_view s);
Subject parse_subject(std::string_view s);
VisualFamily parse_family(std::string_view s);

struct DataAttributeKind {
  std::string name;
  DataLevel level = DataLevel::Object;
  DataCategory category = DataCategory::Tracking;
  Subject subject = Subject::Ball;

  bool operator==(const DataAttributeKind&) const = default;
};

struct VisualKind {
  std::string name;
  VisualFamily family = VisualFamily::GraphicalMark;

  bool operator==(const VisualKind&) const = default;
};

/// Closed vocabulary of data attributes and visual kinds. The built-in tables
/// cover table tennis; a user file may extend them (see docs/formats.md).
struct Registry {
  int version = 1;
  std::vector<DataAttributeKind> attributes;
  std::vector<VisualKind> visuals;

  const DataAttributeKind* find_attribute(std::string_view name) const;
  const VisualKind* find_visual(std::string_view name) const;
};

const Registry& builtin_registry();

/// Level of a registered attribute. Throws Error(NotFound) for unknown names.
DataLevel level_of(const Registry& registry, std::string_view attribute);
DataLevel level_of(std::string_view attribute);

struct Violation {
  std::string kind;     // "duplicate name", "level mismatch", "unknown subject", ...
  std::string subject;  // offending entry
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_registry(const Registry& registry);

/// Parses a registry file. Structural problems that a strongly typed Registry
/// cannot hold (unknown subject, unknown family) are reported, and the
/// offending entries dropped, so the caller sees every problem at once.
std::pair<Registry, ValidationReport> parse_registry(const nlohmann::json& doc);
nlohmann::json to_json(const Registry& registry);

struct VisualMappingPair {
  std::string attribute;
  std::string visual;
  bool operator==(const VisualMappingPair&) const = default;
};

struct ClipAnnotation {
  std::string clip_id;
  std::string sport = "table_tennis";
  DataLevel data_level = DataLevel::Object;
  NarrativeOrder narrative_order = NarrativeOrder::Linear;
  std::vector<VisualMappingPair> mappings;
  std::string source;

  bool operator==(const ClipAnnotation&) const = default;
};

/// Checks mappings non-empty, names registered, and data_level equal to the
/// highest level among mapped attributes.
std::vector<std::string> validate_annotation(const ClipAnnotation& clip,
                                             const Registry& registry = builtin_registry());

nlohmann::json to_json(const ClipAnnotation& clip);
ClipAnnotation annotation_from_json(const nlohmann::json& j);

inline constexpr int kCorpusSchemaVersion = 1;

nlohmann::json corpus_to_json(const std::vector<ClipAnnotation>& clips);
std::vector<ClipAnnotation> corpus_from_json(const nlohmann::json& doc, const Registry& registry = builtin_registry());
std::vector<ClipAnnotation> load_corpus(const std::string& path, const Registry& registry = builtin_registry());

}  // namespace rallyviz
