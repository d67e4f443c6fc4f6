#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rallyviz/design_space.h"
#include "rallyviz/events.h"
#include "rallyviz/tactics.h"
#include "rallyviz/tracking.h"

namespace rallyviz {

enum class NodeKind { Rally, Turn, Event, Tactic, ObjectAttribute, Frame };
std::string_view to_string(NodeKind kind);

struct PyramidNode {
  std::string node_id;
  DataLevel level = DataLevel::Image;
  NodeKind kind = NodeKind::Frame;
  FrameSpan span;
  std::string ref;  // event id, fact id, attribute name, or frame number
  std::optional<PlayerId> player;
  std::vector<std::string> children;
  bool operator==(const PyramidNode&) const = default;
};

/// Image -> Object -> Event -> Tactic tree over one rally. Nodes are stored
/// in depth-first order; ids are content-derived and stable across rebuilds.
struct Pyramid {
  std::string root;
  std::vector<PyramidNode> nodes;

  const PyramidNode* find(std::string_view id) const;
  const PyramidNode& root_node() const { return *find(root); }
  size_t count(NodeKind kind) const;
  bool operator==(const Pyramid&) const = default;
};

Pyramid build_pyramid(const TrackingDataset& dataset, const BallTrack& track, const EventSet& events,
                      const std::vector<TacticFact>& facts);

/// Subtree of every node whose span intersects the interval; ids preserved.
/// Throws on an empty interval or one outside the clip.
Pyramid brush(const Pyramid& pyramid, FrameSpan interval);

nlohmann::json to_json(const Pyramid& pyramid);

/// Everything extracted from one rally.
struct Rally {
  TrackingDataset dataset;
  BallTrack track;
  EventSet events;
  std::vector<TacticFact> facts;
  std::vector<RuleDiagnostic> diagnostics;
  std::vector<std::string> import_report;
  Pyramid pyramid;

  const TacticFact* fact(TacticKind kind, std::string_view anchor) const;
};

struct AnalysisOptions {
  EventParams events;
  std::vector<TacticRule> rules = default_rules();
  std::optional<nlohmann::json> tactic_import;
  std::optional<nlohmann::json> event_import;  // replaces detection when present
};

Rally analyze(TrackingDataset dataset, const AnalysisOptions& options = {});

/// Who a selection or attribute query is about.
struct SubjectRef {
  Subject subject = Subject::Ball;
  std::optional<PlayerId> player;

  bool operator==(const SubjectRef&) const = default;
};
std::string to_string(const SubjectRef& s);
SubjectRef parse_subject_ref(std::string_view s);  // "Ball", "Player A", "A", "Rally", ...

enum class NarrativePurpose { Entertainment, Middle, Education };
DataLevel level_filter(NarrativePurpose purpose);
NarrativePurpose parse_purpose(std::string_view s);

/// Registry attributes available for the subject at the frame, limited to
/// levels <= level_filter, ordered by level descending then name.
std::vector<DataAttributeKind> attributes_at(const Rally& rally, const SubjectRef& subject, int frame,
                                             DataLevel level_filter,
                                             const Registry& registry = builtin_registry());

struct DataSelection {
  std::string selection_id;
  std::string attribute;
  SubjectRef subject;
  int anchor_frame = 0;
  FrameSpan source_span;
  bool operator==(const DataSelection&) const = default;
};

/// Resolves a selection; throws Error(Conflict) when the attribute is not
/// available for the subject at that frame.
DataSelection make_selection(const Rally& rally, const SubjectRef& subject, std::string_view attribute,
                             int frame, DataLevel level_filter = DataLevel::Tactic);

nlohmann::json to_json(const DataSelection& s);
DataSelection selection_from_json(const nlohmann::json& j);

/// Default "interesting data" hook: the strokes of the last two turns.
std::vector<std::string> suggest_insights(const Rally& rally);

}  // namespace rallyviz
