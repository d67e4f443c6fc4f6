#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rallyviz/events.h"
#include "rallyviz/expr.h"
#include "rallyviz/geometry.h"
#include "rallyviz/tracking.h"

namespace rallyviz {

enum class TacticKind { PotentialRoutes, PotentialPlacements, StrokeEffect, PlayerTactic, KeyStroke };
enum class Provenance { RuleEngine, Imported };

std::string_view to_string(TacticKind kind);
TacticKind parse_tactic_kind(std::string_view s);
std::string_view to_string(Provenance p);

struct WeightedCell {
  PlacementCell cell;
  double probability = 0.0;
  bool operator==(const WeightedCell&) const = default;
};

/// Quadratic arc in screen space from the ball to a target cell centre.
struct Route {
  Vec2 start;
  Vec2 control;
  Vec2 end;
  PlacementCell cell;
  double probability = 0.0;

  Vec2 point_at(double t) const;
  /// segments+1 points; the last one is exactly `end`.
  std::vector<Vec2> sample(int segments = 16) const;
  bool operator==(const Route&) const = default;
};

struct PlacementDistribution {
  std::vector<WeightedCell> cells;
  bool operator==(const PlacementDistribution&) const = default;
};

struct RouteSet {
  std::vector<Route> routes;
  bool operator==(const RouteSet&) const = default;
};

struct TacticLabel {
  std::string label;
  bool operator==(const TacticLabel&) const = default;
};

using TacticPayload = std::variant<PlacementDistribution, RouteSet, TacticLabel>;

struct TacticFact {
  std::string fact_id;
  TacticKind kind = TacticKind::KeyStroke;
  std::string anchor_event;
  TacticPayload payload;
  Provenance provenance = Provenance::RuleEngine;
  bool operator==(const TacticFact&) const = default;
};

/// Read-only view of the extracted lower-level data that rules run against.
struct RallyContext {
  const TrackingDataset& dataset;
  const BallTrack& track;
  const EventSet& events;
};

using PlacementPrior = std::array<double, 9>;
inline constexpr PlacementPrior kUniformPrior = {1, 1, 1, 1, 1, 1, 1, 1, 1};

/// Where the stroking player took the ball: the last bounce on their own
/// half since the previous stroke.
std::optional<PlacementCell> reception_of(const Event& stroke, const EventSet& events);

/// End-line reception restricts the return to the opponent's end-line row,
/// uniformly; any other reception spreads the prior over all nine opponent
/// cells. Throws when the reception is unknown.
TacticFact infer_potential_placements(const Event& stroke, const std::optional<PlacementCell>& reception,
                                      const TableGeometry& table,
                                      const PlacementPrior& prior = kUniformPrior);

/// Prior spread over the opponent half, ignoring reception.
TacticFact prior_placements(const Event& stroke, const TableGeometry& table,
                            const PlacementPrior& prior = kUniformPrior);

TacticFact infer_potential_routes(const TacticFact& placements, Vec2 ball_position);

struct RuleEffect {
  TacticKind kind = TacticKind::StrokeEffect;
  std::string support = "prior";  // PotentialPlacements: "end_line" | "prior"
  PlacementPrior prior = kUniformPrior;
  std::string label;              // StrokeEffect / PlayerTactic / KeyStroke
};

struct TacticRule {
  std::string rule_id;
  EventKind applies_to = EventKind::Stroke;
  expr::Expression guard;
  RuleEffect effect;
};

struct RuleDiagnostic {
  std::string rule_id;
  std::string event_id;
  std::string message;
  bool operator==(const RuleDiagnostic&) const = default;
};

struct RuleRun {
  std::vector<TacticFact> facts;
  std::vector<RuleDiagnostic> diagnostics;
};

inline constexpr int kRulesSchemaVersion = 1;

std::vector<TacticRule> rules_from_json(const nlohmann::json& doc);
std::vector<TacticRule> load_rules(const std::string& path);
const std::vector<TacticRule>& default_rules();
const nlohmann::json& default_rules_json();

/// Guard variables an event exposes to rules.
expr::Variables rule_variables(const Event& event, const RallyContext& ctx);

/// Evaluates rules in rule_id order against every event they apply to, in
/// frame order. Guard failures become diagnostics; other rules still run.
RuleRun run_rules(const std::vector<TacticRule>& rules, const RallyContext& ctx);

struct ImportResult {
  std::vector<TacticFact> facts;
  std::vector<std::string> report;  // skipped entries, one line each
};

inline constexpr int kTacticsSchemaVersion = 1;

ImportResult import_tactics(const nlohmann::json& doc, const RallyContext& ctx);
ImportResult import_tactics(const std::string& path, const RallyContext& ctx);

/// Imported facts replace existing facts with the same (kind, anchor).
std::vector<TacticFact> merge_facts(const std::vector<TacticFact>& existing,
                                    const std::vector<TacticFact>& imported);

nlohmann::json to_json(const TacticFact& fact);
nlohmann::json facts_to_json(const std::vector<TacticFact>& facts);

}  // namespace rallyviz
