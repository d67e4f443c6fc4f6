#include "rallyviz/tactics.h"

#include <algorithm>
#include <map>
#include <set>

#include "rallyviz/error.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;

namespace {

constexpr std::pair<TacticKind, std::string_view> kKindNames[] = {
    {TacticKind::PotentialRoutes, "PotentialRoutes"},
    {TacticKind::PotentialPlacements, "PotentialPlacements"},
    {TacticKind::StrokeEffect, "StrokeEffect"},
    {TacticKind::PlayerTactic, "PlayerTactic"},
    {TacticKind::KeyStroke, "KeyStroke"}};

TableHalf own_half(PlayerId p) { return p == PlayerId::A ? TableHalf::ASide : TableHalf::BSide; }

const TableGeometry table_at(const TrackingDataset& dataset, int frame) {
  const int last = static_cast<int>(dataset.frames.size()) - 1;
  return TableGeometry(dataset.frames[static_cast<size_t>(std::clamp(frame, 0, last))].table.quad);
}

std::vector<WeightedCell> normalized(std::vector<WeightedCell> cells) {
  double total = 0.0;
  for (const auto& c : cells) {
    if (c.probability < 0) fail("placement weights must be non-negative");
    total += c.probability;
  }
  if (!(total > 0)) fail("placement weights sum to zero");
  std::vector<WeightedCell> out;
  for (auto& c : cells) {
    if (c.probability == 0.0) continue;
    c.probability /= total;
    out.push_back(c);
  }
  return out;
}

TacticFact placements_fact(const Event& stroke, std::vector<WeightedCell> cells) {
  TacticFact f;
  f.kind = TacticKind::PotentialPlacements;
  f.anchor_event = stroke.event_id;
  f.payload = PlacementDistribution{normalized(std::move(cells))};
  return f;
}

PlayerId stroker(const Event& stroke) {
  if (stroke.kind != EventKind::Stroke || !stroke.player)
    fail(stroke.event_id + ": placements need a stroke by a player");
  return *stroke.player;
}

json cell_json(const PlacementCell& c) {
  return {{"half", to_string(c.half)}, {"zone", c.zone}, {"point", {c.point.x, c.point.y}}};
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

}  // namespace

std::string_view to_string(TacticKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

TacticKind parse_tactic_kind(std::string_view s) {
  for (const auto& [k, name] : kKindNames)
    if (name == s) return k;
  fail("unknown tactic kind '" + std::string(s) + "'");
}

std::string_view to_string(Provenance p) { return p == Provenance::RuleEngine ? "RuleEngine" : "Imported"; }

Vec2 Route::point_at(double t) const {
  const double u = 1.0 - t;
  return start * (u * u) + control * (2 * u * t) + end * (t * t);
}

std::vector<Vec2> Route::sample(int segments) const {
  std::vector<Vec2> pts;
  for (int i = 0; i < segments; ++i) pts.push_back(point_at(static_cast<double>(i) / segments));
  pts.push_back(end);
  return pts;
}

std::optional<PlacementCell> reception_of(const Event& stroke, const EventSet& events) {
  if (!stroke.player) return std::nullopt;
  const int hit = stroke.key_frame();
  int since = -1;
  for (const auto& s : events.strokes)
    if (s.key_frame() < hit) since = std::max(since, s.key_frame());
  std::optional<PlacementCell> found;
  for (const auto& b : events.bounces) {
    const int f = b.span.start;
    if (b.placement && f > since && f <= hit && b.placement->half == own_half(*stroke.player))
      found = b.placement;
  }
  return found;
}

TacticFact infer_potential_placements(const Event& stroke, const std::optional<PlacementCell>& reception,
                                      const TableGeometry& table, const PlacementPrior& prior) {
  const PlayerId player = stroker(stroke);
  if (!stroke.hit_frame) fail(stroke.event_id + ": stroke has no hit frame");
  if (!reception) fail(stroke.event_id + ": missing reception position");
  if (reception->row() != 0) return prior_placements(stroke, table, prior);

  const TableHalf target = own_half(opponent(player));
  std::vector<WeightedCell> cells;
  for (int zone = 0; zone < 3; ++zone)
    cells.push_back({{target, zone, table.cell_center(target, zone)}, 1.0});
  return placements_fact(stroke, std::move(cells));
}

TacticFact prior_placements(const Event& stroke, const TableGeometry& table, const PlacementPrior& prior) {
  const TableHalf target = own_half(opponent(stroker(stroke)));
  std::vector<WeightedCell> cells;
  for (int zone = 0; zone < 9; ++zone)
    cells.push_back({{target, zone, table.cell_center(target, zone)}, prior[static_cast<size_t>(zone)]});
  return placements_fact(stroke, std::move(cells));
}

TacticFact infer_potential_routes(const TacticFact& placements, Vec2 ball_position) {
  const auto* dist = std::get_if<PlacementDistribution>(&placements.payload);
  if (placements.kind != TacticKind::PotentialPlacements || dist == nullptr)
    fail("routes need a PotentialPlacements fact");
  if (dist->cells.empty()) fail("empty support");
  RouteSet set;
  for (const auto& wc : dist->cells) {
    Route r;
    r.start = ball_position;
    r.end = wc.cell.point;
    const Vec2 mid = lerp(r.start, r.end, 0.5);
    r.control = {mid.x, mid.y - 0.3 * distance(r.start, r.end)};
    r.cell = wc.cell;
    r.probability = wc.probability;
    set.routes.push_back(r);
  }
  TacticFact f;
  f.kind = TacticKind::PotentialRoutes;
  f.anchor_event = placements.anchor_event;
  f.payload = std::move(set);
  f.provenance = placements.provenance;
  return f;
}

std::vector<TacticRule> rules_from_json(const json& doc) {
  require_schema(doc, kRulesSchemaVersion, "rules");
  std::vector<TacticRule> rules;
  std::set<std::string> ids;
  for (const auto& j : doc.value("rules", json::array())) {
    TacticRule r;
    try {
      r.rule_id = j.at("rule_id").get<std::string>();
      r.applies_to = parse_event_kind(j.value("applies_to", "Stroke"));
      r.guard = expr::Expression::parse(j.value("guard", "true"));
      const auto& e = j.at("effect");
      r.effect.kind = parse_tactic_kind(e.at("kind").get<std::string>());
      r.effect.support = e.value("support", "prior");
      r.effect.label = e.value("label", "");
      if (e.contains("prior")) {
        if (e["prior"].size() != 9) fail(r.rule_id + ": prior needs 9 weights");
        for (size_t i = 0; i < 9; ++i) r.effect.prior[i] = e["prior"][i].get<double>();
      }
    } catch (const json::exception& ex) {
      fail(std::string("malformed rule: ") + ex.what());
    } catch (const expr::ParseError& ex) {
      fail(j.value("rule_id", "?") + ": guard does not parse: " + ex.what());
    }
    if (r.effect.kind == TacticKind::PotentialPlacements && r.effect.support != "end_line" &&
        r.effect.support != "prior")
      fail(r.rule_id + ": unknown support '" + r.effect.support + "'");
    if (!ids.insert(r.rule_id).second) fail("duplicate rule_id '" + r.rule_id + "'");
    rules.push_back(std::move(r));
  }
  std::sort(rules.begin(), rules.end(),
            [](const TacticRule& a, const TacticRule& b) { return a.rule_id < b.rule_id; });
  return rules;
}

std::vector<TacticRule> load_rules(const std::string& path) { return rules_from_json(read_json(path)); }

const json& default_rules_json() {
  static const json doc = json::parse(R"RULES({
  "schema_version": 1,
  "rules": [
    {"rule_id": "r10_end_line_return", "applies_to": "Stroke",
     "guard": "reception.known and reception.row == 0",
     "effect": {"kind": "PotentialPlacements", "support": "end_line"}},
    {"rule_id": "r20_open_return", "applies_to": "Stroke",
     "guard": "not (reception.known and reception.row == 0)",
     "effect": {"kind": "PotentialPlacements", "support": "prior",
                "prior": [1, 1, 1, 1, 1, 1, 1, 1, 1]}},
    {"rule_id": "r30_routes", "applies_to": "Stroke", "guard": "true",
     "effect": {"kind": "PotentialRoutes"}},
    {"rule_id": "r40_effect_offensive", "applies_to": "Stroke",
     "guard": "technique in [\"forehand_attack\", \"backhand_attack\"] and speed >= 900",
     "effect": {"kind": "StrokeEffect", "label": "offensive"}},
    {"rule_id": "r41_effect_defensive", "applies_to": "Stroke",
     "guard": "technique in [\"forehand_push\", \"backhand_push\"]",
     "effect": {"kind": "StrokeEffect", "label": "defensive"}},
    {"rule_id": "r42_effect_neutral", "applies_to": "Stroke",
     "guard": "technique == \"unknown\" or (technique in [\"forehand_attack\", \"backhand_attack\"] and speed < 900)",
     "effect": {"kind": "StrokeEffect", "label": "neutral"}}
  ]
})RULES");
  return doc;
}

const std::vector<TacticRule>& default_rules() {
  static const std::vector<TacticRule> rules = rules_from_json(default_rules_json());
  return rules;
}

expr::Variables rule_variables(const Event& event, const RallyContext& ctx) {
  expr::Variables v;
  v["event.id"] = event.event_id;
  v["kind"] = std::string(to_string(event.kind));
  v["frame"] = event.key_frame();
  v["span.start"] = event.span.start;
  v["span.end"] = event.span.end;
  if (event.player) v["player"] = std::string(to_string(*event.player));
  for (const auto& [k, val] : event.attributes)
    std::visit([&](const auto& x) { v[k] = expr::Value(x); }, val);
  if (event.placement) {
    v["placement.half"] = std::string(to_string(event.placement->half));
    v["placement.zone"] = event.placement->zone;
    v["placement.row"] = event.placement->row();
    v["placement.col"] = event.placement->col();
  }
  if (event.kind == EventKind::Stroke) {
    const auto reception = reception_of(event, ctx.events);
    v["reception.known"] = reception.has_value();
    if (reception) {
      v["reception.half"] = std::string(to_string(reception->half));
      v["reception.zone"] = reception->zone;
      v["reception.row"] = reception->row();
      v["reception.col"] = reception->col();
    }
  }
  return v;
}

RuleRun run_rules(const std::vector<TacticRule>& rules, const RallyContext& ctx) {
  std::vector<const TacticRule*> ordered;
  for (const auto& r : rules) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TacticRule* a, const TacticRule* b) { return a->rule_id < b->rule_id; });

  std::vector<const Event*> events = ctx.events.all();
  std::stable_sort(events.begin(), events.end(), [](const Event* a, const Event* b) {
    return a->key_frame() < b->key_frame();
  });

  RuleRun run;
  // Placements produced so far, for route construction.
  std::map<std::string, size_t> placements_by_event;
  for (const TacticRule* rule : ordered) {
    for (const Event* event : events) {
      if (event->kind != rule->applies_to) continue;
      try {
        if (!rule->guard.test(rule_variables(*event, ctx))) continue;
        TacticFact fact;
        const auto& eff = rule->effect;
        switch (eff.kind) {
          case TacticKind::PotentialPlacements: {
            const TableGeometry table = table_at(ctx.dataset, event->key_frame());
            fact = eff.support == "end_line"
                       ? infer_potential_placements(*event, reception_of(*event, ctx.events), table, eff.prior)
                       : prior_placements(*event, table, eff.prior);
            break;
          }
          case TacticKind::PotentialRoutes: {
            auto it = placements_by_event.find(event->event_id);
            if (it == placements_by_event.end()) throw Error(ErrorCode::Validation, "empty support");
            const int f = event->key_frame();
            if (!ctx.track.defined(f)) throw Error(ErrorCode::Validation, "ball position undefined");
            fact = infer_potential_routes(run.facts[it->second], ctx.track.at(f));
            break;
          }
          default:
            fact.kind = eff.kind;
            fact.anchor_event = event->event_id;
            fact.payload = TacticLabel{eff.label};
            break;
        }
        fact.provenance = Provenance::RuleEngine;
        fact.fact_id = rule->rule_id + "@" + event->event_id;
        if (fact.kind == TacticKind::PotentialPlacements)
          placements_by_event[event->event_id] = run.facts.size();
        run.facts.push_back(std::move(fact));
      } catch (const std::exception& ex) {
        run.diagnostics.push_back({rule->rule_id, event->event_id, ex.what()});
      }
    }
  }
  return run;
}

ImportResult import_tactics(const json& doc, const RallyContext& ctx) {
  require_schema(doc, kTacticsSchemaVersion, "tactics import");
  ImportResult result;
  std::map<std::pair<TacticKind, std::string>, size_t> seen;
  for (const auto& j : doc.value("facts", json::array())) {
    try {
      TacticFact f;
      f.kind = parse_tactic_kind(j.at("kind").get<std::string>());
      f.anchor_event = j.at("anchor_event").get<std::string>();
      f.provenance = Provenance::Imported;
      const Event* anchor = ctx.events.find(f.anchor_event);
      if (anchor == nullptr) {
        result.report.push_back("skipped " + std::string(to_string(f.kind)) + ": anchor '" +
                                f.anchor_event + "' not found");
        continue;
      }
      f.fact_id = j.value("fact_id", "import:" + std::string(to_string(f.kind)) + "@" + f.anchor_event);
      const json payload = j.value("payload", json::object());
      if (f.kind == TacticKind::PotentialPlacements || f.kind == TacticKind::PotentialRoutes) {
        const TableGeometry table = table_at(ctx.dataset, anchor->key_frame());
        std::vector<WeightedCell> cells;
        for (const auto& c : payload.at("cells")) {
          const TableHalf half = parse_half(c.at("half").get<std::string>());
          const int zone = c.at("zone").get<int>();
          cells.push_back({{half, zone, table.cell_center(half, zone)}, c.at("probability").get<double>()});
        }
        TacticFact placements;
        placements.kind = TacticKind::PotentialPlacements;
        placements.anchor_event = f.anchor_event;
        placements.payload = PlacementDistribution{normalized(std::move(cells))};
        placements.provenance = Provenance::Imported;
        if (f.kind == TacticKind::PotentialRoutes) {
          const int frame = anchor->key_frame();
          if (!ctx.track.defined(frame)) fail("ball position undefined at anchor");
          f.payload = infer_potential_routes(placements, ctx.track.at(frame)).payload;
        } else {
          f.payload = placements.payload;
        }
      } else {
        f.payload = TacticLabel{payload.value("label", "")};
      }
      const auto key = std::make_pair(f.kind, f.anchor_event);
      if (auto it = seen.find(key); it != seen.end()) {
        result.facts[it->second] = std::move(f);  // later entries win inside one file
      } else {
        seen[key] = result.facts.size();
        result.facts.push_back(std::move(f));
      }
    } catch (const std::exception& ex) {
      result.report.push_back(std::string("skipped malformed fact: ") + ex.what());
    }
  }
  return result;
}

ImportResult import_tactics(const std::string& path, const RallyContext& ctx) {
  return import_tactics(read_json(path), ctx);
}

std::vector<TacticFact> merge_facts(const std::vector<TacticFact>& existing,
                                    const std::vector<TacticFact>& imported) {
  std::map<std::pair<TacticKind, std::string>, const TacticFact*> by_key;
  for (const auto& f : imported) by_key[{f.kind, f.anchor_event}] = &f;
  std::set<std::pair<TacticKind, std::string>> placed;
  std::vector<TacticFact> out;
  for (const auto& f : existing) {
    const auto key = std::make_pair(f.kind, f.anchor_event);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      out.push_back(f);
    } else if (placed.insert(key).second) {
      out.push_back(*it->second);
    }
  }
  for (const auto& f : imported) {
    const auto key = std::make_pair(f.kind, f.anchor_event);
    if (placed.insert(key).second) out.push_back(*by_key[key]);
  }
  return out;
}

json to_json(const TacticFact& fact) {
  json payload;
  if (const auto* d = std::get_if<PlacementDistribution>(&fact.payload)) {
    json cells = json::array();
    for (const auto& c : d->cells) {
      json jc = cell_json(c.cell);
      jc["probability"] = c.probability;
      cells.push_back(jc);
    }
    payload = {{"cells", cells}};
  } else if (const auto* r = std::get_if<RouteSet>(&fact.payload)) {
    json routes = json::array();
    for (const auto& rt : r->routes) {
      routes.push_back({{"start", vec_json(rt.start)},
                        {"control", vec_json(rt.control)},
                        {"end", vec_json(rt.end)},
                        {"cell", cell_json(rt.cell)},
                        {"probability", rt.probability}});
    }
    payload = {{"routes", routes}};
  } else {
    payload = {{"label", std::get<TacticLabel>(fact.payload).label}};
  }
  return {{"fact_id", fact.fact_id},
          {"kind", to_string(fact.kind)},
          {"anchor_event", fact.anchor_event},
          {"provenance", to_string(fact.provenance)},
          {"payload", payload}};
}

json facts_to_json(const std::vector<TacticFact>& facts) {
  json arr = json::array();
  for (const auto& f : facts) arr.push_back(to_json(f));
  return {{"schema_version", kTacticsSchemaVersion}, {"facts", arr}};
}

}  // namespace rallyviz
