#include "rallyviz/pyramid.h"

#include <algorithm>
#include <functional>
#include <set>

#include "rallyviz/error.h"
#include "rallyviz/hash.h"

namespace rallyviz {

using nlohmann::json;

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Rally: return "Rally";
    case NodeKind::Turn: return "Turn";
    case NodeKind::Event: return "Event";
    case NodeKind::Tactic: return "Tactic";
    case NodeKind::ObjectAttribute: return "ObjectAttribute";
    case NodeKind::Frame: return "Frame";
  }
  return "?";
}

const PyramidNode* Pyramid::find(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.node_id == id) return &n;
  return nullptr;
}

size_t Pyramid::count(NodeKind kind) const {
  return static_cast<size_t>(
      std::count_if(nodes.begin(), nodes.end(), [&](const PyramidNode& n) { return n.kind == kind; }));
}

namespace {

FrameSpan intersect(FrameSpan a, FrameSpan b) {
  return {std::max(a.start, b.start), std::min(a.end, b.end)};
}

class Builder {
 public:
  explicit Builder(Pyramid& out) : out_(out) {}

  // Appends a node under `parent` (empty for the root) and returns its index.
  size_t add(const std::string& parent, NodeKind kind, DataLevel level, FrameSpan span,
             const std::string& ref, std::optional<PlayerId> player = std::nullopt) {
    PyramidNode n;
    n.kind = kind;
    n.level = level;
    n.span = span;
    n.ref = ref;
    n.player = player;
    std::string key = parent + "|" + std::string(to_string(kind)) + "|" + ref + "|" +
                      std::to_string(span.start) + ":" + std::to_string(span.end);
    if (player) key += "|" + std::string(to_string(*player));
    n.node_id = hex64(fnv1a64(key)).substr(0, 12);
    if (!parent.empty()) out_.nodes[index_.at(parent)].children.push_back(n.node_id);
    index_[n.node_id] = out_.nodes.size();
    out_.nodes.push_back(std::move(n));
    return out_.nodes.size() - 1;
  }

  const std::string& id(size_t index) const { return out_.nodes[index].node_id; }

 private:
  Pyramid& out_;
  std::map<std::string, size_t> index_;
};

void add_object_nodes(Builder& b, const std::string& parent, const Event& e, const BallTrack& track,
                      FrameSpan within) {
  const int f = std::clamp(e.key_frame(), within.start, within.end);
  auto add_attr = [&](const std::string& name, std::optional<PlayerId> player) {
    const size_t idx = b.add(parent, NodeKind::ObjectAttribute, DataLevel::Object, {f, f}, name, player);
    b.add(b.id(idx), NodeKind::Frame, DataLevel::Image, {f, f}, std::to_string(f));
  };
  if (track.defined(f)) add_attr("ball_position", std::nullopt);
  if (e.kind == EventKind::Stroke && e.player) add_attr("player_posture", e.player);
}

}  // namespace

Pyramid build_pyramid(const TrackingDataset& dataset, const BallTrack& track, const EventSet& events,
                      const std::vector<TacticFact>& facts) {
  const int n = static_cast<int>(dataset.frames.size());
  if (n == 0) fail("empty dataset");
  const FrameSpan rally{0, n - 1};
  for (const Event* e : events.all()) {
    if (e->span.empty() || !rally.contains(e->span))
      fail(e->event_id + ": frame span outside the clip");
  }

  Pyramid p;
  Builder b(p);
  const size_t root = b.add("", NodeKind::Rally, DataLevel::Tactic, rally, "rally");
  p.root = b.id(root);

  std::set<std::string> placed;
  for (const auto& turn : events.turns) {
    const size_t t = b.add(p.root, NodeKind::Turn, DataLevel::Event, turn.span, turn.event_id, turn.player);
    const std::string turn_id = b.id(t);
    for (const Event* e : events.all()) {
      if (e->kind == EventKind::Turn || placed.count(e->event_id)) continue;
      if (!turn.span.contains(e->key_frame())) continue;
      placed.insert(e->event_id);
      const FrameSpan span = intersect(e->span, turn.span);
      const size_t ei = b.add(turn_id, NodeKind::Event, DataLevel::Event, span, e->event_id, e->player);
      add_object_nodes(b, b.id(ei), *e, track, span);
    }
  }
  for (const Event* e : events.all()) {
    if (e->kind == EventKind::Turn || placed.count(e->event_id)) continue;
    const size_t ei = b.add(p.root, NodeKind::Event, DataLevel::Event, e->span, e->event_id, e->player);
    add_object_nodes(b, b.id(ei), *e, track, e->span);
  }
  if (events.all().empty()) {
    for (int f = 0; f < n; ++f) {
      const size_t oi = b.add(p.root, NodeKind::ObjectAttribute, DataLevel::Object, {f, f}, "objects");
      b.add(b.id(oi), NodeKind::Frame, DataLevel::Image, {f, f}, std::to_string(f));
    }
  }
  for (const auto& fact : facts) {
    const Event* anchor = events.find(fact.anchor_event);
    const FrameSpan span = anchor ? anchor->span : rally;
    b.add(p.root, NodeKind::Tactic, DataLevel::Tactic, span, fact.fact_id);
  }
  return p;
}

Pyramid brush(const Pyramid& pyramid, FrameSpan interval) {
  if (interval.empty()) fail("empty brush interval");
  const auto& root = pyramid.root_node();
  if (!root.span.contains(interval)) fail("brush interval outside the clip");
  Pyramid out;
  out.root = pyramid.root;
  std::set<std::string> keep;
  for (const auto& n : pyramid.nodes)
    if (n.span.intersects(interval)) keep.insert(n.node_id);
  for (const auto& n : pyramid.nodes) {
    if (!keep.count(n.node_id)) continue;
    PyramidNode copy = n;
    copy.children.clear();
    for (const auto& c : n.children)
      if (keep.count(c)) copy.children.push_back(c);
    out.nodes.push_back(std::move(copy));
  }
  return out;
}

json to_json(const Pyramid& pyramid) {
  json nodes = json::array();
  for (const auto& n : pyramid.nodes) {
    json jn = {{"node_id", n.node_id},
               {"level", to_string(n.level)},
               {"kind", to_string(n.kind)},
               {"frame_span", {n.span.start, n.span.end}},
               {"ref", n.ref},
               {"children", n.children}};
    if (n.player) jn["player"] = to_string(*n.player);
    nodes.push_back(std::move(jn));
  }
  return {{"root", pyramid.root}, {"nodes", nodes}};
}

const TacticFact* Rally::fact(TacticKind kind, std::string_view anchor) const {
  for (const auto& f : facts)
    if (f.kind == kind && f.anchor_event == anchor) return &f;
  return nullptr;
}

Rally analyze(TrackingDataset dataset, const AnalysisOptions& options) {
  Rally r;
  r.dataset = std::move(dataset);
  r.track = build_ball_track(r.dataset);
  r.events = options.event_import ? events_from_json(*options.event_import, r.dataset)
                                  : detect_events(r.dataset, r.track, options.events);
  const RallyContext ctx{r.dataset, r.track, r.events};
  RuleRun run = run_rules(options.rules, ctx);
  r.facts = std::move(run.facts);
  r.diagnostics = std::move(run.diagnostics);
  if (options.tactic_import) {
    ImportResult imported = import_tactics(*options.tactic_import, ctx);
    r.facts = merge_facts(r.facts, imported.facts);
    r.import_report = std::move(imported.report);
  }
  r.pyramid = build_pyramid(r.dataset, r.track, r.events, r.facts);
  return r;
}

std::string to_string(const SubjectRef& s) {
  if (s.subject == Subject::Player && s.player) return "Player " + std::string(to_string(*s.player));
  return std::string(to_string(s.subject));
}

SubjectRef parse_subject_ref(std::string_view s) {
  if (s == "A" || s == "Player A" || s == "player_a") return {Subject::Player, PlayerId::A};
  if (s == "B" || s == "Player B" || s == "player_b") return {Subject::Player, PlayerId::B};
  if (s == "ball" || s == "Ball") return {Subject::Ball, std::nullopt};
  if (s == "rally" || s == "Rally") return {Subject::Rally, std::nullopt};
  if (s == "table" || s == "Table") return {Subject::Table, std::nullopt};
  fail("unknown subject '" + std::string(s) + "'");
}

DataLevel level_filter(NarrativePurpose purpose) {
  switch (purpose) {
    case NarrativePurpose::Entertainment: return DataLevel::Object;
    case NarrativePurpose::Middle: return DataLevel::Event;
    case NarrativePurpose::Education: return DataLevel::Tactic;
  }
  return DataLevel::Tactic;
}

NarrativePurpose parse_purpose(std::string_view s) {
  if (s == "Entertainment" || s == "entertainment") return NarrativePurpose::Entertainment;
  if (s == "Middle" || s == "middle") return NarrativePurpose::Middle;
  if (s == "Education" || s == "education") return NarrativePurpose::Education;
  fail("unknown narrative purpose '" + std::string(s) + "'");
}

namespace {

// Stroke that opened the turn containing `frame`.
const Event* turn_stroke(const Rally& rally, int frame) {
  const Event* turn = rally.events.turn_at(frame);
  if (turn == nullptr) return nullptr;
  const std::string* stroke_id = turn->text("stroke");
  return stroke_id ? rally.events.find(*stroke_id) : nullptr;
}

bool attribute_available(const Rally& rally, const DataAttributeKind& a, const SubjectRef& subject,
                         int frame) {
  const Event* turn = rally.events.turn_at(frame);
  const Event* stroke = turn_stroke(rally, frame);
  const std::string& n = a.name;

  if (a.subject == Subject::Ball) {
    if (!rally.track.defined(frame)) return false;
    if (a.level == DataLevel::Object) return true;
    if (n == "ball_placement") {
      if (turn == nullptr) return false;
      return std::any_of(rally.events.bounces.begin(), rally.events.bounces.end(),
                         [&](const Event& b) { return turn->span.contains(b.span.start); });
    }
    if (n == "ball_rotation_speed") return stroke && stroke->number("rotation_rpm");
    if (n == "potential_placements")
      return stroke && rally.fact(TacticKind::PotentialPlacements, stroke->event_id);
    if (n == "potential_routes") return stroke && rally.fact(TacticKind::PotentialRoutes, stroke->event_id);
    return false;
  }
  if (a.subject == Subject::Player) {
    if (!subject.player) return false;
    const PlayerId p = *subject.player;
    if (a.category == DataCategory::NonTracking) {
      return n == "player_name" && !rally.dataset.player_names[p == PlayerId::A ? 0 : 1].empty();
    }
    if (a.level == DataLevel::Object) return true;  // both players are tracked in every frame
    const bool own_stroke = stroke && stroke->player == p;
    if (n == "stroke_technique") return own_stroke;
    if (n == "stroke_effect") return own_stroke && rally.fact(TacticKind::StrokeEffect, stroke->event_id);
    if (n == "player_tactic") return own_stroke && rally.fact(TacticKind::PlayerTactic, stroke->event_id);
    return false;
  }
  if (a.subject == Subject::Rally) {
    if (n == "key_stroke")
      return std::any_of(rally.facts.begin(), rally.facts.end(),
                         [](const TacticFact& f) { return f.kind == TacticKind::KeyStroke; });
    return false;
  }
  return false;
}

}  // namespace

std::vector<DataAttributeKind> attributes_at(const Rally& rally, const SubjectRef& subject, int frame,
                                             DataLevel filter, const Registry& registry) {
  if (frame < 0 || frame >= static_cast<int>(rally.dataset.frames.size()))
    fail("frame " + std::to_string(frame) + " outside the clip");
  std::vector<DataAttributeKind> out;
  for (const auto& a : registry.attributes) {
    if (a.subject != subject.subject || rank(a.level) > rank(filter)) continue;
    if (attribute_available(rally, a, subject, frame)) out.push_back(a);
  }
  std::sort(out.begin(), out.end(), [](const DataAttributeKind& x, const DataAttributeKind& y) {
    if (x.level != y.level) return rank(x.level) > rank(y.level);
    return x.name < y.name;
  });
  return out;
}

DataSelection make_selection(const Rally& rally, const SubjectRef& subject, std::string_view attribute,
                             int frame, DataLevel filter) {
  const auto available = attributes_at(rally, subject, frame, filter);
  const bool ok = std::any_of(available.begin(), available.end(),
                              [&](const DataAttributeKind& a) { return a.name == attribute; });
  if (!ok) {
    throw Error(ErrorCode::Conflict, "attribute '" + std::string(attribute) + "' unavailable for " +
                                         to_string(subject) + " at frame " + std::to_string(frame));
  }
  DataSelection s;
  s.attribute = std::string(attribute);
  s.subject = subject;
  s.anchor_frame = frame;
  const Event* turn = rally.events.turn_at(frame);
  const bool trajectory = attribute == "ball_trajectory" || attribute == "player_trajectory";
  if (turn != nullptr) {
    s.source_span = trajectory ? turn->span : FrameSpan{frame, turn->span.end};
  } else {
    s.source_span = trajectory ? FrameSpan{std::max(0, frame - 25), frame} : FrameSpan{frame, frame};
  }
  s.selection_id = "sel-" + hex64(fnv1a64(to_string(subject) + "|" + s.attribute + "|" +
                                          std::to_string(frame)))
                                .substr(0, 8);
  return s;
}

json to_json(const DataSelection& s) {
  return {{"selection_id", s.selection_id},
          {"attribute", s.attribute},
          {"subject", to_string(s.subject)},
          {"anchor_frame", s.anchor_frame},
          {"source_span", {s.source_span.start, s.source_span.end}}};
}

DataSelection selection_from_json(const json& j) {
  DataSelection s;
  try {
    s.selection_id = j.at("selection_id").get<std::string>();
    s.attribute = j.at("attribute").get<std::string>();
    s.subject = parse_subject_ref(j.at("subject").get<std::string>());
    s.anchor_frame = j.at("anchor_frame").get<int>();
    s.source_span = {j.at("source_span").at(0).get<int>(), j.at("source_span").at(1).get<int>()};
  } catch (const json::exception& e) {
    fail(std::string("malformed selection: ") + e.what());
  }
  if (s.source_span.empty()) fail(s.selection_id + ": empty source_span");
  return s;
}

std::vector<std::string> suggest_insights(const Rally& rally) {
  std::vector<std::string> out;
  const auto& turns = rally.events.turns;
  for (size_t i = turns.size() >= 2 ? turns.size() - 2 : 0; i < turns.size(); ++i)
    if (const std::string* s = turns[i].text("stroke")) out.push_back(*s);
  return out;
}

}  // namespace rallyviz
