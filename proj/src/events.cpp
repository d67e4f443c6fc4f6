#include "rallyviz/events.h"

#include <algorithm>
#include <cmath>

#include "rallyviz/error.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Stroke: return "Stroke";
    case EventKind::Bounce: return "Bounce";
    case EventKind::NetHit: return "NetHit";
    case EventKind::Turn: return "Turn";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::Stroke, EventKind::Bounce, EventKind::NetHit, EventKind::Turn})
    if (to_string(k) == s) return k;
  fail("unknown event kind '" + std::string(s) + "'");
}

const std::string* Event::text(const std::string& key) const {
  auto it = attributes.find(key);
  return it == attributes.end() ? nullptr : std::get_if<std::string>(&it->second);
}

const double* Event::number(const std::string& key) const {
  auto it = attributes.find(key);
  return it == attributes.end() ? nullptr : std::get_if<double>(&it->second);
}

std::optional<Vec2> stroke_hand(const TrackingDataset& dataset, PlayerId player, int frame,
                                double keypoint_threshold) {
  auto wrist = player_keypoint(dataset, player, "right_wrist", frame, keypoint_threshold);
  if (!wrist.occluded()) return wrist.point;
  auto neck = player_keypoint(dataset, player, "neck", frame, keypoint_threshold);
  return neck.point;
}

namespace {

using Series = std::vector<std::optional<double>>;

// Frame f is an extremum when it beats every defined frame in [f-r, f+r]:
// strictly against earlier frames, non-strictly against later ones, so a
// plateau resolves to its earliest frame. `better(a, b)` means a beats b.
template <typename Better>
bool is_extremum(const Series& s, int f, int radius, Better better) {
  const int n = static_cast<int>(s.size());
  const double v = *s[static_cast<size_t>(f)];
  for (int g = std::max(0, f - radius); g <= std::min(n - 1, f + radius); ++g) {
    if (g == f || !s[static_cast<size_t>(g)]) continue;
    const double w = *s[static_cast<size_t>(g)];
    if (g < f ? !better(v, w) : better(w, v)) return false;
  }
  return true;
}

// Direction reversal at h measured by the one-sided displacements around it.
bool reverses(const BallTrack& track, int h, bool horizontal) {
  if (!track.defined(h - 1) || !track.defined(h) || !track.defined(h + 1)) return false;
  auto comp = [&](int f) { return horizontal ? track.at(f).x : track.at(f).y; };
  const double back = comp(h) - comp(h - 1);
  const double fwd = comp(h + 1) - comp(h);
  return back * fwd < 0;
}

struct Candidate {
  PlayerId player;
  int min_frame;
  double distance;
  FrameSpan span;
};

}  // namespace

std::vector<Event> detect_strokes(const BallTrack& track, const TrackingDataset& dataset,
                                  const EventParams& params) {
  const int n = static_cast<int>(track.size());
  const double reach = params.reach_px(dataset.video);
  std::vector<Candidate> candidates;

  for (PlayerId player : {PlayerId::A, PlayerId::B}) {
    Series dist(static_cast<size_t>(n));
    for (int f = 0; f < n; ++f) {
      if (!track.defined(f)) continue;
      if (auto hand = stroke_hand(dataset, player, f, params.keypoint_threshold))
        dist[static_cast<size_t>(f)] = distance(track.at(f), *hand);
    }
    std::vector<Candidate> mine;
    for (int f = 0; f < n; ++f) {
      const auto& d = dist[static_cast<size_t>(f)];
      if (!d || !(*d < reach)) continue;
      if (!is_extremum(dist, f, params.extremum_radius, std::less<double>())) continue;
      FrameSpan span{f, f};
      while (span.start > 0 && dist[static_cast<size_t>(span.start - 1)] &&
             *dist[static_cast<size_t>(span.start - 1)] <= reach)
        --span.start;
      while (span.end + 1 < n && dist[static_cast<size_t>(span.end + 1)] &&
             *dist[static_cast<size_t>(span.end + 1)] <= reach)
        ++span.end;
      // Two minima inside one reach window are one stroke.
      if (!mine.empty() && mine.back().span == span) {
        if (*d < mine.back().distance) mine.back() = {player, f, *d, span};
        continue;
      }
      mine.push_back({player, f, *d, span});
    }
    candidates.insert(candidates.end(), mine.begin(), mine.end());
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.min_frame != b.min_frame) return a.min_frame < b.min_frame;
    return a.player < b.player;
  });

  if (params.enforce_alternation) {
    std::vector<Candidate> kept;
    for (const auto& c : candidates) {
      if (!kept.empty() && kept.back().player == c.player) {
        if (c.distance < kept.back().distance) kept.back() = c;
        continue;
      }
      kept.push_back(c);
    }
    candidates = std::move(kept);
  }

  std::vector<Event> strokes;
  for (const auto& c : candidates) {
    Event e;
    e.kind = EventKind::Stroke;
    e.player = c.player;
    e.span = c.span;
    for (int h = c.span.start; h <= c.span.end; ++h) {
      if (reverses(track, h, /*horizontal=*/true)) {
        e.hit_frame = h;
        break;
      }
    }
    e.attributes["min_frame"] = static_cast<double>(c.min_frame);
    e.attributes["reach_px"] = c.distance;
    strokes.push_back(std::move(e));
  }
  std::stable_sort(strokes.begin(), strokes.end(),
                   [](const Event& a, const Event& b) { return a.span.start < b.span.start; });
  for (size_t i = 0; i < strokes.size(); ++i) strokes[i].event_id = "stroke#" + std::to_string(i);
  return strokes;
}

std::vector<Event> detect_bounces(const BallTrack& track, const TrackingDataset& dataset,
                                  const EventParams& params) {
  const int n = static_cast<int>(track.size());
  Series ys(static_cast<size_t>(n));
  for (int f = 0; f < n; ++f)
    if (track.defined(f)) ys[static_cast<size_t>(f)] = track.at(f).y;

  std::vector<Event> bounces;
  for (int f = 1; f + 1 < n; ++f) {
    if (!ys[static_cast<size_t>(f)]) continue;
    // Screen y grows downward: the contact point is a local maximum of y.
    if (!is_extremum(ys, f, params.extremum_radius, std::greater<double>())) continue;
    if (!reverses(track, f, /*horizontal=*/false)) continue;
    const double back = track.at(f).y - track.at(f - 1).y;
    if (!(back > 0)) continue;  // must flip from downward to upward
    const TableGeometry table(dataset.frames[static_cast<size_t>(f)].table.quad);
    PlacementCell cell;
    if (!table.cell_of(track.at(f), cell)) continue;
    Event e;
    e.kind = EventKind::Bounce;
    e.span = {f, f};
    e.placement = cell;
    e.event_id = "bounce#" + std::to_string(bounces.size());
    bounces.push_back(std::move(e));
  }
  return bounces;
}

std::vector<Event> detect_net_hits(const BallTrack& track, const TrackingDataset& dataset,
                                   const EventParams& params) {
  const int n = static_cast<int>(track.size());
  std::vector<Event> hits;
  for (int f = 1; f < n; ++f) {
    if (!track.defined(f - 1) || !track.defined(f)) continue;
    const double net = dataset.frames[static_cast<size_t>(f)].table.net_x;
    const bool before = track.at(f - 1).x < net;
    const bool after = track.at(f).x < net;
    if (before == after) continue;
    const auto& s0 = track.speed[static_cast<size_t>(f - 1)];
    if (!s0 || !(*s0 > 0)) continue;
    std::optional<double> slowest;
    const int last = std::min(n - 1, f + params.net_window - 1);
    for (int g = f; g <= last; ++g) {
      const auto& s = track.speed[static_cast<size_t>(g)];
      if (s && (!slowest || *s < *slowest)) slowest = s;
    }
    if (!slowest || *slowest > params.net_speed_ratio * *s0) continue;
    Event e;
    e.kind = EventKind::NetHit;
    e.span = {f - 1, last};
    e.attributes["speed_before"] = *s0;
    e.attributes["speed_after"] = *slowest;
    e.event_id = "net#" + std::to_string(hits.size());
    hits.push_back(std::move(e));
  }
  return hits;
}

std::vector<Event> segment_turns(const std::vector<Event>& strokes, int rally_end) {
  std::vector<Event> turns;
  for (size_t i = 0; i < strokes.size(); ++i) {
    const int start = strokes[i].key_frame();
    const int end = i + 1 < strokes.size() ? strokes[i + 1].key_frame() - 1 : rally_end;
    if (end < start) fail("strokes must be sorted with increasing hit frames");
    Event t;
    t.kind = EventKind::Turn;
    t.player = strokes[i].player;
    t.span = {start, end};
    t.attributes["stroke"] = strokes[i].event_id;
    t.event_id = "turn#" + std::to_string(i);
    turns.push_back(std::move(t));
  }
  return turns;
}

std::string classify_stroke_technique(const Event& stroke, const TrackingDataset& dataset,
                                      double keypoint_threshold) {
  if (!stroke.player || !stroke.hit_frame) return "unknown";
  const int f = *stroke.hit_frame;
  auto kp = [&](const char* name) {
    return player_keypoint(dataset, *stroke.player, name, f, keypoint_threshold).point;
  };
  const auto wrist = kp("right_wrist");
  const auto r_shoulder = kp("right_shoulder");
  const auto l_shoulder = kp("left_shoulder");
  const auto r_hip = kp("right_hip");
  const auto l_hip = kp("left_hip");
  if (!wrist || !r_shoulder || !l_shoulder || !r_hip || !l_hip) return "unknown";

  const double torso_x = (r_shoulder->x + l_shoulder->x + r_hip->x + l_hip->x) / 4.0;
  const double shoulder_y = (r_shoulder->y + l_shoulder->y) / 2.0;
  const double hip_y = (r_hip->y + l_hip->y) / 2.0;
  const double midline_y = (shoulder_y + hip_y) / 2.0;

  const double racket_side = r_shoulder->x - torso_x;
  const double wrist_side = wrist->x - torso_x;
  if (racket_side == 0.0) return "unknown";
  const bool forehand = racket_side * wrist_side > 0;
  const bool attack = wrist->y < midline_y;  // screen y grows downward
  if (attack) return forehand ? "forehand_attack" : "backhand_attack";
  return forehand ? "forehand_push" : "backhand_push";
}

std::vector<const Event*> EventSet::all() const {
  std::vector<const Event*> out;
  for (const auto* list : {&strokes, &bounces, &net_hits, &turns})
    for (const auto& e : *list) out.push_back(&e);
  std::sort(out.begin(), out.end(), [](const Event* a, const Event* b) {
    if (a->span.start != b->span.start) return a->span.start < b->span.start;
    if (a->kind != b->kind) return a->kind < b->kind;
    return a->event_id < b->event_id;
  });
  return out;
}

const Event* EventSet::find(std::string_view event_id) const {
  for (const auto* list : {&strokes, &bounces, &net_hits, &turns})
    for (const auto& e : *list)
      if (e.event_id == event_id) return &e;
  return nullptr;
}

const Event* EventSet::turn_at(int frame) const {
  for (const auto& t : turns)
    if (t.span.contains(frame)) return &t;
  return nullptr;
}

EventSet detect_events(const TrackingDataset& dataset, const BallTrack& track,
                       const EventParams& params) {
  EventSet set;
  set.strokes = detect_strokes(track, dataset, params);
  set.bounces = detect_bounces(track, dataset, params);
  set.net_hits = detect_net_hits(track, dataset, params);
  for (auto& s : set.strokes) {
    s.attributes["technique"] = classify_stroke_technique(s, dataset, params.keypoint_threshold);
    const int f = s.key_frame();
    if (auto speed = track.speed[static_cast<size_t>(f)]) s.attributes["speed"] = *speed;
    // Spin is an external measurement; take the first one reported in the span.
    for (int g = s.span.start; g <= s.span.end; ++g) {
      const auto& ball = dataset.frames[static_cast<size_t>(g)].ball;
      if (ball && ball->rotation_rpm) {
        s.attributes["rotation_rpm"] = *ball->rotation_rpm;
        break;
      }
    }
  }
  set.turns = segment_turns(set.strokes, dataset.video.frame_count - 1);
  return set;
}

json to_json(const Event& e) {
  json attrs = json::object();
  for (const auto& [k, v] : e.attributes)
    std::visit([&](const auto& x) { attrs[k] = x; }, v);
  json j = {{"event_id", e.event_id},
            {"kind", to_string(e.kind)},
            {"subject", e.player ? std::string("Player ") + std::string(to_string(*e.player)) : "Ball"},
            {"frame_span", {e.span.start, e.span.end}},
            {"attributes", attrs}};
  j["hit_frame"] = e.hit_frame ? json(*e.hit_frame) : json(nullptr);
  if (e.placement) {
    j["placement"] = {{"half", to_string(e.placement->half)},
                      {"zone", e.placement->zone},
                      {"point", {e.placement->point.x, e.placement->point.y}}};
  }
  return j;
}

Event event_from_json(const json& j) {
  Event e;
  try {
    e.event_id = j.at("event_id").get<std::string>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    const std::string subject = j.value("subject", "Ball");
    if (subject == "Player A") e.player = PlayerId::A;
    else if (subject == "Player B") e.player = PlayerId::B;
    else if (subject != "Ball") fail("unknown event subject '" + subject + "'");
    e.span = {j.at("frame_span").at(0).get<int>(), j.at("frame_span").at(1).get<int>()};
    if (j.contains("hit_frame") && !j["hit_frame"].is_null()) e.hit_frame = j["hit_frame"].get<int>();
    if (j.contains("placement")) {
      const auto& p = j["placement"];
      e.placement = PlacementCell{parse_half(p.at("half").get<std::string>()), p.at("zone").get<int>(),
                                  {p.at("point").at(0).get<double>(), p.at("point").at(1).get<double>()}};
    }
    const json attrs = j.value("attributes", json::object());
    for (const auto& [k, v] : attrs.items()) {
      if (v.is_number()) e.attributes[k] = v.get<double>();
      else e.attributes[k] = v.get<std::string>();
    }
  } catch (const json::exception& ex) {
    fail(std::string("malformed event: ") + ex.what());
  }
  if (e.span.empty()) fail(e.event_id + ": frame_span start > end");
  if (e.hit_frame && !e.span.contains(*e.hit_frame)) fail(e.event_id + ": hit_frame outside frame_span");
  return e;
}

json to_json(const EventSet& events) {
  json arr = json::array();
  for (const Event* e : events.all()) arr.push_back(to_json(*e));
  return {{"schema_version", kEventsSchemaVersion}, {"events", arr}};
}

EventSet events_from_json(const json& doc, const TrackingDataset& dataset) {
  require_schema(doc, kEventsSchemaVersion, "events");
  EventSet set;
  const int last = static_cast<int>(dataset.frames.size()) - 1;
  for (const auto& j : doc.value("events", json::array())) {
    Event e = event_from_json(j);
    if (e.span.start < 0 || e.span.end > last)
      fail(e.event_id + ": frame_span outside the clip [0," + std::to_string(last) + "]");
    switch (e.kind) {
      case EventKind::Stroke: set.strokes.push_back(std::move(e)); break;
      case EventKind::Bounce: set.bounces.push_back(std::move(e)); break;
      case EventKind::NetHit: set.net_hits.push_back(std::move(e)); break;
      case EventKind::Turn: set.turns.push_back(std::move(e)); break;
    }
  }
  auto by_start = [](const Event& a, const Event& b) { return a.span.start < b.span.start; };
  for (auto* list : {&set.strokes, &set.bounces, &set.net_hits, &set.turns})
    std::stable_sort(list->begin(), list->end(), by_start);
  return set;
}

}  // namespace rallyviz
