#include "rallyviz/renderer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "rallyviz/error.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// COCO-17 limb pairs.
constexpr std::array<std::pair<int, int>, 16> kBones{{{15, 13},
                                                      {13, 11},
                                                      {16, 14},
                                                      {14, 12},
                                                      {11, 12},
                                                      {5, 11},
                                                      {6, 12},
                                                      {5, 6},
                                                      {5, 7},
                                                      {6, 8},
                                                      {7, 9},
                                                      {8, 10},
                                                      {1, 2},
                                                      {0, 1},
                                                      {0, 2},
                                                      {3, 5}}};

}  // namespace

Color parse_color(const std::string& hex) {
  if ((hex.size() != 7 && hex.size() != 9) || hex[0] != '#') fail("bad color '" + hex + "'");
  std::array<int, 4> v{0, 0, 0, 255};
  for (size_t i = 0; i * 2 + 1 < hex.size(); ++i) {
    const int hi = hex_digit(hex[1 + i * 2]);
    const int lo = hex_digit(hex[2 + i * 2]);
    if (hi < 0 || lo < 0) fail("bad color '" + hex + "'");
    v[i] = hi * 16 + lo;
  }
  return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2]),
          static_cast<std::uint8_t>(v[3])};
}

std::string to_hex(Color c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

int default_z(const std::string& visual) {
  if (visual == "HeatmapRegion" || visual == "Region") return 0;
  if (visual == "Spotlight") return 1;
  if (visual == "Polyline" || visual == "Arrow") return 2;
  if (visual == "Skeleton" || visual == "BoundingBox") return 3;
  if (visual == "Dot") return 4;
  if (visual == "Label") return 5;
  return 6;
}

double phase_ramp(Phase phase, int step, int length) {
  length = std::max(1, length);
  switch (phase) {
    case Phase::Creation: return static_cast<double>(step + 1) / length;
    case Phase::Destruction: return static_cast<double>(length - step) / (length + 1);
    case Phase::Sustain: return 1.0;
  }
  return 1.0;
}

namespace {

// Everything an attribute can contribute; the visual picks what it needs.
struct Resolved {
  std::optional<Vec2> anchor;
  std::optional<BBox> box;
  std::vector<std::vector<Vec2>> paths;
  std::vector<HeatCell> cells;
  std::optional<std::string> text;
  std::optional<std::array<std::optional<Vec2>, 17>> joints;
};

[[noreturn]] void missing(const std::string& what, int frame) {
  throw Error(ErrorCode::NotFound, what + " unavailable at frame " + std::to_string(frame));
}

std::string format_number(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

const Event* stroke_for(const Rally& rally, int frame) {
  const Event* turn = rally.events.turn_at(frame);
  if (turn == nullptr) return nullptr;
  const std::string* id = turn->text("stroke");
  return id ? rally.events.find(*id) : nullptr;
}

const PlayerDetection& player_at(const Rally& rally, PlayerId p, int frame) {
  return rally.dataset.frames[static_cast<size_t>(frame)].players[p == PlayerId::A ? 0 : 1];
}

Vec2 ball_at(const Rally& rally, int frame, const std::string& what) {
  if (!rally.track.defined(frame)) missing(what, frame);
  return rally.track.at(frame);
}

void add_ball_box(Resolved& r, const Rally& rally, int frame) {
  const auto& det = rally.dataset.frames[static_cast<size_t>(frame)].ball;
  if (det) r.box = det->bbox;
  else if (r.anchor) r.box = BBox{r.anchor->x - 10, r.anchor->y - 10, 20, 20};
}

// Consecutive defined points of a per-frame series, split at gaps.
template <typename F>
std::vector<std::vector<Vec2>> trace(int from, int to, F point_at) {
  std::vector<std::vector<Vec2>> out;
  std::vector<Vec2> cur;
  for (int f = from; f <= to; ++f) {
    if (auto p = point_at(f)) {
      cur.push_back(*p);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<Vec2> polygon_of(const TableGeometry& table, const PlacementCell& cell) {
  const auto poly = table.cell_polygon(cell.half, cell.zone);
  return {poly.begin(), poly.end()};
}

Resolved resolve(const ScriptMapping& m, const Rally& rally, int f) {
  const std::string& a = m.selection.attribute;
  const FrameSpan& span = m.selection.source_span;
  const int anchor_frame = m.selection.anchor_frame;
  const std::optional<PlayerId> player = m.selection.subject.player;
  const TableGeometry table(rally.dataset.frames[static_cast<size_t>(f)].table.quad);
  Resolved r;

  auto need_player = [&]() -> PlayerId {
    if (!player) fail(m.mapping_id + ": attribute '" + a + "' needs a player subject");
    return *player;
  };
  auto player_label_anchor = [&](PlayerId p) {
    const BBox& b = player_at(rally, p, f).bbox;
    r.box = b;
    r.anchor = Vec2{b.x + b.w / 2, b.y};
  };
  auto fact_for_stroke = [&](TacticKind kind) -> const TacticFact* {
    const Event* stroke = stroke_for(rally, anchor_frame);
    if (stroke == nullptr) missing(a, anchor_frame);
    const TacticFact* fact = rally.fact(kind, stroke->event_id);
    if (fact == nullptr) missing(a, anchor_frame);
    return fact;
  };

  if (a == "ball_position") {
    r.anchor = ball_at(rally, f, a);
    add_ball_box(r, rally, f);
  } else if (a == "ball_trajectory") {
    r.paths = trace(span.start, f, [&](int k) -> std::optional<Vec2> {
      return rally.track.defined(k) ? std::optional<Vec2>(rally.track.at(k)) : std::nullopt;
    });
    if (r.paths.empty()) missing(a, f);
    r.anchor = r.paths.back().back();
  } else if (a == "ball_velocity") {
    r.anchor = ball_at(rally, f, a);
    const auto& speed = rally.track.speed[static_cast<size_t>(f)];
    if (!speed) missing(a, f);
    r.text = format_number("%.0f px/s", *speed);
    add_ball_box(r, rally, f);
  } else if (a == "ball_placement") {
    const Event* turn = rally.events.turn_at(anchor_frame);
    const Event* bounce = nullptr;
    for (const auto& b : rally.events.bounces)
      if (turn && turn->span.contains(b.span.start) && b.placement) bounce = &b;
    if (bounce == nullptr) missing(a, anchor_frame);
    const PlacementCell& cell = *bounce->placement;
    r.cells.push_back({polygon_of(table, cell), 1.0, heat_alpha(1.0)});
    r.anchor = table.cell_center(cell.half, cell.zone);
    r.text = std::string(to_string(cell.half)) + " zone " + std::to_string(cell.zone);
  } else if (a == "ball_rotation_speed") {
    const Event* stroke = stroke_for(rally, anchor_frame);
    const double* rpm = stroke ? stroke->number("rotation_rpm") : nullptr;
    if (rpm == nullptr) missing(a, anchor_frame);
    r.text = format_number("%.0f rpm", *rpm);
    r.anchor = ball_at(rally, f, a);
    add_ball_box(r, rally, f);
  } else if (a == "potential_placements") {
    const auto& dist = std::get<PlacementDistribution>(fact_for_stroke(TacticKind::PotentialPlacements)->payload);
    double best = -1;
    for (const auto& wc : dist.cells) {
      r.cells.push_back({polygon_of(table, wc.cell), wc.probability, heat_alpha(wc.probability)});
      if (wc.probability > best) {
        best = wc.probability;
        r.anchor = table.cell_center(wc.cell.half, wc.cell.zone);
        r.text = format_number("%.0f%%", 100.0 * wc.probability);
      }
    }
  } else if (a == "potential_routes") {
    const auto& routes = std::get<RouteSet>(fact_for_stroke(TacticKind::PotentialRoutes)->payload);
    for (const auto& route : routes.routes) r.paths.push_back(route.sample());
    if (!routes.routes.empty()) r.anchor = routes.routes.front().start;
  } else if (a == "player_position" || a == "player_highlight") {
    const BBox& b = player_at(rally, need_player(), f).bbox;
    r.box = b;
    r.anchor = b.center();
  } else if (a == "player_trajectory") {
    const PlayerId p = need_player();
    r.paths = trace(span.start, f, [&](int k) -> std::optional<Vec2> {
      const BBox& b = player_at(rally, p, k).bbox;
      return Vec2{b.x + b.w / 2, b.y + b.h};
    });
    r.anchor = r.paths.back().back();
  } else if (a == "player_posture") {
    const PlayerId p = need_player();
    const auto& det = player_at(rally, p, f);
    std::array<std::optional<Vec2>, 17> joints;
    for (size_t k = 0; k < 17; ++k) {
      const Keypoint& kp = det.keypoints[k];
      if (!kp.occluded && kp.confidence >= kDefaultKeypointThreshold) joints[k] = kp.pos;
    }
    r.joints = joints;
    r.box = det.bbox;
    r.anchor = det.bbox.center();
  } else if (a == "player_name") {
    const PlayerId p = need_player();
    const std::string& name = rally.dataset.player_names[p == PlayerId::A ? 0 : 1];
    if (name.empty()) missing(a, f);
    r.text = name;
    player_label_anchor(p);
  } else if (a == "stroke_technique") {
    const Event* stroke = stroke_for(rally, anchor_frame);
    const std::string* technique = stroke ? stroke->text("technique") : nullptr;
    if (technique == nullptr) missing(a, anchor_frame);
    r.text = *technique;
    player_label_anchor(stroke->player.value_or(need_player()));
  } else if (a == "stroke_effect" || a == "player_tactic") {
    const TacticKind kind = a == "stroke_effect" ? TacticKind::StrokeEffect : TacticKind::PlayerTactic;
    r.text = std::get<TacticLabel>(fact_for_stroke(kind)->payload).label;
    player_label_anchor(need_player());
  } else if (a == "key_stroke") {
    const TacticFact* key = nullptr;
    for (const auto& fact : rally.facts)
      if (fact.kind == TacticKind::KeyStroke && key == nullptr) key = &fact;
    const Event* stroke = key ? rally.events.find(key->anchor_event) : nullptr;
    if (stroke == nullptr || !stroke->player) missing(a, anchor_frame);
    r.text = "key stroke";
    if (const auto* label = std::get_if<TacticLabel>(&key->payload); label && !label->label.empty())
      r.text = label->label;
    player_label_anchor(*stroke->player);
    r.box = player_at(rally, *stroke->player, f).bbox;
  } else {
    fail(m.mapping_id + ": no renderer for attribute '" + a + "'");
  }
  return r;
}

[[noreturn]] void incompatible(const ScriptMapping& m) {
  fail(m.mapping_id + ": visual '" + m.visual + "' cannot encode '" + m.selection.attribute + "'");
}

Geometry shape(const ScriptMapping& m, const Resolved& r, const RenderOptions& o) {
  const std::string& v = m.visual;
  if (v == "Dot") {
    if (!r.anchor) incompatible(m);
    return DotGeometry{*r.anchor, o.dot_radius};
  }
  if (v == "Polyline" || v == "Arrow") {
    if (r.paths.empty()) incompatible(m);
    return PathGeometry{r.paths, v == "Arrow"};
  }
  if (v == "Region" || v == "HeatmapRegion") {
    if (r.cells.empty()) incompatible(m);
    RegionGeometry g{r.cells};
    if (v == "Region")
      for (auto& c : g.cells) c.alpha = 0.35;
    return g;
  }
  if (v == "Spotlight") {
    if (r.box) {
      const BBox& b = *r.box;
      return EllipseGeometry{b.center(), b.w * 0.6 + 6, b.h * 0.6 + 6};
    }
    if (!r.anchor) incompatible(m);
    return EllipseGeometry{*r.anchor, 40, 40};
  }
  if (v == "Skeleton") {
    if (!r.joints) incompatible(m);
    return SkeletonGeometry{*r.joints};
  }
  if (v == "BoundingBox") {
    if (!r.box) incompatible(m);
    return BoxGeometry{*r.box};
  }
  if (v == "Label") {
    std::string text = m.style.label_text.value_or(r.text.value_or(""));
    if (text.empty() || !r.anchor) incompatible(m);
    return LabelGeometry{*r.anchor, std::move(text)};
  }
  if (v == "Pause" || v == "SlowMotion" || v == "Repeat") return std::monostate{};
  incompatible(m);
}

}  // namespace

OverlayItem realize_item(const ScriptMapping& m, size_t mapping_index, const Rally& rally, const ActiveItem& slot,
                         const RenderOptions& o) {
  const int n = static_cast<int>(rally.dataset.frames.size());
  if (slot.data_frame < 0 || slot.data_frame >= n) missing(m.selection.attribute, slot.data_frame);
  OverlayItem item;
  item.mapping_id = m.mapping_id;
  item.visual = m.visual;
  item.geometry = shape(m, resolve(m, rally, slot.data_frame), o);
  const auto& subject = m.selection.subject;
  if (m.style.color) item.color = parse_color(*m.style.color);
  else if (subject.player == PlayerId::A) item.color = o.palette.player_a;
  else if (subject.player == PlayerId::B) item.color = o.palette.player_b;
  else item.color = o.palette.categorical[mapping_index % o.palette.categorical.size()];
  item.stroke_width = m.style.stroke_width.value_or(o.stroke_width);
  item.font_size = m.style.font_size.value_or(o.font_size);
  item.opacity = std::clamp(m.style.opacity.value_or(1.0) * (item.color.a / 255.0) *
                                phase_ramp(slot.phase, slot.phase_step, slot.phase_length),
                            0.0, 1.0);
  item.z = m.style.z.value_or(default_z(m.visual));
  item.phase = slot.phase;
  return item;
}

std::vector<OverlayFrame> build_overlays(const AugmentationScript& script, const RenderSchedule& schedule,
                                         const Rally& rally, const RenderOptions& options) {
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < script.mappings.size(); ++i) index[script.mappings[i].mapping_id] = i;
  std::vector<OverlayFrame> out;
  out.reserve(schedule.frames.size());
  for (size_t i = 0; i < schedule.frames.size(); ++i) {
    const OutputFrame& fr = schedule.frames[i];
    OverlayFrame of;
    of.output_index = static_cast<int>(i);
    of.source_frame = fr.source_frame;
    of.kind = fr.kind;
    of.width = rally.dataset.video.width;
    of.height = rally.dataset.video.height;
    for (const ActiveItem& slot : fr.items) {
      auto it = index.find(slot.mapping_id);
      if (it == index.end()) fail("schedule references unknown mapping '" + slot.mapping_id + "'");
      try {
        of.items.push_back(realize_item(script.mappings[it->second], it->second, rally, slot, options));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotFound) throw;
        of.skipped.push_back(slot.mapping_id + ": " + e.what());
      }
    }
    std::stable_sort(of.items.begin(), of.items.end(), [](const OverlayItem& a, const OverlayItem& b) {
      if (a.z != b.z) return a.z < b.z;
      return a.mapping_id < b.mapping_id;
    });
    out.push_back(std::move(of));
  }
  return out;
}

namespace {

std::string num(double v) {
  if (std::fabs(v) < 5e-7) v = 0.0;  // avoid "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string points_attr(const std::vector<Vec2>& pts) {
  std::string s;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(pts[i].x) + "," + num(pts[i].y);
  }
  return s;
}

// Filled triangle at the end of a path pointing along its last segment.
std::vector<Vec2> arrow_head(const std::vector<Vec2>& path, double width) {
  if (path.size() < 2) return {};
  const Vec2 tip = path.back();
  const Vec2 prev = path[path.size() - 2];
  const double len = distance(tip, prev);
  if (len <= 0) return {};
  const Vec2 dir = (tip - prev) * (1.0 / len);
  const Vec2 normal{-dir.y, dir.x};
  const double size = 3 * width + 8;
  const Vec2 base = tip - dir * size;
  return {tip, base + normal * (size / 2), base - normal * (size / 2)};
}

struct SvgWriter {
  std::string out;
  std::string color;
  double width;

  void line(const std::string& s) { out += "    " + s + "\n"; }

  void operator()(const std::monostate&) {}
  void operator()(const LabelGeometry&) {}  // written by render_frame, needs the font size
  void operator()(const DotGeometry& g) {
    line("<circle cx=\"" + num(g.center.x) + "\" cy=\"" + num(g.center.y) + "\" r=\"" + num(g.radius) +
         "\" fill=\"" + color + "\"/>");
  }
  void operator()(const PathGeometry& g) {
    for (const auto& p : g.paths) {
      line("<polyline points=\"" + points_attr(p) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
           num(width) + "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>");
      if (g.arrow) {
        const auto head = arrow_head(p, width);
        if (!head.empty()) line("<polygon points=\"" + points_attr(head) + "\" fill=\"" + color + "\"/>");
      }
    }
  }
  void operator()(const RegionGeometry& g) {
    for (const auto& c : g.cells) {
      line("<polygon points=\"" + points_attr(c.polygon) + "\" fill=\"" + color + "\" fill-opacity=\"" +
           num(c.alpha) + "\" stroke=\"" + color + "\" stroke-width=\"" + num(width / 2) + "\"/>");
    }
  }
  void operator()(const EllipseGeometry& g) {
    line("<ellipse cx=\"" + num(g.center.x) + "\" cy=\"" + num(g.center.y) + "\" rx=\"" + num(g.rx) +
         "\" ry=\"" + num(g.ry) + "\" fill=\"" + color + "\" fill-opacity=\"0.250000\" stroke=\"" + color +
         "\" stroke-width=\"" + num(width) + "\"/>");
  }
  void operator()(const SkeletonGeometry& g) {
    for (const auto& [a, b] : kBones) {
      if (!g.joints[a] || !g.joints[b]) continue;
      line("<line x1=\"" + num(g.joints[a]->x) + "\" y1=\"" + num(g.joints[a]->y) + "\" x2=\"" +
           num(g.joints[b]->x) + "\" y2=\"" + num(g.joints[b]->y) + "\" stroke=\"" + color +
           "\" stroke-width=\"" + num(width) + "\"/>");
    }
    for (const auto& j : g.joints) {
      if (!j) continue;
      line("<circle cx=\"" + num(j->x) + "\" cy=\"" + num(j->y) + "\" r=\"" + num(width) + "\" fill=\"" + color +
           "\"/>");
    }
  }
  void operator()(const BoxGeometry& g) {
    line("<rect x=\"" + num(g.box.x) + "\" y=\"" + num(g.box.y) + "\" width=\"" + num(g.box.w) + "\" height=\"" +
         num(g.box.h) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) + "\"/>");
  }
};

}  // namespace

std::string render_frame(const OverlayFrame& frame) {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(frame.width) +
                    "\" height=\"" + std::to_string(frame.height) + "\" viewBox=\"0 0 " +
                    std::to_string(frame.width) + " " + std::to_string(frame.height) + "\">\n";
  for (const auto& item : frame.items) {
    if (std::holds_alternative<std::monostate>(item.geometry)) continue;
    out += "  <g id=\"" + escape(item.mapping_id) + "\" data-visual=\"" + escape(item.visual) +
           "\" data-phase=\"" + std::string(to_string(item.phase)) + "\" opacity=\"" + num(item.opacity) + "\">\n";
    if (const auto* label = std::get_if<LabelGeometry>(&item.geometry)) {
      out += "    <text x=\"" + num(label->anchor.x) + "\" y=\"" + num(label->anchor.y) +
             "\" dx=\"10\" dy=\"-10\" font-family=\"sans-serif\" font-size=\"" + num(item.font_size) +
             "\" fill=\"" + to_hex(item.color) + "\">" + escape(label->text) + "</text>\n";
    } else {
      SvgWriter w{"", to_hex(item.color), item.stroke_width};
      std::visit(w, item.geometry);
      out += w.out;
    }
    out += "  </g>\n";
  }
  out += "</svg>\n";
  return out;
}

json manifest_json(const RenderSchedule& schedule, const std::vector<OverlayFrame>& overlays, bool with_images) {
  if (overlays.size() != schedule.frames.size()) fail("overlays do not cover every output frame");
  json frames = json::array();
  int width = 0, height = 0;
  char name[32];
  for (size_t i = 0; i < overlays.size(); ++i) {
    const auto& fr = schedule.frames[i];
    const auto& ov = overlays[i];
    width = ov.width;
    height = ov.height;
    std::snprintf(name, sizeof name, "%06zu", i);
    json items = json::array();
    for (const auto& it : fr.items) items.push_back(it.mapping_id);
    json jf = {{"index", i},
               {"kind", to_string(fr.kind)},
               {"source_frame", fr.source_frame},
               {"slow_factor", fr.slow_factor},
               {"overlay", std::string("overlays/") + name + ".svg"},
               {"items", items}};
    if (!ov.skipped.empty()) jf["skipped"] = ov.skipped;
    if (with_images) jf["image"] = std::string("frames/") + name + ".png";
    frames.push_back(std::move(jf));
  }
  return {{"schema_version", 1},
          {"script_id", schedule.script_id},
          {"order", to_string(schedule.order)},
          {"fps", schedule.fps},
          {"canvas", {width, height}},
          {"total_frames", schedule.total_frames()},
          {"frames", frames}};
}

namespace {

cv::Scalar bgr(Color c) { return cv::Scalar(c.b, c.g, c.r); }
cv::Point px(Vec2 p) { return cv::Point(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))); }

std::vector<cv::Point> px(const std::vector<Vec2>& pts) {
  std::vector<cv::Point> out;
  for (const auto& p : pts) out.push_back(px(p));
  return out;
}

// Draws `draw` on a copy and blends it back with the given opacity.
template <typename F>
void blend(cv::Mat& img, double alpha, F draw) {
  if (alpha <= 0) return;
  cv::Mat layer = img.clone();
  draw(layer);
  cv::addWeighted(layer, alpha, img, 1.0 - alpha, 0.0, img);
}

void composite_item(cv::Mat& img, const OverlayItem& item) {
  const cv::Scalar c = bgr(item.color);
  const int w = std::max(1, static_cast<int>(std::lround(item.stroke_width)));
  const double a = item.opacity;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, DotGeometry>) {
          blend(img, a, [&](cv::Mat& m) { cv::circle(m, px(g.center), static_cast<int>(g.radius), c, cv::FILLED, cv::LINE_AA); });
        } else if constexpr (std::is_same_v<T, PathGeometry>) {
          blend(img, a, [&](cv::Mat& m) {
            for (const auto& p : g.paths) {
              cv::polylines(m, px(p), false, c, w, cv::LINE_AA);
              if (g.arrow) {
                const auto head = arrow_head(p, item.stroke_width);
                if (!head.empty()) cv::fillConvexPoly(m, px(head), c, cv::LINE_AA);
              }
            }
          });
        } else if constexpr (std::is_same_v<T, RegionGeometry>) {
          for (const auto& cell : g.cells)
            blend(img, a * cell.alpha, [&](cv::Mat& m) { cv::fillConvexPoly(m, px(cell.polygon), c, cv::LINE_AA); });
        } else if constexpr (std::is_same_v<T, EllipseGeometry>) {
          const cv::Size axes(static_cast<int>(g.rx), static_cast<int>(g.ry));
          blend(img, a * 0.25, [&](cv::Mat& m) { cv::ellipse(m, px(g.center), axes, 0, 0, 360, c, cv::FILLED, cv::LINE_AA); });
          blend(img, a, [&](cv::Mat& m) { cv::ellipse(m, px(g.center), axes, 0, 0, 360, c, w, cv::LINE_AA); });
        } else if constexpr (std::is_same_v<T, SkeletonGeometry>) {
          blend(img, a, [&](cv::Mat& m) {
            for (const auto& [i, j] : kBones)
              if (g.joints[i] && g.joints[j]) cv::line(m, px(*g.joints[i]), px(*g.joints[j]), c, w, cv::LINE_AA);
            for (const auto& j : g.joints)
              if (j) cv::circle(m, px(*j), w, c, cv::FILLED, cv::LINE_AA);
          });
        } else if constexpr (std::is_same_v<T, BoxGeometry>) {
          blend(img, a, [&](cv::Mat& m) {
            cv::rectangle(m, cv::Rect2d(g.box.x, g.box.y, g.box.w, g.box.h), c, w, cv::LINE_AA);
          });
        } else if constexpr (std::is_same_v<T, LabelGeometry>) {
          blend(img, a, [&](cv::Mat& m) {
            cv::putText(m, g.text, px(g.anchor + Vec2{10, -10}), cv::FONT_HERSHEY_SIMPLEX, item.font_size / 30.0, c,
                        std::max(1, w / 2), cv::LINE_AA);
          });
        }
      },
      item.geometry);
}

std::string source_image(const std::string& dir, int frame) {
  char name[32];
  for (const char* ext : {"png", "jpg"}) {
    std::snprintf(name, sizeof name, "%06d.%s", frame, ext);
    const fs::path p = fs::path(dir) / name;
    if (fs::exists(p)) return p.string();
  }
  throw Error(ErrorCode::NotFound, "missing source image for frame " + std::to_string(frame) + " in " + dir);
}

}  // namespace

CompositeResult composite_sequence(const RenderSchedule& schedule, const std::vector<OverlayFrame>& overlays,
                                   const std::string& out_dir, const std::optional<std::string>& frames_dir) {
  if (overlays.size() != schedule.frames.size()) fail("overlays do not cover every output frame");
  CompositeResult result;
  const fs::path root(out_dir);
  fs::create_directories(root / "overlays");
  char name[32];
  for (size_t i = 0; i < overlays.size(); ++i) {
    std::snprintf(name, sizeof name, "%06zu.svg", i);
    write_file((root / "overlays" / name).string(), render_frame(overlays[i]));
    ++result.svg_count;
  }
  if (frames_dir) {
    fs::create_directories(root / "frames");
    for (size_t i = 0; i < overlays.size(); ++i) {
      const OverlayFrame& ov = overlays[i];
      const std::string src = source_image(*frames_dir, ov.source_frame);
      cv::Mat img = cv::imread(src, cv::IMREAD_COLOR);
      if (img.empty()) throw Error(ErrorCode::Io, "cannot decode " + src);
      if (img.cols != ov.width || img.rows != ov.height) {
        fail("dimension mismatch: " + src + " is " + std::to_string(img.cols) + "x" + std::to_string(img.rows) +
             ", canvas is " + std::to_string(ov.width) + "x" + std::to_string(ov.height));
      }
      for (const auto& item : ov.items) composite_item(img, item);
      std::snprintf(name, sizeof name, "%06zu.png", i);
      const std::string dst = (root / "frames" / name).string();
      if (!cv::imwrite(dst, img)) throw Error(ErrorCode::Io, "cannot write " + dst);
      ++result.png_count;
    }
  }
  result.manifest_path = (root / "manifest.json").string();
  write_file(result.manifest_path, dump_canonical(manifest_json(schedule, overlays, frames_dir.has_value())));
  return result;
}

CompositeResult render_script(const AugmentationScript& script, const Rally& rally, const std::string& out_dir,
                              const std::optional<std::string>& frames_dir, const ScheduleOptions& schedule_options,
                              const RenderOptions& render_options) {
  const RenderSchedule schedule = compile_schedule(script, rally.dataset.video, schedule_options);
  const auto overlays = build_overlays(script, schedule, rally, render_options);
  return composite_sequence(schedule, overlays, out_dir, frames_dir);
}

}  // namespace rallyviz
