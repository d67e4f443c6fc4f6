#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rallyviz/geometry.h"
#include "rallyviz/tracking.h"

namespace rallyviz {

/// Inclusive frame interval.
struct FrameSpan {
  int start = 0;
  int end = 0;

  bool empty() const { return end < start; }
  int length() const { return empty() ? 0 : end - start + 1; }
  bool contains(int frame) const { return frame >= start && frame <= end; }
  bool contains(const FrameSpan& o) const { return o.start >= start && o.end <= end; }
  bool intersects(const FrameSpan& o) const { return o.start <= end && start <= o.end; }
  bool operator==(const FrameSpan&) const = default;
};

enum class EventKind { Stroke, Bounce, NetHit, Turn };
std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

using AttrValue = std::variant<double, std::string>;

struct Event {
  std::string event_id;
  EventKind kind = EventKind::Stroke;
  std::optional<PlayerId> player;  // empty: the subject is the ball
  FrameSpan span;
  std::optional<int> hit_frame;    // strokes only
  std::optional<PlacementCell> placement;  // bounces only
  std::map<std::string, AttrValue> attributes;

  /// Frame used to order and segment: hit frame when known, else span start.
  int key_frame() const { return hit_frame.value_or(span.start); }
  const std::string* text(const std::string& key) const;
  const double* number(const std::string& key) const;
  bool operator==(const Event&) const = default;
};

struct EventParams {
  double reach_fraction = 0.12;   // delta_reach as a fraction of frame width
  double net_speed_ratio = 0.5;   // rho_net
  int net_window = 3;             // w, frames
  double keypoint_threshold = kDefaultKeypointThreshold;
  bool enforce_alternation = true;
  int extremum_radius = 2;        // 5-frame window

  double reach_px(const VideoMeta& video) const { return reach_fraction * video.width; }
};

/// Hand used for reach distance: right wrist, else neck, else none.
std::optional<Vec2> stroke_hand(const TrackingDataset& dataset, PlayerId player, int frame,
                                double keypoint_threshold);

std::vector<Event> detect_strokes(const BallTrack& track, const TrackingDataset& dataset,
                                  const EventParams& params = {});
std::vector<Event> detect_bounces(const BallTrack& track, const TrackingDataset& dataset,
                                  const EventParams& params = {});
std::vector<Event> detect_net_hits(const BallTrack& track, const TrackingDataset& dataset,
                                   const EventParams& params = {});
std::vector<Event> segment_turns(const std::vector<Event>& strokes, int rally_end);

inline constexpr std::string_view kTechniqueLabels[] = {
    "forehand_attack", "backhand_attack", "forehand_push", "backhand_push", "unknown"};

std::string classify_stroke_technique(const Event& stroke, const TrackingDataset& dataset,
                                      double keypoint_threshold = kDefaultKeypointThreshold);

struct EventSet {
  std::vector<Event> strokes;
  std::vector<Event> bounces;
  std::vector<Event> net_hits;
  std::vector<Event> turns;

  /// Every event ordered by (span.start, kind, id).
  std::vector<const Event*> all() const;
  const Event* find(std::string_view event_id) const;
  /// Turn whose span contains the frame, if any.
  const Event* turn_at(int frame) const;
  bool operator==(const EventSet&) const = default;
};

/// Runs every detector, classifies techniques and attaches per-stroke
/// attributes (ball speed, rotation when supplied).
EventSet detect_events(const TrackingDataset& dataset, const BallTrack& track,
                       const EventParams& params = {});

inline constexpr int kEventsSchemaVersion = 1;
nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EventSet& events);
/// Imported events are validated against the dataset frame range.
EventSet events_from_json(const nlohmann::json& doc, const TrackingDataset& dataset);

}  // namespace rallyviz
