#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rallyviz/geometry.h"

namespace rallyviz {

inline constexpr int kTrackingSchemaVersion = 1;

enum class PlayerId { A, B };
std::string_view to_string(PlayerId id);
PlayerId parse_player(std::string_view s);
inline PlayerId opponent(PlayerId id) { return id == PlayerId::A ? PlayerId::B : PlayerId::A; }

/// COCO-17 body keypoints. The ordering is the wire ordering.
inline constexpr std::array<std::string_view, 17> kKeypointNames = {
    "nose",          "left_eye",       "right_eye",  "left_ear",    "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow", "left_wrist",
    "right_wrist",   "left_hip",       "right_hip",  "left_knee",   "right_knee",
    "left_ankle",    "right_ankle"};

/// Index into kKeypointNames, or -1. "neck" is not a stored point (see
/// player_keypoint) and also yields -1.
int keypoint_index(std::string_view name);

struct Keypoint {
  Vec2 pos;
  double confidence = 0.0;
  bool occluded = false;
  bool operator==(const Keypoint&) const = default;
};

struct BallDetection {
  Vec2 center;
  BBox bbox;
  std::optional<double> rotation_rpm;  // externally measured spin, when supplied
  bool operator==(const BallDetection&) const = default;
};

struct PlayerDetection {
  PlayerId id = PlayerId::A;
  BBox bbox;
  std::array<Keypoint, 17> keypoints{};
  bool operator==(const PlayerDetection&) const = default;
};

struct TableDetection {
  std::array<Vec2, 4> quad{};  // A-far, B-far, B-near, A-near
  double net_x = 0.0;
  bool operator==(const TableDetection&) const = default;
};

struct FrameDetections {
  int frame_index = 0;
  double timestamp = 0.0;
  std::optional<BallDetection> ball;
  std::array<PlayerDetection, 2> players{};  // [0] is A, [1] is B
  TableDetection table;
  bool operator==(const FrameDetections&) const = default;

  const PlayerDetection& player(PlayerId id) const { return players[id == PlayerId::A ? 0 : 1]; }
};

struct VideoMeta {
  int width = 0;
  int height = 0;
  double fps = 0.0;
  int frame_count = 0;
  bool operator==(const VideoMeta&) const = default;

  double duration() const { return fps > 0 ? frame_count / fps : 0.0; }
};

struct TrackingDataset {
  VideoMeta video;
  std::array<std::string, 2> player_names{};  // non-tracking metadata, may be empty
  std::vector<FrameDetections> frames;
  bool operator==(const TrackingDataset&) const = default;
};

/// Parses and validates a tracking document. Throws Error(Validation) on any
/// schema or invariant violation.
TrackingDataset dataset_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TrackingDataset& dataset);

TrackingDataset load_dataset(const std::string& path);
void save_dataset(const TrackingDataset& dataset, const std::string& path);

/// Re-checks every dataset invariant; throws on the first violation.
void validate_dataset(const TrackingDataset& dataset);

struct BallTrack {
  std::vector<std::optional<Vec2>> centers;  // one entry per frame
  std::vector<bool> occluded;                // true where a center was interpolated
  std::vector<std::optional<Vec2>> velocity; // px/s
  std::vector<std::optional<double>> speed;  // px/s

  size_t size() const { return centers.size(); }
  bool defined(int frame) const {
    return frame >= 0 && static_cast<size_t>(frame) < centers.size() && centers[static_cast<size_t>(frame)].has_value();
  }
  Vec2 at(int frame) const { return *centers[static_cast<size_t>(frame)]; }
  bool operator==(const BallTrack&) const = default;
};

/// Raw detections as a track (no interpolation, no velocity).
BallTrack observed_ball(const TrackingDataset& dataset);

/// Linear interpolation across occlusion gaps between the first and last
/// defined centers. Existing centers and occlusion flags are kept.
BallTrack interpolate_ball(const BallTrack& track);
BallTrack interpolate_ball(const TrackingDataset& dataset);

/// Central differences where both neighbours are defined, one-sided where
/// only one is. Units px/s.
std::vector<std::optional<Vec2>> derive_velocity(const BallTrack& track, double fps);

/// interpolate + velocity + speed.
BallTrack build_ball_track(const TrackingDataset& dataset);

inline constexpr double kDefaultKeypointThreshold = 0.3;

struct KeypointQuery {
  std::optional<Vec2> point;  // empty when occluded
  double confidence = 0.0;
  bool occluded() const { return !point.has_value(); }
};

/// Keypoint lookup with confidence gating. Accepts the 17 stored names plus
/// "neck", derived as the shoulder midpoint with the weaker shoulder's
/// confidence. Throws Error(Validation) for unknown names or frames.
KeypointQuery player_keypoint(const TrackingDataset& dataset, PlayerId player,
                              std::string_view keypoint, int frame,
                              double threshold = kDefaultKeypointThreshold);

}  // namespace rallyviz
