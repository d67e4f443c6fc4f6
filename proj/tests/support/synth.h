#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rallyviz/tracking.h"

namespace rallyviz::synth {

// Synthetic rallies with known ground truth. The table is projected with an
// independent homography (OpenCV) so the detector's own geometry code is not
// used to produce the truth it is checked against.

struct ShotPlan {
  int flight_frames = 20;   // hit -> bounce on the opponent half
  int rise_frames = 18;     // bounce -> next contact
  int target_zone = 4;      // on the receiver's half
  double target_jitter_u = 0.0;  // in [-0.3, 0.3] of a cell
  double target_jitter_v = 0.0;
  double arc_px = 140.0;
  double wrist_dy = 0.0;    // contact height offset
  bool forehand = true;
  bool attack = true;
};

struct RallyPlan {
  int width = 1920;
  int height = 1080;
  double fps = 50.0;
  int toss_frames = 20;     // ball drifts into the server's hand before the serve
  double toss_height_px = 120.0;
  int tail_frames = 20;     // after the last bounce
  PlayerId server = PlayerId::A;
  std::vector<ShotPlan> shots;
  std::optional<std::pair<int, double>> rotation;  // (shot index, rpm) at the contact frame
  std::array<std::string, 2> player_names{};
};

struct Truth {
  std::vector<int> hit_frames;
  std::vector<PlayerId> hitters;
  std::vector<int> bounce_frames;
  std::vector<PlacementCell> bounce_cells;  // half + zone; point is the screen position
  std::vector<std::string> techniques;
  int frame_count = 0;
};

struct SynthRally {
  TrackingDataset dataset;
  Truth truth;
};

/// Table corners used by every synthetic rally (A-far, B-far, B-near, A-near).
std::array<Vec2, 4> table_quad();

/// Screen point of a table-space (u, v) position, via cv::getPerspectiveTransform.
Vec2 project(double u, double v);

/// Throws std::invalid_argument for plans whose truth would be ambiguous
/// (last shot aimed at the end-line row, too-short segments).
SynthRally synthesize(const RallyPlan& plan);

/// Random plan with 2..8 shots, varied timing, targets and techniques.
RallyPlan random_plan(std::mt19937_64& rng);

/// The 6-second 50 fps fixture: 300 frames, six strokes, six bounces.
RallyPlan fixture_plan();

}  // namespace rallyviz::synth
