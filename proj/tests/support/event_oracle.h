#pragma once

#include <optional>
#include <vector>

#include "rallyviz/events.h"
#include "rallyviz/tracking.h"

namespace rallyviz::oracle {

// Brute-force restatement of the stroke and bounce rules. Every frame is
// scanned on its own; nothing is shared with the detector beyond the input
// types. Cells come from an OpenCV homography.

struct OracleStroke {
  PlayerId player;
  FrameSpan span;
  int min_frame;
  std::optional<int> hit_frame;
};

struct OracleBounce {
  int frame;
  TableHalf half;
  int zone;
};

std::vector<OracleStroke> scan_strokes(const BallTrack& track, const TrackingDataset& dataset,
                                       double reach_px, int radius = 2, double threshold = 0.3);

std::vector<OracleBounce> scan_bounces(const BallTrack& track, const TrackingDataset& dataset,
                                       int radius = 2);

/// Half and zone of a screen point, or nullopt outside the table.
std::optional<std::pair<TableHalf, int>> scan_cell(const std::array<Vec2, 4>& quad, Vec2 p);

}  // namespace rallyviz::oracle
