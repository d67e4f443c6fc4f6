#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rallyviz/design_space.h"
#include "rallyviz/script.h"
#include "rallyviz/tracking.h"

namespace rallyviz {

struct ScheduleNode {
  std::string node_id;  // the mapping id
  size_t mapping_index = 0;
  int source_frame = 0;
  std::vector<size_t> edges;  // indices into ScheduleDag::nodes
  std::vector<bool> virtual_edge;
  bool presented_flag = false;
};

struct ScheduleDag {
  std::vector<ScheduleNode> nodes;
  std::optional<size_t> anchor;

  bool has_edge(size_t from, size_t to) const;
  /// Kahn's algorithm, ready nodes taken by (source_frame, list index).
  /// Throws Error(Internal) on a cycle.
  std::vector<size_t> topological_order() const;
};

ScheduleDag build_dag(const AugmentationScript& script);

enum class FrameKind { Play, Hold, Reverse };
enum class Phase { Creation, Sustain, Destruction };
std::string_view to_string(FrameKind k);
std::string_view to_string(Phase p);
FrameKind parse_frame_kind(std::string_view s);
Phase parse_phase(std::string_view s);

struct ActiveItem {
  std::string mapping_id;
  Phase phase = Phase::Sustain;
  int data_frame = 0;    // tracking frame the item's data is drawn from
  int phase_step = 0;    // 0-based position inside the phase
  int phase_length = 1;
  bool operator==(const ActiveItem&) const = default;
};

struct OutputFrame {
  FrameKind kind = FrameKind::Play;
  int source_frame = 0;
  int slow_factor = 1;
  std::vector<ActiveItem> items;  // script mapping order
  bool operator==(const OutputFrame&) const = default;
};

struct ScheduleOptions {
  std::optional<int> default_hold_frames;  // unset: 2 s of video
  int ramp_frames = 10;
};

struct RenderSchedule {
  std::string script_id;
  NarrativeOrder order = NarrativeOrder::Linear;
  double fps = 0.0;
  FrameSpan clip;
  std::vector<std::string> reveal_order;  // topological order of mapping ids
  std::vector<OutputFrame> frames;

  int total_frames() const { return static_cast<int>(frames.size()); }
  bool operator==(const RenderSchedule&) const = default;
};

inline constexpr int kScheduleSchemaVersion = 1;

int default_hold_frames(const VideoMeta& video);

/// Expands the script into the double-track schedule. Throws
/// Error(UnsupportedOrder) for Grouped and Error(Validation) for scripts that
/// do not fit the video.
RenderSchedule compile_schedule(const AugmentationScript& script, const VideoMeta& video,
                                const ScheduleOptions& options = {});

/// Repeats each Play frame whose output index lies in `span` round(1/rate)
/// times. An empty span returns the schedule unchanged.
RenderSchedule apply_slow_motion(const RenderSchedule& schedule, FrameSpan span, double rate);

nlohmann::json to_json(const RenderSchedule& schedule);
RenderSchedule schedule_from_json(const nlohmann::json& doc);
std::string schedule_digest(const RenderSchedule& schedule);

/// Virtual edges whose attribute pair never co-occurs in a corpus clip of the
/// same order. Advisory only.
std::vector<std::string> check_virtual_links(const AugmentationScript& script, const ScheduleDag& dag,
                                             const std::vector<ClipAnnotation>& corpus);

}  // namespace rallyviz
