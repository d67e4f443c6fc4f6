#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rallyviz/geometry.h"
#include "rallyviz/pyramid.h"
#include "rallyviz/scheduler.h"
#include "rallyviz/script.h"

namespace rallyviz {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  bool operator==(const Color&) const = default;
};

Color parse_color(const std::string& hex);
std::string to_hex(Color c);  // "#rrggbb", alpha dropped

struct Palette {
  Color player_a{0xd6, 0x27, 0x28};
  Color player_b{0x00, 0x00, 0x00};
  std::array<Color, 8> categorical{{{0x1f, 0x77, 0xb4},
                                    {0xff, 0x7f, 0x0e},
                                    {0x2c, 0xa0, 0x2c},
                                    {0x94, 0x67, 0xbd},
                                    {0x8c, 0x56, 0x4b},
                                    {0xe3, 0x77, 0xc2},
                                    {0x17, 0xbe, 0xcf},
                                    {0xbc, 0xbd, 0x22}}};
  bool operator==(const Palette&) const = default;
};

struct RenderOptions {
  Palette palette;
  double stroke_width = 3.0;
  double font_size = 28.0;
  double dot_radius = 8.0;
};

struct DotGeometry {
  Vec2 center;
  double radius = 0;
};
struct PathGeometry {
  std::vector<std::vector<Vec2>> paths;
  bool arrow = false;
};
struct HeatCell {
  std::vector<Vec2> polygon;
  double probability = 0;
  double alpha = 0;  // fill opacity before the item's own opacity
};
struct RegionGeometry {
  std::vector<HeatCell> cells;
};
struct EllipseGeometry {
  Vec2 center;
  double rx = 0, ry = 0;
};
struct SkeletonGeometry {
  std::array<std::optional<Vec2>, 17> joints;
};
struct BoxGeometry {
  BBox box;
};
struct LabelGeometry {
  Vec2 anchor;
  std::string text;
};
/// monostate: narrative effects (Pause, SlowMotion, Repeat) draw nothing.
using Geometry = std::variant<std::monostate, DotGeometry, PathGeometry, RegionGeometry, EllipseGeometry,
                              SkeletonGeometry, BoxGeometry, LabelGeometry>;

struct OverlayItem {
  std::string mapping_id;
  std::string visual;
  Geometry geometry;
  Color color;
  double stroke_width = 3.0;
  double font_size = 28.0;
  double opacity = 1.0;  // style opacity times the phase ramp
  int z = 0;
  Phase phase = Phase::Sustain;
};

struct OverlayFrame {
  int output_index = 0;
  int source_frame = 0;
  FrameKind kind = FrameKind::Play;
  int width = 0;
  int height = 0;
  std::vector<OverlayItem> items;       // sorted by (z, mapping_id)
  std::vector<std::string> skipped;     // "<mapping_id>: <reason>"
};

int default_z(const std::string& visual);
/// Opacity multiplier for a phase position: Creation ramps up to 1,
/// Destruction ramps down without reaching 0.
double phase_ramp(Phase phase, int step, int length);
/// Fill opacity of a heatmap cell; strictly increasing in p.
inline double heat_alpha(double p) { return 0.85 * p; }

/// Builds the geometry for one mapping at one schedule slot. Throws
/// Error(NotFound) when the data is missing at the frame and Error(Validation)
/// when the visual cannot encode the attribute.
OverlayItem realize_item(const ScriptMapping& mapping, size_t mapping_index, const Rally& rally,
                         const ActiveItem& slot, const RenderOptions& options = {});

/// Realizes every output frame of the schedule. Items whose data is missing
/// are listed in OverlayFrame::skipped instead of failing the whole render.
std::vector<OverlayFrame> build_overlays(const AugmentationScript& script, const RenderSchedule& schedule,
                                         const Rally& rally, const RenderOptions& options = {});

std::string render_frame(const OverlayFrame& frame);

struct CompositeResult {
  int svg_count = 0;
  int png_count = 0;
  std::string manifest_path;
};

nlohmann::json manifest_json(const RenderSchedule& schedule, const std::vector<OverlayFrame>& overlays,
                             bool with_images);

/// Writes overlays/%06d.svg and manifest.json under out_dir and, when
/// frames_dir is given, frames/%06d.png composited over the source images
/// (%06d.png or %06d.jpg, numbered by source frame).
CompositeResult composite_sequence(const RenderSchedule& schedule, const std::vector<OverlayFrame>& overlays,
                                   const std::string& out_dir,
                                   const std::optional<std::string>& frames_dir = std::nullopt);

/// Compile, realize and write in one step; shared by the CLI and the service.
CompositeResult render_script(const AugmentationScript& script, const Rally& rally, const std::string& out_dir,
                              const std::optional<std::string>& frames_dir = std::nullopt,
                              const ScheduleOptions& schedule_options = {},
                              const RenderOptions& render_options = {});

}  // namespace rallyviz
