#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rallyviz/design_space.h"
#include "rallyviz/pyramid.h"

namespace rallyviz {

/// User overrides for one mapping's look. Unset fields use renderer defaults.
struct Style {
  std::optional<std::string> color;  // "#rrggbb" or "#rrggbbaa"
  std::optional<double> stroke_width;
  std::optional<double> opacity;
  std::optional<double> font_size;
  std::optional<std::string> label_text;
  std::optional<int> z;
  bool operator==(const Style&) const = default;
};

/// Throws Error(Validation) naming the bad field.
void validate_style(const Style& style);
nlohmann::json to_json(const Style& style);
Style style_from_json(const nlohmann::json& j);
/// Applies a partial JSON patch (null clears a field).
Style patched(const Style& style, const nlohmann::json& patch);

struct ScriptMapping {
  std::string mapping_id;
  DataSelection selection;
  std::string visual;
  Style style;
  std::optional<int> hold_frames;  // default: 2 s of video
  int pass = 1;                    // ZigZag: 2 = shown on the replay

  int source_frame() const { return selection.anchor_frame; }
  bool operator==(const ScriptMapping&) const = default;
};

struct ZigZagSpec {
  int anchor = 0;
  int rewind_frames = 0;
  bool operator==(const ZigZagSpec&) const = default;
};

struct TimeForkSpec {
  std::vector<std::string> hypothetical;
  std::vector<std::string> actual;
  std::optional<int> anchor;  // default: earliest hypothetical source frame
  bool operator==(const TimeForkSpec&) const = default;
};

struct AugmentationScript {
  std::string script_id = "main";
  FrameSpan clip;
  NarrativeOrder order = NarrativeOrder::Linear;
  std::optional<int> anchor_frame;  // FlashForward / FlashBack override
  std::vector<ScriptMapping> mappings;
  std::optional<ZigZagSpec> zigzag;
  std::optional<TimeForkSpec> timefork;

  const ScriptMapping* find(const std::string& mapping_id) const;
  bool operator==(const AugmentationScript&) const = default;
};

inline constexpr int kScriptSchemaVersion = 1;

/// Structural checks independent of the video: unique ids, anchors inside
/// the clip, zigzag/timefork present exactly for their orders.
void validate_script(const AugmentationScript& script, const Registry& registry = builtin_registry());

nlohmann::json to_json(const AugmentationScript& script);
AugmentationScript script_from_json(const nlohmann::json& doc);
AugmentationScript load_script(const std::string& path);

/// Content hash of the canonical script serialization.
std::string script_digest(const AugmentationScript& script);

}  // namespace rallyviz
