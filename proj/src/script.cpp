#include "rallyviz/script.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "rallyviz/error.h"
#include "rallyviz/hash.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;

namespace {

bool valid_color(const std::string& c) {
  if (c.size() != 7 && c.size() != 9) return false;
  if (c[0] != '#') return false;
  return std::all_of(c.begin() + 1, c.end(), [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)); });
}

template <typename T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void take(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j[key].is_null()) out.reset();
  else out = j[key].get<T>();
}

}  // namespace

void validate_style(const Style& s) {
  if (s.color && !valid_color(*s.color)) fail("style.color must be #rrggbb or #rrggbbaa");
  if (s.stroke_width && !(*s.stroke_width >= 0)) fail("style.stroke_width must be >= 0");
  if (s.opacity && !(*s.opacity >= 0 && *s.opacity <= 1)) fail("style.opacity must be in [0,1]");
  if (s.font_size && !(*s.font_size > 0)) fail("style.font_size must be > 0");
}

json to_json(const Style& s) {
  json j = json::object();
  put(j, "color", s.color);
  put(j, "stroke_width", s.stroke_width);
  put(j, "opacity", s.opacity);
  put(j, "font_size", s.font_size);
  put(j, "label_text", s.label_text);
  put(j, "z", s.z);
  return j;
}

Style patched(const Style& style, const json& patch) {
  Style s = style;
  try {
    take(patch, "color", s.color);
    take(patch, "stroke_width", s.stroke_width);
    take(patch, "opacity", s.opacity);
    take(patch, "font_size", s.font_size);
    take(patch, "label_text", s.label_text);
    take(patch, "z", s.z);
  } catch (const json::exception& e) {
    fail(std::string("malformed style: ") + e.what());
  }
  validate_style(s);
  return s;
}

Style style_from_json(const json& j) { return patched(Style{}, j); }

const ScriptMapping* AugmentationScript::find(const std::string& mapping_id) const {
  for (const auto& m : mappings)
    if (m.mapping_id == mapping_id) return &m;
  return nullptr;
}

void validate_script(const AugmentationScript& script, const Registry& registry) {
  if (script.clip.empty() || script.clip.start < 0) fail("script clip must be a non-empty interval");
  std::set<std::string> ids;
  for (const auto& m : script.mappings) {
    if (!ids.insert(m.mapping_id).second) fail("duplicate mapping_id '" + m.mapping_id + "'");
    if (!script.clip.contains(m.source_frame()))
      fail(m.mapping_id + ": selection anchor " + std::to_string(m.source_frame()) + " outside clip");
    if (registry.find_attribute(m.selection.attribute) == nullptr)
      fail(m.mapping_id + ": unknown attribute '" + m.selection.attribute + "'");
    if (registry.find_visual(m.visual) == nullptr) fail(m.mapping_id + ": unknown visual '" + m.visual + "'");
    if (m.hold_frames && *m.hold_frames < 0) fail(m.mapping_id + ": hold_frames must be >= 0");
    if (m.pass != 1 && m.pass != 2) fail(m.mapping_id + ": pass must be 1 or 2");
    validate_style(m.style);
  }
  const bool zz = script.order == NarrativeOrder::ZigZag;
  if (zz != script.zigzag.has_value()) fail("zigzag parameters are required exactly for the ZigZag order");
  const bool tf = script.order == NarrativeOrder::TimeFork;
  if (tf != script.timefork.has_value()) fail("timefork parameters are required exactly for the TimeFork order");
  if (script.zigzag && !script.clip.contains(script.zigzag->anchor)) fail("zigzag anchor outside clip");
  if (script.timefork) {
    std::set<std::string> seen;
    for (const auto* list : {&script.timefork->hypothetical, &script.timefork->actual}) {
      for (const auto& id : *list) {
        if (!ids.count(id)) fail("timefork references unknown mapping '" + id + "'");
        if (!seen.insert(id).second) fail("mapping '" + id + "' is both hypothetical and actual");
      }
    }
  }
  if (script.anchor_frame && !script.clip.contains(*script.anchor_frame)) fail("anchor_frame outside clip");
}

json to_json(const AugmentationScript& s) {
  json mappings = json::array();
  for (const auto& m : s.mappings) {
    json jm = {{"mapping_id", m.mapping_id},
               {"selection", to_json(m.selection)},
               {"visual", m.visual},
               {"style", to_json(m.style)},
               {"pass", m.pass}};
    jm["hold_frames"] = m.hold_frames ? json(*m.hold_frames) : json(nullptr);
    mappings.push_back(std::move(jm));
  }
  json j = {{"schema_version", kScriptSchemaVersion},
            {"script_id", s.script_id},
            {"clip", {s.clip.start, s.clip.end}},
            {"order", to_string(s.order)},
            {"mappings", mappings}};
  j["anchor_frame"] = s.anchor_frame ? json(*s.anchor_frame) : json(nullptr);
  j["zigzag"] = s.zigzag ? json{{"anchor", s.zigzag->anchor}, {"rewind_frames", s.zigzag->rewind_frames}}
                         : json(nullptr);
  if (s.timefork) {
    json tf = {{"hypothetical", s.timefork->hypothetical}, {"actual", s.timefork->actual}};
    tf["anchor"] = s.timefork->anchor ? json(*s.timefork->anchor) : json(nullptr);
    j["timefork"] = tf;
  } else {
    j["timefork"] = nullptr;
  }
  return j;
}

AugmentationScript script_from_json(const json& doc) {
  require_schema(doc, kScriptSchemaVersion, "script");
  AugmentationScript s;
  try {
    s.script_id = doc.value("script_id", "main");
    s.clip = {doc.at("clip").at(0).get<int>(), doc.at("clip").at(1).get<int>()};
    s.order = parse_order(doc.at("order").get<std::string>());
    if (doc.contains("anchor_frame") && !doc["anchor_frame"].is_null())
      s.anchor_frame = doc["anchor_frame"].get<int>();
    for (const auto& jm : doc.value("mappings", json::array())) {
      ScriptMapping m;
      m.selection = selection_from_json(jm.at("selection"));
      m.mapping_id = jm.value("mapping_id", m.selection.selection_id);
      m.visual = jm.at("visual").get<std::string>();
      m.style = style_from_json(jm.value("style", json::object()));
      if (jm.contains("hold_frames") && !jm["hold_frames"].is_null()) m.hold_frames = jm["hold_frames"].get<int>();
      m.pass = jm.value("pass", 1);
      s.mappings.push_back(std::move(m));
    }
    if (doc.contains("zigzag") && !doc["zigzag"].is_null()) {
      s.zigzag = ZigZagSpec{doc["zigzag"].at("anchor").get<int>(), doc["zigzag"].at("rewind_frames").get<int>()};
    }
    if (doc.contains("timefork") && !doc["timefork"].is_null()) {
      const auto& tf = doc["timefork"];
      TimeForkSpec spec;
      spec.hypothetical = tf.value("hypothetical", std::vector<std::string>{});
      spec.actual = tf.value("actual", std::vector<std::string>{});
      if (tf.contains("anchor") && !tf["anchor"].is_null()) spec.anchor = tf["anchor"].get<int>();
      s.timefork = std::move(spec);
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed script: ") + e.what());
  }
  validate_script(s);
  return s;
}

AugmentationScript load_script(const std::string& path) { return script_from_json(read_json(path)); }

std::string script_digest(const AugmentationScript& script) { return digest_of(to_json(script).dump()); }

}  // namespace rallyviz
