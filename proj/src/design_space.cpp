#include "rallyviz/design_space.h"

#include <algorithm>
#include <map>
#include <set>

#include "rallyviz/error.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;

namespace {

template <typename Enum, size_t N>
Enum parse_enum(std::string_view s, const std::pair<Enum, std::string_view> (&table)[N],
                const char* what) {
  for (const auto& [value, name] : table)
    if (name == s) return value;
  throw Error(ErrorCode::Validation, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename Enum, size_t N>
std::string_view enum_name(Enum v, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table)
    if (value == v) return name;
  return "?";
}

constexpr std::pair<DataCategory, std::string_view> kCategoryNames[] = {
    {DataCategory::Tracking, "Tracking"}, {DataCategory::NonTracking, "NonTracking"}};
constexpr std::pair<DataLevel, std::string_view> kLevelNames[] = {
    {DataLevel::Image, "Image"},
    {DataLevel::Object, "Object"},
    {DataLevel::Event, "Event"},
    {DataLevel::Tactic, "Tactic"}};
constexpr std::pair<NarrativeOrder, std::string_view> kOrderNames[] = {
    {NarrativeOrder::Linear, "Linear"},     {NarrativeOrder::FlashForward, "FlashForward"},
    {NarrativeOrder::FlashBack, "FlashBack"}, {NarrativeOrder::TimeFork, "TimeFork"},
    {NarrativeOrder::ZigZag, "ZigZag"},     {NarrativeOrder::Grouped, "Grouped"}};
constexpr std::pair<Subject, std::string_view> kSubjectNames[] = {{Subject::Ball, "Ball"},
                                                                  {Subject::Player, "Player"},
                                                                  {Subject::Table, "Table"},
                                                                  {Subject::Rally, "Rally"}};
constexpr std::pair<VisualFamily, std::string_view> kFamilyNames[] = {
    {VisualFamily::GraphicalMark, "GraphicalMark"}, {VisualFamily::VideoEffect, "VideoEffect"}};

Registry make_builtin() {
  using L = DataLevel;
  using S = Subject;
  constexpr auto T = DataCategory::Tracking;
  Registry r;
  r.version = 1;
  r.attributes = {
      {"ball_position", L::Object, T, S::Ball},
      {"ball_trajectory", L::Object, T, S::Ball},
      {"ball_velocity", L::Object, T, S::Ball},
      {"player_position", L::Object, T, S::Player},
      {"player_trajectory", L::Object, T, S::Player},
      {"player_posture", L::Object, T, S::Player},
      {"player_highlight", L::Object, T, S::Player},
      {"player_name", L::Object, DataCategory::NonTracking, S::Player},
      {"ball_placement", L::Event, T, S::Ball},
      {"ball_rotation_speed", L::Event, T, S::Ball},
      {"stroke_technique", L::Event, T, S::Player},
      {"potential_placements", L::Tactic, T, S::Ball},
      {"potential_routes", L::Tactic, T, S::Ball},
      {"stroke_effect", L::Tactic, T, S::Player},
      {"player_tactic", L::Tactic, T, S::Player},
      {"key_stroke", L::Tactic, T, S::Rally},
  };
  constexpr auto M = VisualFamily::GraphicalMark;
  constexpr auto E = VisualFamily::VideoEffect;
  r.visuals = {{"Label", M},     {"Dot", M},           {"Polyline", M},  {"Arrow", M},
               {"Region", M},    {"HeatmapRegion", M}, {"Spotlight", M}, {"Skeleton", M},
               {"BoundingBox", M}, {"Pause", E},       {"SlowMotion", E}, {"Repeat", E}};
  return r;
}

}  // namespace

std::string_view to_string(DataCategory v) { return enum_name(v, kCategoryNames); }
std::string_view to_string(DataLevel v) { return enum_name(v, kLevelNames); }
std::string_view to_string(NarrativeOrder v) { return enum_name(v, kOrderNames); }
std::string_view to_string(Subject v) { return enum_name(v, kSubjectNames); }
std::string_view to_string(VisualFamily v) { return enum_name(v, kFamilyNames); }

DataCategory parse_category(std::string_view s) { return parse_enum(s, kCategoryNames, "data category"); }
DataLevel parse_level(std::string_view s) { return parse_enum(s, kLevelNames, "data level"); }
NarrativeOrder parse_order(std::string_view s) { return parse_enum(s, kOrderNames, "narrative order"); }
Subject parse_subject(std::string_view s) { return parse_enum(s, kSubjectNames, "subject"); }
VisualFamily parse_family(std::string_view s) { return parse_enum(s, kFamilyNames, "visual family"); }

const DataAttributeKind* Registry::find_attribute(std::string_view name) const {
  auto it = std::find_if(attributes.begin(), attributes.end(),
                         [&](const DataAttributeKind& a) { return a.name == name; });
  return it == attributes.end() ? nullptr : &*it;
}

const VisualKind* Registry::find_visual(std::string_view name) const {
  auto it = std::find_if(visuals.begin(), visuals.end(),
                         [&](const VisualKind& v) { return v.name == name; });
  return it == visuals.end() ? nullptr : &*it;
}

const Registry& builtin_registry() {
  static const Registry registry = make_builtin();
  return registry;
}

DataLevel level_of(const Registry& registry, std::string_view attribute) {
  if (const auto* a = registry.find_attribute(attribute)) return a->level;
  throw Error(ErrorCode::NotFound, "unknown attribute '" + std::string(attribute) + "'");
}

DataLevel level_of(std::string_view attribute) { return level_of(builtin_registry(), attribute); }

ValidationReport validate_registry(const Registry& registry) {
  ValidationReport report;
  std::set<std::string> seen;
  const Registry& canonical = builtin_registry();
  for (const auto& a : registry.attributes) {
    if (a.name.empty()) report.violations.push_back({"empty name", a.name, "attribute"});
    if (!seen.insert(a.name).second)
      report.violations.push_back({"duplicate name", a.name, "attribute"});
    if (const auto* known = canonical.find_attribute(a.name); known && known->level != a.level) {
      report.violations.push_back(
          {"level mismatch", a.name,
           "labeled " + std::string(to_string(a.level)) + ", lives at " +
               std::string(to_string(known->level))});
    }
  }
  std::map<std::string, VisualFamily> families;
  for (const auto& v : registry.visuals) {
    auto [it, inserted] = families.emplace(v.name, v.family);
    if (!inserted) {
      report.violations.push_back(
          {it->second == v.family ? "duplicate name" : "visual in two families", v.name, "visual"});
    }
  }
  return report;
}

std::pair<Registry, ValidationReport> parse_registry(const json& doc) {
  require_schema(doc, 1, "registry");
  Registry r;
  ValidationReport report;
  r.version = doc.value("version", 1);
  for (const auto& e : doc.value("attributes", json::array())) {
    const std::string name = e.value("name", "");
    DataAttributeKind a;
    a.name = name;
    try {
      a.level = parse_level(e.at("level").get<std::string>());
      a.category = parse_category(e.value("category", "Tracking"));
    } catch (const std::exception& ex) {
      report.violations.push_back({"malformed attribute", name, ex.what()});
      continue;
    }
    try {
      a.subject = parse_subject(e.at("subject").get<std::string>());
    } catch (const std::exception&) {
      report.violations.push_back({"unknown subject", name, e.value("subject", json()).dump()});
      continue;
    }
    r.attributes.push_back(std::move(a));
  }
  for (const auto& e : doc.value("visuals", json::array())) {
    const std::string name = e.value("name", "");
    try {
      r.visuals.push_back({name, parse_family(e.at("family").get<std::string>())});
    } catch (const std::exception& ex) {
      report.violations.push_back({"malformed visual", name, ex.what()});
    }
  }
  auto structural = validate_registry(r);
  report.violations.insert(report.violations.end(), structural.violations.begin(),
                           structural.violations.end());
  return {std::move(r), std::move(report)};
}

json to_json(const Registry& registry) {
  json attrs = json::array();
  for (const auto& a : registry.attributes) {
    attrs.push_back({{"name", a.name},
                     {"level", to_string(a.level)},
                     {"category", to_string(a.category)},
                     {"subject", to_string(a.subject)}});
  }
  json visuals = json::array();
  for (const auto& v : registry.visuals)
    visuals.push_back({{"name", v.name}, {"family", to_string(v.family)}});
  return {{"schema_version", 1}, {"version", registry.version}, {"attributes", attrs},
          {"visuals", visuals}};
}

std::vector<std::string> validate_annotation(const ClipAnnotation& clip, const Registry& registry) {
  std::vector<std::string> problems;
  if (clip.mappings.empty()) problems.push_back(clip.clip_id + ": mappings empty");
  std::optional<DataLevel> highest;
  for (const auto& m : clip.mappings) {
    const auto* a = registry.find_attribute(m.attribute);
    if (a == nullptr) {
      problems.push_back(clip.clip_id + ": unknown attribute '" + m.attribute + "'");
      continue;
    }
    if (registry.find_visual(m.visual) == nullptr)
      problems.push_back(clip.clip_id + ": unknown visual '" + m.visual + "'");
    if (!highest || rank(a->level) > rank(*highest)) highest = a->level;
  }
  if (highest && *highest != clip.data_level) {
    problems.push_back(clip.clip_id + ": data_level " + std::string(to_string(clip.data_level)) +
                       " but highest mapped level is " + std::string(to_string(*highest)));
  }
  return problems;
}

json to_json(const ClipAnnotation& clip) {
  json mappings = json::array();
  for (const auto& m : clip.mappings) mappings.push_back({m.attribute, m.visual});
  return {{"clip_id", clip.clip_id},
          {"sport", clip.sport},
          {"data_level", to_string(clip.data_level)},
          {"narrative_order", to_string(clip.narrative_order)},
          {"mappings", mappings},
          {"source", clip.source}};
}

ClipAnnotation annotation_from_json(const json& j) {
  ClipAnnotation c;
  try {
    c.clip_id = j.at("clip_id").get<std::string>();
    c.sport = j.value("sport", "table_tennis");
    c.data_level = parse_level(j.at("data_level").get<std::string>());
    c.narrative_order = parse_order(j.at("narrative_order").get<std::string>());
    for (const auto& m : j.at("mappings"))
      c.mappings.push_back({m.at(0).get<std::string>(), m.at(1).get<std::string>()});
    c.source = j.value("source", "");
  } catch (const json::exception& e) {
    fail(std::string("malformed clip annotation: ") + e.what());
  }
  return c;
}

json corpus_to_json(const std::vector<ClipAnnotation>& clips) {
  json arr = json::array();
  for (const auto& c : clips) arr.push_back(to_json(c));
  return {{"schema_version", kCorpusSchemaVersion}, {"clips", arr}};
}

std::vector<ClipAnnotation> corpus_from_json(const json& doc, const Registry& registry) {
  require_schema(doc, kCorpusSchemaVersion, "corpus");
  std::vector<ClipAnnotation> clips;
  for (const auto& c : doc.value("clips", json::array())) {
    clips.push_back(annotation_from_json(c));
    if (auto problems = validate_annotation(clips.back(), registry); !problems.empty()) fail(problems.front());
  }
  return clips;
}

std::vector<ClipAnnotation> load_corpus(const std::string& path, const Registry& registry) {
  return corpus_from_json(read_json(path), registry);
}

}  // namespace rallyviz
