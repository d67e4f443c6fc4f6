#include "fixtures.h"

#include <cstdio>
#include <filesystem>

#include "rallyviz/error.h"
#include "rallyviz/io.h"
#include "synth.h"

namespace rallyviz::fixtures {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ClipAnnotation clip(int i, NarrativeOrder order, std::vector<VisualMappingPair> mappings) {
  ClipAnnotation c;
  char id[16];
  std::snprintf(id, sizeof id, "clip-%03d", i);
  c.clip_id = id;
  c.narrative_order = order;
  c.mappings = std::move(mappings);
  DataLevel top = DataLevel::Image;
  for (const auto& m : c.mappings) top = std::max(top, level_of(m.attribute), [](DataLevel a, DataLevel b) {
    return rank(a) < rank(b);
  });
  c.data_level = top;
  c.source = "sample broadcast " + std::to_string(1 + i % 7);
  return c;
}

ScriptMapping mapping(const Rally& rally, const std::string& id, const std::string& subject,
                      const std::string& attribute, int frame, const std::string& visual) {
  ScriptMapping m;
  m.mapping_id = id;
  m.selection = make_selection(rally, parse_subject_ref(subject), attribute, frame);
  m.visual = visual;
  return m;
}

}  // namespace

std::string fixture_path(const std::string& root, const std::string& relative) {
  return (fs::path(root) / relative).string();
}

std::vector<ClipAnnotation> sample_corpus() {
  using O = NarrativeOrder;
  // Recurring mapping sets; cycling through them keeps the counts varied.
  const std::vector<std::vector<VisualMappingPair>> linear = {
      {{"ball_trajectory", "Polyline"}},
      {{"ball_trajectory", "Polyline"}, {"player_highlight", "Spotlight"}},
      {{"player_name", "Label"}, {"player_highlight", "Spotlight"}},
      {{"ball_placement", "Region"}, {"ball_trajectory", "Polyline"}},
      {{"stroke_technique", "Label"}, {"player_posture", "Skeleton"}},
      {{"ball_rotation_speed", "Label"}},
      {{"ball_position", "Dot"}, {"ball_trajectory", "Arrow"}},
  };
  const std::vector<std::vector<VisualMappingPair>> ff = {
      {{"potential_placements", "HeatmapRegion"}, {"ball_trajectory", "Polyline"}},
      {{"potential_routes", "Arrow"}},
      {{"potential_placements", "HeatmapRegion"}, {"ball_placement", "Region"}},
      {{"ball_placement", "Region"}, {"ball_trajectory", "Polyline"}, {"ball_trajectory", "Pause"}},
      {{"potential_routes", "Arrow"}, {"potential_placements", "Region"}},
  };
  const std::vector<std::vector<VisualMappingPair>> fb = {
      {{"stroke_effect", "Label"}, {"ball_trajectory", "Polyline"}},
      {{"ball_placement", "Region"}, {"ball_trajectory", "Pause"}},
  };
  const std::vector<std::vector<VisualMappingPair>> zigzag = {
      {{"player_posture", "Skeleton"}, {"ball_trajectory", "SlowMotion"}},
      {{"stroke_technique", "Label"}, {"player_posture", "Skeleton"}},
  };
  const std::vector<std::vector<VisualMappingPair>> timefork = {
      {{"potential_routes", "Arrow"}, {"key_stroke", "Label"}},
  };
  std::vector<ClipAnnotation> out;
  int i = 1;
  auto add = [&](O order, const std::vector<std::vector<VisualMappingPair>>& sets, int n) {
    for (int k = 0; k < n; ++k) out.push_back(clip(i++, order, sets[static_cast<size_t>(k) % sets.size()]));
  };
  add(O::Linear, linear, 21);
  add(O::FlashForward, ff, 10);
  add(O::FlashBack, fb, 3);
  add(O::ZigZag, zigzag, 3);
  add(O::TimeFork, timefork, 2);
  add(O::Grouped, {{{"player_tactic", "Label"}, {"ball_placement", "Region"}}}, 1);
  return out;
}

json fixture_tactics() {
  return {{"schema_version", 1},
          {"facts",
           {{{"kind", "KeyStroke"}, {"anchor_event", "stroke#3"}, {"payload", {{"label", "Key stroke"}}}},
            {{"kind", "PlayerTactic"},
             {"anchor_event", "stroke#4"},
             {"payload", {{"label", "Wide to the backhand"}}}}}}};
}

AugmentationScript fixture_script(const std::string& name, const Rally& rally) {
  AugmentationScript s;
  s.script_id = name;
  s.clip = {0, rally.dataset.video.frame_count - 1};
  if (name == "linear") {
    s.order = NarrativeOrder::Linear;
    s.mappings.push_back(mapping(rally, "m1", "Player A", "player_name", 20, "Label"));
    s.mappings.push_back(mapping(rally, "m2", "Ball", "ball_trajectory", 65, "Polyline"));
    s.mappings.push_back(mapping(rally, "m3", "Player A", "player_posture", 110, "Skeleton"));
    s.mappings.push_back(mapping(rally, "m4", "Ball", "ball_placement", 135, "Region"));
    s.mappings.push_back(mapping(rally, "m5", "Player B", "stroke_technique", 155, "Label"));
    s.mappings[1].style.color = "#1f77b4";
  } else if (name == "flashforward") {
    s.order = NarrativeOrder::FlashForward;
    s.anchor_frame = 155;
    s.mappings.push_back(mapping(rally, "m1", "Ball", "potential_placements", 155, "HeatmapRegion"));
    s.mappings.push_back(mapping(rally, "m2", "Ball", "ball_trajectory", 200, "Polyline"));
    s.mappings.push_back(mapping(rally, "m3", "Ball", "ball_placement", 225, "Region"));
    s.mappings.push_back(mapping(rally, "m4", "Rally", "key_stroke", 155, "Label"));
    for (auto& m : s.mappings) m.hold_frames = 40;
  } else if (name == "zigzag") {
    s.order = NarrativeOrder::ZigZag;
    s.zigzag = ZigZagSpec{200, 40};
    s.mappings.push_back(mapping(rally, "m1", "Ball", "ball_trajectory", 200, "Polyline"));
    s.mappings.push_back(mapping(rally, "m2", "Player A", "player_highlight", 170, "Spotlight"));
    s.mappings.push_back(mapping(rally, "m3", "Player A", "stroke_technique", 200, "Label"));
    s.mappings.push_back(mapping(rally, "m4", "Player A", "player_posture", 180, "Skeleton"));
    s.mappings[1].pass = 2;
    s.mappings[2].pass = 2;
    s.mappings[3].pass = 2;
  } else {
    fail("unknown fixture script '" + name + "'");
  }
  validate_script(s);
  return s;
}

Rally fixture_rally(const std::string& root) {
  AnalysisOptions opts;
  opts.tactic_import = read_json(fixture_path(root, "data/fixtures/tactics_import.json"));
  return analyze(load_dataset(fixture_path(root, "data/fixtures/rally_300.json")), opts);
}

void write_fixture_files(const std::string& root) {
  fs::create_directories(fs::path(root) / "data" / "fixtures" / "scripts");
  fs::create_directories(fs::path(root) / "data" / "corpus");
  const auto synth_rally = synth::synthesize(synth::fixture_plan());
  save_dataset(synth_rally.dataset, fixture_path(root, "data/fixtures/rally_300.json"));
  write_file(fixture_path(root, "data/fixtures/tactics_import.json"), dump_canonical(fixture_tactics()));
  write_file(fixture_path(root, "data/corpus/sample_corpus.json"), dump_canonical(corpus_to_json(sample_corpus())));
  const Rally rally = fixture_rally(root);
  for (const char* name : kScriptNames)
    write_file(fixture_path(root, std::string("data/fixtures/scripts/") + name + ".json"),
               dump_canonical(to_json(fixture_script(name, rally))));
}

}  // namespace rallyviz::fixtures
