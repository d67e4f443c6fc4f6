#include <gtest/gtest.h>

#include <filesystem>
#include <opencv2/imgcodecs.hpp>

#include "fixtures.h"
#include "rallyviz/error.h"
#include "rallyviz/io.h"
#include "rallyviz/renderer.h"

namespace rallyviz {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const Rally& fixture() {
  static const Rally r = fixtures::fixture_rally(RALLYVIZ_SOURCE_DIR);
  return r;
}

ScriptMapping mapping(const std::string& id, const std::string& subject, const std::string& attribute, int frame,
                      const std::string& visual) {
  ScriptMapping m;
  m.mapping_id = id;
  m.selection = make_selection(fixture(), parse_subject_ref(subject), attribute, frame);
  m.visual = visual;
  return m;
}

ActiveItem slot(const std::string& id, int frame) {
  ActiveItem a;
  a.mapping_id = id;
  a.data_frame = frame;
  return a;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rallyviz_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Renderer, Colors) {
  EXPECT_EQ(parse_color("#1f77b4"), (Color{0x1f, 0x77, 0xb4, 255}));
  EXPECT_EQ(parse_color("#1f77b480").a, 0x80);
  EXPECT_EQ(to_hex(parse_color("#D62728")), "#d62728");
  EXPECT_THROW(parse_color("1f77b4"), Error);
  EXPECT_THROW(parse_color("#1f77bz"), Error);
}

TEST(Renderer, PhaseRampAndHeatAlpha) {
  for (int len : {1, 4, 10}) {
    double prev = 0;
    for (int s = 0; s < len; ++s) {
      const double v = phase_ramp(Phase::Creation, s, len);
      EXPECT_GT(v, prev);
      prev = v;
    }
    EXPECT_DOUBLE_EQ(prev, 1.0);
    prev = 1.0;
    for (int s = 0; s < len; ++s) {
      const double v = phase_ramp(Phase::Destruction, s, len);
      EXPECT_LT(v, prev);
      EXPECT_GT(v, 0.0);
      prev = v;
    }
  }
  EXPECT_DOUBLE_EQ(phase_ramp(Phase::Sustain, 3, 7), 1.0);
  for (double p = 0.05; p < 1.0; p += 0.05) EXPECT_LT(heat_alpha(p), heat_alpha(p + 0.05));
}

TEST(Renderer, DefaultZOrdersMarks) {
  EXPECT_LT(default_z("HeatmapRegion"), default_z("Spotlight"));
  EXPECT_LT(default_z("Spotlight"), default_z("Polyline"));
  EXPECT_LT(default_z("Polyline"), default_z("Skeleton"));
  EXPECT_LT(default_z("Skeleton"), default_z("Dot"));
  EXPECT_LT(default_z("Dot"), default_z("Label"));
}

TEST(Renderer, RealizeItemGeometry) {
  const auto& r = fixture();
  const auto traj = realize_item(mapping("t", "Ball", "ball_trajectory", 70, "Polyline"), 0, r, slot("t", 90));
  const auto& path = std::get<PathGeometry>(traj.geometry);
  ASSERT_EQ(path.paths.size(), 1u);
  EXPECT_EQ(path.paths[0].size(), 26u);  // frames 65..90
  EXPECT_EQ(path.paths[0].back(), r.track.at(90));
  EXPECT_EQ(traj.color, RenderOptions{}.palette.categorical[0]);

  const auto heat = realize_item(mapping("h", "Ball", "potential_placements", 250, "HeatmapRegion"), 1, r, slot("h", 250));
  const auto& cells = std::get<RegionGeometry>(heat.geometry).cells;
  ASSERT_EQ(cells.size(), 3u);
  for (const auto& c : cells) EXPECT_DOUBLE_EQ(c.alpha, heat_alpha(c.probability));

  const auto name = realize_item(mapping("n", "Player A", "player_name", 20, "Label"), 2, r, slot("n", 20));
  EXPECT_EQ(std::get<LabelGeometry>(name.geometry).text, "Player Red");
  EXPECT_EQ(name.color, RenderOptions{}.palette.player_a);
  EXPECT_EQ(name.z, default_z("Label"));

  const auto pause = realize_item(mapping("p", "Ball", "ball_trajectory", 70, "Pause"), 3, r, slot("p", 70));
  EXPECT_TRUE(std::holds_alternative<std::monostate>(pause.geometry));
}

TEST(Renderer, StyleOverridesAndPhaseOpacity) {
  auto m = mapping("d", "Ball", "ball_position", 70, "Dot");
  m.style.color = "#00ff0080";
  m.style.opacity = 0.5;
  m.style.z = -3;
  ActiveItem s = slot("d", 70);
  s.phase = Phase::Creation;
  s.phase_step = 1;
  s.phase_length = 4;
  const auto item = realize_item(m, 0, fixture(), s);
  EXPECT_EQ(item.color.g, 0xff);
  EXPECT_NEAR(item.opacity, 0.5 * (128.0 / 255.0) * 0.5, 1e-12);
  EXPECT_EQ(item.z, -3);
  EXPECT_EQ(item.phase, Phase::Creation);
}

TEST(Renderer, RealizeItemErrors) {
  const auto& r = fixture();
  auto expect_code = [&](const ScriptMapping& m, int frame, ErrorCode code) {
    try {
      realize_item(m, 0, r, slot(m.mapping_id, frame));
      ADD_FAILURE() << m.mapping_id;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << m.mapping_id << ": " << e.what();
    }
  };
  expect_code(mapping("skel", "Ball", "ball_trajectory", 70, "Skeleton"), 70, ErrorCode::Validation);
  expect_code(mapping("late", "Ball", "ball_position", 70, "Dot"), 300, ErrorCode::NotFound);
  auto rpm = mapping("rpm", "Ball", "ball_position", 70, "Label");
  rpm.selection.attribute = "ball_rotation_speed";
  expect_code(rpm, 70, ErrorCode::NotFound);
}

TEST(Renderer, OverlaysSortAndSkip) {
  const auto& r = fixture();
  AugmentationScript s;
  s.clip = {60, 80};
  s.mappings.push_back(mapping("z_label", "Player B", "stroke_technique", 65, "Label"));
  s.mappings.push_back(mapping("a_heat", "Ball", "potential_placements", 65, "HeatmapRegion"));
  s.mappings.push_back(mapping("m_rpm", "Ball", "ball_position", 65, "Label"));
  s.mappings.back().selection.attribute = "ball_rotation_speed";
  const auto schedule = compile_schedule(s, r.dataset.video);
  const auto overlays = build_overlays(s, schedule, r);
  ASSERT_EQ(overlays.size(), schedule.frames.size());
  const auto& last = overlays.back();
  ASSERT_EQ(last.items.size(), 2u);
  EXPECT_EQ(last.items[0].mapping_id, "a_heat");
  EXPECT_EQ(last.items[1].mapping_id, "z_label");
  ASSERT_EQ(last.skipped.size(), 1u);
  EXPECT_EQ(last.skipped[0].rfind("m_rpm: ", 0), 0u);
  EXPECT_EQ(last.width, 1920);
  const auto manifest = manifest_json(schedule, overlays, false);
  EXPECT_EQ(manifest["total_frames"], schedule.total_frames());
  EXPECT_EQ(manifest["frames"][0]["overlay"], "overlays/000000.svg");
  EXPECT_TRUE(manifest["frames"].back().contains("skipped"));
}

TEST(Renderer, SvgFormat) {
  OverlayFrame f;
  f.width = 64;
  f.height = 48;
  OverlayItem label;
  label.mapping_id = "m<1>";
  label.visual = "Label";
  label.geometry = LabelGeometry{{10, 20}, "A & B"};
  label.opacity = 0.5;
  OverlayItem pause;
  pause.mapping_id = "p";
  pause.visual = "Pause";
  OverlayItem dot;
  dot.mapping_id = "d";
  dot.visual = "Dot";
  dot.geometry = DotGeometry{{1.5, 2.25}, 8};
  dot.color = {255, 0, 0, 255};
  f.items = {dot, label, pause};
  const std::string svg = render_frame(f);
  EXPECT_EQ(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"64\" height=\"48\"", 0), 0u);
  EXPECT_NE(svg.find("A &amp; B"), std::string::npos);
  EXPECT_NE(svg.find("id=\"m&lt;1&gt;\""), std::string::npos);
  EXPECT_NE(svg.find("fill=\"#ff0000\""), std::string::npos);
  EXPECT_EQ(svg.find("id=\"p\""), std::string::npos);
  EXPECT_LT(svg.find("id=\"d\""), svg.find("id=\"m&lt;1&gt;\""));
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
  EXPECT_EQ(render_frame(f), svg);
}

TEST(Renderer, CompositesOverSourceImages) {
  const fs::path src = scratch("frames_src");
  const fs::path out = scratch("frames_out");
  fs::create_directories(src);
  cv::imwrite((src / "000007.png").string(), cv::Mat(48, 64, CV_8UC3, cv::Scalar(0, 0, 0)));

  RenderSchedule schedule;
  schedule.fps = 50;
  schedule.frames.push_back(OutputFrame{FrameKind::Play, 7, 1, {slot("d", 7)}});
  OverlayFrame f;
  f.source_frame = 7;
  f.width = 64;
  f.height = 48;
  OverlayItem dot;
  dot.mapping_id = "d";
  dot.visual = "Dot";
  dot.geometry = DotGeometry{{32, 24}, 8};
  dot.color = {255, 0, 0, 255};
  f.items = {dot};
  const auto res = composite_sequence(schedule, {f}, out.string(), src.string());
  EXPECT_EQ(res.svg_count, 1);
  EXPECT_EQ(res.png_count, 1);
  const cv::Mat img = cv::imread((out / "frames" / "000000.png").string());
  ASSERT_FALSE(img.empty());
  EXPECT_EQ(img.at<cv::Vec3b>(24, 32), (cv::Vec3b{0, 0, 255}));
  EXPECT_EQ(img.at<cv::Vec3b>(2, 2), (cv::Vec3b{0, 0, 0}));
  EXPECT_EQ(read_json(res.manifest_path)["frames"][0]["image"], "frames/000000.png");

  f.width = 100;
  EXPECT_THROW(composite_sequence(schedule, {f}, out.string(), src.string()), Error);
  f.width = 64;
  f.source_frame = 8;
  try {
    composite_sequence(schedule, {f}, out.string(), src.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
  fs::remove_all(src);
  fs::remove_all(out);
}

}  // namespace
}  // namespace rallyviz
