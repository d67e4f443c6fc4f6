#include <gtest/gtest.h>

#include <random>

#include "event_oracle.h"
#include "rallyviz/events.h"
#include "synth.h"

namespace rallyviz {
namespace {

void expect_matches_truth(const synth::SynthRally& r, const std::string& tag) {
  const BallTrack track = build_ball_track(r.dataset);
  const EventSet ev = detect_events(r.dataset, track);
  const auto& t = r.truth;
  ASSERT_EQ(ev.strokes.size(), t.hit_frames.size()) << tag;
  for (size_t i = 0; i < t.hit_frames.size(); ++i) {
    EXPECT_EQ(ev.strokes[i].hit_frame, t.hit_frames[i]) << tag << " stroke " << i;
    EXPECT_EQ(ev.strokes[i].player, t.hitters[i]) << tag << " stroke " << i;
    EXPECT_EQ(*ev.strokes[i].text("technique"), t.techniques[i]) << tag << " stroke " << i;
  }
  ASSERT_EQ(ev.bounces.size(), t.bounce_frames.size()) << tag;
  for (size_t i = 0; i < t.bounce_frames.size(); ++i) {
    EXPECT_EQ(ev.bounces[i].span.start, t.bounce_frames[i]) << tag << " bounce " << i;
    EXPECT_EQ(ev.bounces[i].placement->half, t.bounce_cells[i].half) << tag << " bounce " << i;
    EXPECT_EQ(ev.bounces[i].placement->zone, t.bounce_cells[i].zone) << tag << " bounce " << i;
  }
}

TEST(SynthRally, FixtureGroundTruth) {
  const auto r = synth::synthesize(synth::fixture_plan());
  EXPECT_EQ(r.dataset.video.frame_count, 300);
  EXPECT_EQ(r.truth.hit_frames, (std::vector<int>{20, 65, 110, 155, 200, 245}));
  expect_matches_truth(r, "fixture");
  EXPECT_TRUE(detect_net_hits(build_ball_track(r.dataset), r.dataset).empty());
}

TEST(SynthRally, RandomRalliesMatchTruth) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) expect_matches_truth(synth::synthesize(synth::random_plan(rng)), "rally " + std::to_string(i));
}

TEST(SynthRally, IndependentProjectionAgreesWithTableGeometry) {
  const TableGeometry g(synth::table_quad());
  for (double u : {0.0, 0.13, 0.5, 0.77, 1.0})
    for (double v : {0.0, 0.4, 1.0}) {
      const Vec2 a = synth::project(u, v);
      const Vec2 b = g.to_screen({u, v});
      EXPECT_NEAR(a.x, b.x, 1e-3);
      EXPECT_NEAR(a.y, b.y, 1e-3);
    }
}

TEST(SynthRally, RejectsEndLineFinalShot) {
  auto plan = synth::fixture_plan();
  plan.shots.back().target_zone = 1;
  EXPECT_THROW(synth::synthesize(plan), std::invalid_argument);
}

}  // namespace
}  // namespace rallyviz
