#include <gtest/gtest.h>

#include <random>

#include "event_oracle.h"
#include "rallyviz/error.h"
#include "rallyviz/geometry.h"
#include "synth.h"

namespace rallyviz {
namespace {

TEST(Geometry, PointInPolygon) {
  const std::array<Vec2, 4> sq = {Vec2{0, 0}, Vec2{10, 0}, Vec2{10, 10}, Vec2{0, 10}};
  EXPECT_TRUE(point_in_polygon({5, 5}, sq));
  EXPECT_FALSE(point_in_polygon({11, 5}, sq));
  EXPECT_FALSE(point_in_polygon({5, -0.1}, sq));
  const std::array<Vec2, 5> concave = {Vec2{0, 0}, Vec2{10, 0}, Vec2{10, 10}, Vec2{5, 3}, Vec2{0, 10}};
  EXPECT_FALSE(point_in_polygon({5, 8}, concave));
  EXPECT_TRUE(point_in_polygon({5, 1}, concave));
}

TEST(Geometry, Convexity) {
  EXPECT_TRUE(is_convex(synth::table_quad()));
  const std::array<Vec2, 4> bowtie = {Vec2{0, 0}, Vec2{10, 10}, Vec2{10, 0}, Vec2{0, 10}};
  EXPECT_FALSE(is_convex(bowtie));
  const std::array<Vec2, 4> flat = {Vec2{0, 0}, Vec2{5, 0}, Vec2{10, 0}, Vec2{5, 5}};
  EXPECT_FALSE(is_convex(flat));
}

TEST(Geometry, HalfNames) {
  EXPECT_EQ(parse_half("A-side"), TableHalf::ASide);
  EXPECT_EQ(parse_half("B-side"), TableHalf::BSide);
  EXPECT_EQ(parse_half(to_string(TableHalf::ASide)), TableHalf::ASide);
  EXPECT_THROW(parse_half("A"), Error);
}

TEST(Geometry, HomographyMapsCornersAndRoundTrips) {
  const TableGeometry g(synth::table_quad());
  const std::array<Vec2, 4> unit = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
  for (size_t i = 0; i < 4; ++i) {
    const Vec2 s = g.to_screen(unit[i]);
    EXPECT_NEAR(s.x, g.quad()[i].x, 1e-6);
    EXPECT_NEAR(s.y, g.quad()[i].y, 1e-6);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 t{d(rng), d(rng)};
    const Vec2 back = g.to_table(g.to_screen(t));
    EXPECT_NEAR(back.x, t.x, 1e-9);
    EXPECT_NEAR(back.y, t.y, 1e-9);
    const Vec2 indep = synth::project(t.x, t.y);
    EXPECT_NEAR(distance(indep, g.to_screen(t)), 0.0, 1e-6);
  }
}

TEST(Geometry, CellsAgreeWithIndependentHomography) {
  const TableGeometry g(synth::table_quad());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(400, 1520), y(520, 800);
  int inside = 0;
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p{x(rng), y(rng)};
    PlacementCell c;
    const bool hit = g.cell_of(p, c);
    const auto ref = oracle::scan_cell(g.quad(), p);
    ASSERT_EQ(hit, ref.has_value()) << p.x << "," << p.y;
    if (!hit) continue;
    ++inside;
    EXPECT_EQ(c.half, ref->first);
    EXPECT_EQ(c.zone, ref->second);
    EXPECT_EQ(c.point, p);
  }
  EXPECT_GT(inside, 2000);
}

TEST(Geometry, CellCentresAndPolygons) {
  const TableGeometry g(synth::table_quad());
  for (auto half : {TableHalf::ASide, TableHalf::BSide})
    for (int z = 0; z < 9; ++z) {
      PlacementCell c;
      ASSERT_TRUE(g.cell_of(g.cell_center(half, z), c));
      EXPECT_EQ(c.half, half);
      EXPECT_EQ(c.zone, z);
      const auto poly = g.cell_polygon(half, z);
      EXPECT_TRUE(is_convex(poly));
      EXPECT_TRUE(point_in_polygon(g.cell_center(half, z), poly));
    }
  // Row 0 lies on the end line: A's end line is the u = 0 edge.
  const Vec2 a_end = g.to_table(g.cell_center(TableHalf::ASide, 1));
  EXPECT_LT(a_end.x, 0.1);
  const Vec2 b_end = g.to_table(g.cell_center(TableHalf::BSide, 1));
  EXPECT_GT(b_end.x, 0.9);
}

}  // namespace
}  // namespace rallyviz
