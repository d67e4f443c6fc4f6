#include "rallyviz/geometry.h"

#include <Eigen/Dense>
#include <algorithm>

#include "rallyviz/error.h"

namespace rallyviz {

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  // Even-odd crossing test.
  bool inside = false;
  const size_t n = polygon.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool is_convex(std::span<const Vec2> polygon) {
  const size_t n = polygon.size();
  if (n < 3) return false;
  int sign = 0;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[(i + 1) % n];
    const Vec2 c = polygon[(i + 2) % n];
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    if (cross == 0.0) return false;
    const int s = cross > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

std::string_view to_string(TableHalf half) { return half == TableHalf::ASide ? "A-side" : "B-side"; }

TableHalf parse_half(std::string_view s) {
  if (s == "A-side") return TableHalf::ASide;
  if (s == "B-side") return TableHalf::BSide;
  fail("unknown table half '" + std::string(s) + "'");
}

namespace {

std::array<double, 9> unit_square_homography(const std::array<Vec2, 4>& quad) {
  static constexpr double kSrc[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double u = kSrc[i][0], v = kSrc[i][1];
    const double x = quad[static_cast<size_t>(i)].x, y = quad[static_cast<size_t>(i)].y;
    a.row(2 * i) << u, v, 1, 0, 0, 0, -u * x, -v * x;
    a.row(2 * i + 1) << 0, 0, 0, u, v, 1, -u * y, -v * y;
    b(2 * i) = x;
    b(2 * i + 1) = y;
  }
  const Eigen::Matrix<double, 8, 1> h = a.fullPivLu().solve(b);
  return {h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0};
}

std::array<double, 9> invert(const std::array<double, 9>& m) {
  Eigen::Matrix3d mat;
  mat << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
  const Eigen::Matrix3d inv = mat.inverse();
  return {inv(0, 0), inv(0, 1), inv(0, 2), inv(1, 0), inv(1, 1),
          inv(1, 2), inv(2, 0), inv(2, 1), inv(2, 2)};
}

Vec2 apply(const std::array<double, 9>& h, Vec2 p) {
  const double w = h[6] * p.x + h[7] * p.y + h[8];
  return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

}  // namespace

TableGeometry::TableGeometry(const std::array<Vec2, 4>& quad) : quad_(quad) {
  if (!is_convex(quad_)) fail("table quad is not convex");
  to_screen_ = unit_square_homography(quad_);
  to_table_ = invert(to_screen_);
}

Vec2 TableGeometry::to_table(Vec2 screen) const { return apply(to_table_, screen); }
Vec2 TableGeometry::to_screen(Vec2 table) const { return apply(to_screen_, table); }

bool TableGeometry::contains(Vec2 screen) const {
  const Vec2 t = to_table(screen);
  return t.x >= 0.0 && t.x <= 1.0 && t.y >= 0.0 && t.y <= 1.0;
}

void TableGeometry::cell_bounds(TableHalf half, int zone, double& u0, double& u1, double& v0,
                                double& v1) {
  if (zone < 0 || zone > 8) fail("zone out of range: " + std::to_string(zone));
  const int row = zone / 3;
  const int col = zone % 3;
  constexpr double kDepth = 1.0 / 6.0;
  if (half == TableHalf::ASide) {
    u0 = row * kDepth;
    u1 = (row + 1) * kDepth;
  } else {
    u1 = 1.0 - row * kDepth;
    u0 = 1.0 - (row + 1) * kDepth;
  }
  v0 = col / 3.0;
  v1 = (col + 1) / 3.0;
}

bool TableGeometry::cell_of(Vec2 screen, PlacementCell& out) const {
  const Vec2 t = to_table(screen);
  if (!(t.x >= 0.0 && t.x <= 1.0 && t.y >= 0.0 && t.y <= 1.0)) return false;
  const TableHalf half = t.x < 0.5 ? TableHalf::ASide : TableHalf::BSide;
  const double depth = half == TableHalf::ASide ? t.x : 1.0 - t.x;  // 0 at own end line
  const int row = std::min(2, static_cast<int>(depth * 6.0));
  const int col = std::min(2, static_cast<int>(t.y * 3.0));
  out = PlacementCell{half, row * 3 + col, screen};
  return true;
}

Vec2 TableGeometry::cell_center(TableHalf half, int zone) const {
  double u0, u1, v0, v1;
  cell_bounds(half, zone, u0, u1, v0, v1);
  return to_screen({(u0 + u1) / 2, (v0 + v1) / 2});
}

std::array<Vec2, 4> TableGeometry::cell_polygon(TableHalf half, int zone) const {
  double u0, u1, v0, v1;
  cell_bounds(half, zone, u0, u1, v0, v1);
  return {to_screen({u0, v0}), to_screen({u1, v0}), to_screen({u1, v1}), to_screen({u0, v1})};
}

}  // namespace rallyviz
