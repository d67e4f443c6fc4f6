#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace rallyviz {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return a + (b - a) * t; }

/// Screen-space box, origin top-left, pixels.
struct BBox {
  double x = 0, y = 0, w = 0, h = 0;
  Vec2 center() const { return {x + w / 2, y + h / 2}; }
  bool operator==(const BBox&) const = default;
};

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);
bool is_convex(std::span<const Vec2> polygon);

enum class TableHalf { ASide, BSide };
std::string_view to_string(TableHalf half);
TableHalf parse_half(std::string_view s);

/// A cell of the 3x3 placement grid on one half of the table.
/// zone = row * 3 + col; row 0 is the end-line row (farthest from the net),
/// col runs across the table in increasing table-space v.
struct PlacementCell {
  TableHalf half = TableHalf::ASide;
  int zone = 0;
  Vec2 point;

  int row() const { return zone / 3; }
  int col() const { return zone % 3; }
  bool operator==(const PlacementCell&) const = default;
};

/// Projective map between the table quad in the image and the unit square
/// (u along the long axis from A's end line to B's end line, v across).
/// Quad corners are ordered A-far, B-far, B-near, A-near, i.e. the corner at
/// (u,v) = (0,0), (1,0), (1,1), (0,1).
class TableGeometry {
 public:
  explicit TableGeometry(const std::array<Vec2, 4>& quad);

  Vec2 to_table(Vec2 screen) const;
  Vec2 to_screen(Vec2 table) const;

  bool contains(Vec2 screen) const;
  /// Cell that a screen point falls in; false when outside the table.
  bool cell_of(Vec2 screen, PlacementCell& out) const;
  /// Screen-space centre of a cell.
  Vec2 cell_center(TableHalf half, int zone) const;
  /// Screen-space polygon of a cell (4 corners).
  std::array<Vec2, 4> cell_polygon(TableHalf half, int zone) const;

  const std::array<Vec2, 4>& quad() const { return quad_; }

 private:
  // Table-space rectangle of a cell.
  static void cell_bounds(TableHalf half, int zone, double& u0, double& u1, double& v0, double& v1);

  std::array<Vec2, 4> quad_;
  std::array<double, 9> to_screen_{};  // row-major homography, unit square -> screen
  std::array<double, 9> to_table_{};
};

}  // namespace rallyviz
