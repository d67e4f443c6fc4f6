#include "synth.h"

#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

namespace rallyviz::synth {

namespace {

constexpr double kWristAx = 380.0;
constexpr double kWristBx = 1540.0;
constexpr double kWristY = 600.0;

const cv::Matx33d& unit_to_screen() {
  static const cv::Matx33d h = [] {
    const auto q = table_quad();
    std::vector<cv::Point2f> src = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<cv::Point2f> dst;
    for (const auto& p : q) dst.emplace_back(static_cast<float>(p.x), static_cast<float>(p.y));
    cv::Mat m = cv::getPerspectiveTransform(src, dst);
    return cv::Matx33d(m);
  }();
  return h;
}

Vec2 contact_point(PlayerId p, const ShotPlan& shot) {
  return {p == PlayerId::A ? kWristAx : kWristBx, kWristY + shot.wrist_dy};
}

// Cell rectangle in table space, written out from the grid definition:
// row 0 is the end line of its half, columns run along v.
void cell_rect(TableHalf half, int zone, double& u0, double& u1, double& v0, double& v1) {
  const int row = zone / 3;
  const int col = zone % 3;
  if (half == TableHalf::ASide) {
    u0 = row / 6.0;
    u1 = (row + 1) / 6.0;
  } else {
    u0 = (5 - row) / 6.0;
    u1 = (6 - row) / 6.0;
  }
  v0 = col / 3.0;
  v1 = (col + 1) / 3.0;
}

std::array<Keypoint, 17> pose_for(PlayerId p, const ShotPlan& shot, BBox& bbox) {
  const Vec2 w = contact_point(p, shot);
  const double side = p == PlayerId::A ? 1.0 : -1.0;  // wrist lies on this side of the torso
  const double torso_x = w.x - 70.0 * side;
  const double racket = shot.forehand ? side : -side;
  const double mid_y = shot.attack ? w.y + 50.0 : w.y - 50.0;
  const double sh_y = mid_y - 80.0;
  const double hip_y = mid_y + 80.0;

  std::array<Vec2, 17> pts{};
  pts[0] = {torso_x, sh_y - 60};                  // nose
  pts[1] = {torso_x - 8, sh_y - 68};
  pts[2] = {torso_x + 8, sh_y - 68};
  pts[3] = {torso_x - 16, sh_y - 62};
  pts[4] = {torso_x + 16, sh_y - 62};
  pts[5] = {torso_x - 30 * racket, sh_y};         // left shoulder
  pts[6] = {torso_x + 30 * racket, sh_y};         // right shoulder
  pts[7] = {torso_x - 45 * racket, sh_y + 60};
  pts[8] = lerp(pts[6], w, 0.5);                  // right elbow
  pts[9] = {torso_x - 40 * racket, sh_y + 110};
  pts[10] = w;                                    // right wrist
  pts[11] = {torso_x - 25 * racket, hip_y};
  pts[12] = {torso_x + 25 * racket, hip_y};
  pts[13] = {torso_x - 28 * racket, hip_y + 100};
  pts[14] = {torso_x + 28 * racket, hip_y + 100};
  pts[15] = {torso_x - 30 * racket, hip_y + 200};
  pts[16] = {torso_x + 30 * racket, hip_y + 200};

  double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
  std::array<Keypoint, 17> kps{};
  for (size_t i = 0; i < pts.size(); ++i) {
    kps[i] = {pts[i], 0.9, false};
    x0 = std::min(x0, pts[i].x);
    y0 = std::min(y0, pts[i].y);
    x1 = std::max(x1, pts[i].x);
    y1 = std::max(y1, pts[i].y);
  }
  bbox = {x0 - 10, y0 - 10, x1 - x0 + 20, y1 - y0 + 20};
  return kps;
}

// a + s(b - a) lifted by a symmetric arc; s in [0, 1].
Vec2 arc(Vec2 a, Vec2 b, double s, double height) {
  Vec2 p = lerp(a, b, s);
  p.y -= 4.0 * height * s * (1.0 - s);
  return p;
}

}  // namespace

std::array<Vec2, 4> table_quad() {
  return {Vec2{560, 560}, Vec2{1360, 560}, Vec2{1460, 760}, Vec2{460, 760}};
}

Vec2 project(double u, double v) {
  const cv::Vec3d r = unit_to_screen() * cv::Vec3d(u, v, 1.0);
  return {r[0] / r[2], r[1] / r[2]};
}

SynthRally synthesize(const RallyPlan& plan) {
  if (plan.shots.empty()) throw std::invalid_argument("plan needs at least one shot");
  if (plan.toss_frames < 3 || plan.tail_frames < 3)
    throw std::invalid_argument("toss and tail need at least 3 frames");
  for (const auto& s : plan.shots) {
    if (s.flight_frames < 12 || s.rise_frames < 10)
      throw std::invalid_argument("flight >= 12 and rise >= 10 frames");
    if (s.arc_px < 90 || s.arc_px > 180) throw std::invalid_argument("arc_px out of [90, 180]");
    if (s.target_zone < 0 || s.target_zone > 8) throw std::invalid_argument("zone out of range");
  }
  if (plan.shots.back().target_zone / 3 == 0)
    throw std::invalid_argument("last shot must not target the end-line row");

  SynthRally out;
  Truth& truth = out.truth;

  // Timeline and key positions.
  const size_t n_shots = plan.shots.size();
  std::vector<Vec2> contacts, bounces;
  PlayerId hitter = plan.server;
  int frame = plan.toss_frames;
  for (size_t i = 0; i < n_shots; ++i) {
    const auto& s = plan.shots[i];
    truth.hit_frames.push_back(frame);
    truth.hitters.push_back(hitter);
    truth.techniques.push_back(std::string(s.attack ? (s.forehand ? "forehand_attack" : "backhand_attack")
                                                    : (s.forehand ? "forehand_push" : "backhand_push")));
    contacts.push_back(contact_point(hitter, s));
    const TableHalf half = hitter == PlayerId::A ? TableHalf::BSide : TableHalf::ASide;
    double u0, u1, v0, v1;
    cell_rect(half, s.target_zone, u0, u1, v0, v1);
    const double u = (u0 + u1) / 2 + s.target_jitter_u * (u1 - u0);
    const double v = (v0 + v1) / 2 + s.target_jitter_v * (v1 - v0);
    const Vec2 q = project(u, v);
    bounces.push_back(q);
    frame += s.flight_frames;
    truth.bounce_frames.push_back(frame);
    truth.bounce_cells.push_back({half, s.target_zone, q});
    if (i + 1 < n_shots) frame += s.rise_frames;
    hitter = opponent(hitter);
  }
  const int n = truth.bounce_frames.back() + plan.tail_frames + 1;
  truth.frame_count = n;

  auto ball_at = [&](int f) -> Vec2 {
    const int h0 = truth.hit_frames[0];
    if (f <= h0) {
      const double s = static_cast<double>(f) / h0;
      const double dir = plan.server == PlayerId::A ? 1.0 : -1.0;
      const Vec2 w = contacts[0];
      return {w.x + dir * 30.0 * (1.0 - s), w.y - 4.0 * plan.toss_height_px * s * (1.0 - s)};
    }
    for (size_t i = 0; i < n_shots; ++i) {
      const int h = truth.hit_frames[i];
      const int b = truth.bounce_frames[i];
      const auto& s = plan.shots[i];
      if (f <= b) return arc(contacts[i], bounces[i], static_cast<double>(f - h) / (b - h), s.arc_px);
      if (i + 1 < n_shots && f <= truth.hit_frames[i + 1]) {
        const int h1 = truth.hit_frames[i + 1];
        return arc(bounces[i], contacts[i + 1], static_cast<double>(f - b) / (h1 - b), 0.8 * s.arc_px);
      }
    }
    // Missed return: the ball kicks up off the table and drops back toward the net.
    const Vec2 q = bounces.back();
    const double toward_net = truth.hitters.back() == PlayerId::A ? -1.0 : 1.0;
    const Vec2 end{q.x + 60.0 * toward_net, static_cast<double>(plan.height) - 40.0};
    const double s = static_cast<double>(f - truth.bounce_frames.back()) / plan.tail_frames;
    return arc(q, end, s, (end.y - q.y) / 4.0 + 80.0);
  };

  // Each player holds the pose of their next contact; it switches when the
  // opponent strikes.
  auto shot_for = [&](PlayerId p, int f) -> const ShotPlan& {
    const ShotPlan* pick = nullptr;
    for (size_t i = 0; i < n_shots; ++i) {
      if (truth.hitters[i] != p) continue;
      const int from = i == 0 ? 0 : truth.hit_frames[i - 1];
      if (pick == nullptr || f >= from) pick = &plan.shots[i];
    }
    return *pick;
  };

  TrackingDataset& ds = out.dataset;
  ds.video = {plan.width, plan.height, plan.fps, n};
  ds.player_names = plan.player_names;
  TableDetection table;
  table.quad = table_quad();
  table.net_x = project(0.5, 0.0).x;
  for (int f = 0; f < n; ++f) {
    FrameDetections fd;
    fd.frame_index = f;
    fd.timestamp = f / plan.fps;
    fd.table = table;
    BallDetection ball;
    ball.center = ball_at(f);
    ball.bbox = {ball.center.x - 8, ball.center.y - 8, 16, 16};
    if (plan.rotation && truth.hit_frames[static_cast<size_t>(plan.rotation->first)] == f)
      ball.rotation_rpm = plan.rotation->second;
    fd.ball = ball;
    for (PlayerId p : {PlayerId::A, PlayerId::B}) {
      PlayerDetection& pd = fd.players[p == PlayerId::A ? 0 : 1];
      pd.id = p;
      // A player who never strikes keeps a neutral stance.
      bool strikes = false;
      for (auto h : truth.hitters) strikes = strikes || h == p;
      ShotPlan neutral;
      pd.keypoints = pose_for(p, strikes ? shot_for(p, f) : neutral, pd.bbox);
    }
    ds.frames.push_back(std::move(fd));
  }
  return out;
}

RallyPlan random_plan(std::mt19937_64& rng) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  RallyPlan plan;
  plan.toss_frames = pick(8, 30);
  plan.toss_height_px = uni(40, 320);
  plan.tail_frames = pick(5, 30);
  plan.server = pick(0, 1) == 0 ? PlayerId::A : PlayerId::B;
  const int shots = pick(2, 8);
  for (int i = 0; i < shots; ++i) {
    ShotPlan s;
    s.flight_frames = pick(12, 32);
    s.rise_frames = pick(10, 28);
    s.target_zone = i + 1 == shots ? pick(3, 8) : pick(0, 8);
    s.target_jitter_u = uni(-0.3, 0.3);
    s.target_jitter_v = uni(-0.3, 0.3);
    s.arc_px = uni(90, 180);
    s.wrist_dy = uni(-40, 40);
    s.forehand = pick(0, 1) == 1;
    s.attack = pick(0, 1) == 1;
    plan.shots.push_back(s);
  }
  if (pick(0, 1) == 1) plan.rotation = std::make_pair(pick(0, shots - 1), uni(1000, 9000));
  return plan;
}

RallyPlan fixture_plan() {
  RallyPlan plan;
  plan.toss_frames = 20;
  plan.toss_height_px = 110;
  plan.tail_frames = 29;
  plan.player_names = {"Player Red", "Player Black"};
  const int zones[6] = {4, 0, 2, 1, 0, 5};
  const bool forehand[6] = {true, false, true, true, false, true};
  const bool attack[6] = {false, false, true, true, true, true};
  const double dy[6] = {10, -5, -20, 0, -30, -15};
  for (int i = 0; i < 6; ++i) {
    ShotPlan s;
    s.flight_frames = 25;
    s.rise_frames = 20;
    s.target_zone = zones[i];
    s.target_jitter_u = i % 2 == 0 ? 0.1 : -0.1;
    s.target_jitter_v = i % 3 == 0 ? -0.15 : 0.12;
    s.arc_px = 120 + 10 * i;
    s.wrist_dy = dy[i];
    s.forehand = forehand[i];
    s.attack = attack[i];
    plan.shots.push_back(s);
  }
  plan.rotation = std::make_pair(2, 7000.0);
  return plan;
}

}  // namespace rallyviz::synth
