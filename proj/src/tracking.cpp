#include "rallyviz/tracking.h"

#include <algorithm>
#include <cmath>

#include "rallyviz/error.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;

std::string_view to_string(PlayerId id) { return id == PlayerId::A ? "A" : "B"; }

PlayerId parse_player(std::string_view s) {
  if (s == "A") return PlayerId::A;
  if (s == "B") return PlayerId::B;
  throw Error(ErrorCode::Validation, "unknown player id '" + std::string(s) + "'");
}

int keypoint_index(std::string_view name) {
  for (size_t i = 0; i < kKeypointNames.size(); ++i)
    if (kKeypointNames[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
json vec2_json(Vec2 v) { return json::array({v.x, v.y}); }

BBox bbox_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
          j.at(3).get<double>()};
}
json bbox_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

std::string where(int frame) { return "frame " + std::to_string(frame) + ": "; }

void check_bbox(const BBox& b, int frame, const char* what) {
  if (!(b.w > 0 && b.h > 0)) fail(where(frame) + what + " bbox must have positive width and height");
}

}  // namespace

void validate_dataset(const TrackingDataset& d) {
  if (d.frames.empty()) fail("empty dataset");
  if (!(d.video.fps > 0)) fail("fps must be positive");
  if (d.video.width <= 0 || d.video.height <= 0) fail("video dimensions must be positive");
  for (size_t i = 0; i < d.frames.size(); ++i) {
    if (d.frames[i].frame_index != static_cast<int>(i)) fail("non-contiguous frame_index");
  }
  if (d.video.frame_count != static_cast<int>(d.frames.size()))
    fail("frame_count " + std::to_string(d.video.frame_count) + " does not match " +
         std::to_string(d.frames.size()) + " frames");
  for (const auto& f : d.frames) {
    if (f.ball) check_bbox(f.ball->bbox, f.frame_index, "ball");
    for (size_t p = 0; p < 2; ++p) {
      const auto& pl = f.players[p];
      if (pl.id != (p == 0 ? PlayerId::A : PlayerId::B))
        fail(where(f.frame_index) + "players must be listed as A then B");
      check_bbox(pl.bbox, f.frame_index, "player");
      for (size_t k = 0; k < pl.keypoints.size(); ++k) {
        const auto& kp = pl.keypoints[k];
        if (!(kp.confidence >= 0.0 && kp.confidence <= 1.0))
          fail(where(f.frame_index) + "keypoint confidence outside [0,1]");
        const bool inside = kp.pos.x >= 0 && kp.pos.y >= 0 && kp.pos.x <= d.video.width &&
                            kp.pos.y <= d.video.height;
        if (!inside && !kp.occluded)
          fail(where(f.frame_index) + "keypoint " + std::string(kKeypointNames[k]) +
               " outside frame and not flagged occluded");
      }
    }
    if (!is_convex(f.table.quad)) fail(where(f.frame_index) + "table quad is not convex");
  }
}

TrackingDataset dataset_from_json(const json& doc) {
  require_schema(doc, kTrackingSchemaVersion, "tracking");
  TrackingDataset d;
  try {
    const auto& v = doc.at("video");
    d.video.width = v.at("width").get<int>();
    d.video.height = v.at("height").get<int>();
    d.video.fps = v.at("fps").get<double>();
    d.video.frame_count = v.at("frame_count").get<int>();
    if (doc.contains("player_names")) {
      d.player_names[0] = doc["player_names"].value("A", "");
      d.player_names[1] = doc["player_names"].value("B", "");
    }
    for (const auto& jf : doc.at("frames")) {
      FrameDetections f;
      f.frame_index = jf.at("frame_index").get<int>();
      f.timestamp = jf.value("timestamp", 0.0);
      if (jf.contains("ball") && !jf["ball"].is_null()) {
        const auto& jb = jf["ball"];
        BallDetection b;
        b.center = vec2_from(jb.at("center"));
        b.bbox = bbox_from(jb.at("bbox"));
        if (jb.contains("rotation_rpm")) b.rotation_rpm = jb["rotation_rpm"].get<double>();
        f.ball = b;
      }
      const auto& jp = jf.at("players");
      if (jp.size() != 2) fail(where(f.frame_index) + "exactly 2 players required");
      for (size_t p = 0; p < 2; ++p) {
        auto& pl = f.players[p];
        pl.id = parse_player(jp[p].at("id").get<std::string>());
        pl.bbox = bbox_from(jp[p].at("bbox"));
        const auto& kps = jp[p].at("keypoints");
        if (kps.size() != kKeypointNames.size())
          fail(where(f.frame_index) + "posture must have 17 keypoints");
        for (size_t k = 0; k < kps.size(); ++k) {
          const auto& jk = kps[k];
          pl.keypoints[k].pos = {jk.at(0).get<double>(), jk.at(1).get<double>()};
          pl.keypoints[k].confidence = jk.at(2).get<double>();
          pl.keypoints[k].occluded = jk.size() > 3 && jk[3].get<bool>();
        }
      }
      const auto& jt = jf.at("table");
      const auto& q = jt.at("quad");
      if (q.size() != 4) fail(where(f.frame_index) + "table quad needs 4 corners");
      for (size_t i = 0; i < 4; ++i) f.table.quad[i] = vec2_from(q[i]);
      f.table.net_x = jt.at("net_x").get<double>();
      d.frames.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed tracking file: ") + e.what());
  }
  validate_dataset(d);
  return d;
}

json to_json(const TrackingDataset& d) {
  json frames = json::array();
  for (const auto& f : d.frames) {
    json jf = {{"frame_index", f.frame_index}, {"timestamp", f.timestamp}};
    if (f.ball) {
      json jb = {{"center", vec2_json(f.ball->center)}, {"bbox", bbox_json(f.ball->bbox)}};
      if (f.ball->rotation_rpm) jb["rotation_rpm"] = *f.ball->rotation_rpm;
      jf["ball"] = jb;
    } else {
      jf["ball"] = nullptr;
    }
    json players = json::array();
    for (const auto& pl : f.players) {
      json kps = json::array();
      for (const auto& kp : pl.keypoints) {
        json jk = json::array({kp.pos.x, kp.pos.y, kp.confidence});
        if (kp.occluded) jk.push_back(true);
        kps.push_back(jk);
      }
      players.push_back({{"id", to_string(pl.id)}, {"bbox", bbox_json(pl.bbox)}, {"keypoints", kps}});
    }
    jf["players"] = players;
    json quad = json::array();
    for (const auto& c : f.table.quad) quad.push_back(vec2_json(c));
    jf["table"] = {{"quad", quad}, {"net_x", f.table.net_x}};
    frames.push_back(std::move(jf));
  }
  json doc = {{"schema_version", kTrackingSchemaVersion},
              {"video",
               {{"width", d.video.width},
                {"height", d.video.height},
                {"fps", d.video.fps},
                {"frame_count", d.video.frame_count}}},
              {"frames", frames}};
  if (!d.player_names[0].empty() || !d.player_names[1].empty())
    doc["player_names"] = {{"A", d.player_names[0]}, {"B", d.player_names[1]}};
  return doc;
}

TrackingDataset load_dataset(const std::string& path) { return dataset_from_json(read_json(path)); }

void save_dataset(const TrackingDataset& dataset, const std::string& path) {
  write_file(path, dump_canonical(to_json(dataset)));
}

BallTrack observed_ball(const TrackingDataset& dataset) {
  BallTrack t;
  const size_t n = dataset.frames.size();
  t.centers.resize(n);
  t.occluded.assign(n, false);
  t.velocity.resize(n);
  t.speed.resize(n);
  for (size_t i = 0; i < n; ++i)
    if (dataset.frames[i].ball) t.centers[i] = dataset.frames[i].ball->center;
  return t;
}

BallTrack interpolate_ball(const BallTrack& track) {
  std::vector<size_t> known;
  for (size_t i = 0; i < track.centers.size(); ++i)
    if (track.centers[i]) known.push_back(i);
  if (known.size() < 2) fail("ball track undefined");

  BallTrack out = track;
  out.occluded.resize(track.centers.size(), false);
  for (size_t k = 0; k + 1 < known.size(); ++k) {
    const size_t a = known[k];
    const size_t b = known[k + 1];
    const Vec2 pa = *track.centers[a];
    const Vec2 pb = *track.centers[b];
    for (size_t i = a + 1; i < b; ++i) {
      const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
      out.centers[i] = lerp(pa, pb, t);
      out.occluded[i] = true;
    }
  }
  return out;
}

BallTrack interpolate_ball(const TrackingDataset& dataset) {
  return interpolate_ball(observed_ball(dataset));
}

std::vector<std::optional<Vec2>> derive_velocity(const BallTrack& track, double fps) {
  if (!(fps > 0)) fail("fps must be positive");
  const size_t n = track.centers.size();
  const auto defined_count =
      std::count_if(track.centers.begin(), track.centers.end(), [](const auto& c) { return c.has_value(); });
  if (defined_count < 2) fail("velocity undefined for a single-frame track");

  std::vector<std::optional<Vec2>> v(n);
  for (size_t i = 0; i < n; ++i) {
    if (!track.centers[i]) continue;
    const bool prev = i > 0 && track.centers[i - 1].has_value();
    const bool next = i + 1 < n && track.centers[i + 1].has_value();
    if (prev && next) {
      v[i] = (*track.centers[i + 1] - *track.centers[i - 1]) * (fps / 2.0);
    } else if (next) {
      v[i] = (*track.centers[i + 1] - *track.centers[i]) * fps;
    } else if (prev) {
      v[i] = (*track.centers[i] - *track.centers[i - 1]) * fps;
    }
  }
  return v;
}

BallTrack build_ball_track(const TrackingDataset& dataset) {
  BallTrack t = interpolate_ball(dataset);
  t.velocity = derive_velocity(t, dataset.video.fps);
  t.speed.assign(t.size(), std::nullopt);
  for (size_t i = 0; i < t.size(); ++i)
    if (t.velocity[i]) t.speed[i] = norm(*t.velocity[i]);
  return t;
}

KeypointQuery player_keypoint(const TrackingDataset& dataset, PlayerId player,
                              std::string_view keypoint, int frame, double threshold) {
  if (frame < 0 || frame >= static_cast<int>(dataset.frames.size()))
    fail("frame " + std::to_string(frame) + " out of range");
  const auto& pl = dataset.frames[static_cast<size_t>(frame)].player(player);
  auto usable = [&](const Keypoint& k) { return !k.occluded && k.confidence >= threshold; };

  if (keypoint == "neck") {
    const auto& l = pl.keypoints[static_cast<size_t>(keypoint_index("left_shoulder"))];
    const auto& r = pl.keypoints[static_cast<size_t>(keypoint_index("right_shoulder"))];
    const double conf = std::min(l.confidence, r.confidence);
    if (!usable(l) || !usable(r)) return {std::nullopt, conf};
    return {lerp(l.pos, r.pos, 0.5), conf};
  }
  const int idx = keypoint_index(keypoint);
  if (idx < 0) fail("unknown keypoint '" + std::string(keypoint) + "'");
  const auto& k = pl.keypoints[static_cast<size_t>(idx)];
  if (!usable(k)) return {std::nullopt, k.confidence};
  return {k.pos, k.confidence};
}

}  // namespace rallyviz
