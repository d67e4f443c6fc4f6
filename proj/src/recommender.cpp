#include "rallyviz/recommender.h"

#include "rallyviz/error.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;

std::int64_t MappingStats::count(const std::string& d, const std::string& v, NarrativeOrder o) const {
  auto it = counts.find({d, v, o});
  return it == counts.end() ? 0 : it->second;
}

std::int64_t MappingStats::mapping_total(NarrativeOrder o) const {
  std::int64_t total = 0;
  for (const auto& [key, n] : counts)
    if (std::get<2>(key) == o) total += n;
  return total;
}

double MappingStats::order_ratio(NarrativeOrder o) const {
  if (clip_count == 0) return 0.0;
  auto it = order_totals.find(o);
  return it == order_totals.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(clip_count);
}

MappingStats compile_stats(const std::vector<ClipAnnotation>& annotations) {
  MappingStats s;
  for (const auto& clip : annotations) {
    ++s.clip_count;
    ++s.order_totals[clip.narrative_order];
    ++s.level_order_counts[{clip.data_level, clip.narrative_order}];
    for (const auto& m : clip.mappings) ++s.counts[{m.attribute, m.visual, clip.narrative_order}];
  }
  return s;
}

double conditional_probability(const MappingStats& stats, const std::string& d, const std::string& v,
                               NarrativeOrder o) {
  const std::int64_t total = stats.mapping_total(o);
  if (total == 0) return 0.0;
  return static_cast<double>(stats.count(d, v, o)) / static_cast<double>(total);
}

const FallbackTable& default_fallback_table() {
  static const FallbackTable table = {
      {"ball_position", "Dot"},
      {"ball_trajectory", "Polyline"},
      {"ball_velocity", "Label"},
      {"ball_placement", "Region"},
      {"ball_rotation_speed", "Label"},
      {"player_position", "BoundingBox"},
      {"player_trajectory", "Polyline"},
      {"player_posture", "Skeleton"},
      {"player_highlight", "Spotlight"},
      {"player_name", "Label"},
      {"stroke_technique", "Label"},
      {"potential_placements", "HeatmapRegion"},
      {"potential_routes", "Polyline"},
      {"stroke_effect", "Spotlight"},
      {"player_tactic", "Label"},
      {"key_stroke", "Spotlight"},
  };
  return table;
}

FallbackTable fallback_from_json(const json& doc) {
  require_schema(doc, 1, "fallback table");
  FallbackTable t;
  const json mappings = doc.value("mappings", json::object());
  for (const auto& [k, v] : mappings.items()) t[k] = v.get<std::string>();
  return t;
}

json to_json(const FallbackTable& table) {
  json m = json::object();
  for (const auto& [k, v] : table) m[k] = v;
  return {{"schema_version", 1}, {"mappings", m}};
}

Recommendation recommend(const MappingStats& stats, const std::string& d, NarrativeOrder o,
                         const FallbackTable& fallback) {
  // counts is ordered by (data, visual, order), so visuals for d are visited
  // in ascending name order and a strict > keeps the smallest name on ties.
  std::int64_t best = 0;
  std::string best_visual;
  for (auto it = stats.counts.lower_bound({d, "", NarrativeOrder::Linear});
       it != stats.counts.end() && std::get<0>(it->first) == d; ++it) {
    if (std::get<2>(it->first) != o) continue;
    if (it->second > best) {
      best = it->second;
      best_visual = std::get<1>(it->first);
    }
  }
  if (best > 0) {
    return {d, best_visual, static_cast<double>(best) / static_cast<double>(stats.mapping_total(o)),
            RecommendationSource::Corpus};
  }
  auto it = fallback.find(d);
  if (it == fallback.end()) throw Error(ErrorCode::NotFound, "no visual available for '" + d + "'");
  return {d, it->second, std::nullopt, RecommendationSource::Fallback};
}

NarrativeOrder default_order_for_level(const MappingStats& stats, DataLevel level) {
  NarrativeOrder best = NarrativeOrder::Linear;
  std::int64_t best_count = 0;
  auto linear = stats.level_order_counts.find({level, NarrativeOrder::Linear});
  if (linear != stats.level_order_counts.end()) best_count = linear->second;
  for (NarrativeOrder o : kAllOrders) {
    auto it = stats.level_order_counts.find({level, o});
    if (it != stats.level_order_counts.end() && it->second > best_count) {
      best = o;
      best_count = it->second;
    }
  }
  return best;
}

json to_json(const Recommendation& r) {
  json j = {{"attribute", r.attribute},
            {"visual", r.visual},
            {"source", r.source == RecommendationSource::Corpus ? "Corpus" : "Fallback"}};
  j["probability"] = r.probability ? json(*r.probability) : json(nullptr);
  return j;
}

json to_json(const MappingStats& stats) {
  json orders = json::array();
  for (NarrativeOrder o : kAllOrders) {
    auto it = stats.order_totals.find(o);
    const std::int64_t n = it == stats.order_totals.end() ? 0 : it->second;
    orders.push_back({{"order", to_string(o)}, {"clips", n}, {"ratio", stats.order_ratio(o)}});
  }
  json levels = json::array();
  for (const auto& [key, n] : stats.level_order_counts)
    levels.push_back({{"level", to_string(key.first)}, {"order", to_string(key.second)}, {"clips", n}});
  json counts = json::array();
  for (const auto& [key, n] : stats.counts) {
    counts.push_back({{"data", std::get<0>(key)},
                      {"visual", std::get<1>(key)},
                      {"order", to_string(std::get<2>(key))},
                      {"count", n}});
  }
  return {{"clip_count", stats.clip_count}, {"orders", orders}, {"level_orders", levels}, {"counts", counts}};
}

}  // namespace rallyviz
