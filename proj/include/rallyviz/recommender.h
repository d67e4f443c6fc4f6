#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "rallyviz/design_space.h"

namespace rallyviz {

/// Occurrence counts over an annotated corpus.
struct MappingStats {
  using Key = std::tuple<std::string, std::string, NarrativeOrder>;  // (data, visual, order)

  std::map<Key, std::int64_t> counts;
  std::map<NarrativeOrder, std::int64_t> order_totals;  // clips per order
  std::map<std::pair<DataLevel, NarrativeOrder>, std::int64_t> level_order_counts;
  std::int64_t clip_count = 0;

  std::int64_t count(const std::string& d, const std::string& v, NarrativeOrder o) const;
  /// Sum of counts over every (data, visual) pair under the order.
  std::int64_t mapping_total(NarrativeOrder o) const;
  /// Fraction of clips using the order, 0 for an empty corpus.
  double order_ratio(NarrativeOrder o) const;
  bool operator==(const MappingStats&) const = default;
};

MappingStats compile_stats(const std::vector<ClipAnnotation>& annotations);

/// p((d, v) | O) = counts[d, v, O] / sum over (d', v') of counts[d', v', O];
/// 0 when the order has no mappings.
double conditional_probability(const MappingStats& stats, const std::string& d, const std::string& v,
                               NarrativeOrder o);

enum class RecommendationSource { Corpus, Fallback };

struct Recommendation {
  std::string attribute;
  std::string visual;
  std::optional<double> probability;  // present iff source == Corpus
  RecommendationSource source = RecommendationSource::Corpus;
  bool operator==(const Recommendation&) const = default;
};

using FallbackTable = std::map<std::string, std::string>;

/// Effectiveness-ranked default visual per attribute, used when the corpus
/// has no record for (data, order).
const FallbackTable& default_fallback_table();
FallbackTable fallback_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const FallbackTable& table);

/// Visual maximizing counts[d, ., O], ties to the lexicographically smallest
/// visual name. Falls back to the table when every count is zero; throws
/// Error(NotFound) if neither source knows the attribute.
Recommendation recommend(const MappingStats& stats, const std::string& d, NarrativeOrder o,
                         const FallbackTable& fallback = default_fallback_table());

/// Most frequent order for clips at the level; Linear on ties and empty stats.
NarrativeOrder default_order_for_level(const MappingStats& stats, DataLevel level);

nlohmann::json to_json(const Recommendation& r);
nlohmann::json to_json(const MappingStats& stats);

}  // namespace rallyviz
