#include "count_tables.h"

#include <algorithm>

#include "rallyviz/design_space.h"

namespace rallyviz::gen {

MappingStats random_stats(std::mt19937_64& rng) {
  const auto& reg = builtin_registry();
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  MappingStats s;
  const int entries = pick(0, 60);
  const int max_count = pick(1, 4) == 1 ? 3 : 40;  // small maxima force ties
  for (int i = 0; i < entries; ++i) {
    const auto& a = reg.attributes[static_cast<size_t>(pick(0, static_cast<int>(reg.attributes.size()) - 1))];
    const auto& v = reg.visuals[static_cast<size_t>(pick(0, static_cast<int>(reg.visuals.size()) - 1))];
    const auto o = kAllOrders[pick(0, 5)];
    s.counts[{a.name, v.name, o}] = pick(0, max_count);
  }
  return s;
}

std::vector<std::string> visuals_for(const MappingStats& stats, const std::string& d) {
  std::vector<std::string> out;
  for (const auto& [key, n] : stats.counts)
    if (std::get<0>(key) == d) out.push_back(std::get<1>(key));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<std::string> brute_argmax(const MappingStats& stats, const std::string& d, NarrativeOrder o) {
  std::vector<std::pair<std::int64_t, std::string>> scored;
  for (const auto& v : builtin_registry().visuals) {
    std::int64_t n = 0;
    for (const auto& [key, c] : stats.counts)
      if (std::get<0>(key) == d && std::get<1>(key) == v.name && std::get<2>(key) == o) n += c;
    scored.push_back({n, v.name});
  }
  std::int64_t best = 0;
  for (const auto& [n, name] : scored) best = std::max(best, n);
  if (best == 0) return std::nullopt;
  std::vector<std::string> winners;
  for (const auto& [n, name] : scored)
    if (n == best) winners.push_back(name);
  return *std::min_element(winners.begin(), winners.end());
}

MappingStats scaled(const MappingStats& stats, std::int64_t k) {
  MappingStats out = stats;
  for (auto& [key, n] : out.counts) n *= k;
  return out;
}

}  // namespace rallyviz::gen
