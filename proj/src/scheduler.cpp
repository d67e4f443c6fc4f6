#include "rallyviz/scheduler.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "rallyviz/error.h"
#include "rallyviz/hash.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;

bool ScheduleDag::has_edge(size_t from, size_t to) const {
  const auto& e = nodes[from].edges;
  return std::find(e.begin(), e.end(), to) != e.end();
}

std::vector<size_t> ScheduleDag::topological_order() const {
  std::vector<int> indegree(nodes.size(), 0);
  for (const auto& n : nodes)
    for (size_t to : n.edges) ++indegree[to];
  auto later = [&](size_t a, size_t b) {
    if (nodes[a].source_frame != nodes[b].source_frame) return nodes[a].source_frame > nodes[b].source_frame;
    return nodes[a].mapping_index > nodes[b].mapping_index;
  };
  std::priority_queue<size_t, std::vector<size_t>, decltype(later)> ready(later);
  for (size_t i = 0; i < nodes.size(); ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<size_t> order;
  while (!ready.empty()) {
    const size_t n = ready.top();
    ready.pop();
    order.push_back(n);
    for (size_t to : nodes[n].edges)
      if (--indegree[to] == 0) ready.push(to);
  }
  if (order.size() != nodes.size()) throw Error(ErrorCode::Internal, "schedule graph has a cycle");
  return order;
}

namespace {

void add_edge(ScheduleDag& dag, size_t from, size_t to, bool is_virtual) {
  auto& n = dag.nodes[from];
  for (size_t i = 0; i < n.edges.size(); ++i) {
    if (n.edges[i] == to) {
      n.virtual_edge[i] = n.virtual_edge[i] || is_virtual;
      return;
    }
  }
  n.edges.push_back(to);
  n.virtual_edge.push_back(is_virtual);
}

void chain(ScheduleDag& dag, const std::vector<size_t>& seq) {
  for (size_t i = 1; i < seq.size(); ++i) add_edge(dag, seq[i - 1], seq[i], false);
}

// Node indices sorted by (source_frame, list index).
std::vector<size_t> chronological(const ScheduleDag& dag, const std::vector<size_t>& subset) {
  std::vector<size_t> out = subset;
  std::stable_sort(out.begin(), out.end(),
                   [&](size_t a, size_t b) { return dag.nodes[a].source_frame < dag.nodes[b].source_frame; });
  return out;
}

std::vector<size_t> all_indices(size_t n) {
  std::vector<size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::optional<int> flash_anchor(const AugmentationScript& s) {
  if (s.mappings.empty()) return std::nullopt;
  if (s.anchor_frame) return s.anchor_frame;
  int frame = s.mappings.front().source_frame();
  for (const auto& m : s.mappings) {
    frame = s.order == NarrativeOrder::FlashBack ? std::max(frame, m.source_frame())
                                                 : std::min(frame, m.source_frame());
  }
  return frame;
}

}  // namespace

ScheduleDag build_dag(const AugmentationScript& script) {
  ScheduleDag dag;
  for (size_t i = 0; i < script.mappings.size(); ++i) {
    ScheduleNode n;
    n.node_id = script.mappings[i].mapping_id;
    n.mapping_index = i;
    n.source_frame = script.mappings[i].source_frame();
    dag.nodes.push_back(std::move(n));
  }
  const bool ff = script.order == NarrativeOrder::FlashForward;
  const bool fb = script.order == NarrativeOrder::FlashBack;
  if (!(ff || fb) || dag.nodes.empty()) {
    chain(dag, chronological(dag, all_indices(dag.nodes.size())));
    return dag;
  }

  const int a = *flash_anchor(script);
  std::vector<size_t> past, at, future;
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    const int f = dag.nodes[i].source_frame;
    (f < a ? past : f == a ? at : future).push_back(i);
  }
  if (at.empty()) fail("anchor frame " + std::to_string(a) + " has no mapping");
  dag.anchor = at.front();
  past = chronological(dag, past);
  future = chronological(dag, future);

  if (ff) {
    chain(dag, chronological(dag, all_indices(dag.nodes.size())));
    for (size_t v : future) {
      add_edge(dag, at.front(), v, true);
      dag.nodes[v].presented_flag = true;
    }
    for (size_t v : at)
      if (v != at.front()) dag.nodes[v].presented_flag = true;
  } else {
    chain(dag, at);
    chain(dag, past);
    chain(dag, future);
    for (size_t v : past) {
      add_edge(dag, at.front(), v, true);
      dag.nodes[v].presented_flag = true;
    }
    for (size_t v : at)
      if (v != at.front()) dag.nodes[v].presented_flag = true;
    if (!future.empty()) {
      add_edge(dag, at.back(), future.front(), false);
      if (!past.empty()) add_edge(dag, past.back(), future.front(), false);
    }
  }
  dag.topological_order();  // defensive cycle check
  return dag;
}

std::string_view to_string(FrameKind k) {
  switch (k) {
    case FrameKind::Play: return "Play";
    case FrameKind::Hold: return "Hold";
    case FrameKind::Reverse: return "Reverse";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Creation: return "Creation";
    case Phase::Sustain: return "Sustain";
    case Phase::Destruction: return "Destruction";
  }
  return "?";
}

FrameKind parse_frame_kind(std::string_view s) {
  if (s == "Play") return FrameKind::Play;
  if (s == "Hold") return FrameKind::Hold;
  if (s == "Reverse") return FrameKind::Reverse;
  fail("unknown frame kind '" + std::string(s) + "'");
}

Phase parse_phase(std::string_view s) {
  if (s == "Creation") return Phase::Creation;
  if (s == "Sustain") return Phase::Sustain;
  if (s == "Destruction") return Phase::Destruction;
  fail("unknown phase '" + std::string(s) + "'");
}

int default_hold_frames(const VideoMeta& video) {
  return static_cast<int>(std::lround(2.0 * video.fps));
}

namespace {

class Compiler {
 public:
  Compiler(const AugmentationScript& s, const VideoMeta& video, const ScheduleOptions& o)
      : s_(s), ramp_(o.ramp_frames), default_hold_(o.default_hold_frames.value_or(default_hold_frames(video))),
        runs_(s.mappings.size()) {}

  RenderSchedule run(const VideoMeta& video) {
    const ScheduleDag dag = build_dag(s_);
    const std::vector<size_t> topo = dag.topological_order();
    switch (s_.order) {
      case NarrativeOrder::Linear: linear(); break;
      case NarrativeOrder::FlashForward:
      case NarrativeOrder::FlashBack: flash(dag, topo); break;
      case NarrativeOrder::TimeFork: timefork(topo); break;
      case NarrativeOrder::ZigZag: zigzag(); break;
      case NarrativeOrder::Grouped: throw Error(ErrorCode::UnsupportedOrder, "unsupported order: Grouped");
    }
    assign_phases();
    RenderSchedule out;
    out.script_id = s_.script_id;
    out.order = s_.order;
    out.fps = video.fps;
    out.clip = s_.clip;
    for (size_t i : topo) out.reveal_order.push_back(dag.nodes[i].node_id);
    out.frames = std::move(frames_);
    return out;
  }

 private:
  using Run = std::vector<std::pair<int, int>>;  // (output index, data frame)

  int hold_of(size_t m) const { return s_.mappings[m].hold_frames.value_or(default_hold_); }
  // A mapping revealed inside a hold occupies at least one frame so reveal
  // order stays strict.
  int slot_of(size_t m) const { return std::max(1, hold_of(m)); }
  const FrameSpan& span_of(size_t m) const { return s_.mappings[m].selection.source_span; }
  int data_frame(size_t m, int src) const { return std::clamp(src, span_of(m).start, span_of(m).end); }
  int size() const { return static_cast<int>(frames_.size()); }

  void play(int from, int to) {
    for (int f = from; f <= to; ++f) frames_.push_back({FrameKind::Play, f, 1, {}});
  }
  void hold(int f, int n) {
    for (int i = 0; i < n; ++i) frames_.push_back({FrameKind::Hold, f, 1, {}});
  }
  void reverse(int from, int to) {
    for (int f = from; f >= to; --f) frames_.push_back({FrameKind::Reverse, f, 1, {}});
  }

  // Visible on every non-reverse output frame in [lo, hi] whose source frame
  // lies in the mapping's span.
  void show_over_span(size_t m, int lo, int hi) {
    for (int i = lo; i <= hi; ++i) {
      const auto& fr = frames_[i];
      if (fr.kind != FrameKind::Reverse && span_of(m).contains(fr.source_frame))
        runs_[m].emplace_back(i, data_frame(m, fr.source_frame));
    }
  }

  void show_play_until(size_t m, int first_play_index, int from_src, int to_src) {
    for (int f = from_src; f <= to_src; ++f)
      runs_[m].emplace_back(first_play_index + (f - from_src), data_frame(m, f));
  }

  void linear() {
    std::map<int, int> pause;  // anchor frame -> hold length
    std::map<int, int> count;
    for (const auto& m : s_.mappings) ++count[m.source_frame()];
    for (size_t m = 0; m < s_.mappings.size(); ++m) {
      const int f = s_.mappings[m].source_frame();
      if (count[f] >= 2) pause[f] = std::max(pause[f], hold_of(m));
    }
    for (int f = s_.clip.start; f <= s_.clip.end; ++f) {
      play(f, f);
      if (auto it = pause.find(f); it != pause.end()) hold(f, it->second);
    }
    for (size_t m = 0; m < s_.mappings.size(); ++m) show_over_span(m, 0, size() - 1);
  }

  void flash(const ScheduleDag& dag, const std::vector<size_t>& topo) {
    const FrameSpan clip = s_.clip;
    if (!dag.anchor) {
      play(clip.start, clip.end);
      return;
    }
    const int a = dag.nodes[*dag.anchor].source_frame;
    const bool forward = s_.order == NarrativeOrder::FlashForward;
    auto revealed = [&](size_t m) {
      const int f = s_.mappings[m].source_frame();
      return forward ? f >= a : f <= a;
    };
    std::vector<size_t> reveal;
    for (size_t n : topo)
      if (revealed(dag.nodes[n].mapping_index)) reveal.push_back(dag.nodes[n].mapping_index);
    int total_hold = 0;
    for (size_t m : reveal) total_hold += slot_of(m);

    play(clip.start, a);
    const int hold_start = size();
    hold(a, total_hold);
    const int resume = size();
    play(a + 1, clip.end);

    int offset = 0;
    for (size_t m : reveal) {
      for (int i = hold_start + offset; i < resume; ++i) runs_[m].emplace_back(i, data_frame(m, a));
      offset += slot_of(m);
      // Items revealed from the future, and the anchor's own items, persist
      // through the resumed play until their span ends.
      if (s_.mappings[m].source_frame() >= a)
        show_play_until(m, resume, a + 1, std::min(clip.end, span_of(m).end));
    }
    for (size_t m = 0; m < s_.mappings.size(); ++m)
      if (!revealed(m)) show_over_span(m, 0, size() - 1);
  }

  void timefork(const std::vector<size_t>& topo) {
    const auto& spec = *s_.timefork;
    const FrameSpan clip = s_.clip;
    std::map<std::string, size_t> index;
    for (size_t m = 0; m < s_.mappings.size(); ++m) index[s_.mappings[m].mapping_id] = m;
    std::set<size_t> hypo, actual;
    for (const auto& id : spec.hypothetical) hypo.insert(index.at(id));
    for (const auto& id : spec.actual) actual.insert(index.at(id));

    int a = clip.start;
    if (spec.anchor) {
      a = *spec.anchor;
    } else if (!hypo.empty()) {
      a = clip.end;
      for (size_t m : hypo) a = std::min(a, s_.mappings[m].source_frame());
    }
    if (!clip.contains(a)) fail("timefork anchor outside clip");
    if (!actual.empty() && a >= clip.end) fail("timefork anchor leaves no frames for the actual data");

    std::vector<size_t> reveal;
    for (size_t n : topo)
      if (hypo.count(n)) reveal.push_back(n);  // node index == mapping index
    int total_hold = 0;
    for (size_t m : reveal) total_hold += slot_of(m);

    play(clip.start, a);
    const int hold_start = size();
    hold(a, total_hold);
    const int resume = size();
    play(a + 1, clip.end);

    int offset = 0;
    for (size_t m : reveal) {
      for (int i = hold_start + offset; i < hold_start + offset + slot_of(m); ++i)
        runs_[m].emplace_back(i, data_frame(m, a));
      offset += slot_of(m);
    }
    for (size_t m : actual) {
      const int from = std::max(a + 1, s_.mappings[m].source_frame());
      show_play_until(m, resume + (from - a - 1), from, clip.end);
    }
    for (size_t m = 0; m < s_.mappings.size(); ++m)
      if (!hypo.count(m) && !actual.count(m)) show_over_span(m, 0, size() - 1);
  }

  void zigzag() {
    const auto& z = *s_.zigzag;
    const FrameSpan clip = s_.clip;
    if (z.rewind_frames < 1) fail("zigzag rewind_frames must be >= 1");
    const int back_to = z.anchor - z.rewind_frames + 1;
    if (back_to < clip.start) fail("zigzag rewind exceeds clip start");
    play(clip.start, z.anchor);
    const int first_end = size() - 1;
    reverse(z.anchor, back_to);
    const int replay = size();
    play(back_to, clip.end);
    for (size_t m = 0; m < s_.mappings.size(); ++m) {
      if (s_.mappings[m].pass == 2) show_over_span(m, replay, size() - 1);
      else show_over_span(m, 0, first_end);
    }
  }

  void assign_phases() {
    const int last = size() - 1;
    for (size_t m = 0; m < runs_.size(); ++m) {
      const Run& run = runs_[m];
      const int n = static_cast<int>(run.size());
      if (n == 0) continue;
      int c = 1, d = n == 2 ? 1 : 0;
      if (n >= 3) {
        c = std::max(1, std::min(ramp_, n / 3));
        // Data still on screen when the output ends fades on the final frame only.
        d = run.back().first == last ? 1 : std::max(1, std::min(ramp_, n / 3));
      }
      for (int k = 0; k < n; ++k) {
        ActiveItem item;
        item.mapping_id = s_.mappings[m].mapping_id;
        item.data_frame = run[k].second;
        if (k < c) {
          item.phase = Phase::Creation;
          item.phase_step = k;
          item.phase_length = c;
        } else if (k >= n - d) {
          item.phase = Phase::Destruction;
          item.phase_step = k - (n - d);
          item.phase_length = d;
        } else {
          item.phase = Phase::Sustain;
          item.phase_step = k - c;
          item.phase_length = n - c - d;
        }
        frames_[run[k].first].items.push_back(std::move(item));
      }
    }
  }

  const AugmentationScript& s_;
  int ramp_;
  int default_hold_;
  std::vector<OutputFrame> frames_;
  std::vector<Run> runs_;
};

}  // namespace

RenderSchedule compile_schedule(const AugmentationScript& script, const VideoMeta& video,
                                const ScheduleOptions& options) {
  if (script.order == NarrativeOrder::Grouped)
    throw Error(ErrorCode::UnsupportedOrder, "unsupported order: Grouped");
  validate_script(script);
  if (script.clip.start < 0 || script.clip.end >= video.frame_count) fail("clip outside the video");
  if (options.ramp_frames < 1) fail("ramp_frames must be >= 1");
  if (options.default_hold_frames && *options.default_hold_frames < 0) fail("default hold must be >= 0");
  return Compiler(script, video, options).run(video);
}

RenderSchedule apply_slow_motion(const RenderSchedule& schedule, FrameSpan span, double rate) {
  if (!(rate > 0.0 && rate < 1.0)) fail("slow-motion rate must be in (0, 1)");
  if (span.empty()) return schedule;
  if (span.start < 0 || span.end >= schedule.total_frames()) fail("slow-motion span outside the schedule");
  const int factor = static_cast<int>(std::lround(1.0 / rate));
  RenderSchedule out = schedule;
  out.frames.clear();
  for (int i = 0; i < schedule.total_frames(); ++i) {
    const OutputFrame& fr = schedule.frames[i];
    if (fr.kind == FrameKind::Play && span.contains(i)) {
      OutputFrame copy = fr;
      copy.slow_factor = fr.slow_factor * factor;
      for (int k = 0; k < factor; ++k) out.frames.push_back(copy);
    } else {
      out.frames.push_back(fr);
    }
  }
  return out;
}

json to_json(const RenderSchedule& s) {
  json frames = json::array();
  for (size_t i = 0; i < s.frames.size(); ++i) {
    const auto& fr = s.frames[i];
    json items = json::array();
    for (const auto& it : fr.items) {
      items.push_back({{"mapping_id", it.mapping_id},
                       {"phase", to_string(it.phase)},
                       {"data_frame", it.data_frame},
                       {"phase_step", it.phase_step},
                       {"phase_length", it.phase_length}});
    }
    frames.push_back({{"index", i},
                      {"kind", to_string(fr.kind)},
                      {"source_frame", fr.source_frame},
                      {"slow_factor", fr.slow_factor},
                      {"items", items}});
  }
  return {{"schema_version", kScheduleSchemaVersion},
          {"script_id", s.script_id},
          {"order", to_string(s.order)},
          {"fps", s.fps},
          {"clip", {s.clip.start, s.clip.end}},
          {"total_frames", s.total_frames()},
          {"reveal_order", s.reveal_order},
          {"frames", frames}};
}

RenderSchedule schedule_from_json(const json& doc) {
  require_schema(doc, kScheduleSchemaVersion, "schedule");
  RenderSchedule s;
  try {
    s.script_id = doc.at("script_id").get<std::string>();
    s.order = parse_order(doc.at("order").get<std::string>());
    s.fps = doc.at("fps").get<double>();
    s.clip = {doc.at("clip").at(0).get<int>(), doc.at("clip").at(1).get<int>()};
    s.reveal_order = doc.value("reveal_order", std::vector<std::string>{});
    for (const auto& jf : doc.at("frames")) {
      OutputFrame fr;
      fr.kind = parse_frame_kind(jf.at("kind").get<std::string>());
      fr.source_frame = jf.at("source_frame").get<int>();
      fr.slow_factor = jf.value("slow_factor", 1);
      for (const auto& ji : jf.at("items")) {
        fr.items.push_back({ji.at("mapping_id").get<std::string>(), parse_phase(ji.at("phase").get<std::string>()),
                            ji.at("data_frame").get<int>(), ji.value("phase_step", 0),
                            ji.value("phase_length", 1)});
      }
      s.frames.push_back(std::move(fr));
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed schedule: ") + e.what());
  }
  if (doc.contains("total_frames") && doc["total_frames"].get<int>() != s.total_frames())
    fail("schedule total_frames does not match its frame list");
  return s;
}

std::string schedule_digest(const RenderSchedule& schedule) { return digest_of(to_json(schedule).dump()); }

std::vector<std::string> check_virtual_links(const AugmentationScript& script, const ScheduleDag& dag,
                                             const std::vector<ClipAnnotation>& corpus) {
  std::vector<std::string> warnings;
  for (const auto& from : dag.nodes) {
    for (size_t i = 0; i < from.edges.size(); ++i) {
      if (!from.virtual_edge[i]) continue;
      const auto& to = dag.nodes[from.edges[i]];
      const std::string& a = script.mappings[from.mapping_index].selection.attribute;
      const std::string& b = script.mappings[to.mapping_index].selection.attribute;
      const bool precedent = std::any_of(corpus.begin(), corpus.end(), [&](const ClipAnnotation& c) {
        if (c.narrative_order != script.order) return false;
        auto has = [&](const std::string& attr) {
          return std::any_of(c.mappings.begin(), c.mappings.end(),
                             [&](const auto& m) { return m.attribute == attr; });
        };
        return has(a) && has(b);
      });
      if (!precedent) {
        warnings.push_back("virtual link " + from.node_id + " -> " + to.node_id + " (" + a + " -> " + b +
                           ") has no " + std::string(to_string(script.order)) + " precedent in the corpus");
      }
    }
  }
  return warnings;
}

}  // namespace rallyviz
