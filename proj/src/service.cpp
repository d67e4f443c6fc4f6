#include "rallyviz/service.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "httplib.h"
#include "rallyviz/hash.h"
#include "rallyviz/io.h"

namespace rallyviz {

using nlohmann::json;
namespace fs = std::filesystem;

InputError::InputError(json diagnostics)
    : Error(ErrorCode::Validation,
            diagnostics.empty() ? "invalid input" : diagnostics.front().value("message", "invalid input")),
      diagnostics_(std::move(diagnostics)) {}

namespace {

std::string format_id(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%06d", n);
  return buf;
}

int parse_id(const std::string& id) {
  if (id.size() != 7 || id[0] != 'p') return -1;
  for (size_t i = 1; i < id.size(); ++i)
    if (id[i] < '0' || id[i] > '9') return -1;
  return std::stoi(id.substr(1));
}

std::string_view code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

json pyramid_summary(const Rally& r) {
  json counts = json::object();
  for (NodeKind k : {NodeKind::Rally, NodeKind::Turn, NodeKind::Event, NodeKind::Tactic, NodeKind::ObjectAttribute,
                     NodeKind::Frame})
    counts[std::string(to_string(k))] = r.pyramid.count(k);
  return {{"root", r.pyramid.root},
          {"node_count", r.pyramid.nodes.size()},
          {"node_counts", counts},
          {"frame_count", r.dataset.frames.size()},
          {"turn_count", r.events.turns.size()},
          {"stroke_count", r.events.strokes.size()},
          {"bounce_count", r.events.bounces.size()},
          {"net_hit_count", r.events.net_hits.size()},
          {"fact_count", r.facts.size()},
          {"insights", suggest_insights(r)}};
}

Rally analyze_inputs(const json& tracking, const std::optional<json>& tactics, AnalysisOptions options) {
  options.tactic_import = tactics;
  return analyze(dataset_from_json(tracking), options);
}

void apply_order(AugmentationScript& s, const json& body, const VideoMeta& video) {
  s.order = parse_order(body.at("order").get<std::string>());
  s.anchor_frame.reset();
  s.zigzag.reset();
  s.timefork.reset();
  if ((s.order == NarrativeOrder::FlashForward || s.order == NarrativeOrder::FlashBack) &&
      body.contains("anchor_frame") && !body["anchor_frame"].is_null())
    s.anchor_frame = body["anchor_frame"].get<int>();
  if (s.order == NarrativeOrder::ZigZag) {
    if (body.contains("zigzag") && !body["zigzag"].is_null()) {
      s.zigzag = ZigZagSpec{body["zigzag"].at("anchor").get<int>(), body["zigzag"].at("rewind_frames").get<int>()};
    } else {
      int anchor = (s.clip.start + s.clip.end) / 2;
      if (!s.mappings.empty()) {
        anchor = s.clip.start;
        for (const auto& m : s.mappings) anchor = std::max(anchor, m.source_frame());
      }
      const int rewind = std::max(1, std::min(static_cast<int>(std::lround(video.fps)), anchor - s.clip.start + 1));
      s.zigzag = ZigZagSpec{anchor, rewind};
    }
  }
  if (s.order == NarrativeOrder::TimeFork) {
    TimeForkSpec tf;
    if (body.contains("timefork") && !body["timefork"].is_null()) {
      const auto& j = body["timefork"];
      tf.hypothetical = j.value("hypothetical", std::vector<std::string>{});
      tf.actual = j.value("actual", std::vector<std::string>{});
      if (j.contains("anchor") && !j["anchor"].is_null()) tf.anchor = j["anchor"].get<int>();
    } else if (!s.mappings.empty()) {
      // Latest mapping is the actual outcome, the others are hypothetical.
      std::vector<size_t> order(s.mappings.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return s.mappings[a].source_frame() < s.mappings[b].source_frame();
      });
      for (size_t i = 0; i + 1 < order.size(); ++i) tf.hypothetical.push_back(s.mappings[order[i]].mapping_id);
      tf.actual.push_back(s.mappings[order.back()].mapping_id);
    }
    s.timefork = std::move(tf);
  }
}

template <typename F>
auto guarded_json(F f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(std::string("malformed request: ") + e.what());
  }
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.corpus_path) default_corpus_ = load_corpus(*config_.corpus_path);
  const fs::path root = fs::path(config_.data_dir) / "projects";
  fs::create_directories(root);
  for (const auto& entry : fs::directory_iterator(root)) {
    const int n = parse_id(entry.path().filename().string());
    if (n >= next_id_) next_id_ = n + 1;
  }
}

Service::~Service() = default;

json Service::create_project(const json& body) {
  json diagnostics = json::array();
  if (!body.is_object() || !body.contains("tracking"))
    diagnostics.push_back({{"file", "tracking"}, {"message", "missing tracking document"}});

  std::optional<TrackingDataset> dataset;
  if (diagnostics.empty()) {
    try {
      dataset = dataset_from_json(body["tracking"]);
    } catch (const Error& e) {
      diagnostics.push_back({{"file", "tracking"}, {"message", e.what()}});
    }
  }
  std::optional<json> tactics;
  if (body.is_object() && body.contains("tactics") && !body["tactics"].is_null()) tactics = body["tactics"];
  std::vector<ClipAnnotation> corpus = default_corpus_;
  const bool own_corpus = body.is_object() && body.contains("corpus") && !body["corpus"].is_null();
  if (own_corpus) {
    try {
      corpus = corpus_from_json(body["corpus"]);
    } catch (const Error& e) {
      diagnostics.push_back({{"file", "corpus"}, {"message", e.what()}});
    }
  }

  auto p = std::make_shared<Project>();
  if (diagnostics.empty()) {
    try {
      AnalysisOptions options = config_.analysis;
      options.tactic_import = tactics;
      p->rally = analyze(std::move(*dataset), options);
    } catch (const Error& e) {
      diagnostics.push_back({{"file", tactics ? "tactics" : "tracking"}, {"message", e.what()}});
    }
  }
  if (!diagnostics.empty()) throw InputError(diagnostics);

  p->corpus = std::move(corpus);
  p->stats = compile_stats(p->corpus);
  {
    std::lock_guard<std::mutex> g(store_lock_);
    p->id = format_id(next_id_++);
    p->dir = (fs::path(config_.data_dir) / "projects" / p->id).string();
    projects_[p->id] = p;
  }
  std::unique_lock<std::shared_mutex> lk(p->lock);
  write_file((fs::path(p->dir) / "tracking.json").string(), dump_canonical(body["tracking"]));
  if (tactics) write_file((fs::path(p->dir) / "tactics.json").string(), dump_canonical(*tactics));
  if (own_corpus) write_file((fs::path(p->dir) / "corpus.json").string(), dump_canonical(body["corpus"]));
  persist(*p);
  return {{"project_id", p->id}, {"pyramid", pyramid_summary(p->rally)}, {"import_report", p->rally.import_report}};
}

std::shared_ptr<Service::Project> Service::find(const std::string& project_id) {
  {
    std::lock_guard<std::mutex> g(store_lock_);
    auto it = projects_.find(project_id);
    if (it != projects_.end()) return it->second;
  }
  auto p = load(project_id);
  std::lock_guard<std::mutex> g(store_lock_);
  auto [it, inserted] = projects_.emplace(project_id, p);
  return it->second;
}

std::shared_ptr<Service::Project> Service::load(const std::string& project_id) {
  const fs::path dir = fs::path(config_.data_dir) / "projects" / project_id;
  if (parse_id(project_id) < 0 || !fs::exists(dir / "state.json"))
    throw Error(ErrorCode::NotFound, "unknown project '" + project_id + "'");
  auto p = std::make_shared<Project>();
  p->id = project_id;
  p->dir = dir.string();
  std::optional<json> tactics;
  if (fs::exists(dir / "tactics.json")) tactics = read_json((dir / "tactics.json").string());
  p->rally = analyze_inputs(read_json((dir / "tracking.json").string()), tactics, config_.analysis);
  p->corpus = fs::exists(dir / "corpus.json") ? load_corpus((dir / "corpus.json").string()) : default_corpus_;
  p->stats = compile_stats(p->corpus);
  const json state = read_json((dir / "state.json").string());
  const json scripts = state.value("scripts", json::object());
  const json compiled = state.value("compiled", json::object());
  for (const auto& [sid, js] : scripts.items()) p->scripts[sid] = script_from_json(js);
  for (const auto& [sid, d] : compiled.items()) p->compiled_digests[sid] = d.get<std::string>();
  return p;
}

void Service::persist(const Project& p) const {
  json scripts = json::object();
  for (const auto& [sid, s] : p.scripts) scripts[sid] = to_json(s);
  json compiled = json::object();
  for (const auto& [sid, d] : p.compiled_digests) compiled[sid] = d;
  const json state = {{"schema_version", 1}, {"project_id", p.id}, {"scripts", scripts}, {"compiled", compiled}};
  write_file((fs::path(p.dir) / "state.json").string(), dump_canonical(state));
}

std::vector<std::string> Service::project_ids() {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(fs::path(config_.data_dir) / "projects")) {
    const std::string name = entry.path().filename().string();
    if (parse_id(name) >= 0 && fs::exists(entry.path() / "state.json")) ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

json Service::project_summary(const std::string& project_id) {
  auto p = find(project_id);
  std::shared_lock<std::shared_mutex> lk(p->lock);
  std::vector<std::string> scripts;
  for (const auto& [sid, s] : p->scripts) scripts.push_back(sid);
  return {{"project_id", p->id},
          {"video",
           {{"width", p->rally.dataset.video.width},
            {"height", p->rally.dataset.video.height},
            {"fps", p->rally.dataset.video.fps},
            {"frame_count", p->rally.dataset.video.frame_count}}},
          {"pyramid", pyramid_summary(p->rally)},
          {"scripts", scripts}};
}

json Service::timeline(const std::string& project_id) {
  auto p = find(project_id);
  std::shared_lock<std::shared_mutex> lk(p->lock);
  const EventSet& ev = p->rally.events;
  json turns = json::array();
  for (const auto& t : ev.turns) {
    json jt = {{"turn_id", t.event_id}, {"frame_span", {t.span.start, t.span.end}}};
    jt["player"] = t.player ? json(std::string(to_string(*t.player))) : json(nullptr);
    jt["stroke"] = t.text("stroke") ? json(*t.text("stroke")) : json(nullptr);
    turns.push_back(std::move(jt));
  }
  std::vector<const Event*> glyphs;
  for (const Event* e : ev.all())
    if (e->kind != EventKind::Turn) glyphs.push_back(e);
  std::stable_sort(glyphs.begin(), glyphs.end(), [](const Event* a, const Event* b) {
    if (a->key_frame() != b->key_frame()) return a->key_frame() < b->key_frame();
    return a->event_id < b->event_id;
  });
  json jg = json::array();
  for (const Event* e : glyphs) {
    jg.push_back({{"event_id", e->event_id},
                  {"kind", to_string(e->kind)},
                  {"frame_span", {e->span.start, e->span.end}},
                  {"key_frame", e->key_frame()},
                  {"subject", e->player ? "Player " + std::string(to_string(*e->player)) : std::string("Ball")},
                  {"color_class", e->player ? "player" : "ball"}});
  }
  return {{"frame_count", p->rally.dataset.frames.size()}, {"turns", turns}, {"glyphs", jg}};
}

json Service::pyramid(const std::string& project_id, std::optional<FrameSpan> brush_span) {
  auto p = find(project_id);
  std::shared_lock<std::shared_mutex> lk(p->lock);
  const Pyramid view = brush_span ? brush(p->rally.pyramid, *brush_span) : p->rally.pyramid;
  json turns = json::array();
  for (const auto& n : view.nodes)
    if (n.kind == NodeKind::Turn) turns.push_back(n.ref);
  return {{"pyramid", to_json(view)}, {"turns", turns}};
}

json Service::attributes(const std::string& project_id, const std::string& subject, int frame,
                         const std::string& purpose) {
  auto p = find(project_id);
  std::shared_lock<std::shared_mutex> lk(p->lock);
  const auto list = attributes_at(p->rally, parse_subject_ref(subject), frame, level_filter(parse_purpose(purpose)));
  json out = json::array();
  for (const auto& a : list) out.push_back({{"name", a.name}, {"level", to_string(a.level)}});
  return {{"subject", subject}, {"frame", frame}, {"attributes", out}};
}

AugmentationScript& Service::script_of(Project& p, const std::string& script_id) {
  auto it = p.scripts.find(script_id);
  if (it == p.scripts.end()) throw Error(ErrorCode::NotFound, "unknown script '" + script_id + "'");
  return it->second;
}

void Service::touch(Project& p, const std::string& script_id) {
  std::lock_guard<std::mutex> g(p.cache_lock);
  p.cache.erase(script_id);
  p.compiled_digests.erase(script_id);
}

json Service::add_selections(const std::string& project_id, const json& body) {
  auto p = find(project_id);
  std::unique_lock<std::shared_mutex> lk(p->lock);
  return guarded_json([&]() -> json {
    const std::string sid = body.value("script_id", "main");
    const SubjectRef subject = parse_subject_ref(body.at("subject").get<std::string>());
    const int frame = body.at("frame").get<int>();
    const DataLevel filter = level_filter(parse_purpose(body.value("purpose", "Education")));
    const int n = static_cast<int>(p->rally.dataset.frames.size());

    AugmentationScript script;
    if (auto it = p->scripts.find(sid); it != p->scripts.end()) {
      script = it->second;
    } else {
      script.script_id = sid;
      script.clip = {0, n - 1};
      if (body.contains("clip")) script.clip = {body["clip"].at(0).get<int>(), body["clip"].at(1).get<int>()};
      if (!body.contains("order")) apply_order(script, {{"order", "Linear"}}, p->rally.dataset.video);
    }

    // Resolve everything before touching the script so a 409 leaves it intact.
    std::vector<ScriptMapping> added;
    json recs = json::array();
    for (const auto& attr : body.at("attributes")) {
      const DataSelection sel = make_selection(p->rally, subject, attr.get<std::string>(), frame, filter);
      const NarrativeOrder order =
          body.contains("order") ? parse_order(body["order"].get<std::string>()) : script.order;
      const Recommendation rec = recommend(p->stats, sel.attribute, order);
      recs.push_back(to_json(rec));
      if (script.find(sel.selection_id)) continue;
      ScriptMapping m;
      m.mapping_id = sel.selection_id;
      m.selection = sel;
      m.visual = rec.visual;
      added.push_back(std::move(m));
    }
    for (auto& m : added) script.mappings.push_back(std::move(m));
    if (body.contains("order")) apply_order(script, body, p->rally.dataset.video);
    validate_script(script);
    p->scripts[sid] = script;
    touch(*p, sid);
    persist(*p);

    json mappings = json::array();
    for (const auto& m : script.mappings) {
      mappings.push_back({{"mapping_id", m.mapping_id},
                          {"attribute", m.selection.attribute},
                          {"subject", to_string(m.selection.subject)},
                          {"frame", m.selection.anchor_frame},
                          {"visual", m.visual}});
    }
    return {{"script", to_json(script)}, {"recommendations", recs}, {"mappings", mappings}};
  });
}

json Service::set_order(const std::string& project_id, const std::string& script_id, const json& body) {
  auto p = find(project_id);
  std::unique_lock<std::shared_mutex> lk(p->lock);
  return guarded_json([&]() -> json {
    AugmentationScript script = script_of(*p, script_id);
    apply_order(script, body, p->rally.dataset.video);
    validate_script(script);
    p->scripts[script_id] = script;
    touch(*p, script_id);
    persist(*p);
    return {{"script", to_json(script)}};
  });
}

json Service::patch_mapping(const std::string& project_id, const std::string& script_id,
                            const std::string& mapping_id, const json& patch) {
  auto p = find(project_id);
  std::unique_lock<std::shared_mutex> lk(p->lock);
  return guarded_json([&]() -> json {
    AugmentationScript script = script_of(*p, script_id);
    auto it = std::find_if(script.mappings.begin(), script.mappings.end(),
                           [&](const ScriptMapping& m) { return m.mapping_id == mapping_id; });
    if (it == script.mappings.end()) throw Error(ErrorCode::NotFound, "unknown mapping '" + mapping_id + "'");
    if (patch.contains("style")) it->style = patched(it->style, patch["style"]);
    if (patch.contains("visual")) it->visual = patch["visual"].get<std::string>();
    if (patch.contains("hold_frames")) {
      if (patch["hold_frames"].is_null()) it->hold_frames.reset();
      else it->hold_frames = patch["hold_frames"].get<int>();
    }
    if (patch.contains("pass")) it->pass = patch["pass"].get<int>();
    validate_script(script);
    p->scripts[script_id] = script;
    touch(*p, script_id);
    persist(*p);
    return {{"script", to_json(script)}};
  });
}

json Service::delete_mapping(const std::string& project_id, const std::string& script_id,
                             const std::string& mapping_id) {
  auto p = find(project_id);
  std::unique_lock<std::shared_mutex> lk(p->lock);
  AugmentationScript script = script_of(*p, script_id);
  const auto before = script.mappings.size();
  std::erase_if(script.mappings, [&](const ScriptMapping& m) { return m.mapping_id == mapping_id; });
  if (script.mappings.size() == before) throw Error(ErrorCode::NotFound, "unknown mapping '" + mapping_id + "'");
  if (script.timefork) {
    std::erase(script.timefork->hypothetical, mapping_id);
    std::erase(script.timefork->actual, mapping_id);
  }
  validate_script(script);
  p->scripts[script_id] = script;
  touch(*p, script_id);
  persist(*p);
  return {{"script", to_json(script)}};
}

json Service::get_script(const std::string& project_id, const std::string& script_id) {
  auto p = find(project_id);
  std::shared_lock<std::shared_mutex> lk(p->lock);
  return to_json(script_of(*p, script_id));
}

json Service::put_script(const std::string& project_id, const std::string& script_id, const json& doc) {
  auto p = find(project_id);
  std::unique_lock<std::shared_mutex> lk(p->lock);
  AugmentationScript script = script_from_json(doc);
  script.script_id = script_id;
  const int n = static_cast<int>(p->rally.dataset.frames.size());
  if (script.clip.end >= n) fail("script clip outside the rally");
  p->scripts[script_id] = script;
  touch(*p, script_id);
  persist(*p);
  return {{"script", to_json(script)}};
}

std::shared_ptr<const Service::Compiled> Service::compiled(Project& p, const std::string& script_id) {
  const AugmentationScript& script = script_of(p, script_id);
  const std::string digest = script_digest(script);
  std::lock_guard<std::mutex> g(p.cache_lock);
  if (auto it = p.cache.find(script_id); it != p.cache.end() && it->second->script_digest == digest)
    return it->second;
  auto c = std::make_shared<Compiled>();
  c->script_digest = digest;
  c->schedule = compile_schedule(script, p.rally.dataset.video, config_.schedule);
  c->overlays = build_overlays(script, c->schedule, p.rally, config_.render);
  p.cache[script_id] = c;
  p.compiled_digests[script_id] = schedule_digest(c->schedule);
  return c;
}

json Service::schedule(const std::string& project_id, const std::string& script_id) {
  auto p = find(project_id);
  std::shared_lock<std::shared_mutex> lk(p->lock);
  auto c = compiled(*p, script_id);
  const AugmentationScript& script = script_of(*p, script_id);
  const auto warnings = p->corpus.empty() ? std::vector<std::string>{}
                                          : check_virtual_links(script, build_dag(script), p->corpus);
  return {{"script_id", script_id},
          {"schedule_digest", schedule_digest(c->schedule)},
          {"total_frames", c->schedule.total_frames()},
          {"warnings", warnings},
          {"schedule", to_json(c->schedule)}};
}

Preview Service::preview(const std::string& project_id, const std::string& script_id, int output_index) {
  auto p = find(project_id);
  std::shared_lock<std::shared_mutex> lk(p->lock);
  auto c = compiled(*p, script_id);
  if (output_index < 0 || output_index >= c->schedule.total_frames()) {
    throw Error(ErrorCode::NotFound, "output index " + std::to_string(output_index) + " out of range [0, " +
                                         std::to_string(c->schedule.total_frames()) + ")");
  }
  Preview out;
  out.svg = render_frame(c->overlays[static_cast<size_t>(output_index)]);
  out.etag = "\"" + digest_of(out.svg) + "\"";
  out.source_frame = c->schedule.frames[static_cast<size_t>(output_index)].source_frame;
  out.kind = c->schedule.frames[static_cast<size_t>(output_index)].kind;
  return out;
}

json Service::export_script(const std::string& project_id, const std::string& script_id) {
  auto p = find(project_id);
  std::unique_lock<std::shared_mutex> lk(p->lock);
  auto c = compiled(*p, script_id);
  const fs::path dir = fs::path(p->dir) / "exports" / script_id;
  fs::remove_all(dir);
  const CompositeResult r = composite_sequence(c->schedule, c->overlays, dir.string());
  persist(*p);
  return {{"script_id", script_id},
          {"path", dir.string()},
          {"manifest", r.manifest_path},
          {"svg_count", r.svg_count},
          {"total_frames", c->schedule.total_frames()},
          {"schedule_digest", schedule_digest(c->schedule)}};
}

int http_status(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Validation: return 422;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::UnsupportedOrder: return 422;
    case ErrorCode::Io: return 500;
    case ErrorCode::Internal: return 500;
  }
  return 500;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  json body = {{"error", {{"code", code_name(e.code())}, {"message", e.what()}}}};
  if (const auto* ie = dynamic_cast<const InputError*>(&e)) body["diagnostics"] = ie->diagnostics();
  send_json(res, http_status(e), body);
}

json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("request body is not JSON: ") + e.what());
  }
}

int to_int(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(std::string(what) + " must be an integer");
}

template <typename F>
httplib::Server::Handler wrap(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_error(res, Error(ErrorCode::Internal, e.what()));
    }
  };
}

}  // namespace

void install_routes(httplib::Server& svr, Service& s) {
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  svr.Get("/health", wrap([](const auto&, auto& res) { send_json(res, 200, {{"status", "ok"}}); }));
  svr.Get("/projects", wrap([&s](const auto&, auto& res) { send_json(res, 200, {{"projects", s.project_ids()}}); }));
  svr.Post("/projects", wrap([&s](const auto& req, auto& res) { send_json(res, 201, s.create_project(parse_body(req))); }));
  svr.Get(R"(/projects/([^/]+))", wrap([&s](const auto& req, auto& res) {
            send_json(res, 200, s.project_summary(req.matches[1]));
          }));
  svr.Get(R"(/projects/([^/]+)/timeline)", wrap([&s](const auto& req, auto& res) {
            send_json(res, 200, s.timeline(req.matches[1]));
          }));
  svr.Get(R"(/projects/([^/]+)/pyramid)", wrap([&s](const auto& req, auto& res) {
            std::optional<FrameSpan> span;
            if (req.has_param("from") || req.has_param("to")) {
              span = FrameSpan{to_int(req.get_param_value("from"), "from"), to_int(req.get_param_value("to"), "to")};
            }
            send_json(res, 200, s.pyramid(req.matches[1], span));
          }));
  svr.Get(R"(/projects/([^/]+)/attributes)", wrap([&s](const auto& req, auto& res) {
            const std::string purpose = req.has_param("purpose") ? req.get_param_value("purpose") : "Education";
            send_json(res, 200,
                      s.attributes(req.matches[1], req.get_param_value("subject"),
                                   to_int(req.get_param_value("frame"), "frame"), purpose));
          }));
  svr.Post(R"(/projects/([^/]+)/selections)", wrap([&s](const auto& req, auto& res) {
             send_json(res, 200, s.add_selections(req.matches[1], parse_body(req)));
           }));
  svr.Get(R"(/projects/([^/]+)/scripts/([^/]+))", wrap([&s](const auto& req, auto& res) {
            send_json(res, 200, s.get_script(req.matches[1], req.matches[2]));
          }));
  svr.Put(R"(/projects/([^/]+)/scripts/([^/]+))", wrap([&s](const auto& req, auto& res) {
            send_json(res, 200, s.put_script(req.matches[1], req.matches[2], parse_body(req)));
          }));
  svr.Put(R"(/projects/([^/]+)/scripts/([^/]+)/order)", wrap([&s](const auto& req, auto& res) {
            send_json(res, 200, s.set_order(req.matches[1], req.matches[2], parse_body(req)));
          }));
  svr.Patch(R"(/projects/([^/]+)/scripts/([^/]+)/mappings/([^/]+))", wrap([&s](const auto& req, auto& res) {
              send_json(res, 200, s.patch_mapping(req.matches[1], req.matches[2], req.matches[3], parse_body(req)));
            }));
  svr.Delete(R"(/projects/([^/]+)/scripts/([^/]+)/mappings/([^/]+))", wrap([&s](const auto& req, auto& res) {
               send_json(res, 200, s.delete_mapping(req.matches[1], req.matches[2], req.matches[3]));
             }));
  svr.Get(R"(/projects/([^/]+)/schedule/([^/]+))", wrap([&s](const auto& req, auto& res) {
            send_json(res, 200, s.schedule(req.matches[1], req.matches[2]));
          }));
  svr.Get(R"(/projects/([^/]+)/preview/([^/]+)/([^/]+))", wrap([&s](const auto& req, auto& res) {
            const Preview p = s.preview(req.matches[1], req.matches[2], to_int(req.matches[3], "output index"));
            res.set_header("ETag", p.etag);
            res.set_header("X-Source-Frame", std::to_string(p.source_frame));
            res.set_header("X-Frame-Kind", std::string(to_string(p.kind)));
            if (req.get_header_value("If-None-Match") == p.etag) {
              res.status = 304;
              return;
            }
            res.status = 200;
            res.set_content(p.svg, "image/svg+xml");
          }));
  svr.Post(R"(/projects/([^/]+)/export/([^/]+))", wrap([&s](const auto& req, auto& res) {
             send_json(res, 200, s.export_script(req.matches[1], req.matches[2]));
           }));
}

bool serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  server.set_payload_max_length(512u << 20);
  install_routes(server, service);
  return server.listen(host, port);
}

}  // namespace rallyviz
