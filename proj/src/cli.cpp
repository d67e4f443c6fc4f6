#include "rallyviz/cli.h"

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rallyviz/error.h"
#include "rallyviz/io.h"
#include "rallyviz/pyramid.h"
#include "rallyviz/recommender.h"
#include "rallyviz/renderer.h"
#include "rallyviz/scheduler.h"
#include "rallyviz/service.h"

namespace rallyviz {

using nlohmann::json;

namespace {

// Parameters shared by every subcommand; a --config file is applied first,
// explicit flags override it.
struct Params {
  std::string config_path;
  bool json_out = false;
  int verbosity = 0;

  std::optional<double> reach_fraction;
  std::optional<double> net_speed_ratio;
  std::optional<int> net_window;
  std::optional<double> keypoint_threshold;
  std::optional<int> hold_frames;
  std::optional<int> ramp_frames;
  std::optional<std::string> player_a_color;
  std::optional<std::string> player_b_color;
  std::optional<std::string> rules_path;

  EventParams events;
  ScheduleOptions schedule;
  RenderOptions render;
  std::vector<TacticRule> rules = default_rules();

  void resolve() {
    json cfg = json::object();
    if (!config_path.empty()) cfg = read_json(config_path);
    try {
      const json ev = cfg.value("events", json::object());
      events.reach_fraction = reach_fraction.value_or(ev.value("reach_fraction", events.reach_fraction));
      events.net_speed_ratio = net_speed_ratio.value_or(ev.value("net_speed_ratio", events.net_speed_ratio));
      events.net_window = net_window.value_or(ev.value("net_window", events.net_window));
      events.keypoint_threshold =
          keypoint_threshold.value_or(ev.value("keypoint_threshold", events.keypoint_threshold));

      const json sc = cfg.value("schedule", json::object());
      if (hold_frames) schedule.default_hold_frames = *hold_frames;
      else if (sc.contains("hold_frames")) schedule.default_hold_frames = sc["hold_frames"].get<int>();
      schedule.ramp_frames = ramp_frames.value_or(sc.value("ramp_frames", schedule.ramp_frames));

      const json rc = cfg.value("render", json::object());
      render.stroke_width = rc.value("stroke_width", render.stroke_width);
      render.font_size = rc.value("font_size", render.font_size);
      const json pal = rc.value("palette", json::object());
      auto pick = [&](const std::optional<std::string>& flag, const char* key, Color& dst) {
        if (flag) dst = parse_color(*flag);
        else if (pal.contains(key)) dst = parse_color(pal[key].get<std::string>());
      };
      pick(player_a_color, "player_a", render.palette.player_a);
      pick(player_b_color, "player_b", render.palette.player_b);
      if (pal.contains("categorical")) {
        const auto& cat = pal["categorical"];
        if (!cat.is_array() || cat.size() != render.palette.categorical.size())
          fail("render.palette.categorical must list 8 colors");
        for (size_t i = 0; i < cat.size(); ++i) render.palette.categorical[i] = parse_color(cat[i].get<std::string>());
      }

      const std::string rules_file = rules_path.value_or(cfg.value("rules", std::string()));
      if (!rules_file.empty()) rules = load_rules(rules_file);
    } catch (const json::exception& e) {
      fail(std::string("malformed config: ") + e.what());
    }
    if (!(events.reach_fraction > 0)) fail("reach fraction must be > 0");
    if (!(events.net_speed_ratio > 0 && events.net_speed_ratio <= 1)) fail("net speed ratio must be in (0, 1]");
    if (events.net_window < 1) fail("net window must be >= 1");
  }

  AnalysisOptions analysis(const std::optional<std::string>& tactics) const {
    AnalysisOptions o;
    o.events = events;
    o.rules = rules;
    if (tactics) o.tactic_import = read_json(*tactics);
    return o;
  }
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int main(const std::vector<std::string>& args) {
    CLI::App app{"Augmented table-tennis video engine", "rallyviz"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.add_option("--config", p_.config_path, "JSON config file with parameter defaults");
    app.add_flag("--json", p_.json_out, "Machine-readable JSON on stdout");
    app.add_flag("-v,--verbose", p_.verbosity, "More output");
    app.add_option("--reach-fraction", p_.reach_fraction, "Stroke reach as a fraction of frame width");
    app.add_option("--net-speed-ratio", p_.net_speed_ratio, "Speed drop ratio for net hits");
    app.add_option("--net-window", p_.net_window, "Frames inspected after a net crossing");
    app.add_option("--keypoint-threshold", p_.keypoint_threshold, "Minimum keypoint confidence");
    app.add_option("--hold-frames", p_.hold_frames, "Default hold length per mapping");
    app.add_option("--ramp-frames", p_.ramp_frames, "Creation/Destruction ramp length");
    app.add_option("--player-a-color", p_.player_a_color, "Palette color for player A (#rrggbb)");
    app.add_option("--player-b-color", p_.player_b_color, "Palette color for player B (#rrggbb)");
    app.add_option("--rules", p_.rules_path, "Tactic rule pack (JSON)");

    std::function<int()> action;
    add_ingest(app, action);
    add_pyramid(app, action);
    add_events(app, action);
    add_tactics(app, action);
    add_corpus(app, action);
    add_recommend(app, action);
    add_schedule(app, action);
    add_render(app, action);
    add_serve(app, action);

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n\n" << app.help();
      return kExitValidation;
    }
    try {
      p_.resolve();
      return action ? action() : kExitOk;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << "\n";
      return e.code() == ErrorCode::Internal ? kExitInternal : kExitValidation;
    } catch (const std::exception& e) {
      err_ << "internal error: " << e.what() << "\n";
      return kExitInternal;
    }
  }

 private:
  void emit(const json& j) { out_ << j.dump(2) << "\n"; }

  void write_or_emit(const json& j, const std::string& path) {
    if (path.empty()) emit(j);
    else write_file(path, dump_canonical(j));
  }

  Rally load_rally(const std::string& tracking, const std::optional<std::string>& tactics) {
    return analyze(load_dataset(tracking), p_.analysis(tactics));
  }

  void add_ingest(CLI::App& app, std::function<int()>& action) {
    auto* ingest = app.add_subcommand("ingest", "Tracking data ingestion");
    ingest->require_subcommand(1);
    auto* validate = ingest->add_subcommand("validate", "Validate a tracking file");
    validate->add_option("tracking", tracking_, "Tracking JSON (optionally .gz)")->required();
    validate->callback([&] {
      action = [this] {
        const TrackingDataset ds = load_dataset(tracking_);
        const json summary = {{"valid", true},
                              {"frames", ds.frames.size()},
                              {"width", ds.video.width},
                              {"height", ds.video.height},
                              {"fps", ds.video.fps},
                              {"duration_s", ds.video.duration()}};
        if (p_.json_out) emit(summary);
        else out_ << "ok: " << ds.frames.size() << " frames, " << ds.video.width << "x" << ds.video.height << " @ "
                  << ds.video.fps << " fps\n";
        return kExitOk;
      };
    });
  }

  void add_pyramid(CLI::App& app, std::function<int()>& action) {
    auto* pyr = app.add_subcommand("pyramid", "Data pyramid");
    pyr->require_subcommand(1);
    auto* build = pyr->add_subcommand("build", "Build the data pyramid");
    build->add_option("tracking", tracking_, "Tracking JSON")->required();
    build->add_option("--tactics", tactics_, "Tactic import file");
    build->add_option("--from", from_, "Brush start frame");
    build->add_option("--to", to_, "Brush end frame");
    build->add_option("-o,--out", out_path_, "Write JSON here instead of stdout");
    build->callback([&] {
      action = [this] {
        const Rally r = load_rally(tracking_, tactics_);
        Pyramid view = r.pyramid;
        if (from_ || to_) view = brush(view, {from_.value_or(0), to_.value_or(static_cast<int>(r.dataset.frames.size()) - 1)});
        write_or_emit(to_json(view), out_path_);
        return kExitOk;
      };
    });
    auto* query = pyr->add_subcommand("query", "Attributes available for a subject at a frame");
    query->add_option("tracking", tracking_, "Tracking JSON")->required();
    query->add_option("--tactics", tactics_, "Tactic import file");
    query->add_option("--subject", subject_, "Ball, Player A, Player B, Rally")->required();
    query->add_option("--frame", frame_, "Frame index")->required();
    query->add_option("--purpose", purpose_, "Entertainment, Middle or Education");
    query->callback([&] {
      action = [this] {
        const Rally r = load_rally(tracking_, tactics_);
        const auto attrs = attributes_at(r, parse_subject_ref(subject_), frame_, level_filter(parse_purpose(purpose_)));
        json list = json::array();
        for (const auto& a : attrs) list.push_back({{"name", a.name}, {"level", to_string(a.level)}});
        if (p_.json_out) {
          emit({{"subject", subject_}, {"frame", frame_}, {"attributes", list}});
        } else {
          for (const auto& a : attrs) out_ << a.name << " (" << to_string(a.level) << ")\n";
        }
        return kExitOk;
      };
    });
  }

  void add_events(CLI::App& app, std::function<int()>& action) {
    auto* ev = app.add_subcommand("events", "Event detection");
    ev->require_subcommand(1);
    auto* detect = ev->add_subcommand("detect", "Detect strokes, bounces, net hits and turns");
    detect->add_option("tracking", tracking_, "Tracking JSON")->required();
    detect->add_option("-o,--out", out_path_, "Write JSON here instead of stdout");
    detect->callback([&] {
      action = [this] {
        const TrackingDataset ds = load_dataset(tracking_);
        const EventSet events = detect_events(ds, build_ball_track(ds), p_.events);
        if (p_.json_out || !out_path_.empty()) {
          write_or_emit(to_json(events), out_path_);
        } else {
          for (const Event* e : events.all())
            out_ << std::left << std::setw(10) << e->event_id << std::setw(8) << to_string(e->kind) << " ["
                 << e->span.start << ", " << e->span.end << "]\n";
        }
        return kExitOk;
      };
    });
  }

  void add_tactics(CLI::App& app, std::function<int()>& action) {
    auto* tac = app.add_subcommand("tactics", "Tactic rules and imports");
    tac->require_subcommand(1);
    auto* run = tac->add_subcommand("run", "Run the rule pack");
    run->add_option("tracking", tracking_, "Tracking JSON")->required();
    run->add_option("-o,--out", out_path_, "Write JSON here instead of stdout");
    run->callback([&] {
      action = [this] {
        const TrackingDataset ds = load_dataset(tracking_);
        const BallTrack track = build_ball_track(ds);
        const EventSet events = detect_events(ds, track, p_.events);
        const RuleRun r = run_rules(p_.rules, RallyContext{ds, track, events});
        json diags = json::array();
        for (const auto& d : r.diagnostics)
          diags.push_back({{"rule_id", d.rule_id}, {"event_id", d.event_id}, {"message", d.message}});
        json doc = facts_to_json(r.facts);
        doc["diagnostics"] = diags;
        write_or_emit(doc, out_path_);
        return kExitOk;
      };
    });
    auto* imp = tac->add_subcommand("import", "Merge externally supplied tactic facts");
    imp->add_option("tracking", tracking_, "Tracking JSON")->required();
    imp->add_option("facts", import_path_, "Tactic import JSON")->required();
    imp->add_option("-o,--out", out_path_, "Write JSON here instead of stdout");
    imp->callback([&] {
      action = [this] {
        const Rally r = load_rally(tracking_, import_path_);
        json doc = facts_to_json(r.facts);
        doc["report"] = r.import_report;
        write_or_emit(doc, out_path_);
        if (!p_.json_out)
          for (const auto& line : r.import_report) err_ << line << "\n";
        return kExitOk;
      };
    });
  }

  void add_corpus(CLI::App& app, std::function<int()>& action) {
    auto* corpus = app.add_subcommand("corpus", "Annotated corpus");
    corpus->require_subcommand(1);
    auto* stats = corpus->add_subcommand("stats", "Per-order clip ratios and mapping counts");
    stats->add_option("corpus", corpus_path_, "Corpus annotation JSON")->required();
    stats->add_option("--registry", registry_path_, "Registry file replacing the built-in vocabulary");
    stats->callback([&] {
      action = [this] {
        Registry registry = builtin_registry();
        if (!registry_path_.empty()) {
          auto [parsed, report] = parse_registry(read_json(registry_path_));
          if (!report.ok()) {
            for (const auto& v : report.violations) err_ << "registry: " << v.kind << ": " << v.subject << " " << v.detail << "\n";
            return kExitValidation;
          }
          registry = std::move(parsed);
        }
        const MappingStats s = compile_stats(load_corpus(corpus_path_, registry));
        if (p_.json_out) {
          emit(to_json(s));
          return kExitOk;
        }
        out_ << "clips: " << s.clip_count << "\n";
        for (NarrativeOrder o : kAllOrders) {
          auto it = s.order_totals.find(o);
          const long long n = it == s.order_totals.end() ? 0 : it->second;
          char line[96];
          std::snprintf(line, sizeof line, "%-13s %4lld  %5.1f%%\n", std::string(to_string(o)).c_str(), n,
                        100.0 * s.order_ratio(o));
          out_ << line;
        }
        return kExitOk;
      };
    });
  }

  void add_recommend(CLI::App& app, std::function<int()>& action) {
    auto* rec = app.add_subcommand("recommend", "Recommend a visual for a data attribute");
    rec->add_option("--corpus", corpus_path_, "Corpus annotation JSON");
    rec->add_option("--data", data_, "Data attribute name")->required();
    rec->add_option("--order", order_, "Narrative order")->required();
    rec->add_option("--fallback", fallback_path_, "Fallback table JSON");
    rec->callback([&] {
      action = [this] {
        const MappingStats s = corpus_path_.empty() ? MappingStats{} : compile_stats(load_corpus(corpus_path_));
        const FallbackTable fb = fallback_path_.empty() ? default_fallback_table()
                                                        : fallback_from_json(read_json(fallback_path_));
        const Recommendation r = recommend(s, data_, parse_order(*order_), fb);
        if (p_.json_out) {
          emit(to_json(r));
        } else {
          out_ << r.visual;
          if (r.probability) out_ << " (p=" << *r.probability << ")";
          else out_ << " (fallback)";
          out_ << "\n";
        }
        return kExitOk;
      };
    });
  }

  void add_schedule(CLI::App& app, std::function<int()>& action) {
    auto* sch = app.add_subcommand("schedule", "Narrative scheduling");
    sch->require_subcommand(1);
    auto* compile = sch->add_subcommand("compile", "Compile a script into a render schedule");
    compile->add_option("script", script_path_, "Augmentation script JSON")->required();
    compile->add_option("--tracking", tracking_, "Tracking JSON supplying the video metadata");
    compile->add_option("--fps", fps_, "Video fps when no tracking file is given");
    compile->add_option("--frames", frame_count_, "Video frame count when no tracking file is given");
    compile->add_option("--order", order_, "Override the script's narrative order");
    compile->add_option("--slow-from", slow_from_, "Slow-motion output span start");
    compile->add_option("--slow-to", slow_to_, "Slow-motion output span end");
    compile->add_option("--slow-rate", slow_rate_, "Slow-motion rate in (0, 1)");
    compile->add_option("-o,--out", out_path_, "Write JSON here instead of stdout");
    compile->callback([&] {
      action = [this] {
        AugmentationScript script = load_script(script_path_);
        if (order_) {
          script.order = parse_order(*order_);
          if (script.order != NarrativeOrder::ZigZag) script.zigzag.reset();
          if (script.order != NarrativeOrder::TimeFork) script.timefork.reset();
        }
        VideoMeta video;
        if (!tracking_.empty()) {
          video = load_dataset(tracking_).video;
        } else {
          if (!fps_ || !frame_count_) fail("schedule compile needs --tracking or both --fps and --frames");
          video.fps = *fps_;
          video.frame_count = *frame_count_;
        }
        RenderSchedule s = compile_schedule(script, video, p_.schedule);
        if (slow_rate_) s = apply_slow_motion(s, {slow_from_.value_or(0), slow_to_.value_or(s.total_frames() - 1)}, *slow_rate_);
        if (p_.json_out || !out_path_.empty()) {
          write_or_emit(to_json(s), out_path_);
        } else {
          int play = 0, hold = 0, reverse = 0;
          for (const auto& f : s.frames)
            (f.kind == FrameKind::Play ? play : f.kind == FrameKind::Hold ? hold : reverse)++;
          out_ << "total_frames " << s.total_frames() << " (play " << play << ", hold " << hold << ", reverse "
               << reverse << ")\ndigest " << schedule_digest(s) << "\n";
        }
        return kExitOk;
      };
    });
  }

  void add_render(CLI::App& app, std::function<int()>& action) {
    auto* render = app.add_subcommand("render", "Render overlays for a script");
    render->add_option("--script", script_path_, "Augmentation script JSON")->required();
    render->add_option("--tracking", tracking_, "Tracking JSON")->required();
    render->add_option("--tactics", tactics_, "Tactic import file");
    render->add_option("--out", out_path_, "Output directory")->required();
    render->add_option("--frames-dir", frames_dir_, "Source images (%06d.png or .jpg) to composite onto");
    render->callback([&] {
      action = [this] {
        const AugmentationScript script = load_script(script_path_);
        const Rally r = load_rally(tracking_, tactics_);
        const CompositeResult res = render_script(script, r, out_path_, frames_dir_, p_.schedule, p_.render);
        if (p_.json_out) {
          emit({{"manifest", res.manifest_path}, {"svg_count", res.svg_count}, {"png_count", res.png_count}});
        } else {
          out_ << "wrote " << res.svg_count << " overlays";
          if (res.png_count) out_ << " and " << res.png_count << " frames";
          out_ << ", manifest " << res.manifest_path << "\n";
        }
        return kExitOk;
      };
    });
  }

  void add_serve(CLI::App& app, std::function<int()>& action) {
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--port", port_, "TCP port");
    serve_cmd->add_option("--host", host_, "Bind address");
    serve_cmd->add_option("--data-dir", data_dir_, "Project storage directory");
    serve_cmd->add_option("--corpus", corpus_path_, "Default corpus for new projects");
    serve_cmd->callback([&] {
      action = [this] {
        ServiceConfig cfg;
        cfg.data_dir = data_dir_;
        if (!corpus_path_.empty()) cfg.corpus_path = corpus_path_;
        cfg.analysis.events = p_.events;
        cfg.analysis.rules = p_.rules;
        cfg.schedule = p_.schedule;
        cfg.render = p_.render;
        Service service(cfg);
        err_ << "listening on " << host_ << ":" << port_ << "\n";
        if (!serve(service, host_, port_)) throw Error(ErrorCode::Io, "cannot listen on port " + std::to_string(port_));
        return kExitOk;
      };
    });
  }

  std::ostream& out_;
  std::ostream& err_;
  Params p_;

  std::string tracking_, script_path_, out_path_, corpus_path_, fallback_path_, data_, import_path_, registry_path_;
  std::optional<std::string> tactics_, frames_dir_, order_;
  std::string subject_ = "Ball", purpose_ = "Education";
  int frame_ = 0;
  std::optional<int> from_, to_, frame_count_, slow_from_, slow_to_;
  std::optional<double> fps_, slow_rate_;
  int port_ = 8080;
  std::string host_ = "127.0.0.1";
  std::string data_dir_ = "rallyviz-data";
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Cli(out, err).main(args);
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace rallyviz
