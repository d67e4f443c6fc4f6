#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rallyviz/cli.h"
#include "rallyviz/error.h"
#include "rallyviz/io.h"
#include "rallyviz/pyramid.h"
#include "rallyviz/recommender.h"
#include "rallyviz/renderer.h"
#include "rallyviz/scheduler.h"
#include "rallyviz/script.h"

namespace py = pybind11;
using nlohmann::json;

namespace rallyviz {
namespace {

// Documents cross the boundary as JSON text; the Python package decodes them.
std::string dump(const json& j) { return j.dump(); }

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

Rally load_rally(const std::string& tracking_path, const std::optional<std::string>& tactics_path) {
  AnalysisOptions opts;
  if (tactics_path) opts.tactic_import = read_json(*tactics_path);
  return analyze(load_dataset(tracking_path), opts);
}

std::string analyze_file(const std::string& tracking_path, const std::optional<std::string>& tactics_path) {
  const Rally r = load_rally(tracking_path, tactics_path);
  json diagnostics = json::array();
  for (const auto& d : r.diagnostics) diagnostics.push_back({{"rule_id", d.rule_id}, {"event_id", d.event_id}, {"message", d.message}});
  return dump({{"events", to_json(r.events)},
               {"tactics", facts_to_json(r.facts)},
               {"diagnostics", diagnostics},
               {"import_report", r.import_report}});
}

std::string pyramid_file(const std::string& tracking_path, const std::optional<std::string>& tactics_path,
                         const std::optional<std::pair<int, int>>& span) {
  const Rally r = load_rally(tracking_path, tactics_path);
  if (span) return dump(to_json(brush(r.pyramid, FrameSpan{span->first, span->second})));
  return dump(to_json(r.pyramid));
}

std::string corpus_stats(const std::string& corpus_path) {
  return dump(to_json(compile_stats(load_corpus(corpus_path))));
}

std::string recommend_visual(const std::string& corpus_path, const std::string& attribute, const std::string& order) {
  return dump(to_json(recommend(compile_stats(load_corpus(corpus_path)), attribute, parse_order(order))));
}

std::string schedule_script(const std::string& script_json, const std::string& tracking_path) {
  const AugmentationScript script = script_from_json(json::parse(script_json));
  return dump(to_json(compile_schedule(script, load_dataset(tracking_path).video)));
}

std::string render(const std::string& script_path, const std::string& tracking_path, const std::string& out_dir,
                   const std::optional<std::string>& tactics_path, const std::optional<std::string>& frames_dir) {
  const CompositeResult res = render_script(load_script(script_path), load_rally(tracking_path, tactics_path), out_dir, frames_dir);
  return read_file(res.manifest_path);
}

py::tuple run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::vector<std::string> argv{"rallyviz"};
  argv.insert(argv.end(), args.begin(), args.end());
  const int code = run_cli(argv, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace rallyviz

PYBIND11_MODULE(_core, m) {
  using namespace rallyviz;
  m.doc() = "Native core of the rallyviz package";

  static py::exception<Error> error_type(m, "RallyvizError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      inst.attr("code") = code_name(e.code());
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  m.def("analyze", &analyze_file, py::arg("tracking_path"), py::arg("tactics_path") = std::nullopt);
  m.def("pyramid", &pyramid_file, py::arg("tracking_path"), py::arg("tactics_path") = std::nullopt,
        py::arg("span") = std::nullopt);
  m.def("corpus_stats", &corpus_stats, py::arg("corpus_path"));
  m.def("recommend", &recommend_visual, py::arg("corpus_path"), py::arg("attribute"), py::arg("order"));
  m.def("compile_schedule", &schedule_script, py::arg("script_json"), py::arg("tracking_path"));
  m.def("render", &render, py::arg("script_path"), py::arg("tracking_path"), py::arg("out_dir"),
        py::arg("tactics_path") = std::nullopt, py::arg("frames_dir") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("run_cli", &run, py::arg("args"));
}
