#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "rallyviz/error.h"
#include "rallyviz/pyramid.h"
#include "rallyviz/recommender.h"
#include "rallyviz/renderer.h"
#include "rallyviz/scheduler.h"
#include "rallyviz/script.h"

namespace httplib {
class Server;
}

namespace rallyviz {

/// Validation failure that carries one diagnostic per offending input file.
class InputError : public Error {
 public:
  explicit InputError(nlohmann::json diagnostics);
  const nlohmann::json& diagnostics() const { return diagnostics_; }

 private:
  nlohmann::json diagnostics_;
};

struct ServiceConfig {
  std::string data_dir = "rallyviz-data";
  std::optional<std::string> corpus_path;  // default corpus for new projects
  AnalysisOptions analysis;
  ScheduleOptions schedule;
  RenderOptions render;
};

/// A preview frame as served: SVG bytes plus a strong validator.
struct Preview {
  std::string svg;
  std::string etag;
  int source_frame = 0;
  FrameKind kind = FrameKind::Play;
};

/// Project store behind the HTTP API. Every method is safe to call from
/// several threads: distinct projects proceed in parallel, mutations of one
/// project are serialized, reads share a lock. Errors are thrown as Error.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  /// body: {"tracking": {...}, "tactics": {...}?, "corpus": {...}?}.
  nlohmann::json create_project(const nlohmann::json& body);
  nlohmann::json project_summary(const std::string& project_id);
  std::vector<std::string> project_ids();

  nlohmann::json timeline(const std::string& project_id);
  nlohmann::json pyramid(const std::string& project_id, std::optional<FrameSpan> brush_span);
  nlohmann::json attributes(const std::string& project_id, const std::string& subject, int frame,
                            const std::string& purpose);

  /// body: {"script_id"?, "subject", "frame", "attributes": [...], "purpose"?, "order"?, "clip"?}.
  nlohmann::json add_selections(const std::string& project_id, const nlohmann::json& body);
  /// body: {"order", "anchor_frame"?, "zigzag"?, "timefork"?}.
  nlohmann::json set_order(const std::string& project_id, const std::string& script_id, const nlohmann::json& body);
  nlohmann::json patch_mapping(const std::string& project_id, const std::string& script_id,
                               const std::string& mapping_id, const nlohmann::json& patch);
  nlohmann::json delete_mapping(const std::string& project_id, const std::string& script_id,
                                const std::string& mapping_id);
  nlohmann::json get_script(const std::string& project_id, const std::string& script_id);
  nlohmann::json put_script(const std::string& project_id, const std::string& script_id, const nlohmann::json& doc);

  nlohmann::json schedule(const std::string& project_id, const std::string& script_id);
  Preview preview(const std::string& project_id, const std::string& script_id, int output_index);
  /// Writes the render under <data_dir>/projects/<id>/exports/<script_id>.
  nlohmann::json export_script(const std::string& project_id, const std::string& script_id);

 private:
  struct Compiled {
    std::string script_digest;
    RenderSchedule schedule;
    std::vector<OverlayFrame> overlays;
  };
  struct Project {
    std::string id;
    std::string dir;
    Rally rally;
    std::vector<ClipAnnotation> corpus;
    MappingStats stats;
    std::map<std::string, AugmentationScript> scripts;
    std::map<std::string, std::string> compiled_digests;  // script_id -> schedule digest
    std::shared_mutex lock;
    std::mutex cache_lock;
    std::map<std::string, std::shared_ptr<const Compiled>> cache;
  };

  std::shared_ptr<Project> find(const std::string& project_id);
  std::shared_ptr<Project> load(const std::string& project_id);
  void persist(const Project& p) const;
  std::shared_ptr<const Compiled> compiled(Project& p, const std::string& script_id);
  AugmentationScript& script_of(Project& p, const std::string& script_id);
  void touch(Project& p, const std::string& script_id);

  ServiceConfig config_;
  std::vector<ClipAnnotation> default_corpus_;
  std::mutex store_lock_;
  std::map<std::string, std::shared_ptr<Project>> projects_;
  int next_id_ = 1;
};

/// Maps an Error to its HTTP status.
int http_status(const Error& e);

/// Registers every route of the API on `server`.
void install_routes(httplib::Server& server, Service& service);

/// Blocking listen on host:port.
bool serve(Service& service, const std::string& host, int port);

}  // namespace rallyviz
