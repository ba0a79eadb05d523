#include "impact/study/server.hpp"

#include <cstdlib>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "impact/common/error.hpp"
#include "impact/study/protocol.hpp"

namespace impact::study {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

int status_for(const Error& e) {
  const std::string& k = e.kind();
  if (k == "UnknownTask" || k == "NotFound") return 404;
  if (k == "InvalidLikert" || k == "ConfigError") return 400;
  if (k == "NoVotes") return 409;
  return 500;
}

// Wraps a handler so domain errors become JSON replies.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e), e.kind(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "BadRequest", e.what());
    } catch (const std::exception& e) {
      spdlog::error("study server: {}", e.what());
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

}  // namespace

ServerConfig server_config_from_env() {
  ServerConfig c;
  if (const char* addr = std::getenv("STUDY_BIND_ADDR"); addr && *addr) {
    const std::string s(addr);
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) throw ConfigError("STUDY_BIND_ADDR must be host:port, got '" + s + "'");
    c.host = s.substr(0, colon);
    try {
      c.port = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("STUDY_BIND_ADDR has a bad port: '" + s + "'");
    }
  }
  return c;
}

StudyServer::StudyServer(std::shared_ptr<StudyStore> store, ServerConfig config)
    : store_(std::move(store)), config_(std::move(config)), http_(std::make_unique<httplib::Server>()) {
  if (!store_) throw PreconditionError("study server needs a store");
  store_->study();  // MissingInput early if the store is empty
  install_routes();
}

StudyServer::~StudyServer() { stop(); }

void StudyServer::install_routes() {
  auto& s = *http_;
  const auto store = store_;

  s.Get("/api/tasks", guarded([store](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("rater")) return send_error(res, 400, "BadRequest", "missing rater parameter");
    const std::string rater = req.get_param_value("rater");
    const Study& study = store->study();
    if (!study.raters.count(rater)) return send_error(res, 404, "UnknownRater", "unknown rater");
    const auto votes = store->votes();
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : study.tasks) {
      if (t.assigned_rater != rater) continue;
      bool done = false;
      for (const auto& v : *votes)
        if (v.task_id == t.task_id && v.rater_id == rater) done = true;
      out.push_back({{"task_id", t.task_id}, {"kind", to_string(t.kind)}, {"done", done}});
    }
    send_json(res, 200, {{"tasks", out}});
  }));

  s.Get(R"(/api/task/([A-Za-z0-9_-]+))", guarded([store](const httplib::Request& req, httplib::Response& res) {
    const Study& study = store->study();
    const auto* task = study.find_task(req.matches[1]);
    if (!task) throw UnknownTask(req.matches[1]);
    send_json(res, 200, task_payload(study, *task));
  }));

  s.Post("/api/votes", guarded([store](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    if (!body.is_object() || !body.contains("task_id") || !body.contains("rater"))
      return send_error(res, 400, "BadRequest", "vote needs task_id and rater");
    Vote v;
    v.task_id = body.at("task_id").get<std::string>();
    v.rater_id = body.at("rater").get<std::string>();
    if (body.contains("choice") && !body["choice"].is_null()) {
      try {
        v.choice = side_from_string(body["choice"].get<std::string>());
      } catch (const Error& e) {
        return send_error(res, 400, e.kind(), e.what());
      }
    }
    if (body.contains("likert") && !body["likert"].is_null()) {
      if (!body["likert"].is_number_integer()) return send_error(res, 400, "BadRequest", "likert must be an integer");
      const long value = body["likert"].get<long>();
      if (value < 1 || value > 5) throw InvalidLikert(value);
      v.likert = static_cast<int>(value);
    }
    const Study& study = store->study();
    const auto* task = study.find_task(v.task_id);
    if (!task) throw UnknownTask(v.task_id);
    if (task->assigned_rater != v.rater_id) return send_error(res, 403, "Forbidden", "task is not assigned to this rater");
    try {
      const auto ack = store->record_vote(v);
      send_json(res, 200, {{"recorded", ack.recorded}, {"superseded", ack.superseded}});
    } catch (const PreconditionError& e) {
      send_error(res, 400, e.kind(), e.what());
    }
  }));

  s.Get("/api/results", guarded([store](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, aggregate_results(store->study(), *store->votes()));
  }));

  if (!config_.ui_dir.empty() && !s.set_mount_point("/ui", config_.ui_dir.string()))
    throw ConfigError("cannot mount ui directory " + config_.ui_dir.string());
}

int StudyServer::bind() {
  if (port_ > 0) return port_;
  if (config_.port == 0) {
    port_ = http_->bind_to_any_port(config_.host);
  } else {
    port_ = http_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) throw IoError("cannot bind study server to " + config_.host + ":" + std::to_string(config_.port));
  return port_;
}

void StudyServer::run() {
  bind();
  spdlog::info("study server listening on {}:{}", config_.host, port_);
  http_->listen_after_bind();
}

void StudyServer::stop() {
  if (http_) http_->stop();
}

bool StudyServer::running() const { return http_ && http_->is_running(); }

}  // namespace impact::study
