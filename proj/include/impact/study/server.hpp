#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>

#include "impact/study/store.hpp"

namespace httplib {
class Server;
}

namespace impact::study {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;                 // 0 picks a free port
  std::filesystem::path ui_dir;    // optional static mount at /ui
};

/// Reads STUDY_BIND_ADDR ("host:port") when set, else the defaults.
ServerConfig server_config_from_env();

/// JSON API over a StudyStore:
///   GET  /api/tasks?rater=<token>   tasks assigned to the rater with done flags
///   GET  /api/task/<id>             blinded task payload
///   POST /api/votes                 {task_id, rater, choice|likert}
///   GET  /api/results               aggregated results
/// Errors come back as {"error": kind, "message": text}.
class StudyServer {
 public:
  StudyServer(std::shared_ptr<StudyStore> store, ServerConfig config);
  ~StudyServer();

  /// Binds the socket and returns the bound port without serving.
  int bind();
  /// Serves until stop(); binds first if needed.
  void run();
  void stop();
  bool running() const;

 private:
  void install_routes();

  std::shared_ptr<StudyStore> store_;
  ServerConfig config_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = -1;
};

}  // namespace impact::study
