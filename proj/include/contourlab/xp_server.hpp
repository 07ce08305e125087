#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "contourlab/dataset.hpp"
#include "contourlab/xp_session.hpp"

namespace contourlab {

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceConfig {
  std::string manifest_path;
  std::string log_dir;
  std::uint64_t seed = 0;
  SessionConfig session;
};

/// Loads a `serve` configuration: a key = value file with keys manifest,
/// log_dir, seed, port, host, practice_trials, blocks, trials_per_block,
/// stim_ms, isi_ms, response_window_ms, iti_ms, frame_tolerance.
struct ServeFile {
  ServiceConfig service;
  std::string host = "127.0.0.1";
  int port = 8080;
};
ServeFile load_serve_file(const std::string& path, ServeFile defaults = {});

/// The HTTP API as plain functions of request bodies, so it can be exercised
/// without sockets. Existing logs in log_dir are replayed on start.
class ExperimentService {
 public:
  explicit ExperimentService(ServiceConfig cfg);
  ~ExperimentService();

  /// Body: {"observer_code": .., "condition": .., "practice": optional bool}.
  /// Practice is prepended by default the first time an observer meets a line color.
  HttpReply create_session(const std::string& body);
  HttpReply next_trial(const std::string& session_id);
  /// Body: {"response": 1|2|"timeout", "rt_ms": .., "client_timing":
  /// {"stimulus_ms": [a, b], "isi_ms": .., "refresh_hz": ..}}.
  HttpReply submit_response(const std::string& session_id, const std::string& trial_id, const std::string& body);
  HttpReply summary() const;
  HttpReply stimulus(const std::string& name) const;

  /// Opaque URL of a stimulus image (file names would reveal the answer).
  std::string stimulus_url(const std::string& image_path) const;
  std::optional<Session> session_snapshot(const std::string& session_id) const;
  std::string log_path(const std::string& session_id) const;

 private:
  struct State;
  State* find(const std::string& session_id) const;
  Session create_session_plan(const std::string& id, const std::string& observer, const std::string& condition,
                              bool practice, std::uint64_t seed);

  ServiceConfig cfg_;
  Manifest manifest_;
  std::map<std::string, std::string> stimulus_files_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<State>> sessions_;
  std::uint64_t created_ = 0;
};

/// cpp-httplib front end for an ExperimentService.
class HttpServer {
 public:
  explicit HttpServer(ExperimentService& service);
  ~HttpServer();
  /// Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace contourlab
