#include "contourlab/xp_server.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "httplib.h"
#include "json.hpp"

#include "contourlab/digest.hpp"
#include "contourlab/error.hpp"
#include "contourlab/rng.hpp"
#include "contourlab/variant.hpp"

namespace contourlab {

namespace fs = std::filesystem;
using nlohmann::json;

ServeFile load_serve_file(const std::string& path, ServeFile out) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("serve config: ") + e.what());
  }
  const auto set = [&tree](const char* key, auto& value) {
    if (tree.get_child_optional(key)) value = tree.get<std::decay_t<decltype(value)>>(key);
  };
  try {
    auto& s = out.service;
    set("manifest", s.manifest_path);
    set("log_dir", s.log_dir);
    set("seed", s.seed);
    set("host", out.host);
    set("port", out.port);
    auto& sc = s.session;
    set("practice_trials", sc.practice_trials);
    set("blocks", sc.blocks);
    set("trials_per_block", sc.trials_per_block);
    set("frame_tolerance", sc.frame_tolerance);
    set("stim_ms", sc.timing.stim_ms);
    set("isi_ms", sc.timing.isi_ms);
    set("response_window_ms", sc.timing.response_window_ms);
    set("iti_ms", sc.timing.iti_ms);
  } catch (const boost::property_tree::ptree_error& e) {
    throw UsageError(std::string("serve config: ") + e.what());
  }
  return out;
}

namespace {

std::string now_iso() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(ms));
  return buf;
}

HttpReply reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }
HttpReply error_reply(int status, const std::string& message) { return reply(status, json{{"error", message}}); }

std::string line_color_of(const std::string& condition, const std::string& variant_id) {
  for (LineColor c : {LineColor::Black, LineColor::White, LineColor::BlackWhiteBlack})
    if (condition == to_string(c)) return condition;
  try {
    return std::string(to_string(find_variant(variant_id).line_color));
  } catch (const Error&) {
    return condition;
  }
}

}  // namespace

struct ExperimentService::State {
  std::mutex mutex;
  Session session;
  std::ofstream log;
};

ExperimentService::ExperimentService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  manifest_ = read_manifest(cfg_.manifest_path);
  for (const auto& e : manifest_.entries)
    stimulus_files_[sha256_hex(e.image_path).substr(0, 20) + ".png"] = manifest_.image_file(e);
  if (cfg_.log_dir.empty()) throw UsageError("experiment service needs a log directory");
  fs::create_directories(cfg_.log_dir);
  std::vector<fs::path> logs;
  for (const auto& f : fs::directory_iterator(cfg_.log_dir))
    if (f.path().extension() == ".jsonl") logs.push_back(f.path());
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    auto state = std::make_unique<State>();
    state->session = replay_log(path.string());
    state->log.open(path, std::ios::app);
    sessions_[state->session.session_id] = std::move(state);
    ++created_;
  }
}

ExperimentService::~ExperimentService() = default;

std::string ExperimentService::stimulus_url(const std::string& image_path) const {
  return "/stimuli/" + sha256_hex(image_path).substr(0, 20) + ".png";
}

std::string ExperimentService::log_path(const std::string& session_id) const {
  return (fs::path(cfg_.log_dir) / (session_id + ".jsonl")).string();
}

ExperimentService::State* ExperimentService::find(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : it->second.get();
}

std::optional<Session> ExperimentService::session_snapshot(const std::string& session_id) const {
  State* st = find(session_id);
  if (!st) return std::nullopt;
  std::lock_guard lock(st->mutex);
  return st->session;
}

HttpReply ExperimentService::create_session(const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  if (!req.contains("observer_code") || !req["observer_code"].is_string())
    return error_reply(400, "observer_code is required");
  const std::string observer = req["observer_code"];
  const std::string condition = req.value("condition", manifest_.header.variant_id);
  const std::string color = line_color_of(condition, manifest_.header.variant_id);

  std::lock_guard lock(mutex_);
  bool seen_color = false;
  for (const auto& [id, st] : sessions_) {
    std::lock_guard slock(st->mutex);
    if (st->session.observer_code == observer &&
        line_color_of(st->session.condition, st->session.variant_id) == color)
      seen_color = true;
  }
  const bool practice = req.contains("practice") ? req["practice"].get<bool>() : !seen_color;
  const std::uint64_t index = created_;
  const std::uint64_t seed = derive_seed(cfg_.seed, "session", index);
  char id[40];
  std::snprintf(id, sizeof id, "s%06llu-%08llx", static_cast<unsigned long long>(index),
                static_cast<unsigned long long>(seed >> 32));

  auto state = std::make_unique<State>();
  try {
    state->session = create_session_plan(id, observer, condition, practice, seed);
  } catch (const UsageError& e) {
    return error_reply(400, e.what());
  } catch (const ConstraintError& e) {
    return error_reply(422, e.what());
  }
  state->log.open(log_path(id), std::ios::out | std::ios::trunc);
  if (!state->log) return error_reply(500, "cannot create session log");
  state->log << session_header(state->session).dump() << "\n" << std::flush;
  ++created_;
  const Session& s = state->session;
  json out{{"session_id", s.session_id},
           {"observer_code", s.observer_code},
           {"condition", s.condition},
           {"variant_id", s.variant_id},
           {"practice_trials", practice ? s.config.practice_trials : 0},
           {"main_trials", s.config.blocks * s.config.trials_per_block},
           {"total_trials", s.plan.size()},
           {"timing_overrides", s.overrides}};
  sessions_[s.session_id] = std::move(state);
  return reply(201, out);
}

Session ExperimentService::create_session_plan(const std::string& id, const std::string& observer,
                                               const std::string& condition, bool practice, std::uint64_t seed) {
  return contourlab::create_session(id, observer, condition, manifest_, cfg_.session, practice, seed, now_iso());
}

HttpReply ExperimentService::next_trial(const std::string& session_id) {
  State* st = find(session_id);
  if (!st) return error_reply(404, "unknown session " + session_id);
  std::lock_guard lock(st->mutex);
  const Session& s = st->session;
  const TrialPlan* p = s.current();
  if (!p) return reply(200, json{{"done", true}, {"total", s.plan.size()}});
  json trial = to_json(*p, false);
  trial["first_url"] = stimulus_url(p->first.image_path);
  trial["second_url"] = stimulus_url(p->second.image_path);
  trial["index"] = s.records.size();
  trial["total"] = s.plan.size();
  return reply(200, json{{"done", false}, {"trial", trial}});
}

HttpReply ExperimentService::submit_response(const std::string& session_id, const std::string& trial_id,
                                             const std::string& body) {
  State* st = find(session_id);
  if (!st) return error_reply(404, "unknown session " + session_id);
  int tid = 0;
  try {
    std::size_t used = 0;
    tid = std::stoi(trial_id, &used);
    if (used != trial_id.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    return error_reply(400, "bad trial id '" + trial_id + "'");
  }
  int response = 0;
  double rt = 0.0;
  ClientTiming timing;
  try {
    const json req = json::parse(body);
    const json& r = req.at("response");
    if (r.is_string() && r.get<std::string>() == "timeout") response = 0;
    else if (r.is_number_integer()) response = r.get<int>();
    else if (r.is_string()) response = std::stoi(r.get<std::string>());
    else return error_reply(400, "response must be 1, 2 or \"timeout\"");
    if (response != 1 && response != 2 && !(r.is_string() && r.get<std::string>() == "timeout"))
      return error_reply(400, "response must be 1, 2 or \"timeout\"");
    rt = req.at("rt_ms").get<double>();
    const json& t = req.at("client_timing");
    timing.stimulus_ms = t.at("stimulus_ms").get<std::vector<double>>();
    timing.isi_ms = t.at("isi_ms").get<double>();
    timing.refresh_hz = t.value("refresh_hz", 60.0);
  } catch (const std::exception& e) {
    return error_reply(400, std::string("malformed response body: ") + e.what());
  }

  std::lock_guard lock(st->mutex);
  TrialRecord rec;
  try {
    rec = make_record(st->session, tid, response, rt, timing, now_iso());
  } catch (const SubmitError& e) {
    return error_reply(e.kind == SubmitError::Kind::Invalid ? 400 : 409, e.what());
  }
  st->log << to_json(rec).dump() << "\n" << std::flush;
  if (!st->log) return error_reply(500, "cannot append to the session log");
  st->session.records.push_back(rec);
  return reply(200, json{{"correct", rec.correct},
                         {"timeout", rec.response == "timeout"},
                         {"timing_flagged", rec.timing_flagged},
                         {"done", st->session.complete()}});
}

HttpReply ExperimentService::summary() const {
  std::vector<Session> snapshot;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, st] : sessions_) {
      std::lock_guard slock(st->mutex);
      snapshot.push_back(st->session);
    }
  }
  try {
    return reply(200, to_json(summarize(snapshot)));
  } catch (const ConstraintError& e) {
    return error_reply(409, e.what());
  }
}

HttpReply ExperimentService::stimulus(const std::string& name) const {
  auto it = stimulus_files_.find(name);
  if (it == stimulus_files_.end()) return error_reply(404, "unknown stimulus");
  std::ifstream in(it->second, std::ios::binary);
  if (!in) return error_reply(404, "stimulus file missing");
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return {200, bytes.str(), "image/png"};
}

struct HttpServer::Impl {
  explicit Impl(ExperimentService& s) : service(s) {}
  ExperimentService& service;
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const HttpReply& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(ExperimentService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.create_session(req.body));
  });
  srv.Get(R"(/sessions/([^/]+)/next)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.next_trial(req.matches[1]));
  });
  srv.Post(R"(/sessions/([^/]+)/trials/([^/]+)/response)",
           [&svc](const httplib::Request& req, httplib::Response& res) {
             send(res, svc.submit_response(req.matches[1], req.matches[2], req.body));
           });
  srv.Get("/summary", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.summary()); });
  srv.Get(R"(/stimuli/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.stimulus(req.matches[1]));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace contourlab
