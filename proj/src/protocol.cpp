#include "contourlab/protocol.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <future>
#include <map>
#include <mutex>
#include <thread>

#include "contourlab/digest.hpp"
#include "contourlab/error.hpp"
#include "contourlab/png_io.hpp"

namespace contourlab {

using nlohmann::json;

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      const ssize_t m = ::write(fd, data.data() + done, data.size() - done);
      if (m < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("write failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(m);
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("write failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

void send_line(int fd, const json& msg) { write_all(fd, msg.dump() + "\n"); }

// Splits a byte stream into lines.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  // Returns false at end of input. With timeout_ms >= 0, returns false and sets
  // `timed_out` if nothing arrives in time.
  bool next(std::string& line, int timeout_ms = -1, bool* timed_out = nullptr) {
    if (timed_out) *timed_out = false;
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return true;
      }
      if (eof_) {
        if (buffer_.empty()) return false;
        line = std::move(buffer_);
        buffer_.clear();
        return true;
      }
      if (timeout_ms >= 0) {
        pollfd p{fd_, POLLIN, 0};
        const int r = ::poll(&p, 1, timeout_ms);
        if (r == 0) {
          if (timed_out) *timed_out = true;
          return false;
        }
        if (r < 0 && errno == EINTR) continue;
      }
      char chunk[65536];
      const ssize_t n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        eof_ = true;
        continue;
      }
      if (n == 0) {
        eof_ = true;
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

std::vector<std::string> capability_names(const ClassifierInfo& info) {
  std::vector<std::string> caps;
  if (info.scores) caps.push_back("classify");
  if (info.patch_logits) caps.push_back("patch_logits");
  return caps;
}

}  // namespace

json hello_message(const ClassifierInfo& info) {
  json hello{{"protocol", kProtocolVersion},
             {"name", info.name},
             {"capabilities", capability_names(info)},
             {"class_count", info.class_count}};
  if (info.positive_label) hello["positive_label"] = *info.positive_label;
  return json{{"hello", hello}};
}

ClassifierInfo parse_hello(const json& msg) {
  try {
    const json& h = msg.at("hello");
    const int version = h.at("protocol").get<int>();
    if (version != kProtocolVersion)
      throw ProtocolError("handshake: unsupported protocol version " + std::to_string(version));
    ClassifierInfo info;
    info.name = h.value("name", std::string("remote"));
    for (const auto& cap : h.at("capabilities")) {
      const auto name = cap.get<std::string>();
      if (name == "classify") info.scores = true;
      else if (name == "patch_logits") info.patch_logits = true;
    }
    info.class_count = h.at("class_count").get<int>();
    if (info.class_count < 1) throw ProtocolError("handshake: class_count must be positive");
    if (h.contains("positive_label")) {
      const int label = h.at("positive_label").get<int>();
      if (label != 0 && label != 1) throw ProtocolError("handshake: positive_label must be 0 or 1");
      info.positive_label = label;
    }
    if (!info.scores && !info.patch_logits) throw ProtocolError("handshake declares no capabilities");
    return info;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed handshake: ") + e.what());
  }
}

json encode_image(const Canvas& image) {
  return json{{"w", image.width},
              {"h", image.height},
              {"channels", image.channels},
              {"png", base64_encode(encode_png(image))}};
}

Canvas decode_image(const json& j) {
  const auto bytes = base64_decode(j.at("png").get<std::string>());
  Canvas c = decode_png(bytes);
  if (c.width != j.at("w").get<int>() || c.height != j.at("h").get<int>())
    throw ProtocolError("image size does not match its PNG");
  return c;
}

json grid_to_json(const PatchLogitGrid& g) {
  return json{{"h", g.rows},      {"w", g.cols},          {"patch", g.patch}, {"stride", g.stride},
              {"values", g.values}, {"offset_x", g.offset_x}, {"offset_y", g.offset_y}};
}

PatchLogitGrid grid_from_json(const json& j) {
  PatchLogitGrid g;
  g.rows = j.at("h").get<int>();
  g.cols = j.at("w").get<int>();
  g.patch = j.at("patch").get<int>();
  g.stride = j.at("stride").get<int>();
  g.offset_x = j.value("offset_x", 0);
  g.offset_y = j.value("offset_y", 0);
  g.values = j.at("values").get<std::vector<double>>();
  return g;
}

json handle_request(Classifier& c, const json& request) {
  json response{{"id", request.contains("id") ? request["id"] : json()}};
  try {
    const std::string op = request.at("op").get<std::string>();
    const Canvas image = decode_image(request.at("image"));
    if (op == "classify") {
      response["z"] = c.classify(image).z;
    } else if (op == "patch_logits") {
      response["grid"] = grid_to_json(c.patch_logits(image));
    } else {
      response["error"] = "unknown op '" + op + "'";
    }
  } catch (const std::exception& e) {
    response["error"] = e.what();
  }
  return response;
}

void serve_protocol(Classifier& c, int in_fd, int out_fd) {
  send_line(out_fd, hello_message(c.info()));
  LineReader reader(in_fd);
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    json response;
    try {
      response = handle_request(c, json::parse(line));
    } catch (const json::exception& e) {
      response = json{{"id", nullptr}, {"error", std::string("malformed request: ") + e.what()}};
    }
    send_line(out_fd, response);
  }
}

namespace {

struct Endpoint {
  bool unix_socket = false;
  std::string host;
  std::string port;
  std::string path;
};

Endpoint parse_endpoint(const std::string& kind, const std::string& address) {
  Endpoint e;
  if (kind == "unix") {
    e.unix_socket = true;
    e.path = address;
    if (e.path.size() >= sizeof(sockaddr_un{}.sun_path)) throw UsageError("unix socket path too long");
    return e;
  }
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw UsageError("tcp address must be host:port");
  e.host = address.substr(0, colon);
  e.port = address.substr(colon + 1);
  if (e.host.empty()) e.host = "127.0.0.1";
  return e;
}

sockaddr_un unix_address(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  std::strncpy(addr.sun_path, path.c_str(), sizeof addr.sun_path - 1);
  return addr;
}

int connect_socket(const Endpoint& e) {
  if (e.unix_socket) {
    const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw ProtocolError("socket() failed");
    const sockaddr_un addr = unix_address(e.path);
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd);
      throw ProtocolError("cannot connect to unix:" + e.path + ": " + std::strerror(errno));
    }
    return fd;
  }
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(e.host.c_str(), e.port.c_str(), &hints, &res) != 0)
    throw ProtocolError("cannot resolve " + e.host + ":" + e.port);
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProtocolError("cannot connect to tcp:" + e.host + ":" + e.port + ": " + std::strerror(errno));
  return fd;
}

class RemoteClassifier : public Classifier {
 public:
  RemoteClassifier(int read_fd, int write_fd, pid_t child, double timeout_s, std::string label)
      : read_fd_(read_fd), write_fd_(write_fd), child_(child), timeout_(timeout_s), label_(std::move(label)) {
    reader_ = std::thread([this] { read_loop(); });
    if (hello_.wait_for(to_duration(timeout_)) != std::future_status::ready) {
      shutdown();
      throw ProtocolError(label_ + ": no handshake within " + std::to_string(timeout_) + " s");
    }
    try {
      info_ = parse_hello(hello_.get());
    } catch (...) {
      shutdown();
      throw;
    }
    if (info_.name.empty()) info_.name = label_;
    info_.thread_safe = true;
  }

  ~RemoteClassifier() override { shutdown(); }

  const ClassifierInfo& info() const override { return info_; }

 protected:
  Scores do_classify(const Canvas& image) override { return to_scores(wait(send("classify", image))); }

  PatchLogitGrid do_patch_logits(const Canvas& image) override {
    const json r = wait(send("patch_logits", image));
    try {
      return grid_from_json(r.at("grid"));
    } catch (const json::exception& e) {
      throw ProtocolError(label_ + ": malformed grid: " + e.what());
    }
  }

  std::vector<Scores> do_classify_batch(std::span<const Canvas> images, int) override {
    constexpr std::size_t kWindow = 128;
    std::vector<Scores> out(images.size());
    std::map<std::size_t, std::shared_future<json>> in_flight;
    std::size_t next = 0, done = 0;
    while (done < images.size()) {
      while (next < images.size() && in_flight.size() < kWindow) {
        in_flight.emplace(next, send("classify", images[next]));
        ++next;
      }
      auto it = in_flight.begin();
      out[it->first] = to_scores(wait(it->second));
      in_flight.erase(it);
      ++done;
    }
    return out;
  }

 private:
  static std::chrono::milliseconds to_duration(double s) {
    return std::chrono::milliseconds(static_cast<long long>(s * 1000.0));
  }

  std::shared_future<json> send(const std::string& op, const Canvas& image) {
    std::promise<json> promise;
    auto future = promise.get_future().share();
    std::uint64_t id;
    {
      std::lock_guard lock(mutex_);
      if (!broken_.empty()) throw ProtocolError(label_ + ": " + broken_);
      id = next_id_++;
      pending_.emplace(id, std::move(promise));
    }
    json request{{"id", id}, {"op", op}, {"image", encode_image(image)}};
    std::lock_guard lock(write_mutex_);
    try {
      send_line(write_fd_, request);
    } catch (const ProtocolError& e) {
      fail_all(e.what());
      throw ProtocolError(label_ + ": " + e.what());
    }
    return future;
  }

  json wait(const std::shared_future<json>& f) {
    if (f.wait_for(to_duration(timeout_)) != std::future_status::ready)
      throw ProtocolError(label_ + ": request timed out after " + std::to_string(timeout_) + " s");
    json r = f.get();
    if (r.contains("error")) throw ProtocolError(label_ + ": classifier error: " + r["error"].dump());
    return r;
  }

  Scores to_scores(const json& r) const {
    try {
      return {r.at("z").get<std::vector<double>>()};
    } catch (const json::exception& e) {
      throw ProtocolError(label_ + ": malformed scores: " + e.what());
    }
  }

  void fail_all(const std::string& why) {
    std::lock_guard lock(mutex_);
    if (broken_.empty()) broken_ = why;
    for (auto& [id, p] : pending_) p.set_exception(std::make_exception_ptr(ProtocolError(label_ + ": " + why)));
    pending_.clear();
    if (!hello_set_) {
      hello_set_ = true;
      hello_promise_.set_exception(std::make_exception_ptr(ProtocolError(label_ + ": " + why)));
    }
  }

  void read_loop() {
    LineReader reader(read_fd_);
    std::string line;
    while (!stop_) {
      bool timed_out = false;
      if (!reader.next(line, 100, &timed_out)) {
        if (timed_out) continue;
        fail_all("connection closed by classifier");
        return;
      }
      if (line.empty()) continue;
      json msg;
      try {
        msg = json::parse(line);
      } catch (const json::exception&) {
        fail_all("malformed response line");
        return;
      }
      std::lock_guard lock(mutex_);
      if (msg.contains("hello")) {
        if (!hello_set_) {
          hello_set_ = true;
          hello_promise_.set_value(msg);
        }
        continue;
      }
      if (!msg.contains("id") || !msg["id"].is_number_unsigned()) continue;
      auto it = pending_.find(msg["id"].get<std::uint64_t>());
      if (it == pending_.end()) continue;
      it->second.set_value(std::move(msg));
      pending_.erase(it);
    }
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    if (write_fd_ != read_fd_) ::close(write_fd_);
    else ::shutdown(write_fd_, SHUT_WR);
    if (child_ > 0) {
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(child_, nullptr, WNOHANG) == child_) {
          child_ = -1;
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      if (child_ > 0) {
        ::kill(child_, SIGKILL);
        ::waitpid(child_, nullptr, 0);
      }
    }
    stop_ = true;
    if (reader_.joinable()) reader_.join();
    ::close(read_fd_);
    fail_all("classifier closed");
  }

  int read_fd_;
  int write_fd_;
  pid_t child_;
  double timeout_;
  std::string label_;
  ClassifierInfo info_;

  std::mutex mutex_;
  std::mutex write_mutex_;
  std::map<std::uint64_t, std::promise<json>> pending_;
  std::uint64_t next_id_ = 1;
  std::string broken_;
  std::promise<json> hello_promise_;
  std::future<json> hello_ = hello_promise_.get_future();
  bool hello_set_ = false;
  std::atomic<bool> stop_{false};
  bool closed_ = false;
  std::thread reader_;
};

std::unique_ptr<Classifier> spawn(const std::string& command, double timeout_s) {
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0)
    throw ProtocolError("pipe() failed");
  const pid_t pid = ::fork();
  if (pid < 0) throw ProtocolError("fork() failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<RemoteClassifier>(from_child[0], to_child[1], pid, timeout_s, "exec:" + command);
}

}  // namespace

std::unique_ptr<Classifier> connect_remote(const std::string& kind, const std::string& address, double timeout_s) {
  ::signal(SIGPIPE, SIG_IGN);
  if (kind == "exec") return spawn(address, timeout_s);
  if (kind != "tcp" && kind != "unix") throw UsageError("unknown transport '" + kind + "'");
  const int fd = connect_socket(parse_endpoint(kind, address));
  return std::make_unique<RemoteClassifier>(fd, fd, -1, timeout_s, kind + ":" + address);
}

void serve_socket(Classifier& c, const std::string& address, const std::atomic<bool>& stop,
                  const std::function<void(int)>& on_listen) {
  ::signal(SIGPIPE, SIG_IGN);
  const auto colon = address.find(':');
  if (colon == std::string::npos) throw UsageError("listen address must be tcp:host:port or unix:path");
  const std::string kind = address.substr(0, colon);
  if (kind != "tcp" && kind != "unix") throw UsageError("listen address must be tcp:host:port or unix:path");
  const Endpoint e = parse_endpoint(kind, address.substr(colon + 1));

  int fd = -1;
  int bound_port = 0;
  if (e.unix_socket) {
    fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    ::unlink(e.path.c_str());
    const sockaddr_un addr = unix_address(e.path);
    if (fd < 0 || ::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
      throw IoError("cannot bind unix:" + e.path + ": " + std::strerror(errno));
  } else {
    fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(std::stoi(e.port)));
    if (::inet_pton(AF_INET, e.host == "localhost" ? "127.0.0.1" : e.host.c_str(), &addr.sin_addr) != 1)
      throw UsageError("listen host must be an IPv4 address");
    if (fd < 0 || ::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
      throw IoError("cannot bind tcp:" + e.host + ":" + e.port + ": " + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    bound_port = ntohs(addr.sin_port);
  }
  if (::listen(fd, 8) != 0) throw IoError(std::string("listen() failed: ") + std::strerror(errno));
  if (on_listen) on_listen(bound_port);
  while (!stop) {
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int conn = ::accept4(fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (conn < 0) continue;
    try {
      serve_protocol(c, conn, conn);
    } catch (const ProtocolError&) {
      // the peer went away mid-response; keep serving others
    }
    ::close(conn);
  }
  ::close(fd);
  if (e.unix_socket) ::unlink(e.path.c_str());
}

}  // namespace contourlab
