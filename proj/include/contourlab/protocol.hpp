#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include "json.hpp"

#include "contourlab/canvas.hpp"
#include "contourlab/classifier.hpp"

namespace contourlab {

// Newline-delimited JSON. The server speaks first:
//   {"hello":{"protocol":1,"name":..,"capabilities":["classify","patch_logits"],
//             "class_count":N,"positive_label":0|1 (optional)}}
// then answers each request
//   {"id":7,"op":"classify"|"patch_logits","image":{"w","h","channels","png"},"class_set":[..]}
// with {"id":7,"z":[..]} | {"id":7,"grid":{"h","w","patch","stride","values",
// "offset_x","offset_y"}} | {"id":7,"error":"..."}. Responses may arrive in any order.

inline constexpr int kProtocolVersion = 1;

nlohmann::json hello_message(const ClassifierInfo& info);
/// Throws ProtocolError on a malformed handshake.
ClassifierInfo parse_hello(const nlohmann::json& msg);

nlohmann::json encode_image(const Canvas& image);
Canvas decode_image(const nlohmann::json& j);
nlohmann::json grid_to_json(const PatchLogitGrid& g);
PatchLogitGrid grid_from_json(const nlohmann::json& j);

/// Answers one request. Request-level failures become error responses.
nlohmann::json handle_request(Classifier& c, const nlohmann::json& request);

/// Serves one connection: handshake, then requests until end of input.
void serve_protocol(Classifier& c, int in_fd, int out_fd);

/// Listens on "tcp:<host>:<port>" or "unix:<path>" and serves connections one
/// at a time until `stop` is set. `on_listen` receives the bound TCP port (0
/// for unix sockets) once accepting.
void serve_socket(Classifier& c, const std::string& address, const std::atomic<bool>& stop,
                  const std::function<void(int)>& on_listen = {});

/// Client side of the protocol. `kind` is exec, tcp or unix.
std::unique_ptr<Classifier> connect_remote(const std::string& kind, const std::string& address,
                                           double timeout_s);

}  // namespace contourlab
