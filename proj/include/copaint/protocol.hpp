#pragma once

// JSON message protocol between a painting client and one Session.
//
// Client messages: {"type", "seq", ...} with type one of stroke, lasso,
// set_reference, optimize_history, complete_step, inpaint, refine, undo, redo.
// Each is answered by {"type": "ack", "seq", "result"} or
// {"type": "error", "seq", "code", "message"}.
//
// Server events, numbered by their own increasing "seq": canvas_patch (tile as
// base64 sRGB PNG), history_event, job_status and error. An error event keeps
// the offending message's seq as "request_seq".

#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "copaint/io.hpp"
#include "copaint/session.hpp"

namespace copaint {

class ProtocolHandler {
 public:
  /// Attaches as the session's listener.
  explicit ProtocolHandler(Session& session, std::size_t max_events = 4096);
  ~ProtocolHandler();
  ProtocolHandler(const ProtocolHandler&) = delete;
  ProtocolHandler& operator=(const ProtocolHandler&) = delete;

  Json handle(const Json& message);
  Json handle_text(std::string_view text);

  /// Stores a PNG for later set_reference or as a brush tip; returns its
  /// content hash.
  std::string upload_image(std::span<const std::uint8_t> png, bool as_texture = false);

  /// Events with seq > since. Waits up to `wait_ms` when none are queued yet.
  std::vector<Json> events_since(std::uint64_t since, int wait_ms = 0);
  std::uint64_t last_event_seq() const;

 private:
  void push_event(Json event);
  Json dispatch(const Json& m);

  Session& session_;
  std::size_t max_events_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t event_seq_ = 0;
  std::vector<Json> events_;  // oldest first, bounded by max_events_
  std::mutex images_mu_;
  std::map<std::string, Canvas> images_;
};

/// Blocking HTTP front end: POST /api/message, POST /api/image[?kind=texture],
/// GET /api/events?since=N[&wait_ms=M], GET /api/canvas (PNG),
/// GET /api/session (session JSON).
void serve_http(Session& session, const std::string& host, int port);

}  // namespace copaint
