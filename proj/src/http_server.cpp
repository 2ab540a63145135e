#include "httplib.h"

#include <iostream>

#include "copaint/protocol.hpp"

namespace copaint {

void serve_http(Session& session, const std::string& host, int port) {
  ProtocolHandler handler(session);
  httplib::Server server;
  const auto json_reply = [](httplib::Response& res, const Json& j) {
    res.set_content(j.dump(), "application/json");
  };

  server.Post("/api/message", [&](const httplib::Request& req, httplib::Response& res) {
    const Json reply = handler.handle_text(req.body);
    if (reply["type"] == "error") res.status = 400;
    json_reply(res, reply);
  });
  server.Post("/api/image", [&](const httplib::Request& req, httplib::Response& res) {
    try {
      const bool texture = req.get_param_value("kind") == "texture";
      const std::string id = handler.upload_image(
          std::span(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()), texture);
      json_reply(res, {{"image_id", id}});
    } catch (const std::exception& e) {
      res.status = 400;
      json_reply(res, {{"type", "error"}, {"seq", nullptr}, {"code", "bad_image"}, {"message", e.what()}});
    }
  });
  server.Get("/api/events", [&](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t since = 0;
    int wait_ms = 0;
    try {
      if (req.has_param("since")) since = std::stoull(req.get_param_value("since"));
      if (req.has_param("wait_ms")) wait_ms = std::clamp(std::stoi(req.get_param_value("wait_ms")), 0, 30000);
    } catch (const std::exception&) {
      res.status = 400;
      return;
    }
    Json events = Json::array();
    for (auto& e : handler.events_since(since, wait_ms)) events.push_back(std::move(e));
    json_reply(res, {{"events", events}, {"last_seq", handler.last_event_seq()}});
  });
  server.Get("/api/canvas", [&](const httplib::Request&, httplib::Response& res) {
    const Bytes png = export_image(session.canvas());
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  });
  server.Get("/api/session", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(save_session(session.to_file()), "application/json");
  });

  std::cerr << "serving on http://" << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on port " + std::to_string(port));
}

}  // namespace copaint
