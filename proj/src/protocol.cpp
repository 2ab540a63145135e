#include "copaint/protocol.hpp"

#include <chrono>

namespace copaint {

namespace {

Json error_message(const Json& seq, const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"seq", seq}, {"code", code}, {"message", message}};
}

Json ids_json(const std::vector<std::uint64_t>& ids) {
  Json a = Json::array();
  for (auto id : ids) a.push_back(id);
  return a;
}

Json job_json(const RefineJobInfo& j) {
  return {{"job_id", j.job_id},
          {"stroke_id", j.stroke_id},
          {"status", to_string(j.status)},
          {"changed", j.changed},
          {"crop", {j.crop.x, j.crop.y, j.crop.w, j.crop.h}},
          {"error", j.error}};
}

std::int64_t int_arg(const Json& m, const char* key) {
  const auto it = m.find(key);
  if (it == m.end() || !it->is_number_integer())
    throw SessionError("bad_message", std::string("'") + key + "' must be an integer");
  return it->get<std::int64_t>();
}

}  // namespace

ProtocolHandler::ProtocolHandler(Session& session, std::size_t max_events)
    : session_(session), max_events_(max_events) {
  session_.set_listener([this](const SessionEvent& ev) {
    Json j;
    switch (ev.kind) {
      case SessionEvent::Kind::CanvasPatch:
        j = {{"type", "canvas_patch"},
             {"x", ev.rect.x},
             {"y", ev.rect.y},
             {"w", ev.rect.w},
             {"h", ev.rect.h},
             {"png", base64_encode(export_image(ev.tile))}};
        break;
      case SessionEvent::Kind::History:
        j = {{"type", "history_event"},
             {"action", ev.action},
             {"ids", ids_json(ev.ids)},
             {"history_length", ev.history_length}};
        break;
      case SessionEvent::Kind::Job:
        j = {{"type", "job_status"}};
        j.update(job_json(ev.job));
        break;
    }
    push_event(std::move(j));
  });
}

ProtocolHandler::~ProtocolHandler() { session_.set_listener(nullptr); }

void ProtocolHandler::push_event(Json event) {
  {
    std::lock_guard lk(mu_);
    Json e = {{"seq", ++event_seq_}};
    for (auto& [k, v] : event.items()) e[k == "seq" ? "request_seq" : k] = v;
    events_.push_back(std::move(e));
    if (events_.size() > max_events_) events_.erase(events_.begin());
  }
  cv_.notify_all();
}

std::uint64_t ProtocolHandler::last_event_seq() const {
  std::lock_guard lk(mu_);
  return event_seq_;
}

std::vector<Json> ProtocolHandler::events_since(std::uint64_t since, int wait_ms) {
  std::unique_lock lk(mu_);
  if (wait_ms > 0)
    cv_.wait_for(lk, std::chrono::milliseconds(wait_ms), [&] { return event_seq_ > since; });
  std::vector<Json> out;
  for (const auto& e : events_)
    if (e["seq"].get<std::uint64_t>() > since) out.push_back(e);
  return out;
}

std::string ProtocolHandler::upload_image(std::span<const std::uint8_t> png, bool as_texture) {
  const std::string id = sha256_hex(png);
  if (as_texture) {
    session_.add_texture(import_gray(png), id);
  } else {
    Canvas c = import_image(png);
    std::lock_guard lk(images_mu_);
    images_[id] = std::move(c);
  }
  return id;
}

Json ProtocolHandler::handle_text(std::string_view text) {
  Json m;
  try {
    m = Json::parse(text);
  } catch (const Json::parse_error& e) {
    Json err = error_message(nullptr, "bad_json", e.what());
    push_event(err);
    return err;
  }
  return handle(m);
}

Json ProtocolHandler::handle(const Json& m) {
  const Json seq = m.is_object() && m.contains("seq") ? m["seq"] : Json(nullptr);
  try {
    return {{"type", "ack"}, {"seq", seq}, {"result", dispatch(m)}};
  } catch (const SessionError& e) {
    Json err = error_message(seq, e.code(), e.what());
    push_event(err);
    return err;
  } catch (const FormatError& e) {
    Json err = error_message(seq, "bad_message", e.what());
    push_event(err);
    return err;
  } catch (const std::exception& e) {
    Json err = error_message(seq, "internal", e.what());
    push_event(err);
    return err;
  }
}

Json ProtocolHandler::dispatch(const Json& m) {
  if (!m.is_object() || !m.contains("type") || !m["type"].is_string())
    throw SessionError("bad_message", "a message needs a string 'type'");
  const std::string type = m["type"].get<std::string>();

  if (type == "stroke") {
    if (!m.contains("stroke")) throw SessionError("bad_message", "stroke: missing 'stroke'");
    const StrokeRecord r = stroke_from_json(m["stroke"], "stroke", nullptr);
    return {{"stroke_id", session_.apply_user_stroke(r)}};
  }
  if (type == "lasso") {
    const auto it = m.find("points");
    if (it == m.end() || it->is_null()) {
      session_.clear_lasso();
      return {{"active", false}};
    }
    if (!it->is_array()) throw SessionError("bad_message", "lasso: 'points' must be an array");
    std::vector<Point2> pts;
    for (const auto& p : *it) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw SessionError("bad_message", "lasso: each point must be [x, y]");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    session_.set_lasso_polygon(pts);
    return {{"active", true}, {"pixels", session_.lasso()->count()}};
  }
  if (type == "set_reference") {
    const auto it = m.find("image_id");
    if (it == m.end() || !it->is_string())
      throw SessionError("bad_message", "set_reference: missing 'image_id'");
    Canvas ref;
    {
      std::lock_guard lk(images_mu_);
      const auto img = images_.find(it->get<std::string>());
      if (img == images_.end()) throw SessionError("unknown_image", "no uploaded image with that id");
      ref = img->second;
    }
    session_.set_reference(std::move(ref));
    return Json::object();
  }
  if (type == "optimize_history") return {{"ids", ids_json(session_.optimize_history())}};
  if (type == "complete_step") {
    const std::int64_t count = m.contains("count") ? int_arg(m, "count") : 1;
    if (count < 1) throw SessionError("bad_message", "complete_step: count must be >= 1");
    std::vector<std::uint64_t> ids;
    bool complete = false;
    std::string reason;
    for (std::int64_t i = 0; i < count && !complete; ++i) {
      const CompletionResult r = session_.stroke_completion_step();
      if (r.stroke_id) ids.push_back(*r.stroke_id);
      complete = r.complete;
      reason = r.reason;
    }
    Json out = {{"committed", ids_json(ids)}, {"complete", complete}};
    if (complete) out["reason"] = reason;
    return out;
  }
  if (type == "inpaint") {
    const auto label = static_cast<std::int32_t>(int_arg(m, "label"));
    const auto seed = static_cast<std::uint64_t>(int_arg(m, "seed"));
    const InpaintResult r = session_.region_inpaint(label, seed);
    return {{"ids", ids_json(r.ids)},
            {"mask_mse_before", r.mask_mse_before},
            {"mask_mse_after", r.mask_mse_after}};
  }
  if (type == "refine") {
    const auto id = int_arg(m, "stroke_id");
    if (id < 0) throw SessionError("unknown_stroke", "stroke ids are nonnegative");
    return job_json(session_.dynamic_brush_refine(static_cast<std::uint64_t>(id)));
  }
  if (type == "undo") return {{"applied", session_.undo()}};
  if (type == "redo") return {{"applied", session_.redo()}};
  throw SessionError("unknown_type", "unknown message type '" + type + "'");
}

}  // namespace copaint
