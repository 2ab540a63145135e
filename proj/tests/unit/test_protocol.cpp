#include "copaint/protocol.hpp"
#include "doctest.h"

using namespace copaint;

namespace {

Json stroke_message(int seq, double y) {
  return {{"type", "stroke"},
          {"seq", seq},
          {"stroke",
           {{"tool", "hard_round"},
            {"base_size", 6},
            {"color", {0.2, 0.4, 0.6}},
            {"smoothing", {{"enabled", true}, {"previous", 0.7}, {"current", 0.3}}},
            {"samples", {{4, y, 0.8, 0}, {28, y, 0.8, 30}}}}}};
}

SessionConfig cfg32() {
  SessionConfig c;
  c.width = c.height = 32;
  c.optim.iterations = 5;
  c.inpaint_budget = 6;
  return c;
}

}  // namespace

TEST_CASE("stroke messages are acknowledged and emit events") {
  Session s(cfg32());
  ProtocolHandler h(s);
  const Json ack = h.handle(stroke_message(7, 10));
  CHECK(ack["type"] == "ack");
  CHECK(ack["seq"] == 7);
  CHECK(ack["result"]["stroke_id"] == 1);
  const auto ev = h.events_since(0);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0]["type"] == "canvas_patch");
  CHECK(ev[0]["seq"] == 1);
  const Canvas tile = import_image(base64_decode(ev[0]["png"].get<std::string>()));
  CHECK(tile.width() == ev[0]["w"]);
  CHECK(ev[1]["type"] == "history_event");
  CHECK(ev[1]["action"] == "stroke");
  CHECK(ev[1]["history_length"] == 1);
  CHECK(h.events_since(1).size() == 1);
  CHECK(h.last_event_seq() == 2);
}

TEST_CASE("errors carry codes and are logged as events") {
  Session s(cfg32());
  ProtocolHandler h(s);
  Json r = h.handle_text("{not json");
  CHECK(r["type"] == "error");
  CHECK(r["code"] == "bad_json");
  r = h.handle(Json{{"type", "teleport"}, {"seq", 3}});
  CHECK(r["code"] == "unknown_type");
  CHECK(r["seq"] == 3);
  r = h.handle(Json{{"type", "complete_step"}, {"seq", 4}});
  CHECK(r["code"] == "no_intent");
  r = h.handle(Json{{"type", "stroke"}, {"seq", 5}, {"stroke", {{"tool", "hard_round"}}}});
  CHECK(r["code"] == "bad_message");
  r = h.handle(Json{{"type", "refine"}, {"seq", 6}, {"stroke_id", "x"}});
  CHECK(r["code"] == "bad_message");
  const auto ev = h.events_since(0);
  REQUIRE(ev.size() == 5);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    CHECK(ev[i]["type"] == "error");
    CHECK(ev[i]["seq"] == i + 1);
  }
  CHECK(ev[1]["request_seq"] == 3);
}

TEST_CASE("reference upload, completion, lasso, inpaint, undo and redo") {
  Session s(cfg32());
  ProtocolHandler h(s);
  Canvas ref(32, 32, Rgb{1, 1, 1});
  for (int y = 8; y < 24; ++y)
    for (int x = 8; x < 24; ++x) ref(x, y) = {0.8, 0.2, 0.1};
  const Bytes png = export_image(ref);
  const std::string id = h.upload_image(png);
  CHECK(id == sha256_hex(png));
  CHECK(h.handle(Json{{"type", "set_reference"}, {"image_id", "nope"}})["code"] == "unknown_image");
  CHECK(h.handle(Json{{"type", "set_reference"}, {"image_id", id}})["type"] == "ack");

  Json r = h.handle(Json{{"type", "complete_step"}, {"count", 3}});
  CHECK(r["result"]["committed"].size() == 3);
  CHECK(r["result"]["complete"] == false);

  r = h.handle(Json{{"type", "lasso"}, {"points", {{8, 8}, {24, 8}, {24, 24}, {8, 24}}}});
  CHECK(r["result"]["active"] == true);
  CHECK(r["result"]["pixels"] == 256);
  r = h.handle(Json{{"type", "inpaint"}, {"label", 1}, {"seed", 9}});
  REQUIRE(r["type"] == "ack");
  CHECK(r["result"]["mask_mse_after"].get<double>() <= r["result"]["mask_mse_before"].get<double>());
  r = h.handle(Json{{"type", "lasso"}, {"points", nullptr}});
  CHECK(r["result"]["active"] == false);

  const std::size_t n = s.history().size();
  CHECK(h.handle(Json{{"type", "undo"}})["result"]["applied"] == true);
  CHECK(h.handle(Json{{"type", "redo"}})["result"]["applied"] == true);
  CHECK(s.history().size() == n);
  CHECK(h.handle(Json{{"type", "redo"}})["result"]["applied"] == false);

  r = h.handle(Json{{"type", "optimize_history"}});
  CHECK(r["result"]["ids"].size() == n);
}

TEST_CASE("refine jobs report their status through events") {
  Session s(cfg32());
  ProtocolHandler h(s);
  s.set_reference(Canvas(32, 32, Rgb{0.5, 0.5, 0.5}));
  h.handle(stroke_message(1, 16));
  const Json r = h.handle(Json{{"type", "refine"}, {"stroke_id", 1}});
  REQUIRE(r["type"] == "ack");
  CHECK(r["result"]["status"] == "pending");
  s.wait_idle();
  bool done = false;
  for (const Json& e : h.events_since(0))
    if (e["type"] == "job_status" && e["status"] == "done") done = true;
  CHECK(done);
  CHECK(h.handle(Json{{"type", "refine"}, {"stroke_id", 77}})["code"] == "unknown_stroke");
}

TEST_CASE("texture uploads become brush tips") {
  Session s(cfg32());
  ProtocolHandler h(s);
  const std::string id = h.upload_image(export_gray(GrayImage(8, 8, 1.0)), true);
  CHECK(s.textures()->contains(id));
  Json m = stroke_message(1, 12);
  m["stroke"]["tool"] = "brush_tip";
  m["stroke"]["texture"] = id;
  CHECK(h.handle(m)["type"] == "ack");
}

TEST_CASE("long poll returns when an event arrives") {
  Session s(cfg32());
  ProtocolHandler h(s);
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    h.handle(stroke_message(1, 5));
  });
  const auto ev = h.events_since(0, 5000);
  t.join();
  CHECK_FALSE(ev.empty());
  CHECK(h.events_since(h.last_event_seq(), 10).empty());
}
