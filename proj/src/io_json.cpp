#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>

#include "copaint/io.hpp"

namespace copaint {

double quantize9(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("quantize9: non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

namespace {

constexpr const char* kSessionFormat = "copaint-session";
constexpr const char* kPlanFormat = "copaint-plan";

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw FormatError(path + ": " + what);
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(child(path, key), "missing");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "not finite");
  return v;
}

double number_field(const Json& j, const std::string& key, const std::string& path) {
  return number(field(j, key, path), child(path, key));
}

std::int64_t integer_field(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number_integer()) fail(child(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::string string_field(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_string()) fail(child(path, key), "expected a string");
  return v.get<std::string>();
}

const Json& array_field(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_array()) fail(child(path, key), "expected an array");
  return v;
}

double clamped(double v, double lo, double hi, const std::string& path, LoadWarnings* w) {
  if (v >= lo && v <= hi) return v;
  if (w) w->clamped.push_back(path);
  return std::clamp(v, lo, hi);
}

double positive(double v, const std::string& path) {
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

Json q(double v) { return quantize9(v); }

Json color_json(const Rgb& c) { return Json::array({q(c.r), q(c.g), q(c.b)}); }

Rgb color_from(const Json& j, const std::string& path, LoadWarnings* w) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected [r, g, b]");
  Rgb c;
  for (int ch = 0; ch < 3; ++ch) {
    const std::string p = index_path(path, static_cast<std::size_t>(ch));
    c[ch] = clamped(number(j[static_cast<std::size_t>(ch)], p), 0.0, 1.0, p, w);
  }
  return c;
}

Json extra_of(const Json& j, const std::set<std::string>& known) {
  Json extra = Json::object();
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) extra[it.key()] = it.value();
  return extra;
}

void append_extra(Json& j, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it)
    if (!j.contains(it.key())) j[it.key()] = it.value();
}

// Stamp parameters without the mode keys.
Json stamp_params(const Stamp& s) {
  Json j = Json::object();
  j["x"] = q(s.x);
  j["y"] = q(s.y);
  if (is_tip_mode(s.mode)) {
    j["r"] = q(s.radius);
  } else {
    j["sigma_x"] = q(s.sigma_x);
    j["sigma_y"] = q(s.sigma_y);
  }
  j["theta"] = q(s.theta);
  if (is_tip_mode(s.mode)) j["p"] = q(s.pressure);
  j["color"] = color_json(s.color);
  return j;
}

Stamp stamp_with_mode(const Json& j, const BrushMode& mode, const std::string& path,
                      LoadWarnings* w) {
  Stamp s;
  s.mode = mode;
  s.x = number_field(j, "x", path);
  s.y = number_field(j, "y", path);
  if (is_tip_mode(mode)) {
    s.radius = positive(number_field(j, "r", path), child(path, "r"));
    s.pressure = clamped(number_field(j, "p", path), 0.0, 1.0, child(path, "p"), w);
  } else {
    s.sigma_x = positive(number_field(j, "sigma_x", path), child(path, "sigma_x"));
    s.sigma_y = positive(number_field(j, "sigma_y", path), child(path, "sigma_y"));
  }
  s.theta = clamped(number_field(j, "theta", path), -std::numbers::pi, std::numbers::pi,
                    child(path, "theta"), w);
  s.color = color_from(field(j, "color", path), child(path, "color"), w);
  return s;
}

BrushMode mode_from(const Json& j, const std::string& key, const std::string& path) {
  const std::string name = string_field(j, key, path);
  std::string texture;
  if (name == "brush_tip") texture = string_field(j, "texture", path);
  try {
    return mode_from_name(name, texture);
  } catch (const std::invalid_argument&) {
    fail(child(path, key), "unknown brush mode '" + name + "'");
  }
}

void put_mode(Json& j, const std::string& key, const BrushMode& mode) {
  j[key] = mode_name(mode);
  if (const auto* tip = std::get_if<BrushTip>(&mode)) j["texture"] = tip->texture_id;
}

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("json: ") + e.what());
  }
}

void check_header(const Json& j, const char* format, int version) {
  if (!j.is_object()) throw FormatError("document: expected an object");
  if (string_field(j, "format", "") != format)
    fail("format", std::string("expected '") + format + "'");
  const auto v = integer_field(j, "version", "");
  if (v != version)
    fail("version", "unsupported version " + std::to_string(v) + " (expected " +
                        std::to_string(version) + ")");
}

std::pair<int, int> canvas_size(const Json& j) {
  const Json& c = field(j, "canvas", "");
  const auto w = integer_field(c, "width", "canvas");
  const auto h = integer_field(c, "height", "canvas");
  if (w <= 0 || h <= 0) fail("canvas", "dimensions must be positive");
  return {static_cast<int>(w), static_cast<int>(h)};
}

}  // namespace

Json stamp_to_json(const Stamp& s) {
  Json j = Json::object();
  put_mode(j, "mode", s.mode);
  j.update(stamp_params(s));
  return j;
}

Stamp stamp_from_json(const Json& j, const std::string& path, LoadWarnings* warnings) {
  return stamp_with_mode(j, mode_from(j, "mode", path), path, warnings);
}

Json stroke_to_json(const StrokeRecord& r) {
  Json j = Json::object();
  put_mode(j, "tool", r.tool);
  j["base_size"] = q(r.base_size);
  j["color"] = color_json(r.color);
  j["smoothing"] = {{"enabled", r.smoothing},
                    {"previous", PressureConfig::kSmoothPrevious},
                    {"current", PressureConfig::kSmoothCurrent}};
  Json samples = Json::array();
  for (const auto& s : r.samples)
    samples.push_back(Json::array({q(s.x), q(s.y), q(s.pressure), q(s.t_ms)}));
  j["samples"] = std::move(samples);
  return j;
}

StrokeRecord stroke_from_json(const Json& j, const std::string& path, LoadWarnings* warnings) {
  StrokeRecord r;
  r.tool = mode_from(j, "tool", path);
  r.base_size = positive(number_field(j, "base_size", path), child(path, "base_size"));
  r.color = color_from(field(j, "color", path), child(path, "color"), warnings);
  const Json& sm = field(j, "smoothing", path);
  const Json& enabled = field(sm, "enabled", child(path, "smoothing"));
  if (!enabled.is_boolean()) fail(child(path, "smoothing.enabled"), "expected a boolean");
  r.smoothing = enabled.get<bool>();
  const Json& samples = array_field(j, "samples", path);
  const std::string spath = child(path, "samples");
  if (samples.empty()) fail(spath, "a stroke needs at least one sample");
  double last_t = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string p = index_path(spath, i);
    const Json& a = samples[i];
    if (!a.is_array() || a.size() != 4) fail(p, "expected [x, y, pressure, t_ms]");
    TabletSample s;
    s.x = number(a[0], p + "[0]");
    s.y = number(a[1], p + "[1]");
    s.pressure = clamped(number(a[2], p + "[2]"), 0.0, 1.0, p + "[2]", warnings);
    s.t_ms = number(a[3], p + "[3]");
    if (s.t_ms < last_t) fail(p + "[3]", "timestamps must be nondecreasing");
    last_t = s.t_ms;
    r.samples.push_back(s);
  }
  return r;
}

std::string save_session(const SessionFile& s) {
  Json j = Json::object();
  j["format"] = kSessionFormat;
  j["version"] = s.version;
  j["canvas"] = {{"width", s.width}, {"height", s.height}};
  j["background"] = color_json(s.background);
  j["textures"] = s.textures;
  Json strokes = Json::array();
  for (const auto& e : s.strokes) {
    Json je = Json::object();
    je["id"] = e.id;
    je["origin"] = e.origin;
    if (e.record) je["record"] = stroke_to_json(*e.record);
    if (e.stamps) {
      Json st = Json::array();
      for (const auto& stamp : *e.stamps) st.push_back(stamp_to_json(stamp));
      je["stamps"] = std::move(st);
    }
    append_extra(je, e.extra);
    strokes.push_back(std::move(je));
  }
  j["strokes"] = std::move(strokes);
  append_extra(j, s.extra);
  return j.dump(1) + "\n";
}

SessionFile load_session(std::string_view text, LoadWarnings* warnings) {
  const Json j = parse(text);
  check_header(j, kSessionFormat, kSessionVersion);
  SessionFile s;
  std::tie(s.width, s.height) = canvas_size(j);
  s.background = color_from(field(j, "background", ""), "background", warnings);
  const Json& textures = array_field(j, "textures", "");
  for (std::size_t i = 0; i < textures.size(); ++i) {
    if (!textures[i].is_string()) fail(index_path("textures", i), "expected a string");
    s.textures.push_back(textures[i].get<std::string>());
  }
  const Json& strokes = array_field(j, "strokes", "");
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    const std::string p = index_path("strokes", i);
    const Json& je = strokes[i];
    SessionEntry e;
    const auto id = integer_field(je, "id", p);
    if (id < 0) fail(child(p, "id"), "must be nonnegative");
    e.id = static_cast<std::uint64_t>(id);
    e.origin = string_field(je, "origin", p);
    if (je.contains("record")) e.record = stroke_from_json(je["record"], child(p, "record"), warnings);
    if (je.contains("stamps")) {
      const Json& st = array_field(je, "stamps", p);
      std::vector<Stamp> stamps;
      for (std::size_t k = 0; k < st.size(); ++k)
        stamps.push_back(stamp_from_json(st[k], index_path(child(p, "stamps"), k), warnings));
      e.stamps = std::move(stamps);
    }
    if (!e.record && !e.stamps) fail(child(p, "record"), "missing (an entry needs a record or stamps)");
    e.extra = extra_of(je, {"id", "origin", "record", "stamps"});
    s.strokes.push_back(std::move(e));
  }
  s.extra = extra_of(j, {"format", "version", "canvas", "background", "textures", "strokes"});
  return s;
}

std::string save_plan(const StrokePlan& plan) {
  if (!plan.labels.empty() && plan.labels.size() != plan.stamps.size())
    throw std::invalid_argument("save_plan: label count differs from stamp count");
  Json j = Json::object();
  j["format"] = kPlanFormat;
  j["version"] = kPlanVersion;
  j["canvas"] = {{"width", plan.width}, {"height", plan.height}};
  put_mode(j, "brush_mode", plan.mode);
  j["count"] = plan.stamps.size();
  Json stamps = Json::array();
  for (std::size_t i = 0; i < plan.stamps.size(); ++i) {
    if (plan.stamps[i].mode != plan.mode)
      throw std::invalid_argument("save_plan: stamp mode differs from plan mode");
    Json js = stamp_params(plan.stamps[i]);
    if (!plan.labels.empty()) js["label"] = plan.labels[i];
    stamps.push_back(std::move(js));
  }
  j["stamps"] = std::move(stamps);
  return j.dump(1) + "\n";
}

StrokePlan load_plan(std::string_view text, LoadWarnings* warnings) {
  const Json j = parse(text);
  check_header(j, kPlanFormat, kPlanVersion);
  StrokePlan plan;
  std::tie(plan.width, plan.height) = canvas_size(j);
  plan.mode = mode_from(j, "brush_mode", "");
  const auto count = integer_field(j, "count", "");
  const Json& stamps = array_field(j, "stamps", "");
  if (count < 0 || static_cast<std::size_t>(count) != stamps.size())
    fail("count", std::to_string(count) + " does not match " + std::to_string(stamps.size()) +
                      " stamps");
  std::size_t labelled = 0;
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    const std::string p = index_path("stamps", i);
    plan.stamps.push_back(stamp_with_mode(stamps[i], plan.mode, p, warnings));
    if (stamps[i].contains("label")) {
      ++labelled;
      plan.labels.push_back(static_cast<std::int32_t>(integer_field(stamps[i], "label", p)));
    }
  }
  if (labelled != 0 && labelled != stamps.size())
    fail("stamps", "labels must be given for all stamps or none");
  return plan;
}

}  // namespace copaint
