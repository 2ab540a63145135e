#include "copaint/session.hpp"

#include <algorithm>
#include <cmath>

#include "copaint/metrics.hpp"
#include "copaint/sequencer.hpp"

namespace copaint {

std::string to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Pending: return "pending";
    case JobStatus::Done: return "done";
    case JobStatus::Superseded: return "superseded";
    case JobStatus::Failed: return "failed";
  }
  return "unknown";
}

Point2 to_local(const Rect& box, Point2 p) {
  return {(p.x - box.x) / box.w, (p.y - box.y) / box.h};
}

Point2 to_global(const Rect& box, Point2 p) { return {box.x + p.x * box.w, box.y + p.y * box.h}; }

Canvas replay(const std::vector<HistoryEntry>& history, int width, int height, Rgb background,
              const TextureLibrary* textures) {
  Canvas canvas(width, height, background);
  for (const auto& e : history)
    for (const Stamp& s : e.stamps) composite_over(canvas, stamp_alpha(s, textures), s.color);
  return canvas;
}

Rect stamps_bounds(std::span<const Stamp> stamps, int width, int height,
                   const TextureLibrary* textures) {
  Rect r;
  for (const Stamp& s : stamps) r = r.united(stamp_footprint(s, textures, 0.0));
  return r.intersected({0, 0, width, height});
}

namespace {

Stamp translated(Stamp s, double dx, double dy) {
  s.x += dx;
  s.y += dy;
  return s;
}

std::vector<Stamp> translated(std::vector<Stamp> stamps, double dx, double dy) {
  for (Stamp& s : stamps) s = translated(s, dx, dy);
  return stamps;
}

// Radius-equivalent extent used to pad crops around stamps.
double reach(const Stamp& s) {
  return is_tip_mode(s.mode) ? s.radius : std::max(s.sigma_x, s.sigma_y) / kGaussianSigmaPerRadius;
}

double sse_over(const Canvas& a, const Canvas& b, const Rect& r) {
  double sum = 0.0;
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x)
      for (int ch = 0; ch < 3; ++ch) {
        const double d = a(x, y)[ch] - b(x, y)[ch];
        sum += d * d;
      }
  return sum;
}

double mse_in_mask(const Canvas& a, const Canvas& b, const Mask& mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (mask.test(x, y)) {
        for (int ch = 0; ch < 3; ++ch) {
          const double d = a(x, y)[ch] - b(x, y)[ch];
          sum += d * d;
        }
        ++n;
      }
  return n ? sum / (3.0 * n) : 0.0;
}

struct Fit {
  std::vector<Stamp> stamps;
  double before = 0.0;  // display loss of the input stamps
  double after = 0.0;
  bool changed = false;
};

// Painter's-algorithm fit of `stamps` over `below` toward `target`. Only
// stamps flagged in `free` move (all when empty); positions are kept inside
// `mask` when given. The result never has a higher display loss than the
// input.
Fit fit_over(const std::vector<Stamp>& stamps, const std::vector<bool>& free, const Canvas& below,
             const Canvas& target, const OptimConfig& optim, const Mask* mask,
             const TextureLibrary* textures) {
  Fit fit;
  fit.stamps = stamps;
  fit.before = loss_mse(render_stamps(stamps, below, textures), target);
  fit.after = fit.before;
  if (stamps.empty() || fit.before == 0.0) return fit;

  std::vector<ParamSlot> slots;
  for (std::size_t i = 0; i < stamps.size(); ++i)
    if (free.empty() || free[i])
      for (ParamKind k : ParamLayout::kinds_for(stamps[i])) slots.push_back({i, k});
  if (slots.empty()) return fit;

  DiffScene scene;
  scene.layout = ParamLayout(target.width(), target.height(), stamps, slots);
  scene.background = below;
  scene.blend = Blend::Over;
  scene.textures = textures;

  OptimConfig cfg = optim;
  std::shared_ptr<MaskProjector> projector;
  if (mask) {
    projector = std::make_shared<MaskProjector>(*mask);
    std::vector<std::pair<std::size_t, std::size_t>> xy;  // (x slot, y slot)
    for (std::size_t k = 0; k < slots.size(); ++k)
      if (slots[k].kind == ParamKind::X)
        for (std::size_t j = 0; j < slots.size(); ++j)
          if (slots[j].stamp == slots[k].stamp && slots[j].kind == ParamKind::Y) xy.push_back({k, j});
    const double sx = scene.layout.scale(ParamKind::X);
    const double sy = scene.layout.scale(ParamKind::Y);
    cfg.project = [projector, xy, sx, sy](std::span<double> p) {
      for (auto [ix, iy] : xy) {
        const Point2 q = projector->project(p[ix] * sx, p[iy] * sy);
        p[ix] = q.x / sx;
        p[iy] = q.y / sy;
      }
    };
  }

  ParamVector init = scene.layout.normalize_templates();
  scene.layout.clamp(init);
  if (cfg.project) cfg.project(init);
  const OptimResult res = optimize_strokes(init, scene, target, cfg);
  std::vector<Stamp> out = scene.layout.denormalize(res.params);
  const double after = loss_mse(render_stamps(out, below, textures), target);
  if (after < fit.before) {
    fit.stamps = std::move(out);
    fit.after = after;
    fit.changed = true;
  }
  return fit;
}

Stamp scaled_size(Stamp s, double f) {
  if (is_tip_mode(s.mode)) {
    s.radius *= f;
  } else {
    s.sigma_x *= f;
    s.sigma_y *= f;
  }
  return s;
}

}  // namespace

Session::Session(SessionConfig cfg)
    : cfg_(std::move(cfg)), textures_(std::make_shared<TextureLibrary>()) {
  if (cfg_.width <= 0 || cfg_.height <= 0) throw std::invalid_argument("Session: empty canvas");
  canvas_ = Canvas(cfg_.width, cfg_.height, cfg_.background);
}

Session::~Session() {
  {
    std::lock_guard lk(mu_);
    for (auto& j : pending_) j->info.status = JobStatus::Superseded;
    listener_ = nullptr;
  }
  workers_.clear();
}

Canvas Session::canvas() const {
  std::lock_guard lk(mu_);
  return canvas_;
}

std::vector<HistoryEntry> Session::history() const {
  std::lock_guard lk(mu_);
  return history_;
}

std::size_t Session::undo_depth() const {
  std::lock_guard lk(mu_);
  return undo_.size();
}

std::size_t Session::redo_depth() const {
  std::lock_guard lk(mu_);
  return redo_.size();
}

std::string Session::add_texture(GrayImage texture, const std::string& id) {
  std::lock_guard lk(mu_);
  // Copy on write: running jobs keep the library they started with.
  auto lib = std::make_shared<TextureLibrary>(*textures_);
  lib->add(id, std::move(texture));
  textures_ = std::move(lib);
  return id;
}

std::shared_ptr<const TextureLibrary> Session::textures() const {
  std::lock_guard lk(mu_);
  return textures_;
}

void Session::set_intent(std::shared_ptr<const IntentProvider> intent) {
  std::lock_guard lk(mu_);
  intent_ = std::move(intent);
}

void Session::set_reference(Canvas reference) {
  if (reference.width() != cfg_.width || reference.height() != cfg_.height)
    throw SessionError("size_mismatch", "reference size differs from the canvas");
  set_intent(std::make_shared<ReferenceOracle>(std::move(reference)));
}

bool Session::has_intent() const {
  std::lock_guard lk(mu_);
  return intent_ != nullptr;
}

void Session::set_lasso(Mask mask) {
  if (mask.width() != cfg_.width || mask.height() != cfg_.height)
    throw SessionError("size_mismatch", "lasso size differs from the canvas");
  if (mask.empty()) throw SessionError("empty_mask", "lasso covers no pixels");
  std::lock_guard lk(mu_);
  lasso_ = std::move(mask);
}

void Session::set_lasso_polygon(std::span<const Point2> vertices) {
  if (vertices.size() < 3) throw SessionError("bad_lasso", "a lasso needs at least 3 vertices");
  set_lasso(Mask::from_polygon(cfg_.width, cfg_.height, vertices));
}

void Session::clear_lasso() {
  std::lock_guard lk(mu_);
  lasso_.reset();
}

std::optional<Mask> Session::lasso() const {
  std::lock_guard lk(mu_);
  return lasso_;
}

void Session::require_intent_locked() const {
  if (!intent_) throw SessionError("no_intent", "no reference image or intent provider is set");
}

Canvas Session::intent_locked() const {
  require_intent_locked();
  Canvas out = intent_->predict(canvas_);
  if (out.width() != cfg_.width || out.height() != cfg_.height)
    throw SessionError("size_mismatch", "intent size differs from the canvas");
  return out;
}

void Session::trim_ring(std::deque<State>& stack) {
  std::size_t with_canvas = 0;
  for (auto it = stack.rbegin(); it != stack.rend(); ++it)
    if (it->canvas && ++with_canvas > cfg_.snapshot_ring) it->canvas.reset();
}

void Session::push_undo_locked() {
  undo_.push_back({history_, canvas_});
  trim_ring(undo_);
  redo_.clear();
}

void Session::restore_locked(State state) {
  history_ = std::move(state.history);
  canvas_ = state.canvas ? std::move(*state.canvas)
                         : replay(history_, cfg_.width, cfg_.height, cfg_.background,
                                  textures_.get());
}

void Session::rerender_locked() {
  canvas_ = replay(history_, cfg_.width, cfg_.height, cfg_.background, textures_.get());
}

HistoryEntry* Session::find_locked(std::uint64_t id) {
  for (auto& e : history_)
    if (e.id == id) return &e;
  return nullptr;
}

void Session::emit_canvas_locked(const Rect& r) {
  if (!listener_ || r.empty()) return;
  SessionEvent ev;
  ev.kind = SessionEvent::Kind::CanvasPatch;
  ev.rect = r;
  ev.tile = canvas_.crop(r);
  listener_(ev);
}

void Session::emit_history_locked(const std::string& action, std::vector<std::uint64_t> ids) {
  if (!listener_) return;
  SessionEvent ev;
  ev.kind = SessionEvent::Kind::History;
  ev.action = action;
  ev.ids = std::move(ids);
  ev.history_length = history_.size();
  listener_(ev);
}

void Session::emit_job_locked(const RefineJobInfo& info) {
  if (!listener_) return;
  SessionEvent ev;
  ev.kind = SessionEvent::Kind::Job;
  ev.job = info;
  listener_(ev);
}

void Session::set_listener(std::function<void(const SessionEvent&)> listener) {
  std::lock_guard lk(mu_);
  listener_ = std::move(listener);
}

void Session::supersede_locked(const Rect& edited, bool global) {
  for (auto& j : pending_)
    if (j->info.status == JobStatus::Pending && (global || j->info.crop.intersects(edited))) {
      j->info.status = JobStatus::Superseded;
      emit_job_locked(j->info);
    }
  drain_jobs_locked();
}

std::uint64_t Session::apply_user_stroke(const StrokeRecord& stroke) {
  try {
    validate(stroke);
  } catch (const std::invalid_argument& e) {
    throw SessionError("bad_stroke", e.what());
  }
  std::lock_guard lk(mu_);
  if (const auto* tip = std::get_if<BrushTip>(&stroke.tool); tip && !textures_->contains(tip->texture_id))
    throw SessionError("unknown_texture", "brush tip texture " + tip->texture_id + " is not loaded");
  HistoryEntry e;
  e.id = next_id_++;
  e.origin = "user";
  e.record = stroke;
  e.stamps = plan_stamps(stroke, pressure_config_for(stroke.base_size));
  push_undo_locked();
  for (const Stamp& s : e.stamps) composite_over(canvas_, stamp_alpha(s, textures_.get()), s.color);
  const Rect r = stamps_bounds(e.stamps, cfg_.width, cfg_.height, textures_.get());
  const std::uint64_t id = e.id;
  history_.push_back(std::move(e));
  emit_canvas_locked(r);
  emit_history_locked("stroke", {id});
  supersede_locked(r, false);
  return id;
}

std::vector<std::uint64_t> Session::optimize_history() {
  std::lock_guard lk(mu_);
  if (history_.empty()) throw SessionError("empty_history", "there are no strokes to optimize");
  const Canvas target = intent_locked();

  std::vector<Stamp> all;
  std::vector<bool> free;
  for (const auto& e : history_)
    for (const Stamp& s : e.stamps) {
      all.push_back(s);
      free.push_back(!lasso_ || lasso_->contains(s.x, s.y));
    }
  const Canvas blank(cfg_.width, cfg_.height, cfg_.background);
  const Fit fit = fit_over(all, free, blank, target, cfg_.optim, lasso_ ? &*lasso_ : nullptr,
                           textures_.get());

  std::vector<std::uint64_t> ids;
  for (const auto& e : history_) ids.push_back(e.id);
  if (!fit.changed) return ids;

  push_undo_locked();
  std::size_t k = 0;
  for (auto& e : history_) {
    bool changed = false;
    for (Stamp& s : e.stamps) {
      changed |= !(s == fit.stamps[k]);
      s = fit.stamps[k++];
    }
    if (changed) {
      ++e.version;
      e.edited = true;
    }
  }
  rerender_locked();
  emit_canvas_locked(canvas_.bounds());
  emit_history_locked("optimize", ids);
  supersede_locked(canvas_.bounds(), true);
  return ids;
}

CompletionResult Session::stroke_completion_step() {
  std::lock_guard lk(mu_);
  const Canvas intent = intent_locked();
  const Mask* mask = lasso_ ? &*lasso_ : nullptr;
  std::vector<Stamp> previous;
  for (const auto& e : history_) previous.insert(previous.end(), e.stamps.begin(), e.stamps.end());
  const double progress =
      std::min(1.0, static_cast<double>(history_.size()) / std::max(1, cfg_.completion_horizon));

  CompletionResult out;
  const Proposal proposal = propose_next_stroke(canvas_, intent, previous, mask, progress, cfg_.proposer);
  if (std::holds_alternative<CompletionSignal>(proposal)) {
    out.complete = true;
    out.reason = "canvas matches the intent";
    return out;
  }
  const Stamp base =
      from_stroke_vector(std::get<StrokeVector8>(proposal), cfg_.ai_brush, cfg_.width, cfg_.height);
  const TextureLibrary* tex = textures_.get();

  for (int attempt = 0; attempt <= cfg_.completion_retries; ++attempt) {
    const Stamp s0 = scaled_size(base, std::pow(0.5, attempt));
    const double pad = 3.0 * reach(s0) + 2.0;
    const Rect crop =
        Rect{static_cast<int>(std::floor(s0.x - pad)), static_cast<int>(std::floor(s0.y - pad)),
             static_cast<int>(std::ceil(2 * pad)) + 1, static_cast<int>(std::ceil(2 * pad)) + 1}
            .intersected(canvas_.bounds());
    std::optional<Mask> local_mask;
    if (mask) local_mask = mask->crop(crop);
    const Fit fit = fit_over({translated(s0, -crop.x, -crop.y)}, {}, canvas_.crop(crop),
                             intent.crop(crop), cfg_.optim, local_mask ? &*local_mask : nullptr, tex);
    const Stamp s = translated(fit.stamps.front(), crop.x, crop.y);
    if (mask && !mask->contains(s.x, s.y)) continue;

    const AlphaMap alpha = stamp_alpha(s, tex);
    const Rect touched = alpha.bounds().intersected(canvas_.bounds());
    if (touched.empty()) continue;
    Canvas trial = canvas_.crop(touched);
    const Canvas goal = intent.crop(touched);
    const double before = sse_over(trial, goal, trial.bounds());
    AlphaMap local = alpha;
    local.origin = {alpha.origin.x - touched.x, alpha.origin.y - touched.y};
    composite_over(trial, local, s.color);
    const double after = sse_over(trial, goal, trial.bounds());
    if (!(after < before)) continue;

    push_undo_locked();
    composite_over(canvas_, alpha, s.color);
    HistoryEntry e;
    e.id = next_id_++;
    e.origin = "completion";
    e.stamps = {s};
    history_.push_back(e);
    out.stroke_id = e.id;
    out.stamp = s;
    out.sse_before = before;
    out.sse_after = after;
    emit_canvas_locked(touched);
    emit_history_locked("completion", {e.id});
    supersede_locked(touched, false);
    return out;
  }
  out.complete = true;
  out.reason = "no stroke reduces the residual";
  return out;
}

InpaintResult Session::region_inpaint(std::int32_t label, std::uint64_t seed) {
  std::optional<Mask> m = lasso();
  if (!m) throw SessionError("no_lasso", "inpainting needs an active lasso");
  return region_inpaint(*m, label, seed);
}

InpaintResult Session::region_inpaint(const Mask& region, std::int32_t label, std::uint64_t seed) {
  if (region.width() != cfg_.width || region.height() != cfg_.height)
    throw SessionError("size_mismatch", "mask size differs from the canvas");
  std::lock_guard lk(mu_);
  Mask mask = region;
  if (lasso_)
    for (int y = 0; y < mask.height(); ++y)
      for (int x = 0; x < mask.width(); ++x)
        if (!lasso_->test(x, y)) mask.set(x, y, false);
  if (mask.empty()) throw SessionError("empty_mask", "the inpainting region is empty");
  const Canvas intent = intent_locked();
  const TextureLibrary* tex = textures_.get();

  const Rect box = mask.bounds();
  const Canvas goal = intent.crop(box);
  const Mask local_mask = mask.crop(box);
  const std::int32_t ignore = label == std::numeric_limits<std::int32_t>::max() ? label - 1 : label + 1;
  LabelMap labels(box.w, box.h, ignore);
  NormalMap normals(box.w, box.h);
  GrayImage height(box.w, box.h);
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x) {
      if (local_mask.test(x, y)) labels(x, y) = label;
      height(x, y) = luminance(goal(x, y));
    }
  // Normals of the intent's luminance read as a height field.
  constexpr double kRelief = 4.0;
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x) {
      const double gx = (height(std::min(x + 1, box.w - 1), y) - height(std::max(x - 1, 0), y)) / 2;
      const double gy = (height(x, std::min(y + 1, box.h - 1)) - height(x, std::max(y - 1, 0))) / 2;
      const double nx = -kRelief * gx, ny = -kRelief * gy;
      const double len = std::sqrt(nx * nx + ny * ny + 1.0);
      normals(x, y) = {nx / len, ny / len, 1.0 / len};
    }
  const AttentionMap attention(box.w, box.h, 1.0);

  SequencerConfig scfg;
  scfg.budget = cfg_.inpaint_budget;
  scfg.mode = cfg_.ai_brush;
  scfg.textures = tex;
  const StrokePlan plan = build_stroke_plan(goal, labels, OrderTable({{label, "region"}}, {ignore}),
                                            normals, attention, scfg, seed);

  // Plan positions are crop pixels; express them in region-local [0,1]^2 and
  // map them onto the canvas through the bounding box.
  std::vector<Stamp> global;
  for (Stamp s : plan.stamps) {
    const Point2 local{s.x / box.w, s.y / box.h};
    const Point2 g = to_global(box, local);
    s.x = g.x;
    s.y = g.y;
    global.push_back(s);
  }

  const Fit fit = fit_over(translated(global, -box.x, -box.y), {}, canvas_.crop(box), goal,
                           cfg_.optim, &local_mask, tex);
  const std::vector<Stamp> optimized = translated(fit.stamps, box.x, box.y);

  InpaintResult out;
  out.mask_mse_before = mse_in_mask(canvas_, intent, mask);
  out.mask_mse_after = out.mask_mse_before;
  const std::vector<Stamp>* chosen = nullptr;
  for (const std::vector<Stamp>* candidate : {&optimized, static_cast<const std::vector<Stamp>*>(&global)}) {
    bool inside = true;
    for (const Stamp& s : *candidate) inside = inside && mask.contains(s.x, s.y);
    if (!inside) continue;
    const double after = mse_in_mask(render_stamps(*candidate, canvas_, tex), intent, mask);
    if (after <= out.mask_mse_before) {
      chosen = candidate;
      out.mask_mse_after = after;
      break;
    }
  }
  if (!chosen || chosen->empty()) return out;

  push_undo_locked();
  for (const Stamp& s : *chosen) {
    composite_over(canvas_, stamp_alpha(s, tex), s.color);
    HistoryEntry e;
    e.id = next_id_++;
    e.origin = "inpaint";
    e.stamps = {s};
    out.ids.push_back(e.id);
    history_.push_back(std::move(e));
  }
  const Rect r = stamps_bounds(*chosen, cfg_.width, cfg_.height, tex);
  emit_canvas_locked(r);
  emit_history_locked("inpaint", out.ids);
  supersede_locked(r, false);
  return out;
}

RefineJobInfo Session::dynamic_brush_refine(std::uint64_t stroke_id) {
  std::lock_guard lk(mu_);
  const auto it = std::find_if(history_.begin(), history_.end(),
                               [&](const HistoryEntry& e) { return e.id == stroke_id; });
  if (it == history_.end())
    throw SessionError("unknown_stroke", "no stroke with id " + std::to_string(stroke_id));
  const Canvas intent = intent_locked();

  auto job = std::make_shared<Job>();
  job->info.job_id = next_job_++;
  job->info.stroke_id = stroke_id;
  job->entry_version = it->version;

  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY, pad = 0.0;
  for (const Stamp& s : it->stamps) {
    x0 = std::min(x0, s.x);
    y0 = std::min(y0, s.y);
    x1 = std::max(x1, s.x);
    y1 = std::max(y1, s.y);
    pad = std::max(pad, reach(s));
  }
  if (!it->stamps.empty())
    job->info.crop = Rect{static_cast<int>(std::floor(x0 - pad)), static_cast<int>(std::floor(y0 - pad)),
                          static_cast<int>(std::ceil(x1 + pad) - std::floor(x0 - pad)) + 1,
                          static_cast<int>(std::ceil(y1 + pad) - std::floor(y0 - pad)) + 1}
                         .intersected(canvas_.bounds());

  jobs_.push_back(job);
  if (job->info.crop.empty()) {
    job->info.status = JobStatus::Done;
    emit_job_locked(job->info);
    return job->info;
  }
  pending_.push_back(job);
  emit_job_locked(job->info);

  const std::vector<HistoryEntry> before(history_.begin(), it);
  const Rect crop = job->info.crop;
  Canvas below = replay(before, cfg_.width, cfg_.height, cfg_.background, textures_.get()).crop(crop);
  workers_.emplace_back([this, job, stamps = translated(it->stamps, -crop.x, -crop.y),
                         below = std::move(below), target = intent.crop(crop), crop,
                         tex = textures_]() mutable {
    std::vector<Stamp> result;
    std::string error;
    try {
      if (cfg_.refine_hook) cfg_.refine_hook(job->info.job_id);
      const Fit fit = fit_over(stamps, {}, below, target, cfg_.optim, nullptr, tex.get());
      if (fit.changed) result = translated(fit.stamps, crop.x, crop.y);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard lk(mu_);
    job->result = std::move(result);
    job->info.error = error;
    job->ready = true;
    drain_jobs_locked();
  });
  return job->info;
}

void Session::drain_jobs_locked() {
  while (!pending_.empty()) {
    const std::shared_ptr<Job> job = pending_.front();
    if (job->info.status == JobStatus::Superseded) {
      pending_.pop_front();
      continue;
    }
    if (!job->ready) break;
    pending_.pop_front();
    HistoryEntry* e = find_locked(job->info.stroke_id);
    if (!job->info.error.empty()) {
      job->info.status = JobStatus::Failed;
    } else if (!e || e->version != job->entry_version) {
      job->info.status = JobStatus::Superseded;
    } else {
      job->info.status = JobStatus::Done;
      if (!job->result.empty()) {
        push_undo_locked();
        e = find_locked(job->info.stroke_id);
        e->stamps = job->result;
        ++e->version;
        e->edited = true;
        job->info.changed = true;
        rerender_locked();
        emit_canvas_locked(canvas_.bounds());
        emit_history_locked("refine", {job->info.stroke_id});
      }
    }
    emit_job_locked(job->info);
  }
  if (pending_.empty()) idle_cv_.notify_all();
}

RefineJobInfo Session::job(std::uint64_t job_id) const {
  std::lock_guard lk(mu_);
  for (const auto& j : jobs_)
    if (j->info.job_id == job_id) return j->info;
  throw SessionError("unknown_job", "no refine job with id " + std::to_string(job_id));
}

void Session::wait_idle() {
  std::unique_lock lk(mu_);
  idle_cv_.wait(lk, [&] { return pending_.empty(); });
}

bool Session::undo() {
  std::lock_guard lk(mu_);
  if (undo_.empty()) return false;
  redo_.push_back({history_, canvas_});
  trim_ring(redo_);
  State s = std::move(undo_.back());
  undo_.pop_back();
  restore_locked(std::move(s));
  emit_canvas_locked(canvas_.bounds());
  emit_history_locked("undo", {});
  supersede_locked(canvas_.bounds(), true);
  return true;
}

bool Session::redo() {
  std::lock_guard lk(mu_);
  if (redo_.empty()) return false;
  undo_.push_back({history_, canvas_});
  trim_ring(undo_);
  State s = std::move(redo_.back());
  redo_.pop_back();
  restore_locked(std::move(s));
  emit_canvas_locked(canvas_.bounds());
  emit_history_locked("redo", {});
  supersede_locked(canvas_.bounds(), true);
  return true;
}

SessionFile Session::to_file() const {
  std::lock_guard lk(mu_);
  SessionFile f;
  f.width = cfg_.width;
  f.height = cfg_.height;
  f.background = cfg_.background;
  for (const auto& e : history_) {
    SessionEntry se;
    se.id = e.id;
    se.origin = e.origin;
    se.record = e.record;
    if (!e.record || e.edited) se.stamps = e.stamps;
    f.strokes.push_back(std::move(se));
  }
  std::vector<std::string> used;
  for (const auto& e : history_)
    for (const Stamp& s : e.stamps)
      if (const auto* tip = std::get_if<BrushTip>(&s.mode)) used.push_back(tip->texture_id);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  f.textures = std::move(used);
  return f;
}

void Session::load_file(const SessionFile& file) {
  if (file.width != cfg_.width || file.height != cfg_.height)
    throw SessionError("size_mismatch", "session canvas size differs from this session");
  std::lock_guard lk(mu_);
  for (const auto& id : file.textures)
    if (!textures_->contains(id))
      throw SessionError("unknown_texture", "brush tip texture " + id + " is not loaded");
  std::vector<HistoryEntry> history;
  std::uint64_t max_id = 0;
  for (const auto& se : file.strokes) {
    HistoryEntry e;
    e.id = se.id;
    e.origin = se.origin;
    e.record = se.record;
    if (se.stamps) {
      e.stamps = *se.stamps;
      e.edited = se.record.has_value();
    } else {
      e.stamps = plan_stamps(*se.record, pressure_config_for(se.record->base_size));
    }
    for (const Stamp& s : e.stamps) {
      validate(s);
      if (const auto* tip = std::get_if<BrushTip>(&s.mode); tip && !textures_->contains(tip->texture_id))
        throw SessionError("unknown_texture", "brush tip texture " + tip->texture_id + " is not loaded");
    }
    max_id = std::max(max_id, e.id);
    history.push_back(std::move(e));
  }
  cfg_.background = file.background;
  history_ = std::move(history);
  next_id_ = std::max(next_id_, max_id + 1);
  undo_.clear();
  redo_.clear();
  rerender_locked();
  emit_canvas_locked(canvas_.bounds());
  std::vector<std::uint64_t> ids;
  for (const auto& e : history_) ids.push_back(e.id);
  emit_history_locked("load", std::move(ids));
  supersede_locked(canvas_.bounds(), true);
}

}  // namespace copaint
