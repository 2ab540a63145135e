#pragma once

// Interactive painting session: committed history, undo/redo, lasso, intent
// provider and the four assisted workflows. Every public member is safe to
// call from any thread; mutations are serialized under one lock.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "copaint/io.hpp"
#include "copaint/mask.hpp"
#include "copaint/optim.hpp"
#include "copaint/predictor.hpp"
#include "copaint/stroke.hpp"

namespace copaint {

struct HistoryEntry {
  std::uint64_t id = 0;
  std::string origin;  // user, completion, inpaint
  std::optional<StrokeRecord> record;
  std::vector<Stamp> stamps;
  std::uint64_t version = 0;  // bumped whenever stamps change in place
  bool edited = false;        // stamps no longer match plan_stamps(record)

  bool operator==(const HistoryEntry&) const = default;
};

/// Raised for caller mistakes the protocol reports with a code.
class SessionError : public std::runtime_error {
 public:
  SessionError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

enum class JobStatus { Pending, Done, Superseded, Failed };
std::string to_string(JobStatus s);

struct RefineJobInfo {
  std::uint64_t job_id = 0;
  std::uint64_t stroke_id = 0;
  Rect crop;
  JobStatus status = JobStatus::Pending;
  bool changed = false;  // the refined stamps replaced the originals
  std::string error;
};

struct CompletionResult {
  bool complete = false;
  std::optional<std::uint64_t> stroke_id;
  std::optional<Stamp> stamp;
  double sse_before = 0.0;  // canvas vs intent over the touched pixels
  double sse_after = 0.0;
  std::string reason;  // why the step reported completion
};

struct InpaintResult {
  std::vector<std::uint64_t> ids;
  double mask_mse_before = 0.0;
  double mask_mse_after = 0.0;
};

struct SessionEvent {
  enum class Kind { CanvasPatch, History, Job };
  Kind kind = Kind::CanvasPatch;
  Rect rect;    // CanvasPatch
  Canvas tile;  // CanvasPatch: canvas pixels inside rect after the change
  std::string action;              // History: stroke, completion, inpaint, optimize, refine, undo, redo, load
  std::vector<std::uint64_t> ids;  // History: affected entry ids
  std::size_t history_length = 0;  // History
  RefineJobInfo job;               // Job
};

struct SessionConfig {
  int width = 256;
  int height = 256;
  Rgb background{1.0, 1.0, 1.0};

  BrushMode ai_brush = Gaussian2D{};  // for completion and inpainting
  int completion_horizon = 300;       // history length at which progress reaches 1
  int completion_retries = 3;         // radius halvings before giving up
  ProposerConfig proposer;
  OptimConfig optim;
  int inpaint_budget = 60;
  std::size_t snapshot_ring = 64;

  /// Called on the worker thread before a refine job reports its result.
  std::function<void(std::uint64_t job_id)> refine_hook;
};

/// Local [0,1]^2 coordinates relative to a bounding box and back.
Point2 to_local(const Rect& box, Point2 p);
Point2 to_global(const Rect& box, Point2 p);

/// Sequential alpha-over of every entry's stamps onto a blank canvas.
Canvas replay(const std::vector<HistoryEntry>& history, int width, int height, Rgb background,
              const TextureLibrary* textures);

/// Pixel rectangle touched by a list of stamps, clipped to the canvas.
Rect stamps_bounds(std::span<const Stamp> stamps, int width, int height,
                   const TextureLibrary* textures);

class Session {
 public:
  explicit Session(SessionConfig cfg);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const SessionConfig& config() const { return cfg_; }
  int width() const { return cfg_.width; }
  int height() const { return cfg_.height; }

  Canvas canvas() const;
  std::vector<HistoryEntry> history() const;
  std::size_t undo_depth() const;
  std::size_t redo_depth() const;

  /// Registers a brush tip by content; returns its id.
  std::string add_texture(GrayImage texture, const std::string& id);
  std::shared_ptr<const TextureLibrary> textures() const;

  void set_intent(std::shared_ptr<const IntentProvider> intent);
  void set_reference(Canvas reference);
  bool has_intent() const;

  void set_lasso(Mask mask);
  void set_lasso_polygon(std::span<const Point2> vertices);
  void clear_lasso();
  std::optional<Mask> lasso() const;

  std::uint64_t apply_user_stroke(const StrokeRecord& stroke);
  std::vector<std::uint64_t> optimize_history();
  CompletionResult stroke_completion_step();
  InpaintResult region_inpaint(const Mask& mask, std::int32_t label, std::uint64_t seed);
  /// Region inpainting over the active lasso.
  InpaintResult region_inpaint(std::int32_t label, std::uint64_t seed);
  RefineJobInfo dynamic_brush_refine(std::uint64_t stroke_id);

  /// False when there is nothing to undo / redo.
  bool undo();
  bool redo();

  RefineJobInfo job(std::uint64_t job_id) const;
  /// Blocks until every submitted refine job has committed or been dropped.
  void wait_idle();

  SessionFile to_file() const;
  /// Replaces history and canvas; clears undo/redo.
  void load_file(const SessionFile& file);

  /// The listener runs under the session lock; it must not call back in.
  void set_listener(std::function<void(const SessionEvent&)> listener);

 private:
  struct State {
    std::vector<HistoryEntry> history;
    std::optional<Canvas> canvas;  // dropped for states beyond the ring
  };
  struct Job {
    RefineJobInfo info;
    std::uint64_t entry_version = 0;
    bool ready = false;
    std::vector<Stamp> result;
  };

  void require_intent_locked() const;
  Canvas intent_locked() const;
  void push_undo_locked();
  void trim_ring(std::deque<State>& stack);
  void restore_locked(State state);
  void rerender_locked();
  void supersede_locked(const Rect& edited, bool global);
  void emit_canvas_locked(const Rect& r);
  void emit_history_locked(const std::string& action, std::vector<std::uint64_t> ids);
  void emit_job_locked(const RefineJobInfo& info);
  void drain_jobs_locked();
  HistoryEntry* find_locked(std::uint64_t id);
  void run_job(std::shared_ptr<Job> job, std::vector<Stamp> stamps, Canvas below, Canvas target,
               Rect crop);

  SessionConfig cfg_;
  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  Canvas canvas_;
  std::vector<HistoryEntry> history_;
  std::uint64_t next_id_ = 1;
  std::uint64_t next_job_ = 1;
  std::deque<State> undo_;
  std::deque<State> redo_;
  std::optional<Mask> lasso_;
  std::shared_ptr<const IntentProvider> intent_;
  std::shared_ptr<TextureLibrary> textures_;
  std::deque<std::shared_ptr<Job>> pending_;
  std::vector<std::shared_ptr<Job>> jobs_;
  std::function<void(const SessionEvent&)> listener_;
  std::vector<std::jthread> workers_;  // last: joined before the rest is destroyed
};

}  // namespace copaint
