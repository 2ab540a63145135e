// copaint command line: gradcheck, optimize, sequence, metrics, render, serve.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "copaint/gradcheck.hpp"
#include "copaint/io.hpp"
#include "copaint/metrics.hpp"
#include "copaint/protocol.hpp"
#include "copaint/sequencer.hpp"
#include "copaint/session.hpp"

using namespace copaint;
namespace fs = std::filesystem;

namespace {

std::string text_of(const fs::path& p) {
  const Bytes b = read_file(p);
  return std::string(b.begin(), b.end());
}

Blend parse_blend(const std::string& s) {
  if (s == "weighted_sum") return Blend::WeightedSum;
  if (s == "over") return Blend::Over;
  throw CLI::ValidationError("--blend", "expected weighted_sum or over");
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::pair<int, int> parse_size(const std::string& s) {
  int w = 0, h = 0;
  char x = 0;
  if (std::sscanf(s.c_str(), "%d%c%d", &w, &x, &h) != 3 || (x != 'x' && x != 'X') || w <= 0 || h <= 0)
    throw CLI::ValidationError("--canvas", "expected WxH");
  return {w, h};
}

// Textures next to a plan or session, named by content hash.
TextureLibrary load_textures(const std::vector<std::string>& paths) {
  TextureLibrary lib;
  for (const auto& p : paths) {
    const Bytes b = read_file(p);
    lib.add(sha256_hex(b), import_gray(b));
  }
  return lib;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"copaint: differentiable stroke painting engine"};
  app.require_subcommand(1);

  // gradcheck
  GradCheckOptions gc;
  std::string gc_blend = "weighted_sum";
  auto* cmd_gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  cmd_gc->add_option("--scenes", gc.scenes, "Random scenes")->capture_default_str();
  cmd_gc->add_option("--size", gc.canvas_size, "Canvas side in pixels")->capture_default_str();
  cmd_gc->add_option("--seed", gc.seed)->capture_default_str();
  cmd_gc->add_option("--blend", gc_blend, "weighted_sum or over")->capture_default_str();

  // optimize
  std::string opt_plan, opt_target, opt_out, opt_blend = "weighted_sum";
  std::vector<std::string> opt_textures;
  OptimConfig opt_cfg;
  auto* cmd_opt = app.add_subcommand("optimize", "Optimize a stroke plan against a target image");
  cmd_opt->add_option("--plan", opt_plan)->required()->check(CLI::ExistingFile);
  cmd_opt->add_option("--target", opt_target)->required()->check(CLI::ExistingFile);
  cmd_opt->add_option("--out", opt_out)->required();
  cmd_opt->add_option("--iterations", opt_cfg.iterations)->capture_default_str();
  cmd_opt->add_option("--lr", opt_cfg.base_lr)->capture_default_str();
  cmd_opt->add_option("--blend", opt_blend)->capture_default_str();
  cmd_opt->add_option("--texture", opt_textures, "Brush tip PNGs");

  // sequence
  std::string sq_target, sq_labels, sq_normals, sq_attention, sq_order, sq_out, sq_snapshots,
      sq_blend = "weighted_sum";
  std::uint64_t sq_seed = 0;
  bool sq_no_optimize = false;
  SequencerConfig sq_cfg;
  auto* cmd_sq = app.add_subcommand("sequence", "Build a coarse-to-fine stroke plan");
  cmd_sq->add_option("--target", sq_target)->required()->check(CLI::ExistingFile);
  cmd_sq->add_option("--labels", sq_labels)->required()->check(CLI::ExistingFile);
  cmd_sq->add_option("--normals", sq_normals)->required()->check(CLI::ExistingFile);
  cmd_sq->add_option("--attention", sq_attention)->required()->check(CLI::ExistingFile);
  cmd_sq->add_option("--order", sq_order)->required()->check(CLI::ExistingFile);
  cmd_sq->add_option("--seed", sq_seed)->capture_default_str();
  cmd_sq->add_option("--budget", sq_cfg.budget)->capture_default_str();
  cmd_sq->add_option("--out", sq_out)->required();
  cmd_sq->add_option("--snapshots", sq_snapshots, "Directory for per-stroke canvas PNGs");
  cmd_sq->add_option("--blend", sq_blend)->capture_default_str();
  cmd_sq->add_flag("--no-optimize", sq_no_optimize, "Emit the initial plan only");
  cmd_sq->add_flag("--per-region", sq_cfg.per_region, "Optimize region by region");

  // metrics
  std::string m_a, m_b;
  auto* cmd_m = app.add_subcommand("metrics", "PSNR / SSIM / MSE between two images");
  cmd_m->add_option("a", m_a)->required()->check(CLI::ExistingFile);
  cmd_m->add_option("b", m_b)->required()->check(CLI::ExistingFile);

  // render
  std::string r_plan, r_session, r_out;
  std::vector<std::string> r_textures;
  auto* cmd_r = app.add_subcommand("render", "Render a plan or session file to PNG");
  auto* r_plan_opt = cmd_r->add_option("--plan", r_plan)->check(CLI::ExistingFile);
  auto* r_session_opt = cmd_r->add_option("--session", r_session)->check(CLI::ExistingFile);
  r_plan_opt->excludes(r_session_opt);
  cmd_r->add_option("--out", r_out)->required();
  cmd_r->add_option("--texture", r_textures, "Brush tip PNGs");

  // serve
  int s_port = 8080;
  std::string s_canvas = "512x512", s_host = "127.0.0.1", s_reference;
  auto* cmd_s = app.add_subcommand("serve", "Run the interactive session server");
  cmd_s->add_option("--port", s_port)->capture_default_str();
  cmd_s->add_option("--canvas", s_canvas, "WxH")->capture_default_str();
  cmd_s->add_option("--host", s_host)->capture_default_str();
  cmd_s->add_option("--reference", s_reference, "Reference PNG for the intent oracle")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_gc) {
      gc.blend = parse_blend(gc_blend);
      const GradCheckReport r = run_gradient_suite(gc);
      const Json j = {{"scenes", r.scenes},
                      {"coordinates", r.coordinates},
                      {"failures", r.failures},
                      {"max_rel_error", r.max_rel_error},
                      {"max_abs_error_small", r.max_abs_error_small},
                      {"seconds", r.seconds},
                      {"worst", r.worst}};
      std::cout << j.dump() << "\n";
      return r.passed() ? 0 : 1;
    }
    if (*cmd_opt) {
      const TextureLibrary tex = load_textures(opt_textures);
      StrokePlan plan = load_plan(text_of(opt_plan));
      const Canvas target = import_image(read_file(opt_target));
      if (target.width() != plan.width || target.height() != plan.height)
        throw std::runtime_error("target size differs from the plan canvas");
      SequencerConfig cfg;
      cfg.optim = opt_cfg;
      cfg.blend = parse_blend(opt_blend);
      cfg.textures = &tex;
      double before = 0.0, after = 0.0;
      plan.stamps = optimize_plan_stamps(plan.stamps, target, Canvas(plan.width, plan.height, cfg.background),
                                         cfg, &before, &after);
      write_file(opt_out, save_plan(plan));
      std::cout << Json{{"initial_loss", before}, {"final_loss", after}}.dump() << "\n";
      return 0;
    }
    if (*cmd_sq) {
      sq_cfg.blend = parse_blend(sq_blend);
      const Canvas target = import_image(read_file(sq_target));
      const GuidanceMaps maps = load_maps(read_file(sq_labels), read_file(sq_normals),
                                          read_file(sq_attention), text_of(sq_order));
      if (sq_no_optimize) {
        if (!sq_snapshots.empty()) throw std::runtime_error("--snapshots needs optimization");
        const StrokePlan plan = build_stroke_plan(target, maps.labels, maps.order, maps.normals,
                                                  maps.attention, sq_cfg, sq_seed);
        write_file(sq_out, save_plan(plan));
        std::cout << Json{{"stamps", plan.stamps.size()}}.dump() << "\n";
        return 0;
      }
      const DatasetEntry e = generate_dataset_entry(target, maps.labels, maps.order, maps.normals,
                                                    maps.attention, sq_cfg, sq_seed);
      write_file(sq_out, save_plan(e.optimized));
      if (!sq_snapshots.empty()) {
        fs::create_directories(sq_snapshots);
        for (std::size_t i = 0; i < e.snapshots.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof(name), "stroke_%05zu.png", i + 1);
          write_file(fs::path(sq_snapshots) / name, export_image(e.snapshots[i]));
        }
      }
      std::cout << Json{{"stamps", e.optimized.stamps.size()},
                        {"initial_loss", e.initial_loss},
                        {"final_loss", e.final_loss}}
                       .dump()
                << "\n";
      return 0;
    }
    if (*cmd_m) {
      const MetricReport r = compare(import_image(read_file(m_a)), import_image(read_file(m_b)));
      std::cout << Json{{"psnr", number_or_null(r.psnr)}, {"ssim", r.ssim}, {"mse", r.mse}}.dump() << "\n";
      return 0;
    }
    if (*cmd_r) {
      const TextureLibrary tex = load_textures(r_textures);
      Canvas out;
      if (!r_plan.empty()) {
        const StrokePlan plan = load_plan(text_of(r_plan));
        out = render_stamps(plan.stamps, Canvas(plan.width, plan.height, Rgb{1, 1, 1}), &tex);
      } else if (!r_session.empty()) {
        const SessionFile f = load_session(text_of(r_session));
        SessionConfig cfg;
        cfg.width = f.width;
        cfg.height = f.height;
        Session s(cfg);
        for (const auto& id : f.textures)
          if (tex.contains(id)) s.add_texture(tex.get(id), id);
        s.load_file(f);
        out = s.canvas();
      } else {
        throw std::runtime_error("render needs --plan or --session");
      }
      write_file(r_out, export_image(out));
      return 0;
    }
    if (*cmd_s) {
      const auto [w, h] = parse_size(s_canvas);
      SessionConfig cfg;
      cfg.width = w;
      cfg.height = h;
      Session session(cfg);
      if (!s_reference.empty()) session.set_reference(import_image(read_file(s_reference)));
      serve_http(session, s_host, s_port);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
