#include "lomo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lomo/error.hpp"
#include "lomo/irm.hpp"
#include "lomo/json_io.hpp"
#include "lomo/sem.hpp"

namespace lomo::pipeline {

using geom::Point;
using nlohmann::json;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(std::string("pipeline config: ") + what);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void PipelineConfig::validate() const {
  require(downsample >= 1, "downsample must be >= 1");
  require(shrink_ratio >= 0.0 && shrink_ratio < 0.5, "shrink_ratio must be in [0, 0.5)");
  require(l > 0.0, "l must be positive");
  require(in_unit(dr_score_thresh), "dr_score_thresh must be in [0, 1]");
  require(dr_noise >= 0.0 && std::isfinite(dr_noise), "dr_noise must be >= 0");
  require(dr_receptive_field > 0.0, "dr_receptive_field must be positive");
  require(top_k >= 1, "top_k must be >= 1");
  require(in_unit(nms_iou), "nms_iou must be in [0, 1]");
  require(rt >= 0, "rt must be >= 0");
  require(irm_fraction >= 0.0 && irm_fraction <= 2.0, "irm_fraction must be in [0, 2]");
  require(irm_roi_h >= 1 && irm_roi_w >= 1, "IRM RoI must be non-empty");
  require(attention_sigma > 0.0, "attention_sigma must be positive");
  require(n >= 2, "n must be >= 2");
  require(in_unit(score_thresh), "score_thresh must be in [0, 1]");
  require(line_shrink >= 0.0 && line_shrink < 0.5, "line_shrink must be in [0, 0.5)");
  require(tcl_thickness > 0.0 && tcl_thickness <= 1.0, "tcl_thickness must be in (0, 1]");
  require(sem_noise >= 0.0 && std::isfinite(sem_noise), "sem_noise must be >= 0");
  require(sem_roi_h >= 2 && sem_roi_w >= 2, "SEM RoI must be at least 2x2");
  require(!eval_iou.empty(), "eval_iou must not be empty");
  for (double t : eval_iou) require(in_unit(t), "eval_iou values must be in [0, 1]");
  require(threads >= 0, "threads must be >= 0");
}

std::vector<geom::Proposal> decode_dr(const RasterMap& score,
                                      const std::array<RasterMap, 8>& offsets,
                                      double score_thresh, std::size_t* degenerate) {
  std::array<const RasterMap*, 9> maps{&score};
  for (std::size_t i = 0; i < 8; ++i) maps[i + 1] = &offsets[i];
  require_same_shape(maps, "decode_dr");

  const int ds = score.downsample();
  std::vector<geom::Proposal> out;
  for (int row = 0; row < score.height(); ++row) {
    for (int col = 0; col < score.width(); ++col) {
      const double s = score.at(col, row);
      if (!(s >= score_thresh)) continue;
      const Point c{(col + 0.5) * ds, (row + 0.5) * ds};
      std::array<Point, 4> pts;
      for (std::size_t v = 0; v < 4; ++v)
        pts[v] = c + Point{offsets[2 * v].at(col, row), offsets[2 * v + 1].at(col, row)};
      try {
        out.push_back({geom::Quadrangle::from_points(pts), s});
      } catch (const DegenerateShape&) {
        if (degenerate) ++*degenerate;
      }
    }
  }
  return out;
}

StageErrors& StageErrors::operator+=(const StageErrors& o) {
  dr_degenerate += o.dr_degenerate;
  irm_degenerate += o.irm_degenerate;
  sem_failed += o.sem_failed;
  sem_low_score += o.sem_low_score;
  return *this;
}

const evalproto::MatchReport& PipelineReport::at(double iou) const {
  for (const auto& r : reports)
    if (std::abs(r.iou_threshold - iou) < 1e-12) return r;
  throw ValidationError("no report at IoU " + std::to_string(iou));
}

SceneResult run_scene(const GeneratedScene& scene, const PipelineConfig& config) {
  SceneResult result;
  result.seed = scene.scene.seed;
  // One stream per scene, so results do not depend on scheduling.
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(scene.scene.seed),
                    static_cast<std::uint32_t>(scene.scene.seed >> 32)};
  std::mt19937_64 rng(seq);

  const DrOracleParams dr_params{config.dr_mode, config.dr_noise, config.dr_receptive_field};
  const auto maps = dr_oracle_maps(scene, dr_params, rng);
  const auto candidates =
      decode_dr(maps.score, maps.offsets, config.dr_score_thresh, &result.errors.dr_degenerate);
  result.dr = geom::nms(candidates, config.nms_iou, static_cast<std::size_t>(config.top_k));

  const int ds = maps.score.downsample();
  const auto shared = make_shared_features(scene.scene, ds);
  const AttentionOracle predictor(config.irm_fraction, ds, config.irm_roi_h, config.irm_roi_w,
                                  config.attention_sigma);
  irm::RefineStats stats;
  result.irm = irm::refine(result.dr, predictor, shared, config.rt, &stats);
  result.errors.irm_degenerate = stats.degenerate_steps;

  if (!config.sem_enabled) {
    for (const auto& p : result.irm) result.detections.push_back({p.quad.to_polygon(), p.score});
    return result;
  }

  SemOracleParams sem_params;
  sem_params.roi_h = config.sem_roi_h;
  sem_params.roi_w = config.sem_roi_w;
  sem_params.noise_sigma = config.sem_noise;
  sem_params.labels = {config.line_shrink, config.tcl_thickness};
  // The score threshold is applied here so failures and rejections are counted apart.
  const sem::ReconstructParams rec_params{config.n, 0.0, config.line_shrink, 0.5};
  for (const auto& p : result.irm) {
    const auto sem_maps = sem_oracle_maps(p.quad, scene.scene, sem_params, rng);
    const auto rec = sem::reconstruct(p.quad, sem_maps, rec_params);
    if (!rec) {
      ++result.errors.sem_failed;
      continue;
    }
    if (rec->score < config.score_thresh) {
      ++result.errors.sem_low_score;
      continue;
    }
    result.detections.push_back({rec->polygon, rec->score});
  }
  return result;
}

PipelineReport run_pipeline(std::span<const GeneratedScene> scenes, const PipelineConfig& config) {
  config.validate();
  PipelineReport report;
  report.config = config;
  report.scenes.resize(scenes.size());

  std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, scenes.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(scenes.size());
  auto work = [&] {
    for (std::size_t i = next++; i < scenes.size(); i = next++) {
      try {
        report.scenes[i] = run_scene(scenes[i], config);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  for (const auto& s : report.scenes) report.errors += s.errors;
  for (double thr : config.eval_iou) {
    std::vector<evalproto::MatchCounts> counts;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const auto gts = scenes[i].scene.gt_polygons();
      counts.push_back(evalproto::match_image(report.scenes[i].detections, gts, thr));
    }
    report.reports.push_back(scenes.empty() ? evalproto::MatchReport{0, 0, 0, {}, thr}
                                            : evalproto::aggregate(counts, thr));
  }
  return report;
}

std::vector<GeneratedScene> make_corpus(std::uint64_t base_seed, int count, const SceneSpec& spec,
                                        const PipelineConfig& config) {
  if (count < 0) throw ValidationError("corpus size must be >= 0");
  SceneSpec s = spec;
  s.downsample = config.downsample;
  s.validate();
  const labelgen::DrLabelParams dr{config.downsample, config.shrink_ratio, config.l};
  const labelgen::SemLabelParams sem{config.line_shrink, config.tcl_thickness};
  std::vector<GeneratedScene> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(generate_scene(base_seed + static_cast<std::uint64_t>(i), s, dr, sem));
  return out;
}

json to_json(const PipelineConfig& c) {
  return json{{"seed", c.seed},
              {"downsample", c.downsample},
              {"shrink_ratio", c.shrink_ratio},
              {"l", c.l},
              {"dr_score_thresh", c.dr_score_thresh},
              {"dr_mode", std::string(to_string(c.dr_mode))},
              {"dr_noise", c.dr_noise},
              {"dr_receptive_field", c.dr_receptive_field},
              {"top_k", c.top_k},
              {"nms_iou", c.nms_iou},
              {"rt", c.rt},
              {"irm_fraction", c.irm_fraction},
              {"irm_roi_h", c.irm_roi_h},
              {"irm_roi_w", c.irm_roi_w},
              {"attention_sigma", c.attention_sigma},
              {"sem_enabled", c.sem_enabled},
              {"n", c.n},
              {"score_thresh", c.score_thresh},
              {"line_shrink", c.line_shrink},
              {"tcl_thickness", c.tcl_thickness},
              {"sem_noise", c.sem_noise},
              {"sem_roi_h", c.sem_roi_h},
              {"sem_roi_w", c.sem_roi_w},
              {"eval_iou", c.eval_iou}};
}

json to_json(const StageErrors& e) {
  return json{{"dr_degenerate", e.dr_degenerate},
              {"irm_degenerate", e.irm_degenerate},
              {"sem_failed", e.sem_failed},
              {"sem_low_score", e.sem_low_score}};
}

json to_json(const PipelineReport& report) {
  json scenes = json::array();
  for (const auto& s : report.scenes) {
    json dr = json::array(), irm = json::array(), det = json::array();
    for (const auto& p : s.dr) dr.push_back(json_io::to_json(p));
    for (const auto& p : s.irm) irm.push_back(json_io::to_json(p));
    for (const auto& d : s.detections) det.push_back(json_io::to_json(d));
    scenes.push_back({{"seed", s.seed},
                      {"dr", dr},
                      {"irm", irm},
                      {"detections", det},
                      {"errors", to_json(s.errors)}});
  }
  json reports = json::array();
  for (const auto& r : report.reports) reports.push_back(json_io::to_json(r));
  // Thread count does not affect results, so it stays out of the report.
  return json{{"config", to_json(report.config)},
              {"errors", to_json(report.errors)},
              {"evaluation", reports},
              {"scenes", scenes}};
}

json to_json(const SyntheticScene& scene) {
  json instances = json::array();
  for (const auto& inst : scene.instances)
    instances.push_back({{"kind", std::string(to_string(inst.kind))},
                         {"polygon", json_io::to_json(inst.gt_polygon)},
                         {"quad", json_io::to_json(inst.gt_quad)}});
  return json{{"width", scene.width},
              {"height", scene.height},
              {"seed", scene.seed},
              {"instances", instances}};
}

SyntheticScene scene_from_json(const json& j) {
  try {
    SyntheticScene scene;
    scene.width = j.at("width").get<int>();
    scene.height = j.at("height").get<int>();
    scene.seed = j.value("seed", std::uint64_t{0});
    if (scene.width < 1 || scene.height < 1) throw ValidationError("scene size must be positive");
    for (const auto& inst : j.at("instances")) {
      const auto poly = json_io::polygon_from_json(inst.at("polygon"));
      const auto quad = inst.contains("quad") ? json_io::quad_from_json(inst.at("quad"))
                                              : bounding_quad(poly);
      scene.instances.push_back(
          {poly, quad, text_kind_from_string(inst.value("kind", std::string("straight")))});
    }
    return scene;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad scene JSON: ") + e.what());
  }
}

SceneResult scene_result_from_json(const json& j) {
  try {
    SceneResult r;
    r.seed = j.value("seed", std::uint64_t{0});
    for (const auto& p : j.value("dr", json::array())) r.dr.push_back(json_io::proposal_from_json(p));
    for (const auto& p : j.value("irm", json::array()))
      r.irm.push_back(json_io::proposal_from_json(p));
    for (const auto& d : j.value("detections", json::array()))
      r.detections.push_back(json_io::scored_polygon_from_json(d));
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad scene result JSON: ") + e.what());
  }
}

}  // namespace lomo::pipeline
