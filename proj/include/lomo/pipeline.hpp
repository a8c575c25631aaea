#pragma once

// End-to-end detector driven by oracle predictors:
// DR decode -> NMS (top K) -> iterative refinement -> shape expression -> evaluation.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lomo/evalproto.hpp"
#include "lomo/oracles.hpp"
#include "lomo/scene.hpp"

namespace lomo::pipeline {

struct PipelineConfig {
  std::uint64_t seed = 0;

  // DR
  int downsample = 4;
  double shrink_ratio = 0.3;
  double l = 64.0;
  double dr_score_thresh = 0.5;
  DrMode dr_mode = DrMode::perfect;
  double dr_noise = 0.0;
  double dr_receptive_field = 128.0;

  // NMS
  int top_k = 24;
  double nms_iou = 0.5;

  // IRM
  int rt = 2;
  double irm_fraction = 1.0;
  int irm_roi_h = 8;
  int irm_roi_w = 64;
  double attention_sigma = 1.5;

  // SEM
  bool sem_enabled = true;
  int n = 7;
  double score_thresh = 0.1;
  double line_shrink = 0.1;
  double tcl_thickness = 0.2;
  double sem_noise = 0.0;
  int sem_roi_h = 32;
  int sem_roi_w = 256;

  std::vector<double> eval_iou = {0.5, 0.7};

  int threads = 0;  // 0: hardware concurrency

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

/// Every cell with score >= `score_thresh` proposes the quadrangle at its
/// center plus the 8 offsets (pixels), scored by the cell. Cells whose
/// corners do not form a valid quadrangle are skipped and counted.
std::vector<geom::Proposal> decode_dr(const RasterMap& score,
                                      const std::array<RasterMap, 8>& offsets,
                                      double score_thresh, std::size_t* degenerate = nullptr);

struct StageErrors {
  std::size_t dr_degenerate = 0;
  std::size_t irm_degenerate = 0;
  std::size_t sem_failed = 0;
  std::size_t sem_low_score = 0;

  StageErrors& operator+=(const StageErrors& o);
};

struct SceneResult {
  std::uint64_t seed = 0;
  std::vector<geom::Proposal> dr;   // after NMS
  std::vector<geom::Proposal> irm;  // after refinement
  /// Final detections: SEM polygons, or the refined quads when SEM is off.
  std::vector<evalproto::ScoredPolygon> detections;
  StageErrors errors;
};

struct PipelineReport {
  PipelineConfig config;
  std::vector<SceneResult> scenes;
  std::vector<evalproto::MatchReport> reports;  // one per eval IoU
  StageErrors errors;

  /// Report at a given IoU threshold; throws ValidationError if not evaluated.
  const evalproto::MatchReport& at(double iou) const;
};

SceneResult run_scene(const GeneratedScene& scene, const PipelineConfig& config);

/// Runs every scene (in parallel) and evaluates against scene gt polygons.
/// Results are in input order and independent of the thread count.
PipelineReport run_pipeline(std::span<const GeneratedScene> scenes, const PipelineConfig& config);

/// Scenes generated from seeds base_seed, base_seed + 1, ...
std::vector<GeneratedScene> make_corpus(std::uint64_t base_seed, int count, const SceneSpec& spec,
                                        const PipelineConfig& config);

nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const StageErrors& errors);
nlohmann::json to_json(const PipelineReport& report);
nlohmann::json to_json(const SyntheticScene& scene);

SyntheticScene scene_from_json(const nlohmann::json& j);
/// Reads one entry of the "scenes" array of a report.
SceneResult scene_result_from_json(const nlohmann::json& j);

}  // namespace lomo::pipeline
