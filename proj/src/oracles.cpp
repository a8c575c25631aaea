#include "lomo/oracles.hpp"

#include <cmath>

#include "lomo/error.hpp"
#include "lomo/frame.hpp"

namespace lomo::pipeline {

using geom::Point;

std::string_view to_string(DrMode mode) {
  switch (mode) {
    case DrMode::perfect: return "perfect";
    case DrMode::noisy: return "noisy";
    case DrMode::truncated: return "truncated";
  }
  return "perfect";
}

DrMode dr_mode_from_string(std::string_view s) {
  if (s == "perfect") return DrMode::perfect;
  if (s == "noisy") return DrMode::noisy;
  if (s == "truncated") return DrMode::truncated;
  throw ValidationError("unknown DR mode: " + std::string(s));
}

geom::Quadrangle truncate_quad(const geom::Quadrangle& q, double max_length) {
  const double width = q.mean_width();
  if (!(max_length > 0)) throw ValidationError("receptive field must be positive");
  if (width <= max_length) return q;
  const double keep = max_length / width;
  const double t0 = 0.5 * (1.0 - keep);
  const double t1 = 0.5 * (1.0 + keep);
  const auto& v = q.vertices();
  auto lerp = [](Point a, Point b, double t) { return a + (b - a) * t; };
  return geom::Quadrangle::from_points(
      {lerp(v[0], v[1], t0), lerp(v[0], v[1], t1), lerp(v[3], v[2], t1), lerp(v[3], v[2], t0)});
}

labelgen::DrMaps dr_oracle_maps(const GeneratedScene& scene, const DrOracleParams& params,
                                std::mt19937_64& rng) {
  labelgen::DrMaps maps{scene.dr.score, scene.dr.offsets};
  if (params.mode == DrMode::perfect) return maps;

  const auto& gts = scene.scene.instances;
  std::vector<geom::Quadrangle> targets;
  for (const auto& inst : gts)
    targets.push_back(params.mode == DrMode::truncated
                          ? truncate_quad(inst.gt_quad, params.receptive_field)
                          : inst.gt_quad);
  std::normal_distribution<double> noise(0.0, params.noise_sigma);
  const int ds = maps.score.downsample();
  for (int row = 0; row < maps.score.height(); ++row) {
    for (int col = 0; col < maps.score.width(); ++col) {
      const std::size_t idx = maps.score.index(col, row);
      const int owner = scene.dr.owner[idx];
      if (owner < 0) continue;
      const Point c{(col + 0.5) * ds, (row + 0.5) * ds};
      const auto& quad = targets[static_cast<std::size_t>(owner)];
      for (std::size_t v = 0; v < 4; ++v) {
        const double nx = params.noise_sigma > 0 ? noise(rng) : 0.0;
        const double ny = params.noise_sigma > 0 ? noise(rng) : 0.0;
        maps.offsets[2 * v].values()[idx] = quad[v].x - c.x + nx;
        maps.offsets[2 * v + 1].values()[idx] = quad[v].y - c.y + ny;
      }
    }
  }
  return maps;
}

irm::FeatureGrid make_shared_features(const SyntheticScene& scene, int downsample) {
  const int w = scene.width / downsample;
  const int h = scene.height / downsample;
  irm::FeatureGrid feat(kSharedChannels, h, w, 0.0);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const Point c{(col + 0.5) * downsample, (row + 0.5) * downsample};
      const geom::Quadrangle* owner = nullptr;
      for (const auto& inst : scene.instances) {
        if (!geom::point_in_polygon(c, inst.gt_quad.vertices())) continue;
        if (!owner || inst.gt_quad.area() < owner->area()) owner = &inst.gt_quad;
      }
      if (!owner) continue;
      for (int v = 0; v < 4; ++v) {
        feat.at(2 * v, row, col) = (*owner)[static_cast<std::size_t>(v)].x;
        feat.at(2 * v + 1, row, col) = (*owner)[static_cast<std::size_t>(v)].y;
      }
      feat.at(8, row, col) = 1.0;
    }
  }
  return feat;
}

AttentionOracle::AttentionOracle(double fraction, double stride, int roi_h, int roi_w,
                                 double sigma_cells)
    : fraction_(fraction), stride_(stride), roi_h_(roi_h), roi_w_(roi_w), sigma_(sigma_cells) {
  if (!(stride > 0) || roi_h < 1 || roi_w < 1 || !(sigma_cells > 0))
    throw ValidationError("bad attention oracle parameters");
}

irm::Offsets8 AttentionOracle::predict(const geom::Quadrangle& quad,
                                       const irm::FeatureGrid& shared) const {
  if (shared.channels != kSharedChannels) throw DimMismatch("shared features need 9 channels");
  const auto roi = irm::roi_transform_grid(quad, roi_h_, roi_w_);
  const auto block = irm::bilinear_sample(shared, irm::to_feature_coords(roi, stride_));
  const auto attention = irm::gaussian_corner_attention(roi.layout, sigma_);
  const auto pooled = irm::corner_aggregate(block, attention);
  irm::Offsets8 out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double coverage = pooled[i][8];
    if (coverage < 1e-6) continue;
    out[2 * i] = fraction_ * (pooled[i][2 * i] / coverage - quad[i].x);
    out[2 * i + 1] = fraction_ * (pooled[i][2 * i + 1] / coverage - quad[i].y);
  }
  return out;
}

GtOracle::GtOracle(std::vector<geom::Quadrangle> gts, double fraction)
    : gts_(std::move(gts)), fraction_(fraction) {}

irm::Offsets8 GtOracle::predict(const geom::Quadrangle& quad, const irm::FeatureGrid&) const {
  const geom::Quadrangle* best = nullptr;
  double best_iou = 0.0;
  for (const auto& g : gts_) {
    const double iou = geom::polygon_iou(quad, g);
    if (iou > best_iou) {
      best_iou = iou;
      best = &g;
    }
  }
  irm::Offsets8 out{};
  if (!best) return out;
  out = irm::make_offset_targets(quad, *best);
  for (double& o : out) o *= fraction_;
  return out;
}

labelgen::SemMaps sem_oracle_maps(const geom::Quadrangle& proposal, const SyntheticScene& scene,
                                  const SemOracleParams& params, std::mt19937_64& rng) {
  const TextInstance* best = nullptr;
  double best_area = 0.0;
  for (const auto& inst : scene.instances) {
    const double a = geom::intersection_area(proposal.vertices(), inst.gt_polygon.vertices());
    if (a > best_area) {
      best_area = a;
      best = &inst;
    }
  }
  if (!best) {
    labelgen::SemMaps empty{RasterMap(params.roi_w, params.roi_h),
                            RasterMap(params.roi_w, params.roi_h),
                            {}};
    for (auto& m : empty.border_offsets) m = RasterMap(params.roi_w, params.roi_h);
    return empty;
  }
  const auto frame = GridFrame::roi(proposal, params.roi_h, params.roi_w);
  auto maps = labelgen::make_sem_labels(best->gt_polygon, frame, params.roi_w, params.roi_h,
                                        params.labels);
  if (params.noise_sigma > 0) {
    std::normal_distribution<double> noise(0.0, params.noise_sigma);
    for (std::size_t i = 0; i < maps.center_line.size(); ++i) {
      if (maps.center_line.values()[i] <= 0.5) continue;
      for (auto& m : maps.border_offsets) m.values()[i] += noise(rng);
    }
  }
  return maps;
}

}  // namespace lomo::pipeline
