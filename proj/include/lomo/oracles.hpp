#pragma once

// Stand-ins for the learned branches. Each oracle reads scene ground truth
// and emits what a trained branch would, optionally corrupted.

#include <cstdint>
#include <random>
#include <string_view>

#include "lomo/irm.hpp"
#include "lomo/labelgen.hpp"
#include "lomo/scene.hpp"

namespace lomo::pipeline {

enum class DrMode {
  perfect,    // labels verbatim
  noisy,      // Gaussian noise on every offset
  truncated,  // proposals capped at a receptive-field length, plus noise
};

std::string_view to_string(DrMode mode);
DrMode dr_mode_from_string(std::string_view s);

struct DrOracleParams {
  DrMode mode = DrMode::perfect;
  /// Standard deviation (px) of offset noise for noisy / truncated modes.
  double noise_sigma = 0.0;
  /// Longest extent (px) a truncated proposal can cover along the text.
  double receptive_field = 128.0;
};

/// Window of `q` centered along its reading direction whose length is at
/// most `max_length`. Returns `q` unchanged when it is already short enough.
geom::Quadrangle truncate_quad(const geom::Quadrangle& q, double max_length);

/// Score and offset maps a DR branch would produce for the scene.
labelgen::DrMaps dr_oracle_maps(const GeneratedScene& scene, const DrOracleParams& params,
                                std::mt19937_64& rng);

/// Channels of the shared feature map used by the attention oracle: the 8
/// corner coordinates of the gt quad covering a cell, then a coverage flag.
inline constexpr int kSharedChannels = 9;

/// Shared features at the scene's downsample stride.
irm::FeatureGrid make_shared_features(const SyntheticScene& scene, int downsample);

/// Corner-offset predictor that goes through the RoI transform and corner
/// attention: it pools the shared features around each proposal corner and
/// emits `fraction` of the distance to the pooled gt corner.
class AttentionOracle : public irm::OffsetPredictor {
 public:
  AttentionOracle(double fraction, double stride, int roi_h = 8, int roi_w = 64,
                  double sigma_cells = 1.5);
  irm::Offsets8 predict(const geom::Quadrangle& quad, const irm::FeatureGrid& shared) const override;

 private:
  double fraction_;
  double stride_;
  int roi_h_;
  int roi_w_;
  double sigma_;
};

/// Predictor that looks up the gt quad of highest IoU directly and emits
/// `fraction` of the corner offsets towards it.
class GtOracle : public irm::OffsetPredictor {
 public:
  GtOracle(std::vector<geom::Quadrangle> gts, double fraction);
  irm::Offsets8 predict(const geom::Quadrangle& quad, const irm::FeatureGrid& shared) const override;

 private:
  std::vector<geom::Quadrangle> gts_;
  double fraction_;
};

struct SemOracleParams {
  int roi_h = 32;
  int roi_w = 256;
  /// Standard deviation (px) of noise added to border offsets.
  double noise_sigma = 0.0;
  labelgen::SemLabelParams labels;
};

/// SEM maps over the RoI block of `proposal` for the gt polygon that overlaps
/// it most. All-zero maps when nothing overlaps.
labelgen::SemMaps sem_oracle_maps(const geom::Quadrangle& proposal, const SyntheticScene& scene,
                                  const SemOracleParams& params, std::mt19937_64& rng);

}  // namespace lomo::pipeline
