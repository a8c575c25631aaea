#pragma once

// Objective functions with analytic gradients with respect to predictions.

#include <array>
#include <span>
#include <vector>

#include "lomo/labelgen.hpp"
#include "lomo/raster.hpp"

namespace lomo::loss {

/// Loss value and gradient w.r.t. the predictions, flattened. The layout of
/// `gradient` is documented on each function.
struct LossValue {
  double value = 0.0;
  std::vector<double> gradient;
};

inline constexpr double kDiceEpsilon = 1e-6;

/// 1 - 2 sum(y*p*w) / (sum(y*w) + sum(p*w) + eps). Gradient: one entry per cell.
LossValue scale_invariant_dice(const RasterMap& y, const RasterMap& y_hat, const RasterMap& w);

/// Dice with unit weights.
LossValue dice(const RasterMap& y, const RasterMap& y_hat);

/// Mean over elements of 0.5 d^2 (|d| < 1) or |d| - 0.5, d = pred - target.
/// Gradient w.r.t. pred.
LossValue smooth_l1(std::span<const double> pred, std::span<const double> target);

/// lambda * L_cls + L_loc. L_loc is smooth-L1 over the 8 offset channels of
/// positive cells, averaged over all positive-cell elements (0 with no
/// positives). Gradient layout: score cells, then offset channel 0..7 cells.
LossValue dr_loss(const labelgen::DrLabelSet& labels, const labelgen::DrMaps& pred,
                  double lambda = 0.01);

using Offsets8 = std::array<double, 8>;

/// Corner-offset regression loss averaged over K x 8 coordinates. Gradient
/// w.r.t. preds, row-major K x 8.
LossValue irm_loss(std::span<const Offsets8> targets, std::span<const Offsets8> preds);

struct SemWeights {
  double text_region = 0.01;
  double center_line = 0.01;
  double border = 1.0;
};

/// Mean over K proposals of w1 * dice(TR) + w2 * dice(TCL) + w3 * L_border,
/// L_border being smooth-L1 over the 4 border channels on TCL-positive cells
/// (0 without positives). Gradient per proposal: TR cells, TCL cells, border
/// channel 0..3 cells; proposals concatenated.
LossValue sem_loss(std::span<const labelgen::SemLabelSet> labels,
                   std::span<const labelgen::SemMaps> preds, const SemWeights& weights = {});

struct LossWeights {
  double dr = 1.0;
  double irm = 1.0;
  double sem = 1.0;
};

/// Weighted sum; gradient is the concatenation of the scaled part gradients.
LossValue total_loss(const LossValue& dr, const LossValue& irm, const LossValue& sem,
                     const LossWeights& gammas = {});

}  // namespace lomo::loss
