#pragma once

// ICDAR-style detection evaluation: one-to-one IoU matching per image and
// micro-averaged recall / precision / Hmean.

#include <cstddef>
#include <span>
#include <vector>

#include "lomo/geom.hpp"

namespace lomo::evalproto {

struct ScoredPolygon {
  geom::ArbPolygon polygon;
  double score = 0.0;
};

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct MatchReport {
  double recall = 0.0;
  double precision = 0.0;
  double hmean = 0.0;
  std::vector<MatchCounts> per_image;
  double iou_threshold = 0.5;
};

/// Greedy one-to-one matching: predictions in descending score order (ties by
/// input index) take the unmatched gt of highest IoU if it reaches the threshold.
MatchCounts match_image(std::span<const ScoredPolygon> preds,
                        std::span<const geom::ArbPolygon> gts, double iou_threshold);

/// 2PR / (P + R), 0 when P + R = 0.
double harmonic_mean(double precision, double recall);

/// Micro-averaged P / R / H over images.
MatchReport aggregate(std::span<const MatchCounts> per_image, double iou_threshold);

}  // namespace lomo::evalproto
