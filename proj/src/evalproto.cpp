#include "lomo/evalproto.hpp"

#include <algorithm>
#include <numeric>

#include "lomo/error.hpp"

namespace lomo::evalproto {

MatchCounts match_image(std::span<const ScoredPolygon> preds,
                        std::span<const geom::ArbPolygon> gts, double iou_threshold) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
  std::vector<bool> taken(gts.size(), false);
  MatchCounts counts;
  for (std::size_t p : order) {
    double best_iou = -1.0;
    std::size_t best = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = geom::polygon_iou(preds[p].polygon, gts[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    if (best < gts.size() && best_iou >= iou_threshold) {
      taken[best] = true;
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = gts.size() - counts.tp;
  return counts;
}

double harmonic_mean(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

MatchReport aggregate(std::span<const MatchCounts> per_image, double iou_threshold) {
  if (per_image.empty()) throw ValidationError("aggregate needs at least one image");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& c : per_image) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  MatchReport r;
  r.iou_threshold = iou_threshold;
  r.per_image.assign(per_image.begin(), per_image.end());
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.hmean = harmonic_mean(r.precision, r.recall);
  return r;
}

}  // namespace lomo::evalproto
