#include "lomo/loss.hpp"

#include <cmath>

#include "lomo/error.hpp"

namespace lomo::loss {

namespace {

double smooth_l1_term(double d) {
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

double smooth_l1_slope(double d) {
  if (d >= 1.0) return 1.0;
  if (d <= -1.0) return -1.0;
  return d;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string(what) + " is not finite");
}

// Smooth-L1 over `channels` restricted to cells where mask > 0.5, averaged
// over masked elements. Writes the gradient into grad[c * cells + i].
double masked_smooth_l1(const RasterMap& mask, std::span<const RasterMap> target,
                        std::span<const RasterMap> pred, std::span<double> grad) {
  const std::size_t cells = mask.size();
  std::size_t positives = 0;
  for (double m : mask.values()) positives += m > 0.5 ? 1 : 0;
  if (positives == 0) return 0.0;
  const double norm = 1.0 / static_cast<double>(positives * target.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < target.size(); ++c) {
    const auto t = target[c].values();
    const auto p = pred[c].values();
    for (std::size_t i = 0; i < cells; ++i) {
      if (mask.values()[i] <= 0.5) continue;
      const double d = p[i] - t[i];
      sum += smooth_l1_term(d);
      grad[c * cells + i] = smooth_l1_slope(d) * norm;
    }
  }
  return sum * norm;
}

}  // namespace

LossValue scale_invariant_dice(const RasterMap& y, const RasterMap& y_hat, const RasterMap& w) {
  if (!y.same_shape(y_hat) || !y.same_shape(w)) throw DimMismatch("dice: raster shapes differ");
  const auto yv = y.values();
  const auto pv = y_hat.values();
  const auto wv = w.values();
  double inter = 0.0;
  double label_mass = 0.0;
  double pred_mass = 0.0;
  for (std::size_t i = 0; i < yv.size(); ++i) {
    inter += yv[i] * pv[i] * wv[i];
    label_mass += yv[i] * wv[i];
    pred_mass += pv[i] * wv[i];
  }
  const double den = label_mass + pred_mass + kDiceEpsilon;
  LossValue out;
  out.value = 1.0 - 2.0 * inter / den;
  out.gradient.resize(yv.size());
  for (std::size_t i = 0; i < yv.size(); ++i)
    out.gradient[i] = -2.0 * wv[i] * (yv[i] * den - inter) / (den * den);
  check_finite(out.value, "dice loss");
  return out;
}

LossValue dice(const RasterMap& y, const RasterMap& y_hat) {
  return scale_invariant_dice(y, y_hat, RasterMap(y.width(), y.height(), y.downsample(), 1.0));
}

LossValue smooth_l1(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw DimMismatch("smooth_l1: lengths differ");
  LossValue out;
  out.gradient.resize(pred.size());
  if (pred.empty()) return out;
  const double norm = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.value += smooth_l1_term(d);
    out.gradient[i] = smooth_l1_slope(d) * norm;
  }
  out.value *= norm;
  return out;
}

LossValue dr_loss(const labelgen::DrLabelSet& labels, const labelgen::DrMaps& pred,
                  double lambda) {
  const RasterMap* shapes[] = {
      &labels.score,      &labels.weight,     &pred.score,        &labels.offsets[0],
      &labels.offsets[1], &labels.offsets[2], &labels.offsets[3], &labels.offsets[4],
      &labels.offsets[5], &labels.offsets[6], &labels.offsets[7], &pred.offsets[0],
      &pred.offsets[1],   &pred.offsets[2],   &pred.offsets[3],   &pred.offsets[4],
      &pred.offsets[5],   &pred.offsets[6],   &pred.offsets[7]};
  require_same_shape(shapes, "dr_loss");

  const std::size_t cells = labels.score.size();
  const LossValue cls = scale_invariant_dice(labels.score, pred.score, labels.weight);
  LossValue out;
  out.gradient.assign(cells * 9, 0.0);
  for (std::size_t i = 0; i < cells; ++i) out.gradient[i] = lambda * cls.gradient[i];
  const double loc = masked_smooth_l1(labels.score, labels.offsets, pred.offsets,
                                      std::span(out.gradient).subspan(cells));
  out.value = lambda * cls.value + loc;
  return out;
}

LossValue irm_loss(std::span<const Offsets8> targets, std::span<const Offsets8> preds) {
  if (targets.size() != preds.size()) throw DimMismatch("irm_loss: K differs");
  if (targets.empty()) throw ValidationError("irm_loss needs K >= 1");
  std::vector<double> t;
  std::vector<double> p;
  for (const auto& o : targets) t.insert(t.end(), o.begin(), o.end());
  for (const auto& o : preds) p.insert(p.end(), o.begin(), o.end());
  return smooth_l1(p, t);
}

LossValue sem_loss(std::span<const labelgen::SemLabelSet> labels,
                   std::span<const labelgen::SemMaps> preds, const SemWeights& weights) {
  if (labels.size() != preds.size()) throw DimMismatch("sem_loss: K differs");
  LossValue out;
  if (labels.empty()) return out;
  const double inv_k = 1.0 / static_cast<double>(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& lab = labels[k];
    const auto& pr = preds[k];
    const RasterMap* shapes[] = {
        &lab.text_region,       &lab.center_line,       &pr.text_region,
        &pr.center_line,        &lab.border_offsets[0], &lab.border_offsets[1],
        &lab.border_offsets[2], &lab.border_offsets[3], &pr.border_offsets[0],
        &pr.border_offsets[1],  &pr.border_offsets[2],  &pr.border_offsets[3]};
    require_same_shape(shapes, "sem_loss");

    const std::size_t cells = lab.text_region.size();
    const std::size_t base = out.gradient.size();
    out.gradient.resize(base + 6 * cells, 0.0);
    const auto tr = dice(lab.text_region, pr.text_region);
    const auto tcl = dice(lab.center_line, pr.center_line);
    std::vector<double> border_grad(4 * cells, 0.0);
    const double border =
        masked_smooth_l1(lab.center_line, lab.border_offsets, pr.border_offsets, border_grad);
    out.value += inv_k * (weights.text_region * tr.value + weights.center_line * tcl.value +
                          weights.border * border);
    for (std::size_t i = 0; i < cells; ++i) {
      out.gradient[base + i] = inv_k * weights.text_region * tr.gradient[i];
      out.gradient[base + cells + i] = inv_k * weights.center_line * tcl.gradient[i];
    }
    for (std::size_t i = 0; i < 4 * cells; ++i)
      out.gradient[base + 2 * cells + i] = inv_k * weights.border * border_grad[i];
  }
  return out;
}

LossValue total_loss(const LossValue& dr, const LossValue& irm, const LossValue& sem,
                     const LossWeights& gammas) {
  check_finite(dr.value, "L_dr");
  check_finite(irm.value, "L_irm");
  check_finite(sem.value, "L_sem");
  LossValue out;
  out.value = gammas.dr * dr.value + gammas.irm * irm.value + gammas.sem * sem.value;
  out.gradient.reserve(dr.gradient.size() + irm.gradient.size() + sem.gradient.size());
  for (double g : dr.gradient) out.gradient.push_back(gammas.dr * g);
  for (double g : irm.gradient) out.gradient.push_back(gammas.irm * g);
  for (double g : sem.gradient) out.gradient.push_back(gammas.sem * g);
  return out;
}

}  // namespace lomo::loss
