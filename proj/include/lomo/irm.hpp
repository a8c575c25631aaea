#pragma once

// Iterative refinement: RoI-transform sampling, corner-attention pooling and
// the refinement driver around an external corner-offset predictor.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lomo/geom.hpp"
#include "lomo/homography.hpp"

namespace lomo::irm {

/// C x H x W feature block, channel-major.
struct FeatureGrid {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  FeatureGrid() = default;
  FeatureGrid(int c, int h, int w, double fill = 0.0);

  double& at(int c, int h, int w) { return values[offset(c, h, w)]; }
  double at(int c, int h, int w) const { return values[offset(c, h, w)]; }
  std::size_t offset(int c, int h, int w) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(height) +
            static_cast<std::size_t>(h)) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(w);
  }
};

/// Output-cell -> source-point map. `valid` is 0 for cells outside the
/// aspect-preserving sub-rectangle.
struct SampleGrid {
  int height = 0;
  int width = 0;
  std::vector<geom::Point> points;
  std::vector<unsigned char> valid;
};

struct RoiGrid : SampleGrid {
  geom::RoiLayout layout;
};

/// Source points, in input-image coordinates, of an out_h x out_w RoI block
/// over `quad`. Throws DegenerateShape for zero-area quads.
RoiGrid roi_transform_grid(const geom::Quadrangle& quad, int out_h, int out_w);

/// Converts image coordinates to the index coordinates of a feature map with
/// the given stride (cell i is centered at (i + 0.5) * stride).
SampleGrid to_feature_coords(const SampleGrid& grid, double stride);

/// Bilinear interpolation of `feat` at every grid point (feature index
/// coordinates). Invalid cells and points outside the map produce 0.
FeatureGrid bilinear_sample(const FeatureGrid& feat, const SampleGrid& grid);

/// Four H x W spatial weightings, one per canonical corner.
struct CornerAttention {
  int height = 0;
  int width = 0;
  std::array<std::vector<double>, 4> maps;
};

/// Corner features: f_c[i][c] = sum_{h,w} f_r[c,h,w] * m_a[i][h,w].
std::array<std::vector<double>, 4> corner_aggregate(const FeatureGrid& f_r,
                                                    const CornerAttention& m_a);

/// Gaussian bumps (peak 1) centered on the four corner cells of the used RoI
/// region. Stands in for a learned attention head.
CornerAttention gaussian_corner_attention(const geom::RoiLayout& layout, double sigma_cells);

using Offsets8 = std::array<double, 8>;

/// Translates each canonical corner by its (dx, dy) and re-canonicalizes.
/// Throws DegenerateShape if the result is not a valid quadrangle.
geom::Quadrangle apply_corner_offsets(const geom::Quadrangle& quad, const Offsets8& offsets);

/// Per-corner (gt - proposal) with correspondence by canonical order.
Offsets8 make_offset_targets(const geom::Quadrangle& proposal, const geom::Quadrangle& gt);

/// Predicts corner offsets for a quadrangle from shared features. Must be
/// callable concurrently.
class OffsetPredictor {
 public:
  virtual ~OffsetPredictor() = default;
  virtual Offsets8 predict(const geom::Quadrangle& quad, const FeatureGrid& shared) const = 0;
};

struct RefineStats {
  std::size_t degenerate_steps = 0;
};

/// Applies the predictor `rt` times to every proposal. A step that yields a
/// degenerate quadrangle is skipped and the proposal keeps its last valid
/// state. Scores are carried through unchanged.
std::vector<geom::Proposal> refine(std::span<const geom::Proposal> proposals,
                                   const OffsetPredictor& predictor, const FeatureGrid& shared,
                                   int rt, RefineStats* stats = nullptr);

}  // namespace lomo::irm
