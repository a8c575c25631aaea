#pragma once

#include <optional>

#include "lomo/geom.hpp"
#include "lomo/homography.hpp"

namespace lomo {

/// Placement of a raster grid in image space. Maps continuous cell-index
/// coordinates (integer values are cell centers) to input-pixel coordinates.
/// Either a plain downsampled image grid or the RoI block of a quadrangle.
class GridFrame {
 public:
  static GridFrame image_grid(int downsample);
  static GridFrame roi(const geom::Quadrangle& quad, int out_h, int out_w);

  geom::Point to_image(double col, double row) const;
  geom::Point to_image(geom::Point cell) const { return to_image(cell.x, cell.y); }
  geom::Point to_grid(geom::Point image) const;

  /// False for RoI cells outside the aspect-preserving sub-rectangle.
  bool in_range(int col, int row) const;

  /// Approximate side length of one cell in input pixels (largest axis).
  double cell_size() const { return cell_size_; }

  const std::optional<geom::RoiLayout>& layout() const { return layout_; }

 private:
  int downsample_ = 1;
  double cell_size_ = 1.0;
  std::optional<geom::RoiLayout> layout_;
  geom::Homography inverse_;
};

}  // namespace lomo
