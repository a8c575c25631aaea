#pragma once

#include <array>

#include "lomo/geom.hpp"

namespace lomo::geom {

/// Projective map of the plane, stored as a row-major 3x3 matrix.
class Homography {
 public:
  Homography() = default;
  explicit Homography(const std::array<double, 9>& m) : m_(m) {}

  /// Maps the unit square (0,0),(1,0),(1,1),(0,1) onto quad vertices 0..3.
  static Homography unit_square_to(const Quadrangle& quad);

  Point apply(Point p) const;
  Homography inverse() const;

  const std::array<double, 9>& matrix() const { return m_; }

 private:
  std::array<double, 9> m_{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

/// Aspect-preserving placement of a quadrangle inside an out_h x out_w
/// block: the quad fills the leftmost used_w columns and top used_h rows,
/// where used_w / used_h follows the quad's mean-edge aspect ratio (capped
/// at out_w / out_h). Remaining cells are out of range.
struct RoiLayout {
  int out_h = 0;
  int out_w = 0;
  int used_h = 0;
  int used_w = 0;
  Homography unit_to_image;

  static RoiLayout fit(const Quadrangle& quad, int out_h, int out_w);

  bool in_range(int col, int row) const {
    return col >= 0 && row >= 0 && col < used_w && row < used_h;
  }
  /// Cell-index coordinates (integers are cell centers) to image coordinates.
  Point cell_to_image(double col, double row) const;
  /// Inverse of cell_to_image.
  Point image_to_cell(Point p) const;
};

}  // namespace lomo::geom
