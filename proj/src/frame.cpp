#include "lomo/frame.hpp"

#include <algorithm>

#include "lomo/error.hpp"

namespace lomo {

GridFrame GridFrame::image_grid(int downsample) {
  if (downsample < 1) throw ValidationError("downsample must be >= 1");
  GridFrame f;
  f.downsample_ = downsample;
  f.cell_size_ = downsample;
  return f;
}

GridFrame GridFrame::roi(const geom::Quadrangle& quad, int out_h, int out_w) {
  GridFrame f;
  f.layout_ = geom::RoiLayout::fit(quad, out_h, out_w);
  f.inverse_ = f.layout_->unit_to_image.inverse();
  f.cell_size_ = std::max(quad.mean_width() / f.layout_->used_w,
                          quad.mean_height() / f.layout_->used_h);
  return f;
}

geom::Point GridFrame::to_image(double col, double row) const {
  if (layout_) return layout_->cell_to_image(col, row);
  return {(col + 0.5) * downsample_, (row + 0.5) * downsample_};
}

geom::Point GridFrame::to_grid(geom::Point image) const {
  if (layout_) {
    const geom::Point u = inverse_.apply(image);
    return {u.x * layout_->used_w - 0.5, u.y * layout_->used_h - 0.5};
  }
  return {image.x / downsample_ - 0.5, image.y / downsample_ - 0.5};
}

bool GridFrame::in_range(int col, int row) const {
  return layout_ ? layout_->in_range(col, row) : (col >= 0 && row >= 0);
}

}  // namespace lomo
