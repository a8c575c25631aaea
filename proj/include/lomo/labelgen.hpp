#pragma once

// Raster targets for the direct regressor (score, 8 corner offsets, scale
// weight) and for the shape expression module (text region, text center
// line, 4 border offsets). Offsets are always in input pixels.

#include <array>
#include <span>
#include <vector>

#include "lomo/frame.hpp"
#include "lomo/geom.hpp"
#include "lomo/raster.hpp"

namespace lomo::labelgen {

/// Score map plus 8 offset channels (dx0, dy0, ..., dx3, dy3), each the
/// vector from a cell center to one canonical corner of its quadrangle.
struct DrMaps {
  RasterMap score;
  std::array<RasterMap, 8> offsets;
};

struct DrLabelSet : DrMaps {
  RasterMap weight;
  /// Index of the gt quadrangle owning each cell, -1 for background.
  std::vector<int> owner;
};

struct DrLabelParams {
  int downsample = 4;
  double shrink_ratio = 0.3;
  /// Normalizing constant of the scale weight map.
  double l = 64.0;
};

/// Shorter side of a quadrangle: the smaller of its mean width and mean height.
double shorter_side(const geom::Quadrangle& q);

/// Builds DR targets on a (width / downsample) x (height / downsample) grid.
/// Cells whose centers fall inside a shrunk gt quad are positive; overlaps go
/// to the smaller quad. Positive weights are l / shorter_side, negatives 1.
DrLabelSet make_dr_labels(std::span<const geom::Quadrangle> gt, int width, int height,
                          const DrLabelParams& params = {});

/// Text region, text center line and 4 border-offset channels
/// (dx_upper, dy_upper, dx_lower, dy_lower). The same layout is used for
/// labels and for predicted maps.
struct SemMaps {
  RasterMap text_region;
  RasterMap center_line;
  std::array<RasterMap, 4> border_offsets;
};
using SemLabelSet = SemMaps;

struct SemLabelParams {
  /// Fraction of the spine length removed from each end of the center line.
  double line_shrink = 0.1;
  /// Center-line thickness as a fraction of the local text height.
  double tcl_thickness = 0.2;
};

/// SEM targets for one polygon on the downsampled image grid.
SemLabelSet make_sem_labels(const geom::ArbPolygon& gt, int width, int height, int downsample,
                            const SemLabelParams& params = {});

/// SEM targets for one polygon on an arbitrary grid placed by `frame`
/// (e.g. the RoI block of a proposal). Cells out of the frame's range stay 0.
SemLabelSet make_sem_labels(const geom::ArbPolygon& gt, const GridFrame& frame, int grid_w,
                            int grid_h, const SemLabelParams& params = {});

/// Polyline through the midpoints of paired upper/lower border points, with
/// per-vertex tangents and local text height.
class Spine {
 public:
  explicit Spine(const geom::ArbPolygon& poly);

  std::span<const geom::Point> points() const { return points_; }
  double length() const { return cumulative_.back(); }

  struct Projection {
    geom::Point point;
    double arc = 0.0;       // arc length of the projection from the start
    double distance = 0.0;  // distance from the query point
    geom::Point tangent;    // unit tangent interpolated at the projection
    double height = 0.0;    // interpolated text height
  };
  Projection project(geom::Point p) const;

 private:
  std::vector<geom::Point> points_;
  std::vector<geom::Point> tangents_;
  std::vector<double> heights_;
  std::vector<double> cumulative_;
};

/// Point where the line through `origin` along `direction` meets `border`
/// closest to `origin`; falls back to the nearest border point when the line
/// misses.
geom::Point border_hit(geom::Point origin, geom::Point direction,
                       std::span<const geom::Point> border);

}  // namespace lomo::labelgen
