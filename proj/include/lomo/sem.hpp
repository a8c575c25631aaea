#pragma once

// Text polygon generation from shape-expression maps: center-line
// extraction, equidistant sampling, border-point assembly and scoring.

#include <optional>
#include <span>
#include <vector>

#include "lomo/frame.hpp"
#include "lomo/geom.hpp"
#include "lomo/labelgen.hpp"
#include "lomo/raster.hpp"

namespace lomo::sem {

struct CenterLineSample {
  geom::Point point;
  geom::Point tangent;  // unit
  geom::Point upper_offset;
  geom::Point lower_offset;
};

/// Zhang-Suen thinning of a binary mask (values > 0.5 are foreground).
RasterMap thin_zhang_suen(const RasterMap& mask);

/// Largest 8-connected component of (tcl & tr), thinned to a one-cell path
/// whose ends are reconnected to the geodesic extremes of the component, and
/// ordered from its left endpoint (smaller x, ties smaller y). When the
/// path is taller than wide the ordering uses y instead. Points are cell
/// indices. Throws EmptyCenterLine when nothing survives masking.
std::vector<geom::Point> extract_center_line(const RasterMap& tcl, const RasterMap& tr,
                                             double threshold = 0.5);

/// n samples at equal arc-length spacing along `path`, including both
/// endpoints, with central-difference tangents. Offsets are left at zero.
/// Throws DegeneratePath for zero arc length, ValidationError for n < 2.
std::vector<CenterLineSample> sample_center_line(std::span<const geom::Point> path, int n);

/// Samples a center-line path given in cell indices of `maps`, placed in the
/// image by `frame`. Border points come from the 4 border-offset channels.
/// The path is extended at both ends, following the curvature measured from
/// the border offsets, first to the farthest center-line cell and then by the
/// share of length removed by `line_shrink` when the center line was drawn.
std::vector<CenterLineSample> sample_center_line(std::span<const geom::Point> path,
                                                 const labelgen::SemMaps& maps,
                                                 const GridFrame& frame, int n,
                                                 double line_shrink);

/// Upper points = point + upper_offset, lower points = point + lower_offset,
/// linked clockwise. Throws SelfIntersecting for non-simple or zero-area
/// results.
geom::ArbPolygon generate_polygon(std::span<const CenterLineSample> samples);

/// Mean of `tr` over cells whose image-space centers lie inside `poly`; 0 if none.
double score_polygon(const geom::ArbPolygon& poly, const RasterMap& tr, const GridFrame& frame);

/// Same, for a map on the plain downsampled image grid.
double score_polygon(const geom::ArbPolygon& poly, const RasterMap& tr);

struct ReconstructParams {
  int n = 7;
  double score_thresh = 0.1;
  double line_shrink = 0.1;
  double binarize = 0.5;
};

struct Reconstruction {
  geom::ArbPolygon polygon;
  double score = 0.0;
  int n = 0;
};

/// extract -> sample -> generate -> score. Empty when any step fails or the
/// score is below the threshold.
std::optional<Reconstruction> reconstruct(const labelgen::SemMaps& maps, const GridFrame& frame,
                                          const ReconstructParams& params = {});

/// Maps defined over the RoI block of `proposal_region`; the block size is
/// taken from the maps.
std::optional<Reconstruction> reconstruct(const geom::Quadrangle& proposal_region,
                                          const labelgen::SemMaps& maps,
                                          const ReconstructParams& params = {});

}  // namespace lomo::sem
