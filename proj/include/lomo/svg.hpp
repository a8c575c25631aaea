#pragma once

// SVG overlay of a scene: ground truth in yellow, DR quadrangles in blue,
// refined quadrangles in green, reconstructed polygons in red.

#include <string>

#include "lomo/pipeline.hpp"
#include "lomo/scene.hpp"

namespace lomo::pipeline {

struct SvgStyle {
  double stroke_width = 2.0;
  bool include_dr = true;
  bool include_irm = true;
  bool include_sem = true;
};

/// Standalone SVG document. `result` may be null to draw ground truth only.
std::string render_svg(const SyntheticScene& scene, const SceneResult* result,
                       const SvgStyle& style = {});

}  // namespace lomo::pipeline
