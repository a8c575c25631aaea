#pragma once

// Seeded synthetic scenes: straight, long, curved and wavy text instances of
// constant thickness, non-overlapping, with their DR and SEM labels.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "lomo/geom.hpp"
#include "lomo/labelgen.hpp"

namespace lomo::pipeline {

enum class TextKind { straight, long_text, curved, wavy };

std::string_view to_string(TextKind kind);
TextKind text_kind_from_string(std::string_view s);

struct TextInstance {
  geom::ArbPolygon gt_polygon;
  /// Rectangle enclosing the polygon, aligned with its start-to-end chord.
  geom::Quadrangle gt_quad;
  TextKind kind = TextKind::straight;
};

struct SceneSpec {
  int width = 512;
  int height = 512;
  int downsample = 4;

  int straight = 2;
  int long_text = 1;
  int curved = 1;
  int wavy = 1;

  double min_thickness = 16.0;
  double max_thickness = 32.0;
  /// Length range of straight instances (px).
  double min_length = 80.0;
  double max_length = 220.0;
  /// Length / thickness range of long instances.
  double min_long_aspect = 8.0;
  double max_long_aspect = 16.0;
  /// Arc angle range of curved instances (degrees).
  double min_arc_deg = 60.0;
  double max_arc_deg = 180.0;
  /// Spine length range of curved and wavy instances, in multiples of thickness.
  double min_curve_aspect = 4.0;
  double max_curve_aspect = 9.0;
  double max_rotation_deg = 30.0;
  /// Point pairs per border for curved and wavy polygons.
  int curve_pairs = 7;
  double margin = 8.0;
  int max_attempts = 200;

  /// Throws ValidationError on inconsistent ranges.
  void validate() const;
};

struct SyntheticScene {
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  std::vector<TextInstance> instances;

  std::vector<geom::Quadrangle> gt_quads() const;
  std::vector<geom::ArbPolygon> gt_polygons() const;
};

struct GeneratedScene {
  SyntheticScene scene;
  labelgen::DrLabelSet dr;
  /// One label set per instance on the downsampled canvas grid.
  std::vector<labelgen::SemLabelSet> sem;
};

/// Polygon of constant thickness around a spine: `pairs` points at equal arc
/// length along `spine` (a dense polyline, left to right), offset by
/// +-thickness/2 along the normal. The upper border lies on the y-negative side.
geom::ArbPolygon tube_polygon(std::span<const geom::Point> spine, double thickness,
                              std::size_t pairs);

/// Chord-aligned bounding rectangle of a text polygon.
geom::Quadrangle bounding_quad(const geom::ArbPolygon& poly);

/// One random instance of `kind`, centered on the canvas center.
TextInstance random_instance(TextKind kind, std::mt19937_64& rng, const SceneSpec& spec);

/// Places the requested instances without overlap. Instances that cannot be
/// placed within max_attempts are dropped. Deterministic in `seed`.
SyntheticScene generate_instances(std::uint64_t seed, const SceneSpec& spec);

/// Instances plus their DR labels and per-instance SEM labels.
GeneratedScene generate_scene(std::uint64_t seed, const SceneSpec& spec,
                              const labelgen::DrLabelParams& dr_params = {},
                              const labelgen::SemLabelParams& sem_params = {});

/// Labels for an already built scene.
GeneratedScene label_scene(SyntheticScene scene, int downsample,
                           const labelgen::DrLabelParams& dr_params,
                           const labelgen::SemLabelParams& sem_params);

}  // namespace lomo::pipeline
