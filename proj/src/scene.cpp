#include "lomo/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lomo/error.hpp"

namespace lomo::pipeline {

using geom::Point;

namespace {

constexpr std::size_t kDenseSamples = 400;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return hi <= lo ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

Point rotate(Point p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

std::vector<Point> line_spine(double length) {
  return {Point{-0.5 * length, 0.0}, Point{0.5 * length, 0.0}};
}

// Circular arc of given spine length and angle, bulging up (cap) or down (cup).
std::vector<Point> arc_spine(double length, double angle, bool cap) {
  const double r = length / angle;
  std::vector<Point> pts;
  for (std::size_t i = 0; i < kDenseSamples; ++i) {
    const double t = static_cast<double>(i) / (kDenseSamples - 1);
    const double a = -0.5 * angle + t * angle;
    // a = 0 is the apex; x grows left to right.
    const double x = r * std::sin(a);
    const double y = r * (1.0 - std::cos(a));
    pts.push_back({x, cap ? y : -y});
  }
  return pts;
}

std::vector<Point> wave_spine(double length, double wavelength, double amplitude, double phase) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < kDenseSamples; ++i) {
    const double x = -0.5 * length + length * static_cast<double>(i) / (kDenseSamples - 1);
    pts.push_back({x, amplitude * std::sin(2 * std::numbers::pi * x / wavelength + phase)});
  }
  return pts;
}

geom::ArbPolygon transform(const geom::ArbPolygon& poly, double angle, Point shift) {
  std::vector<Point> v;
  for (Point p : poly.vertices()) v.push_back(rotate(p, angle) + shift);
  return geom::ArbPolygon(std::move(v));
}

// Rectangle grown by `margin` along its own axes.
std::array<Point, 4> inflate(const geom::Quadrangle& q, double margin) {
  const auto& v = q.vertices();
  const Point along = geom::normalized(v[1] - v[0]);
  const Point across = geom::normalized(v[3] - v[0]);
  const Point a = along * margin;
  const Point c = across * margin;
  return {v[0] - a - c, v[1] + a - c, v[2] + a + c, v[3] - a + c};
}

bool inside_canvas(const geom::Quadrangle& q, const SceneSpec& spec) {
  return std::all_of(q.vertices().begin(), q.vertices().end(), [&](Point p) {
    return p.x >= spec.margin && p.y >= spec.margin && p.x <= spec.width - spec.margin &&
           p.y <= spec.height - spec.margin;
  });
}

}  // namespace

std::string_view to_string(TextKind kind) {
  switch (kind) {
    case TextKind::straight: return "straight";
    case TextKind::long_text: return "long";
    case TextKind::curved: return "curved";
    case TextKind::wavy: return "wavy";
  }
  return "straight";
}

TextKind text_kind_from_string(std::string_view s) {
  if (s == "straight") return TextKind::straight;
  if (s == "long") return TextKind::long_text;
  if (s == "curved") return TextKind::curved;
  if (s == "wavy") return TextKind::wavy;
  throw ValidationError("unknown text kind: " + std::string(s));
}

void SceneSpec::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
  };
  require(width > 0 && height > 0, "canvas must be non-empty");
  require(downsample >= 1 && width % downsample == 0 && height % downsample == 0,
          "canvas must be divisible by downsample");
  require(straight >= 0 && long_text >= 0 && curved >= 0 && wavy >= 0,
          "instance counts must be non-negative");
  require(min_thickness > 0 && min_thickness <= max_thickness, "bad thickness range");
  require(min_length > 0 && min_length <= max_length, "bad length range");
  require(min_long_aspect >= 8.0 && min_long_aspect <= max_long_aspect,
          "long text needs aspect >= 8 and an ordered range");
  require(min_arc_deg > 0 && min_arc_deg <= max_arc_deg && max_arc_deg <= 270,
          "bad arc angle range");
  require(min_curve_aspect > 1 && min_curve_aspect <= max_curve_aspect, "bad curve aspect range");
  require(max_rotation_deg >= 0 && max_rotation_deg < 45, "rotation must stay below 45 degrees");
  require(curve_pairs >= 2, "curved polygons need at least 2 point pairs");
  require(margin >= 0 && max_attempts >= 1, "bad placement parameters");
}

std::vector<geom::Quadrangle> SyntheticScene::gt_quads() const {
  std::vector<geom::Quadrangle> out;
  for (const auto& i : instances) out.push_back(i.gt_quad);
  return out;
}

std::vector<geom::ArbPolygon> SyntheticScene::gt_polygons() const {
  std::vector<geom::ArbPolygon> out;
  for (const auto& i : instances) out.push_back(i.gt_polygon);
  return out;
}

geom::ArbPolygon tube_polygon(std::span<const Point> spine, double thickness, std::size_t pairs) {
  if (spine.size() < 2 || pairs < 2) throw ValidationError("tube needs a spine and >= 2 pairs");
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < spine.size(); ++i)
    cum.push_back(cum.back() + geom::distance(spine[i - 1], spine[i]));
  const double len = cum.back();
  if (!(len > 0)) throw DegenerateShape("tube spine has zero length");

  auto point_at = [&](double s) {
    s = std::clamp(s, 0.0, len);
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t j = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
    j = std::min(j, spine.size() - 2);
    const double seg = cum[j + 1] - cum[j];
    const double t = seg > 0 ? (s - cum[j]) / seg : 0.0;
    return spine[j] + (spine[j + 1] - spine[j]) * t;
  };

  const double h = 1e-3 * len;
  std::vector<Point> upper;
  std::vector<Point> lower;
  for (std::size_t k = 0; k < pairs; ++k) {
    const double s = len * static_cast<double>(k) / static_cast<double>(pairs - 1);
    const Point p = point_at(s);
    const Point t = geom::normalized(point_at(std::min(len, s + h)) - point_at(std::max(0.0, s - h)));
    const Point up{t.y, -t.x};
    upper.push_back(p + up * (0.5 * thickness));
    lower.push_back(p - up * (0.5 * thickness));
  }
  return geom::ArbPolygon::from_borders(upper, lower);
}

geom::Quadrangle bounding_quad(const geom::ArbPolygon& poly) {
  const std::size_t n = poly.pairs();
  const Point start = (poly.upper(0) + poly.lower(0)) * 0.5;
  const Point end = (poly.upper(n - 1) + poly.lower(n - 1)) * 0.5;
  Point along = geom::normalized(end - start);
  if (geom::norm(along) == 0) along = {1, 0};
  const Point across{-along.y, along.x};
  double a0 = std::numeric_limits<double>::infinity(), a1 = -a0, c0 = a0, c1 = -a0;
  for (Point p : poly.vertices()) {
    a0 = std::min(a0, geom::dot(p, along));
    a1 = std::max(a1, geom::dot(p, along));
    c0 = std::min(c0, geom::dot(p, across));
    c1 = std::max(c1, geom::dot(p, across));
  }
  auto at = [&](double a, double c) { return along * a + across * c; };
  return geom::Quadrangle::from_points({at(a0, c0), at(a1, c0), at(a1, c1), at(a0, c1)});
}

TextInstance random_instance(TextKind kind, std::mt19937_64& rng, const SceneSpec& spec) {
  const double extent = 0.85 * std::min(spec.width, spec.height);
  double thickness = uniform(rng, spec.min_thickness, spec.max_thickness);
  std::vector<Point> spine;
  std::size_t pairs = 2;
  switch (kind) {
    case TextKind::straight: {
      spine = line_spine(uniform(rng, spec.min_length, std::min(spec.max_length, extent)));
      break;
    }
    case TextKind::long_text: {
      const double aspect = uniform(rng, spec.min_long_aspect, spec.max_long_aspect);
      thickness = std::min(thickness, std::max(spec.min_thickness, extent / aspect));
      spine = line_spine(aspect * thickness);
      break;
    }
    case TextKind::curved: {
      const double length = thickness * uniform(rng, spec.min_curve_aspect, spec.max_curve_aspect);
      // Keep the inner radius at least half the thickness.
      const double max_angle = std::min(radians(spec.max_arc_deg), length / thickness);
      const double angle = uniform(rng, std::min(radians(spec.min_arc_deg), max_angle), max_angle);
      const bool cap = uniform(rng, 0.0, 1.0) < 0.5;
      spine = arc_spine(length, angle, cap);
      pairs = static_cast<std::size_t>(spec.curve_pairs);
      break;
    }
    case TextKind::wavy: {
      const double length =
          1.5 * thickness * uniform(rng, spec.min_curve_aspect, spec.max_curve_aspect);
      const double wavelength = uniform(rng, 0.6 * length, length);
      // Curvature radius of the spine stays >= 2x thickness.
      const double max_amp = std::min(
          1.5 * thickness, wavelength * wavelength / (8.0 * std::numbers::pi * std::numbers::pi * thickness));
      const double amplitude = uniform(rng, 0.5 * max_amp, max_amp);
      spine = wave_spine(length, wavelength, amplitude, uniform(rng, 0.0, 2 * std::numbers::pi));
      pairs = static_cast<std::size_t>(spec.curve_pairs);
      break;
    }
  }
  const double angle = radians(uniform(rng, -spec.max_rotation_deg, spec.max_rotation_deg));
  const Point center{0.5 * spec.width, 0.5 * spec.height};
  auto poly = transform(tube_polygon(spine, thickness, pairs), angle, center);
  auto quad = bounding_quad(poly);
  // Re-center on the bounding box so placement offsets are symmetric.
  Point mid{};
  for (Point p : quad.vertices()) mid += p * 0.25;
  poly = transform(poly, 0.0, center - mid);
  quad = bounding_quad(poly);
  return {std::move(poly), quad, kind};
}

SyntheticScene generate_instances(std::uint64_t seed, const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(seed);
  SyntheticScene scene;
  scene.width = spec.width;
  scene.height = spec.height;
  scene.seed = seed;

  std::vector<TextKind> kinds;
  kinds.insert(kinds.end(), static_cast<std::size_t>(spec.long_text), TextKind::long_text);
  kinds.insert(kinds.end(), static_cast<std::size_t>(spec.curved), TextKind::curved);
  kinds.insert(kinds.end(), static_cast<std::size_t>(spec.wavy), TextKind::wavy);
  kinds.insert(kinds.end(), static_cast<std::size_t>(spec.straight), TextKind::straight);

  std::vector<std::array<Point, 4>> occupied;
  for (TextKind kind : kinds) {
    for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
      TextInstance inst = random_instance(kind, rng, spec);
      const Point shift{uniform(rng, -0.5 * spec.width, 0.5 * spec.width),
                        uniform(rng, -0.5 * spec.height, 0.5 * spec.height)};
      inst.gt_polygon = transform(inst.gt_polygon, 0.0, shift);
      inst.gt_quad = bounding_quad(inst.gt_polygon);
      if (!inside_canvas(inst.gt_quad, spec)) continue;
      const auto grown = inflate(inst.gt_quad, 0.5 * spec.margin);
      const bool overlaps = std::any_of(occupied.begin(), occupied.end(), [&](const auto& o) {
        return geom::intersection_area(grown, o) > 0.0;
      });
      if (overlaps) continue;
      occupied.push_back(grown);
      scene.instances.push_back(std::move(inst));
      break;
    }
  }
  return scene;
}

GeneratedScene label_scene(SyntheticScene scene, int downsample,
                           const labelgen::DrLabelParams& dr_params,
                           const labelgen::SemLabelParams& sem_params) {
  GeneratedScene out;
  labelgen::DrLabelParams p = dr_params;
  p.downsample = downsample;
  const auto quads = scene.gt_quads();
  out.dr = labelgen::make_dr_labels(quads, scene.width, scene.height, p);
  for (const auto& inst : scene.instances)
    out.sem.push_back(
        labelgen::make_sem_labels(inst.gt_polygon, scene.width, scene.height, downsample, sem_params));
  out.scene = std::move(scene);
  return out;
}

GeneratedScene generate_scene(std::uint64_t seed, const SceneSpec& spec,
                              const labelgen::DrLabelParams& dr_params,
                              const labelgen::SemLabelParams& sem_params) {
  return label_scene(generate_instances(seed, spec), spec.downsample, dr_params, sem_params);
}

}  // namespace lomo::pipeline
