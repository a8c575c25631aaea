#include "lomo/json_io.hpp"

#include <fstream>

#include "lomo/error.hpp"

namespace lomo::json_io {

json to_json(std::span<const geom::Point> pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

json to_json(const geom::ArbPolygon& poly) { return to_json(poly.vertices()); }

json to_json(const geom::Quadrangle& quad) {
  return to_json(std::span<const geom::Point>(quad.vertices()));
}

json to_json(const geom::Proposal& p) { return {{"vertices", to_json(p.quad)}, {"score", p.score}}; }

json to_json(const evalproto::ScoredPolygon& p) {
  return {{"vertices", to_json(p.polygon)}, {"score", p.score}};
}

json to_json(const sem::Reconstruction& r) {
  return {{"vertices", to_json(r.polygon)}, {"score", r.score}, {"n", r.n}};
}

json to_json(const evalproto::MatchReport& r) {
  json per = json::array();
  for (const auto& c : r.per_image) per.push_back({{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}});
  return {{"iou_threshold", r.iou_threshold},
          {"recall", r.recall},
          {"precision", r.precision},
          {"hmean", r.hmean},
          {"per_image", per}};
}

std::vector<geom::Point> points_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of [x, y] pairs");
  std::vector<geom::Point> pts;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ValidationError("vertex must be [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

geom::ArbPolygon polygon_from_json(const json& j) { return geom::ArbPolygon(points_from_json(j)); }

geom::Quadrangle quad_from_json(const json& j) {
  const auto pts = points_from_json(j);
  if (pts.size() != 4) throw ValidationError("quadrangle needs 4 vertices");
  return geom::Quadrangle::from_points({pts[0], pts[1], pts[2], pts[3]});
}

geom::Proposal proposal_from_json(const json& j) {
  if (!j.is_object() || !j.contains("vertices")) throw ValidationError("proposal needs vertices");
  return {quad_from_json(j.at("vertices")), j.value("score", 1.0)};
}

evalproto::ScoredPolygon scored_polygon_from_json(const json& j) {
  if (j.is_array()) return {polygon_from_json(j), 1.0};
  if (!j.is_object() || !j.contains("vertices")) throw ValidationError("polygon needs vertices");
  return {polygon_from_json(j.at("vertices")), j.value("score", 1.0)};
}

evalproto::MatchReport report_from_json(const json& j) {
  evalproto::MatchReport r;
  r.iou_threshold = j.at("iou_threshold").get<double>();
  r.recall = j.at("recall").get<double>();
  r.precision = j.at("precision").get<double>();
  r.hmean = j.at("hmean").get<double>();
  for (const auto& c : j.at("per_image"))
    r.per_image.push_back({c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                           c.at("fn").get<std::size_t>()});
  return r;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lomo::json_io
