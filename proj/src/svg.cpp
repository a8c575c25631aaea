#include "lomo/svg.hpp"

#include <iomanip>
#include <sstream>

namespace lomo::pipeline {

namespace {

void polygon(std::ostringstream& out, std::span<const geom::Point> pts, const char* color,
             double width) {
  out << "    <polygon points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out << ' ';
    out << pts[i].x << ',' << pts[i].y;
  }
  out << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
}

}  // namespace

std::string render_svg(const SyntheticScene& scene, const SceneResult* result,
                       const SvgStyle& style) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << scene.width << "\" height=\""
      << scene.height << "\" viewBox=\"0 0 " << scene.width << ' ' << scene.height << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"#202020\"/>\n";

  out << "  <g id=\"gt\">\n";
  for (const auto& inst : scene.instances)
    polygon(out, inst.gt_polygon.vertices(), "yellow", style.stroke_width);
  out << "  </g>\n";

  if (result) {
    if (style.include_dr) {
      out << "  <g id=\"dr\">\n";
      for (const auto& p : result->dr) polygon(out, p.quad.vertices(), "blue", style.stroke_width);
      out << "  </g>\n";
    }
    if (style.include_irm) {
      out << "  <g id=\"irm\">\n";
      for (const auto& p : result->irm) polygon(out, p.quad.vertices(), "green", style.stroke_width);
      out << "  </g>\n";
    }
    if (style.include_sem) {
      out << "  <g id=\"sem\">\n";
      for (const auto& d : result->detections)
        polygon(out, d.polygon.vertices(), "red", style.stroke_width);
      out << "  </g>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace lomo::pipeline
