#include "lomo/sem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "lomo/error.hpp"

namespace lomo::sem {

using geom::Point;

namespace {

constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

std::vector<int> largest_component(const std::vector<unsigned char>& mask, int w, int h) {
  std::vector<int> label(mask.size(), -1);
  std::vector<int> best;
  std::vector<int> current;
  for (int start = 0; start < w * h; ++start) {
    if (!mask[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0) continue;
    current.clear();
    std::vector<int> stack{start};
    label[static_cast<std::size_t>(start)] = start;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      current.push_back(i);
      const int x = i % w;
      const int y = i / w;
      for (int k = 0; k < 8; ++k) {
        const int nx = x + kDx[k];
        const int ny = y + kDy[k];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const int j = ny * w + nx;
        if (mask[static_cast<std::size_t>(j)] && label[static_cast<std::size_t>(j)] < 0) {
          label[static_cast<std::size_t>(j)] = start;
          stack.push_back(j);
        }
      }
    }
    if (current.size() > best.size()) best = current;
  }
  return best;
}

// Dijkstra over 8-connected foreground cells; returns distances and parents.
void geodesic(const std::vector<unsigned char>& fg, int w, int h, int source,
              std::vector<double>& dist, std::vector<int>& parent) {
  dist.assign(fg.size(), std::numeric_limits<double>::infinity());
  parent.assign(fg.size(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, i] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(i)]) continue;
    const int x = i % w;
    const int y = i / w;
    for (int k = 0; k < 8; ++k) {
      const int nx = x + kDx[k];
      const int ny = y + kDy[k];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const int j = ny * w + nx;
      if (!fg[static_cast<std::size_t>(j)]) continue;
      const double nd = d + ((kDx[k] != 0 && kDy[k] != 0) ? std::sqrt(2.0) : 1.0);
      if (nd < dist[static_cast<std::size_t>(j)]) {
        dist[static_cast<std::size_t>(j)] = nd;
        parent[static_cast<std::size_t>(j)] = i;
        queue.push({nd, j});
      }
    }
  }
}

int farthest(const std::vector<double>& dist) {
  int best = -1;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (std::isfinite(dist[i]) && (best < 0 || dist[i] > dist[static_cast<std::size_t>(best)]))
      best = static_cast<int>(i);
  return best;
}

// Continuous polyline with arc-length lookup.
struct Polyline {
  std::vector<Point> pts;
  std::vector<double> cum;

  explicit Polyline(std::vector<Point> p) : pts(std::move(p)) {
    cum.push_back(0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
      cum.push_back(cum.back() + geom::distance(pts[i - 1], pts[i]));
  }
  double length() const { return cum.back(); }

  // Segment index and fraction for arc length s in [0, length()].
  std::pair<std::size_t, double> locate(double s) const {
    s = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t j = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
    if (j + 1 >= pts.size()) j = pts.size() - 2;
    const double seg = cum[j + 1] - cum[j];
    return {j, seg > 0 ? (s - cum[j]) / seg : 0.0};
  }
  Point at(double s) const {
    const auto [j, t] = locate(s);
    return pts[j] + (pts[j + 1] - pts[j]) * t;
  }
};

Point rotate(Point v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

// Continues a center line past one of its ends on a circle of the curvature
// measured near that end, carrying the border offsets along.
struct EndExtrapolation {
  Point origin;
  Point up;    // border offsets at the origin
  Point down;
  Point dir;   // outward unit tangent at the origin
  double turn = 0.0;  // outward turning rate, radians per pixel

  Point center(double d) const {
    const double a = turn * d;
    if (std::abs(a) < 1e-9) return origin + dir * d;
    const Point side{-dir.y, dir.x};
    return origin + dir * (std::sin(a) / turn) + side * ((1.0 - std::cos(a)) / turn);
  }
  double angle(double d) const { return turn * d; }
};

// Outward tangent and turning rate at one end of a center line. `inward(t)`
// is the line at distance t from the end, `across(t)` the upper-minus-lower
// border vector there. Border offsets are laid along the local normal, so
// their rotation measures the curvature more reliably than a staircase path.
EndExtrapolation extrapolate_end(const auto& inward, const auto& across, double len,
                                 double min_window, Point up, Point down) {
  EndExtrapolation e;
  e.origin = inward(0.0);
  e.up = up;
  e.down = down;
  const double w = std::min(len, std::max(min_window, 0.1 * len));
  const Point n0 = geom::normalized(across(0.0));
  const Point n1 = geom::normalized(across(w));
  const Point chord = geom::normalized(inward(0.0) - inward(w));
  e.dir = {-n0.y, n0.x};
  if (geom::dot(e.dir, chord) < 0) e.dir = -e.dir;
  if (geom::norm(n0) == 0.0) e.dir = chord;
  if (geom::norm(n0) > 0.0 && geom::norm(n1) > 0.0)
    e.turn = std::atan2(geom::cross(n1, n0), geom::dot(n1, n0)) / w;
  return e;
}

Point central_tangent(const auto& point_at, double s, double lo, double hi, double delta) {
  const double a = std::max(lo, s - delta);
  const double b = std::min(hi, s + delta);
  return geom::normalized(point_at(b) - point_at(a));
}

}  // namespace

RasterMap thin_zhang_suen(const RasterMap& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<unsigned char> img(static_cast<std::size_t>((w + 2) * (h + 2)), 0);
  auto px = [&](int x, int y) -> unsigned char& {
    return img[static_cast<std::size_t>((y + 1) * (w + 2) + (x + 1))];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) px(x, y) = mask.at(x, y) > 0.5 ? 1 : 0;

  std::vector<std::pair<int, int>> removal;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      removal.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!px(x, y)) continue;
          // Neighbors P2..P9 clockwise from north.
          const int p[8] = {px(x, y - 1), px(x + 1, y - 1), px(x + 1, y), px(x + 1, y + 1),
                            px(x, y + 1), px(x - 1, y + 1), px(x - 1, y), px(x - 1, y - 1)};
          int b = 0;
          int a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            a += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          if (pass == 0) {
            if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0) continue;
          }
          removal.emplace_back(x, y);
        }
      }
      for (auto [x, y] : removal) px(x, y) = 0;
      if (!removal.empty()) changed = true;
    }
  }
  RasterMap out(w, h, mask.downsample());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = px(x, y);
  return out;
}

std::vector<Point> extract_center_line(const RasterMap& tcl, const RasterMap& tr,
                                       double threshold) {
  if (!tcl.same_shape(tr)) throw DimMismatch("extract_center_line: map shapes differ");
  const int w = tcl.width();
  const int h = tcl.height();
  std::vector<unsigned char> mask(tcl.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = tcl.values()[i] >= threshold && tr.values()[i] >= threshold;
  const auto component = largest_component(mask, w, h);
  if (component.empty()) throw EmptyCenterLine("no center-line cells inside the text region");

  RasterMap comp(w, h);
  for (int i : component) comp.values()[static_cast<std::size_t>(i)] = 1.0;
  const RasterMap skel = thin_zhang_suen(comp);
  std::vector<unsigned char> fg(skel.size(), 0);
  int seed = -1;
  for (std::size_t i = 0; i < fg.size(); ++i) {
    fg[i] = skel.values()[i] > 0.5;
    if (fg[i] && seed < 0) seed = static_cast<int>(i);
  }
  if (seed < 0) {
    // Thinning erased a tiny blob entirely; fall back to the blob itself.
    for (int i : component) fg[static_cast<std::size_t>(i)] = 1;
    seed = *std::min_element(component.begin(), component.end());
  }

  std::vector<double> dist;
  std::vector<int> parent;
  geodesic(fg, w, h, seed, dist, parent);
  const int a = farthest(dist);
  geodesic(fg, w, h, a, dist, parent);
  const int b = farthest(dist);

  std::vector<int> cells;
  for (int i = b; i >= 0; i = parent[static_cast<std::size_t>(i)]) cells.push_back(i);

  // Thinning shortens the band at its ends. Reconnect the skeleton path to
  // the geodesic extremes of the band itself.
  std::vector<unsigned char> band(mask.size(), 0);
  for (int i : component) band[static_cast<std::size_t>(i)] = 1;
  std::vector<double> band_dist;
  std::vector<int> band_parent;
  geodesic(band, w, h, cells.front(), band_dist, band_parent);
  const int far_end = farthest(band_dist);
  geodesic(band, w, h, far_end, band_dist, band_parent);
  const int near_end = farthest(band_dist);
  if (band_dist[static_cast<std::size_t>(cells.front())] > band_dist[static_cast<std::size_t>(cells.back())])
    std::reverse(cells.begin(), cells.end());
  // cells.front() is now the skeleton end closer to far_end.
  std::vector<int> joined;
  for (int i = cells.front(); i >= 0; i = band_parent[static_cast<std::size_t>(i)]) joined.push_back(i);
  std::reverse(joined.begin(), joined.end());
  joined.insert(joined.end(), cells.begin() + 1, cells.end());
  geodesic(band, w, h, near_end, band_dist, band_parent);
  for (int i = band_parent[static_cast<std::size_t>(cells.back())]; i >= 0;
       i = band_parent[static_cast<std::size_t>(i)])
    joined.push_back(i);

  std::vector<Point> path;
  for (int i : joined) path.push_back({static_cast<double>(i % w), static_cast<double>(i / w)});

  double min_x = path.front().x, max_x = min_x, min_y = path.front().y, max_y = min_y;
  for (Point p : path) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const Point s = path.front();
  const Point e = path.back();
  const bool by_x = (max_x - min_x) >= (max_y - min_y);
  const bool reverse = by_x ? (e.x < s.x || (e.x == s.x && e.y < s.y))
                            : (e.y < s.y || (e.y == s.y && e.x < s.x));
  if (reverse) std::reverse(path.begin(), path.end());
  return path;
}

std::vector<CenterLineSample> sample_center_line(std::span<const Point> path, int n) {
  if (n < 2) throw ValidationError("need at least 2 sample points");
  if (path.size() < 2) throw DegeneratePath("center line has fewer than 2 points");
  const Polyline line({path.begin(), path.end()});
  const double len = line.length();
  if (!(len > 0.0)) throw DegeneratePath("center line has zero arc length");
  const double spacing = len / (n - 1);
  std::vector<CenterLineSample> out;
  for (int k = 0; k < n; ++k) {
    const double s = k * spacing;
    CenterLineSample sample;
    sample.point = line.at(s);
    sample.tangent = central_tangent([&](double t) { return line.at(t); }, s, 0.0, len,
                                     0.5 * spacing);
    out.push_back(sample);
  }
  return out;
}

std::vector<CenterLineSample> sample_center_line(std::span<const Point> path,
                                                 const labelgen::SemMaps& maps,
                                                 const GridFrame& frame, int n,
                                                 double line_shrink) {
  if (n < 2) throw ValidationError("need at least 2 sample points");
  if (!(line_shrink >= 0.0 && line_shrink < 0.5))
    throw ValidationError("line_shrink must lie in [0, 0.5)");
  if (path.size() < 2) throw DegeneratePath("center line has fewer than 2 points");

  const std::size_t m = path.size();
  std::vector<Point> raw(m);
  std::vector<Point> upper(m);
  std::vector<Point> lower(m);
  for (std::size_t j = 0; j < m; ++j) {
    const int col = static_cast<int>(std::lround(path[j].x));
    const int row = static_cast<int>(std::lround(path[j].y));
    if (!maps.border_offsets[0].contains(col, row))
      throw DimMismatch("center-line path leaves the map");
    raw[j] = frame.to_image(path[j]);
    upper[j] = raw[j] + Point{maps.border_offsets[0].at(col, row), maps.border_offsets[1].at(col, row)};
    lower[j] = raw[j] + Point{maps.border_offsets[2].at(col, row), maps.border_offsets[3].at(col, row)};
  }

  // Staircase paths overestimate arc length; smooth positions with a
  // symmetric window that pins both endpoints.
  std::vector<Point> smooth(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t half = std::min<std::size_t>({2, j, m - 1 - j});
    Point acc{};
    for (std::size_t k = j - half; k <= j + half; ++k) acc += raw[k];
    smooth[j] = acc / static_cast<double>(2 * half + 1);
  }
  const Polyline line(smooth);
  const double len = line.length();
  if (!(len > 0.0)) throw DegeneratePath("center line has zero arc length");

  const double probe = std::min(0.25 * len, 3.0 * frame.cell_size());
  auto across = [&](double s) {
    const auto [j, t] = line.locate(s);
    return (upper[j] - lower[j]) * (1.0 - t) + (upper[j + 1] - lower[j + 1]) * t;
  };
  const auto head = extrapolate_end([&](double t) { return line.at(t); },
                                    [&](double t) { return across(t); }, len, 2.0 * probe,
                                    upper.front() - smooth.front(), lower.front() - smooth.front());
  const auto tail = extrapolate_end([&](double t) { return line.at(len - t); },
                                    [&](double t) { return across(len - t); }, len, 2.0 * probe,
                                    upper.back() - smooth.back(), lower.back() - smooth.back());

  // Thinning eats into the ends of the center line. Recover its true extent
  // from the farthest center-line cell near each end, plus half a cell for
  // the quantization of cell centers.
  double head_gain = 0.0;
  double tail_gain = 0.0;
  {
    const double reach = std::max(probe, 0.5 * len);
    const auto& tcl = maps.center_line;
    for (int row = 0; row < tcl.height(); ++row) {
      for (int col = 0; col < tcl.width(); ++col) {
        if (tcl.at(col, row) < 0.5 || maps.text_region.at(col, row) < 0.5) continue;
        const Point c = frame.to_image(col, row);
        if (geom::distance(c, head.origin) <= reach)
          head_gain = std::max(head_gain, geom::dot(c - head.origin, head.dir));
        if (geom::distance(c, tail.origin) <= reach)
          tail_gain = std::max(tail_gain, geom::dot(c - tail.origin, tail.dir));
      }
    }
    head_gain += 0.5 * frame.cell_size();
    tail_gain += 0.5 * frame.cell_size();
  }
  const double ext = (len + head_gain + tail_gain) * line_shrink / (1.0 - 2.0 * line_shrink);
  const double head_ext = head_gain + ext;
  const double tail_ext = tail_gain + ext;

  struct Section {
    Point center, up, down;
  };
  auto beyond = [](const EndExtrapolation& e, double d) -> Section {
    const Point c = e.center(d);
    const double a = e.angle(d);
    return {c, c + rotate(e.up, a), c + rotate(e.down, a)};
  };
  auto eval = [&](double s) -> Section {
    if (s < 0.0) return beyond(head, -s);
    if (s > len) return beyond(tail, s - len);
    const auto [j, t] = line.locate(s);
    return {smooth[j] + (smooth[j + 1] - smooth[j]) * t, upper[j] + (upper[j + 1] - upper[j]) * t,
            lower[j] + (lower[j + 1] - lower[j]) * t};
  };

  const double total = len + head_ext + tail_ext;
  const double spacing = total / (n - 1);
  std::vector<CenterLineSample> out;
  for (int k = 0; k < n; ++k) {
    const double s = -head_ext + k * spacing;
    const Section f = eval(s);
    CenterLineSample sample;
    sample.point = f.center;
    sample.tangent = central_tangent([&](double t) { return eval(t).center; }, s, -head_ext,
                                     len + tail_ext, 0.5 * spacing);
    sample.upper_offset = f.up - f.center;
    sample.lower_offset = f.down - f.center;
    out.push_back(sample);
  }
  return out;
}

geom::ArbPolygon generate_polygon(std::span<const CenterLineSample> samples) {
  if (samples.size() < 2) throw ValidationError("need at least 2 center-line samples");
  std::vector<Point> upper;
  std::vector<Point> lower;
  for (const auto& s : samples) {
    upper.push_back(s.point + s.upper_offset);
    lower.push_back(s.point + s.lower_offset);
  }
  auto poly = geom::ArbPolygon::from_borders(upper, lower);
  if (geom::signed_area(poly.vertices()) < 0.0) {
    // Borders arrived mirrored (e.g. path ordered right to left); reversing
    // the ring keeps the upper-then-lower layout.
    std::vector<Point> v(poly.vertices().rbegin(), poly.vertices().rend());
    poly = geom::ArbPolygon(std::move(v));
  }
  if (!(poly.area() > 1e-9) || !poly.simple())
    throw SelfIntersecting("border points do not form a simple polygon");
  return poly;
}

double score_polygon(const geom::ArbPolygon& poly, const RasterMap& tr, const GridFrame& frame) {
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (Point v : poly.vertices()) {
    const Point g = frame.to_grid(v);
    min_x = std::min(min_x, g.x);
    max_x = std::max(max_x, g.x);
    min_y = std::min(min_y, g.y);
    max_y = std::max(max_y, g.y);
  }
  const int c0 = std::max(0, static_cast<int>(std::floor(min_x)));
  const int c1 = std::min(tr.width() - 1, static_cast<int>(std::ceil(max_x)));
  const int r0 = std::max(0, static_cast<int>(std::floor(min_y)));
  const int r1 = std::min(tr.height() - 1, static_cast<int>(std::ceil(max_y)));
  double sum = 0.0;
  std::size_t count = 0;
  for (int row = r0; row <= r1; ++row)
    for (int col = c0; col <= c1; ++col) {
      if (!frame.in_range(col, row)) continue;
      if (!geom::point_in_polygon(frame.to_image(col, row), poly.vertices())) continue;
      sum += tr.at(col, row);
      ++count;
    }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double score_polygon(const geom::ArbPolygon& poly, const RasterMap& tr) {
  return score_polygon(poly, tr, GridFrame::image_grid(tr.downsample()));
}

std::optional<Reconstruction> reconstruct(const labelgen::SemMaps& maps, const GridFrame& frame,
                                          const ReconstructParams& params) {
  try {
    const auto path = extract_center_line(maps.center_line, maps.text_region, params.binarize);
    const auto samples = sample_center_line(path, maps, frame, params.n, params.line_shrink);
    auto poly = generate_polygon(samples);
    const double score = score_polygon(poly, maps.text_region, frame);
    if (score < params.score_thresh) return std::nullopt;
    return Reconstruction{std::move(poly), score, params.n};
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<Reconstruction> reconstruct(const geom::Quadrangle& proposal_region,
                                          const labelgen::SemMaps& maps,
                                          const ReconstructParams& params) {
  try {
    const auto frame = GridFrame::roi(proposal_region, maps.text_region.height(),
                                      maps.text_region.width());
    return reconstruct(maps, frame, params);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace lomo::sem
