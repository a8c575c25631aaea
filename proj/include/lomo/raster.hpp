#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace lomo {

/// Single-channel grid. Cell (col, row) covers `downsample` x `downsample`
/// input pixels; its center sits at ((col + 0.5) * downsample, (row + 0.5) * downsample).
/// Values are held in double precision and serialized as 32-bit floats.
class RasterMap {
 public:
  RasterMap() = default;
  RasterMap(int width, int height, int downsample = 1, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int downsample() const { return downsample_; }
  std::size_t size() const { return values_.size(); }

  double& at(int col, int row) { return values_[index(col, row)]; }
  double at(int col, int row) const { return values_[index(col, row)]; }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  bool contains(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const RasterMap& o) const { return width_ == o.width_ && height_ == o.height_; }

  friend bool operator==(const RasterMap&, const RasterMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int downsample_ = 1;
  std::vector<double> values_;
};

/// Throws DimMismatch unless every map has the shape of the first.
void require_same_shape(std::span<const RasterMap* const> maps, const char* what);

// RMAP format: "RMAP", then width, height, downsample as u32 LE, then
// width*height f32 LE values in row-major order.
void write_rmap(std::ostream& out, const RasterMap& map);
RasterMap read_rmap(std::istream& in);
void save_rmap(const std::filesystem::path& path, const RasterMap& map);
RasterMap load_rmap(const std::filesystem::path& path);

}  // namespace lomo
