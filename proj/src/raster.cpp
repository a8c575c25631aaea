#include "lomo/raster.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lomo/error.hpp"

namespace lomo {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'M', 'A', 'P'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw IoError("truncated RMAP header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

RasterMap::RasterMap(int width, int height, int downsample, double fill)
    : width_(width), height_(height), downsample_(downsample) {
  if (width < 1 || height < 1) throw ValidationError("raster dimensions must be >= 1");
  if (downsample < 1) throw ValidationError("raster downsample must be >= 1");
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

void require_same_shape(std::span<const RasterMap* const> maps, const char* what) {
  for (const RasterMap* m : maps)
    if (!m->same_shape(*maps.front()))
      throw DimMismatch(std::string(what) + ": raster dimensions differ");
}

void write_rmap(std::ostream& out, const RasterMap& map) {
  out.write(kMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  put_u32(out, static_cast<std::uint32_t>(map.downsample()));
  for (double v : map.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) throw IoError("failed writing RMAP");
}

RasterMap read_rmap(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw IoError("missing RMAP magic");
  const auto w = get_u32(in);
  const auto h = get_u32(in);
  const auto ds = get_u32(in);
  if (w == 0 || h == 0 || ds == 0 || w > (1u << 16) || h > (1u << 16))
    throw IoError("implausible RMAP dimensions");
  RasterMap map(static_cast<int>(w), static_cast<int>(h), static_cast<int>(ds));
  for (double& v : map.values()) {
    const float f = std::bit_cast<float>(get_u32(in));
    if (!std::isfinite(f)) throw IoError("non-finite RMAP value");
    v = f;
  }
  return map;
}

void save_rmap(const std::filesystem::path& path, const RasterMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_rmap(out, map);
}

RasterMap load_rmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_rmap(in);
}

}  // namespace lomo
