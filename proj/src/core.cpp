#include "vsn/core.hpp"

#include <algorithm>
#include <cmath>

namespace vsn {

namespace {

void check_unit_value(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw DataError(std::string(what) + ": value " + std::to_string(v) +
                    " is not a finite number in [0,1]");
  }
}

void check_dims(int h, int w, const char* what) {
  if (h < 1 || w < 1) {
    throw DataError(std::string(what) + ": dimensions " + std::to_string(h) + "x" +
                    std::to_string(w) + " invalid");
  }
}

}  // namespace

ProbMap::ProbMap(int height, int width, double fill) : height_(height), width_(width) {
  check_dims(height, width, "ProbMap");
  check_unit_value(fill, "ProbMap");
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

ProbMap::ProbMap(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  check_dims(height, width, "ProbMap");
  if (data_.size() != static_cast<std::size_t>(height) * width) {
    throw DataError("ProbMap: data length does not match HxW");
  }
  for (double v : data_) check_unit_value(v, "ProbMap");
}

void ProbMap::set(int y, int x, double v) {
  check_unit_value(v, "ProbMap::set");
  data_[static_cast<std::size_t>(y) * width_ + x] = v;
}

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, "ImageTensor");
  if (channels < 1) throw DataError("ImageTensor: channels < 1");
  check_unit_value(fill, "ImageTensor");
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_dims(height, width, "ImageTensor");
  if (channels < 1) throw DataError("ImageTensor: channels < 1");
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw DataError("ImageTensor: data length does not match HxWxC");
  }
  for (double v : data_) check_unit_value(v, "ImageTensor");
}

void ImageTensor::set(int c, int y, int x, double v) {
  check_unit_value(v, "ImageTensor::set");
  data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x] = v;
}

BinaryMask::BinaryMask(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
  check_dims(height, width, "BinaryMask");
  if (fill > 1) throw DataError("BinaryMask: fill must be 0 or 1");
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> data)
    : height_(height), width_(width), data_(std::move(data)) {
  check_dims(height, width, "BinaryMask");
  if (data_.size() != static_cast<std::size_t>(height) * width) {
    throw DataError("BinaryMask: data length does not match HxW");
  }
  for (std::uint8_t v : data_) {
    if (v > 1) throw DataError("BinaryMask: values must be 0 or 1");
  }
}

void BinaryMask::set(int y, int x, std::uint8_t v) {
  if (v > 1) throw DataError("BinaryMask::set: value must be 0 or 1");
  data_[static_cast<std::size_t>(y) * width_ + x] = v;
}

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t v : data_) n += v;
  return n;
}

void RegionSet::validate() const {
  if (regions.empty()) throw DataError("RegionSet: no regions");
  for (const BinaryMask& r : regions) {
    if (r.height() != height || r.width() != width) {
      throw DataError("RegionSet: region dims do not match set dims");
    }
    if (r.count() == 0) throw DataError("RegionSet: empty region");
  }
}

CoordGrids make_coord_grids(int height, int width) {
  if (height < 2 || width < 2) {
    throw DataError("make_coord_grids: both dimensions must be >= 2");
  }
  ProbMap xg(height, width), yg(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      xg.set(y, x, static_cast<double>(x) / (width - 1));
      yg.set(y, x, static_cast<double>(y) / (height - 1));
    }
  }
  return {std::move(xg), std::move(yg)};
}

ProbMap bilinear_resize(const ProbMap& map, int new_h, int new_w) {
  if (new_h < 1 || new_w < 1) throw DataError("bilinear_resize: zero target dimension");
  if (new_h == map.height() && new_w == map.width()) return map;

  const int sh = map.height(), sw = map.width();
  const double sy_scale = static_cast<double>(sh) / new_h;
  const double sx_scale = static_cast<double>(sw) / new_w;
  std::vector<double> out(static_cast<std::size_t>(new_h) * new_w);
  for (int y = 0; y < new_h; ++y) {
    double sy = (y + 0.5) * sy_scale - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(sh - 1));
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double fy = sy - y0;
    for (int x = 0; x < new_w; ++x) {
      double sx = (x + 0.5) * sx_scale - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(sw - 1));
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double fx = sx - x0;
      const double top = map.at(y0, x0) * (1.0 - fx) + map.at(y0, x1) * fx;
      const double bot = map.at(y1, x0) * (1.0 - fx) + map.at(y1, x1) * fx;
      out[static_cast<std::size_t>(y) * new_w + x] = top * (1.0 - fy) + bot * fy;
    }
  }
  return ProbMap(new_h, new_w, std::move(out));
}

}  // namespace vsn
