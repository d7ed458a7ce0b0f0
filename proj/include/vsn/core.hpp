#ifndef VSN_CORE_HPP_
#define VSN_CORE_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsn {

// Bad or inconsistent input data (files, dimensions, invalid values).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training produced non-finite numbers.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// H x W map of probabilities. Values are validated on construction:
/// anything non-finite or outside [0,1] is rejected, never clamped.
class ProbMap {
 public:
  ProbMap() = default;
  ProbMap(int height, int width, double fill = 0.0);
  ProbMap(int height, int width, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  double at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double operator[](std::size_t i) const { return data_[i]; }
  void set(int y, int x, double v);

  const std::vector<double>& data() const { return data_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// H x W x C image, channel-planar, values in [0,1]. Rejects bad values.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, double fill = 0.0);
  ImageTensor(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }

  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  void set(int c, int y, int x, double v);

  const std::vector<double>& data() const { return data_; }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// H x W mask of {0,1} values.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::uint8_t fill = 0);
  BinaryMask(int height, int width, std::vector<std::uint8_t> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  std::uint8_t at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t operator[](std::size_t i) const { return data_[i]; }
  void set(int y, int x, std::uint8_t v);

  std::size_t count() const;  // number of 1-pixels
  const std::vector<std::uint8_t>& data() const { return data_; }

  bool operator==(const BinaryMask& o) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Overlapping set of region masks over one image, all sharing (H,W).
struct RegionSet {
  int height = 0;
  int width = 0;
  std::vector<BinaryMask> regions;

  void validate() const;  // nonempty regions, matching dims, at least one region
};

/// Normalized coordinate grids: xgrid(x) = x/(W-1), ygrid(y) = y/(H-1).
struct CoordGrids {
  ProbMap xgrid;
  ProbMap ygrid;
};

struct SampleRecord {
  ImageTensor image;
  std::optional<RegionSet> regions;
  std::optional<BinaryMask> gt;
  std::string id;
};

CoordGrids make_coord_grids(int height, int width);

/// Resample at pixel centers (align-corners-false). Exact identity when
/// dimensions are unchanged; never exceeds the input value range.
ProbMap bilinear_resize(const ProbMap& map, int new_h, int new_w);

}  // namespace vsn

#endif  // VSN_CORE_HPP_
