#include "vsn/filters.hpp"

#include <algorithm>
#include <cmath>

namespace vsn {

namespace {
inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

std::vector<double> to_gray(const ImageTensor& image) {
  const int h = image.height(), w = image.width();
  std::vector<double> g(static_cast<std::size_t>(h) * w);
  if (image.channels() == 1) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) g[static_cast<std::size_t>(y) * w + x] = image.at(0, y, x);
    return g;
  }
  if (image.channels() < 3) throw DataError("to_gray: expected 1 or >=3 channels");
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      g[static_cast<std::size_t>(y) * w + x] =
          0.299 * image.at(0, y, x) + 0.587 * image.at(1, y, x) + 0.114 * image.at(2, y, x);
    }
  }
  return g;
}

std::vector<double> box_mean(const std::vector<double>& v, int h, int w, int radius) {
  std::vector<double> out(v.size());
  const double inv = 1.0 / ((2 * radius + 1) * (2 * radius + 1));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = clampi(y + dy, 0, h - 1);
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = clampi(x + dx, 0, w - 1);
          s += v[static_cast<std::size_t>(yy) * w + xx];
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = s * inv;
    }
  }
  return out;
}

std::vector<double> sobel_magnitude(const std::vector<double>& v, int h, int w) {
  std::vector<double> out(v.size());
  const double scale = 1.0 / (4.0 * std::sqrt(2.0));
  auto px = [&](int y, int x) {
    return v[static_cast<std::size_t>(clampi(y, 0, h - 1)) * w + clampi(x, 0, w - 1)];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
      const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
      out[static_cast<std::size_t>(y) * w + x] =
          std::min(1.0, std::sqrt(gx * gx + gy * gy) * scale);
    }
  }
  return out;
}

std::vector<double> local_std(const std::vector<double>& v, int h, int w, int radius) {
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
  const std::vector<double> m1 = box_mean(v, h, w, radius);
  const std::vector<double> m2 = box_mean(sq, h, w, radius);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::sqrt(std::max(0.0, m2[i] - m1[i] * m1[i]));
  }
  return out;
}

}  // namespace vsn
