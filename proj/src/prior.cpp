#include "vsn/prior.hpp"

#include <algorithm>
#include <cmath>

namespace vsn {

void PriorSpec::validate() const {
  if (!(cx_frac >= 0.0 && cx_frac <= 1.0 && cy_frac >= 0.0 && cy_frac <= 1.0)) {
    throw DataError("PriorSpec: center fractions must be in [0,1]");
  }
  if (!(sigma_frac > 0.0) || !std::isfinite(sigma_frac)) {
    throw DataError("PriorSpec: sigma_frac must be positive");
  }
}

ProbMap gaussian_prior(const PriorSpec& spec, int height, int width) {
  spec.validate();
  if (height < 1 || width < 1) throw DataError("gaussian_prior: dims must be >= 1");
  const double cx = spec.cx_frac * (width - 1);
  const double cy = spec.cy_frac * (height - 1);
  const double sigma = spec.sigma_frac * std::min(height, width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> data(static_cast<std::size_t>(height) * width);
  double peak = 0.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double v = std::exp(-(dx * dx + dy * dy) * inv);
      data[static_cast<std::size_t>(y) * width + x] = v;
      peak = std::max(peak, v);
    }
  }
  // renormalize so the pixel nearest the center is exactly 1
  for (double& v : data) v = std::min(1.0, v / peak);
  return ProbMap(height, width, std::move(data));
}

std::pair<double, double> estimate_prior_location(const std::vector<ProbMap>& maps) {
  if (maps.empty()) throw DataError("estimate_prior_location: empty map list");
  double sum_cx = 0.0, sum_cy = 0.0;
  std::size_t used = 0;
  for (const ProbMap& m : maps) {
    const int h = m.height(), w = m.width();
    double mass = 0.0, mx = 0.0, my = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = m.at(y, x);
        mass += v;
        if (w > 1) mx += v * (static_cast<double>(x) / (w - 1));
        if (h > 1) my += v * (static_cast<double>(y) / (h - 1));
      }
    }
    if (mass <= 0.0) continue;  // zero-mass image skipped
    sum_cx += (w > 1 ? mx / mass : 0.5);
    sum_cy += (h > 1 ? my / mass : 0.5);
    ++used;
  }
  if (used == 0) throw DataError("estimate_prior_location: all maps have zero mass");
  return {sum_cx / used, sum_cy / used};
}

}  // namespace vsn
