#ifndef VSN_PRIOR_HPP_
#define VSN_PRIOR_HPP_

#include <utility>
#include <vector>

#include "vsn/core.hpp"

namespace vsn {

/// Gaussian location prior. Defaults encode the bottom-right guess
/// (0.6 W, 0.75 H); the center-prior ablation preset is (0.5, 0.5).
struct PriorSpec {
  double cx_frac = 0.6;
  double cy_frac = 0.75;
  double sigma_frac = 0.15;  // std as fraction of min(H,W)

  void validate() const;

  static PriorSpec bottom_right() { return {0.6, 0.75, 0.15}; }
  static PriorSpec center() { return {0.5, 0.5, 0.15}; }
};

/// G(p) = exp(-((px-cx)^2 + (py-cy)^2) / (2 sigma^2)) with peak 1,
/// cx = cx_frac*(W-1), cy = cy_frac*(H-1), sigma = sigma_frac*min(H,W).
ProbMap gaussian_prior(const PriorSpec& spec, int height, int width);

/// Mean over images of mass-weighted centroid locations, in normalized
/// fractions. Zero-mass maps are skipped; an all-zero set is an error.
std::pair<double, double> estimate_prior_location(const std::vector<ProbMap>& maps);

}  // namespace vsn

#endif  // VSN_PRIOR_HPP_
