#ifndef VSN_REGIONS_HPP_
#define VSN_REGIONS_HPP_

#include <vector>

#include "vsn/core.hpp"

namespace vsn {

/// Multi-scale greedy-merge proposer parameters. Each threshold in
/// `scales` produces one partition; the union across scales gives the
/// overlapping region set.
struct ProposerParams {
  std::vector<double> scales = {0.005, 0.10, 0.30};
  int min_region_px = 4;
  double edge_weight = 0.5;  // gradient vs color mix

  void validate() const;
};

/// Segmentation agent: propose overlapping regions whose union covers
/// every pixel (the finest-scale partition is always included).
RegionSet propose_regions(const ImageTensor& image, const ProposerParams& params);

/// Region projection h(A,R): each region takes the mean of `a` over its
/// pixels; a pixel in several regions takes the max over those means.
/// Pixels covered by no region get 0.
ProbMap project(const ProbMap& a, const RegionSet& r);

}  // namespace vsn

#endif  // VSN_REGIONS_HPP_
