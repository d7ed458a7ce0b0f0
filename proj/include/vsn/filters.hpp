#ifndef VSN_FILTERS_HPP_
#define VSN_FILTERS_HPP_

#include <vector>

#include "vsn/core.hpp"

namespace vsn {

/// Luma gray (0.299 R + 0.587 G + 0.114 B); 1-channel images pass through.
std::vector<double> to_gray(const ImageTensor& image);

/// Box mean over a (2r+1)x(2r+1) window with replicated borders.
std::vector<double> box_mean(const std::vector<double>& v, int h, int w, int radius);

/// Sobel gradient magnitude of a gray plane, scaled into [0,1]
/// (divided by 4*sqrt(2), the maximum attainable on [0,1] inputs).
std::vector<double> sobel_magnitude(const std::vector<double>& v, int h, int w);

/// Windowed standard deviation, same window/border rules as box_mean.
std::vector<double> local_std(const std::vector<double>& v, int h, int w, int radius);

}  // namespace vsn

#endif  // VSN_FILTERS_HPP_
