#ifndef VSN_IO_HPP_
#define VSN_IO_HPP_

#include <string>

#include "vsn/core.hpp"

namespace vsn {

// PNG, 8-bit. Gray files load as 1-channel tensors, RGB(A) as 3-channel.
ImageTensor read_png(const std::string& path);
void write_png(const std::string& path, const ImageTensor& image);

// Masks are stored as gray PNG with values 0/255 (>=128 reads as 1).
BinaryMask read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const BinaryMask& mask);

// ".pmf": magic "PMF1", u32 H, u32 W, then H*W little-endian f32 row-major.
ProbMap read_pmf(const std::string& path);
void write_pmf(const std::string& path, const ProbMap& map);

// ProbMap rendered to gray PNG (rounded to 8 bits) for quick inspection.
void write_probmap_png(const std::string& path, const ProbMap& map);
ProbMap read_probmap_png(const std::string& path);

// ".rgs": text header "RGS1 H W K", then K lines of run-length encoded
// pixel runs "start:len,start:len,..." over row-major indices.
RegionSet read_rgs(const std::string& path);
void write_rgs(const std::string& path, const RegionSet& regions);

}  // namespace vsn

#endif  // VSN_IO_HPP_
