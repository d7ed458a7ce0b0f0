#ifndef VSN_SYNTH_HPP_
#define VSN_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "vsn/core.hpp"

namespace vsn {

enum class DistractorPolicy {
  kSameAppearanceElsewhere,   // defeats a purely visual network
  kDifferentAppearanceAtPrior,  // defeats position-driven scoring
  kMixed,                     // alternate the two per sample
};

struct SceneParams {
  int height = 48;
  int width = 48;
  std::array<double, 3> obj_color_mean = {0.80, 0.25, 0.20};
  double obj_color_std = 0.02;
  std::array<double, 3> alt_color_mean = {0.20, 0.35, 0.80};
  std::array<double, 3> bg_color = {0.45, 0.52, 0.48};
  double bg_texture_scale = 0.015;  // amplitude of the smooth background texture
  // multiplicative shading: background darkens toward the top-left corner,
  // full brightness at the bottom-right (lighting falls off away from the
  // biased corner, so local context carries a little location information)
  double bg_gradient = 0.6;
  double important_cx_frac = 0.6;
  double important_cy_frac = 0.75;
  double center_jitter_std = 0.12;  // fraction of the image side
  double radius_frac = 0.09;        // blob radius as fraction of min(H,W)
  int distractor_count = 1;
  DistractorPolicy policy = DistractorPolicy::kMixed;
  double noise_std = 0.01;
  double min_area_frac = 0.005;
  double max_area_frac = 0.20;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Deterministic scenes: textured background, one soft-edged important
/// blob jittered around the configured center, distractors per policy,
/// pixel noise. gt marks exactly the painted important-blob pixels.
std::vector<SampleRecord> generate_dataset(const SceneParams& params, int n);

}  // namespace vsn

#endif  // VSN_SYNTH_HPP_
