#ifndef VSN_PATHWAYS_HPP_
#define VSN_PATHWAYS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vsn/core.hpp"
#include "vsn/rng.hpp"

namespace vsn {

constexpr int kFeatureDim = 8;

/// Per-pixel feature vectors, pixel-major layout.
struct FeatureStack {
  int height = 0;
  int width = 0;
  int dim = 0;
  std::vector<double> data;

  double at(int y, int x, int d) const {
    return data[(static_cast<std::size_t>(y) * width + x) * dim + d];
  }
};

enum class PathwayKind : std::uint8_t { kVisual = 0, kSpatial = 1 };

/// Two-layer per-pixel classifier. The spatial variant concatenates the
/// normalized (x,y) coordinates to the hidden layer before the output unit.
struct PathwayModel {
  PathwayKind kind = PathwayKind::kVisual;
  int d_in = 0;
  int hidden = 0;
  std::vector<double> w1;  // [d_in][hidden], row-major
  std::vector<double> b1;  // [hidden]
  std::vector<double> w2;  // [hidden + extra]
  double b2 = 0.0;

  int extra() const { return kind == PathwayKind::kSpatial ? 2 : 0; }
  void validate() const;
};

struct TrainConfig {
  // Reference lr for a deep-backbone variant with raw summed gradients;
  // with pixel-normalized gradients and this small classifier, 1e-2 is the
  // working default.
  static constexpr double kDeepBackboneLr = 1e-7;

  double lr = 1e-2;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 15;
  int iters_per_round = 2000;
  int rounds = 3;
  int hidden = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fan-in uniform init: weights in [-1/sqrt(d), +1/sqrt(d)], biases 0.
PathwayModel init_pathway(PathwayKind kind, int d_in, int hidden, Rng& rng);

/// D = 8 per pixel: R, G, B, gray, 5x5 box mean of gray, 11x11 box mean,
/// Sobel magnitude in [0,1], 5x5 local std. Gray images replicate their
/// single channel into R, G, B. With subtract_mean, each channel's image
/// mean is removed afterwards.
FeatureStack extract_features(const ImageTensor& image, bool subtract_mean = false);

/// Sigmoid output per pixel, strictly inside (0,1). Grids are consulted
/// only by spatial models; visual models ignore them.
ProbMap forward(const PathwayModel& model, const FeatureStack& feats, const CoordGrids& grids);

struct BceResult {
  double loss = 0.0;                // summed over all pixel terms
  std::vector<double> dlogit;       // p - t per pixel
};

/// Soft-target cross entropy, summed over pixels. Predictions at exactly
/// 0 or 1 are clamped to [1e-7, 1-1e-7] inside the logs.
BceResult bce_loss_and_grad(const ProbMap& pred, const ProbMap& target);

struct PathwayGrads {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;

  void reset(const PathwayModel& model);
  void scale(double s);
};

/// Accumulates dL/dparam into grads given per-pixel dL/dlogit.
void backprop(const PathwayModel& model, const FeatureStack& feats, const CoordGrids& grids,
              const std::vector<double>& dlogit, PathwayGrads& grads);

struct SgdState {
  std::vector<double> vw1, vb1, vw2;
  double vb2 = 0.0;

  void reset(const PathwayModel& model);
};

/// v <- momentum*v - lr*(grad + weight_decay*w); w <- w + v.
/// Non-finite gradients raise DivergenceError.
void sgd_step(PathwayModel& model, const PathwayGrads& grads, SgdState& state,
              const TrainConfig& cfg);

// ".vsm": magic "VSM1", kind byte, u32 d_in, u32 hidden, then little-endian
// f64 weights in declaration order (w1, b1, w2, b2).
void save_model(const std::string& path, const PathwayModel& model);
PathwayModel load_model(const std::string& path);

}  // namespace vsn

#endif  // VSN_PATHWAYS_HPP_
