#ifndef VSN_EVAL_HPP_
#define VSN_EVAL_HPP_

#include <vector>

#include "vsn/core.hpp"

namespace vsn {

struct PRCurve {
  std::vector<double> thresholds;  // increasing, in [0,1]
  std::vector<double> precision;
  std::vector<double> recall;  // non-increasing with threshold
};

enum class PoolMode {
  kMicro,  // pool pixel counts over the whole dataset (default)
  kMacro,  // per-image curves averaged pointwise
};

/// Test-time fusion: pointwise mean of the two pathway outputs.
ProbMap fuse(const ProbMap& f_map, const ProbMap& g_map);

/// Threshold sweep at k/(num_thresholds-1); a pixel is positive when
/// pred >= t. Precision is 1 by convention when nothing is predicted.
PRCurve pr_curve(const std::vector<ProbMap>& preds, const std::vector<BinaryMask>& gts,
                 int num_thresholds = 101, PoolMode mode = PoolMode::kMicro);

/// Max over thresholds of 2PR/(P+R).
double max_f(const PRCurve& curve);

/// Area under the recall-ordered precision staircase.
double average_precision(const PRCurve& curve);

}  // namespace vsn

#endif  // VSN_EVAL_HPP_
