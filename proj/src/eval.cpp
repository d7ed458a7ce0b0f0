#include "vsn/eval.hpp"

#include <algorithm>
#include <cmath>

namespace vsn {

ProbMap fuse(const ProbMap& f_map, const ProbMap& g_map) {
  if (f_map.height() != g_map.height() || f_map.width() != g_map.width()) {
    throw DataError("fuse: dimension mismatch");
  }
  std::vector<double> out(f_map.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (f_map[i] + g_map[i]);
  return ProbMap(f_map.height(), f_map.width(), std::move(out));
}

namespace {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

Counts count_at(const ProbMap& pred, const BinaryMask& gt, double t) {
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool pos = pred[i] >= t;
    if (gt[i]) {
      pos ? ++c.tp : ++c.fn;
    } else if (pos) {
      ++c.fp;
    }
  }
  return c;
}

double precision_of(const Counts& c) {
  return c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
}

double recall_of(const Counts& c) { return static_cast<double>(c.tp) / (c.tp + c.fn); }

}  // namespace

PRCurve pr_curve(const std::vector<ProbMap>& preds, const std::vector<BinaryMask>& gts,
                 int num_thresholds, PoolMode mode) {
  if (preds.size() != gts.size() || preds.empty()) {
    throw DataError("pr_curve: prediction/gt lists misaligned or empty");
  }
  if (num_thresholds < 2) throw DataError("pr_curve: need at least 2 thresholds");
  std::size_t total_pos = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].height() != gts[i].height() || preds[i].width() != gts[i].width()) {
      throw DataError("pr_curve: dimension mismatch at sample " + std::to_string(i));
    }
    total_pos += gts[i].count();
  }
  if (total_pos == 0) throw DataError("pr_curve: ground truth has no positive pixels");

  PRCurve curve;
  curve.thresholds.resize(num_thresholds);
  curve.precision.resize(num_thresholds);
  curve.recall.resize(num_thresholds);
  for (int k = 0; k < num_thresholds; ++k) {
    const double t = static_cast<double>(k) / (num_thresholds - 1);
    curve.thresholds[k] = t;
    if (mode == PoolMode::kMicro) {
      Counts pooled;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const Counts c = count_at(preds[i], gts[i], t);
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn += c.fn;
      }
      curve.precision[k] = precision_of(pooled);
      curve.recall[k] = recall_of(pooled);
    } else {
      double psum = 0.0, rsum = 0.0;
      std::size_t used = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        if (gts[i].count() == 0) continue;  // recall undefined for this image
        const Counts c = count_at(preds[i], gts[i], t);
        psum += precision_of(c);
        rsum += recall_of(c);
        ++used;
      }
      curve.precision[k] = psum / used;
      curve.recall[k] = rsum / used;
    }
  }
  return curve;
}

double max_f(const PRCurve& curve) {
  double best = 0.0;
  for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
    const double p = curve.precision[k], r = curve.recall[k];
    if (p + r > 0.0) best = std::max(best, 2.0 * p * r / (p + r));
  }
  return best;
}

double average_precision(const PRCurve& curve) {
  // thresholds ascend so recall descends; close the staircase at recall 0
  double ap = 0.0;
  const std::size_t n = curve.thresholds.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double r_next = k + 1 < n ? curve.recall[k + 1] : 0.0;
    ap += (curve.recall[k] - r_next) * curve.precision[k];
  }
  return ap;
}

}  // namespace vsn
