#include "vsn/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "vsn/eval.hpp"

namespace vsn {

const char* round_kind_name(RoundKind kind) {
  switch (kind) {
    case RoundKind::kInitial: return "initial";
    case RoundKind::kV2S: return "v2s";
    case RoundKind::kS2V: return "s2v";
  }
  return "?";
}

RoundKind round_kind_for(int round_index) {
  if (round_index == 0) return RoundKind::kInitial;
  return round_index % 2 == 1 ? RoundKind::kV2S : RoundKind::kS2V;
}

namespace {

constexpr double kEarlyStopDelta = 1e-3;

ProbMap teacher_map(RoundKind kind, const TrainState& state, const FeatureStack& feats,
                    const CoordGrids& grids, const PriorSpec& spec) {
  switch (kind) {
    case RoundKind::kInitial:
      return gaussian_prior(spec, feats.height, feats.width);
    case RoundKind::kV2S:
      return forward(state.visual, feats, grids);
    case RoundKind::kS2V:
      return forward(state.spatial, feats, grids);
  }
  throw DataError("teacher_map: bad round kind");
}

// Affine stretch to [0,1]; constant maps pass through unchanged.
ProbMap normalize_contrast(ProbMap map) {
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    lo = std::min(lo, map[i]);
    hi = std::max(hi, map[i]);
  }
  if (hi - lo <= 1e-12) return map;
  std::vector<double> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    out[i] = std::clamp((map[i] - lo) / (hi - lo), 0.0, 1.0);
  }
  return ProbMap(map.height(), map.width(), std::move(out));
}

struct Cache {
  std::vector<FeatureStack> feats;
  CoordGrids grids;  // all samples share one size

  Cache(const std::vector<SampleRecord>& dataset, bool subtract_mean) {
    if (dataset.empty()) throw DataError("training: empty dataset");
    const int h = dataset.front().image.height();
    const int w = dataset.front().image.width();
    grids = make_coord_grids(h, w);
    feats.reserve(dataset.size());
    for (const SampleRecord& s : dataset) {
      if (!s.regions) throw DataError("training: sample " + s.id + " has no regions");
      if (s.image.height() != h || s.image.width() != w) {
        throw DataError("training: all samples must share one image size");
      }
      feats.push_back(extract_features(s.image, subtract_mean));
    }
  }
};

std::vector<ProbMap> fused_predictions(const TrainState& state, const Cache& cache) {
  std::vector<ProbMap> out;
  out.reserve(cache.feats.size());
  for (const FeatureStack& f : cache.feats) {
    out.push_back(fuse(forward(state.visual, f, cache.grids),
                       forward(state.spatial, f, cache.grids)));
  }
  return out;
}

std::optional<double> fused_mf(const std::vector<SampleRecord>& dataset,
                               const std::vector<ProbMap>& preds) {
  std::vector<BinaryMask> gts;
  for (const SampleRecord& s : dataset) {
    if (!s.gt) return std::nullopt;
    gts.push_back(*s.gt);
  }
  return max_f(pr_curve(preds, gts, 101));
}

TrainState run_round_impl(RoundKind kind, const std::vector<SampleRecord>& dataset,
                          TrainState state, const TrainConfig& cfg, const PriorSpec& spec,
                          const Cache& cache, const TrainOptions& opts) {
  cfg.validate();
  spec.validate();

  // frozen teacher snapshot: targets are built once, before any update
  std::vector<ProbMap> targets;
  targets.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    ProbMap t =
        project(teacher_map(kind, state, cache.feats[i], cache.grids, spec), *dataset[i].regions);
    targets.push_back(opts.normalize_targets ? normalize_contrast(std::move(t)) : std::move(t));
  }
  if (opts.on_targets) opts.on_targets(state.round_index, kind, targets);

  PathwayModel& student = kind == RoundKind::kV2S ? state.spatial : state.visual;
  SgdState velocity;
  velocity.reset(student);
  PathwayGrads grads;

  Rng rng(cfg.seed ^ (static_cast<std::uint64_t>(state.round_index) + 1) * 0x9E3779B97F4A7C15ull);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::size_t cursor = 0;

  double loss_sum = 0.0;
  for (int iter = 0; iter < cfg.iters_per_round; ++iter) {
    grads.reset(student);
    double batch_loss = 0.0;
    std::size_t batch_px = 0;
    std::size_t image_px = 0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      const FeatureStack& f = cache.feats[idx];
      const ProbMap pred = forward(student, f, cache.grids);
      BceResult bce = bce_loss_and_grad(pred, targets[idx]);
      batch_loss += bce.loss;
      batch_px += pred.size();
      image_px = pred.size();
      backprop(student, f, cache.grids, bce.dlogit, grads);
    }
    if (!std::isfinite(batch_loss)) {
      throw DivergenceError("non-finite loss in round " +
                            std::string(round_kind_name(kind)) + " (index " +
                            std::to_string(state.round_index) + "), iteration " +
                            std::to_string(iter));
    }
    // mean over pixels, sum over the batch (the loss sums both; dividing by
    // the per-image pixel count keeps lr meaningful across image sizes)
    grads.scale(1.0 / static_cast<double>(image_px));
    sgd_step(student, grads, velocity, cfg);
    loss_sum += batch_loss / static_cast<double>(batch_px);
  }

  RoundStats stats;
  stats.kind = kind;
  stats.mean_loss = cfg.iters_per_round > 0 ? loss_sum / cfg.iters_per_round : 0.0;
  stats.mf = fused_mf(dataset, fused_predictions(state, cache));
  state.history.push_back(stats);
  state.round_index += 1;
  if (opts.on_round_end) opts.on_round_end(state, kind);
  return state;
}

}  // namespace

ProbMap make_targets(RoundKind kind, const SampleRecord& sample, const TrainState& state,
                     const PriorSpec& spec, bool normalize) {
  if (!sample.regions) throw DataError("make_targets: sample has no regions");
  const FeatureStack feats = extract_features(sample.image);
  const CoordGrids grids = make_coord_grids(sample.image.height(), sample.image.width());
  ProbMap t = project(teacher_map(kind, state, feats, grids, spec), *sample.regions);
  return normalize ? normalize_contrast(std::move(t)) : std::move(t);
}

TrainState run_round(RoundKind kind, const std::vector<SampleRecord>& dataset, TrainState state,
                     const TrainConfig& cfg, const PriorSpec& spec, const TrainOptions& opts) {
  Cache cache(dataset, opts.subtract_mean);
  return run_round_impl(kind, dataset, std::move(state), cfg, spec, cache, opts);
}

TrainState train(const std::vector<SampleRecord>& dataset, const TrainConfig& cfg,
                 const PriorSpec& spec, const TrainOptions& opts) {
  cfg.validate();
  Cache cache(dataset, opts.subtract_mean);

  Rng init_rng(cfg.seed);
  TrainState state;
  state.visual = init_pathway(opts.net.visual_kind, kFeatureDim, cfg.hidden, init_rng);
  state.spatial = init_pathway(opts.net.spatial_kind, kFeatureDim, cfg.hidden, init_rng);

  std::vector<ProbMap> prev_fused;
  for (int k = 0; k < cfg.rounds; ++k) {
    state = run_round_impl(round_kind_for(k), dataset, std::move(state), cfg, spec, cache, opts);
    std::vector<ProbMap> fused = fused_predictions(state, cache);
    if (!prev_fused.empty()) {
      double delta = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < fused.size(); ++i) {
        for (std::size_t p = 0; p < fused[i].size(); ++p) {
          delta += std::abs(fused[i][p] - prev_fused[i][p]);
        }
        count += fused[i].size();
      }
      if (delta / static_cast<double>(count) < kEarlyStopDelta) break;
    }
    prev_fused = std::move(fused);
  }
  return state;
}

ProbMap predict_fused(const TrainState& state, const ImageTensor& image, bool subtract_mean) {
  const FeatureStack feats = extract_features(image, subtract_mean);
  const CoordGrids grids = make_coord_grids(image.height(), image.width());
  return fuse(forward(state.visual, feats, grids), forward(state.spatial, feats, grids));
}

}  // namespace vsn
