#ifndef VSN_TRAINING_HPP_
#define VSN_TRAINING_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "vsn/pathways.hpp"
#include "vsn/prior.hpp"
#include "vsn/regions.hpp"

namespace vsn {

enum class RoundKind { kInitial, kV2S, kS2V };

const char* round_kind_name(RoundKind kind);

/// Schedule: Initial, then V2S, S2V, V2S, ... alternating.
RoundKind round_kind_for(int round_index);

/// Which pathway kinds fill the two slots. The slots keep their schedule
/// roles (Initial/S2V trains the "visual" slot, V2S the "spatial" slot);
/// VVN and SSN are made by filling both slots with the same kind.
struct NetworkSpec {
  PathwayKind visual_kind = PathwayKind::kVisual;
  PathwayKind spatial_kind = PathwayKind::kSpatial;

  static NetworkSpec vsn() { return {PathwayKind::kVisual, PathwayKind::kSpatial}; }
  static NetworkSpec vvn() { return {PathwayKind::kVisual, PathwayKind::kVisual}; }
  static NetworkSpec ssn() { return {PathwayKind::kSpatial, PathwayKind::kSpatial}; }
};

struct RoundStats {
  RoundKind kind = RoundKind::kInitial;
  double mean_loss = 0.0;              // mean per-pixel BCE over the round's iterations
  std::optional<double> mf;            // fused training-set MF, when every sample has gt
};

struct TrainState {
  PathwayModel visual;
  PathwayModel spatial;
  int round_index = 0;
  std::vector<RoundStats> history;
};

struct TrainOptions {
  NetworkSpec net;
  bool subtract_mean = false;
  // min-max stretch each projected target map to span [0,1]; keeps teacher
  // contrast from shrinking round over round (soft targets compound otherwise)
  bool normalize_targets = true;
  // invoked after each completed round, e.g. to persist model snapshots
  std::function<void(const TrainState&, RoundKind)> on_round_end;
  // invoked with the round's frozen targets right after they are built
  std::function<void(int, RoundKind, const std::vector<ProbMap>&)> on_targets;
};

/// The round's supervision target: the teacher map (prior G for Initial,
/// the frozen teacher pathway's prediction otherwise) projected through
/// the sample's regions. With normalize, the result is min-max stretched to
/// span [0,1] (no-op on constant maps).
ProbMap make_targets(RoundKind kind, const SampleRecord& sample, const TrainState& state,
                     const PriorSpec& spec, bool normalize = false);

/// One optimization round: exactly one pathway's weights change; targets
/// come from a teacher snapshot taken at round start.
TrainState run_round(RoundKind kind, const std::vector<SampleRecord>& dataset, TrainState state,
                     const TrainConfig& cfg, const PriorSpec& spec,
                     const TrainOptions& opts = {});

/// Full alternation: Initial then V2S/S2V until cfg.rounds rounds are done
/// or fused training predictions stop moving (mean |delta| < 1e-3).
TrainState train(const std::vector<SampleRecord>& dataset, const TrainConfig& cfg,
                 const PriorSpec& spec, const TrainOptions& opts = {});

/// Fused prediction f/g average for one image under the given state.
ProbMap predict_fused(const TrainState& state, const ImageTensor& image,
                      bool subtract_mean = false);

}  // namespace vsn

#endif  // VSN_TRAINING_HPP_
