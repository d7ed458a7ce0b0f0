// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Heavier end-to-end runs live here rather than in the unit tests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "grad_check.hpp"
#include "vsn/eval.hpp"
#include "vsn/prior.hpp"
#include "vsn/regions.hpp"
#include "vsn/synth.hpp"
#include "vsn/training.hpp"

using namespace vsn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int idx, const std::string& what, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << idx << ": " << what;
  if (!detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << "\n" << std::flush;
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

// ---------------------------------------------------------------- criterion 1

ProbMap brute_force_project(const ProbMap& map, const RegionSet& rs) {
  std::vector<double> means(rs.regions.size(), 0.0);
  for (std::size_t r = 0; r < rs.regions.size(); ++r) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (rs.regions[r][i]) {
        sum += map[i];
        ++n;
      }
    }
    means[r] = sum / n;
  }
  std::vector<double> out(map.size(), 0.0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    for (std::size_t r = 0; r < rs.regions.size(); ++r) {
      if (rs.regions[r][i]) out[i] = std::max(out[i], means[r]);
    }
  }
  return ProbMap(map.height(), map.width(), out);
}

RegionSet random_region_set(Rng& rng, int h, int w) {
  RegionSet rs;
  rs.height = h;
  rs.width = w;
  const int k = 1 + static_cast<int>(rng.index(6));
  for (int r = 0; r < k; ++r) {
    BinaryMask m(h, w);
    if (rng.uniform() < 0.5) {
      int y0 = static_cast<int>(rng.index(h)), y1 = static_cast<int>(rng.index(h));
      int x0 = static_cast<int>(rng.index(w)), x1 = static_cast<int>(rng.index(w));
      if (y0 > y1) std::swap(y0, y1);
      if (x0 > x1) std::swap(x0, x1);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) m.set(y, x, 1);
      }
    } else {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (rng.uniform() < 0.3) m.set(y, x, 1);
        }
      }
      m.set(static_cast<int>(rng.index(h)), static_cast<int>(rng.index(w)), 1);
    }
    rs.regions.push_back(std::move(m));
  }
  return rs;
}

void criterion_1() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> vals(64);
    for (double& v : vals) v = rng.uniform();
    const ProbMap map(8, 8, vals);
    const RegionSet rs = random_region_set(rng, 8, 8);
    const ProbMap got = project(map, rs);
    const ProbMap want = brute_force_project(map, rs);
    for (std::size_t i = 0; i < got.size(); ++i) {
      worst = std::max(worst, std::abs(got[i] - want[i]));
    }
  }
  const double secs = seconds_since(t0);
  report(1, "projection matches brute force on 1000 random region sets",
         worst <= 1e-12 && secs < 5.0, "max abs diff " + fmt(worst, 17) + ", " + fmt(secs, 2) + "s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_2() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const PathwayKind kind = i % 2 == 0 ? PathwayKind::kVisual : PathwayKind::kSpatial;
    testing::GradCheckCase c = testing::random_case(kind, 2000 + i);
    worst = std::max(worst, testing::max_grad_rel_err(c));
  }
  const double secs = seconds_since(t0);
  report(2, "100 analytic gradients match central finite differences",
         worst < 1e-4 && secs < 30.0, "max rel err " + fmt(worst, 8) + ", " + fmt(secs, 2) + "s");
}

// ---------------------------------------------------------------- criterion 3

void criterion_3() {
  bool ok = true;
  Rng rng(3001);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(16);
    std::vector<std::uint8_t> g(16);
    for (double& v : p) v = rng.uniform();
    for (auto& v : g) v = rng.uniform() < 0.4 ? 1 : 0;
    g[rng.index(16)] = 1;
    const std::vector<ProbMap> preds = {ProbMap(4, 4, p)};
    const std::vector<BinaryMask> gts = {BinaryMask(4, 4, g)};
    const PRCurve c = pr_curve(preds, gts, 11);

    // exhaustive counting oracle per threshold, then the same MF/AP formulas
    std::vector<double> op(c.thresholds.size()), orr(c.thresholds.size());
    for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < 16; ++i) {
        const bool pos = p[i] >= c.thresholds[k];
        if (g[i]) {
          pos ? ++tp : ++fn;
        } else if (pos) {
          ++fp;
        }
      }
      op[k] = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
      orr[k] = static_cast<double>(tp) / (tp + fn);
      if (c.precision[k] != op[k] || c.recall[k] != orr[k]) ok = false;
    }
    double mf = 0.0, ap = 0.0;
    for (std::size_t k = 0; k < op.size(); ++k) {
      if (op[k] + orr[k] > 0.0) mf = std::max(mf, 2.0 * op[k] * orr[k] / (op[k] + orr[k]));
      const double next = k + 1 < orr.size() ? orr[k + 1] : 0.0;
      ap += (orr[k] - next) * op[k];
    }
    if (max_f(c) != mf || average_precision(c) != ap) ok = false;
  }

  // closed forms
  {
    BinaryMask gt(2, 2);
    gt.set(0, 0, 1);
    gt.set(1, 1, 1);
    std::vector<double> perfect = {1.0, 0.0, 0.0, 1.0};
    const PRCurve c = pr_curve({ProbMap(2, 2, perfect)}, {gt}, 11);
    if (max_f(c) != 1.0 || average_precision(c) != 1.0) ok = false;
  }
  {
    BinaryMask gt(2, 2);
    gt.set(0, 0, 1);  // 25% positives
    const PRCurve c = pr_curve({ProbMap(2, 2, 0.5)}, {gt}, 11);
    if (std::abs(max_f(c) - 0.4) > 1e-12 || std::abs(average_precision(c) - 0.25) > 1e-12) {
      ok = false;
    }
  }
  report(3, "PR/MF/AP match the counting oracle and closed forms", ok);
}

// ------------------------------------------------------- criteria 4, 5 and 9

std::vector<SampleRecord> build_dataset(int n, DistractorPolicy policy, std::uint64_t seed) {
  SceneParams sp;
  sp.policy = policy;
  sp.seed = seed;
  std::vector<SampleRecord> ds = generate_dataset(sp, n);
  const ProposerParams pp;
  for (SampleRecord& s : ds) s.regions = propose_regions(s.image, pp);
  return ds;
}

double fused_mf(const TrainState& st, const std::vector<SampleRecord>& ds) {
  std::vector<ProbMap> preds;
  std::vector<BinaryMask> gts;
  for (const SampleRecord& s : ds) {
    preds.push_back(predict_fused(st, s.image));
    gts.push_back(*s.gt);
  }
  return max_f(pr_curve(preds, gts));
}

bool g_c9_ok = false;
std::string g_c9_detail;

struct FullRunLog {
  std::vector<TrainState> states;  // states[k] = state entering round k
  std::vector<RoundKind> kinds;
  std::vector<std::vector<ProbMap>> targets;  // frozen targets per round
  TrainState final_state;
};

FullRunLog run_logged(const std::vector<SampleRecord>& ds, const TrainConfig& cfg,
                      const PriorSpec& prior, NetworkSpec net = NetworkSpec::vsn()) {
  FullRunLog log;
  // reconstruct the pre-training state the trainer builds internally
  {
    Rng rng(cfg.seed);
    TrainState st;
    st.visual = init_pathway(net.visual_kind, kFeatureDim, cfg.hidden, rng);
    st.spatial = init_pathway(net.spatial_kind, kFeatureDim, cfg.hidden, rng);
    log.states.push_back(std::move(st));
  }
  TrainOptions opts;
  opts.net = net;
  opts.on_targets = [&](int, RoundKind kind, const std::vector<ProbMap>& t) {
    log.kinds.push_back(kind);
    log.targets.push_back(t);
  };
  opts.on_round_end = [&](const TrainState& st, RoundKind) { log.states.push_back(st); };
  log.final_state = train(ds, cfg, prior, opts);
  return log;
}

void criteria_4_5_9() {
  const auto t0 = Clock::now();
  const std::vector<SampleRecord> mixed = build_dataset(500, DistractorPolicy::kMixed, 1);
  const PriorSpec prior = PriorSpec::bottom_right();
  const TrainConfig cfg;  // defaults: lr 1e-2, 2000 iters, batch 15, 3 rounds

  const FullRunLog vsn_log = run_logged(mixed, cfg, prior);
  const double vsn_mf = fused_mf(vsn_log.final_state, mixed);
  const double e2e_secs = seconds_since(t0);

  // baseline (a): projected prior as the predictor
  std::vector<ProbMap> prior_preds;
  std::vector<BinaryMask> gts;
  const ProbMap g = gaussian_prior(prior, 48, 48);
  for (const SampleRecord& s : mixed) {
    prior_preds.push_back(project(g, *s.regions));
    gts.push_back(*s.gt);
  }
  const double prior_mf = max_f(pr_curve(prior_preds, gts));

  // baseline (b): the visual pathway alone after the Initial round
  std::vector<ProbMap> vis_preds;
  const CoordGrids grids = make_coord_grids(48, 48);
  for (const SampleRecord& s : mixed) {
    vis_preds.push_back(forward(vsn_log.states[1].visual, extract_features(s.image), grids));
  }
  const double initial_mf = max_f(pr_curve(vis_preds, gts));

  bool c4 = vsn_mf >= prior_mf + 0.05 && vsn_mf >= initial_mf + 0.05 && e2e_secs < 600.0;

  // golden value recorded from the first verified run; deterministic seed
  const fs::path golden = fs::path(VSN_TEST_DATA_DIR) / "golden_e2e_mf.txt";
  std::string golden_note;
  if (fs::exists(golden)) {
    double want = 0.0;
    std::ifstream(golden) >> want;
    if (std::abs(vsn_mf - want) > 0.01) c4 = false;
    golden_note = ", golden " + fmt(want);
  } else if (c4) {
    fs::create_directories(golden.parent_path());
    std::ofstream(golden) << std::setprecision(17) << vsn_mf << "\n";
    golden_note = ", golden recorded";
  }
  report(4, "end-to-end fused MF beats prior-only and Initial-visual by >= 0.05", c4,
         "fused " + fmt(vsn_mf) + ", prior " + fmt(prior_mf) + ", initial " + fmt(initial_mf) +
             golden_note + ", " + fmt(e2e_secs, 1) + "s");

  // ----- criterion 9: invariants on every logged round of the run above
  bool c9 = vsn_log.kinds.size() == vsn_log.targets.size() &&
            vsn_log.states.size() == vsn_log.kinds.size() + 1;
  for (std::size_t k = 0; c9 && k < vsn_log.kinds.size(); ++k) {
    const RoundKind kind = vsn_log.kinds[k];
    const TrainState& before = vsn_log.states[k];
    const TrainState& after = vsn_log.states[k + 1];
    // one-pathway: V2S touches only the spatial slot, other rounds only visual
    const bool spatial_round = kind == RoundKind::kV2S;
    const PathwayModel& frozen_b = spatial_round ? before.visual : before.spatial;
    const PathwayModel& frozen_a = spatial_round ? after.visual : after.spatial;
    if (frozen_a.w1 != frozen_b.w1 || frozen_a.b1 != frozen_b.b1 || frozen_a.w2 != frozen_b.w2 ||
        frozen_a.b2 != frozen_b.b2) {
      c9 = false;
    }
    // frozen-teacher: the cached targets equal the pre-round teacher's output
    for (std::size_t i = 0; c9 && i < mixed.size(); i += 19) {
      const ProbMap want = make_targets(kind, mixed[i], before, prior, true);
      const ProbMap& got = vsn_log.targets[k][i];
      for (std::size_t px = 0; px < want.size(); ++px) {
        if (got[px] != want[px]) {
          c9 = false;
          break;
        }
      }
    }
  }

  // ----- criterion 5: ablation shape on mixed + single-policy sets
  const auto t5 = Clock::now();
  const FullRunLog vvn_log = run_logged(mixed, cfg, prior, NetworkSpec::vvn());
  const FullRunLog ssn_log = run_logged(mixed, cfg, prior, NetworkSpec::ssn());
  const double vvn_mf = fused_mf(vvn_log.final_state, mixed);
  const double ssn_mf = fused_mf(ssn_log.final_state, mixed);

  TrainConfig small = cfg;
  small.iters_per_round = 1000;
  const auto same_set = build_dataset(160, DistractorPolicy::kSameAppearanceElsewhere, 2);
  const auto diff_set = build_dataset(160, DistractorPolicy::kDifferentAppearanceAtPrior, 3);
  const double vsn_same = fused_mf(run_logged(same_set, small, prior).final_state, same_set);
  const double vvn_same =
      fused_mf(run_logged(same_set, small, prior, NetworkSpec::vvn()).final_state, same_set);
  const double vsn_diff = fused_mf(run_logged(diff_set, small, prior).final_state, diff_set);
  const double ssn_diff =
      fused_mf(run_logged(diff_set, small, prior, NetworkSpec::ssn()).final_state, diff_set);

  const bool c5 = vsn_mf >= std::max(vvn_mf, ssn_mf) - 0.01 && vsn_same >= vvn_same + 0.05 &&
                  vsn_diff >= ssn_diff + 0.05;
  report(5, "mixed-set VSN >= max(VVN, SSN) - 0.01; disadvantaged nets lose >= 0.05", c5,
         "mixed VSN " + fmt(vsn_mf) + " VVN " + fmt(vvn_mf) + " SSN " + fmt(ssn_mf) +
             "; same-appearance VSN " + fmt(vsn_same) + " VVN " + fmt(vvn_same) +
             "; distractor-at-prior VSN " + fmt(vsn_diff) + " SSN " + fmt(ssn_diff) + ", " +
             fmt(seconds_since(t5), 1) + "s");

  // ----- criterion 6: center prior hurts on the bottom-right-biased set
  // (same data and config as the criterion-4 run; only the prior changes)
  const double center_mf =
      fused_mf(run_logged(mixed, cfg, PriorSpec::center()).final_state, mixed);
  report(6, "center prior underperforms the bottom-right prior by >= 0.05",
         vsn_mf >= center_mf + 0.05,
         "bottom-right " + fmt(vsn_mf) + ", center " + fmt(center_mf));

  g_c9_ok = c9;
  g_c9_detail = std::to_string(vsn_log.kinds.size()) + " rounds checked";
}

// ---------------------------------------------------------------- criterion 7

void criterion_7() {
  bool ok = true;
  // delta maps recover the pixel location exactly
  Rng rng(7001);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 3 + static_cast<int>(rng.index(14));
    const int w = 3 + static_cast<int>(rng.index(14));
    const int y = static_cast<int>(rng.index(h));
    const int x = static_cast<int>(rng.index(w));
    ProbMap m(h, w, 0.0);
    m.set(y, x, 1.0);
    const auto [cx, cy] = estimate_prior_location({m});
    if (cx != static_cast<double>(x) / (w - 1) || cy != static_cast<double>(y) / (h - 1)) {
      ok = false;
    }
  }
  // ground-truth masks as weights recover the configured center
  SceneParams sp;
  sp.seed = 7;
  const auto ds = generate_dataset(sp, 300);
  std::vector<ProbMap> weights;
  for (const SampleRecord& s : ds) {
    std::vector<double> v(s.gt->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.gt->operator[](i);
    weights.emplace_back(sp.height, sp.width, std::move(v));
  }
  const auto [cx, cy] = estimate_prior_location(weights);
  if (std::abs(cx - sp.important_cx_frac) > 0.02 || std::abs(cy - sp.important_cy_frac) > 0.02) {
    ok = false;
  }
  report(7, "prior location estimation: exact on deltas, within 0.02 on gt masks", ok,
         "estimated (" + fmt(cx, 3) + ", " + fmt(cy, 3) + ")");
}

// ---------------------------------------------------------------- criterion 8

void criterion_8() {
  const auto ds = build_dataset(60, DistractorPolicy::kMixed, 8);
  TrainConfig cfg;
  cfg.iters_per_round = 300;
  cfg.seed = 8;
  const PriorSpec prior = PriorSpec::bottom_right();
  const TrainState a = train(ds, cfg, prior);
  const TrainState b = train(ds, cfg, prior);

  auto model_bytes = [](const PathwayModel& m, const char* name) {
    const fs::path p = fs::temp_directory_path() / (std::string("vsn_accept_") + name + ".vsm");
    save_model(p.string(), m);
    std::ifstream is(p, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    fs::remove(p);
    return bytes;
  };
  bool ok = model_bytes(a.visual, "av") == model_bytes(b.visual, "bv") &&
            model_bytes(a.spatial, "as") == model_bytes(b.spatial, "bs") &&
            a.history.size() == b.history.size();
  for (std::size_t i = 0; ok && i < a.history.size(); ++i) {
    if (a.history[i].mean_loss != b.history[i].mean_loss || a.history[i].mf != b.history[i].mf) {
      ok = false;
    }
  }
  if (fused_mf(a, ds) != fused_mf(b, ds)) ok = false;
  report(8, "identical seed/config reproduce byte-identical models and metrics", ok);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criteria_4_5_9();
  criterion_7();
  criterion_8();
  report(9, "frozen-teacher and one-pathway invariants hold on every logged round", g_c9_ok,
         g_c9_detail);
  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
