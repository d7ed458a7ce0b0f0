#include "vsn/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vsn/eval.hpp"
#include "vsn/io.hpp"
#include "vsn/parallel.hpp"
#include "vsn/synth.hpp"
#include "vsn/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vsn {

namespace {

// Removes everything written by a command unless commit() was reached.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove(*it, ec);
  }
  void track(const fs::path& p) { paths_.push_back(p); }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw DataError("size must look like HxW, got '" + s + "'");
  try {
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw DataError("size must look like HxW, got '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw DataError("bad number '" + item + "' in list");
    }
  }
  return out;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& prefix,
                                   const std::string& ext) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct SharedTrainFlags {
  TrainConfig cfg;
  PriorSpec prior;
  ProposerParams proposer;
  std::string scales_str;
  int threads = 1;
  bool subtract_mean = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", cfg.lr, "learning rate");
    cmd->add_option("--momentum", cfg.momentum, "SGD momentum");
    cmd->add_option("--weight-decay", cfg.weight_decay, "weight decay");
    cmd->add_option("--batch", cfg.batch_size, "minibatch size");
    cmd->add_option("--iters", cfg.iters_per_round, "iterations per round");
    cmd->add_option("--rounds", cfg.rounds, "number of rounds (Initial counts)");
    cmd->add_option("--hidden", cfg.hidden, "hidden layer width");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--prior-cx", prior.cx_frac, "prior center x fraction");
    cmd->add_option("--prior-cy", prior.cy_frac, "prior center y fraction");
    cmd->add_option("--prior-sigma", prior.sigma_frac, "prior sigma fraction");
    cmd->add_option("--scales", scales_str, "proposer merge thresholds, comma separated");
    cmd->add_option("--min-px", proposer.min_region_px, "minimum region size");
    cmd->add_option("--edge-weight", proposer.edge_weight, "gradient vs color mix");
    cmd->add_option("--threads", threads, "worker thread cap");
    cmd->add_flag("--subtract-mean", subtract_mean, "subtract per-channel feature means");
    cmd->set_config("--config", "", "flat key=value config file; flags override");
  }

  void finish() {
    if (!scales_str.empty()) proposer.scales = parse_list(scales_str);
    proposer.validate();
    cfg.validate();
    prior.validate();
  }
};

std::vector<SampleRecord> load_dataset(const fs::path& dir, const ProposerParams& proposer,
                                       int threads, bool need_gt) {
  const std::vector<fs::path> imgs = sorted_files(dir, "img_", ".png");
  if (imgs.empty()) throw DataError("no img_*.png files in " + dir.string());
  std::vector<SampleRecord> dataset(imgs.size());
  parallel_for(imgs.size(), threads, [&](std::size_t i) {
    SampleRecord rec;
    rec.image = read_png(imgs[i].string());
    rec.id = imgs[i].stem().string().substr(4);
    const fs::path gt = dir / ("gt_" + rec.id + ".png");
    if (fs::exists(gt)) {
      rec.gt = read_mask_png(gt.string());
    } else if (need_gt) {
      throw DataError("missing ground truth " + gt.string());
    }
    const fs::path rgs = dir / ("img_" + rec.id + ".rgs");
    rec.regions = fs::exists(rgs) ? read_rgs(rgs.string()) : propose_regions(rec.image, proposer);
    dataset[i] = std::move(rec);
  });
  return dataset;
}

void write_json(const fs::path& path, const json& j, OutputGuard& guard) {
  guard.track(path);
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json metrics_json(const std::vector<ProbMap>& preds, const std::vector<BinaryMask>& gts,
                  int thresholds, PoolMode mode) {
  const PRCurve curve = pr_curve(preds, gts, thresholds, mode);
  json points = json::array();
  for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
    points.push_back({{"t", curve.thresholds[k]},
                      {"p", curve.precision[k]},
                      {"r", curve.recall[k]}});
  }
  return {{"mf", max_f(curve)}, {"ap", average_precision(curve)}, {"curve", points}};
}

void save_round_models(const fs::path& out_dir, const TrainState& state, OutputGuard& guard) {
  const std::string k = std::to_string(state.round_index);
  const fs::path vpath = out_dir / ("round_" + k + "_visual.vsm");
  const fs::path spath = out_dir / ("round_" + k + "_spatial.vsm");
  guard.track(vpath);
  guard.track(spath);
  save_model(vpath.string(), state.visual);
  save_model(spath.string(), state.spatial);
}

TrainState load_latest_models(const fs::path& run_dir) {
  int best = -1;
  for (const auto& e : fs::directory_iterator(run_dir)) {
    const std::string name = e.path().filename().string();
    int k = 0;
    if (std::sscanf(name.c_str(), "round_%d_visual.vsm", &k) == 1) best = std::max(best, k);
  }
  if (best < 0) throw DataError("no round_*_visual.vsm models in " + run_dir.string());
  TrainState state;
  state.visual = load_model((run_dir / ("round_" + std::to_string(best) + "_visual.vsm")).string());
  state.spatial =
      load_model((run_dir / ("round_" + std::to_string(best) + "_spatial.vsm")).string());
  state.round_index = best;
  return state;
}

// --- subcommand bodies -----------------------------------------------------

int cmd_generate(const fs::path& out_dir, SceneParams params, int n, const std::string& policy) {
  if (policy == "same") {
    params.policy = DistractorPolicy::kSameAppearanceElsewhere;
  } else if (policy == "diff") {
    params.policy = DistractorPolicy::kDifferentAppearanceAtPrior;
  } else if (policy == "mixed") {
    params.policy = DistractorPolicy::kMixed;
  } else {
    throw DataError("unknown policy '" + policy + "' (want mixed|same|diff)");
  }
  fs::create_directories(out_dir);
  OutputGuard guard;
  const std::vector<SampleRecord> dataset = generate_dataset(params, n);
  json samples = json::array();
  for (const SampleRecord& rec : dataset) {
    const fs::path img = out_dir / ("img_" + rec.id + ".png");
    const fs::path gt = out_dir / ("gt_" + rec.id + ".png");
    guard.track(img);
    guard.track(gt);
    write_png(img.string(), rec.image);
    write_mask_png(gt.string(), *rec.gt);
    samples.push_back({{"id", rec.id},
                       {"img", img.filename().string()},
                       {"gt", gt.filename().string()}});
  }
  write_json(out_dir / "manifest.json",
             {{"n", n},
              {"seed", params.seed},
              {"policy", policy},
              {"height", params.height},
              {"width", params.width},
              {"samples", samples}},
             guard);
  guard.commit();
  std::cout << "wrote " << n << " samples to " << out_dir.string() << '\n';
  return 0;
}

int cmd_regions(const std::string& in, const std::string& out, const ProposerParams& params) {
  OutputGuard guard;
  guard.track(out);
  const RegionSet rs = propose_regions(read_png(in), params);
  write_rgs(out, rs);
  guard.commit();
  std::cout << rs.regions.size() << " regions -> " << out << '\n';
  return 0;
}

int cmd_prior(const PriorSpec& spec, const std::string& size, const std::string& out) {
  const auto [h, w] = parse_size(size);
  OutputGuard guard;
  guard.track(out);
  write_pmf(out, gaussian_prior(spec, h, w));
  guard.commit();
  return 0;
}

int cmd_prior_estimate(const fs::path& maps_dir, const fs::path& out) {
  std::vector<ProbMap> maps;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(maps_dir)) {
    if (e.path().extension() == ".pmf" || e.path().extension() == ".png") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    maps.push_back(f.extension() == ".pmf" ? read_pmf(f.string())
                                           : read_probmap_png(f.string()));
  }
  if (maps.empty()) throw DataError("no .pmf or .png maps in " + maps_dir.string());
  const auto [cx, cy] = estimate_prior_location(maps);
  OutputGuard guard;
  write_json(out, {{"cx_frac", cx}, {"cy_frac", cy}}, guard);
  guard.commit();
  std::cout << "cx_frac=" << cx << " cy_frac=" << cy << '\n';
  return 0;
}

void write_history_csv(const fs::path& path, const TrainState& state, OutputGuard& guard) {
  guard.track(path);
  std::ofstream os(path);
  os << "round,kind,mean_loss,mf\n";
  for (std::size_t k = 0; k < state.history.size(); ++k) {
    const RoundStats& r = state.history[k];
    os << k + 1 << ',' << round_kind_name(r.kind) << ',' << r.mean_loss << ',';
    if (r.mf) os << *r.mf;
    os << '\n';
  }
}

int cmd_train(const fs::path& data_dir, const fs::path& out_dir, SharedTrainFlags& flags,
              const std::string& net, bool debug_targets) {
  NetworkSpec spec;
  if (net == "vsn") {
    spec = NetworkSpec::vsn();
  } else if (net == "vvn") {
    spec = NetworkSpec::vvn();
  } else if (net == "ssn") {
    spec = NetworkSpec::ssn();
  } else {
    throw DataError("unknown net '" + net + "' (want vsn|vvn|ssn)");
  }
  const std::vector<SampleRecord> dataset =
      load_dataset(data_dir, flags.proposer, flags.threads, false);
  fs::create_directories(out_dir);
  OutputGuard guard;
  TrainOptions opts;
  opts.net = spec;
  opts.subtract_mean = flags.subtract_mean;
  opts.on_round_end = [&](const TrainState& s, RoundKind) { save_round_models(out_dir, s, guard); };
  if (debug_targets) {
    opts.on_targets = [&](int round_index, RoundKind, const std::vector<ProbMap>& targets) {
      const fs::path dir = out_dir / ("targets_round_" + std::to_string(round_index + 1));
      fs::create_directories(dir);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const fs::path p = dir / ("target_" + dataset[i].id + ".pmf");
        guard.track(p);
        write_pmf(p.string(), targets[i]);
      }
    };
  }
  const TrainState state = train(dataset, flags.cfg, flags.prior, opts);
  write_history_csv(out_dir / "history.csv", state, guard);
  guard.commit();
  for (std::size_t k = 0; k < state.history.size(); ++k) {
    std::cout << "round " << k + 1 << " (" << round_kind_name(state.history[k].kind)
              << "): mean_loss=" << state.history[k].mean_loss;
    if (state.history[k].mf) std::cout << " mf=" << *state.history[k].mf;
    std::cout << '\n';
  }
  return 0;
}

int cmd_infer(const fs::path& models_dir, const std::string& in, const std::string& out,
              bool subtract_mean) {
  const TrainState state = load_latest_models(models_dir);
  const ProbMap pred = predict_fused(state, read_png(in), subtract_mean);
  OutputGuard guard;
  guard.track(out);
  if (fs::path(out).extension() == ".png") {
    write_probmap_png(out, pred);
  } else {
    write_pmf(out, pred);
  }
  guard.commit();
  return 0;
}

int cmd_eval(const fs::path& preds_dir, const fs::path& gt_dir, const fs::path& out, bool macro,
             int thresholds) {
  std::vector<fs::path> pred_files;
  for (const auto& e : fs::directory_iterator(preds_dir)) {
    if (e.path().extension() == ".pmf" ||
        (e.path().extension() == ".png" &&
         e.path().filename().string().rfind("gt_", 0) != 0)) {
      pred_files.push_back(e.path());
    }
  }
  std::sort(pred_files.begin(), pred_files.end());
  const std::vector<fs::path> gt_files = sorted_files(gt_dir, "gt_", ".png");
  if (pred_files.size() != gt_files.size() || pred_files.empty()) {
    throw DataError("prediction and ground-truth counts differ (" +
                    std::to_string(pred_files.size()) + " vs " +
                    std::to_string(gt_files.size()) + ")");
  }
  std::vector<ProbMap> preds;
  std::vector<BinaryMask> gts;
  for (std::size_t i = 0; i < pred_files.size(); ++i) {
    preds.push_back(pred_files[i].extension() == ".pmf"
                        ? read_pmf(pred_files[i].string())
                        : read_probmap_png(pred_files[i].string()));
    gts.push_back(read_mask_png(gt_files[i].string()));
  }
  const json m = metrics_json(preds, gts, thresholds, macro ? PoolMode::kMacro : PoolMode::kMicro);
  OutputGuard guard;
  write_json(out, m, guard);
  guard.commit();
  std::cout << "mf=" << m["mf"].get<double>() << " ap=" << m["ap"].get<double>() << '\n';
  return 0;
}

int cmd_ablate(const fs::path& data_dir, const fs::path& out_dir, SharedTrainFlags& flags) {
  const std::vector<SampleRecord> dataset =
      load_dataset(data_dir, flags.proposer, flags.threads, true);
  std::vector<BinaryMask> gts;
  for (const SampleRecord& s : dataset) gts.push_back(*s.gt);
  fs::create_directories(out_dir);
  OutputGuard guard;
  const fs::path csv = out_dir / "ablate.csv";
  guard.track(csv);
  std::ofstream os(csv);
  os << "net,mf,ap\n";
  const std::pair<const char*, NetworkSpec> nets[] = {
      {"vsn", NetworkSpec::vsn()}, {"vvn", NetworkSpec::vvn()}, {"ssn", NetworkSpec::ssn()}};
  for (const auto& [name, net] : nets) {
    TrainOptions opts;
    opts.net = net;
    opts.subtract_mean = flags.subtract_mean;
    const TrainState state = train(dataset, flags.cfg, flags.prior, opts);
    std::vector<ProbMap> preds;
    for (const SampleRecord& s : dataset) {
      preds.push_back(predict_fused(state, s.image, flags.subtract_mean));
    }
    const PRCurve curve = pr_curve(preds, gts, 101);
    os << name << ',' << max_f(curve) << ',' << average_precision(curve) << '\n';
    std::cout << name << ": mf=" << max_f(curve) << " ap=" << average_precision(curve) << '\n';
  }
  os.close();
  guard.commit();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"vsn: unsupervised important-object detection"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  std::string gen_out, gen_policy = "mixed", gen_size;
  int gen_n = 100;
  SceneParams scene;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n", gen_n, "number of samples");
  gen->add_option("--seed", scene.seed, "random seed");
  gen->add_option("--size", gen_size, "image size HxW");
  gen->add_option("--policy", gen_policy, "distractor policy: mixed|same|diff");
  gen->add_option("--distractors", scene.distractor_count, "distractors per image");
  gen->add_option("--cx", scene.important_cx_frac, "important object center x fraction");
  gen->add_option("--cy", scene.important_cy_frac, "important object center y fraction");
  gen->add_option("--jitter", scene.center_jitter_std, "center jitter std fraction");
  gen->add_option("--noise", scene.noise_std, "pixel noise std");
  gen->add_option("--radius", scene.radius_frac, "blob radius fraction");

  // regions
  auto* reg = app.add_subcommand("regions", "propose regions for one image");
  std::string reg_in, reg_out, reg_scales;
  ProposerParams reg_params;
  reg->add_option("--in", reg_in, "input image")->required();
  reg->add_option("--out", reg_out, "output .rgs file")->required();
  reg->add_option("--scales", reg_scales, "merge thresholds, comma separated");
  reg->add_option("--min-px", reg_params.min_region_px, "minimum region size");
  reg->add_option("--edge-weight", reg_params.edge_weight, "gradient vs color mix");

  // prior
  auto* pri = app.add_subcommand("prior", "write a Gaussian prior map");
  PriorSpec prior_spec;
  std::string pri_size, pri_out;
  pri->add_option("--cx", prior_spec.cx_frac, "center x fraction");
  pri->add_option("--cy", prior_spec.cy_frac, "center y fraction");
  pri->add_option("--sigma", prior_spec.sigma_frac, "sigma fraction");
  pri->add_option("--size", pri_size, "map size HxW")->required();
  pri->add_option("--out", pri_out, "output .pmf file")->required();

  // prior-estimate
  auto* pe = app.add_subcommand("prior-estimate", "estimate a prior location from maps");
  std::string pe_maps, pe_out;
  pe->add_option("--maps", pe_maps, "directory of .pmf/.png probability maps")->required();
  pe->add_option("--out", pe_out, "output json")->required();

  // train
  auto* tr = app.add_subcommand("train", "run alternating cross-pathway training");
  std::string tr_data, tr_out, tr_net = "vsn";
  bool tr_debug_targets = false;
  SharedTrainFlags tr_flags;
  tr->add_option("--data", tr_data, "dataset directory")->required();
  tr->add_option("--out", tr_out, "run output directory")->required();
  tr->add_option("--net", tr_net, "network: vsn|vvn|ssn");
  tr->add_flag("--debug-targets", tr_debug_targets, "dump per-round target snapshots");
  tr_flags.attach(tr);

  // infer
  auto* inf = app.add_subcommand("infer", "fused prediction for one image");
  std::string inf_models, inf_in, inf_out;
  bool inf_subtract_mean = false;
  inf->add_option("--models", inf_models, "run directory with .vsm models")->required();
  inf->add_option("--in", inf_in, "input image")->required();
  inf->add_option("--out", inf_out, "output map (.pmf or .png)")->required();
  inf->add_flag("--subtract-mean", inf_subtract_mean, "subtract per-channel feature means");

  // eval
  auto* ev = app.add_subcommand("eval", "MF/AP against ground truth");
  std::string ev_preds, ev_gt, ev_out = "metrics.json";
  bool ev_macro = false;
  int ev_thresholds = 101;
  ev->add_option("--preds", ev_preds, "directory of prediction maps")->required();
  ev->add_option("--gt", ev_gt, "directory of gt_*.png masks")->required();
  ev->add_option("--out", ev_out, "output metrics json");
  ev->add_flag("--macro", ev_macro, "average per-image curves instead of pooling pixels");
  ev->add_option("--thresholds", ev_thresholds, "number of thresholds");

  // ablate
  auto* ab = app.add_subcommand("ablate", "compare VSN, VVN and SSN on one dataset");
  std::string ab_data, ab_out;
  SharedTrainFlags ab_flags;
  ab->add_option("--data", ab_data, "dataset directory")->required();
  ab->add_option("--out", ab_out, "output directory")->required();
  ab_flags.attach(ab);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      if (!gen_size.empty()) std::tie(scene.height, scene.width) = parse_size(gen_size);
      return cmd_generate(gen_out, scene, gen_n, gen_policy);
    }
    if (reg->parsed()) {
      if (!reg_scales.empty()) reg_params.scales = parse_list(reg_scales);
      reg_params.validate();
      return cmd_regions(reg_in, reg_out, reg_params);
    }
    if (pri->parsed()) return cmd_prior(prior_spec, pri_size, pri_out);
    if (pe->parsed()) return cmd_prior_estimate(pe_maps, pe_out);
    if (tr->parsed()) {
      tr_flags.finish();
      return cmd_train(tr_data, tr_out, tr_flags, tr_net, tr_debug_targets);
    }
    if (inf->parsed()) return cmd_infer(inf_models, inf_in, inf_out, inf_subtract_mean);
    if (ev->parsed()) return cmd_eval(ev_preds, ev_gt, ev_out, ev_macro, ev_thresholds);
    if (ab->parsed()) {
      ab_flags.finish();
      return cmd_ablate(ab_data, ab_out, ab_flags);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace vsn
