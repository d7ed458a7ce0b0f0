#include "vsn/pathways.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "vsn/filters.hpp"

namespace vsn {

namespace {

constexpr double kOutputEps = 1e-12;
constexpr double kLogEps = 1e-7;

double sigmoid(double z) {
  const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(s, kOutputEps, 1.0 - kOutputEps);
}

void check_compat(const PathwayModel& model, const FeatureStack& feats, const CoordGrids& grids) {
  model.validate();
  if (feats.dim != model.d_in) throw DataError("pathway: feature dim does not match model d_in");
  if (model.kind == PathwayKind::kSpatial) {
    if (grids.xgrid.height() != feats.height || grids.xgrid.width() != feats.width) {
      throw DataError("pathway: coordinate grids do not match feature dims");
    }
  }
}

}  // namespace

void PathwayModel::validate() const {
  if (d_in < 1 || hidden < 1) throw DataError("PathwayModel: bad dims");
  if (w1.size() != static_cast<std::size_t>(d_in) * hidden ||
      b1.size() != static_cast<std::size_t>(hidden) ||
      w2.size() != static_cast<std::size_t>(hidden + extra())) {
    throw DataError("PathwayModel: weight shapes inconsistent");
  }
  auto all_finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!all_finite(w1) || !all_finite(b1) || !all_finite(w2) || !std::isfinite(b2)) {
    throw DataError("PathwayModel: non-finite weights");
  }
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw DataError("TrainConfig: lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw DataError("TrainConfig: momentum must be in [0,1)");
  if (weight_decay < 0.0) throw DataError("TrainConfig: weight_decay must be >= 0");
  if (batch_size < 1) throw DataError("TrainConfig: batch_size must be >= 1");
  if (iters_per_round < 0 || rounds < 1 || hidden < 1) {
    throw DataError("TrainConfig: bad iteration/round/hidden counts");
  }
}

PathwayModel init_pathway(PathwayKind kind, int d_in, int hidden, Rng& rng) {
  PathwayModel m;
  m.kind = kind;
  m.d_in = d_in;
  m.hidden = hidden;
  m.w1.resize(static_cast<std::size_t>(d_in) * hidden);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(hidden + m.extra());
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (double& w : m.w1) w = rng.uniform(-s1, s1);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden + m.extra()));
  for (double& w : m.w2) w = rng.uniform(-s2, s2);
  m.b2 = 0.0;
  return m;
}

FeatureStack extract_features(const ImageTensor& image, bool subtract_mean) {
  const int h = image.height(), w = image.width();
  const std::vector<double> gray = to_gray(image);
  const std::vector<double> box5 = box_mean(gray, h, w, 2);
  const std::vector<double> box11 = box_mean(gray, h, w, 5);
  const std::vector<double> sobel = sobel_magnitude(gray, h, w);
  const std::vector<double> lstd = local_std(gray, h, w, 2);

  FeatureStack fs;
  fs.height = h;
  fs.width = w;
  fs.dim = kFeatureDim;
  fs.data.resize(static_cast<std::size_t>(h) * w * kFeatureDim);
  const bool rgb = image.channels() >= 3;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      double* f = fs.data.data() + p * kFeatureDim;
      f[0] = rgb ? image.at(0, y, x) : gray[p];
      f[1] = rgb ? image.at(1, y, x) : gray[p];
      f[2] = rgb ? image.at(2, y, x) : gray[p];
      f[3] = gray[p];
      f[4] = box5[p];
      f[5] = box11[p];
      f[6] = sobel[p];
      f[7] = lstd[p];
    }
  }
  if (subtract_mean) {
    const std::size_t npx = static_cast<std::size_t>(h) * w;
    for (int d = 0; d < kFeatureDim; ++d) {
      double mean = 0.0;
      for (std::size_t p = 0; p < npx; ++p) mean += fs.data[p * kFeatureDim + d];
      mean /= static_cast<double>(npx);
      for (std::size_t p = 0; p < npx; ++p) fs.data[p * kFeatureDim + d] -= mean;
    }
  }
  return fs;
}

ProbMap forward(const PathwayModel& model, const FeatureStack& feats, const CoordGrids& grids) {
  check_compat(model, feats, grids);
  const int h = feats.height, w = feats.width;
  const int hd = model.hidden;
  const bool spatial = model.kind == PathwayKind::kSpatial;
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  std::vector<double> h1(hd);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* f = feats.data.data() + (static_cast<std::size_t>(y) * w + x) * feats.dim;
      for (int j = 0; j < hd; ++j) {
        double z = model.b1[j];
        for (int i = 0; i < model.d_in; ++i) z += model.w1[static_cast<std::size_t>(i) * hd + j] * f[i];
        h1[j] = z > 0.0 ? z : 0.0;
      }
      double logit = model.b2;
      for (int j = 0; j < hd; ++j) logit += model.w2[j] * h1[j];
      if (spatial) {
        logit += model.w2[hd] * grids.xgrid.at(y, x) + model.w2[hd + 1] * grids.ygrid.at(y, x);
      }
      out[static_cast<std::size_t>(y) * w + x] = sigmoid(logit);
    }
  }
  return ProbMap(h, w, std::move(out));
}

BceResult bce_loss_and_grad(const ProbMap& pred, const ProbMap& target) {
  if (pred.height() != target.height() || pred.width() != target.width()) {
    throw DataError("bce_loss_and_grad: dimension mismatch");
  }
  BceResult r;
  r.dlogit.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kLogEps, 1.0 - kLogEps);
    const double t = target[i];
    r.loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    r.dlogit[i] = pred[i] - t;
  }
  return r;
}

void PathwayGrads::reset(const PathwayModel& model) {
  w1.assign(model.w1.size(), 0.0);
  b1.assign(model.b1.size(), 0.0);
  w2.assign(model.w2.size(), 0.0);
  b2 = 0.0;
}

void PathwayGrads::scale(double s) {
  for (double& v : w1) v *= s;
  for (double& v : b1) v *= s;
  for (double& v : w2) v *= s;
  b2 *= s;
}

void backprop(const PathwayModel& model, const FeatureStack& feats, const CoordGrids& grids,
              const std::vector<double>& dlogit, PathwayGrads& grads) {
  check_compat(model, feats, grids);
  if (dlogit.size() != static_cast<std::size_t>(feats.height) * feats.width) {
    throw DataError("backprop: dlogit size mismatch");
  }
  const int h = feats.height, w = feats.width;
  const int hd = model.hidden;
  const bool spatial = model.kind == PathwayKind::kSpatial;
  std::vector<double> h1(hd);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const double g = dlogit[p];
      const double* f = feats.data.data() + p * feats.dim;
      for (int j = 0; j < hd; ++j) {
        double z = model.b1[j];
        for (int i = 0; i < model.d_in; ++i) z += model.w1[static_cast<std::size_t>(i) * hd + j] * f[i];
        h1[j] = z;
      }
      grads.b2 += g;
      for (int j = 0; j < hd; ++j) {
        if (h1[j] > 0.0) grads.w2[j] += g * h1[j];
      }
      if (spatial) {
        grads.w2[hd] += g * grids.xgrid.at(y, x);
        grads.w2[hd + 1] += g * grids.ygrid.at(y, x);
      }
      for (int j = 0; j < hd; ++j) {
        if (h1[j] <= 0.0) continue;  // relu gate
        const double dh = g * model.w2[j];
        grads.b1[j] += dh;
        for (int i = 0; i < model.d_in; ++i) {
          grads.w1[static_cast<std::size_t>(i) * hd + j] += dh * f[i];
        }
      }
    }
  }
}

void SgdState::reset(const PathwayModel& model) {
  vw1.assign(model.w1.size(), 0.0);
  vb1.assign(model.b1.size(), 0.0);
  vw2.assign(model.w2.size(), 0.0);
  vb2 = 0.0;
}

namespace {
void sgd_update(std::vector<double>& w, const std::vector<double>& g, std::vector<double>& v,
                const TrainConfig& cfg) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(g[i])) throw DivergenceError("sgd_step: non-finite gradient");
    v[i] = cfg.momentum * v[i] - cfg.lr * (g[i] + cfg.weight_decay * w[i]);
    w[i] += v[i];
  }
}
}  // namespace

void sgd_step(PathwayModel& model, const PathwayGrads& grads, SgdState& state,
              const TrainConfig& cfg) {
  cfg.validate();
  if (state.vw1.size() != model.w1.size()) state.reset(model);
  sgd_update(model.w1, grads.w1, state.vw1, cfg);
  sgd_update(model.b1, grads.b1, state.vb1, cfg);
  sgd_update(model.w2, grads.w2, state.vw2, cfg);
  if (!std::isfinite(grads.b2)) throw DivergenceError("sgd_step: non-finite gradient");
  state.vb2 = cfg.momentum * state.vb2 - cfg.lr * (grads.b2 + cfg.weight_decay * model.b2);
  model.b2 += state.vb2;
}

namespace {
void write_f64(std::ostream& os, const double* v, std::size_t n) {
  os.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(n * sizeof(double)));
}
void read_f64(std::istream& is, double* v, std::size_t n) {
  is.read(reinterpret_cast<char*>(v), static_cast<std::streamsize>(n * sizeof(double)));
}
void write_u32(std::ostream& os, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
std::uint32_t read_u32(std::istream& is) {
  std::uint8_t b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void save_model(const std::string& path, const PathwayModel& model) {
  model.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  os.write("VSM1", 4);
  const std::uint8_t kind = static_cast<std::uint8_t>(model.kind);
  os.write(reinterpret_cast<const char*>(&kind), 1);
  write_u32(os, static_cast<std::uint32_t>(model.d_in));
  write_u32(os, static_cast<std::uint32_t>(model.hidden));
  write_f64(os, model.w1.data(), model.w1.size());
  write_f64(os, model.b1.data(), model.b1.size());
  write_f64(os, model.w2.data(), model.w2.size());
  write_f64(os, &model.b2, 1);
  if (!os) throw DataError("failed writing " + path);
}

PathwayModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VSM1", 4) != 0) throw DataError(path + ": bad VSM magic");
  std::uint8_t kind = 0;
  is.read(reinterpret_cast<char*>(&kind), 1);
  if (kind > 1) throw DataError(path + ": bad pathway kind");
  PathwayModel m;
  m.kind = static_cast<PathwayKind>(kind);
  m.d_in = static_cast<int>(read_u32(is));
  m.hidden = static_cast<int>(read_u32(is));
  if (!is || m.d_in < 1 || m.d_in > 1 << 16 || m.hidden < 1 || m.hidden > 1 << 16) {
    throw DataError(path + ": bad VSM header");
  }
  m.w1.resize(static_cast<std::size_t>(m.d_in) * m.hidden);
  m.b1.resize(m.hidden);
  m.w2.resize(m.hidden + m.extra());
  read_f64(is, m.w1.data(), m.w1.size());
  read_f64(is, m.b1.data(), m.b1.size());
  read_f64(is, m.w2.data(), m.w2.size());
  read_f64(is, &m.b2, 1);
  if (!is) throw DataError(path + ": truncated VSM data");
  m.validate();
  return m;
}

}  // namespace vsn
