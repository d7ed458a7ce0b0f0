#include "vsn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "vsn/rng.hpp"

namespace vsn {

namespace {

constexpr double kShapeExponent = 2.5;  // super-ellipse roundness

struct Blob {
  double cx, cy, rx, ry;
  std::array<double, 3> color;
};

// s <= 1 is the painted footprint; alpha softens toward the rim.
double blob_alpha(const Blob& b, int x, int y) {
  const double sx = std::abs(x - b.cx) / b.rx;
  const double sy = std::abs(y - b.cy) / b.ry;
  const double s = std::pow(sx, kShapeExponent) + std::pow(sy, kShapeExponent);
  if (s > 1.0) return 0.0;
  if (s <= 0.7) return 1.0;
  return 1.0 - 0.6 * (s - 0.7) / 0.3;
}

bool blobs_overlap(const Blob& a, const Blob& b) {
  const double dx = a.cx - b.cx, dy = a.cy - b.cy;
  const double sep = std::max(a.rx, a.ry) + std::max(b.rx, b.ry) + 2.0;
  return dx * dx + dy * dy < sep * sep;
}

std::array<double, 3> jitter_color(const std::array<double, 3>& mean, double std, Rng& rng) {
  std::array<double, 3> c;
  for (int i = 0; i < 3; ++i) c[i] = std::clamp(mean[i] + std * rng.normal(), 0.0, 1.0);
  return c;
}

void paint(std::vector<double>& rgb, int h, int w, const Blob& b) {
  const int x0 = std::max(0, static_cast<int>(std::floor(b.cx - b.rx)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(b.cx + b.rx)));
  const int y0 = std::max(0, static_cast<int>(std::floor(b.cy - b.ry)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(b.cy + b.ry)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double a = blob_alpha(b, x, y);
      if (a <= 0.0) continue;
      for (int c = 0; c < 3; ++c) {
        double& px = rgb[(static_cast<std::size_t>(c) * h + y) * w + x];
        px = (1.0 - a) * px + a * b.color[c];
      }
    }
  }
}

// Smooth value-noise background: coarse random grid upsampled bilinearly.
std::vector<double> texture_plane(int h, int w, Rng& rng) {
  const int ch = std::max(2, h / 8 + 1), cw = std::max(2, w / 8 + 1);
  std::vector<double> coarse(static_cast<std::size_t>(ch) * cw);
  for (double& v : coarse) v = rng.uniform();
  const ProbMap up = bilinear_resize(ProbMap(ch, cw, std::move(coarse)), h, w);
  return up.data();
}

}  // namespace

void SceneParams::validate() const {
  if (height < 8 || width < 8) throw DataError("SceneParams: image must be at least 8x8");
  if (important_cx_frac < 0.0 || important_cx_frac > 1.0 || important_cy_frac < 0.0 ||
      important_cy_frac > 1.0) {
    throw DataError("SceneParams: center fractions must be in [0,1]");
  }
  if (radius_frac <= 0.0 || center_jitter_std < 0.0 || noise_std < 0.0 || bg_texture_scale < 0.0) {
    throw DataError("SceneParams: negative noise/size parameter");
  }
  if (bg_gradient < 0.0 || bg_gradient >= 1.0) {
    throw DataError("SceneParams: bg_gradient must be in [0,1)");
  }
  if (distractor_count < 0) throw DataError("SceneParams: distractor_count < 0");
  for (double v : obj_color_mean) {
    if (v < 0.0 || v > 1.0) throw DataError("SceneParams: colors must be in [0,1]");
  }
  const double rmax = radius_frac * std::min(height, width) * 1.15;  // after size jitter
  const double cx = important_cx_frac * (width - 1);
  const double cy = important_cy_frac * (height - 1);
  if (cx - rmax < 1.0 || cx + rmax > width - 2.0 || cy - rmax < 1.0 || cy + rmax > height - 2.0) {
    throw DataError("SceneParams: important object cannot fit inside the image");
  }
}

std::vector<SampleRecord> generate_dataset(const SceneParams& params, int n) {
  params.validate();
  if (n < 1) throw DataError("generate_dataset: n must be >= 1");
  const int h = params.height, w = params.width;
  const double side = std::min(h, w);
  Rng root(params.seed);

  std::vector<SampleRecord> out;
  out.reserve(n);
  for (int idx = 0; idx < n; ++idx) {
    Rng rng = root.fork(static_cast<std::uint64_t>(idx) + 1);

    // background
    std::vector<double> rgb(static_cast<std::size_t>(3) * h * w);
    const std::vector<double> tex = texture_plane(h, w, rng);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          const double diag = 0.5 * (static_cast<double>(x) / (w - 1) +
                                     static_cast<double>(y) / (h - 1));
          const double shade = 1.0 - params.bg_gradient * (1.0 - diag);
          rgb[static_cast<std::size_t>(c) * h * w + p] = std::clamp(
              (params.bg_color[c] + (tex[p] - 0.5) * 2.0 * params.bg_texture_scale) * shade, 0.0,
              1.0);
        }
      }
    }

    // important object, jittered around the configured center
    Blob obj;
    obj.rx = params.radius_frac * side * rng.uniform(0.85, 1.15);
    obj.ry = params.radius_frac * side * rng.uniform(0.85, 1.15);
    obj.color = jitter_color(params.obj_color_mean, params.obj_color_std, rng);
    const double jitter = params.center_jitter_std * side;
    const double cx0 = params.important_cx_frac * (w - 1);
    const double cy0 = params.important_cy_frac * (h - 1);
    // acceptance window is symmetric about the configured center so the
    // truncation cannot bias the mean object location
    const double bx = std::max(0.0, std::min(w - 2.0 - obj.rx - cx0, cx0 - obj.rx - 1.0));
    const double by = std::max(0.0, std::min(h - 2.0 - obj.ry - cy0, cy0 - obj.ry - 1.0));
    for (int attempt = 0;; ++attempt) {
      const double dx = jitter * rng.normal();
      const double dy = jitter * rng.normal();
      if ((std::abs(dx) <= bx && std::abs(dy) <= by) || attempt >= 50) {
        obj.cx = cx0 + std::clamp(dx, -bx, bx);
        obj.cy = cy0 + std::clamp(dy, -by, by);
        break;
      }
    }

    DistractorPolicy policy = params.policy;
    if (policy == DistractorPolicy::kMixed) {
      policy = idx % 2 == 0 ? DistractorPolicy::kSameAppearanceElsewhere
                            : DistractorPolicy::kDifferentAppearanceAtPrior;
    }

    std::vector<Blob> distractors;
    for (int d = 0; d < params.distractor_count; ++d) {
      Blob dis;
      dis.rx = params.radius_frac * side * rng.uniform(0.85, 1.15);
      dis.ry = params.radius_frac * side * rng.uniform(0.85, 1.15);
      if (policy == DistractorPolicy::kSameAppearanceElsewhere) {
        // identical appearance, parked far from the prior (upper-left area)
        dis.color = obj.color;
        for (int attempt = 0; attempt < 100; ++attempt) {
          dis.cx = rng.uniform(0.12, 0.45) * (w - 1);
          dis.cy = rng.uniform(0.12, 0.45) * (h - 1);
          bool ok = !blobs_overlap(dis, obj);
          for (const Blob& other : distractors) ok = ok && !blobs_overlap(dis, other);
          if (ok) break;
        }
      } else {
        // different color class squatting on the prior location; oversized,
        // so it dominates the prior neighborhood the way a table surface or
        // counter would, while the true object sits wherever it jittered to
        dis.rx = std::min(dis.rx * 3.5, (w - 4.0) / 2.0);
        dis.ry = std::min(dis.ry * 3.5, (h - 4.0) / 2.0);
        dis.color = jitter_color(params.alt_color_mean, params.obj_color_std, rng);
        dis.cx = params.important_cx_frac * (w - 1);
        dis.cy = params.important_cy_frac * (h - 1);
        dis.cx = std::clamp(dis.cx, dis.rx + 1.0, w - 2.0 - dis.rx);
        dis.cy = std::clamp(dis.cy, dis.ry + 1.0, h - 2.0 - dis.ry);
      }
      distractors.push_back(dis);
    }

    for (const Blob& dis : distractors) paint(rgb, h, w, dis);
    paint(rgb, h, w, obj);

    BinaryMask gt(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (blob_alpha(obj, x, y) > 0.0) gt.set(y, x, 1);
      }
    }
    const double area = static_cast<double>(gt.count()) / (static_cast<double>(h) * w);
    if (area < params.min_area_frac || area > params.max_area_frac) {
      throw DataError("generate_dataset: gt area " + std::to_string(area) +
                      " outside configured bounds");
    }

    if (params.noise_std > 0.0) {
      for (double& v : rgb) v = std::clamp(v + params.noise_std * rng.normal(), 0.0, 1.0);
    }

    SampleRecord rec;
    rec.image = ImageTensor(h, w, 3, std::move(rgb));
    rec.gt = std::move(gt);
    char id[16];
    std::snprintf(id, sizeof id, "%04d", idx);
    rec.id = id;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace vsn
