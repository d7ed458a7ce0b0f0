#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "vsn/core.hpp"
#include "vsn/io.hpp"
#include "vsn/rng.hpp"

using namespace vsn;

namespace {

// scalar oracle for one output sample at pixel centers
double bilinear_oracle(const ProbMap& src, int new_h, int new_w, int y, int x) {
  const double sy = std::clamp((y + 0.5) * src.height() / static_cast<double>(new_h) - 0.5, 0.0,
                               src.height() - 1.0);
  const double sx = std::clamp((x + 0.5) * src.width() / static_cast<double>(new_w) - 0.5, 0.0,
                               src.width() - 1.0);
  const int y0 = static_cast<int>(sy), x0 = static_cast<int>(sx);
  const int y1 = std::min(y0 + 1, src.height() - 1), x1 = std::min(x0 + 1, src.width() - 1);
  const double fy = sy - y0, fx = sx - x0;
  return (src.at(y0, x0) * (1 - fx) + src.at(y0, x1) * fx) * (1 - fy) +
         (src.at(y1, x0) * (1 - fx) + src.at(y1, x1) * fx) * fy;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("coord grids: 2x2 corners") {
  const CoordGrids g = make_coord_grids(2, 2);
  CHECK(g.xgrid.at(0, 0) == 0.0);
  CHECK(g.xgrid.at(0, 1) == 1.0);
  CHECK(g.xgrid.at(1, 0) == 0.0);
  CHECK(g.xgrid.at(1, 1) == 1.0);
  CHECK(g.ygrid.at(0, 0) == 0.0);
  CHECK(g.ygrid.at(0, 1) == 0.0);
  CHECK(g.ygrid.at(1, 0) == 1.0);
  CHECK(g.ygrid.at(1, 1) == 1.0);
}

TEST_CASE("coord grids: 3x3 midpoint and range") {
  const CoordGrids g = make_coord_grids(3, 3);
  CHECK(g.xgrid.at(1, 1) == 0.5);
  CHECK(g.ygrid.at(1, 1) == 0.5);
}

TEST_CASE("coord grids: extremes are exactly 0 and 1, constant along the other axis") {
  const CoordGrids g = make_coord_grids(7, 5);
  double xmin = 2, xmax = -1;
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 5; ++x) {
      xmin = std::min(xmin, g.xgrid.at(y, x));
      xmax = std::max(xmax, g.xgrid.at(y, x));
      CHECK(g.xgrid.at(y, x) == g.xgrid.at(0, x));
      CHECK(g.ygrid.at(y, x) == g.ygrid.at(y, 0));
    }
  }
  CHECK(xmin == 0.0);
  CHECK(xmax == 1.0);
}

TEST_CASE("coord grids: dimension < 2 rejected") {
  CHECK_THROWS_AS(make_coord_grids(1, 5), DataError);
  CHECK_THROWS_AS(make_coord_grids(5, 1), DataError);
}

TEST_CASE("bilinear_resize: constant stays constant") {
  const ProbMap m(5, 7, 0.7);
  const ProbMap r = bilinear_resize(m, 3, 11);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("bilinear_resize: identity is bit-exact") {
  Rng rng(7);
  std::vector<double> data(6 * 4);
  for (double& v : data) v = rng.uniform();
  const ProbMap m(6, 4, data);
  const ProbMap r = bilinear_resize(m, 6, 4);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(r[i] == m[i]);
}

TEST_CASE("bilinear_resize: 4x4 ramp down to 2x2 matches scalar oracle") {
  std::vector<double> data(16);
  for (int i = 0; i < 16; ++i) data[i] = i / 15.0;
  const ProbMap m(4, 4, data);
  const ProbMap r = bilinear_resize(m, 2, 2);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      CHECK(r.at(y, x) == doctest::Approx(bilinear_oracle(m, 2, 2, y, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bilinear_resize: output never exceeds input range") {
  Rng rng(42);
  std::vector<double> data(8 * 8);
  double lo = 1, hi = 0;
  for (double& v : data) {
    v = rng.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const ProbMap m(8, 8, data);
  for (const auto [h, w] : {std::pair{3, 5}, {13, 2}, {1, 16}}) {
    const ProbMap r = bilinear_resize(m, h, w);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(r[i] >= lo - 1e-12);
      CHECK(r[i] <= hi + 1e-12);
    }
  }
}

TEST_CASE("bilinear_resize: zero target dimension rejected") {
  CHECK_THROWS_AS(bilinear_resize(ProbMap(2, 2), 0, 2), DataError);
}

TEST_CASE("ProbMap rejects NaN, Inf and out-of-range values") {
  CHECK_THROWS_AS(ProbMap(1, 2, {0.5, std::numeric_limits<double>::quiet_NaN()}), DataError);
  CHECK_THROWS_AS(ProbMap(1, 2, {0.5, std::numeric_limits<double>::infinity()}), DataError);
  CHECK_THROWS_AS(ProbMap(1, 2, {0.5, 1.5}), DataError);
  CHECK_THROWS_AS(ProbMap(1, 2, {-0.1, 0.5}), DataError);
  ProbMap ok(1, 2);
  CHECK_THROWS_AS(ok.set(0, 0, 2.0), DataError);
}

TEST_CASE("BinaryMask rejects non-binary values") {
  CHECK_THROWS_AS(BinaryMask(1, 2, {0, 2}), DataError);
}

TEST_CASE("pmf round trip") {
  Rng rng(3);
  std::vector<double> data(5 * 9);
  for (double& v : data) {
    v = static_cast<float>(rng.uniform());  // f32 storage, keep values representable
  }
  const ProbMap m(5, 9, data);
  const auto path = temp_file("vsn_test.pmf");
  write_pmf(path.string(), m);
  const ProbMap back = read_pmf(path.string());
  REQUIRE(back.height() == 5);
  REQUIRE(back.width() == 9);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(back[i] == m[i]);
  std::filesystem::remove(path);
}

TEST_CASE("png image round trip at 8-bit resolution") {
  Rng rng(11);
  std::vector<double> data(3 * 4 * 6);
  for (double& v : data) v = std::round(rng.uniform() * 255.0) / 255.0;
  const ImageTensor img(4, 6, 3, data);
  const auto path = temp_file("vsn_test.png");
  write_png(path.string(), img);
  const ImageTensor back = read_png(path.string());
  REQUIRE(back.channels() == 3);
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    CHECK(back.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-12));
  }
  std::filesystem::remove(path);
}

TEST_CASE("mask png round trip") {
  BinaryMask m(3, 5);
  m.set(0, 0, 1);
  m.set(2, 4, 1);
  m.set(1, 2, 1);
  const auto path = temp_file("vsn_mask.png");
  write_mask_png(path.string(), m);
  CHECK(read_mask_png(path.string()) == m);
  std::filesystem::remove(path);
}

TEST_CASE("rgs round trip") {
  RegionSet rs;
  rs.height = 3;
  rs.width = 4;
  BinaryMask a(3, 4), b(3, 4);
  for (int x = 0; x < 4; ++x) a.set(0, x, 1);
  for (int y = 0; y < 3; ++y) {
    b.set(y, 1, 1);
    b.set(y, 2, 1);
  }
  rs.regions = {a, b};
  const auto path = temp_file("vsn_test.rgs");
  write_rgs(path.string(), rs);
  const RegionSet back = read_rgs(path.string());
  REQUIRE(back.regions.size() == 2);
  CHECK(back.regions[0] == a);
  CHECK(back.regions[1] == b);
  std::filesystem::remove(path);
}
