#include "vsn/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace vsn {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Decoded 8-bit pixels, interleaved.
struct RawPng {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

RawPng decode_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8)) {
    throw DataError(path + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("failed to decode " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  png_set_expand(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);

  RawPng out;
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.channels = png_get_channels(png, info);
  if (out.channels != 1 && out.channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path + ": unsupported channel count");
  }
  out.pixels.resize(static_cast<std::size_t>(out.height) * out.width * out.channels);
  std::vector<png_bytep> rows(out.height);
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  for (int y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode_png(const std::string& path, int height, int width, int channels,
                const std::vector<std::uint8_t>& pixels) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed to encode " + path);
  }
  png_init_io(png, fp.get());
  const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, width, height, 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels.data() + y * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

void write_u32le(std::ostream& os, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::istream& is) {
  std::uint8_t b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

ImageTensor read_png(const std::string& path) {
  RawPng raw = decode_png(path);
  std::vector<double> data(static_cast<std::size_t>(raw.height) * raw.width * raw.channels);
  // interleaved bytes -> planar doubles
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      for (int c = 0; c < raw.channels; ++c) {
        const std::uint8_t b =
            raw.pixels[(static_cast<std::size_t>(y) * raw.width + x) * raw.channels + c];
        data[(static_cast<std::size_t>(c) * raw.height + y) * raw.width + x] = b / 255.0;
      }
    }
  }
  return ImageTensor(raw.height, raw.width, raw.channels, std::move(data));
}

void write_png(const std::string& path, const ImageTensor& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DataError("write_png: only 1- or 3-channel images supported");
  }
  std::vector<std::uint8_t> px(static_cast<std::size_t>(image.height()) * image.width() *
                               image.channels());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        px[(static_cast<std::size_t>(y) * image.width() + x) * image.channels() + c] =
            to_byte(image.at(c, y, x));
      }
    }
  }
  encode_png(path, image.height(), image.width(), image.channels(), px);
}

BinaryMask read_mask_png(const std::string& path) {
  RawPng raw = decode_png(path);
  BinaryMask mask(raw.height, raw.width);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      // first channel decides
      const std::uint8_t b =
          raw.pixels[(static_cast<std::size_t>(y) * raw.width + x) * raw.channels];
      mask.set(y, x, b >= 128 ? 1 : 0);
    }
  }
  return mask;
}

void write_mask_png(const std::string& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> px(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) px[i] = mask[i] ? 255 : 0;
  encode_png(path, mask.height(), mask.width(), 1, px);
}

ProbMap read_pmf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PMF1", 4) != 0) throw DataError(path + ": bad PMF magic");
  const std::uint32_t h = read_u32le(is);
  const std::uint32_t w = read_u32le(is);
  if (!is || h == 0 || w == 0 || h > 1u << 20 || w > 1u << 20) {
    throw DataError(path + ": bad PMF header");
  }
  std::vector<float> buf(static_cast<std::size_t>(h) * w);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (!is) throw DataError(path + ": truncated PMF data");
  std::vector<double> data(buf.begin(), buf.end());
  return ProbMap(static_cast<int>(h), static_cast<int>(w), std::move(data));
}

void write_pmf(const std::string& path, const ProbMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  os.write("PMF1", 4);
  write_u32le(os, static_cast<std::uint32_t>(map.height()));
  write_u32le(os, static_cast<std::uint32_t>(map.width()));
  std::vector<float> buf(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) buf[i] = static_cast<float>(map[i]);
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (!os) throw DataError("failed writing " + path);
}

void write_probmap_png(const std::string& path, const ProbMap& map) {
  std::vector<std::uint8_t> px(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) px[i] = to_byte(map[i]);
  encode_png(path, map.height(), map.width(), 1, px);
}

ProbMap read_probmap_png(const std::string& path) {
  RawPng raw = decode_png(path);
  std::vector<double> data(static_cast<std::size_t>(raw.height) * raw.width);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      data[static_cast<std::size_t>(y) * raw.width + x] =
          raw.pixels[(static_cast<std::size_t>(y) * raw.width + x) * raw.channels] / 255.0;
    }
  }
  return ProbMap(raw.height, raw.width, std::move(data));
}

RegionSet read_rgs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::string magic;
  int h = 0, w = 0, k = 0;
  is >> magic >> h >> w >> k;
  if (!is || magic != "RGS1" || h < 1 || w < 1 || k < 1) {
    throw DataError(path + ": bad RGS header");
  }
  is.ignore();  // trailing newline
  RegionSet rs;
  rs.height = h;
  rs.width = w;
  const std::size_t npx = static_cast<std::size_t>(h) * w;
  for (int i = 0; i < k; ++i) {
    std::string line;
    if (!std::getline(is, line)) throw DataError(path + ": truncated RGS body");
    std::vector<std::uint8_t> mask(npx, 0);
    std::stringstream ss(line);
    std::string run;
    while (std::getline(ss, run, ',')) {
      const auto colon = run.find(':');
      if (colon == std::string::npos) throw DataError(path + ": bad run '" + run + "'");
      const std::size_t start = std::stoull(run.substr(0, colon));
      const std::size_t len = std::stoull(run.substr(colon + 1));
      if (len == 0 || start + len > npx) throw DataError(path + ": run out of bounds");
      std::fill(mask.begin() + start, mask.begin() + start + len, std::uint8_t{1});
    }
    rs.regions.emplace_back(h, w, std::move(mask));
  }
  rs.validate();
  return rs;
}

void write_rgs(const std::string& path, const RegionSet& regions) {
  regions.validate();
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  os << "RGS1 " << regions.height << ' ' << regions.width << ' ' << regions.regions.size() << '\n';
  for (const BinaryMask& r : regions.regions) {
    bool first = true;
    std::size_t i = 0;
    while (i < r.size()) {
      if (r[i]) {
        std::size_t len = 1;
        while (i + len < r.size() && r[i + len]) ++len;
        if (!first) os << ',';
        os << i << ':' << len;
        first = false;
        i += len;
      } else {
        ++i;
      }
    }
    os << '\n';
  }
  if (!os) throw DataError("failed writing " + path);
}

}  // namespace vsn
