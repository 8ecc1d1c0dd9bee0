#pragma once

// Image export. PNG: 16-bit grayscale, linear in the clamped dBm window, one
// row per range bin (far range at the top) and one column per Doppler bin.
// .f32: "ISARF32\x01", uint32 LE header length, JSON header, then the M x N
// power matrix (dBm) as little-endian float32, row-major (row = Doppler bin).

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isarforge/core.hpp"
#include "isarforge/imaging.hpp"

namespace isarforge {

inline constexpr char kF32Magic[8] = {'I', 'S', 'A', 'R', 'F', '3', '2', '\x01'};

// ---------------------------------------------------------------------------
// Metadata
// ---------------------------------------------------------------------------

inline nlohmann::json axis_summary(const std::vector<double>& axis) {
  if (axis.empty()) return nullptr;
  const double step = axis.size() > 1 ? axis[1] - axis[0] : 0.0;
  return {{"first", axis.front()}, {"last", axis.back()}, {"step", step}, {"count", axis.size()}};
}

inline nlohmann::json label_to_json(const ImageLabel& l) {
  nlohmann::json c{{"kind", l.corruption}};
  if (l.snr_db) c["snr_db"] = *l.snr_db;
  if (l.wind_mps) c["wind_mps"] = *l.wind_mps;
  return {{"target_label", l.target}, {"route", l.route}, {"cpi_index", l.cpi_index}, {"corruption", c},
          {"seed", l.seed}};
}

inline nlohmann::json image_header(const IsarImage& img) {
  nlohmann::json h{{"rows", img.rows},
                   {"cols", img.cols},
                   {"layout", "row=doppler,col=range"},
                   {"units", "dBm"},
                   {"range_axis_m", axis_summary(img.range_axis)},
                   {"doppler_axis_hz", axis_summary(img.doppler_axis)},
                   {"crossrange_axis_m", axis_summary(img.crossrange_axis)},
                   {"crp_m", img.crp_m},
                   {"wavelength_m", img.wavelength},
                   {"window", window_name(img.window)},
                   {"omega_radps", img.omega ? nlohmann::json(*img.omega) : nlohmann::json(nullptr)},
                   {"label", label_to_json(img.label)}};
  h["dynamic_range_dbm"] = img.dynamic_range
                               ? nlohmann::json{img.dynamic_range->floor_dbm, img.dynamic_range->ceil_dbm}
                               : nlohmann::json(nullptr);
  return h;
}

// ---------------------------------------------------------------------------
// .f32
// ---------------------------------------------------------------------------

namespace detail {
inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}
}  // namespace detail

struct F32Image {
  nlohmann::json header;
  std::size_t rows = 0, cols = 0;
  std::vector<float> data;

  float at(std::size_t m, std::size_t n) const { return data[m * cols + n]; }
};

inline std::string encode_f32(const IsarImage& img) {
  if (img.power_dbm.size() != img.rows * img.cols) throw ValidationError("power matrix size does not match image");
  const std::string header = image_header(img).dump();
  std::string out(kF32Magic, sizeof(kF32Magic));
  detail::put_u32le(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  const std::size_t off = out.size();
  out.resize(off + 4 * img.power_dbm.size());
  for (std::size_t i = 0; i < img.power_dbm.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(img.power_dbm[i]));
    for (int k = 0; k < 4; ++k) out[off + 4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
  }
  return out;
}

inline void write_f32(const std::filesystem::path& path, const IsarImage& img) {
  detail::write_file_atomic(path, encode_f32(img));
}

inline F32Image read_f32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kF32Magic, 8) != 0)
    throw Error(path.string() + ": not an ISARF32 file");
  const std::uint32_t hlen = detail::get_u32le(bytes.data() + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(hlen)) throw Error(path.string() + ": truncated header");
  F32Image img;
  try {
    img.header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + hlen);
    img.rows = img.header.at("rows").get<std::size_t>();
    img.cols = img.header.at("cols").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": bad header: " + e.what());
  }
  const std::size_t off = 12 + hlen, count = img.rows * img.cols;
  if (bytes.size() != off + 4 * count)
    throw Error(path.string() + ": payload holds " + std::to_string((bytes.size() - off) / 4) +
                         " values, header says " + std::to_string(count));
  img.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    img.data[i] = std::bit_cast<float>(detail::get_u32le(bytes.data() + off + 4 * i));
  return img;
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

struct Gray16 {
  std::size_t width = 0, height = 0;
  std::vector<std::uint16_t> pixels;  ///< row-major, top row first

  std::uint16_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// Linear map of [floor, ceil] dBm onto [0, 65535]. Values outside are clipped.
inline std::uint16_t dbm_to_gray(double dbm, const DynamicRange& dr) {
  const double t = std::clamp((dbm - dr.floor_dbm) / (dr.ceil_dbm - dr.floor_dbm), 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(t * 65535.0));
}

inline Gray16 render_gray16(const IsarImage& img, std::optional<DynamicRange> dr = std::nullopt) {
  const DynamicRange w = dr ? *dr : img.dynamic_range.value_or(kIdealRange);
  if (!(w.floor_dbm < w.ceil_dbm)) throw ConfigError("dynamic range floor must be below the ceiling");
  Gray16 g;
  g.width = img.rows;   // Doppler
  g.height = img.cols;  // range
  g.pixels.resize(g.width * g.height);
  // Transposed copy in tiles.
  constexpr std::size_t kTile = 32;
  for (std::size_t x0 = 0; x0 < g.width; x0 += kTile)
    for (std::size_t y0 = 0; y0 < g.height; y0 += kTile)
      for (std::size_t x = x0; x < std::min(x0 + kTile, g.width); ++x)
        for (std::size_t y = y0; y < std::min(y0 + kTile, g.height); ++y)
          g.pixels[y * g.width + x] = dbm_to_gray(img.power(x, g.height - 1 - y), w);
  return g;
}

namespace detail {
struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}
inline void png_warning_fn(png_structp, png_const_charp) {}
}  // namespace detail

inline void write_png16(const std::filesystem::path& path, const Gray16& g, int compression = 3) {
  if (g.width == 0 || g.height == 0 || g.pixels.size() != g.width * g.height)
    throw ValidationError("PNG image has inconsistent dimensions");
  auto tmp = path;
  tmp += ".tmp";
  detail::FilePtr fp(std::fopen(tmp.c_str(), "wb"));
  if (!fp) throw Error("cannot open " + tmp.string() + " for writing");
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, detail::png_error_fn, detail::png_warning_fn);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> row(2 * g.width);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("writing " + path.string() + ": " + err);
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, compression);
  // Adaptive row filtering costs more than it saves on noise-like images at fast levels.
  if (compression <= 1) {
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
    png_set_compression_strategy(png, Z_RLE);
  }
  png_set_IHDR(png, info, static_cast<png_uint_32>(g.width), static_cast<png_uint_32>(g.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      const std::uint16_t v = g.pixels[y * g.width + x];
      row[2 * x] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
      row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xFF);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0) throw Error("write failed for " + tmp.string());
  fp.reset();
  std::filesystem::rename(tmp, path);
}

inline void write_png16(const std::filesystem::path& path, const IsarImage& img) {
  write_png16(path, render_gray16(img));
}

inline Gray16 read_png16(const std::filesystem::path& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open " + path.string());
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, detail::png_error_fn, detail::png_warning_fn);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  Gray16 g;
  std::vector<std::uint8_t> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(path.string() + ": " + err);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(path.string() + ": expected 16-bit grayscale");
  }
  g.width = png_get_image_width(png, info);
  g.height = png_get_image_height(png, info);
  g.pixels.resize(g.width * g.height);
  row.resize(png_get_rowbytes(png, info));
  for (std::size_t y = 0; y < g.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (std::size_t x = 0; x < g.width; ++x)
      g.pixels[y * g.width + x] = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return g;
}

}  // namespace isarforge
