#pragma once

// Range-Doppler image formation, dynamic-range clamping and cross-range scaling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "isarforge/core.hpp"
#include "isarforge/echo.hpp"
#include "isarforge/fft.hpp"
#include "isarforge/kinematics.hpp"
#include "isarforge/radar.hpp"

namespace isarforge {

enum class Window { kNone, kHann };

inline std::string window_name(Window w) { return w == Window::kHann ? "hann" : "none"; }
inline Window parse_window(const std::string& s) {
  if (s == "none") return Window::kNone;
  if (s == "hann") return Window::kHann;
  throw ConfigError("unknown window '" + s + "' (expected none or hann)");
}

struct DynamicRange {
  double floor_dbm = -120.0;
  double ceil_dbm = -40.0;
};

inline constexpr DynamicRange kNoisyRange{-90.0, -40.0};
inline constexpr DynamicRange kClutteredRange{-120.0, -40.0};
inline constexpr DynamicRange kIdealRange{-120.0, -40.0};

/// Provenance carried with every image.
struct ImageLabel {
  std::string target;
  std::string route;
  std::size_t cpi_index = 0;
  std::string corruption = "ideal";  ///< ideal | noise | clutter
  std::optional<double> snr_db;
  std::optional<double> wind_mps;
  std::uint64_t seed = 0;
};

/// Range-Doppler image. Matrices are M x N row-major: row = Doppler bin,
/// column = range bin, both axes increasing with the index.
struct IsarImage {
  std::size_t rows = 0;  ///< M
  std::size_t cols = 0;  ///< N
  CMatrix complex;       ///< unnormalised 2D DFT, fftshifted
  std::vector<double> power_dbm;
  std::vector<double> range_axis;
  std::vector<double> doppler_axis;
  std::vector<double> crossrange_axis;  ///< empty when no cross-range scaling applies
  std::optional<double> omega;
  double crp_m = 0.0;
  double wavelength = 0.0;
  Window window = Window::kNone;
  std::optional<DynamicRange> dynamic_range;
  ImageLabel label;

  double& power(std::size_t m, std::size_t n) { return power_dbm[m * cols + n]; }
  double power(std::size_t m, std::size_t n) const { return power_dbm[m * cols + n]; }
  bool has_crossrange() const { return !crossrange_axis.empty(); }
};

inline std::vector<double> make_range_axis(const RadarParams& p, double crp) {
  const std::size_t n = p.num_samples();
  const double bin = p.range_bin_m();
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i)
    axis[i] = crp + (static_cast<double>(i) - static_cast<double>(n / 2)) * bin;
  return axis;
}

inline std::vector<double> make_doppler_axis(const RadarParams& p) {
  const std::size_t m = p.num_pri();
  const double df = p.doppler_bin_hz();
  std::vector<double> axis(m);
  for (std::size_t i = 0; i < m; ++i) axis[i] = (static_cast<double>(i) - static_cast<double>(m / 2)) * df;
  return axis;
}

/// Pixel power in watts: |chi|^2 / (M N). White noise of per-sample power P
/// averages P per pixel.
inline double pixel_power_w(const cdouble& chi, std::size_t m, std::size_t n) {
  return std::norm(chi) / (static_cast<double>(m) * static_cast<double>(n));
}

inline constexpr double kPowerFloorW = 1e-300;

/// Recompute power_dbm from the complex matrix (drops any clamp).
inline void refresh_power(IsarImage& img) {
  img.power_dbm.resize(img.rows * img.cols);
  for (std::size_t i = 0; i < img.power_dbm.size(); ++i)
    img.power_dbm[i] = watts_to_dbm(std::max(kPowerFloorW, pixel_power_w(img.complex.data[i], img.rows, img.cols)));
  img.dynamic_range.reset();
}

inline std::vector<double> window_coefficients(Window w, std::size_t n) {
  std::vector<double> c(n, 1.0);
  if (w == Window::kHann && n > 1)
    for (std::size_t i = 0; i < n; ++i)
      c[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1)));
  return c;
}

/// 2D DFT of a cube: forward along fast time, exp(+j) kernel along slow time so
/// that the Doppler axis reads +2v/lambda for receding scatterers. Both axes
/// are shifted so the zero bin sits at index floor(len/2).
inline IsarImage form_image(const CMatrix& data, const RadarParams& params, double crp, Window window = Window::kNone) {
  const std::size_t M = data.rows, N = data.cols;
  if (M != params.num_pri() || N != params.num_samples())
    throw ValidationError("cube dimensions do not match the radar parameters");
  for (const auto& v : data.data)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ValidationError("cube contains non-finite samples");
  IsarImage img;
  img.rows = M;
  img.cols = N;
  img.complex = data;
  if (window != Window::kNone) {
    const auto wm = window_coefficients(window, M), wn = window_coefficients(window, N);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t n = 0; n < N; ++n) img.complex(m, n) *= wm[m] * wn[n];
  }
  fft_rows(img.complex, FftSign::kForward);
  fft_cols(img.complex, FftSign::kBackward);
  fftshift(img.complex);
  refresh_power(img);
  img.range_axis = make_range_axis(params, crp);
  img.doppler_axis = make_doppler_axis(params);
  img.crp_m = crp;
  img.wavelength = params.wavelength();
  img.window = window;
  return img;
}

inline IsarImage form_image(const RawDataCube& cube, Window window = Window::kNone) {
  auto img = form_image(cube.data, cube.params, cube.crp_m, window);
  img.label.cpi_index = cube.cpi_index;
  return img;
}

/// Noise of `power` per fast-time sample added after an unwindowed transform.
/// The DFT of white circular Gaussian noise is white with variance M*N*power,
/// so this matches noise added to the cube before form_image in distribution.
inline void add_image_noise(IsarImage& img, double power, std::uint64_t seed, std::size_t cpi_index,
                            std::uint64_t salt = 0) {
  add_noise(img.complex, power * static_cast<double>(img.rows * img.cols), seed, cpi_index, salt);
  refresh_power(img);
}

/// Clip power to the window and record it.
inline void clamp_dynamic_range(IsarImage& img, double floor_dbm, double ceil_dbm) {
  if (!(floor_dbm < ceil_dbm)) throw ConfigError("dynamic range floor must be below the ceiling");
  for (auto& p : img.power_dbm) p = std::clamp(p, floor_dbm, ceil_dbm);
  img.dynamic_range = DynamicRange{floor_dbm, ceil_dbm};
}
inline void clamp_dynamic_range(IsarImage& img, const DynamicRange& dr) {
  clamp_dynamic_range(img, dr.floor_dbm, dr.ceil_dbm);
}

// ---------------------------------------------------------------------------
// Rotation and cross-range
// ---------------------------------------------------------------------------

/// Vehicle yaw at the end of each CPI: yaw[p - 1] is the value for CPI p.
struct YawTrack {
  std::vector<double> yaw;
  double cpi_s = 0.1;

  double at(std::size_t p) const {
    if (p < 1 || p > yaw.size()) throw ValidationError("CPI index outside the yaw track");
    return yaw[p - 1];
  }
};

inline YawTrack make_yaw_track(const FrameSet& frames, const RadarParams& params, std::size_t count) {
  YawTrack t;
  t.cpi_s = params.cpi_s;
  t.yaw.reserve(count);
  for (std::size_t p = 1; p <= count; ++p) {
    const double tt = std::min(frames.duration(), static_cast<double>(p) * params.cpi_s);
    t.yaw.push_back(frames.pose_at(tt).yaw);
  }
  return t;
}

/// omega = (yaw[p] - yaw[p-1]) / T_CPI. Empty for the first CPI.
inline std::optional<double> estimate_omega(const YawTrack& track, std::size_t p, double cpi_s) {
  if (p < 2) return std::nullopt;
  return (track.at(p) - track.at(p - 1)) / cpi_s;
}

inline constexpr double kDefaultOmegaMin = 0.05;

/// Label the Doppler axis in metres. Returns false (and leaves the image with a
/// Doppler axis only) when |omega| <= omega_min.
inline bool doppler_to_crossrange(IsarImage& img, double omega, double omega_min = kDefaultOmegaMin) {
  img.omega = omega;
  if (!(std::abs(omega) > omega_min)) {
    img.crossrange_axis.clear();
    return false;
  }
  const double scale = img.wavelength / (2.0 * omega);
  img.crossrange_axis.resize(img.doppler_axis.size());
  for (std::size_t i = 0; i < img.doppler_axis.size(); ++i) img.crossrange_axis[i] = img.doppler_axis[i] * scale;
  return true;
}

// ---------------------------------------------------------------------------
// Measurements
// ---------------------------------------------------------------------------

struct PixelIndex {
  std::size_t row = 0;  ///< Doppler
  std::size_t col = 0;  ///< range
};

inline PixelIndex peak_pixel(const IsarImage& img) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < img.power_dbm.size(); ++i)
    if (img.power_dbm[i] > img.power_dbm[best]) best = i;
  return {best / img.cols, best % img.cols};
}

/// Bounding box of all pixels within `threshold_db` of the peak.
struct SupportBox {
  std::size_t row_min = 0, row_max = 0, col_min = 0, col_max = 0;
  std::size_t rows() const { return row_max - row_min + 1; }
  std::size_t cols() const { return col_max - col_min + 1; }
};

inline SupportBox support_box(const IsarImage& img, double threshold_db) {
  const auto pk = peak_pixel(img);
  const double level = img.power(pk.row, pk.col) - std::abs(threshold_db);
  SupportBox box{pk.row, pk.row, pk.col, pk.col};
  for (std::size_t m = 0; m < img.rows; ++m)
    for (std::size_t n = 0; n < img.cols; ++n)
      if (img.power(m, n) >= level) {
        box.row_min = std::min(box.row_min, m);
        box.row_max = std::max(box.row_max, m);
        box.col_min = std::min(box.col_min, n);
        box.col_max = std::max(box.col_max, n);
      }
  return box;
}

/// Short-time spectra of a slow-time signal. Frequencies use the same sign
/// convention as the image Doppler axis.
struct Spectrogram {
  std::vector<double> times;        ///< window centers (s from the first sample)
  std::vector<double> frequencies;  ///< Hz, increasing
  std::vector<std::vector<double>> power;  ///< [frame][frequency]

  /// Frequency of the strongest bin in a frame.
  double peak_frequency(std::size_t frame) const {
    const auto& row = power.at(frame);
    return frequencies[static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin())];
  }
};

inline Spectrogram spectrogram(const std::vector<cdouble>& x, double dt, std::size_t window, std::size_t hop,
                               std::size_t nfft) {
  if (window == 0 || hop == 0 || nfft < window) throw ConfigError("invalid spectrogram geometry");
  Spectrogram s;
  const auto w = window_coefficients(Window::kHann, window);
  s.frequencies.resize(nfft);
  for (std::size_t k = 0; k < nfft; ++k)
    s.frequencies[k] = (static_cast<double>(k) - static_cast<double>(nfft / 2)) / (static_cast<double>(nfft) * dt);
  std::vector<cdouble> buf(nfft);
  for (std::size_t start = 0; start + window <= x.size(); start += hop) {
    std::fill(buf.begin(), buf.end(), cdouble{});
    for (std::size_t i = 0; i < window; ++i) buf[i] = x[start + i] * w[i];
    fft_inplace(buf, FftSign::kBackward);
    std::vector<double> row(nfft);
    for (std::size_t k = 0; k < nfft; ++k) row[(k + nfft / 2) % nfft] = std::norm(buf[k]);
    s.power.push_back(std::move(row));
    s.times.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(window - 1)) * dt);
  }
  return s;
}

}  // namespace isarforge
