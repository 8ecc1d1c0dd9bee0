#pragma once

// Ground clutter: per-range-bin exponential surface reflectivity, a range
// profile from the clutter range equation, and a low-pass Doppler spectrum
// whose width grows with wind speed. Injected per pixel as random-phase speckle.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "isarforge/core.hpp"
#include "isarforge/imaging.hpp"
#include "isarforge/radar.hpp"

namespace isarforge {

struct ClutterParams {
  double sigma0_mean_db = -15.0;
  double wind_mps = 0.0;
  double beamwidth_rad = deg_to_rad(120.0);
  double radar_height_m = 0.5;
  double range_resolution_m = 0.03;  ///< ground patch depth
  std::uint64_t seed = 1;

  void validate() const {
    if (!(wind_mps >= 0.0)) throw ConfigError("wind speed must be non-negative");
    if (!(range_resolution_m > 0.0)) throw ConfigError("clutter range resolution must be positive");
    if (!(radar_height_m > 0.0)) throw ConfigError("radar height must be positive");
    if (!(beamwidth_rad >= 0.0)) throw ConfigError("beamwidth must be non-negative");
  }
};

/// Clutter settings tied to a radar: patch depth c / (2 K T_PRI) from the full
/// chirp bandwidth, height from the radar position.
inline ClutterParams clutter_params_for(const RadarParams& radar, double wind_mps, std::uint64_t seed,
                                        double sigma0_mean_db = -15.0) {
  ClutterParams c;
  c.sigma0_mean_db = sigma0_mean_db;
  c.wind_mps = wind_mps;
  c.beamwidth_rad = radar.beamwidth_rad();
  c.radar_height_m = radar.radar_pos.z;
  c.range_resolution_m = kSpeedOfLight / (2.0 * radar.chirp_rate_hzps * radar.pri_s);
  c.seed = seed;
  return c;
}

/// One exponential draw per range bin, mean 10^(sigma0_mean_db / 10).
inline std::vector<double> sample_sigma0(const ClutterParams& p, std::size_t bins, std::uint64_t image_key = 0) {
  auto rng = make_stream(p.seed, StreamDomain::kSigma0, image_key);
  std::exponential_distribution<double> dist(1.0 / db_to_linear(p.sigma0_mean_db));
  std::vector<double> out(bins);
  for (auto& v : out) {
    do v = dist(rng);
    while (!(v > 0.0));
  }
  return out;
}

struct RangeProfile {
  std::vector<double> power_w;  ///< C_0 per range bin
  std::size_t skipped = 0;      ///< bins at or inside the radar height
};

/// C_0[r] = P G_t G_r sigma0 theta_BW dr sec(psi) / ((4 pi)^2 r^3), psi = asin(h / r).
inline RangeProfile clutter_range_profile(const ClutterParams& p, const RadarParams& radar,
                                          const std::vector<double>& ranges, const std::vector<double>& sigma0) {
  if (sigma0.size() != ranges.size()) throw ValidationError("sigma0 and range axis lengths differ");
  RangeProfile out;
  out.power_w.assign(ranges.size(), 0.0);
  const double fp = 4.0 * kPi;
  const double k = radar.tx_power_w() * radar.tx_gain() * radar.rx_gain() * p.beamwidth_rad * p.range_resolution_m /
                   (fp * fp);
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const double r = ranges[i];
    if (r <= p.radar_height_m) {
      ++out.skipped;
      continue;
    }
    const double sec_psi = 1.0 / std::cos(std::asin(p.radar_height_m / r));
    out.power_w[i] = k * sigma0[i] * sec_psi / (r * r * r);
  }
  return out;
}

inline RangeProfile clutter_range_profile(const ClutterParams& p, const RadarParams& radar,
                                          const std::vector<double>& ranges, double sigma0) {
  return clutter_range_profile(p, radar, ranges, std::vector<double>(ranges.size(), sigma0));
}

struct DopplerShape {
  double exponent = 0.0;  ///< s
  double width_hz = 0.0;  ///< -3 dB half width
};

/// Width 1.23 (3.2 / lambda) U^1.3 and exponent 2(U+2)/(U+1) (100 / (2 pi f_GHz))^0.2.
inline DopplerShape doppler_shape(double wind_mps, double fc_hz) {
  if (!(wind_mps > 0.0)) throw ConfigError("Doppler clutter shape needs a positive wind speed");
  const double lambda = kSpeedOfLight / fc_hz;
  DopplerShape s;
  s.width_hz = 1.23 * (3.2 / lambda) * std::pow(wind_mps, 1.3);
  s.exponent = 2.0 * (wind_mps + 2.0) / (wind_mps + 1.0) * std::pow(100.0 / (kTwoPi * fc_hz * 1e-9), 0.2);
  return s;
}

inline double doppler_factor(double f_hz, const DopplerShape& s) {
  return 1.0 / (1.0 + std::pow(std::abs(f_hz / s.width_hz), s.exponent));
}

/// Expected clutter power per pixel, M x N row-major like IsarImage.
struct ClutterField {
  std::size_t rows = 0, cols = 0;
  std::vector<double> power_w;
  RangeProfile range_profile;
  std::vector<double> sigma0;
  std::optional<DopplerShape> shape;  ///< empty when there is no wind

  double power(std::size_t m, std::size_t n) const { return power_w[m * cols + n]; }
};

/// Doppler weights per row. Without wind only the 0 Hz row is non-zero.
inline std::vector<double> doppler_weights(const ClutterParams& p, const RadarParams& radar,
                                           const std::vector<double>& doppler_axis) {
  std::vector<double> w(doppler_axis.size(), 0.0);
  if (p.wind_mps > 0.0) {
    const auto s = doppler_shape(p.wind_mps, radar.fc_hz);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = doppler_factor(doppler_axis[i], s);
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = doppler_axis[i] == 0.0 ? 1.0 : 0.0;
  }
  return w;
}

inline ClutterField make_clutter_field(const ClutterParams& p, const RadarParams& radar,
                                       const std::vector<double>& range_axis, const std::vector<double>& doppler_axis,
                                       std::uint64_t image_key = 0) {
  p.validate();
  ClutterField f;
  f.rows = doppler_axis.size();
  f.cols = range_axis.size();
  f.sigma0 = sample_sigma0(p, f.cols, image_key);
  f.range_profile = clutter_range_profile(p, radar, range_axis, f.sigma0);
  if (p.wind_mps > 0.0) f.shape = doppler_shape(p.wind_mps, radar.fc_hz);
  const auto w = doppler_weights(p, radar, doppler_axis);
  f.power_w.resize(f.rows * f.cols);
  for (std::size_t m = 0; m < f.rows; ++m)
    for (std::size_t n = 0; n < f.cols; ++n) f.power_w[m * f.cols + n] = f.range_profile.power_w[n] * w[m];
  return f;
}

/// chi += sqrt(C M N) exp(j phi), phi uniform, so each pixel gains C watts on
/// the image power scale.
inline void inject_clutter(IsarImage& img, const ClutterField& field, const ClutterParams& p,
                           std::uint64_t image_key = 0) {
  if (field.rows != img.rows || field.cols != img.cols) throw ValidationError("clutter field size mismatch");
  auto rng = make_stream(p.seed, StreamDomain::kClutterPhase, image_key);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const double mn = static_cast<double>(img.rows) * static_cast<double>(img.cols);
  for (std::size_t i = 0; i < field.power_w.size(); ++i) {
    const double phi = phase(rng);
    if (field.power_w[i] > 0.0) img.complex.data[i] += std::polar(std::sqrt(field.power_w[i] * mn), phi);
  }
  refresh_power(img);
  img.label.corruption = "clutter";
  img.label.wind_mps = p.wind_mps;
  img.label.seed = p.seed;
}

inline void inject_clutter(IsarImage& img, const ClutterParams& p, const RadarParams& radar,
                           std::uint64_t image_key = 0) {
  const auto field = make_clutter_field(p, radar, img.range_axis, img.doppler_axis, image_key);
  inject_clutter(img, field, p, image_key);
}

/// Fit P(0) / P(f) - 1 = |f / width|^s over the non-zero Doppler bins of an
/// averaged profile (log-log least squares). Works when the width lies beyond
/// the unambiguous Doppler span.
inline DopplerShape measure_doppler_shape(const std::vector<double>& doppler_axis, const std::vector<double>& profile) {
  std::size_t dc = 0;
  for (std::size_t i = 0; i < doppler_axis.size(); ++i)
    if (std::abs(doppler_axis[i]) < std::abs(doppler_axis[dc])) dc = i;
  const double p0 = profile.at(dc);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < doppler_axis.size(); ++i) {
    if (i == dc || !(profile[i] > 0.0)) continue;
    const double y = p0 / profile[i] - 1.0;
    if (!(y > 0.0)) continue;
    const double lx = std::log(std::abs(doppler_axis[i])), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw ValidationError("not enough Doppler bins to fit the clutter spectrum");
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / dn;
  return {slope, std::exp(-icpt / slope)};
}

}  // namespace isarforge
