#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "isarforge/core.hpp"

namespace isarforge {

/// Received power used as the 0 dB point of the SNR ladder (-80 dBm).
inline constexpr double kReferenceSignalW = 1e-11;

/// FMCW radar and sampling configuration. The fast-time sample rate is derived
/// from the range span, F_s = 2 R_span K / c.
struct RadarParams {
  double fc_hz = 77e9;
  double chirp_rate_hzps = 60e12;
  double pri_s = 1.0 / 12000.0;
  double cpi_s = 0.1;
  double range_span_m = 20.0;
  double tx_power_dbm = 25.0;
  double tx_gain_db = 0.0;
  double rx_gain_db = 0.0;
  double beamwidth_deg = 120.0;
  double boresight_deg = 90.0;  ///< azimuth of the beam axis, CCW from +x (90 = +y)
  Vec3 radar_pos{0.0, 0.0, 0.5};
  std::optional<double> snr_db;  ///< unset: no receiver noise
  std::uint64_t seed = 1;
  double dechirp_phase_factor = 2.0 * kPi;

  double wavelength() const { return kSpeedOfLight / fc_hz; }
  double tx_power_w() const { return dbm_to_watts(tx_power_dbm); }
  double tx_gain() const { return db_to_linear(tx_gain_db); }
  double rx_gain() const { return db_to_linear(rx_gain_db); }
  double beamwidth_rad() const { return deg_to_rad(beamwidth_deg); }

  double fast_sample_rate() const { return 2.0 * range_span_m * chirp_rate_hzps / kSpeedOfLight; }
  double sample_interval() const { return 1.0 / fast_sample_rate(); }
  std::size_t num_pri() const { return static_cast<std::size_t>(std::llround(cpi_s / pri_s)); }
  std::size_t num_samples() const {
    return static_cast<std::size_t>(std::llround(fast_sample_rate() * pri_s));
  }
  /// Slow-time length actually covered by the M pulses.
  double cpi_duration() const { return static_cast<double>(num_pri()) * pri_s; }

  /// Fast-time phase advance per sample for a residual range dr (rad/sample).
  double fast_phase_rate(double dr) const {
    return dechirp_phase_factor * chirp_rate_hzps * sample_interval() * 2.0 * dr / kSpeedOfLight;
  }
  /// Range-axis spacing of the formed image (m per bin).
  double range_bin_m() const {
    return kTwoPi * kSpeedOfLight /
           (2.0 * dechirp_phase_factor * chirp_rate_hzps * sample_interval() *
            static_cast<double>(num_samples()));
  }
  /// Fractional range-axis offset (bins from the CRP bin) of a residual range.
  double range_bin_offset(double dr) const { return dr / range_bin_m(); }
  double doppler_bin_hz() const { return 1.0 / cpi_duration(); }

  /// Per-sample complex noise power for the configured SNR (0 when unset).
  double noise_power_w() const { return snr_db ? kReferenceSignalW / db_to_linear(*snr_db) : 0.0; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(fc_hz, "fc_hz");
    positive(chirp_rate_hzps, "chirp_rate_hzps");
    positive(pri_s, "pri_s");
    positive(cpi_s, "cpi_s");
    positive(range_span_m, "range_span_m");
    positive(dechirp_phase_factor, "dechirp_phase_factor");
    if (!(beamwidth_deg >= 0.0 && beamwidth_deg <= 360.0))
      throw ConfigError("beamwidth_deg must be within [0, 360]");
    if (num_pri() < 2) throw ConfigError("cpi_s / pri_s must give at least 2 pulses");
    if (num_samples() < 2) throw ConfigError("range span too small: fewer than 2 fast-time samples");
  }
};

namespace detail {
inline double parse_phase_factor(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>() * kPi;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "2pi") return 2.0 * kPi;
    if (s == "4pi") return 4.0 * kPi;
  }
  throw ConfigError("dechirp_phase_factor must be \"2pi\", \"4pi\" or a multiple of pi");
}
}  // namespace detail

/// Missing keys keep their defaults; unknown keys are rejected.
inline RadarParams radar_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("radar parameters must be a JSON object");
  RadarParams p;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "fc_hz") p.fc_hz = v.get<double>();
      else if (key == "chirp_rate_hzps") p.chirp_rate_hzps = v.get<double>();
      else if (key == "pri_s") p.pri_s = v.get<double>();
      else if (key == "cpi_s") p.cpi_s = v.get<double>();
      else if (key == "range_span_m") p.range_span_m = v.get<double>();
      else if (key == "tx_power_dbm") p.tx_power_dbm = v.get<double>();
      else if (key == "tx_gain_db") p.tx_gain_db = v.get<double>();
      else if (key == "rx_gain_db") p.rx_gain_db = v.get<double>();
      else if (key == "beamwidth_deg") p.beamwidth_deg = v.get<double>();
      else if (key == "boresight_deg") p.boresight_deg = v.get<double>();
      else if (key == "radar_pos_m") {
        if (!v.is_array() || v.size() != 3) throw ConfigError("radar_pos_m must be [x, y, z]");
        p.radar_pos = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
      } else if (key == "snr_db") {
        if (v.is_null()) p.snr_db.reset();
        else p.snr_db = v.get<double>();
      } else if (key == "seed") p.seed = v.get<std::uint64_t>();
      else if (key == "dechirp_phase_factor") p.dechirp_phase_factor = detail::parse_phase_factor(v);
      else throw ConfigError("unknown radar key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("radar parameters: ") + e.what());
  }
  p.validate();
  return p;
}

inline nlohmann::json radar_params_to_json(const RadarParams& p) {
  nlohmann::json j{{"fc_hz", p.fc_hz},
                   {"chirp_rate_hzps", p.chirp_rate_hzps},
                   {"pri_s", p.pri_s},
                   {"cpi_s", p.cpi_s},
                   {"range_span_m", p.range_span_m},
                   {"tx_power_dbm", p.tx_power_dbm},
                   {"tx_gain_db", p.tx_gain_db},
                   {"rx_gain_db", p.rx_gain_db},
                   {"beamwidth_deg", p.beamwidth_deg},
                   {"boresight_deg", p.boresight_deg},
                   {"radar_pos_m", {p.radar_pos.x, p.radar_pos.y, p.radar_pos.z}},
                   {"seed", p.seed},
                   {"dechirp_phase_factor", p.dechirp_phase_factor / kPi}};
  j["snr_db"] = p.snr_db ? nlohmann::json(*p.snr_db) : nlohmann::json(nullptr);
  return j;
}

}  // namespace isarforge
