#pragma once

// Echo synthesis: facet RCS, range equation, dechirped phase history and
// receiver noise, producing one slow-time x fast-time cube per CPI.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "isarforge/core.hpp"
#include "isarforge/fft.hpp"
#include "isarforge/kinematics.hpp"
#include "isarforge/mesh.hpp"
#include "isarforge/radar.hpp"

namespace isarforge {

// ---------------------------------------------------------------------------
// Scattering model
// ---------------------------------------------------------------------------

/// Angle between the line of sight and the facet normal, folded to [0, pi/2].
inline double aspect_angle(const Vec3& normal, const Vec3& centroid, const Vec3& radar) {
  const Vec3 d = centroid - radar;
  const double r = d.norm();
  if (r < 1e-6) throw ValidationError("facet centroid coincides with the radar");
  const double c = std::min(1.0, std::abs(dot(d, normal)) / r);
  return std::acos(c);
}

inline constexpr double kSincSeriesThreshold = 1e-4;

/// sin^4(u)/u^4, with its Taylor series near zero.
inline double sinc4(double u) {
  if (std::abs(u) < kSincSeriesThreshold) {
    const double u2 = u * u;
    return 1.0 - (2.0 / 3.0) * u2 + 0.2 * u2 * u2;
  }
  const double s = std::sin(u) / u;
  const double s2 = s * s;
  return s2 * s2;
}

/// Flat triangular plate RCS (m^2).
inline double facet_rcs(double area, double long_dim, double aspect, double wavelength, int visible = 1) {
  if (!visible) return 0.0;
  const double c = std::cos(aspect);
  const double u = kTwoPi / wavelength * long_dim * std::sin(aspect);
  return 4.0 * kPi * area * area * c * c / (wavelength * wavelength) * sinc4(u);
}

/// Received amplitude (sqrt W) from the radar range equation.
inline double amplitude(double p_tx_w, double g_tx, double g_rx, double rcs, double wavelength, double range) {
  if (!(range > 0.0)) throw ValidationError("range must be positive");
  const double fp = 4.0 * kPi;
  return std::sqrt(p_tx_w * g_tx * g_rx * rcs * wavelength * wavelength / (fp * fp * fp)) / (range * range);
}

/// Range at which a target of the given RCS returns `received_w`.
inline double range_for_received_power(double p_tx_w, double g_tx, double g_rx, double rcs,
                                       double wavelength, double received_w) {
  const double fp = 4.0 * kPi;
  return std::pow(p_tx_w * g_tx * g_rx * rcs * wavelength * wavelength / (fp * fp * fp * received_w), 0.25);
}

/// Per-facet Bernoulli(0.5) visibility for one CPI.
inline std::vector<std::uint8_t> visibility_mask(std::size_t num_facets, std::size_t cpi_index,
                                                 std::uint64_t seed) {
  auto rng = make_stream(seed, StreamDomain::kVisibility, cpi_index);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> mask(num_facets);
  for (auto& m : mask) m = coin(rng) ? 1 : 0;
  return mask;
}

// ---------------------------------------------------------------------------
// Fast-time accumulation
// ---------------------------------------------------------------------------

/// One scatterer's contribution to a fast-time row:
/// amp * exp(j (phase + rate * n)), n = 0..N-1.
struct Tone {
  double amp = 0.0;
  double phase = 0.0;
  double rate = 0.0;  ///< rad/sample
};

/// Dechirped tone of a scatterer at residual range dr. Phase is referenced to
/// the middle of the sweep, so range walk over a CPI does not bias Doppler.
inline Tone echo_tone(const RadarParams& p, double amp, double slow_phase, double dr) {
  const double rate = p.fast_phase_rate(dr);
  return {amp, slow_phase - rate * 0.5 * static_cast<double>(p.num_samples() - 1), rate};
}

enum class FastTimeMethod {
  kDirect,   ///< literal per-sample sum
  kGridded,  ///< Gaussian gridding onto a 2x oversampled grid plus one FFT per row
};

/// Evaluates rows of tone sums. kGridded matches kDirect to ~1e-11 relative.
class ToneAccumulator {
 public:
  static constexpr int kOversample = 2;
  static constexpr int kSpread = 12;  ///< half-width of the Gaussian in grid cells

  ToneAccumulator(std::size_t n, FastTimeMethod method) : n_(n), method_(method) {
    if (method_ != FastTimeMethod::kGridded) return;
    grid_size_ = kOversample * n_;
    const double nn = static_cast<double>(n_);
    tau_ = kSpread * kPi / (nn * nn * kOversample * (kOversample - 0.5));
    h_ = kTwoPi / static_cast<double>(grid_size_);
    e3_.resize(2 * kSpread);
    for (int l = -kSpread + 1; l <= kSpread; ++l)
      e3_[l + kSpread - 1] = std::exp(-(l * h_) * (l * h_) / (4.0 * tau_));
    offset_ = static_cast<long>(n_ / 2);
    deconv_.resize(n_);
    for (std::size_t n2 = 0; n2 < n_; ++n2) {
      const double k = static_cast<double>(static_cast<long>(n2) - offset_);
      deconv_[n2] = std::sqrt(kPi / tau_) * std::exp(k * k * tau_) / static_cast<double>(grid_size_);
    }
    grid_.resize(grid_size_);
    re_.resize(grid_size_ + 2 * kSpread);
    im_.resize(grid_size_ + 2 * kSpread);
  }

  std::size_t size() const { return n_; }

  /// out[n] += sum over tones. `out` must hold N values.
  void accumulate(std::span<const Tone> tones, cdouble* out) {
    if (method_ == FastTimeMethod::kDirect) {
      for (const auto& t : tones)
        for (std::size_t n = 0; n < n_; ++n)
          out[n] += std::polar(t.amp, t.phase + t.rate * static_cast<double>(n));
      return;
    }
    // Spread onto a padded real/imag grid so the inner loops stay contiguous;
    // the padding is folded back periodically afterwards.
    std::fill(re_.begin(), re_.end(), 0.0);
    std::fill(im_.begin(), im_.end(), 0.0);
    const double inv4tau = 1.0 / (4.0 * tau_);
    const auto m = static_cast<long>(grid_size_);
    constexpr int kTaps = 2 * kSpread;
    double w[kTaps];
    for (const auto& t : tones) {
      if (t.amp == 0.0) continue;
      // Fold the rate to [0, 2pi); integer sample indices make this exact.
      double x = t.rate - kTwoPi * std::floor(t.rate / kTwoPi);
      if (x >= kTwoPi) x -= kTwoPi;
      const double arg = t.phase + static_cast<double>(offset_) * x;
      const double cr = t.amp * std::cos(arg), ci = t.amp * std::sin(arg);
      long j0 = static_cast<long>(x / h_);
      if (j0 >= m) j0 = m - 1;
      const double dx = x - static_cast<double>(j0) * h_;
      const double e1 = std::exp(-dx * dx * inv4tau);
      const double e2 = std::exp(dx * h_ * 2.0 * inv4tau);
      double up = e1, down = e1;
      w[kSpread - 1] = e1 * e3_[kSpread - 1];
      for (int l = 1; l <= kSpread; ++l) {
        up *= e2;
        w[kSpread - 1 + l] = up * e3_[kSpread - 1 + l];
      }
      const double inv_e2 = 1.0 / e2;
      for (int l = 1; l < kSpread; ++l) {
        down *= inv_e2;
        w[kSpread - 1 - l] = down * e3_[kSpread - 1 - l];
      }
      // Taps cover grid cells j0 - kSpread + 1 .. j0 + kSpread; padded index adds kSpread.
      double* pr = re_.data() + (j0 + 1);
      double* pi = im_.data() + (j0 + 1);
      for (int l = 0; l < kTaps; ++l) {
        pr[l] += cr * w[l];
        pi[l] += ci * w[l];
      }
    }
    for (std::size_t j = 0; j < grid_size_; ++j) grid_[j] = cdouble(re_[j + kSpread], im_[j + kSpread]);
    for (int l = 0; l < kSpread; ++l) {
      grid_[grid_size_ - kSpread + l] += cdouble(re_[l], im_[l]);
      grid_[l] += cdouble(re_[grid_size_ + kSpread + l], im_[grid_size_ + kSpread + l]);
    }
    fft_inplace(grid_, FftSign::kBackward);
    for (std::size_t n2 = 0; n2 < n_; ++n2) {
      long k = static_cast<long>(n2) - offset_;
      if (k < 0) k += m;
      out[n2] += grid_[static_cast<std::size_t>(k)] * deconv_[n2];
    }
  }

 private:
  std::size_t n_;
  FastTimeMethod method_;
  std::size_t grid_size_ = 0;
  double tau_ = 0.0;
  double h_ = 0.0;
  long offset_ = 0;
  std::vector<double> e3_;
  std::vector<double> deconv_;
  std::vector<cdouble> grid_;
  std::vector<double> re_, im_;
};

// ---------------------------------------------------------------------------
// Cubes
// ---------------------------------------------------------------------------

struct RawDataCube {
  CMatrix data;  ///< M (slow time) x N (fast time)
  double crp_m = 0.0;
  double t0_s = 0.0;
  std::size_t cpi_index = 0;
  bool center_doppler_removed = true;
  std::size_t alias_excluded = 0;  ///< facet-pulse pairs dropped by the range guard
  std::size_t beam_excluded = 0;   ///< facet-pulse pairs outside the beam
  std::size_t contributions = 0;
  std::vector<std::string> warnings;
  RadarParams params;
};

struct SynthesisOptions {
  FastTimeMethod method = FastTimeMethod::kGridded;
  bool motion_compensation = true;
  bool random_visibility = true;
  unsigned threads = 1;
};

/// Start time of CPI p (1-based).
inline double cpi_start_time(const RadarParams& p, std::size_t cpi_index) {
  if (cpi_index < 1) throw ConfigError("CPI indices start at 1");
  return static_cast<double>(cpi_index - 1) * p.cpi_s;
}

/// Number of whole CPIs covered by an animation of the given duration.
inline std::size_t cpi_count(const RadarParams& p, double duration) {
  const double span = p.cpi_duration();
  std::size_t n = 0;
  while (static_cast<double>(n) * p.cpi_s + span <= duration + 1e-9) ++n;
  return n;
}

namespace detail {

/// Runs body(m) for m in [0, count), split into contiguous blocks across threads.
template <typename F>
void parallel_rows(std::size_t count, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    body(0, count);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t a = t * chunk, b = std::min(count, a + chunk);
    if (a >= b) break;
    pool.emplace_back([&body, a, b] { body(a, b); });
  }
}

inline void check_cpi_span(const RadarParams& p, double t0, double duration) {
  const double t_end = t0 + static_cast<double>(p.num_pri() - 1) * p.pri_s;
  if (t_end > duration + 1e-9)
    throw ValidationError("CPI extends past the end of the animation (" + std::to_string(t_end) +
                          " s > " + std::to_string(duration) + " s)");
}

}  // namespace detail

/// Complex white Gaussian noise with E|v|^2 = power, from a stream keyed by
/// (seed, cpi, salt).
inline void add_noise(CMatrix& data, double power, std::uint64_t seed, std::size_t cpi_index,
                      std::uint64_t salt = 0) {
  if (power <= 0.0) return;
  auto rng = make_stream(seed, StreamDomain::kNoise, cpi_index, salt);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * power));
  for (auto& v : data.data) {
    const double re = g(rng);
    const double im = g(rng);
    v += cdouble(re, im);
  }
}

/// Synthesise the cube for CPI `cpi_index` (1-based) of an animated mesh.
/// Range and Doppler of the vehicle center are removed unless motion
/// compensation is disabled, in which case the residual is taken against the
/// mean center range. Noise is added when params.snr_db is set.
inline RawDataCube synthesize_cpi(const FrameSet& frames, const RadarParams& params, std::size_t cpi_index,
                                  const SynthesisOptions& opts = {}) {
  params.validate();
  const FacetMesh& mesh = frames.mesh();
  const std::size_t M = params.num_pri(), N = params.num_samples(), B = mesh.size();
  const double t0 = cpi_start_time(params, cpi_index);
  detail::check_cpi_span(params, t0, frames.duration());

  RawDataCube cube;
  cube.data = CMatrix(M, N);
  cube.t0_s = t0;
  cube.cpi_index = cpi_index;
  cube.center_doppler_removed = opts.motion_compensation;
  cube.params = params;

  // Per-facet constants in the body frame. Group 0 is the chassis, group w+1 wheel w.
  std::vector<Vec3> off(B), nrm(B);
  std::vector<std::uint32_t> group(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& f = mesh.facets[b];
    nrm[b] = f.normal;
    off[b] = mesh.offsets[b];
    group[b] = 0;
    if (f.part.is_wheel()) {
      for (std::size_t w = 0; w < mesh.wheels.size(); ++w) {
        if (mesh.wheels[w].wheel_id != f.part.wheel_id) continue;
        group[b] = static_cast<std::uint32_t>(w + 1);
        off[b] = off[b] - (mesh.wheels[w].center - mesh.center);
      }
    }
  }
  std::vector<std::uint8_t> vis = opts.random_visibility ? visibility_mask(B, cpi_index, params.seed)
                                                         : std::vector<std::uint8_t>(B, 1);
  std::vector<std::uint32_t> active;
  for (std::size_t b = 0; b < B; ++b)
    if (vis[b]) active.push_back(static_cast<std::uint32_t>(b));

  // Center range at every pulse; CRP is its mean.
  std::vector<Pose> poses(M);
  std::vector<double> center_range(M);
  double crp = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    poses[m] = frames.pose_at(t0 + static_cast<double>(m) * params.pri_s);
    center_range[m] = distance(poses[m].center, params.radar_pos);
    crp += center_range[m];
  }
  crp /= static_cast<double>(M);
  cube.crp_m = crp;

  const double lambda = params.wavelength();
  const double k_wave = kTwoPi / lambda;
  // sqrt of the range equation with the plate RCS folded in.
  const double amp_scale = std::sqrt(params.tx_power_w() * params.tx_gain() * params.rx_gain()) / (4.0 * kPi);
  const double half_span = 0.5 * params.range_span_m;
  const double bore = deg_to_rad(params.boresight_deg);
  const Vec3 bore_dir{std::cos(bore), std::sin(bore), 0.0};
  const double half_bw = 0.5 * params.beamwidth_rad();
  const double cos_half_bw = std::cos(half_bw);
  const bool full_beam = half_bw >= kPi;
  const double slow_k = 4.0 * kPi / lambda;

  auto place = [&](const Pose& pose, std::vector<Mat3>& rot, std::vector<Vec3>& org) {
    const Mat3 rz = Mat3::rot_z(pose.yaw - mesh.native_heading);
    rot.assign(mesh.wheels.size() + 1, rz);
    org.assign(mesh.wheels.size() + 1, pose.center);
    for (std::size_t w = 0; w < mesh.wheels.size(); ++w) {
      rot[w + 1] = rz * Mat3::rot_y(pose.wheel_angle[w]);
      org[w + 1] = pose.center + rz * (mesh.wheels[w].center - mesh.center);
    }
  };

  // Residual range of every facet at the first pulse sets its phase reference.
  std::vector<double> ref(B, 0.0);
  {
    std::vector<Mat3> rot;
    std::vector<Vec3> org;
    place(poses[0], rot, org);
    const double rc = opts.motion_compensation ? center_range[0] : crp;
    for (auto b : active) {
      const Vec3 p = org[group[b]] + rot[group[b]] * off[b];
      ref[b] = distance(p, params.radar_pos) - rc;
    }
  }

  std::vector<std::size_t> alias_count(M, 0), beam_count(M, 0), used(M, 0);
  detail::parallel_rows(M, opts.threads, [&](std::size_t m_begin, std::size_t m_end) {
    ToneAccumulator acc(N, opts.method);
    std::vector<Tone> tones;
    tones.reserve(active.size());
    std::vector<Mat3> rot;
    std::vector<Vec3> org;
    for (std::size_t m = m_begin; m < m_end; ++m) {
      place(poses[m], rot, org);
      const double rc = opts.motion_compensation ? center_range[m] : crp;
      tones.clear();
      for (auto b : active) {
        const std::uint32_t g = group[b];
        const Vec3 p = org[g] + rot[g] * off[b];
        const Vec3 n = rot[g] * nrm[b];
        const Vec3 d = p - params.radar_pos;
        const double r = d.norm();
        if (!full_beam) {
          const double hx = d.x, hy = d.y;
          const double hn = std::sqrt(hx * hx + hy * hy);
          if (hn > 0.0 && (hx * bore_dir.x + hy * bore_dir.y) < cos_half_bw * hn) {
            ++beam_count[m];
            continue;
          }
        }
        const double dr = r - rc;
        if (std::abs(dr) > half_span) {
          ++alias_count[m];
          continue;
        }
        const auto& f = mesh.facets[b];
        const double c = std::min(1.0, std::abs(dot(d, n)) / r);
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        const double u = k_wave * f.longest_edge * s;
        double sinc2;
        if (std::abs(u) < kSincSeriesThreshold) {
          sinc2 = std::sqrt(sinc4(u));
        } else {
          const double q = std::sin(u) / u;
          sinc2 = q * q;
        }
        const double a = amp_scale * f.area * c * sinc2 / (r * r);
        tones.push_back(echo_tone(params, a, -slow_k * (dr - ref[b]), dr));
      }
      used[m] = tones.size();
      acc.accumulate(tones, cube.data.row(m));
    }
  });
  for (std::size_t m = 0; m < M; ++m) {
    cube.alias_excluded += alias_count[m];
    cube.beam_excluded += beam_count[m];
    cube.contributions += used[m];
  }
  if (cube.contributions == 0 && !active.empty())
    cube.warnings.push_back("empty scene: every facet was outside the beam or the range span");
  add_noise(cube.data, params.noise_power_w(), params.seed, cpi_index);
  return cube;
}

// ---------------------------------------------------------------------------
// Point scatterers
// ---------------------------------------------------------------------------

/// A point with constant amplitude moving at constant velocity.
struct PointScatterer {
  Vec3 position;  ///< at the start of the CPI
  Vec3 velocity;
  double amp = 1.0;  ///< sqrt W
};

/// Cube for a set of point scatterers, compensated against a reference point
/// moving at constant velocity (its mean range is the CRP).
inline RawDataCube synthesize_points(std::span<const PointScatterer> points, const Vec3& reference,
                                     const Vec3& reference_velocity, const RadarParams& params,
                                     std::size_t cpi_index = 1, FastTimeMethod method = FastTimeMethod::kGridded) {
  params.validate();
  const std::size_t M = params.num_pri(), N = params.num_samples();
  RawDataCube cube;
  cube.data = CMatrix(M, N);
  cube.cpi_index = cpi_index;
  cube.params = params;
  std::vector<double> rc(M);
  double crp = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double t = static_cast<double>(m) * params.pri_s;
    rc[m] = distance(reference + reference_velocity * t, params.radar_pos);
    crp += rc[m];
  }
  cube.crp_m = crp / static_cast<double>(M);
  const double slow_k = 4.0 * kPi / params.wavelength();
  std::vector<double> ref(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) ref[i] = distance(points[i].position, params.radar_pos) - rc[0];
  ToneAccumulator acc(N, method);
  std::vector<Tone> tones;
  for (std::size_t m = 0; m < M; ++m) {
    const double t = static_cast<double>(m) * params.pri_s;
    tones.clear();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double dr = distance(points[i].position + points[i].velocity * t, params.radar_pos) - rc[m];
      if (std::abs(dr) > 0.5 * params.range_span_m) {
        ++cube.alias_excluded;
        continue;
      }
      tones.push_back(echo_tone(params, points[i].amp, -slow_k * (dr - ref[i]), dr));
    }
    cube.contributions += tones.size();
    acc.accumulate(tones, cube.data.row(m));
  }
  add_noise(cube.data, params.noise_power_w(), params.seed, cpi_index);
  return cube;
}

/// Slow-time phase history exp(-j 4 pi R(t) / lambda) of a body point carried
/// by the animation, sampled at `count` pulses from t0. The point is given in
/// the body frame relative to the mesh center; with `wheel` set it spins with
/// that wheel. With `compensate` the vehicle center range is subtracted.
inline std::vector<cdouble> probe_slow_time(const FrameSet& frames, const RadarParams& params, const Vec3& offset,
                                            std::optional<std::size_t> wheel, double t0, std::size_t count,
                                            bool compensate = false) {
  std::vector<cdouble> out(count);
  const double k = 4.0 * kPi / params.wavelength();
  for (std::size_t m = 0; m < count; ++m) {
    const Pose pose = frames.pose_at(t0 + static_cast<double>(m) * params.pri_s);
    const PoseTransform tr(frames.mesh(), pose);
    double r = distance(tr.place(offset, wheel), params.radar_pos);
    if (compensate) r -= distance(pose.center, params.radar_pos);
    out[m] = std::polar(1.0, -k * r);
  }
  return out;
}

}  // namespace isarforge
