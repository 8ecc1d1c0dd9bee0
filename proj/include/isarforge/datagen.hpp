#pragma once

// Dataset generation: for every (target, route) animate once, synthesise one
// cube per kept CPI and emit the ideal image plus one image per SNR and wind
// setting. Layout <out>/<target>/<route>/<corruption>/<cpi>.{png,f32} with a
// JSON-lines manifest (header, one line per image, footer) at the root.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "isarforge/clutter.hpp"
#include "isarforge/config.hpp"
#include "isarforge/core.hpp"
#include "isarforge/echo.hpp"
#include "isarforge/image_io.hpp"
#include "isarforge/imaging.hpp"
#include "isarforge/kinematics.hpp"

namespace isarforge {

inline constexpr const char* kGeneratorName = "isar-forge";
inline constexpr const char* kGeneratorVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.jsonl";

class GenerationError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Plan
// ---------------------------------------------------------------------------

struct Corruption {
  std::string kind = "ideal";  ///< ideal | noise | clutter
  std::optional<double> snr_db;
  std::optional<double> wind_mps;
  std::size_t ladder_index = 0;

  /// Directory name, e.g. "ideal", "snr_-5", "wind_2.5".
  std::string tag() const {
    auto num = [](double v) {
      std::ostringstream os;
      os << v;
      return os.str();
    };
    if (kind == "noise") return "snr_" + num(*snr_db);
    if (kind == "clutter") return "wind_" + num(*wind_mps);
    return "ideal";
  }
};

inline std::vector<Corruption> corruption_list(const DatasetConfig& cfg) {
  std::vector<Corruption> out{Corruption{}};
  for (std::size_t i = 0; i < cfg.snr_ladder_db.size(); ++i) out.push_back({"noise", cfg.snr_ladder_db[i], {}, i});
  for (std::size_t i = 0; i < cfg.wind_ladder_mps.size(); ++i)
    out.push_back({"clutter", {}, cfg.wind_ladder_mps[i], i});
  return out;
}

struct TrajectoryJob {
  std::size_t target = 0;  ///< index into the config targets
  std::string target_label;
  Route route;
  std::uint64_t seed = 0;
  std::size_t cpi_budget = 0;     ///< whole CPIs in the animation
  std::vector<std::size_t> cpis;  ///< kept CPI indices (1-based)
  std::shared_ptr<const FrameSet> frames;
  YawTrack yaw;
};

struct GenerationPlan {
  DatasetConfig config;
  std::string config_hash;
  std::vector<std::shared_ptr<const FacetMesh>> meshes;
  std::vector<TrajectoryJob> trajectories;
  std::vector<Corruption> corruptions;

  std::size_t ideal_count() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += t.cpis.size();
    return n;
  }
  std::size_t noisy_count() const { return ideal_count() * config.snr_ladder_db.size(); }
  std::size_t cluttered_count() const { return ideal_count() * config.wind_ladder_mps.size(); }
  std::size_t image_count() const { return ideal_count() * corruptions.size(); }
};

inline std::uint64_t trajectory_seed(std::uint64_t seed, const std::string& target, const Route& route) {
  return splitmix64(seed ^ fnv1a64(target + "/" + route_name(route)));
}

/// True when the vehicle center stays inside the azimuth beam over the CPI.
inline bool cpi_in_beam(const FrameSet& frames, const RadarParams& p, std::size_t cpi) {
  const double half_bw = 0.5 * p.beamwidth_rad();
  if (half_bw >= kPi) return true;
  const double bore = deg_to_rad(p.boresight_deg);
  const double t0 = cpi_start_time(p, cpi);
  for (double t : {t0, t0 + 0.5 * p.cpi_duration(), t0 + p.cpi_duration() - p.pri_s}) {
    const Vec3 c = frames.pose_at(t).center - p.radar_pos;
    const double az = std::atan2(c.y, c.x);
    if (std::abs(wrap_angle(az - bore)) > half_bw) return false;
  }
  return true;
}

inline std::vector<std::size_t> kept_cpis(const DatasetConfig& cfg, const FrameSet& frames, std::size_t budget) {
  std::vector<std::size_t> out;
  for (std::size_t p = cfg.drop_first_cpi ? 2 : 1; p <= budget; ++p) {
    if (cfg.trim_outside_beam && !cpi_in_beam(frames, cfg.radar, p)) continue;
    out.push_back(p);
  }
  if (cfg.max_cpis && out.size() > *cfg.max_cpis) out.resize(*cfg.max_cpis);
  return out;
}

inline GenerationPlan plan_generation(const DatasetConfig& cfg) {
  cfg.validate();
  GenerationPlan plan;
  plan.config = cfg;
  plan.config_hash = config_hash(cfg);
  plan.corruptions = corruption_list(cfg);
  for (const auto& t : cfg.targets) plan.meshes.push_back(std::make_shared<const FacetMesh>(load_target(t)));
  TrajectoryOptions topts;
  topts.junction = cfg.junction;
  for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
    for (const auto& route : cfg.routes) {
      TrajectoryJob job;
      job.target = ti;
      job.target_label = cfg.targets[ti].name;
      job.route = route;
      job.seed = trajectory_seed(cfg.seed, job.target_label, route);
      const auto traj = make_trajectory(route, cfg.speed_mps, cfg.duration_s, cfg.frame_dt_s, topts);
      job.frames = std::make_shared<const FrameSet>(animate(plan.meshes[ti], traj));
      job.cpi_budget = cpi_count(cfg.radar, job.frames->duration());
      job.cpis = kept_cpis(cfg, *job.frames, job.cpi_budget);
      job.yaw = make_yaw_track(*job.frames, cfg.radar, job.cpi_budget);
      plan.trajectories.push_back(std::move(job));
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Manifest entries
// ---------------------------------------------------------------------------

inline std::string cpi_stem(std::size_t cpi) {
  std::ostringstream os;
  os << std::setw(3) << std::setfill('0') << cpi;
  return os.str();
}

inline std::string image_id(const std::string& target, const Route& route, const Corruption& c, std::size_t cpi) {
  return target + "/" + route_name(route) + "/" + c.tag() + "/" + cpi_stem(cpi);
}

inline bool writes_f32(const OutputOptions& o, const Corruption& c) {
  return o.f32 == F32Output::kAll || (o.f32 == F32Output::kIdeal && c.kind == "ideal");
}

inline nlohmann::json manifest_entry(const std::string& id, const IsarImage& img, const std::string& png,
                                     const std::optional<std::string>& f32) {
  auto range_pair = [](const std::vector<double>& a) {
    return a.empty() ? nlohmann::json(nullptr) : nlohmann::json{a.front(), a.back()};
  };
  nlohmann::json e = label_to_json(img.label);
  e["type"] = "image";
  e["image_id"] = id;
  e["files"] = {{"png", png}, {"f32", f32 ? nlohmann::json(*f32) : nlohmann::json(nullptr)}};
  e["crp_m"] = img.crp_m;
  e["omega_radps"] = img.omega ? nlohmann::json(*img.omega) : nlohmann::json(nullptr);
  e["axes"] = {{"rows", img.rows},
               {"cols", img.cols},
               {"range_m", range_pair(img.range_axis)},
               {"doppler_hz", range_pair(img.doppler_axis)},
               {"crossrange_m", range_pair(img.crossrange_axis)}};
  e["dynamic_range_dbm"] = {img.dynamic_range->floor_dbm, img.dynamic_range->ceil_dbm};
  return e;
}

// ---------------------------------------------------------------------------
// Per-CPI work
// ---------------------------------------------------------------------------

struct UnitResult {
  std::vector<nlohmann::json> entries;
};

/// Images of one CPI: ideal, then noise and clutter variants derived from the
/// same cube. Returned images are clamped to their display windows.
inline std::vector<IsarImage> render_cpi(const GenerationPlan& plan, const TrajectoryJob& job, std::size_t cpi) {
  const auto& cfg = plan.config;
  RadarParams radar = cfg.radar;
  radar.snr_db.reset();
  radar.seed = job.seed;
  const RawDataCube cube = synthesize_cpi(*job.frames, radar, cpi);

  const auto omega = estimate_omega(job.yaw, cpi, radar.cpi_s);
  auto finish = [&](IsarImage& img, const Corruption& c) {
    img.label.target = job.target_label;
    img.label.route = route_name(job.route);
    img.label.cpi_index = cpi;
    img.label.corruption = c.kind;
    img.label.snr_db = c.snr_db;
    img.label.wind_mps = c.wind_mps;
    img.label.seed = job.seed;
    if (omega) doppler_to_crossrange(img, *omega, cfg.omega_min);
  };

  std::vector<IsarImage> out;
  out.reserve(plan.corruptions.size());
  IsarImage ideal = form_image(cube, cfg.window);
  for (const auto& c : plan.corruptions) {
    if (c.kind == "ideal") {
      IsarImage img = ideal;
      finish(img, c);
      clamp_dynamic_range(img, kIdealRange);
      out.push_back(std::move(img));
    } else if (c.kind == "noise") {
      RadarParams noisy = radar;
      noisy.snr_db = c.snr_db;
      IsarImage img;
      if (cfg.window == Window::kNone) {
        img = ideal;
        add_image_noise(img, noisy.noise_power_w(), job.seed, cpi, c.ladder_index + 1);
      } else {
        CMatrix data = cube.data;
        add_noise(data, noisy.noise_power_w(), job.seed, cpi, c.ladder_index + 1);
        img = form_image(data, radar, cube.crp_m, cfg.window);
      }
      finish(img, c);
      clamp_dynamic_range(img, kNoisyRange);
      out.push_back(std::move(img));
    } else {
      IsarImage img = ideal;
      const auto cp = clutter_params_for(radar, *c.wind_mps, job.seed, cfg.sigma0_mean_db);
      inject_clutter(img, cp, radar, cpi * 64 + c.ladder_index);
      finish(img, c);
      clamp_dynamic_range(img, kClutteredRange);
      out.push_back(std::move(img));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GenerationOptions {
  unsigned jobs = 1;
  bool resume = false;
  std::function<void(const std::string&)> log;  ///< progress messages (optional)
};

struct GenerationSummary {
  std::size_t images = 0;
  std::size_t generated = 0;  ///< written in this run
  std::size_t reused = 0;     ///< kept from an earlier run (resume)
  bool complete = false;
  std::filesystem::path manifest;
};

namespace detail {

struct ExistingManifest {
  std::map<std::string, nlohmann::json> entries;
  std::string config_hash;
};

inline ExistingManifest read_existing_manifest(const std::filesystem::path& path) {
  ExistingManifest m;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      continue;  // torn last line after a crash
    }
    const auto type = j.value("type", std::string{});
    if (type == "header") m.config_hash = j.value("config_hash", std::string{});
    else if (type == "image") m.entries[j.value("image_id", std::string{})] = j;
  }
  return m;
}

inline bool entry_files_exist(const std::filesystem::path& root, const nlohmann::json& e) {
  const auto& f = e.at("files");
  if (!f.at("png").is_string() || !std::filesystem::exists(root / f["png"].get<std::string>())) return false;
  if (f.at("f32").is_string() && !std::filesystem::exists(root / f["f32"].get<std::string>())) return false;
  return true;
}

}  // namespace detail

inline nlohmann::json manifest_header(const GenerationPlan& plan) {
  nlohmann::json trajectories = nlohmann::json::array();
  for (const auto& t : plan.trajectories)
    trajectories.push_back({{"target_label", t.target_label},
                            {"route", route_name(t.route)},
                            {"seed", t.seed},
                            {"cpi_budget", t.cpi_budget},
                            {"cpis", t.cpis}});
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& m : plan.meshes) targets.push_back({{"label", m->name}, {"facets", m->size()}});
  return {{"type", "header"},
          {"generator", kGeneratorName},
          {"version", kGeneratorVersion},
          {"config_hash", plan.config_hash},
          {"config", dataset_config_to_json(plan.config)},
          {"targets", targets},
          {"trajectories", trajectories},
          {"counts",
           {{"ideal", plan.ideal_count()}, {"noise", plan.noisy_count()}, {"clutter", plan.cluttered_count()}}}};
}

/// Write every image of one CPI and return their manifest entries in
/// corruption order.
inline UnitResult write_cpi(const GenerationPlan& plan, const TrajectoryJob& job, std::size_t cpi,
                            const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  UnitResult r;
  auto images = render_cpi(plan, job, cpi);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const auto& c = plan.corruptions[k];
    const fs::path rel = fs::path(job.target_label) / route_name(job.route) / c.tag();
    fs::create_directories(root / rel);
    const std::string stem = cpi_stem(cpi);
    const std::string png = (rel / (stem + ".png")).generic_string();
    write_png16(root / png, render_gray16(images[k]), plan.config.output.png_compression);
    std::optional<std::string> f32;
    if (writes_f32(plan.config.output, c)) {
      f32 = (rel / (stem + ".f32")).generic_string();
      write_f32(root / *f32, images[k]);
    }
    r.entries.push_back(manifest_entry(image_id(job.target_label, job.route, c, cpi), images[k], png, f32));
  }
  return r;
}

inline GenerationSummary run_generation(const GenerationPlan& plan, const std::filesystem::path& out_dir,
                                        const GenerationOptions& opts = {}) {
  namespace fs = std::filesystem;
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };
  fs::create_directories(out_dir);
  GenerationSummary summary;
  summary.manifest = out_dir / kManifestName;

  detail::ExistingManifest existing;
  if (opts.resume && fs::exists(summary.manifest)) {
    existing = detail::read_existing_manifest(summary.manifest);
    if (!existing.config_hash.empty() && existing.config_hash != plan.config_hash)
      throw ConfigError("cannot resume: " + summary.manifest.string() + " was written for config hash " +
                        existing.config_hash + ", current config hashes to " + plan.config_hash);
  }

  struct Unit {
    const TrajectoryJob* job;
    std::size_t cpi;
    std::vector<nlohmann::json> reused;  ///< complete set from an earlier run
  };
  std::vector<Unit> units;
  for (const auto& job : plan.trajectories)
    for (std::size_t cpi : job.cpis) {
      Unit u{&job, cpi, {}};
      for (const auto& c : plan.corruptions) {
        auto it = existing.entries.find(image_id(job.target_label, job.route, c, cpi));
        if (it == existing.entries.end() || !detail::entry_files_exist(out_dir, it->second)) {
          u.reused.clear();
          break;
        }
        u.reused.push_back(it->second);
      }
      units.push_back(std::move(u));
    }

  const fs::path tmp_manifest = out_dir / (std::string(kManifestName) + ".partial");
  std::ofstream mf(tmp_manifest, std::ios::trunc);
  if (!mf) throw GenerationError("cannot write " + tmp_manifest.string());
  mf << manifest_header(plan).dump() << '\n';

  auto finish_manifest = [&](bool complete, const std::string& error) {
    nlohmann::json footer{{"type", "footer"}, {"complete", complete}, {"images", summary.images}};
    if (!complete) {
      footer["incomplete"] = true;
      footer["error"] = error;
    }
    mf << footer.dump() << '\n';
    mf.flush();
    mf.close();
    std::error_code ec;
    fs::rename(tmp_manifest, summary.manifest, ec);
  };

  auto commit = [&](const std::vector<nlohmann::json>& entries) {
    for (const auto& e : entries) mf << e.dump() << '\n';
    mf.flush();
    if (!mf) throw GenerationError("manifest write failed (disk full?)");
    summary.images += entries.size();
  };

  const auto t_start = std::chrono::steady_clock::now();
  std::size_t done_units = 0;
  auto progress = [&](const Unit& u) {
    ++done_units;
    if (done_units == units.size() || done_units % 50 == 0) {
      const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      std::ostringstream os;
      os << done_units << "/" << units.size() << " CPIs (" << u.job->target_label << " "
         << route_name(u.job->route) << ") " << std::fixed << std::setprecision(1) << el << " s";
      log(os.str());
    }
  };

  try {
    const unsigned jobs = std::max(1u, opts.jobs);
    if (jobs == 1) {
      for (const auto& u : units) {
        if (!u.reused.empty()) {
          commit(u.reused);
          summary.reused += u.reused.size();
        } else {
          const auto r = write_cpi(plan, *u.job, u.cpi, out_dir);
          commit(r.entries);
          summary.generated += r.entries.size();
        }
        progress(u);
      }
    } else {
      // Workers render ahead of the single writer by at most 2 * jobs units.
      std::vector<std::optional<UnitResult>> results(units.size());
      std::mutex mu;
      std::condition_variable cv;
      std::size_t next = 0, committed = 0;
      bool stop = false;
      std::exception_ptr failure;
      const std::size_t ahead = 2 * static_cast<std::size_t>(jobs);
      auto worker = [&] {
        for (;;) {
          std::size_t i;
          {
            std::unique_lock lk(mu);
            cv.wait(lk, [&] { return stop || next >= units.size() || next < committed + ahead; });
            if (stop || next >= units.size()) return;
            i = next++;
          }
          UnitResult r;
          try {
            if (units[i].reused.empty()) r = write_cpi(plan, *units[i].job, units[i].cpi, out_dir);
          } catch (...) {
            std::lock_guard lk(mu);
            if (!failure) failure = std::current_exception();
            stop = true;
            cv.notify_all();
            return;
          }
          std::lock_guard lk(mu);
          results[i] = std::move(r);
          cv.notify_all();
        }
      };
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
      try {
        for (std::size_t i = 0; i < units.size(); ++i) {
          UnitResult r;
          {
            std::unique_lock lk(mu);
            cv.wait(lk, [&] { return results[i].has_value() || failure; });
            if (failure && !results[i]) std::rethrow_exception(failure);
            r = std::move(*results[i]);
            results[i].reset();
          }
          if (!units[i].reused.empty()) {
            commit(units[i].reused);
            summary.reused += units[i].reused.size();
          } else {
            commit(r.entries);
            summary.generated += r.entries.size();
          }
          progress(units[i]);
          std::lock_guard lk(mu);
          ++committed;
          cv.notify_all();
        }
      } catch (...) {
        {
          std::lock_guard lk(mu);
          stop = true;
          cv.notify_all();
        }
        pool.clear();
        throw;
      }
    }
  } catch (const std::exception& e) {
    finish_manifest(false, e.what());
    throw GenerationError(std::string("generation stopped: ") + e.what());
  }
  summary.complete = true;
  finish_manifest(true, {});
  return summary;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct VerifyFinding {
  std::string image_id;  ///< empty for manifest-level findings
  std::string message;
};

struct VerifyReport {
  std::vector<VerifyFinding> findings;
  std::size_t images = 0;
  std::map<std::string, std::size_t> per_kind;                   ///< ideal / noise / clutter
  std::map<std::string, std::map<std::string, std::size_t>> per_class;  ///< target -> kind -> count
  std::set<std::pair<std::string, std::string>> coverage;        ///< (target, route) pairs seen

  bool ok() const { return findings.empty(); }
};

namespace detail {

/// Header of an .f32 file plus a size check, without reading the payload.
inline nlohmann::json read_f32_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  unsigned char pre[12];
  in.read(reinterpret_cast<char*>(pre), 12);
  if (in.gcount() != 12 || std::memcmp(pre, kF32Magic, 8) != 0) throw Error("not an ISARF32 file");
  const std::uint32_t hlen = get_u32le(pre + 8);
  std::string h(hlen, '\0');
  in.read(h.data(), hlen);
  if (static_cast<std::uint32_t>(in.gcount()) != hlen) throw Error("truncated header");
  auto j = nlohmann::json::parse(h);
  const auto expect = 12 + static_cast<std::uintmax_t>(hlen) +
                      4 * j.at("rows").get<std::uintmax_t>() * j.at("cols").get<std::uintmax_t>();
  if (std::filesystem::file_size(path) != expect) throw Error("payload size does not match the header");
  return j;
}

inline std::pair<std::size_t, std::size_t> read_png_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char b[24];
  in.read(reinterpret_cast<char*>(b), 24);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() != 24 || std::memcmp(b, sig, 8) != 0 || std::memcmp(b + 12, "IHDR", 4) != 0)
    throw Error("not a PNG file");
  auto be32 = [](const unsigned char* p) {
    return (static_cast<std::size_t>(p[0]) << 24) | (static_cast<std::size_t>(p[1]) << 16) |
           (static_cast<std::size_t>(p[2]) << 8) | static_cast<std::size_t>(p[3]);
  };
  return {be32(b + 16), be32(b + 20)};
}

inline bool in_ladder(double v, const nlohmann::json& ladder) {
  for (const auto& x : ladder)
    if (std::abs(x.get<double>() - v) < 1e-9) return true;
  return false;
}

}  // namespace detail

inline VerifyReport verify_manifest(const std::filesystem::path& manifest_path) {
  namespace fs = std::filesystem;
  VerifyReport rep;
  auto flag = [&](const std::string& id, const std::string& msg) { rep.findings.push_back({id, msg}); };
  std::ifstream in(manifest_path);
  if (!in) {
    flag("", "cannot open manifest " + manifest_path.string());
    return rep;
  }
  const fs::path root = manifest_path.parent_path();
  nlohmann::json header, footer;
  std::set<std::string> ids;
  std::map<std::string, std::size_t> per_traj_kind;  // "target/route/kind"
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json e;
    try {
      e = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      flag("", "line " + std::to_string(lineno) + " is not valid JSON");
      continue;
    }
    const auto type = e.value("type", std::string{});
    if (type == "header") {
      if (!header.is_null()) flag("", "more than one header");
      header = e;
      continue;
    }
    if (type == "footer") {
      footer = e;
      continue;
    }
    if (type != "image") {
      flag("", "line " + std::to_string(lineno) + " has unknown type '" + type + "'");
      continue;
    }
    if (header.is_null()) {
      flag("", "image entry before the header");
      header = nlohmann::json::object();
    }
    const std::string id = e.value("image_id", std::string{});
    try {
      if (id.empty()) throw Error("entry without image_id on line " + std::to_string(lineno));
      if (!ids.insert(id).second) flag(id, "duplicate image_id");
      ++rep.images;
      const std::string target = e.at("target_label").get<std::string>();
      const std::string route = e.at("route").get<std::string>();
      const std::size_t cpi = e.at("cpi_index").get<std::size_t>();
      const auto& corr = e.at("corruption");
      const std::string kind = corr.at("kind").get<std::string>();
      ++rep.per_kind[kind];
      ++rep.per_class[target][kind];
      rep.coverage.insert({target, route});
      ++per_traj_kind[target + "/" + route + "/" + kind];

      const auto& cfg = header.contains("config") ? header["config"] : nlohmann::json::object();
      if (kind == "ideal") {
        if (corr.contains("snr_db") || corr.contains("wind_mps")) flag(id, "ideal image carries corruption parameters");
      } else if (kind == "noise") {
        const double snr = corr.at("snr_db").get<double>();
        if (cfg.contains("snr_db") && !detail::in_ladder(snr, cfg["snr_db"]))
          flag(id, "snr_db " + std::to_string(snr) + " is not on the configured ladder");
      } else if (kind == "clutter") {
        const double wind = corr.at("wind_mps").get<double>();
        if (cfg.contains("wind_mps") && !detail::in_ladder(wind, cfg["wind_mps"]))
          flag(id, "wind_mps " + std::to_string(wind) + " is not on the configured ladder");
      } else {
        flag(id, "unknown corruption kind '" + kind + "'");
      }
      if (cfg.contains("targets")) {
        bool known = false;
        for (const auto& t : cfg["targets"]) known = known || t.value("name", std::string{}) == target;
        if (!known) flag(id, "target_label '" + target + "' is not a configured target");
      }

      const std::size_t rows = e.at("axes").at("rows").get<std::size_t>();
      const std::size_t cols = e.at("axes").at("cols").get<std::size_t>();
      const auto& files = e.at("files");
      const fs::path png = root / files.at("png").get<std::string>();
      if (!fs::exists(png)) {
        flag(id, "missing PNG " + png.string());
      } else {
        const auto [w, h] = detail::read_png_size(png);
        if (w != rows || h != cols)
          flag(id, "PNG is " + std::to_string(w) + "x" + std::to_string(h) + ", expected " + std::to_string(rows) +
                       "x" + std::to_string(cols));
      }
      if (files.at("f32").is_string()) {
        const fs::path f32 = root / files["f32"].get<std::string>();
        if (!fs::exists(f32)) {
          flag(id, "missing f32 " + f32.string());
        } else {
          const auto h = detail::read_f32_header(f32);
          if (h.at("rows").get<std::size_t>() != rows || h.at("cols").get<std::size_t>() != cols)
            flag(id, "f32 dimensions differ from the manifest");
          const auto& lab = h.at("label");
          if (lab.at("target_label") != target || lab.at("route") != route ||
              lab.at("cpi_index").get<std::size_t>() != cpi || lab.at("corruption") != corr)
            flag(id, "f32 label differs from the manifest entry");
          if (std::abs(h.at("crp_m").get<double>() - e.at("crp_m").get<double>()) > 1e-9)
            flag(id, "f32 CRP differs from the manifest entry");
          const auto& ra = h.at("range_axis_m");
          if (ra.at("count").get<std::size_t>() != cols) flag(id, "f32 range axis length differs from cols");
        }
      }
    } catch (const std::exception& ex) {
      flag(id, std::string("malformed entry: ") + ex.what());
    }
  }

  if (header.is_null()) flag("", "manifest has no header");
  if (footer.is_null()) flag("", "manifest has no footer (generation did not finish)");
  else if (!footer.value("complete", false)) flag("", "manifest is marked incomplete: " + footer.value("error", std::string{}));
  else if (footer.value("images", std::size_t{0}) != rep.images)
    flag("", "footer counts " + std::to_string(footer.value("images", std::size_t{0})) + " images, manifest lists " +
                 std::to_string(rep.images));

  // Per-trajectory counts against the plan recorded in the header.
  if (header.contains("trajectories")) {
    const auto& cfg = header.at("config");
    const std::size_t n_snr = cfg.contains("snr_db") ? cfg["snr_db"].size() : 0;
    const std::size_t n_wind = cfg.contains("wind_mps") ? cfg["wind_mps"].size() : 0;
    for (const auto& t : header["trajectories"]) {
      const std::string key = t.at("target_label").get<std::string>() + "/" + t.at("route").get<std::string>();
      const std::size_t planned = t.at("cpis").size();
      const std::size_t budget = t.at("cpi_budget").get<std::size_t>();
      if (planned > budget) flag("", key + ": " + std::to_string(planned) + " CPIs exceed the frame budget");
      auto count = [&](const char* kind) {
        auto it = per_traj_kind.find(key + "/" + kind);
        return it == per_traj_kind.end() ? std::size_t{0} : it->second;
      };
      const std::pair<const char*, std::size_t> expect[] = {
          {"ideal", planned}, {"noise", planned * n_snr}, {"clutter", planned * n_wind}};
      for (const auto& [kind, n] : expect)
        if (count(kind) != n)
          flag("", key + ": " + std::to_string(count(kind)) + " " + kind + " images, expected " + std::to_string(n));
    }
  }
  return rep;
}

}  // namespace isarforge
