// isar-forge: dataset generation, verification and single-frame previews.
//
// Exit codes: 0 ok, 1 config error, 2 generation error, 3 verification failures.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "isarforge/isarforge.hpp"

namespace fs = std::filesystem;
using namespace isarforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitGeneration = 2;
constexpr int kExitVerify = 3;

int cmd_generate(const fs::path& config, const fs::path& out, unsigned jobs, bool resume, bool quiet) {
  const auto cfg = load_dataset_config(config);
  const auto plan = plan_generation(cfg);
  std::cerr << "config " << plan.config_hash << ": " << plan.trajectories.size() << " trajectories, "
            << plan.ideal_count() << " ideal, " << plan.noisy_count() << " noisy, " << plan.cluttered_count()
            << " cluttered images\n";
  GenerationOptions opts;
  opts.jobs = jobs;
  opts.resume = resume;
  if (!quiet) opts.log = [](const std::string& s) { std::cerr << s << '\n'; };
  const auto s = run_generation(plan, out, opts);
  std::cerr << "wrote " << s.generated << " images, reused " << s.reused << ", manifest " << s.manifest.string()
            << '\n';
  return kExitOk;
}

int cmd_plan(const fs::path& config) {
  const auto plan = plan_generation(load_dataset_config(config));
  nlohmann::json j{{"config_hash", plan.config_hash},
                   {"targets", plan.meshes.size()},
                   {"trajectories", plan.trajectories.size()},
                   {"ideal", plan.ideal_count()},
                   {"noise", plan.noisy_count()},
                   {"clutter", plan.cluttered_count()}};
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& t : plan.trajectories) {
    lo = std::min(lo, t.cpis.size());
    hi = std::max(hi, t.cpis.size());
  }
  j["cpis_per_trajectory"] = {lo, hi};
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify(const fs::path& manifest, std::size_t max_findings) {
  const auto rep = verify_manifest(manifest);
  std::cout << rep.images << " images";
  for (const auto& [kind, n] : rep.per_kind) std::cout << ", " << kind << " " << n;
  std::cout << ", " << rep.coverage.size() << " (target, route) pairs\n";
  for (std::size_t i = 0; i < rep.findings.size() && i < max_findings; ++i) {
    const auto& f = rep.findings[i];
    std::cout << (f.image_id.empty() ? std::string("manifest") : f.image_id) << ": " << f.message << '\n';
  }
  if (rep.findings.size() > max_findings) std::cout << "... " << rep.findings.size() - max_findings << " more\n";
  std::cout << (rep.ok() ? "clean" : std::to_string(rep.findings.size()) + " findings") << '\n';
  return rep.ok() ? kExitOk : kExitVerify;
}

struct PreviewArgs {
  std::string target;
  std::string route = "S2E";
  std::size_t cpi = 20;
  fs::path png;
  std::optional<fs::path> f32;
  std::optional<fs::path> radar;
  double speed = 8.0;
  double duration = 5.0;
  std::optional<double> snr;
  std::optional<double> wind;
  std::string window = "none";
  std::vector<double> junction;
};

int cmd_preview(const PreviewArgs& a) {
  FacetMesh mesh;
  if (fs::exists(a.target)) mesh = load_mesh(a.target);
  else mesh = make_vehicle(a.target).mesh();
  RadarParams radar;
  if (a.radar) {
    std::ifstream in(*a.radar);
    if (!in) throw ConfigError("cannot open radar file " + a.radar->string());
    radar = radar_params_from_json(nlohmann::json::parse(in));
  }
  TrajectoryOptions topts;
  if (!a.junction.empty()) {
    if (a.junction.size() != 2) throw ConfigError("--junction takes two values: x y");
    topts.junction.center = {a.junction[0], a.junction[1], 0.0};
  }
  const auto plan = make_trajectory(parse_route(a.route), a.speed, a.duration, 0.01, topts);
  const auto frames = animate(std::make_shared<const FacetMesh>(std::move(mesh)), plan);
  const std::size_t budget = cpi_count(radar, frames.duration());
  if (a.cpi < 1 || a.cpi > budget)
    throw ConfigError("--cpi must be within 1.." + std::to_string(budget) + " for this trajectory");

  RadarParams r = radar;
  r.snr_db = a.snr;
  const auto cube = synthesize_cpi(frames, r, a.cpi);
  for (const auto& w : cube.warnings) std::cerr << "warning: " << w << '\n';
  auto img = form_image(cube, parse_window(a.window));
  img.label.target = frames.mesh().name;
  img.label.route = a.route;
  img.label.seed = r.seed;
  DynamicRange dr = kIdealRange;
  if (a.snr) {
    img.label.corruption = "noise";
    img.label.snr_db = a.snr;
    dr = kNoisyRange;
  }
  if (a.wind) {
    inject_clutter(img, clutter_params_for(r, *a.wind, r.seed), r, a.cpi);
    img.label.corruption = a.snr ? "noise+clutter" : "clutter";
    img.label.snr_db = a.snr;
    dr = kClutteredRange;
  }
  const auto track = make_yaw_track(frames, r, budget);
  if (const auto omega = estimate_omega(track, a.cpi, r.cpi_s)) doppler_to_crossrange(img, *omega);
  const auto pk = peak_pixel(img);
  std::cerr << "peak " << img.power(pk.row, pk.col) << " dBm at range " << img.range_axis[pk.col] << " m, Doppler "
            << img.doppler_axis[pk.row] << " Hz; CRP " << img.crp_m << " m";
  if (img.omega) std::cerr << ", omega " << *img.omega << " rad/s";
  std::cerr << '\n';
  clamp_dynamic_range(img, dr);
  write_png16(a.png, img);
  if (a.f32) write_f32(*a.f32, img);
  return kExitOk;
}

int cmd_make_meshes(const fs::path& out, const std::vector<std::string>& names) {
  fs::create_directories(out);
  for (const auto& name : names.empty() ? fleet_names() : names) {
    const auto model = make_vehicle(name);
    const auto mesh = model.mesh();
    std::ofstream obj(out / (name + ".obj"));
    write_obj(obj, mesh);
    std::ofstream side(out / (name + ".json"));
    side << part_map_to_json(model.parts).dump(2) << '\n';
    if (!obj || !side) throw Error("failed to write mesh files for " + name);
    std::cerr << name << ": " << mesh.size() << " facets\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ISAR image simulation and dataset generation"};
  app.require_subcommand(1);

  fs::path gen_config, gen_out;
  unsigned jobs = 1;
  bool resume = false, quiet = false;
  auto* gen = app.add_subcommand("generate", "Generate a dataset from a config file");
  gen->add_option("--config", gen_config, "Dataset config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_flag("--resume", resume, "Skip images already listed in an existing manifest");
  gen->add_flag("--quiet", quiet, "No progress output");

  fs::path plan_config;
  auto* plan = app.add_subcommand("plan", "Print image counts for a config without generating");
  plan->add_option("--config", plan_config, "Dataset config (JSON)")->required()->check(CLI::ExistingFile);

  fs::path manifest;
  std::size_t max_findings = 50;
  auto* ver = app.add_subcommand("verify", "Check a manifest against the files on disk");
  ver->add_option("--manifest", manifest, "manifest.jsonl")->required();
  ver->add_option("--max-findings", max_findings, "Findings to print");

  PreviewArgs pa;
  auto* pre = app.add_subcommand("preview", "Render one CPI of one trajectory");
  pre->add_option("--target", pa.target, "Mesh file or built-in vehicle name")->required();
  pre->add_option("--route", pa.route, "Route, e.g. S2E");
  pre->add_option("--cpi", pa.cpi, "CPI index (1-based)");
  pre->add_option("--png", pa.png, "Output PNG")->required();
  pre->add_option("--f32", pa.f32, "Also write the .f32 matrix");
  pre->add_option("--radar", pa.radar, "Radar parameter file (JSON)");
  pre->add_option("--speed", pa.speed, "Speed (m/s)");
  pre->add_option("--duration", pa.duration, "Trajectory duration (s)");
  pre->add_option("--snr", pa.snr, "Receiver noise SNR (dB)");
  pre->add_option("--wind", pa.wind, "Clutter wind speed (m/s)");
  pre->add_option("--window", pa.window, "none or hann");
  pre->add_option("--junction", pa.junction, "Junction center x y (m)")->expected(2);

  fs::path mesh_out;
  std::vector<std::string> mesh_names;
  auto* meshes = app.add_subcommand("make-meshes", "Write the built-in fleet as OBJ meshes with sidecars");
  meshes->add_option("--out", mesh_out, "Output directory")->required();
  meshes->add_option("--targets", mesh_names, "Subset of the fleet");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(gen_config, gen_out, jobs, resume, quiet);
    if (*plan) return cmd_plan(plan_config);
    if (*ver) return cmd_verify(manifest, max_findings);
    if (*pre) return cmd_preview(pa);
    if (*meshes) return cmd_make_meshes(mesh_out, mesh_names);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGeneration;
  }
  return kExitOk;
}
