// Command-line driver: data generation, forward modeling, corruption,
// prior training, inversion, evaluation, rendering. One JSON config per run;
// every output directory gets a manifest echoing the config.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "redfwi/errors.hpp"
#include "redfwi/gridfile.hpp"
#include "redfwi/inversion.hpp"
#include "redfwi/metrics.hpp"
#include "redfwi/prior.hpp"
#include "redfwi/schedule.hpp"
#include "redfwi/velocity.hpp"
#include "redfwi/wave.hpp"

using nlohmann::json;
using namespace redfwi;

namespace {

constexpr const char* kToolVersion = "1.0";
constexpr const char* kFormatVersion = "RDQ1";

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ResourceError("cannot open config " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("config parse: ") + e.what());
  }
  return j;
}

void write_manifest(const std::string& dir, const std::string& command, const json& cfg) {
  json m;
  m["command"] = command;
  m["tool_version"] = kToolVersion;
  m["format_version"] = kFormatVersion;
  m["config"] = cfg;
  std::ofstream f(dir + "/manifest.json");
  if (!f) throw ResourceError("cannot write manifest in " + dir);
  f << m.dump(2) << "\n";
}

std::string out_dir(const json& cfg) {
  std::string d = cfg.at("out_dir").get<std::string>();
  std::filesystem::create_directories(d);
  return d;
}

FamilySpec family_spec_from(const json& cfg) {
  FamilySpec fs;
  fs.family = family_from_string(cfg.value("family", "FlatLayers"));
  fs.ny = cfg.value("ny", fs.ny);
  fs.nx = cfg.value("nx", fs.nx);
  fs.dx = cfg.value("dx", fs.dx);
  fs.layer_count_min = cfg.value("layer_count_min", fs.layer_count_min);
  fs.layer_count_max = cfg.value("layer_count_max", fs.layer_count_max);
  fs.v_min = cfg.value("v_min", fs.v_min);
  fs.v_max = cfg.value("v_max", fs.v_max);
  fs.curvature_amplitude = cfg.value("curvature_amplitude", fs.curvature_amplitude);
  fs.fault_throw_min = cfg.value("fault_throw_min", fs.fault_throw_min);
  fs.fault_throw_max = cfg.value("fault_throw_max", fs.fault_throw_max);
  fs.seed = cfg.value("seed", 0ULL);
  return fs;
}

ScheduleParams schedule_from(const json& cfg) {
  ScheduleParams sp;
  if (!cfg.contains("schedule")) return sp;
  const json& s = cfg.at("schedule");
  sp.T = s.value("T", sp.T);
  sp.start = s.value("start", sp.start);
  sp.end = s.value("end", sp.end);
  sp.tau = s.value("tau", sp.tau);
  sp.gamma_min = s.value("gamma_min", sp.gamma_min);
  return sp;
}

SimOptions sim_from(const json& cfg) {
  SimOptions so;
  if (!cfg.contains("sim")) return so;
  const json& s = cfg.at("sim");
  so.sponge_width = s.value("sponge_width", so.sponge_width);
  so.sponge_strength = s.value("sponge_strength", so.sponge_strength);
  so.sponge_enabled = s.value("sponge_enabled", so.sponge_enabled);
  so.space_order = s.value("space_order", so.space_order);
  so.n_threads = s.value("n_threads", so.n_threads);
  return so;
}

AcquisitionGeometry geometry_from(const json& g, int ny, int nx) {
  AcquisitionGeometry geom;
  geom.nt = g.value("nt", geom.nt);
  geom.dt = g.value("dt", geom.dt);
  geom.wavelet_peak_frequency = g.value("peak_frequency", geom.wavelet_peak_frequency);
  geom.source_amplitude = g.value("source_amplitude", geom.source_amplitude);
  if (g.contains("sources")) {
    for (const auto& p : g.at("sources"))
      geom.source_positions.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    if (g.contains("receivers")) {
      for (const auto& p : g.at("receivers"))
        geom.receiver_positions.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } else {
      for (int j = 0; j < nx; ++j) geom.receiver_positions.emplace_back(0, j);
    }
  } else {
    AcquisitionGeometry s = surface_geometry(ny, nx, g.value("surface_sources", 5), geom.nt,
                                             geom.dt, geom.wavelet_peak_frequency);
    s.source_amplitude = geom.source_amplitude;
    geom = s;
  }
  return geom;
}

json geometry_to_json(const AcquisitionGeometry& geom) {
  json g;
  g["nt"] = geom.nt;
  g["dt"] = geom.dt;
  g["peak_frequency"] = geom.wavelet_peak_frequency;
  g["source_amplitude"] = geom.source_amplitude;
  g["sources"] = json::array();
  for (const auto& [r, c] : geom.source_positions) g["sources"].push_back({r, c});
  g["receivers"] = json::array();
  for (const auto& [r, c] : geom.receiver_positions) g["receivers"].push_back({r, c});
  return g;
}

VelocityModel load_model(const std::string& path, double dx) {
  VelocityModel m;
  m.values = load_field(path);
  m.ny = m.values.ny();
  m.nx = m.values.nx();
  m.dx = dx;
  return m;
}

void save_survey(const std::string& dir, const SeismicSurvey& sv,
                 const AcquisitionGeometry& geom, double dx) {
  GridData gd;
  gd.dims = {static_cast<uint32_t>(sv.n_shots), static_cast<uint32_t>(sv.n_receivers),
             static_cast<uint32_t>(sv.nt)};
  gd.values.assign(sv.data.begin(), sv.data.end());
  save_grid(dir + "/survey.rdq", gd);
  GridData mk;
  mk.dims = {static_cast<uint32_t>(sv.n_shots), static_cast<uint32_t>(sv.n_receivers)};
  mk.values.assign(sv.trace_mask.begin(), sv.trace_mask.end());
  save_grid(dir + "/mask.rdq", mk);
  json j;
  j["norm_factor"] = sv.norm_factor;
  j["n_shots"] = sv.n_shots;
  j["n_receivers"] = sv.n_receivers;
  j["nt"] = sv.nt;
  j["dx"] = dx;
  j["geometry"] = geometry_to_json(geom);
  std::ofstream f(dir + "/survey.json");
  if (!f) throw ResourceError("cannot write " + dir + "/survey.json");
  f << j.dump(2) << "\n";
}

SeismicSurvey load_survey(const std::string& dir, AcquisitionGeometry* geom_out, double* dx_out) {
  std::ifstream f(dir + "/survey.json");
  if (!f) throw ResourceError("cannot open " + dir + "/survey.json");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("survey.json: ") + e.what());
  }
  SeismicSurvey sv;
  sv.n_shots = j.at("n_shots").get<int>();
  sv.n_receivers = j.at("n_receivers").get<int>();
  sv.nt = j.at("nt").get<int>();
  sv.norm_factor = j.at("norm_factor").get<double>();
  GridData gd = load_grid(dir + "/survey.rdq");
  if (gd.dims.size() != 3 || gd.dims[0] != static_cast<uint32_t>(sv.n_shots) ||
      gd.dims[1] != static_cast<uint32_t>(sv.n_receivers) ||
      gd.dims[2] != static_cast<uint32_t>(sv.nt))
    throw FormatError("survey.rdq dims do not match survey.json");
  sv.data.assign(gd.values.begin(), gd.values.end());
  GridData mk = load_grid(dir + "/mask.rdq");
  if (mk.dims.size() != 2 ||
      mk.values.size() != static_cast<size_t>(sv.n_shots) * sv.n_receivers)
    throw FormatError("mask.rdq dims do not match survey.json");
  sv.trace_mask.resize(mk.values.size());
  for (size_t k = 0; k < mk.values.size(); ++k) sv.trace_mask[k] = mk.values[k] != 0.0f ? 1 : 0;
  if (geom_out) *geom_out = geometry_from(j.at("geometry"), 0, 0);
  if (dx_out) *dx_out = j.value("dx", 10.0);
  return sv;
}

std::vector<std::string> list_models(const json& cfg) {
  std::vector<std::string> paths;
  auto scan_dir = [&paths](const std::string& d) {
    for (const auto& e : std::filesystem::directory_iterator(d))
      if (e.path().extension() == ".rdq") paths.push_back(e.path().string());
    std::sort(paths.begin(), paths.end());
  };
  if (cfg.contains("models")) {
    const json& m = cfg.at("models");
    if (m.is_string())
      scan_dir(m.get<std::string>());
    else
      for (const auto& p : m) paths.push_back(p.get<std::string>());
  } else {
    scan_dir(cfg.at("models_dir").get<std::string>());
  }
  if (paths.empty()) throw ConfigError("no model files found");
  return paths;
}

int cmd_gen(const json& cfg) {
  std::string dir = out_dir(cfg);
  FamilySpec fs = family_spec_from(cfg);
  int count = cfg.value("count", 1);
  std::vector<VelocityModel> models = generate(fs, count);
  for (int i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "model_%04d.rdq", i);
    save_field(dir + "/" + name, models[i].values);
  }
  write_manifest(dir, "gen", cfg);
  std::printf("wrote %d models to %s\n", count, dir.c_str());
  return 0;
}

int cmd_forward(const json& cfg) {
  std::string dir = out_dir(cfg);
  double dx = cfg.value("dx", 10.0);
  VelocityModel m = load_model(cfg.at("model").get<std::string>(), dx);
  AcquisitionGeometry geom = geometry_from(cfg.value("geometry", json::object()), m.ny, m.nx);
  SimOptions so = sim_from(cfg);
  SeismicSurvey sv = simulate_survey(m, geom, so);
  save_survey(dir, sv, geom, dx);
  write_manifest(dir, "forward", cfg);
  std::printf("survey %dx%dx%d written to %s (norm_factor %.6g)\n", sv.n_shots,
              sv.n_receivers, sv.nt, dir.c_str(), sv.norm_factor);
  return 0;
}

int cmd_corrupt(const json& cfg) {
  std::string dir = out_dir(cfg);
  AcquisitionGeometry geom;
  double dx = 10.0;
  SeismicSurvey sv = load_survey(cfg.at("survey").get<std::string>(), &geom, &dx);
  Rng rng(cfg.value("seed", 0ULL));
  double noise_std = cfg.value("noise_std", 0.0);
  int drop = cfg.value("drop_traces", 0);
  if (noise_std > 0.0) sv = add_gaussian_noise(sv, noise_std, rng);
  if (drop > 0) sv = drop_traces(sv, drop, rng);
  save_survey(dir, sv, geom, dx);
  write_manifest(dir, "corrupt", cfg);
  std::printf("corrupted survey written to %s (noise %.3g, dropped %d)\n", dir.c_str(),
              noise_std, drop);
  return 0;
}

int cmd_train_prior(const json& cfg) {
  std::string dir = out_dir(cfg);
  double dx = cfg.value("dx", 10.0);
  std::vector<VelocityModel> dataset;
  for (const auto& p : list_models(cfg)) dataset.push_back(load_model(p, dx));
  TinyDenoiser model(cfg.value("model_seed", 0ULL), cfg.value("emb_dim", 32),
                     cfg.value("base_width", 8));
  TrainConfig tc;
  tc.iterations = cfg.value("iterations", tc.iterations);
  tc.batch_size = cfg.value("batch_size", tc.batch_size);
  tc.learning_rate = cfg.value("learning_rate", tc.learning_rate);
  tc.seed = cfg.value("seed", 0ULL);
  tc.schedule = schedule_from(cfg);
  tc.v_lo = cfg.value("v_lo", tc.v_lo);
  tc.v_hi = cfg.value("v_hi", tc.v_hi);
  TrainReport rep = train_ddpm(model, dataset, tc);
  save_denoiser(model, tc.schedule, dir + "/prior");
  std::ofstream curve(dir + "/loss_curve.csv");
  curve << "iteration,loss\n";
  for (size_t i = 0; i < rep.loss_curve.size(); ++i)
    curve << i << "," << rep.loss_curve[i] << "\n";
  write_manifest(dir, "train-prior", cfg);
  if (rep.diverged)
    std::printf("training diverged at iteration %d; checkpoint written to %s\n",
                rep.diverged_at, dir.c_str());
  else
    std::printf("trained %d iterations, final loss %.6g, written to %s\n",
                static_cast<int>(rep.loss_curve.size()),
                rep.loss_curve.empty() ? 0.0 : rep.loss_curve.back(), dir.c_str());
  return rep.diverged ? 3 : 0;
}

int cmd_invert(const json& cfg) {
  std::string dir = out_dir(cfg);
  AcquisitionGeometry geom;
  double dx = 10.0;
  SeismicSurvey sv = load_survey(cfg.at("survey").get<std::string>(), &geom, &dx);

  InversionConfig ic;
  ic.K = cfg.value("iterations", ic.K);
  ic.eta = cfg.value("eta", ic.eta);
  ic.eta_min = cfg.value("eta_min", ic.eta_min);
  ic.lambda = cfg.value("lambda", ic.lambda);
  ic.regularizer = regularizer_from_string(cfg.value("regularizer", "none"));
  ic.schedule = schedule_from(cfg);
  ic.seed = cfg.value("seed", 0ULL);
  ic.v_lo = cfg.value("v_lo", ic.v_lo);
  ic.v_hi = cfg.value("v_hi", ic.v_hi);
  ic.tv_eps = cfg.value("tv_eps", ic.tv_eps);
  ic.red_use_weight = cfg.value("red_use_weight", ic.red_use_weight);
  ic.sim = sim_from(cfg);
  ic.memory_budget_bytes = cfg.value("memory_budget_bytes", ic.memory_budget_bytes);
  ic.checkpoint_interval = cfg.value("checkpoint_interval", ic.checkpoint_interval);

  VelocityModel truth;
  const VelocityModel* truth_ptr = nullptr;
  if (cfg.contains("truth")) {
    truth = load_model(cfg.at("truth").get<std::string>(), dx);
    truth_ptr = &truth;
  }

  VelocityModel x0;
  if (cfg.contains("initial_model")) {
    x0 = load_model(cfg.at("initial_model").get<std::string>(), dx);
  } else if (truth_ptr && cfg.contains("initial_smooth_sigma")) {
    x0 = truth;
    x0.values = gaussian_smooth(truth.values, cfg.at("initial_smooth_sigma").get<double>());
  } else {
    throw ConfigError("invert needs initial_model, or truth plus initial_smooth_sigma");
  }

  TinyDenoiser prior;
  EpsilonPredictor* pred = nullptr;
  if (ic.regularizer == Regularizer::RED) {
    if (!cfg.contains("prior")) throw ConfigError("regularizer red needs a prior path");
    ScheduleParams sp;
    prior = load_denoiser(cfg.at("prior").get<std::string>(), &sp);
    if (!cfg.contains("schedule")) ic.schedule = sp;
    pred = &prior;
  }

  InversionTrace tr = invert(sv, geom, x0, pred, ic, truth_ptr);
  save_field(dir + "/final_model.rdq", tr.final_model.values);
  save_field(dir + "/initial_model.rdq", x0.values);
  write_trace_csv(tr, dir + "/trace.csv");
  write_manifest(dir, "invert", cfg);
  const IterationRow& last = tr.rows.back();
  std::printf("inversion %s after %d iterations, final loss %.6g%s\n",
              tr.aborted ? "aborted" : "finished", static_cast<int>(tr.rows.size()),
              last.loss, tr.aborted ? " (non-finite update)" : "");
  if (truth_ptr) {
    MetricsReport mr = evaluate(truth.values, tr.final_model.values);
    std::printf("final rmse %.4f mae %.4f ssim %.4f\n", mr.rmse, mr.mae, mr.ssim);
  }
  return tr.aborted ? 4 : 0;
}

int cmd_eval(const json& cfg) {
  double dx = cfg.value("dx", 10.0);
  VelocityModel truth = load_model(cfg.at("truth").get<std::string>(), dx);
  VelocityModel recon = load_model(cfg.at("recon").get<std::string>(), dx);
  MetricsReport mr = evaluate(truth.values, recon.values);
  json out;
  out["rmse"] = mr.rmse;
  out["mae"] = mr.mae;
  out["ssim"] = mr.ssim;
  std::cout << out.dump() << "\n";
  if (cfg.contains("out_dir")) {
    std::string dir = out_dir(cfg);
    std::ofstream f(dir + "/metrics.json");
    f << out.dump(2) << "\n";
    write_manifest(dir, "eval", cfg);
  }
  return 0;
}

int cmd_render(const json& cfg) {
  std::string dir = out_dir(cfg);
  Field2D f = load_field(cfg.at("input").get<std::string>());
  auto [lo, hi] = f.min_max();
  double vmin = cfg.value("vmin", lo);
  double vmax = cfg.value("vmax", hi);
  std::string name = cfg.value("name", std::string("render.pgm"));
  render_pgm(f, dir + "/" + name, vmin, vmax);
  write_manifest(dir, "render", cfg);
  std::printf("rendered %s (range %.4g..%.4g)\n", (dir + "/" + name).c_str(), vmin, vmax);
  return 0;
}

int cmd_schedule_dump(const json& cfg) {
  std::string dir = out_dir(cfg);
  ScheduleParams sp = schedule_from(cfg);
  NoiseSchedule sched = build_sigmoid_schedule(sp);
  dump_schedule_csv(sched, dir + "/schedule.csv");
  write_manifest(dir, "schedule-dump", cfg);
  std::printf("schedule with T=%d written to %s/schedule.csv\n", sp.T, dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seismic inversion toolkit"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
    int (*run)(const json&);
  };
  const Sub subs[] = {
      {"gen", "generate synthetic velocity models", cmd_gen},
      {"forward", "simulate a seismic survey over a model", cmd_forward},
      {"corrupt", "add noise / drop traces in a survey", cmd_corrupt},
      {"train-prior", "train the denoising prior on a model set", cmd_train_prior},
      {"invert", "run the inversion loop", cmd_invert},
      {"eval", "compare a reconstruction against ground truth", cmd_eval},
      {"render", "render a field to a PGM image", cmd_render},
      {"schedule-dump", "write the noise schedule as CSV", cmd_schedule_dump},
  };

  std::string config_path;
  int (*selected)(const json&) = nullptr;
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.desc);
    sc->add_option("--config", config_path, "JSON config file")->required();
    sc->callback([&selected, &s]() { selected = s.run; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = load_config(config_path);
    return selected(cfg);
  } catch (const json::exception& e) {
    json err;
    err["error"] = true;
    err["type"] = "config";
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    json err;
    err["error"] = true;
    err["type"] = typeid(e) == typeid(ConfigError)      ? "config"
                  : typeid(e) == typeid(ContractError)  ? "contract"
                  : typeid(e) == typeid(StabilityError) ? "stability"
                  : typeid(e) == typeid(NumericalError) ? "numerical"
                  : typeid(e) == typeid(FormatError)    ? "format"
                  : typeid(e) == typeid(ResourceError)  ? "resource"
                                                        : "internal";
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }
}
