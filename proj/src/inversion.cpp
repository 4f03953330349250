#include "redfwi/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "redfwi/errors.hpp"
#include "redfwi/metrics.hpp"
#include "redfwi/red.hpp"
#include "redfwi/regularizers.hpp"

namespace redfwi {

Regularizer regularizer_from_string(const std::string& s) {
  if (s == "none") return Regularizer::None;
  if (s == "tikhonov") return Regularizer::Tikhonov;
  if (s == "tv") return Regularizer::TV;
  if (s == "red") return Regularizer::RED;
  throw ConfigError("unknown regularizer: " + s);
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::None: return "none";
    case Regularizer::Tikhonov: return "tikhonov";
    case Regularizer::TV: return "tv";
    case Regularizer::RED: return "red";
  }
  throw ContractError("bad regularizer enum");
}

double cosine_lr(double eta0, double eta_min, int k, int K) {
  if (K < 1) throw ContractError("cosine_lr: K must be >= 1");
  if (k < 0 || k >= K) throw ContractError("cosine_lr: iteration out of range");
  return eta_min + 0.5 * (eta0 - eta_min) * (1.0 + std::cos(M_PI * k / K));
}

namespace {

void validate_config(const InversionConfig& cfg, const VelocityModel& x0,
                     const AcquisitionGeometry& geom, const EpsilonPredictor* pred) {
  if (cfg.K < 1) throw ConfigError("invert: K must be >= 1");
  if (!(cfg.eta > 0.0)) throw ConfigError("invert: eta must be > 0");
  if (cfg.lambda < 0.0) throw ConfigError("invert: lambda must be >= 0");
  if (!(cfg.v_hi > cfg.v_lo)) throw ConfigError("invert: v_hi must exceed v_lo");
  if (cfg.regularizer == Regularizer::RED && pred == nullptr)
    throw ConfigError("invert: RED regularizer requires an epsilon predictor");
  auto [lo, hi] = x0.values.min_max();
  if (lo < cfg.v_lo || hi > cfg.v_hi)
    throw ConfigError("invert: initial model outside [v_lo, v_hi]");
  // every clamped iterate satisfies v <= v_hi, so one bound check covers the run
  VelocityModel fastest(1, 1, x0.dx, cfg.v_hi);
  cfl_check(fastest, geom.dt, cfg.sim.space_order);
}

}  // namespace

InversionTrace invert(const SeismicSurvey& observed, const AcquisitionGeometry& geom,
                      const VelocityModel& x0, const EpsilonPredictor* pred,
                      const InversionConfig& cfg, const VelocityModel* truth) {
  validate_config(cfg, x0, geom, pred);
  if (truth != nullptr && !truth->values.same_shape(x0.values))
    throw ContractError("invert: truth shape does not match the model");

  NoiseSchedule sched;
  const bool use_reg = cfg.lambda > 0.0 && cfg.regularizer != Regularizer::None;
  if (use_reg && cfg.regularizer == Regularizer::RED)
    sched = build_sigmoid_schedule(cfg.schedule);
  Rng rng(cfg.seed);

  AdjointOptions adj;
  adj.sim = cfg.sim;
  adj.memory_budget_bytes = cfg.memory_budget_bytes;
  adj.checkpoint_interval = cfg.checkpoint_interval;

  const double half_range = 0.5 * (cfg.v_hi - cfg.v_lo);  // dv/dx of de-normalization
  Field2D x = normalize_model(x0.values, cfg.v_lo, cfg.v_hi);
  AdamState adam;
  adam.init(x.size());

  InversionTrace trace;
  VelocityModel vm(x0.ny, x0.nx, x0.dx);
  for (int k = 0; k < cfg.K; ++k) {
    vm.values = denormalize_model(x, cfg.v_lo, cfg.v_hi);
    MisfitReport mr = misfit_gradient(vm, geom, observed, adj);

    Field2D grad(x.ny(), x.nx());
    for (size_t i = 0; i < grad.size(); ++i) grad[i] = mr.gradient[i] * half_range;

    double reg_value = 0.0;
    if (use_reg) {
      switch (cfg.regularizer) {
        case Regularizer::Tikhonov: {
          RegularizerValue rv = tikhonov(x);
          reg_value = rv.value;
          axpy(cfg.lambda, rv.gradient, grad);
          break;
        }
        case Regularizer::TV: {
          RegularizerValue rv = total_variation(x, cfg.tv_eps);
          reg_value = rv.value;
          axpy(cfg.lambda, rv.gradient, grad);
          break;
        }
        case Regularizer::RED: {
          RedSample rs = red_estimate(x, *pred, sched, rng, cfg.red_use_weight);
          reg_value = rs.r_hat;
          axpy(cfg.lambda, rs.grad, grad);
          break;
        }
        case Regularizer::None: break;
      }
    }

    IterationRow row;
    row.iteration = k;
    row.misfit = mr.value;
    row.reg = reg_value;
    row.loss = mr.value + cfg.lambda * reg_value;
    row.lr = cosine_lr(cfg.eta, cfg.eta_min, k, cfg.K);
    if (truth != nullptr) {
      row.has_metrics = true;
      row.rmse = rmse(truth->values, vm.values);
      row.mae = mae(truth->values, vm.values);
      row.ssim = (x0.ny >= 11 && x0.nx >= 11)
                     ? ssim(truth->values, vm.values,
                            truth->values.min_max().second - truth->values.min_max().first)
                     : std::numeric_limits<double>::quiet_NaN();
    }
    trace.rows.push_back(row);

    if (!std::isfinite(row.loss) || !grad.all_finite()) {
      trace.aborted = true;
      break;
    }

    adam_step(x, grad, adam, row.lr, cfg.adam);
    clamp_inplace(x, -1.0, 1.0);
  }

  vm.values = denormalize_model(x, cfg.v_lo, cfg.v_hi);
  trace.final_model = vm;
  return trace;
}

SeismicSurvey add_gaussian_noise(const SeismicSurvey& s, double std, Rng& rng) {
  if (std < 0.0) throw ConfigError("add_gaussian_noise: std must be >= 0");
  SeismicSurvey out = s;
  if (std == 0.0) return out;
  for (double& x : out.data) x += std * rng.normal();
  return out;
}

SeismicSurvey drop_traces(const SeismicSurvey& s, int count, Rng& rng) {
  if (count < 0 || count >= s.n_receivers)
    throw ContractError("drop_traces: count must be in [0, receivers)");
  SeismicSurvey out = s;
  std::vector<int> idx(s.n_receivers);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    int j = rng.uniform_int(i, s.n_receivers - 1);
    std::swap(idx[i], idx[j]);
  }
  for (int i = 0; i < count; ++i)
    for (int sh = 0; sh < s.n_shots; ++sh)
      out.trace_mask[static_cast<size_t>(sh) * s.n_receivers + idx[i]] = 0;
  return out;
}

void write_trace_csv(const InversionTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ResourceError("cannot write " + path);
  bool metrics = !trace.rows.empty() && trace.rows.front().has_metrics;
  f << "iteration,loss,misfit,reg,lr";
  if (metrics) f << ",rmse,mae,ssim";
  f << "\n";
  f.precision(12);
  for (const IterationRow& r : trace.rows) {
    f << r.iteration << "," << r.loss << "," << r.misfit << "," << r.reg << "," << r.lr;
    if (metrics) f << "," << r.rmse << "," << r.mae << "," << r.ssim;
    f << "\n";
  }
}

}  // namespace redfwi
