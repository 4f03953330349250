#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redfwi/adjoint.hpp"
#include "redfwi/optim.hpp"
#include "redfwi/prior.hpp"
#include "redfwi/schedule.hpp"
#include "redfwi/velocity.hpp"
#include "redfwi/wave.hpp"

namespace redfwi {

enum class Regularizer { None, Tikhonov, TV, RED };

Regularizer regularizer_from_string(const std::string& s);
std::string to_string(Regularizer r);

struct InversionConfig {
  int K = 300;            // iterations
  double eta = 0.03;      // initial step size
  double eta_min = 0.0;   // annealed floor
  double lambda = 0.0;    // regularization weight (normalized units)
  Regularizer regularizer = Regularizer::None;
  ScheduleParams schedule{};
  uint64_t seed = 0;
  AdamParams adam{};
  double v_lo = 1500.0, v_hi = 4500.0;  // normalization box
  double tv_eps = 1e-3;                 // TV gradient smoothing
  bool red_use_weight = false;          // multiply the RED term by w(t)
  SimOptions sim{};
  size_t memory_budget_bytes = static_cast<size_t>(2) << 30;
  int checkpoint_interval = 0;
};

struct IterationRow {
  int iteration = 0;
  double loss = 0.0;    // misfit + lambda * reg
  double misfit = 0.0;
  double reg = 0.0;     // regularizer value before weighting
  double lr = 0.0;
  bool has_metrics = false;  // set when ground truth was supplied
  double rmse = 0.0, mae = 0.0, ssim = 0.0;  // ssim is NaN on grids under 11x11
};

struct InversionTrace {
  std::vector<IterationRow> rows;
  VelocityModel final_model;
  bool aborted = false;  // non-finite loss or gradient stopped the run early
};

// eta_min + 0.5 (eta0 - eta_min) (1 + cos(pi k / K)), for 0 <= k < K.
double cosine_lr(double eta0, double eta_min, int k, int K);

// Gradient descent on || observed - f(x) ||^2 + lambda R(x) in normalized
// [-1, 1] space with Adam + cosine annealing; iterates are clamped to the
// box after every step. pred is required iff regularizer == RED; when
// lambda == 0 the regularizer (and its noise sampling) is skipped entirely,
// reducing the loop to plain FWI. Per-iteration metrics against `truth` are
// recorded when it is supplied; they never influence the optimization.
InversionTrace invert(const SeismicSurvey& observed, const AcquisitionGeometry& geom,
                      const VelocityModel& x0, const EpsilonPredictor* pred,
                      const InversionConfig& cfg, const VelocityModel* truth = nullptr);

// data' = data + std * xi on the normalized amplitudes; mask untouched.
SeismicSurvey add_gaussian_noise(const SeismicSurvey& s, double std, Rng& rng);

// Masks out `count` distinct receivers (uniformly sampled) in every shot.
SeismicSurvey drop_traces(const SeismicSurvey& s, int count, Rng& rng);

// CSV: iteration,loss,misfit,reg,lr[,rmse,mae,ssim]
void write_trace_csv(const InversionTrace& trace, const std::string& path);

}  // namespace redfwi
