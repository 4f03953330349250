#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "redfwi/field.hpp"
#include "redfwi/rng.hpp"
#include "redfwi/schedule.hpp"
#include "redfwi/velocity.hpp"

namespace redfwi {

// map velocity in [v_lo, v_hi] to [-1, 1] and back
Field2D normalize_model(const Field2D& v, double v_lo, double v_hi);
Field2D denormalize_model(const Field2D& x, double v_lo, double v_hi);

// Noise predictor: given a corrupted normalized field z at step t, estimate
// the injected unit-variance noise.
class EpsilonPredictor {
 public:
  virtual ~EpsilonPredictor() = default;
  virtual Field2D predict(const Field2D& z, int t, const NoiseSchedule& sched) const = 0;
  // (v_lo, v_hi) mapping velocity to [-1, 1]
  virtual std::pair<double, double> normalization_bounds() const = 0;
};

// Analytic optimal predictor for x ~ N(mu0, sigma0^2 I) in normalized units:
// the corrupted marginal is N(sqrt(g) mu0, (g sigma0^2 + 1 - g) I), so
// eps_hat(z, t) = sqrt(1-g) (z - sqrt(g) mu0) / (g sigma0^2 + 1 - g).
class GaussianOraclePrior : public EpsilonPredictor {
 public:
  GaussianOraclePrior(Field2D mean, double variance, double v_lo = 1500.0, double v_hi = 4500.0);

  Field2D predict(const Field2D& z, int t, const NoiseSchedule& sched) const override;
  std::pair<double, double> normalization_bounds() const override { return {v_lo_, v_hi_}; }

  const Field2D& mean() const { return mean_; }
  double variance() const { return variance_; }

 private:
  Field2D mean_;
  double variance_;
  double v_lo_, v_hi_;
};

Field2D predict_oracle(const GaussianOraclePrior& p, const Field2D& z, int t,
                       const NoiseSchedule& sched);

// Small fully-convolutional denoiser with a sinusoidal time embedding:
// conv stem, residual block, 2x downsample to doubled width, two residual
// blocks, 2x upsample with an encoder skip, residual block, conv head, plus
// an identity skip from the input. Works on any field shape. Reverse-mode
// gradients are hand-written over the closed op set (3x3 convolution,
// affine, SiLU, nearest-neighbor resample, per-channel time bias).
class TinyDenoiser : public EpsilonPredictor {
 public:
  explicit TinyDenoiser(uint64_t seed = 0, int emb_dim = 32, int base_width = 8);

  Field2D predict(const Field2D& z, int t, const NoiseSchedule& sched) const override;
  std::pair<double, double> normalization_bounds() const override { return {v_lo_, v_hi_}; }
  void set_normalization_bounds(double v_lo, double v_hi);

  int emb_dim() const { return emb_dim_; }
  int base_width() const { return base_; }
  size_t parameter_count() const { return params_.size(); }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // layout descriptor, hashed into the serialization manifest
  std::string architecture_id() const;

  // sum over cells of (eps_hat(x_t, t) - eps)^2; accumulates d(loss)/d(params)
  // into grad (which must have parameter_count() entries)
  double item_loss_grad(const Field2D& x_t, int t, const Field2D& eps,
                        std::vector<double>& grad) const;

 private:
  int emb_dim_, base_;
  double v_lo_ = 1500.0, v_hi_ = 4500.0;
  std::vector<double> params_;
};

struct TrainConfig {
  int iterations = 2000;
  int batch_size = 16;
  double learning_rate = 2e-4;
  uint64_t seed = 0;
  ScheduleParams schedule{};
  double v_lo = 1500.0, v_hi = 4500.0;
};

struct TrainReport {
  std::vector<double> loss_curve;  // one entry per iteration
  bool diverged = false;
  int diverged_at = -1;
};

// Mean over the batch of per-item summed squared error between the sampled
// noise and the prediction; each item draws t ~ U{1..T} and eps ~ N(0, I).
double ddpm_loss(const EpsilonPredictor& pred, const std::vector<Field2D>& batch,
                 const NoiseSchedule& sched, Rng& rng);

// Same sampling, plus the exact parameter gradient (overwrites grad).
double ddpm_loss_with_grad(const TinyDenoiser& model, const std::vector<Field2D>& batch,
                           const NoiseSchedule& sched, Rng& rng, std::vector<double>& grad);

// Adam on ddpm_loss over batches drawn from the dataset. Deterministic given
// cfg.seed. Stops early (diverged flag) when the loss stays above 10x the
// initial loss for 100 consecutive iterations.
TrainReport train_ddpm(TinyDenoiser& model, const std::vector<VelocityModel>& dataset,
                       const TrainConfig& cfg);

// Ancestral reverse-diffusion chain from pure noise; the result is clipped to
// [-1, 1] and de-normalized through the predictor's bounds.
Field2D sample_unconditional(const EpsilonPredictor& pred, const NoiseSchedule& sched, int ny,
                             int nx, Rng& rng);

// <prefix>.rdq holds the flat parameter vector; <prefix>.json the manifest
// (architecture hash, normalization bounds, schedule parameters).
void save_denoiser(const TinyDenoiser& model, const ScheduleParams& sp,
                   const std::string& path_prefix);
TinyDenoiser load_denoiser(const std::string& path_prefix, ScheduleParams* sp_out = nullptr);

}  // namespace redfwi
