#include "redfwi/prior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "redfwi/errors.hpp"
#include "redfwi/gridfile.hpp"
#include "redfwi/optim.hpp"

namespace redfwi {

Field2D normalize_model(const Field2D& v, double v_lo, double v_hi) {
  if (!(v_hi > v_lo)) throw ConfigError("normalize: v_hi must exceed v_lo");
  Field2D x(v.ny(), v.nx());
  double s = 2.0 / (v_hi - v_lo);
  for (size_t k = 0; k < v.size(); ++k) x[k] = (v[k] - v_lo) * s - 1.0;
  return x;
}

Field2D denormalize_model(const Field2D& x, double v_lo, double v_hi) {
  if (!(v_hi > v_lo)) throw ConfigError("denormalize: v_hi must exceed v_lo");
  Field2D v(x.ny(), x.nx());
  double s = 0.5 * (v_hi - v_lo);
  for (size_t k = 0; k < x.size(); ++k) v[k] = v_lo + (x[k] + 1.0) * s;
  return v;
}

GaussianOraclePrior::GaussianOraclePrior(Field2D mean, double variance, double v_lo, double v_hi)
    : mean_(std::move(mean)), variance_(variance), v_lo_(v_lo), v_hi_(v_hi) {
  if (variance < 0.0) throw ConfigError("oracle: variance must be >= 0");
  if (!(v_hi > v_lo)) throw ConfigError("oracle: v_hi must exceed v_lo");
}

Field2D GaussianOraclePrior::predict(const Field2D& z, int t, const NoiseSchedule& sched) const {
  require_same_shape(z, mean_, "oracle predict");
  double g = sched.gamma_at(t);
  double sg = std::sqrt(g), s1 = std::sqrt(1.0 - g);
  double denom = g * variance_ + 1.0 - g;
  Field2D out(z.ny(), z.nx());
  for (size_t k = 0; k < z.size(); ++k) out[k] = s1 * (z[k] - sg * mean_[k]) / denom;
  return out;
}

Field2D predict_oracle(const GaussianOraclePrior& p, const Field2D& z, int t,
                       const NoiseSchedule& sched) {
  return p.predict(z, t, sched);
}

// ---------------------------------------------------------------------------
// denoiser internals: channels-major tensors and hand-differentiated ops
// ---------------------------------------------------------------------------

namespace {

struct T3 {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;
  T3() = default;
  T3(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {}
  double* ch(int ci) { return v.data() + static_cast<size_t>(ci) * h * w; }
  const double* ch(int ci) const { return v.data() + static_cast<size_t>(ci) * h * w; }
};

struct Conv {  // 3x3, zero-padded, stride 1
  int cin = 0, cout = 0;
  size_t w = 0, b = 0;  // offsets into the flat parameter vector
};
struct Aff {
  int nin = 0, nout = 0;
  size_t w = 0, b = 0;
};

struct Net {
  int E = 0, c0 = 0, c1 = 0;
  Aff t1, t2;              // time-embedding MLP
  Conv stem;               // 1 -> c0
  Conv r0a, r0b;           // residual block, c0
  Aff tb0;
  Conv down;               // c0 -> c1, after 2x nearest decimation
  Conv r1a, r1b, r2a, r2b; // residual blocks, c1
  Aff tb1, tb2;
  Conv up;                 // c1 -> c0, after 2x nearest replication
  Conv r3a, r3b;           // residual block, c0
  Aff tb3;
  Conv head;               // c0 -> 1
  size_t total = 0;
};

Net make_net(int E, int base) {
  Net n;
  n.E = E;
  n.c0 = base;
  n.c1 = 2 * base;
  size_t off = 0;
  auto conv = [&off](int cin, int cout) {
    Conv c{cin, cout, off, off + static_cast<size_t>(cout) * cin * 9};
    off += static_cast<size_t>(cout) * cin * 9 + cout;
    return c;
  };
  auto aff = [&off](int nin, int nout) {
    Aff a{nin, nout, off, off + static_cast<size_t>(nout) * nin};
    off += static_cast<size_t>(nout) * nin + nout;
    return a;
  };
  n.t1 = aff(E, E);
  n.t2 = aff(E, E);
  n.stem = conv(1, n.c0);
  n.r0a = conv(n.c0, n.c0);
  n.tb0 = aff(E, n.c0);
  n.r0b = conv(n.c0, n.c0);
  n.down = conv(n.c0, n.c1);
  n.r1a = conv(n.c1, n.c1);
  n.tb1 = aff(E, n.c1);
  n.r1b = conv(n.c1, n.c1);
  n.r2a = conv(n.c1, n.c1);
  n.tb2 = aff(E, n.c1);
  n.r2b = conv(n.c1, n.c1);
  n.up = conv(n.c1, n.c0);
  n.r3a = conv(n.c0, n.c0);
  n.tb3 = aff(E, n.c0);
  n.r3b = conv(n.c0, n.c0);
  n.head = conv(n.c0, 1);
  n.total = off;
  return n;
}

void conv3x3(const double* P, const Conv& cv, const T3& in, T3& out) {
  const int h = in.h, w = in.w, hw = h * w;
  out = T3(cv.cout, h, w);
  for (int co = 0; co < cv.cout; ++co) {
    double* o = out.ch(co);
    double bias = P[cv.b + co];
    for (int k = 0; k < hw; ++k) o[k] = bias;
    for (int ci = 0; ci < cv.cin; ++ci) {
      const double* x = in.ch(ci);
      const double* W = P + cv.w + (static_cast<size_t>(co) * cv.cin + ci) * 9;
      for (int di = -1; di <= 1; ++di) {
        int i0 = std::max(0, -di), i1 = h - std::max(0, di);
        for (int dj = -1; dj <= 1; ++dj) {
          double wv = W[(di + 1) * 3 + (dj + 1)];
          int j0 = std::max(0, -dj), j1 = w - std::max(0, dj);
          for (int i = i0; i < i1; ++i) {
            double* orow = o + static_cast<size_t>(i) * w;
            const double* xrow = x + static_cast<size_t>(i + di) * w + dj;
            for (int j = j0; j < j1; ++j) orow[j] += wv * xrow[j];
          }
        }
      }
    }
  }
}

void conv3x3_bwd(const double* P, const Conv& cv, const T3& in, const T3& gout, T3& gin,
                 double* G) {
  const int h = in.h, w = in.w, hw = h * w;
  gin = T3(cv.cin, h, w);
  for (int co = 0; co < cv.cout; ++co) {
    const double* go = gout.ch(co);
    double gb = 0.0;
    for (int k = 0; k < hw; ++k) gb += go[k];
    G[cv.b + co] += gb;
    for (int ci = 0; ci < cv.cin; ++ci) {
      const double* x = in.ch(ci);
      double* gi = gin.ch(ci);
      const double* W = P + cv.w + (static_cast<size_t>(co) * cv.cin + ci) * 9;
      double* GW = G + cv.w + (static_cast<size_t>(co) * cv.cin + ci) * 9;
      for (int di = -1; di <= 1; ++di) {
        int i0 = std::max(0, -di), i1 = h - std::max(0, di);
        for (int dj = -1; dj <= 1; ++dj) {
          double wv = W[(di + 1) * 3 + (dj + 1)];
          double gw = 0.0;
          int j0 = std::max(0, -dj), j1 = w - std::max(0, dj);
          for (int i = i0; i < i1; ++i) {
            const double* gorow = go + static_cast<size_t>(i) * w;
            const double* xrow = x + static_cast<size_t>(i + di) * w + dj;
            double* girow = gi + static_cast<size_t>(i + di) * w + dj;
            for (int j = j0; j < j1; ++j) {
              gw += gorow[j] * xrow[j];
              girow[j] += wv * gorow[j];
            }
          }
          GW[(di + 1) * 3 + (dj + 1)] += gw;
        }
      }
    }
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void silu(const T3& in, T3& out) {
  out = T3(in.c, in.h, in.w);
  for (size_t k = 0; k < in.v.size(); ++k) out.v[k] = in.v[k] * sigmoid(in.v[k]);
}

void silu_bwd(const T3& pre, const T3& gout, T3& gin) {
  gin = T3(pre.c, pre.h, pre.w);
  for (size_t k = 0; k < pre.v.size(); ++k) {
    double s = sigmoid(pre.v[k]);
    gin.v[k] = gout.v[k] * s * (1.0 + pre.v[k] * (1.0 - s));
  }
}

// decimate by 2 (keep even indices)
void down2(const T3& in, T3& out) {
  int hh = (in.h + 1) / 2, wh = (in.w + 1) / 2;
  out = T3(in.c, hh, wh);
  for (int c = 0; c < in.c; ++c) {
    const double* x = in.ch(c);
    double* o = out.ch(c);
    for (int i = 0; i < hh; ++i)
      for (int j = 0; j < wh; ++j)
        o[static_cast<size_t>(i) * wh + j] = x[static_cast<size_t>(2 * i) * in.w + 2 * j];
  }
}

void down2_bwd(const T3& gout, int h, int w, T3& gin) {
  gin = T3(gout.c, h, w);
  for (int c = 0; c < gout.c; ++c) {
    const double* go = gout.ch(c);
    double* gi = gin.ch(c);
    for (int i = 0; i < gout.h; ++i)
      for (int j = 0; j < gout.w; ++j)
        gi[static_cast<size_t>(2 * i) * w + 2 * j] = go[static_cast<size_t>(i) * gout.w + j];
  }
}

// nearest-neighbor replication back to (H, W)
void up2(const T3& in, int H, int W, T3& out) {
  out = T3(in.c, H, W);
  for (int c = 0; c < in.c; ++c) {
    const double* x = in.ch(c);
    double* o = out.ch(c);
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j)
        o[static_cast<size_t>(i) * W + j] = x[static_cast<size_t>(i / 2) * in.w + j / 2];
  }
}

void up2_bwd(const T3& gout, int hh, int wh, T3& gin) {
  gin = T3(gout.c, hh, wh);
  for (int c = 0; c < gout.c; ++c) {
    const double* go = gout.ch(c);
    double* gi = gin.ch(c);
    for (int i = 0; i < gout.h; ++i)
      for (int j = 0; j < gout.w; ++j)
        gi[static_cast<size_t>(i / 2) * wh + j / 2] += go[static_cast<size_t>(i) * gout.w + j];
  }
}

void affine(const double* P, const Aff& a, const std::vector<double>& in,
            std::vector<double>& out) {
  out.assign(a.nout, 0.0);
  for (int o = 0; o < a.nout; ++o) {
    double s = P[a.b + o];
    const double* W = P + a.w + static_cast<size_t>(o) * a.nin;
    for (int i = 0; i < a.nin; ++i) s += W[i] * in[i];
    out[o] = s;
  }
}

void affine_bwd(const double* P, const Aff& a, const std::vector<double>& in,
                const std::vector<double>& gout, std::vector<double>& gin, double* G) {
  gin.assign(a.nin, 0.0);
  for (int o = 0; o < a.nout; ++o) {
    G[a.b + o] += gout[o];
    const double* W = P + a.w + static_cast<size_t>(o) * a.nin;
    double* GW = G + a.w + static_cast<size_t>(o) * a.nin;
    for (int i = 0; i < a.nin; ++i) {
      GW[i] += gout[o] * in[i];
      gin[i] += W[i] * gout[o];
    }
  }
}

std::vector<double> time_embed(int t, int E) {
  int half = E / 2;
  std::vector<double> e(E);
  for (int k = 0; k < half; ++k) {
    double freq = std::exp(-std::log(10000.0) * k / (half > 1 ? half - 1 : 1));
    e[k] = std::sin(t * freq);
    e[half + k] = std::cos(t * freq);
  }
  return e;
}

struct RbTape {
  T3 pre, act, out;  // post-bias pre-activation, SiLU output, block output
};

void rb_forward(const double* P, const Conv& ca, const Aff& tb, const Conv& cb, const T3& z,
                const std::vector<double>& temb, RbTape& tp) {
  conv3x3(P, ca, z, tp.pre);
  std::vector<double> bias;
  affine(P, tb, temb, bias);
  const int hw = tp.pre.h * tp.pre.w;
  for (int c = 0; c < tp.pre.c; ++c) {
    double* p = tp.pre.ch(c);
    for (int k = 0; k < hw; ++k) p[k] += bias[c];
  }
  silu(tp.pre, tp.act);
  conv3x3(P, cb, tp.act, tp.out);
  for (size_t k = 0; k < tp.out.v.size(); ++k) tp.out.v[k] += z.v[k];
}

void rb_backward(const double* P, const Conv& ca, const Aff& tb, const Conv& cb, const T3& z,
                 const std::vector<double>& temb, const RbTape& tp, const T3& gout, T3& gz,
                 std::vector<double>& g_temb, double* G) {
  T3 gact, gpre;
  conv3x3_bwd(P, cb, tp.act, gout, gact, G);
  silu_bwd(tp.pre, gact, gpre);
  std::vector<double> gbias(tp.pre.c, 0.0);
  const int hw = tp.pre.h * tp.pre.w;
  for (int c = 0; c < tp.pre.c; ++c) {
    const double* p = gpre.ch(c);
    double s = 0.0;
    for (int k = 0; k < hw; ++k) s += p[k];
    gbias[c] = s;
  }
  std::vector<double> gt;
  affine_bwd(P, tb, temb, gbias, gt, G);
  for (int k = 0; k < static_cast<int>(g_temb.size()); ++k) g_temb[k] += gt[k];
  conv3x3_bwd(P, ca, z, gpre, gz, G);
  for (size_t k = 0; k < gz.v.size(); ++k) gz.v[k] += gout.v[k];
}

struct Tape {
  std::vector<double> temb0, a1pre, a1act, temb;
  T3 x, h0;
  RbTape rb0;
  T3 d0, h1;
  RbTape rb1, rb2;
  T3 u0, h2, m;
  RbTape rb3;
  T3 y;
};

T3 field_to_t3(const Field2D& f) {
  T3 x(1, f.ny(), f.nx());
  std::copy(f.vec().begin(), f.vec().end(), x.v.begin());
  return x;
}

void net_forward(const double* P, const Net& n, const Field2D& zf, int t, Tape& tp) {
  tp.x = field_to_t3(zf);
  tp.temb0 = time_embed(t, n.E);
  affine(P, n.t1, tp.temb0, tp.a1pre);
  tp.a1act.resize(n.E);
  for (int k = 0; k < n.E; ++k) tp.a1act[k] = tp.a1pre[k] * sigmoid(tp.a1pre[k]);
  affine(P, n.t2, tp.a1act, tp.temb);

  conv3x3(P, n.stem, tp.x, tp.h0);
  rb_forward(P, n.r0a, n.tb0, n.r0b, tp.h0, tp.temb, tp.rb0);
  down2(tp.rb0.out, tp.d0);
  conv3x3(P, n.down, tp.d0, tp.h1);
  rb_forward(P, n.r1a, n.tb1, n.r1b, tp.h1, tp.temb, tp.rb1);
  rb_forward(P, n.r2a, n.tb2, n.r2b, tp.rb1.out, tp.temb, tp.rb2);
  up2(tp.rb2.out, tp.x.h, tp.x.w, tp.u0);
  conv3x3(P, n.up, tp.u0, tp.h2);
  tp.m = tp.h2;
  for (size_t k = 0; k < tp.m.v.size(); ++k) tp.m.v[k] += tp.rb0.out.v[k];
  rb_forward(P, n.r3a, n.tb3, n.r3b, tp.m, tp.temb, tp.rb3);
  conv3x3(P, n.head, tp.rb3.out, tp.y);
}

void net_backward(const double* P, const Net& n, const Tape& tp, const T3& g_y, double* G) {
  T3 g_r3out, gm, gu0, g_r2out, g_r1out, g_h1, g_d0, g_r0out, g_h0, g_x;
  std::vector<double> g_temb(n.E, 0.0);
  conv3x3_bwd(P, n.head, tp.rb3.out, g_y, g_r3out, G);
  rb_backward(P, n.r3a, n.tb3, n.r3b, tp.m, tp.temb, tp.rb3, g_r3out, gm, g_temb, G);
  conv3x3_bwd(P, n.up, tp.u0, gm, gu0, G);
  up2_bwd(gu0, tp.rb2.out.h, tp.rb2.out.w, g_r2out);
  rb_backward(P, n.r2a, n.tb2, n.r2b, tp.rb1.out, tp.temb, tp.rb2, g_r2out, g_r1out, g_temb, G);
  rb_backward(P, n.r1a, n.tb1, n.r1b, tp.h1, tp.temb, tp.rb1, g_r1out, g_h1, g_temb, G);
  conv3x3_bwd(P, n.down, tp.d0, g_h1, g_d0, G);
  down2_bwd(g_d0, tp.rb0.out.h, tp.rb0.out.w, g_r0out);
  for (size_t k = 0; k < g_r0out.v.size(); ++k) g_r0out.v[k] += gm.v[k];  // encoder skip
  rb_backward(P, n.r0a, n.tb0, n.r0b, tp.h0, tp.temb, tp.rb0, g_r0out, g_h0, g_temb, G);
  conv3x3_bwd(P, n.stem, tp.x, g_h0, g_x, G);  // g_x: input gradient, unused

  std::vector<double> g_a1act, g_a1pre(n.E), g_temb0;
  affine_bwd(P, n.t2, tp.a1act, g_temb, g_a1act, G);
  for (int k = 0; k < n.E; ++k) {
    double s = sigmoid(tp.a1pre[k]);
    g_a1pre[k] = g_a1act[k] * s * (1.0 + tp.a1pre[k] * (1.0 - s));
  }
  affine_bwd(P, n.t1, tp.temb0, g_a1pre, g_temb0, G);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(const std::string& s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

}  // namespace

TinyDenoiser::TinyDenoiser(uint64_t seed, int emb_dim, int base_width)
    : emb_dim_(emb_dim), base_(base_width) {
  if (emb_dim < 2 || emb_dim % 2 != 0) throw ConfigError("denoiser: emb_dim must be even, >= 2");
  if (base_width < 1) throw ConfigError("denoiser: base_width must be >= 1");
  Net n = make_net(emb_dim_, base_);
  params_.assign(n.total, 0.0);
  Rng rng(seed);
  auto init_conv = [&](const Conv& c, double scale = 1.0) {
    double s = scale * std::sqrt(2.0 / (c.cin * 9));
    for (size_t k = 0; k < static_cast<size_t>(c.cout) * c.cin * 9; ++k)
      params_[c.w + k] = s * rng.normal();
  };
  auto init_aff = [&](const Aff& a) {
    double s = std::sqrt(1.0 / a.nin);
    for (size_t k = 0; k < static_cast<size_t>(a.nout) * a.nin; ++k)
      params_[a.w + k] = s * rng.normal();
  };
  init_aff(n.t1);
  init_aff(n.t2);
  for (const Conv* c :
       {&n.stem, &n.r0a, &n.r0b, &n.down, &n.r1a, &n.r1b, &n.r2a, &n.r2b, &n.up, &n.r3a, &n.r3b})
    init_conv(*c);
  init_conv(n.head, 0.1);  // keep the initial prediction near the input skip
  for (const Aff* a : {&n.tb0, &n.tb1, &n.tb2, &n.tb3}) init_aff(*a);
}

void TinyDenoiser::set_normalization_bounds(double v_lo, double v_hi) {
  if (!(v_hi > v_lo)) throw ConfigError("denoiser: v_hi must exceed v_lo");
  v_lo_ = v_lo;
  v_hi_ = v_hi;
}

std::string TinyDenoiser::architecture_id() const {
  std::ostringstream ss;
  ss << "tiny-denoiser/v1 emb=" << emb_dim_ << " base=" << base_ << " mults=1,2 params="
     << params_.size();
  return ss.str();
}

Field2D TinyDenoiser::predict(const Field2D& z, int t, const NoiseSchedule& sched) const {
  if (t < 1 || t > sched.T()) throw ContractError("denoiser predict: t out of range");
  if (z.ny() < 2 || z.nx() < 2) throw ContractError("denoiser predict: field too small");
  Net n = make_net(emb_dim_, base_);
  Tape tp;
  net_forward(params_.data(), n, z, t, tp);
  Field2D out(z.ny(), z.nx());
  for (size_t k = 0; k < out.size(); ++k) out[k] = tp.y.v[k] + z[k];  // input skip
  return out;
}

double TinyDenoiser::item_loss_grad(const Field2D& x_t, int t, const Field2D& eps,
                                    std::vector<double>& grad) const {
  require_same_shape(x_t, eps, "item_loss_grad");
  if (grad.size() != params_.size()) throw ContractError("item_loss_grad: bad gradient size");
  Net n = make_net(emb_dim_, base_);
  Tape tp;
  net_forward(params_.data(), n, x_t, t, tp);
  T3 g_y(1, x_t.ny(), x_t.nx());
  double loss = 0.0;
  for (size_t k = 0; k < x_t.size(); ++k) {
    double ehat = tp.y.v[k] + x_t[k];
    double d = ehat - eps[k];
    loss += d * d;
    g_y.v[k] = 2.0 * d;
  }
  net_backward(params_.data(), n, tp, g_y, grad.data());
  return loss;
}

double ddpm_loss(const EpsilonPredictor& pred, const std::vector<Field2D>& batch,
                 const NoiseSchedule& sched, Rng& rng) {
  if (batch.empty()) throw ContractError("ddpm_loss: empty batch");
  double total = 0.0;
  for (const Field2D& x : batch) {
    int t = rng.uniform_int(1, sched.T());
    Field2D eps = rng.normal_field(x.ny(), x.nx());
    double g = sched.gamma_at(t);
    double sg = std::sqrt(g), s1 = std::sqrt(1.0 - g);
    Field2D xt(x.ny(), x.nx());
    for (size_t k = 0; k < x.size(); ++k) xt[k] = sg * x[k] + s1 * eps[k];
    Field2D ehat = pred.predict(xt, t, sched);
    require_same_shape(ehat, x, "ddpm_loss");
    for (size_t k = 0; k < x.size(); ++k) {
      double d = ehat[k] - eps[k];
      total += d * d;
    }
  }
  double loss = total / batch.size();
  if (!std::isfinite(loss)) throw NumericalError("ddpm loss is not finite");
  return loss;
}

double ddpm_loss_with_grad(const TinyDenoiser& model, const std::vector<Field2D>& batch,
                           const NoiseSchedule& sched, Rng& rng, std::vector<double>& grad) {
  if (batch.empty()) throw ContractError("ddpm_loss: empty batch");
  grad.assign(model.parameter_count(), 0.0);
  double total = 0.0;
  for (const Field2D& x : batch) {
    int t = rng.uniform_int(1, sched.T());
    Field2D eps = rng.normal_field(x.ny(), x.nx());
    double g = sched.gamma_at(t);
    double sg = std::sqrt(g), s1 = std::sqrt(1.0 - g);
    Field2D xt(x.ny(), x.nx());
    for (size_t k = 0; k < x.size(); ++k) xt[k] = sg * x[k] + s1 * eps[k];
    total += model.item_loss_grad(xt, t, eps, grad);
  }
  double inv = 1.0 / batch.size();
  for (double& gk : grad) gk *= inv;
  double loss = total * inv;
  if (!std::isfinite(loss)) throw NumericalError("ddpm loss is not finite");
  return loss;
}

TrainReport train_ddpm(TinyDenoiser& model, const std::vector<VelocityModel>& dataset,
                       const TrainConfig& cfg) {
  if (dataset.size() < 10) throw ConfigError("train_ddpm: dataset needs at least 10 models");
  if (cfg.batch_size < 1) throw ConfigError("train_ddpm: batch_size must be >= 1");
  if (cfg.iterations < 0) throw ConfigError("train_ddpm: iterations must be >= 0");
  if (!(cfg.v_hi > cfg.v_lo)) throw ConfigError("train_ddpm: v_hi must exceed v_lo");
  std::vector<Field2D> norm;
  norm.reserve(dataset.size());
  for (const VelocityModel& m : dataset) {
    auto [lo, hi] = m.values.min_max();
    if (lo < cfg.v_lo || hi > cfg.v_hi)
      throw ConfigError("train_ddpm: dataset model outside [v_lo, v_hi]");
    norm.push_back(normalize_model(m.values, cfg.v_lo, cfg.v_hi));
  }
  model.set_normalization_bounds(cfg.v_lo, cfg.v_hi);
  NoiseSchedule sched = build_sigmoid_schedule(cfg.schedule);

  Rng rng(cfg.seed);
  AdamState st;
  st.init(model.parameter_count());
  TrainReport rep;
  std::vector<double> grad;
  std::vector<Field2D> batch;
  int high = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    batch.clear();
    for (int b = 0; b < cfg.batch_size; ++b)
      batch.push_back(norm[rng.uniform_int(0, static_cast<int>(norm.size()) - 1)]);
    double loss;
    try {
      loss = ddpm_loss_with_grad(model, batch, sched, rng, grad);
    } catch (const NumericalError&) {
      // a non-finite loss is divergence, reported rather than thrown
      rep.diverged = true;
      rep.diverged_at = it;
      break;
    }
    rep.loss_curve.push_back(loss);
    if (loss > 10.0 * rep.loss_curve.front()) {
      if (++high >= 100) {
        rep.diverged = true;
        rep.diverged_at = it;
        break;
      }
    } else {
      high = 0;
    }
    adam_step(model.parameters(), grad, st, cfg.learning_rate);
  }
  return rep;
}

Field2D sample_unconditional(const EpsilonPredictor& pred, const NoiseSchedule& sched, int ny,
                             int nx, Rng& rng) {
  if (ny < 1 || nx < 1) throw ConfigError("sample: field dimensions must be positive");
  Field2D x = rng.normal_field(ny, nx);
  for (int t = sched.T(); t >= 1; --t) {
    double g = sched.gamma_at(t);
    double gprev = t > 1 ? sched.gamma_at(t - 1) : 1.0;
    double alpha = g / gprev;
    Field2D ehat = pred.predict(x, t, sched);
    double c1 = 1.0 / std::sqrt(alpha);
    double c2 = (1.0 - alpha) / std::sqrt(1.0 - g);
    for (size_t k = 0; k < x.size(); ++k) x[k] = c1 * (x[k] - c2 * ehat[k]);
    if (t > 1) {
      double var = (1.0 - gprev) / (1.0 - g) * (1.0 - alpha);
      if (var > 0.0) {
        double sd = std::sqrt(var);
        for (size_t k = 0; k < x.size(); ++k) x[k] += sd * rng.normal();
      }
    }
  }
  clamp_inplace(x, -1.0, 1.0);
  auto [lo, hi] = pred.normalization_bounds();
  return denormalize_model(x, lo, hi);
}

void save_denoiser(const TinyDenoiser& model, const ScheduleParams& sp,
                   const std::string& path_prefix) {
  GridData gd;
  gd.dims = {static_cast<uint32_t>(model.parameter_count())};
  gd.values.assign(model.parameters().begin(), model.parameters().end());
  save_grid(path_prefix + ".rdq", gd);

  nlohmann::json j;
  j["architecture"] = model.architecture_id();
  j["architecture_hash"] = hash_hex(model.architecture_id());
  j["emb_dim"] = model.emb_dim();
  j["base_width"] = model.base_width();
  auto [lo, hi] = model.normalization_bounds();
  j["v_lo"] = lo;
  j["v_hi"] = hi;
  j["schedule"] = {{"T", sp.T},
                   {"start", sp.start},
                   {"end", sp.end},
                   {"tau", sp.tau},
                   {"gamma_min", sp.gamma_min}};
  std::ofstream f(path_prefix + ".json");
  if (!f) throw ResourceError("cannot write " + path_prefix + ".json");
  f << j.dump(2) << "\n";
}

TinyDenoiser load_denoiser(const std::string& path_prefix, ScheduleParams* sp_out) {
  std::ifstream f(path_prefix + ".json");
  if (!f) throw ResourceError("cannot open " + path_prefix + ".json");
  nlohmann::json j;
  try {
    f >> j;
    TinyDenoiser m(0, j.at("emb_dim").get<int>(), j.at("base_width").get<int>());
    if (j.at("architecture_hash").get<std::string>() != hash_hex(m.architecture_id()))
      throw FormatError("denoiser manifest: architecture hash mismatch");
    m.set_normalization_bounds(j.at("v_lo").get<double>(), j.at("v_hi").get<double>());
    GridData gd = load_grid(path_prefix + ".rdq");
    if (gd.values.size() != m.parameter_count())
      throw FormatError("denoiser parameters: count mismatch");
    std::copy(gd.values.begin(), gd.values.end(), m.parameters().begin());
    if (sp_out) {
      const auto& s = j.at("schedule");
      sp_out->T = s.at("T").get<int>();
      sp_out->start = s.at("start").get<double>();
      sp_out->end = s.at("end").get<double>();
      sp_out->tau = s.at("tau").get<double>();
      sp_out->gamma_min = s.at("gamma_min").get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("denoiser manifest: ") + e.what());
  }
}

}  // namespace redfwi
