#include "coldstart/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coldstart/errors.hpp"

namespace coldstart::nn {

namespace {
constexpr double kNormEps = 1e-5;

void require(bool ok, const char* msg) {
  if (!ok) throw ShapeError(msg);
}
}  // namespace

ConvParams ConvParams::make(int in_channels, int out_channels, int kernel_width,
                            int dilation) {
  ConvParams p;
  p.in_channels = in_channels;
  p.out_channels = out_channels;
  p.kernel_width = kernel_width;
  p.dilation = dilation;
  p.weight.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel_width, 0.0);
  p.bias.assign(static_cast<std::size_t>(out_channels), 0.0);
  p.validate();
  return p;
}

void ConvParams::validate() const {
  require(in_channels > 0 && out_channels > 0, "ConvParams: channel counts must be positive");
  require(kernel_width >= 1, "ConvParams: kernel width must be >= 1");
  require(dilation >= 1, "ConvParams: dilation must be >= 1");
  require(weight.size() ==
              static_cast<std::size_t>(out_channels) * in_channels * kernel_width,
          "ConvParams: weight size mismatch");
  require(bias.size() == static_cast<std::size_t>(out_channels),
          "ConvParams: bias size mismatch");
}

Grid conv1d_causal(const Grid& x, const ConvParams& p) {
  p.validate();
  require(x.channels() == p.in_channels, "conv1d_causal: input channel mismatch");
  const int T = x.time();
  Grid y(p.out_channels, T);
  for (int o = 0; o < p.out_channels; ++o) {
    double* yo = y.channel(o);
    const double b = p.bias[o];
    for (int t = 0; t < T; ++t) yo[t] = b;
    for (int i = 0; i < p.in_channels; ++i) {
      const double* xi = x.channel(i);
      for (int k = 0; k < p.kernel_width; ++k) {
        const double w = p.w(o, i, k);
        if (w == 0.0) continue;
        const int shift = k * p.dilation;
        for (int t = shift; t < T; ++t) yo[t] += w * xi[t - shift];
      }
    }
  }
  debug_check_finite(y, "conv1d_causal");
  return y;
}

ConvGrads conv1d_causal_grad(const Grid& x, const ConvParams& p, const Grid& upstream) {
  p.validate();
  require(x.channels() == p.in_channels, "conv1d_causal_grad: input channel mismatch");
  require(upstream.channels() == p.out_channels && upstream.time() == x.time(),
          "conv1d_causal_grad: upstream shape mismatch");
  const int T = x.time();
  ConvGrads g;
  g.input = Grid(p.in_channels, T);
  g.weight.assign(p.weight.size(), 0.0);
  g.bias.assign(p.bias.size(), 0.0);
  for (int o = 0; o < p.out_channels; ++o) {
    const double* uo = upstream.channel(o);
    double acc = 0.0;
    for (int t = 0; t < T; ++t) acc += uo[t];
    g.bias[o] = acc;
    for (int i = 0; i < p.in_channels; ++i) {
      const double* xi = x.channel(i);
      double* gi = g.input.channel(i);
      for (int k = 0; k < p.kernel_width; ++k) {
        const int shift = k * p.dilation;
        const double w = p.w(o, i, k);
        double gw = 0.0;
        for (int t = shift; t < T; ++t) {
          gw += uo[t] * xi[t - shift];
          gi[t - shift] += w * uo[t];
        }
        g.weight[(static_cast<std::size_t>(o) * p.in_channels + i) * p.kernel_width + k] += gw;
      }
    }
  }
  debug_check_finite(g.input, "conv1d_causal_grad");
  return g;
}

Grid relu(const Grid& x) {
  Grid y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Grid relu_grad(const Grid& x, const Grid& upstream) {
  require(x.channels() == upstream.channels() && x.time() == upstream.time(),
          "relu_grad: shape mismatch");
  Grid g(x.channels(), x.time());
  auto xd = x.data();
  auto ud = upstream.data();
  auto gd = g.data();
  for (std::size_t i = 0; i < xd.size(); ++i) gd[i] = xd[i] > 0.0 ? ud[i] : 0.0;
  return g;
}

NormParams NormParams::make(int channels) {
  NormParams p;
  p.gain.assign(static_cast<std::size_t>(channels), 1.0);
  p.offset.assign(static_cast<std::size_t>(channels), 0.0);
  return p;
}

Grid channel_norm(const Grid& x, const NormParams& p, NormCache* cache) {
  const int C = x.channels();
  const int T = x.time();
  require(p.gain.size() == static_cast<std::size_t>(C) &&
              p.offset.size() == static_cast<std::size_t>(C),
          "channel_norm: parameter size mismatch");
  Grid y(C, T);
  Grid normalized(C, T);
  std::vector<double> inv_std(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    double mean = 0.0;
    for (int c = 0; c < C; ++c) mean += x.at(c, t);
    mean /= C;
    double var = 0.0;
    for (int c = 0; c < C; ++c) {
      const double d = x.at(c, t) - mean;
      var += d * d;
    }
    var /= C;
    const double inv = 1.0 / std::sqrt(var + kNormEps);
    inv_std[static_cast<std::size_t>(t)] = inv;
    for (int c = 0; c < C; ++c) {
      const double n = (x.at(c, t) - mean) * inv;
      normalized.at(c, t) = n;
      y.at(c, t) = p.gain[c] * n + p.offset[c];
    }
  }
  debug_check_finite(y, "channel_norm");
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

NormGrads channel_norm_grad(const Grid& x, const NormParams& p, const NormCache& cache,
                            const Grid& upstream) {
  const int C = x.channels();
  const int T = x.time();
  require(upstream.channels() == C && upstream.time() == T,
          "channel_norm_grad: upstream shape mismatch");
  require(cache.normalized.channels() == C && cache.normalized.time() == T &&
              cache.inv_std.size() == static_cast<std::size_t>(T),
          "channel_norm_grad: cache shape mismatch");
  NormGrads g;
  g.input = Grid(C, T);
  g.gain.assign(static_cast<std::size_t>(C), 0.0);
  g.offset.assign(static_cast<std::size_t>(C), 0.0);
  for (int t = 0; t < T; ++t) {
    const double inv = cache.inv_std[static_cast<std::size_t>(t)];
    double sum_dn = 0.0;
    double sum_dn_n = 0.0;
    for (int c = 0; c < C; ++c) {
      const double u = upstream.at(c, t);
      const double n = cache.normalized.at(c, t);
      g.gain[c] += u * n;
      g.offset[c] += u;
      const double dn = u * p.gain[c];
      sum_dn += dn;
      sum_dn_n += dn * n;
    }
    // dx = inv * (dn - mean(dn) - n * mean(dn * n))
    for (int c = 0; c < C; ++c) {
      const double dn = upstream.at(c, t) * p.gain[c];
      const double n = cache.normalized.at(c, t);
      g.input.at(c, t) = inv * (dn - sum_dn / C - n * (sum_dn_n / C));
    }
  }
  debug_check_finite(g.input, "channel_norm_grad");
  return g;
}

ResidualCell ResidualCell::make(int in_channels, int out_channels, int kernel_width,
                                int dilation) {
  ResidualCell cell;
  cell.conv1 = ConvParams::make(in_channels, out_channels, kernel_width, dilation);
  cell.norm1 = NormParams::make(out_channels);
  cell.conv2 = ConvParams::make(out_channels, out_channels, kernel_width, dilation);
  cell.norm2 = NormParams::make(out_channels);
  if (in_channels != out_channels) {
    cell.skip = ConvParams::make(in_channels, out_channels, 1, 1);
  }
  return cell;
}

std::size_t ResidualCell::param_count() const {
  std::size_t n = conv1.param_count() + conv2.param_count() + norm1.gain.size() +
                  norm1.offset.size() + norm2.gain.size() + norm2.offset.size();
  if (skip) n += skip->param_count();
  return n;
}

void ResidualCell::validate() const {
  conv1.validate();
  conv2.validate();
  require(conv1.out_channels == conv2.in_channels, "ResidualCell: stage channel mismatch");
  require(skip.has_value() == (conv1.in_channels != conv2.out_channels),
          "ResidualCell: skip projection present iff channel counts differ");
  if (skip) {
    skip->validate();
    require(skip->in_channels == conv1.in_channels &&
                skip->out_channels == conv2.out_channels && skip->kernel_width == 1,
            "ResidualCell: skip projection shape mismatch");
  }
}

Grid residual_cell_forward(const Grid& x, const ResidualCell& cell, CellCache* cache) {
  cell.validate();
  require(x.channels() == cell.in_channels(), "residual_cell_forward: input channels");
  CellCache local;
  CellCache& c = cache ? *cache : local;
  c.a1 = conv1d_causal(x, cell.conv1);
  c.n1 = channel_norm(c.a1, cell.norm1, &c.nc1);
  c.r1 = relu(c.n1);
  c.a2 = conv1d_causal(c.r1, cell.conv2);
  c.n2 = channel_norm(c.a2, cell.norm2, &c.nc2);
  Grid y = relu(c.n2);
  if (cell.skip) {
    const Grid s = conv1d_causal(x, *cell.skip);
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += s.data()[i];
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += x.data()[i];
  }
  debug_check_finite(y, "residual_cell_forward");
  return y;
}

CellGrads residual_cell_grad(const Grid& x, const ResidualCell& cell,
                             const CellCache& cache, const Grid& upstream) {
  cell.validate();
  require(upstream.channels() == cell.out_channels() && upstream.time() == x.time(),
          "residual_cell_grad: upstream shape mismatch");
  CellGrads g;
  const Grid dn2 = relu_grad(cache.n2, upstream);
  NormGrads ng2 = channel_norm_grad(cache.a2, cell.norm2, cache.nc2, dn2);
  ConvGrads cg2 = conv1d_causal_grad(cache.r1, cell.conv2, ng2.input);
  const Grid dn1 = relu_grad(cache.n1, cg2.input);
  NormGrads ng1 = channel_norm_grad(cache.a1, cell.norm1, cache.nc1, dn1);
  ConvGrads cg1 = conv1d_causal_grad(x, cell.conv1, ng1.input);

  g.input = std::move(cg1.input);
  if (cell.skip) {
    ConvGrads sg = conv1d_causal_grad(x, *cell.skip, upstream);
    for (std::size_t i = 0; i < g.input.size(); ++i) g.input.data()[i] += sg.input.data()[i];
    g.params.skip_w = std::move(sg.weight);
    g.params.skip_b = std::move(sg.bias);
  } else {
    for (std::size_t i = 0; i < g.input.size(); ++i) g.input.data()[i] += upstream.data()[i];
  }
  g.params.conv1_w = std::move(cg1.weight);
  g.params.conv1_b = std::move(cg1.bias);
  g.params.norm1_gain = std::move(ng1.gain);
  g.params.norm1_offset = std::move(ng1.offset);
  g.params.conv2_w = std::move(cg2.weight);
  g.params.conv2_b = std::move(cg2.bias);
  g.params.norm2_gain = std::move(ng2.gain);
  g.params.norm2_offset = std::move(ng2.offset);
  return g;
}

AdamState AdamState::make(std::size_t n_params) {
  AdamState s;
  s.m.assign(n_params, 0.0);
  s.v.assign(n_params, 0.0);
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: size mismatch");
  }
  for (double gv : grads) {
    if (!std::isfinite(gv)) throw TrainError("adam_step: non-finite gradient");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

GradCheckReport grad_check(const std::function<double()>& loss, std::span<double> params,
                           std::span<const double> analytic, double fd_epsilon) {
  if (params.size() != analytic.size()) throw ShapeError("grad_check: size mismatch");
  GradCheckReport report;
  report.n_params = params.size();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + fd_epsilon;
    const double up = loss();
    params[i] = saved - fd_epsilon;
    const double down = loss();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * fd_epsilon);
    const double diff = std::abs(analytic[i] - numeric);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    const double rel = diff / scale;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
  }
  return report;
}

void he_uniform_init(std::span<double> weights, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / std::max(1, fan_in));
  for (double& w : weights) w = rng.uniform(-bound, bound);
}

}  // namespace coldstart::nn
