#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "coldstart/grid.hpp"
#include "coldstart/rng.hpp"

namespace coldstart::nn {

/// Parameters of one dilated causal 1-D convolution.
/// weight layout: [out_channel][in_channel][tap], tap 0 is the current time
/// step, tap k reads dilation*k steps into the past.
struct ConvParams {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_width = 1;
  int dilation = 1;
  std::vector<double> weight;
  std::vector<double> bias;

  static ConvParams make(int in_channels, int out_channels, int kernel_width,
                         int dilation);

  double& w(int o, int i, int k) {
    return weight[(static_cast<std::size_t>(o) * in_channels + i) * kernel_width + k];
  }
  double w(int o, int i, int k) const {
    return weight[(static_cast<std::size_t>(o) * in_channels + i) * kernel_width + k];
  }

  std::size_t param_count() const { return weight.size() + bias.size(); }
  void validate() const;
};

/// y[o][t] = bias[o] + sum_{i,k} w[o][i][k] * x[i][t - k*dilation]
/// with implicit left zero padding; output length equals input length, so
/// y[t] never reads anything newer than x[t].
Grid conv1d_causal(const Grid& x, const ConvParams& p);

struct ConvGrads {
  Grid input;
  std::vector<double> weight;
  std::vector<double> bias;
};
ConvGrads conv1d_causal_grad(const Grid& x, const ConvParams& p, const Grid& upstream);

Grid relu(const Grid& x);
/// dL/dx given the relu *input* x and upstream dL/dy.
Grid relu_grad(const Grid& x, const Grid& upstream);

/// Per-channel affine applied after normalization.
struct NormParams {
  std::vector<double> gain;
  std::vector<double> offset;
  static NormParams make(int channels);
};

struct NormCache {
  Grid normalized;              // pre-affine values
  std::vector<double> inv_std;  // one per time step
};

/// Normalizes across channels independently at each time step, then applies
/// the per-channel gain/offset. Touching only one time column keeps the op
/// causal by construction.
Grid channel_norm(const Grid& x, const NormParams& p, NormCache* cache = nullptr);

struct NormGrads {
  Grid input;
  std::vector<double> gain;
  std::vector<double> offset;
};
NormGrads channel_norm_grad(const Grid& x, const NormParams& p, const NormCache& cache,
                            const Grid& upstream);

/// Two (conv -> norm -> relu) stages plus a skip path; the skip is a 1x1
/// projection exactly when in/out channel counts differ.
struct ResidualCell {
  ConvParams conv1;
  NormParams norm1;
  ConvParams conv2;
  NormParams norm2;
  std::optional<ConvParams> skip;

  static ResidualCell make(int in_channels, int out_channels, int kernel_width,
                           int dilation);
  int in_channels() const { return conv1.in_channels; }
  int out_channels() const { return conv2.out_channels; }
  std::size_t param_count() const;
  void validate() const;
};

struct CellCache {
  Grid a1;  // conv1 output
  NormCache nc1;
  Grid n1;  // norm1 output (relu input)
  Grid r1;  // relu output, conv2 input
  Grid a2;  // conv2 output
  NormCache nc2;
  Grid n2;  // norm2 output (relu input)
};

struct CellParamGrads {
  std::vector<double> conv1_w, conv1_b, norm1_gain, norm1_offset;
  std::vector<double> conv2_w, conv2_b, norm2_gain, norm2_offset;
  std::vector<double> skip_w, skip_b;  // empty when the cell has no skip conv
};

struct CellGrads {
  Grid input;
  CellParamGrads params;
};

Grid residual_cell_forward(const Grid& x, const ResidualCell& cell,
                           CellCache* cache = nullptr);
CellGrads residual_cell_grad(const Grid& x, const ResidualCell& cell,
                             const CellCache& cache, const Grid& upstream);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  static AdamState make(std::size_t n_params);
};

/// One Adam update in place. Throws TrainError on non-finite gradients.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const AdamConfig& cfg);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t n_params = 0;
  bool pass(double tol) const { return max_rel_error <= tol; }
};

/// Central finite differences of `loss` against `analytic`, perturbing the
/// live parameter span in place (restored after each probe).
GradCheckReport grad_check(const std::function<double()>& loss, std::span<double> params,
                           std::span<const double> analytic, double fd_epsilon = 1e-5);

/// Scaled-uniform init, bound sqrt(6 / fan_in).
void he_uniform_init(std::span<double> weights, int fan_in, Rng& rng);

}  // namespace coldstart::nn
