#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coldstart/nn.hpp"
#include "coldstart/trace.hpp"

namespace coldstart::tcn {

/// Architecture knobs. Cell j of every block dilates by 2^(j+1), so the
/// dilation schedule starts at 2 and doubles; the premix layer is the
/// dilation-1 entry stage. With the default kernel width of 2 this makes
/// the receptive-field formula below exact.
struct TcnHyperParams {
  int n_blocks = 1;          // 1..2
  int cells_per_block = 3;   // 3..6
  int hidden_channels = 16;  // 16..256
  int kernel_width = 2;
  int horizon = 500;
  int context_length = 0;  // 0 means "use the receptive field"

  void validate() const;
  int context() const;
};

/// 1 + 4 * n_blocks * (kernel_width - 1) * (2^cells_per_block - 1): the
/// number of trailing context positions that can influence the forecast.
int receptive_field(const TcnHyperParams& hp);

enum class ForecastTarget { FunctionName, ArrivalTime };

/// Forecasts in one direct multi-horizon emission.
struct ForecastResult {
  ForecastTarget target = ForecastTarget::ArrivalTime;
  std::vector<double> values;  // denormalized target units (ids / gap minutes)
  std::vector<double> raw;     // untransformed head outputs
  long context_start = 0;      // series-index span the forecast conditioned on
  long context_end = 0;        // exclusive
};

/// Affine forecast head: raw[j] = Wh[j] . hidden_last + Wc . future_cov[:,j] + b[j].
/// The covariate projection Wc is shared across horizon steps.
struct HeadParams {
  int horizon = 0;
  int hidden_channels = 0;
  int future_cov_channels = 0;
  std::vector<double> w_hidden;  // horizon x hidden
  std::vector<double> w_cov;     // future_cov_channels
  std::vector<double> bias;      // horizon
};

enum class OutputTransform { Identity, Softplus };

double softplus(double x);
double sigmoid(double x);

struct TcnModel {
  TcnHyperParams hp;
  ForecastTarget target = ForecastTarget::ArrivalTime;
  OutputTransform transform = OutputTransform::Softplus;
  long vocab_size = 0;
  int value_channels = 1;
  int covariate_channels = 0;

  nn::ConvParams premix;  // 1x1 entry mix, input -> hidden
  std::vector<std::vector<nn::ResidualCell>> blocks;
  HeadParams head;

  int input_channels() const { return value_channels + covariate_channels; }
  std::size_t param_count() const;
  std::vector<double> flatten_params() const;
  void load_params(std::span<const double> flat);
  void validate() const;

  /// Model-space predictions (normalized units), one pass, no recursion.
  std::vector<double> predict(const nn::Grid& context, const nn::Grid& future_cov,
                              std::vector<double>* raw_out = nullptr) const;

  struct Cache {
    nn::Grid context;
    nn::Grid future_cov;
    nn::Grid premix_out;
    std::vector<nn::Grid> cell_inputs;  // input grid of every cell, in order
    std::vector<nn::CellCache> cell_caches;
    nn::Grid last_out;
    std::vector<double> raw;
    std::vector<double> transformed;
  };

  std::vector<double> forward_train(const nn::Grid& context, const nn::Grid& future_cov,
                                    Cache& cache) const;
  /// Accumulates (+=) parameter gradients into `flat_grads`, given
  /// dLoss/dPrediction in model space.
  void backward(const Cache& cache, std::span<const double> d_pred,
                std::span<double> flat_grads) const;
};

/// Deterministic construction; same (hp, vocab, seed, target) gives
/// byte-identical parameters.
TcnModel build_model(const TcnHyperParams& hp, long vocab_size, std::uint64_t seed,
                     ForecastTarget target = ForecastTarget::ArrivalTime);

// ---------------------------------------------------------------------------
// Series construction for the two pipeline modules.

inline constexpr int kCovariateChannels = 7;

/// Covariate order: func_id, owner_index, app_index, avg_exec_ms,
/// instance_count_so_far, minute_of_day, position_index.
using CovariateRow = std::array<double, kCovariateChannels>;

/// Which covariate channels are legitimately known for *future* steps at
/// forecast time. Function-name prediction may only see the position;
/// arrival-time prediction knows the (given or predicted) names and their
/// static metadata but not the future minute of day.
std::array<bool, kCovariateChannels> future_covariate_available(ForecastTarget target);

struct SeriesData {
  ForecastTarget target = ForecastTarget::ArrivalTime;
  std::vector<double> values;
  std::vector<CovariateRow> covariates;
  std::vector<double> arrival_minutes;  // one per dataset record
  long vocab_size = 0;

  long length() const { return static_cast<long>(values.size()); }
};

/// Module A: the numeric func_id sequence.
SeriesData module_a_target(const trace::ArrivalDataset& ds);
/// Module B: inter-arrival gaps; entry k is the gap that precedes record
/// k+1, and its covariates describe that arriving instance.
SeriesData module_b_target(const trace::ArrivalDataset& ds);

/// Normalization statistics; always computed from training indices only.
struct NormStats {
  CovariateRow cov_mean{};
  CovariateRow cov_std{};
  double value_mean = 0.0;
  double value_std = 1.0;
  double gap_scale = 1.0;  // positive-output scale for ArrivalTime series

  static NormStats compute(const SeriesData& series, long train_begin, long train_end);
};

double normalize_value(const SeriesData& series, const NormStats& stats, double value);
double denormalize_prediction(const SeriesData& series, const NormStats& stats,
                              double model_output);

struct WindowAssembly {
  nn::Grid context;     // (1 + covariates) x context_length
  nn::Grid future_cov;  // covariates x horizon
  std::vector<double> targets;  // normalized, horizon entries
  std::vector<double> mask;     // 1 where a target exists below `limit`
  long n_targets = 0;
};

/// Builds the model inputs for a window whose context ends at series index
/// `anchor` (exclusive). Entries at or past `limit` are masked out; the
/// context is left-zero-padded when anchor < context_length.
WindowAssembly assemble_window(const SeriesData& series, const NormStats& stats,
                               const TcnHyperParams& hp, long anchor, long limit);

/// Public forecast entry point: requires anchor >= receptive field.
ForecastResult forecast_at(const TcnModel& model, const SeriesData& series,
                           const NormStats& stats, long anchor);

/// Absolute minutes from a Module B forecast: last context arrival plus the
/// cumulative predicted gaps. Non-decreasing by construction.
std::vector<double> reconstruct_arrival_minutes(const ForecastResult& forecast,
                                                double last_context_minute);

/// Static per-function metadata used to realize the predicted-names wiring.
struct FunctionMeta {
  std::vector<double> owner_index;
  std::vector<double> app_index;
  std::vector<double> avg_exec_ms;
  static FunctionMeta from_dataset(const trace::ArrivalDataset& ds);
};

/// Returns a copy of the Module B series whose future covariates over
/// [anchor, anchor + predicted_ids.size()) are rewritten as if the predicted
/// function names were the truth (ids clamped to the vocabulary, metadata
/// looked up, running instance counts recomputed).
SeriesData apply_predicted_names(const SeriesData& series_b, long anchor,
                                 std::span<const double> predicted_ids,
                                 const FunctionMeta& meta);

}  // namespace coldstart::tcn
