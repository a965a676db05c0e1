#include "coldstart/tcn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "coldstart/errors.hpp"

namespace coldstart::tcn {

namespace {

template <class Model, class Fn>
void visit_param_arrays(Model& model, Fn&& fn) {
  fn(model.premix.weight);
  fn(model.premix.bias);
  for (auto& block : model.blocks) {
    for (auto& cell : block) {
      fn(cell.conv1.weight);
      fn(cell.conv1.bias);
      fn(cell.norm1.gain);
      fn(cell.norm1.offset);
      fn(cell.conv2.weight);
      fn(cell.conv2.bias);
      fn(cell.norm2.gain);
      fn(cell.norm2.offset);
      if (cell.skip) {
        fn(cell.skip->weight);
        fn(cell.skip->bias);
      }
    }
  }
  fn(model.head.w_hidden);
  fn(model.head.w_cov);
  fn(model.head.bias);
}

double normalize_target(const SeriesData& series, const NormStats& stats, double value) {
  if (series.target == ForecastTarget::ArrivalTime) return value / stats.gap_scale;
  return (value - stats.value_mean) / std::max(stats.value_std, 1e-9);
}

}  // namespace

void TcnHyperParams::validate() const {
  if (n_blocks < 1 || n_blocks > 2) throw ConfigError("hyperparams: n_blocks must be 1 or 2");
  if (cells_per_block < 3 || cells_per_block > 6) {
    throw ConfigError("hyperparams: cells_per_block must be in 3..6");
  }
  if (hidden_channels < 16 || hidden_channels > 256) {
    throw ConfigError("hyperparams: hidden_channels must be in 16..256");
  }
  if (kernel_width < 1 || kernel_width > 4) {
    throw ConfigError("hyperparams: kernel_width must be in 1..4");
  }
  if (horizon < 1) throw ConfigError("hyperparams: horizon must be >= 1");
  if (context_length != 0 && context_length < receptive_field(*this)) {
    throw ConfigError("hyperparams: context_length must be >= the receptive field");
  }
}

int TcnHyperParams::context() const {
  return context_length > 0 ? context_length : receptive_field(*this);
}

int receptive_field(const TcnHyperParams& hp) {
  // Two convolutions per cell, cell j dilating by 2^(j+1):
  // 1 + sum over cells of 2*(K-1)*2^(j+1) = 1 + 4*n_b*(K-1)*(2^n_c - 1).
  const int doubling = (1 << hp.cells_per_block) - 1;
  return 4 * hp.n_blocks * (hp.kernel_width - 1) * doubling + 1;
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

std::size_t TcnModel::param_count() const {
  std::size_t n = 0;
  visit_param_arrays(*this, [&n](const std::vector<double>& a) { n += a.size(); });
  return n;
}

std::vector<double> TcnModel::flatten_params() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  visit_param_arrays(*this, [&flat](const std::vector<double>& a) {
    flat.insert(flat.end(), a.begin(), a.end());
  });
  return flat;
}

void TcnModel::load_params(std::span<const double> flat) {
  if (flat.size() != param_count()) throw ShapeError("load_params: size mismatch");
  std::size_t cursor = 0;
  visit_param_arrays(*this, [&](std::vector<double>& a) {
    std::copy_n(flat.begin() + static_cast<long>(cursor), a.size(), a.begin());
    cursor += a.size();
  });
}

void TcnModel::validate() const {
  hp.validate();
  premix.validate();
  if (premix.in_channels != input_channels() || premix.out_channels != hp.hidden_channels ||
      premix.kernel_width != 1) {
    throw ShapeError("model: premix layer does not match the input/hidden channel chain");
  }
  if (static_cast<int>(blocks.size()) != hp.n_blocks) {
    throw ShapeError("model: block count mismatch");
  }
  for (const auto& block : blocks) {
    if (static_cast<int>(block.size()) != hp.cells_per_block) {
      throw ShapeError("model: cell count mismatch");
    }
    for (std::size_t j = 0; j < block.size(); ++j) {
      block[j].validate();
      if (block[j].in_channels() != hp.hidden_channels ||
          block[j].out_channels() != hp.hidden_channels) {
        throw ShapeError("model: cell channel chain mismatch");
      }
      if (block[j].conv1.dilation != (1 << (j + 1))) {
        throw ShapeError("model: cell dilation schedule mismatch");
      }
    }
  }
  if (head.horizon != hp.horizon || head.hidden_channels != hp.hidden_channels ||
      head.future_cov_channels != covariate_channels) {
    throw ShapeError("model: head shape mismatch");
  }
  if (head.w_hidden.size() !=
          static_cast<std::size_t>(head.horizon) * head.hidden_channels ||
      head.w_cov.size() != static_cast<std::size_t>(head.future_cov_channels) ||
      head.bias.size() != static_cast<std::size_t>(head.horizon)) {
    throw ShapeError("model: head parameter sizes mismatch");
  }
}

std::vector<double> TcnModel::forward_train(const nn::Grid& context,
                                            const nn::Grid& future_cov, Cache& cache) const {
  if (context.channels() != input_channels()) {
    throw ShapeError("forward: context channel mismatch");
  }
  if (context.time() < hp.context()) throw ShapeError("forward: context shorter than configured");
  if (future_cov.channels() != covariate_channels || future_cov.time() != hp.horizon) {
    throw ShapeError("forward: future covariate shape mismatch");
  }
  cache.context = context;
  cache.future_cov = future_cov;
  cache.premix_out = nn::conv1d_causal(context, premix);
  const std::size_t n_cells =
      static_cast<std::size_t>(hp.n_blocks) * static_cast<std::size_t>(hp.cells_per_block);
  cache.cell_inputs.clear();
  cache.cell_caches.assign(n_cells, nn::CellCache{});
  cache.cell_inputs.reserve(n_cells);
  nn::Grid current = cache.premix_out;
  std::size_t idx = 0;
  for (const auto& block : blocks) {
    for (const auto& cell : block) {
      cache.cell_inputs.push_back(current);
      current = nn::residual_cell_forward(cache.cell_inputs.back(), cell,
                                          &cache.cell_caches[idx]);
      ++idx;
    }
  }
  cache.last_out = std::move(current);

  const int T = cache.last_out.time();
  const int H = hp.hidden_channels;
  cache.raw.assign(static_cast<std::size_t>(hp.horizon), 0.0);
  for (int j = 0; j < hp.horizon; ++j) {
    double acc = head.bias[static_cast<std::size_t>(j)];
    const double* wj = head.w_hidden.data() + static_cast<std::size_t>(j) * H;
    for (int c = 0; c < H; ++c) acc += wj[c] * cache.last_out.at(c, T - 1);
    for (int v = 0; v < covariate_channels; ++v) {
      acc += head.w_cov[static_cast<std::size_t>(v)] * future_cov.at(v, j);
    }
    cache.raw[static_cast<std::size_t>(j)] = acc;
  }
  cache.transformed = cache.raw;
  if (transform == OutputTransform::Softplus) {
    for (double& v : cache.transformed) v = softplus(v);
  }
  return cache.transformed;
}

std::vector<double> TcnModel::predict(const nn::Grid& context, const nn::Grid& future_cov,
                                      std::vector<double>* raw_out) const {
  Cache cache;
  std::vector<double> out = forward_train(context, future_cov, cache);
  if (raw_out) *raw_out = cache.raw;
  return out;
}

void TcnModel::backward(const Cache& cache, std::span<const double> d_pred,
                        std::span<double> flat_grads) const {
  if (d_pred.size() != static_cast<std::size_t>(hp.horizon)) {
    throw ShapeError("backward: d_pred size mismatch");
  }
  if (flat_grads.size() != param_count()) throw ShapeError("backward: grad span mismatch");

  std::vector<double> d_raw(d_pred.begin(), d_pred.end());
  if (transform == OutputTransform::Softplus) {
    for (std::size_t j = 0; j < d_raw.size(); ++j) {
      d_raw[j] *= sigmoid(cache.raw[j]);
    }
  }

  const int T = cache.last_out.time();
  const int H = hp.hidden_channels;
  std::vector<double> g_w_hidden(head.w_hidden.size(), 0.0);
  std::vector<double> g_w_cov(head.w_cov.size(), 0.0);
  std::vector<double> g_bias(head.bias.size(), 0.0);
  std::vector<double> d_hidden_last(static_cast<std::size_t>(H), 0.0);
  for (int j = 0; j < hp.horizon; ++j) {
    const double dj = d_raw[static_cast<std::size_t>(j)];
    if (dj == 0.0) continue;
    g_bias[static_cast<std::size_t>(j)] += dj;
    const double* wj = head.w_hidden.data() + static_cast<std::size_t>(j) * H;
    double* gwj = g_w_hidden.data() + static_cast<std::size_t>(j) * H;
    for (int c = 0; c < H; ++c) {
      gwj[c] += dj * cache.last_out.at(c, T - 1);
      d_hidden_last[static_cast<std::size_t>(c)] += dj * wj[c];
    }
    for (int v = 0; v < covariate_channels; ++v) {
      g_w_cov[static_cast<std::size_t>(v)] += dj * cache.future_cov.at(v, j);
    }
  }

  nn::Grid upstream(H, T);
  for (int c = 0; c < H; ++c) upstream.at(c, T - 1) = d_hidden_last[static_cast<std::size_t>(c)];

  const std::size_t n_cells = cache.cell_inputs.size();
  std::vector<nn::CellParamGrads> cell_grads(n_cells);
  std::size_t idx = n_cells;
  for (auto block = blocks.rbegin(); block != blocks.rend(); ++block) {
    for (auto cell = block->rbegin(); cell != block->rend(); ++cell) {
      --idx;
      nn::CellGrads g = nn::residual_cell_grad(cache.cell_inputs[idx], *cell,
                                               cache.cell_caches[idx], upstream);
      cell_grads[idx] = std::move(g.params);
      upstream = std::move(g.input);
    }
  }
  nn::ConvGrads premix_grads = nn::conv1d_causal_grad(cache.context, premix, upstream);

  // Walk the canonical parameter order, accumulating each gradient array.
  std::size_t cursor = 0;
  const auto add = [&flat_grads, &cursor](const std::vector<double>& g) {
    for (std::size_t i = 0; i < g.size(); ++i) flat_grads[cursor + i] += g[i];
    cursor += g.size();
  };
  add(premix_grads.weight);
  add(premix_grads.bias);
  idx = 0;
  for (const auto& block : blocks) {
    for (const auto& cell : block) {
      const nn::CellParamGrads& g = cell_grads[idx++];
      add(g.conv1_w);
      add(g.conv1_b);
      add(g.norm1_gain);
      add(g.norm1_offset);
      add(g.conv2_w);
      add(g.conv2_b);
      add(g.norm2_gain);
      add(g.norm2_offset);
      if (cell.skip) {
        add(g.skip_w);
        add(g.skip_b);
      }
    }
  }
  add(g_w_hidden);
  add(g_w_cov);
  add(g_bias);
}

TcnModel build_model(const TcnHyperParams& hp, long vocab_size, std::uint64_t seed,
                     ForecastTarget target) {
  hp.validate();
  if (vocab_size < 0) throw ConfigError("build_model: negative vocab size");
  TcnModel model;
  model.hp = hp;
  model.target = target;
  model.transform = target == ForecastTarget::ArrivalTime ? OutputTransform::Softplus
                                                          : OutputTransform::Identity;
  model.vocab_size = vocab_size;
  model.value_channels = 1;
  model.covariate_channels = kCovariateChannels;

  Rng rng(seed);
  model.premix = nn::ConvParams::make(model.input_channels(), hp.hidden_channels, 1, 1);
  nn::he_uniform_init(model.premix.weight, model.input_channels(), rng);

  model.blocks.resize(static_cast<std::size_t>(hp.n_blocks));
  for (auto& block : model.blocks) {
    block.reserve(static_cast<std::size_t>(hp.cells_per_block));
    for (int j = 0; j < hp.cells_per_block; ++j) {
      nn::ResidualCell cell = nn::ResidualCell::make(hp.hidden_channels, hp.hidden_channels,
                                                     hp.kernel_width, 1 << (j + 1));
      nn::he_uniform_init(cell.conv1.weight, hp.hidden_channels * hp.kernel_width, rng);
      nn::he_uniform_init(cell.conv2.weight, hp.hidden_channels * hp.kernel_width, rng);
      block.push_back(std::move(cell));
    }
  }

  model.head.horizon = hp.horizon;
  model.head.hidden_channels = hp.hidden_channels;
  model.head.future_cov_channels = model.covariate_channels;
  model.head.w_hidden.assign(
      static_cast<std::size_t>(hp.horizon) * hp.hidden_channels, 0.0);
  model.head.w_cov.assign(static_cast<std::size_t>(model.covariate_channels), 0.0);
  model.head.bias.assign(static_cast<std::size_t>(hp.horizon), 0.0);
  nn::he_uniform_init(model.head.w_hidden, hp.hidden_channels, rng);
  nn::he_uniform_init(model.head.w_cov, model.covariate_channels, rng);

  model.validate();
  return model;
}

std::array<bool, kCovariateChannels> future_covariate_available(ForecastTarget target) {
  if (target == ForecastTarget::FunctionName) {
    // Names are the prediction target; only the position is known ahead.
    return {false, false, false, false, false, false, true};
  }
  // Arrival times: names (given or predicted) carry their static metadata,
  // but the minute of day is exactly what is being predicted.
  return {true, true, true, true, true, false, true};
}

namespace {

CovariateRow covariates_of(const trace::ArrivalRecord& r, long series_index) {
  return CovariateRow{static_cast<double>(r.func_id),
                      static_cast<double>(r.owner_index),
                      static_cast<double>(r.app_index),
                      r.avg_exec_ms,
                      static_cast<double>(r.instance_count_so_far),
                      static_cast<double>(r.arrival_minute % 1440),
                      static_cast<double>(series_index)};
}

}  // namespace

SeriesData module_a_target(const trace::ArrivalDataset& ds) {
  if (ds.records.empty()) throw DataError("module_a_target: empty dataset");
  SeriesData s;
  s.target = ForecastTarget::FunctionName;
  s.vocab_size = ds.vocab_size;
  s.values.reserve(ds.records.size());
  s.covariates.reserve(ds.records.size());
  s.arrival_minutes.reserve(ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    s.values.push_back(static_cast<double>(r.func_id));
    s.covariates.push_back(covariates_of(r, static_cast<long>(i)));
    s.arrival_minutes.push_back(static_cast<double>(r.arrival_minute));
  }
  return s;
}

SeriesData module_b_target(const trace::ArrivalDataset& ds) {
  if (ds.records.empty()) throw DataError("module_b_target: empty dataset");
  SeriesData s;
  s.target = ForecastTarget::ArrivalTime;
  s.vocab_size = ds.vocab_size;
  s.arrival_minutes.reserve(ds.records.size());
  for (const auto& r : ds.records) {
    s.arrival_minutes.push_back(static_cast<double>(r.arrival_minute));
  }
  if (ds.records.size() >= 2) {
    s.values.reserve(ds.records.size() - 1);
    s.covariates.reserve(ds.records.size() - 1);
    for (std::size_t k = 0; k + 1 < ds.records.size(); ++k) {
      s.values.push_back(static_cast<double>(ds.records[k + 1].arrival_minute -
                                             ds.records[k].arrival_minute));
      s.covariates.push_back(covariates_of(ds.records[k + 1], static_cast<long>(k)));
    }
  }
  return s;
}

NormStats NormStats::compute(const SeriesData& series, long train_begin, long train_end) {
  if (train_begin < 0 || train_end > series.length() || train_begin >= train_end) {
    throw DataError("NormStats: empty or invalid training range");
  }
  NormStats stats;
  const long n = train_end - train_begin;
  double acc = 0.0;
  for (long i = train_begin; i < train_end; ++i) acc += series.values[static_cast<std::size_t>(i)];
  stats.value_mean = acc / static_cast<double>(n);
  double var = 0.0;
  for (long i = train_begin; i < train_end; ++i) {
    const double d = series.values[static_cast<std::size_t>(i)] - stats.value_mean;
    var += d * d;
  }
  stats.value_std = std::sqrt(var / static_cast<double>(n));
  stats.gap_scale = std::max(stats.value_mean + stats.value_std, 1e-9);
  for (int ch = 0; ch < kCovariateChannels; ++ch) {
    double m = 0.0;
    for (long i = train_begin; i < train_end; ++i) {
      m += series.covariates[static_cast<std::size_t>(i)][static_cast<std::size_t>(ch)];
    }
    m /= static_cast<double>(n);
    double v = 0.0;
    for (long i = train_begin; i < train_end; ++i) {
      const double d =
          series.covariates[static_cast<std::size_t>(i)][static_cast<std::size_t>(ch)] - m;
      v += d * d;
    }
    stats.cov_mean[static_cast<std::size_t>(ch)] = m;
    stats.cov_std[static_cast<std::size_t>(ch)] = std::sqrt(v / static_cast<double>(n));
  }
  return stats;
}

double normalize_value(const SeriesData& series, const NormStats& stats, double value) {
  (void)series;
  return (value - stats.value_mean) / std::max(stats.value_std, 1e-9);
}

double denormalize_prediction(const SeriesData& series, const NormStats& stats,
                              double model_output) {
  if (series.target == ForecastTarget::ArrivalTime) return model_output * stats.gap_scale;
  return stats.value_mean + std::max(stats.value_std, 1e-9) * model_output;
}

WindowAssembly assemble_window(const SeriesData& series, const NormStats& stats,
                               const TcnHyperParams& hp, long anchor, long limit) {
  if (anchor < 1 || anchor > series.length()) throw DataError("assemble_window: bad anchor");
  const int t_ctx = hp.context();
  const int h = hp.horizon;
  WindowAssembly w;
  w.context = nn::Grid(1 + kCovariateChannels, t_ctx);
  w.future_cov = nn::Grid(kCovariateChannels, h);
  w.targets.assign(static_cast<std::size_t>(h), 0.0);
  w.mask.assign(static_cast<std::size_t>(h), 0.0);
  const auto norm_cov = [&stats](const CovariateRow& row, int ch) {
    return (row[static_cast<std::size_t>(ch)] - stats.cov_mean[static_cast<std::size_t>(ch)]) /
           std::max(stats.cov_std[static_cast<std::size_t>(ch)], 1e-9);
  };
  for (int p = 0; p < t_ctx; ++p) {
    const long idx = anchor - t_ctx + p;
    if (idx < 0) continue;  // left zero padding
    const auto& row = series.covariates[static_cast<std::size_t>(idx)];
    w.context.at(0, p) =
        normalize_value(series, stats, series.values[static_cast<std::size_t>(idx)]);
    for (int ch = 0; ch < kCovariateChannels; ++ch) {
      w.context.at(1 + ch, p) = norm_cov(row, ch);
    }
  }
  const auto available = future_covariate_available(series.target);
  for (int j = 0; j < h; ++j) {
    const long idx = anchor + j;
    if (idx >= limit || idx >= series.length()) continue;
    w.mask[static_cast<std::size_t>(j)] = 1.0;
    w.targets[static_cast<std::size_t>(j)] =
        normalize_target(series, stats, series.values[static_cast<std::size_t>(idx)]);
    const auto& row = series.covariates[static_cast<std::size_t>(idx)];
    for (int ch = 0; ch < kCovariateChannels; ++ch) {
      if (!available[static_cast<std::size_t>(ch)]) continue;
      w.future_cov.at(ch, j) = norm_cov(row, ch);
    }
    w.n_targets += 1;
  }
  return w;
}

ForecastResult forecast_at(const TcnModel& model, const SeriesData& series,
                           const NormStats& stats, long anchor) {
  const int t_rf = receptive_field(model.hp);
  if (anchor < t_rf) {
    throw DataError("forecast_at: short context (need at least the receptive field of " +
                    std::to_string(t_rf) + " observations)");
  }
  WindowAssembly w = assemble_window(series, stats, model.hp, anchor, series.length());
  ForecastResult result;
  result.target = series.target;
  result.context_start = std::max<long>(0, anchor - model.hp.context());
  result.context_end = anchor;
  std::vector<double> raw;
  const std::vector<double> pred = model.predict(w.context, w.future_cov, &raw);
  result.raw = std::move(raw);
  result.values.reserve(pred.size());
  for (double p : pred) result.values.push_back(denormalize_prediction(series, stats, p));
  return result;
}

std::vector<double> reconstruct_arrival_minutes(const ForecastResult& forecast,
                                                double last_context_minute) {
  if (forecast.target != ForecastTarget::ArrivalTime) {
    throw DataError("reconstruct_arrival_minutes: not an arrival-time forecast");
  }
  std::vector<double> minutes;
  minutes.reserve(forecast.values.size());
  double acc = last_context_minute;
  for (double gap : forecast.values) {
    acc += gap;
    minutes.push_back(acc);
  }
  return minutes;
}

FunctionMeta FunctionMeta::from_dataset(const trace::ArrivalDataset& ds) {
  FunctionMeta meta;
  meta.owner_index.assign(static_cast<std::size_t>(ds.vocab_size), 0.0);
  meta.app_index.assign(static_cast<std::size_t>(ds.vocab_size), 0.0);
  meta.avg_exec_ms.assign(static_cast<std::size_t>(ds.vocab_size), 0.0);
  std::vector<long> counts(static_cast<std::size_t>(ds.vocab_size), 0);
  for (const auto& r : ds.records) {
    const auto f = static_cast<std::size_t>(r.func_id);
    meta.owner_index[f] = static_cast<double>(r.owner_index);
    meta.app_index[f] = static_cast<double>(r.app_index);
    meta.avg_exec_ms[f] += r.avg_exec_ms;
    counts[f] += 1;
  }
  for (std::size_t f = 0; f < counts.size(); ++f) {
    if (counts[f] > 0) meta.avg_exec_ms[f] /= static_cast<double>(counts[f]);
  }
  return meta;
}

SeriesData apply_predicted_names(const SeriesData& series_b, long anchor,
                                 std::span<const double> predicted_ids,
                                 const FunctionMeta& meta) {
  if (series_b.target != ForecastTarget::ArrivalTime) {
    throw DataError("apply_predicted_names: expects the arrival-time series");
  }
  if (series_b.vocab_size <= 0) throw DataError("apply_predicted_names: empty vocabulary");
  SeriesData out = series_b;
  std::map<long, long> running;
  for (long k = 0; k < anchor && k < series_b.length(); ++k) {
    const auto& row = series_b.covariates[static_cast<std::size_t>(k)];
    const long fid = static_cast<long>(row[0]);
    running[fid] = std::max(running[fid], static_cast<long>(row[4]));
  }
  for (std::size_t j = 0; j < predicted_ids.size(); ++j) {
    const long idx = anchor + static_cast<long>(j);
    if (idx >= out.length()) break;
    long fid = static_cast<long>(std::llround(predicted_ids[j]));
    fid = std::clamp<long>(fid, 0, series_b.vocab_size - 1);
    auto& row = out.covariates[static_cast<std::size_t>(idx)];
    row[0] = static_cast<double>(fid);
    row[1] = meta.owner_index[static_cast<std::size_t>(fid)];
    row[2] = meta.app_index[static_cast<std::size_t>(fid)];
    row[3] = meta.avg_exec_ms[static_cast<std::size_t>(fid)];
    row[4] = static_cast<double>(++running[fid]);
  }
  return out;
}

}  // namespace coldstart::tcn
