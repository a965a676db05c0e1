#include "coldstart/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "coldstart/baselines.hpp"
#include "coldstart/errors.hpp"
#include "coldstart/rng.hpp"

namespace coldstart::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct WindowPass {
  double loss = 0.0;
  long n_targets = 0;
};

/// Masked MSE over one window; when `flat_grads` is non-null, accumulates
/// parameter gradients scaled by 1/batch_scale.
WindowPass window_pass(const tcn::TcnModel& model, const tcn::WindowAssembly& w,
                       std::span<double> flat_grads, double batch_scale) {
  WindowPass out;
  out.n_targets = w.n_targets;
  if (w.n_targets == 0) return out;
  tcn::TcnModel::Cache cache;
  const std::vector<double> pred = model.forward_train(w.context, w.future_cov, cache);
  const double m = static_cast<double>(w.n_targets);
  std::vector<double> d_pred(pred.size(), 0.0);
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (w.mask[j] == 0.0) continue;
    const double e = pred[j] - w.targets[j];
    out.loss += e * e / m;
    d_pred[j] = 2.0 * e / (m * batch_scale);
  }
  if (!std::isfinite(out.loss)) throw TrainError("training: non-finite loss");
  if (!flat_grads.empty()) model.backward(cache, d_pred, flat_grads);
  return out;
}

double holdout_loss(const tcn::TcnModel& model, const tcn::SeriesData& series,
                    const tcn::NormStats& stats, long anchor, long limit) {
  const tcn::WindowAssembly w =
      tcn::assemble_window(series, stats, model.hp, anchor, limit);
  return window_pass(model, w, {}, 1.0).loss;
}

nlohmann::json report_to_json(const metrics::MetricReport& r) {
  nlohmann::json j;
  const auto put = [&j](const char* name, const std::optional<double>& v) {
    if (v) {
      j[name] = *v;
    } else {
      j[name] = nullptr;
    }
  };
  put("explained_variance", r.explained_variance);
  put("mape_percent", r.mape_percent);
  put("nrmse", r.nrmse);
  put("r2", r.r2);
  put("spearman", r.spearman);
  j["n_points"] = r.n_points;
  j["mape_guarded_points"] = r.mape_guarded_points;
  j["undefined"] = r.undefined;
  return j;
}

metrics::MetricReport report_from_json(const nlohmann::json& j) {
  metrics::MetricReport r;
  const auto get = [&j](const char* name) -> std::optional<double> {
    if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
    return j.at(name).get<double>();
  };
  r.explained_variance = get("explained_variance");
  r.mape_percent = get("mape_percent");
  r.nrmse = get("nrmse");
  r.r2 = get("r2");
  r.spearman = get("spearman");
  r.n_points = j.value("n_points", 0L);
  r.mape_guarded_points = j.value("mape_guarded_points", 0L);
  if (j.contains("undefined")) r.undefined = j.at("undefined").get<std::vector<std::string>>();
  return r;
}

}  // namespace

std::vector<CvStep> make_cv_steps(long n_records, int horizon) {
  if (horizon < 1) throw ConfigError("make_cv_steps: horizon must be >= 1");
  if (n_records < 2L * horizon) {
    throw DataError("make_cv_steps: dataset too small (need at least 2 * horizon records)");
  }
  std::vector<CvStep> steps;
  CvStep first;
  first.step_index = 1;
  first.train_begin = 0;
  first.train_end = horizon;
  first.predict_begin = horizon;
  first.predict_end = horizon;  // observe-only
  steps.push_back(first);
  long begin = horizon;
  int index = 2;
  while (begin < n_records) {
    CvStep s;
    s.step_index = index++;
    s.train_begin = 0;
    s.train_end = begin;
    s.predict_begin = begin;
    s.predict_end = std::min<long>(begin + horizon, n_records);
    steps.push_back(s);
    begin = s.predict_end;
  }
  return steps;
}

Trainer::Trainer(tcn::TcnModel model, const tcn::SeriesData& series, std::vector<CvStep> steps,
                 TrainBudget budget, FitOptions options, std::uint64_t seed)
    : model_(std::move(model)),
      series_(&series),
      steps_(std::move(steps)),
      budget_(budget),
      options_(options),
      seed_(seed),
      adam_(nn::AdamState::make(model_.param_count())) {
  if (steps_.empty()) throw ConfigError("Trainer: no CV steps");
}

void Trainer::run_step(const CvStep& step, double step_deadline_seconds) {
  const auto t0 = Clock::now();
  Rng rng = Rng(seed_).fork(static_cast<std::uint64_t>(step.step_index));
  if (!options_.incremental && step.step_index > 1) {
    model_ = tcn::build_model(model_.hp, model_.vocab_size, seed_, model_.target);
    adam_ = nn::AdamState::make(model_.param_count());
  }
  const tcn::NormStats stats =
      tcn::NormStats::compute(*series_, step.train_begin, step.train_end);

  const long train_len = step.train_end - step.train_begin;
  const long holdout_len =
      std::min<long>(model_.hp.horizon, std::max<long>(1, train_len / 5));
  const long anchor_eval = step.train_end - holdout_len;

  StepOutcome outcome;
  outcome.step_index = step.step_index;

  std::vector<double> flat = model_.flatten_params();
  std::vector<double> grads(flat.size(), 0.0);
  nn::AdamConfig adam_cfg;
  adam_cfg.lr = options_.lr;

  double best_holdout = std::numeric_limits<double>::infinity();
  int stale_evals = 0;
  const bool trainable = anchor_eval >= 2;
  for (int epoch = 0; epoch < budget_.max_epochs_per_step; ++epoch) {
    if (elapsed_seconds_ + seconds_since(t0) > step_deadline_seconds) {
      budget_exhausted_ = true;
      break;
    }
    if (trainable) {
      for (int s = 0; s < budget_.opt_steps_per_epoch; ++s) {
        std::fill(grads.begin(), grads.end(), 0.0);
        double batch_loss = 0.0;
        for (int b = 0; b < budget_.batch_size; ++b) {
          const long anchor =
              1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(anchor_eval - 1)));
          const tcn::WindowAssembly w =
              tcn::assemble_window(*series_, stats, model_.hp, anchor, anchor_eval);
          batch_loss +=
              window_pass(model_, w, grads, static_cast<double>(budget_.batch_size)).loss;
        }
        nn::adam_step(flat, grads, adam_, adam_cfg);
        model_.load_params(flat);
        outcome.opt_steps += 1;
        (void)batch_loss;
      }
    }
    const double hold =
        anchor_eval >= 1 ? holdout_loss(model_, *series_, stats, anchor_eval, step.train_end)
                         : 0.0;
    outcome.holdout_loss = hold;
    if (hold < best_holdout - 1e-12) {
      best_holdout = hold;
      stale_evals = 0;
    } else if (++stale_evals >= budget_.patience) {
      break;
    }
    if (!trainable) break;
  }

  if (!step.observe_only()) {
    const long n_out = step.predict_end - step.predict_begin;
    const tcn::WindowAssembly w = tcn::assemble_window(*series_, stats, model_.hp,
                                                       step.predict_begin, series_->length());
    const std::vector<double> pred = model_.predict(w.context, w.future_cov);
    outcome.predictions.reserve(static_cast<std::size_t>(n_out));
    outcome.actuals.reserve(static_cast<std::size_t>(n_out));
    for (long j = 0; j < n_out; ++j) {
      outcome.predictions.push_back(
          tcn::denormalize_prediction(*series_, stats, pred[static_cast<std::size_t>(j)]));
      outcome.actuals.push_back(
          series_->values[static_cast<std::size_t>(step.predict_begin + j)]);
    }
    outcome.report = metrics::compute_all(outcome.actuals, outcome.predictions);
  }
  outcomes_.push_back(std::move(outcome));
  elapsed_seconds_ += seconds_since(t0);
}

void Trainer::run_until(int stop_after_step) {
  const int last =
      options_.max_cv_steps > 0
          ? std::min<int>(options_.max_cv_steps, static_cast<int>(steps_.size()))
          : static_cast<int>(steps_.size());
  while (next_step_ <= std::min(stop_after_step, last) && !budget_exhausted_) {
    if (elapsed_seconds_ >= budget_.wall_clock_cap_seconds) {
      budget_exhausted_ = true;
      break;
    }
    const int remaining = last - next_step_ + 1;
    const double slice = (budget_.wall_clock_cap_seconds - elapsed_seconds_) / remaining;
    run_step(steps_[static_cast<std::size_t>(next_step_ - 1)], elapsed_seconds_ + slice);
    ++next_step_;
  }
}

FitResult Trainer::run() {
  run_until(static_cast<int>(steps_.size()));
  return collect();
}

FitResult Trainer::collect() const {
  FitResult result;
  result.steps = outcomes_;
  result.budget_exhausted = budget_exhausted_;
  for (const auto& o : outcomes_) {
    result.pooled_predictions.insert(result.pooled_predictions.end(), o.predictions.begin(),
                                     o.predictions.end());
    result.pooled_actuals.insert(result.pooled_actuals.end(), o.actuals.begin(),
                                 o.actuals.end());
    if (o.report.spearman) result.validation_spearman = *o.report.spearman;
  }
  if (result.pooled_actuals.size() >= 2) {
    result.pooled = metrics::compute_all(result.pooled_actuals, result.pooled_predictions);
  } else {
    result.pooled.n_points = static_cast<long>(result.pooled_actuals.size());
    result.pooled.undefined.push_back("pooled: fewer than 2 validation points");
  }
  result.wall_seconds = elapsed_seconds_;
  return result;
}

ckpt::Checkpoint Trainer::save_state() const {
  ckpt::Checkpoint state;
  state.meta["schema"] = "trainer-state";
  state.meta["schema_version"] = 1;
  state.meta["seed"] = seed_;
  state.meta["next_step"] = next_step_;
  state.meta["budget_exhausted"] = budget_exhausted_;
  state.meta["elapsed_seconds"] = elapsed_seconds_;
  state.meta["adam_steps"] = adam_.step;
  state.meta["budget"] = {{"wall_clock_cap_seconds", budget_.wall_clock_cap_seconds},
                          {"max_epochs_per_step", budget_.max_epochs_per_step},
                          {"patience", budget_.patience},
                          {"batch_size", budget_.batch_size},
                          {"opt_steps_per_epoch", budget_.opt_steps_per_epoch}};
  state.meta["options"] = {{"incremental", options_.incremental},
                           {"lr", options_.lr},
                           {"max_cv_steps", options_.max_cv_steps}};
  state.meta["model"] = {{"n_blocks", model_.hp.n_blocks},
                         {"cells_per_block", model_.hp.cells_per_block},
                         {"hidden_channels", model_.hp.hidden_channels},
                         {"kernel_width", model_.hp.kernel_width},
                         {"horizon", model_.hp.horizon},
                         {"context_length", model_.hp.context_length},
                         {"target", model_.target == tcn::ForecastTarget::ArrivalTime
                                        ? "arrival_time"
                                        : "function_name"},
                         {"vocab_size", model_.vocab_size}};
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps_) {
    steps_json.push_back({{"step_index", s.step_index},
                          {"train_begin", s.train_begin},
                          {"train_end", s.train_end},
                          {"predict_begin", s.predict_begin},
                          {"predict_end", s.predict_end}});
  }
  state.meta["cv_steps"] = steps_json;
  nlohmann::json outcomes_json = nlohmann::json::array();
  for (const auto& o : outcomes_) {
    outcomes_json.push_back({{"step_index", o.step_index},
                             {"opt_steps", o.opt_steps},
                             {"holdout_loss", o.holdout_loss},
                             {"report", report_to_json(o.report)}});
  }
  state.meta["outcomes"] = outcomes_json;
  state.add("params", model_.flatten_params());
  state.add("adam_m", adam_.m);
  state.add("adam_v", adam_.v);
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    state.add("step" + std::to_string(i) + "_pred", outcomes_[i].predictions);
    state.add("step" + std::to_string(i) + "_act", outcomes_[i].actuals);
  }
  return state;
}

Trainer Trainer::restore(const ckpt::Checkpoint& state, const tcn::SeriesData& series) {
  if (state.meta.value("schema", "") != "trainer-state") {
    throw DataError("Trainer::restore: not a trainer-state checkpoint");
  }
  const auto& m = state.meta.at("model");
  tcn::TcnHyperParams hp;
  hp.n_blocks = m.at("n_blocks").get<int>();
  hp.cells_per_block = m.at("cells_per_block").get<int>();
  hp.hidden_channels = m.at("hidden_channels").get<int>();
  hp.kernel_width = m.at("kernel_width").get<int>();
  hp.horizon = m.at("horizon").get<int>();
  hp.context_length = m.at("context_length").get<int>();
  const tcn::ForecastTarget target = m.at("target").get<std::string>() == "arrival_time"
                                         ? tcn::ForecastTarget::ArrivalTime
                                         : tcn::ForecastTarget::FunctionName;
  tcn::TcnModel model = tcn::build_model(hp, m.at("vocab_size").get<long>(), 0, target);
  model.load_params(state.array("params"));

  std::vector<CvStep> steps;
  for (const auto& s : state.meta.at("cv_steps")) {
    steps.push_back(CvStep{s.at("step_index").get<int>(), s.at("train_begin").get<long>(),
                           s.at("train_end").get<long>(), s.at("predict_begin").get<long>(),
                           s.at("predict_end").get<long>()});
  }
  TrainBudget budget;
  const auto& b = state.meta.at("budget");
  budget.wall_clock_cap_seconds = b.at("wall_clock_cap_seconds").get<double>();
  budget.max_epochs_per_step = b.at("max_epochs_per_step").get<int>();
  budget.patience = b.at("patience").get<int>();
  budget.batch_size = b.at("batch_size").get<int>();
  budget.opt_steps_per_epoch = b.at("opt_steps_per_epoch").get<int>();
  FitOptions options;
  const auto& o = state.meta.at("options");
  options.incremental = o.at("incremental").get<bool>();
  options.lr = o.at("lr").get<double>();
  options.max_cv_steps = o.at("max_cv_steps").get<int>();

  Trainer trainer(std::move(model), series, std::move(steps), budget, options,
                  state.meta.at("seed").get<std::uint64_t>());
  trainer.adam_.m = state.array("adam_m");
  trainer.adam_.v = state.array("adam_v");
  trainer.adam_.step = state.meta.at("adam_steps").get<long>();
  trainer.next_step_ = state.meta.at("next_step").get<int>();
  trainer.budget_exhausted_ = state.meta.at("budget_exhausted").get<bool>();
  trainer.elapsed_seconds_ = state.meta.at("elapsed_seconds").get<double>();
  for (const auto& oj : state.meta.at("outcomes")) {
    StepOutcome outcome;
    outcome.step_index = oj.at("step_index").get<int>();
    outcome.opt_steps = oj.at("opt_steps").get<long>();
    outcome.holdout_loss = oj.at("holdout_loss").get<double>();
    outcome.report = report_from_json(oj.at("report"));
    const std::string key = "step" + std::to_string(trainer.outcomes_.size());
    outcome.predictions = state.array(key + "_pred");
    outcome.actuals = state.array(key + "_act");
    trainer.outcomes_.push_back(std::move(outcome));
  }
  return trainer;
}

FitResult fit(tcn::TcnModel model, const tcn::SeriesData& series,
              const std::vector<CvStep>& steps, const TrainBudget& budget,
              std::uint64_t seed, const FitOptions& options) {
  Trainer trainer(std::move(model), series, steps, budget, options, seed);
  return trainer.run();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> available_channels(tcn::ForecastTarget target) {
  std::vector<int> out;
  const auto mask = tcn::future_covariate_available(target);
  for (int ch = 0; ch < tcn::kCovariateChannels; ++ch) {
    if (mask[static_cast<std::size_t>(ch)]) out.push_back(ch);
  }
  return out;
}

std::vector<std::vector<double>> exog_columns(const tcn::SeriesData& series, long begin,
                                              long end, const std::vector<int>& channels) {
  std::vector<std::vector<double>> cols(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    cols[c].reserve(static_cast<std::size_t>(end - begin));
    for (long i = begin; i < end; ++i) {
      cols[c].push_back(
          series.covariates[static_cast<std::size_t>(i)][static_cast<std::size_t>(channels[c])]);
    }
  }
  return cols;
}

}  // namespace

BaselineResult run_baseline_cv(const tcn::SeriesData& series, const std::vector<CvStep>& steps,
                               const BaselineSpec& spec) {
  BaselineResult result;
  switch (spec.kind) {
    case BaselineSpec::Kind::ExponentialSmoothing:
      result.label = "es";
      break;
    case BaselineSpec::Kind::Arx:
      result.label = spec.use_exog ? "arx_ls" : "ar_ls";
      break;
    case BaselineSpec::Kind::Naive:
      result.label = "naive";
      break;
  }
  const std::vector<int> channels =
      spec.use_exog ? available_channels(series.target) : std::vector<int>{};
  for (const auto& step : steps) {
    if (step.observe_only()) continue;
    const long n_out = step.predict_end - step.predict_begin;
    const std::span<const double> history(series.values.data(),
                                          static_cast<std::size_t>(step.predict_begin));
    std::vector<double> pred;
    switch (spec.kind) {
      case BaselineSpec::Kind::ExponentialSmoothing:
        pred = baselines::es_forecast(history, spec.alpha, static_cast<int>(n_out));
        break;
      case BaselineSpec::Kind::Naive:
        pred = baselines::naive_forecast(history, static_cast<int>(n_out));
        break;
      case BaselineSpec::Kind::Arx: {
        const auto train_exog = exog_columns(series, 0, step.predict_begin, channels);
        const auto future_exog =
            exog_columns(series, step.predict_begin, step.predict_end, channels);
        const baselines::ArxParams params =
            baselines::arx_fit(history, train_exog, spec.ar_order, spec.diff_order);
        pred = baselines::arx_forecast(params, history, future_exog, static_cast<int>(n_out));
        break;
      }
    }
    StepOutcome outcome;
    outcome.step_index = step.step_index;
    outcome.predictions = std::move(pred);
    outcome.actuals.assign(
        series.values.begin() + step.predict_begin,
        series.values.begin() + step.predict_end);
    outcome.report = metrics::compute_all(outcome.actuals, outcome.predictions);
    result.pooled_predictions.insert(result.pooled_predictions.end(),
                                     outcome.predictions.begin(), outcome.predictions.end());
    result.pooled_actuals.insert(result.pooled_actuals.end(), outcome.actuals.begin(),
                                 outcome.actuals.end());
    result.steps.push_back(std::move(outcome));
  }
  if (result.pooled_actuals.size() >= 2) {
    result.pooled = metrics::compute_all(result.pooled_actuals, result.pooled_predictions);
  }
  return result;
}

BaselineSpec select_arx_orders(const tcn::SeriesData& series, const std::vector<CvStep>& steps,
                               bool use_exog) {
  BaselineSpec best;
  best.kind = BaselineSpec::Kind::Arx;
  best.use_exog = use_exog;
  double best_nrmse = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int d = 0; d <= 1; ++d) {
    for (int p = 1; p <= 5; ++p) {
      BaselineSpec spec;
      spec.kind = BaselineSpec::Kind::Arx;
      spec.ar_order = p;
      spec.diff_order = d;
      spec.use_exog = use_exog;
      try {
        const BaselineResult r = run_baseline_cv(series, steps, spec);
        if (r.pooled.nrmse && *r.pooled.nrmse < best_nrmse) {
          best_nrmse = *r.pooled.nrmse;
          best = spec;
          found = true;
        }
      } catch (const DataError&) {
        // singular design or too-short history for these orders: skip
      }
    }
  }
  if (!found) {
    best.ar_order = 0;
    best.diff_order = 0;
  }
  return best;
}

// ---------------------------------------------------------------------------

std::size_t estimate_memory_bytes(const tcn::TcnHyperParams& hp, int batch_size) {
  const std::size_t in_ch = 1 + tcn::kCovariateChannels;
  const std::size_t ch = static_cast<std::size_t>(hp.hidden_channels);
  const std::size_t k = static_cast<std::size_t>(hp.kernel_width);
  const std::size_t cells = static_cast<std::size_t>(hp.n_blocks) *
                            static_cast<std::size_t>(hp.cells_per_block);
  const std::size_t h = static_cast<std::size_t>(hp.horizon);
  const std::size_t ctx = static_cast<std::size_t>(hp.context());
  const std::size_t params = (in_ch * ch + ch)                     // premix
                             + cells * (2 * (ch * ch * k + ch) + 4 * ch)  // cells
                             + h * ch + tcn::kCovariateChannels + h;      // head
  // params + grads + two Adam moments, plus cached activations per window
  const std::size_t activations = ctx * ch * (8 * cells + 3) + 3 * h + ctx * in_ch;
  return 8 * (4 * params + static_cast<std::size_t>(batch_size) * activations);
}

std::vector<SearchCandidate> landmark_plan(const SearchSpace& space, int horizon) {
  if (space.n_blocks_min >= space.n_blocks_max || space.cells_min >= space.cells_max ||
      space.channels_min >= space.channels_max || !(space.lr_min < space.lr_max)) {
    throw ConfigError("landmark_plan: search space too small for 12 distinct landmarks");
  }
  const int cells_mid = (space.cells_min + space.cells_max) / 2;
  const int ch_mid = (space.channels_min + space.channels_max) / 2;
  const double lr_mid = std::sqrt(space.lr_min * space.lr_max);
  std::vector<SearchCandidate> plan;
  const auto add = [&plan, horizon, &space](int nb, int nc, int ch, double lr) {
    SearchCandidate c;
    c.hp.n_blocks = nb;
    c.hp.cells_per_block = nc;
    c.hp.hidden_channels = ch;
    c.hp.kernel_width = space.kernel_width;
    c.hp.horizon = horizon;
    c.lr = lr;
    c.origin = "landmark";
    c.hp.validate();
    plan.push_back(std::move(c));
  };
  for (int nb : {space.n_blocks_min, space.n_blocks_max}) {
    for (int nc : {space.cells_min, space.cells_max}) {
      for (int ch : {space.channels_min, space.channels_max}) {
        add(nb, nc, ch, lr_mid);
      }
    }
  }
  add(space.n_blocks_min, cells_mid, ch_mid, space.lr_min);
  add(space.n_blocks_min, cells_mid, ch_mid, space.lr_max);
  add(space.n_blocks_max, cells_mid, ch_mid, space.lr_min);
  add(space.n_blocks_max, cells_mid, ch_mid, space.lr_max);
  return plan;
}

namespace {

bool same_candidate(const SearchCandidate& a, const SearchCandidate& b) {
  return a.hp.n_blocks == b.hp.n_blocks && a.hp.cells_per_block == b.hp.cells_per_block &&
         a.hp.hidden_channels == b.hp.hidden_channels && a.lr == b.lr;
}

CandidateOutcome evaluate_candidate(const SearchCandidate& candidate,
                                    const tcn::SeriesData& series, const TrainBudget& budget,
                                    const SearchOptions& options, std::uint64_t stream) {
  CandidateOutcome outcome;
  outcome.candidate = candidate;
  const auto t0 = Clock::now();
  if (estimate_memory_bytes(candidate.hp, budget.batch_size) > options.memory_cap_bytes) {
    outcome.status = "resource-skip";
    return outcome;
  }
  try {
    std::uint64_t sm = options.seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    const std::uint64_t model_seed = splitmix64(sm);
    tcn::TcnModel model =
        tcn::build_model(candidate.hp, series.vocab_size, model_seed, series.target);
    FitOptions fit_options;
    fit_options.lr = candidate.lr;
    fit_options.max_cv_steps = options.max_cv_steps;
    const std::vector<CvStep> steps =
        make_cv_steps(series.length(), candidate.hp.horizon);
    const FitResult r = fit(std::move(model), series, steps, budget, model_seed, fit_options);
    if (r.pooled.nrmse) {
      outcome.status = "ok";
      outcome.objective_nrmse = r.pooled.nrmse;
      outcome.spearman = r.pooled.spearman;
    } else {
      outcome.status = "failed: objective nRMSE undefined on validation windows";
    }
  } catch (const std::exception& e) {
    outcome.status = std::string("failed: ") + e.what();
  }
  outcome.wall_seconds = seconds_since(t0);
  return outcome;
}

}  // namespace

SearchResult landmark_search(const SearchSpace& space, const tcn::SeriesData& series,
                             const TrainBudget& budget, const SearchOptions& options) {
  std::vector<SearchCandidate> plan = landmark_plan(space, options.horizon);
  const std::size_t n_landmarks = plan.size();
  TrainBudget slice = budget;
  slice.wall_clock_cap_seconds = budget.wall_clock_cap_seconds / (n_landmarks + 6);

  std::vector<CandidateOutcome> outcomes;
  outcomes.reserve(n_landmarks + 6);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    outcomes.push_back(evaluate_candidate(plan[i], series, slice, options, i));
  }

  const auto better = [](const CandidateOutcome& a, const CandidateOutcome& b) {
    const bool a_ok = a.status == "ok";
    const bool b_ok = b.status == "ok";
    if (a_ok != b_ok) return a_ok;
    if (!a_ok) return false;
    if (*a.objective_nrmse != *b.objective_nrmse) {
      return *a.objective_nrmse < *b.objective_nrmse;
    }
    return a.spearman.value_or(-2.0) > b.spearman.value_or(-2.0);
  };
  std::size_t best_idx = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i) {
    if (better(outcomes[i], outcomes[best_idx])) best_idx = i;
  }

  if (outcomes[best_idx].status == "ok") {
    const SearchCandidate& best = outcomes[best_idx].candidate;
    std::vector<SearchCandidate> refined;
    const int d_cells = std::max(1, (space.cells_max - space.cells_min) / 2);
    const int d_ch = std::max(1, (space.channels_max - space.channels_min) / 2);
    const double lr_factor = std::sqrt(space.lr_max / space.lr_min);
    const auto propose = [&](int nb, int nc, int ch, double lr) {
      SearchCandidate c = best;
      c.hp.n_blocks = nb;
      c.hp.cells_per_block = std::clamp(nc, space.cells_min, space.cells_max);
      c.hp.hidden_channels = std::clamp(ch, space.channels_min, space.channels_max);
      c.lr = std::clamp(lr, space.lr_min, space.lr_max);
      c.origin = "refined";
      for (const auto& existing : plan) {
        if (same_candidate(existing, c)) return;
      }
      for (const auto& existing : refined) {
        if (same_candidate(existing, c)) return;
      }
      refined.push_back(std::move(c));
    };
    propose(best.hp.n_blocks, best.hp.cells_per_block - d_cells, best.hp.hidden_channels,
            best.lr);
    propose(best.hp.n_blocks, best.hp.cells_per_block + d_cells, best.hp.hidden_channels,
            best.lr);
    propose(best.hp.n_blocks, best.hp.cells_per_block, best.hp.hidden_channels - d_ch, best.lr);
    propose(best.hp.n_blocks, best.hp.cells_per_block, best.hp.hidden_channels + d_ch, best.lr);
    propose(best.hp.n_blocks, best.hp.cells_per_block, best.hp.hidden_channels,
            best.lr / lr_factor);
    propose(best.hp.n_blocks, best.hp.cells_per_block, best.hp.hidden_channels,
            best.lr * lr_factor);
    for (std::size_t i = 0; i < refined.size(); ++i) {
      outcomes.push_back(
          evaluate_candidate(refined[i], series, slice, options, n_landmarks + i));
    }
  }

  std::stable_sort(outcomes.begin(), outcomes.end(), better);
  SearchResult result;
  result.leaderboard = std::move(outcomes);
  result.n_landmarks = n_landmarks;
  if (!result.leaderboard.empty() && result.leaderboard.front().status == "ok") {
    result.best = result.leaderboard.front().candidate;
  }
  return result;
}

}  // namespace coldstart::train
