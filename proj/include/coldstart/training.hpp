#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coldstart/checkpoint.hpp"
#include "coldstart/metrics.hpp"
#include "coldstart/nn.hpp"
#include "coldstart/tcn.hpp"

namespace coldstart::train {

/// One rolling-window cross-validation step. Step 1 only observes (its
/// predict range is empty); step k >= 2 trains on everything before its
/// predict window and predicts the next horizon of records.
struct CvStep {
  int step_index = 1;
  long train_begin = 0;
  long train_end = 0;      // exclusive
  long predict_begin = 0;
  long predict_end = 0;    // exclusive
  bool observe_only() const { return predict_begin == predict_end; }
};

/// Steps tile [0, n): the step-1 observe range plus the predict ranges of
/// the remaining steps cover every index exactly once.
std::vector<CvStep> make_cv_steps(long n_records, int horizon);

struct TrainBudget {
  double wall_clock_cap_seconds = 1800.0;
  int max_epochs_per_step = 30;
  int patience = 5;
  int batch_size = 16;
  int opt_steps_per_epoch = 25;
};

struct FitOptions {
  bool incremental = true;  // carry parameters across CV steps (default)
  double lr = 1e-3;
  int max_cv_steps = 0;  // 0 = run all steps; search uses a short prefix
};

struct StepOutcome {
  int step_index = 0;
  long opt_steps = 0;
  double holdout_loss = 0.0;
  metrics::MetricReport report;  // denormalized, per-step validation metrics
  std::vector<double> predictions;
  std::vector<double> actuals;
};

struct FitResult {
  std::vector<StepOutcome> steps;
  metrics::MetricReport pooled;  // over all validation windows, concatenated
  std::vector<double> pooled_predictions;
  std::vector<double> pooled_actuals;
  bool budget_exhausted = false;
  double validation_spearman = 0.0;  // most recent defined step Spearman
  double wall_seconds = 0.0;
};

/// Rolling-CV trainer with explicit state. Interrupting after any step and
/// resuming from save_state() reproduces the uninterrupted metrics exactly:
/// every step draws from its own seed-derived stream and renormalizes from
/// its own training range, so no hidden state crosses the checkpoint.
class Trainer {
 public:
  Trainer(tcn::TcnModel model, const tcn::SeriesData& series, std::vector<CvStep> steps,
          TrainBudget budget, FitOptions options, std::uint64_t seed);

  FitResult run();
  void run_until(int stop_after_step);

  const tcn::TcnModel& model() const { return model_; }
  int next_step() const { return next_step_; }
  bool budget_exhausted() const { return budget_exhausted_; }

  ckpt::Checkpoint save_state() const;
  static Trainer restore(const ckpt::Checkpoint& state, const tcn::SeriesData& series);

 private:
  void run_step(const CvStep& step, double step_deadline_seconds);
  FitResult collect() const;

  tcn::TcnModel model_;
  const tcn::SeriesData* series_;
  std::vector<CvStep> steps_;
  TrainBudget budget_;
  FitOptions options_;
  std::uint64_t seed_ = 0;
  int next_step_ = 1;
  nn::AdamState adam_;
  std::vector<StepOutcome> outcomes_;
  bool budget_exhausted_ = false;
  double elapsed_seconds_ = 0.0;
};

FitResult fit(tcn::TcnModel model, const tcn::SeriesData& series,
              const std::vector<CvStep>& steps, const TrainBudget& budget,
              std::uint64_t seed, const FitOptions& options = {});

// ---------------------------------------------------------------------------
// Baselines over the identical CV splits (paired comparisons).

struct BaselineSpec {
  enum class Kind { ExponentialSmoothing, Arx, Naive };
  Kind kind = Kind::Naive;
  double alpha = 0.3;
  int ar_order = 1;
  int diff_order = 0;
  bool use_exog = false;  // future-available covariates as exogenous columns
};

struct BaselineResult {
  std::vector<StepOutcome> steps;
  metrics::MetricReport pooled;
  std::vector<double> pooled_predictions;
  std::vector<double> pooled_actuals;
  std::string label;
};

BaselineResult run_baseline_cv(const tcn::SeriesData& series, const std::vector<CvStep>& steps,
                               const BaselineSpec& spec);

/// Grid-search of (p, d) over p in 1..5, d in {0,1} by pooled validation
/// nRMSE; candidates whose design goes singular on some step are skipped.
BaselineSpec select_arx_orders(const tcn::SeriesData& series, const std::vector<CvStep>& steps,
                               bool use_exog);

// ---------------------------------------------------------------------------
// Landmark hyper-parameter exploration.

struct SearchSpace {
  int n_blocks_min = 1, n_blocks_max = 2;
  int cells_min = 3, cells_max = 6;
  int channels_min = 16, channels_max = 64;
  double lr_min = 3e-4, lr_max = 3e-3;
  int kernel_width = 2;
};

struct SearchCandidate {
  tcn::TcnHyperParams hp;
  double lr = 1e-3;
  std::string origin;  // "landmark" or "refined"
};

/// Exactly 12 pairwise-distinct probes spanning the space: the 8
/// (n_blocks, cells, channels) corners at the geometric-mid learning rate,
/// plus 4 mid-grid probes covering the learning-rate extremes.
std::vector<SearchCandidate> landmark_plan(const SearchSpace& space, int horizon);

struct CandidateOutcome {
  SearchCandidate candidate;
  std::string status;  // "ok", "resource-skip", or "failed: <reason>"
  std::optional<double> objective_nrmse;
  std::optional<double> spearman;
  double wall_seconds = 0.0;
};

struct SearchOptions {
  std::uint64_t seed = 0;
  int horizon = 500;
  int max_cv_steps = 4;  // CV prefix evaluated per candidate
  std::size_t memory_cap_bytes = 2ull << 30;
};

struct SearchResult {
  std::vector<CandidateOutcome> leaderboard;  // sorted: best objective first
  std::size_t n_landmarks = 0;
  std::optional<SearchCandidate> best;
};

/// Working-set estimate (parameters, optimizer state, one batch of
/// activations); candidates above the cap are skipped with status
/// "resource-skip" instead of being allowed to crash the run.
std::size_t estimate_memory_bytes(const tcn::TcnHyperParams& hp, int batch_size);

SearchResult landmark_search(const SearchSpace& space, const tcn::SeriesData& series,
                             const TrainBudget& budget, const SearchOptions& options);

}  // namespace coldstart::train
