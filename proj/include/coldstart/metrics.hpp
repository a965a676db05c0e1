#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coldstart::metrics {

/// Mean absolute percentage error with a small-denominator guard.
/// Points whose |actual| falls below the guard are counted and reported.
struct MapeResult {
  double percent = 0.0;
  long guarded_points = 0;
};

// All variances are population variances (divide by n), stated here once.

double explained_variance(std::span<const double> y, std::span<const double> y_hat);
MapeResult mape(std::span<const double> y, std::span<const double> y_hat,
                bool guard = true);
double nrmse(std::span<const double> y, std::span<const double> y_hat);
double r2(std::span<const double> y, std::span<const double> y_hat);
double spearman(std::span<const double> y, std::span<const double> y_hat);

/// Average ranks, ties averaged (1-based).
std::vector<double> average_ranks(std::span<const double> values);

/// One row of the benchmark tables. Metrics whose preconditions fail are
/// absent, with the reason kept in `undefined`.
struct MetricReport {
  std::optional<double> explained_variance;
  std::optional<double> mape_percent;
  std::optional<double> nrmse;
  std::optional<double> r2;
  std::optional<double> spearman;
  long n_points = 0;
  long mape_guarded_points = 0;
  std::vector<std::string> undefined;
};

MetricReport compute_all(std::span<const double> y, std::span<const double> y_hat,
                         bool mape_guard = true);

}  // namespace coldstart::metrics
