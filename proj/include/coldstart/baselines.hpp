#pragma once

#include <span>
#include <vector>

namespace coldstart::baselines {

/// Simple exponential smoothing: level initialized to the first observation,
/// then level = alpha*y + (1-alpha)*level; the forecast is the final level
/// repeated over the horizon. alpha in (0, 1].
std::vector<double> es_forecast(std::span<const double> series, double alpha, int horizon);

/// Repeats the final observation. Equivalent to es_forecast with alpha = 1.
std::vector<double> naive_forecast(std::span<const double> series, int horizon);

/// AR(p) on the d-times differenced series with optional exogenous columns,
/// fitted by ordinary least squares. Coefficient layout:
/// [intercept, lag 1..p, exog column 0..m-1].
struct ArxParams {
  int ar_order = 0;
  int diff_order = 0;  // 0 or 1
  int n_exog = 0;
  std::vector<double> coef;
};

/// exog: one column per exogenous regressor, each aligned with `series`
/// (same length). Throws DataError on a rank-deficient design matrix.
ArxParams arx_fit(std::span<const double> series,
                  const std::vector<std::vector<double>>& exog, int ar_order,
                  int diff_order);

/// Direct h-step forecast by recursive lag substitution on the differenced
/// scale, then inverse differencing from the last history value.
/// future_exog: one column per regressor, each of length `horizon`.
std::vector<double> arx_forecast(const ArxParams& params,
                                 std::span<const double> history,
                                 const std::vector<std::vector<double>>& future_exog,
                                 int horizon);

/// Max |X^T r| over the fitted design; used by the normal-equation check.
double arx_residual_orthogonality(const ArxParams& params,
                                  std::span<const double> series,
                                  const std::vector<std::vector<double>>& exog);

}  // namespace coldstart::baselines
