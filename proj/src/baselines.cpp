#include "coldstart/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "coldstart/errors.hpp"

namespace coldstart::baselines {

namespace {

std::vector<double> difference(std::span<const double> series, int d) {
  std::vector<double> w(series.begin(), series.end());
  for (int round = 0; round < d; ++round) {
    if (w.size() < 2) throw DataError("arx: series too short to difference");
    std::vector<double> next(w.size() - 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) next[i] = w[i + 1] - w[i];
    w = std::move(next);
  }
  return w;
}

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd b;
};

// Rows: one per differenced-series index t in [p, m). Regressors are
// [1, w[t-1..t-p], exog columns at the target's original index].
Design build_design(std::span<const double> series,
                    const std::vector<std::vector<double>>& exog, int p, int d) {
  for (const auto& col : exog) {
    if (col.size() != series.size()) throw DataError("arx: exog column length mismatch");
  }
  const std::vector<double> w = difference(series, d);
  const long m = static_cast<long>(w.size());
  const long rows = m - p;
  const long cols = 1 + p + static_cast<long>(exog.size());
  if (rows < cols) throw DataError("arx: series too short for requested orders");
  Design design;
  design.x.resize(rows, cols);
  design.b.resize(rows);
  for (long r = 0; r < rows; ++r) {
    const long t = r + p;
    design.b(r) = w[static_cast<std::size_t>(t)];
    design.x(r, 0) = 1.0;
    for (int lag = 1; lag <= p; ++lag) {
      design.x(r, lag) = w[static_cast<std::size_t>(t - lag)];
    }
    for (std::size_t e = 0; e < exog.size(); ++e) {
      design.x(r, 1 + p + static_cast<long>(e)) = exog[e][static_cast<std::size_t>(t + d)];
    }
  }
  return design;
}

}  // namespace

std::vector<double> es_forecast(std::span<const double> series, double alpha, int horizon) {
  if (series.empty()) throw DataError("es_forecast: empty series");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("es_forecast: alpha must be in (0, 1]");
  if (horizon < 0) throw ConfigError("es_forecast: negative horizon");
  double level = series[0];
  for (std::size_t i = 1; i < series.size(); ++i) {
    level = alpha * series[i] + (1.0 - alpha) * level;
  }
  return std::vector<double>(static_cast<std::size_t>(horizon), level);
}

std::vector<double> naive_forecast(std::span<const double> series, int horizon) {
  if (series.empty()) throw DataError("naive_forecast: empty series");
  if (horizon < 0) throw ConfigError("naive_forecast: negative horizon");
  return std::vector<double>(static_cast<std::size_t>(horizon), series.back());
}

ArxParams arx_fit(std::span<const double> series,
                  const std::vector<std::vector<double>>& exog, int ar_order,
                  int diff_order) {
  if (ar_order < 0) throw ConfigError("arx_fit: negative AR order");
  if (diff_order != 0 && diff_order != 1) throw ConfigError("arx_fit: diff order must be 0 or 1");
  const Design design = build_design(series, exog, ar_order, diff_order);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  if (qr.rank() < design.x.cols()) {
    throw DataError("arx_fit: singular design matrix (rank " + std::to_string(qr.rank()) +
                    " of " + std::to_string(design.x.cols()) + ")");
  }
  const Eigen::VectorXd coef = qr.solve(design.b);
  ArxParams params;
  params.ar_order = ar_order;
  params.diff_order = diff_order;
  params.n_exog = static_cast<int>(exog.size());
  params.coef.assign(coef.data(), coef.data() + coef.size());
  return params;
}

std::vector<double> arx_forecast(const ArxParams& params, std::span<const double> history,
                                 const std::vector<std::vector<double>>& future_exog,
                                 int horizon) {
  if (horizon < 0) throw ConfigError("arx_forecast: negative horizon");
  if (static_cast<int>(future_exog.size()) != params.n_exog) {
    throw DataError("arx_forecast: future exog column count mismatch");
  }
  for (const auto& col : future_exog) {
    if (static_cast<int>(col.size()) < horizon) {
      throw DataError("arx_forecast: future exog column shorter than horizon");
    }
  }
  const int p = params.ar_order;
  const int d = params.diff_order;
  if (static_cast<int>(history.size()) < p + d + 1) {
    throw DataError("arx_forecast: history shorter than AR order");
  }
  std::vector<double> w = difference(history, d);
  std::vector<double> w_future;
  w_future.reserve(static_cast<std::size_t>(horizon));
  for (int j = 0; j < horizon; ++j) {
    double value = params.coef[0];
    for (int lag = 1; lag <= p; ++lag) {
      const long idx = static_cast<long>(w.size()) + j - lag;
      const double w_lag = idx < static_cast<long>(w.size())
                               ? w[static_cast<std::size_t>(idx)]
                               : w_future[static_cast<std::size_t>(idx - static_cast<long>(w.size()))];
      value += params.coef[static_cast<std::size_t>(lag)] * w_lag;
    }
    for (int e = 0; e < params.n_exog; ++e) {
      value += params.coef[static_cast<std::size_t>(1 + p + e)] *
               future_exog[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)];
    }
    w_future.push_back(value);
  }
  if (d == 0) return w_future;
  std::vector<double> out(static_cast<std::size_t>(horizon));
  double level = history.back();
  for (int j = 0; j < horizon; ++j) {
    level += w_future[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)] = level;
  }
  return out;
}

double arx_residual_orthogonality(const ArxParams& params, std::span<const double> series,
                                  const std::vector<std::vector<double>>& exog) {
  const Design design = build_design(series, exog, params.ar_order, params.diff_order);
  Eigen::Map<const Eigen::VectorXd> coef(params.coef.data(),
                                         static_cast<long>(params.coef.size()));
  const Eigen::VectorXd residual = design.b - design.x * coef;
  return (design.x.transpose() * residual).cwiseAbs().maxCoeff();
}

}  // namespace coldstart::baselines
