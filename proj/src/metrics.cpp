#include "coldstart/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coldstart/errors.hpp"

namespace coldstart::metrics {

namespace {
constexpr double kMapeGuard = 1e-9;

void require_equal_lengths(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw MetricError("metric: length mismatch");
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}
}  // namespace

double explained_variance(std::span<const double> y, std::span<const double> y_hat) {
  require_equal_lengths(y, y_hat);
  if (y.size() < 2) throw MetricError("explained_variance: needs >= 2 points");
  const double var_y = population_variance(y);
  if (var_y <= 0.0) throw MetricError("explained_variance: zero variance in actuals");
  std::vector<double> err(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) err[i] = y[i] - y_hat[i];
  return 1.0 - population_variance(err) / var_y;
}

MapeResult mape(std::span<const double> y, std::span<const double> y_hat, bool guard) {
  require_equal_lengths(y, y_hat);
  if (y.empty()) throw MetricError("mape: empty input");
  MapeResult r;
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double abs_y = std::abs(y[i]);
    double denom = abs_y;
    if (guard && abs_y < kMapeGuard) {
      denom = kMapeGuard;
      ++r.guarded_points;
    }
    acc += std::abs(y[i] - y_hat[i]) / denom;
  }
  r.percent = acc / static_cast<double>(y.size()) * 100.0;
  return r;
}

double nrmse(std::span<const double> y, std::span<const double> y_hat) {
  require_equal_lengths(y, y_hat);
  if (y.size() < 2) throw MetricError("nrmse: needs >= 2 points");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  if (range <= 0.0) throw MetricError("nrmse: zero range in actuals");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return std::sqrt(acc / static_cast<double>(y.size())) / range;
}

double r2(std::span<const double> y, std::span<const double> y_hat) {
  require_equal_lengths(y, y_hat);
  if (y.size() < 2) throw MetricError("r2: needs >= 2 points");
  const double m = mean(y);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    ss_tot += (y[i] - m) * (y[i] - m);
  }
  if (ss_tot <= 0.0) throw MetricError("r2: zero variance in actuals");
  return 1.0 - ss_res / ss_tot;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> y, std::span<const double> y_hat) {
  require_equal_lengths(y, y_hat);
  if (y.size() < 2) throw MetricError("spearman: needs >= 2 points");
  const auto distinct = [](std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] != v[0]) return true;
    }
    return false;
  };
  if (!distinct(y)) throw MetricError("spearman: constant actuals (undefined ranks)");
  if (!distinct(y_hat)) throw MetricError("spearman: constant predictions (undefined ranks)");
  const std::vector<double> ra = average_ranks(y);
  const std::vector<double> rb = average_ranks(y_hat);
  const double ma = mean(ra);
  const double mb = mean(rb);
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

MetricReport compute_all(std::span<const double> y, std::span<const double> y_hat,
                         bool mape_guard) {
  MetricReport rep;
  rep.n_points = static_cast<long>(y.size());
  const auto record = [&rep](const char* name, const MetricError& e) {
    rep.undefined.push_back(std::string(name) + ": " + e.what());
  };
  try {
    rep.explained_variance = explained_variance(y, y_hat);
  } catch (const MetricError& e) {
    record("explained_variance", e);
  }
  try {
    const MapeResult m = mape(y, y_hat, mape_guard);
    rep.mape_percent = m.percent;
    rep.mape_guarded_points = m.guarded_points;
  } catch (const MetricError& e) {
    record("mape", e);
  }
  try {
    rep.nrmse = nrmse(y, y_hat);
  } catch (const MetricError& e) {
    record("nrmse", e);
  }
  try {
    rep.r2 = r2(y, y_hat);
  } catch (const MetricError& e) {
    record("r2", e);
  }
  try {
    rep.spearman = spearman(y, y_hat);
  } catch (const MetricError& e) {
    record("spearman", e);
  }
  return rep;
}

}  // namespace coldstart::metrics
