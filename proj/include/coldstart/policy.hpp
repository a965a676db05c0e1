#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "coldstart/policy_action.hpp"
#include "coldstart/simulator.hpp"
#include "coldstart/tcn.hpp"
#include "coldstart/trace.hpp"

namespace coldstart::policy {

struct PredictedArrival {
  long func_id = -1;
  double minute = 0.0;
};

/// Source of (function, arrival-minute) predictions for the next window.
/// confidence() is the validation-Spearman proxy of the producing model.
class ForecastProvider {
 public:
  virtual ~ForecastProvider() = default;
  virtual std::vector<PredictedArrival> window(double now, double window_minutes) = 0;
  virtual double confidence() const = 0;
};

/// Perfect foresight straight from the trace; confidence 1.
class GroundTruthForecastProvider : public ForecastProvider {
 public:
  explicit GroundTruthForecastProvider(const trace::ArrivalDataset& dataset)
      : dataset_(&dataset) {}
  std::vector<PredictedArrival> window(double now, double window_minutes) override;
  double confidence() const override { return 1.0; }

 private:
  const trace::ArrivalDataset* dataset_;
};

/// Live chained pipeline: the name model predicts the next instances'
/// functions, the arrival-time model (conditioned on those names) predicts
/// when they land. Conditions only on arrivals observed up to `now`.
class TcnForecastProvider : public ForecastProvider {
 public:
  TcnForecastProvider(tcn::TcnModel name_model, tcn::TcnModel time_model,
                      const trace::ArrivalDataset& dataset, double validation_spearman);
  std::vector<PredictedArrival> window(double now, double window_minutes) override;
  double confidence() const override { return confidence_; }

 private:
  void refresh(long n_observed);

  tcn::TcnModel name_model_;
  tcn::TcnModel time_model_;
  const trace::ArrivalDataset* dataset_;
  tcn::SeriesData series_a_;
  tcn::SeriesData series_b_;
  tcn::FunctionMeta meta_;
  double confidence_ = 0.0;
  long cached_observed_ = -1;
  std::vector<PredictedArrival> cached_;
};

/// Per-function static requirements (the registered-function metadata the
/// scheduler consults instead of analyzing function code).
struct FunctionRequirements {
  double bind_lead_minutes = 0.0;
};
using RequirementsTable = std::map<long, FunctionRequirements>;

struct DemandEstimate {
  std::map<long, long> per_function_count;
  std::vector<PredictedArrival> arrivals;
  double confidence = 0.0;
  long stale_dropped = 0;  // predictions already in the past at inference time
};

struct PathAResult {
  DemandEstimate demand;
  std::vector<PolicyAction> actions;  // ProvisionShell(net deficit) or RankResources
  std::vector<long> ranking;          // warm idle nodes, longest idle first
  std::vector<std::pair<long, double>> covered_pairs;  // (node id, arrival it covers)
  long total_deficit = 0;
};

/// Infrastructure-level inference: per-function deficit against warm and
/// in-flight capacity; provisions shells (net of shells already available)
/// when demand is uncovered, otherwise ranks existing warm resources.
PathAResult path_a_infer(const std::vector<PredictedArrival>& forecast_window,
                         const sim::PoolSnapshot& pool, double confidence);

struct BindingPlanEntry {
  long shell_node_id = -1;
  long func_id = -1;
  double bind_start = 0.0;
  double bind_complete = 0.0;
  double predicted_arrival = 0.0;
  bool feasible = false;
};

struct BindingPlan {
  std::vector<BindingPlanEntry> entries;
  long shortfall = 0;  // uncovered predictions with no shell to bind
};

/// Function-level scheduling: orders uncovered predictions by required
/// provisioning start (arrival minus per-function lead) and assigns idle
/// shells so each bind completes before its predicted arrival when feasible.
BindingPlan path_b_schedule(const std::vector<PredictedArrival>& forecast_window,
                            const DemandEstimate& demand, const std::vector<long>& ranking,
                            const sim::PoolSnapshot& pool, const RequirementsTable& reqs,
                            double default_lead_minutes, double safety_margin_minutes,
                            double now);

/// Independent re-check of a plan against the pool: no double-assigned
/// shells, shells actually idle and unbound, feasibility flags consistent
/// with the lead-time arithmetic.
bool validate_binding_plan(const BindingPlan& plan, const sim::PoolSnapshot& pool, double now);

/// The fixed keep-alive baseline: no proactive actions at all; idle nodes
/// live and die by the simulator's keep-alive config.
class FixedKeepAlivePolicy : public sim::Policy {
 public:
  std::vector<PolicyAction> on_tick(double now, const sim::PoolSnapshot& pool) override {
    (void)now;
    (void)pool;
    return {};
  }
};

struct EnsembleOptions {
  double window_minutes = 10.0;
  double confidence_floor = 0.0;
  double bind_latency_minutes = 0.1;  // keep equal to the simulator's bind latency
  double tick_minutes = 1.0;          // keep equal to the simulator's tick cadence
  double safety_margin_minutes = 0.05;
  double post_arrival_keepalive_minutes = 1.0;
  bool decommission_surplus = true;
  RequirementsTable requirements;
};

/// Two parallel paths per tick: A infers demand and provisions shells /
/// ranks resources, B turns A's ranking into shell-to-function binds timed
/// against predicted arrivals. Below the confidence floor (or on provider
/// failure) the tick defers entirely to the fixed keep-alive fallback,
/// i.e. emits nothing.
class EnsemblePolicy : public sim::Policy {
 public:
  EnsemblePolicy(ForecastProvider& provider, EnsembleOptions options);
  std::vector<PolicyAction> on_tick(double now, const sim::PoolSnapshot& pool) override;
  void finalize(sim::SimReport& report) override;

  long fallback_windows() const { return fallback_windows_; }
  const BindingPlan& last_plan() const { return last_plan_; }

 private:
  ForecastProvider* provider_;
  EnsembleOptions options_;
  long fallback_windows_ = 0;
  long provider_failures_ = 0;
  BindingPlan last_plan_;
};

/// Requirements table with every function's bind lead set to the simulator's
/// bind latency.
RequirementsTable default_requirements(const trace::ArrivalDataset& dataset,
                                       const sim::SimConfig& cfg);

/// Ensemble options consistent with a simulator config.
EnsembleOptions ensemble_options_for(const sim::SimConfig& cfg,
                                     const trace::ArrivalDataset& dataset);

}  // namespace coldstart::policy
