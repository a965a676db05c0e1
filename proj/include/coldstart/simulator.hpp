#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coldstart/policy_action.hpp"
#include "coldstart/trace.hpp"

namespace coldstart::sim {

/// Queue order is (time, kind, sequence); the first four kinds follow the
/// wire schema's original order, the remaining ones are later additions the
/// event loop needs for busy->idle and shell->worker transitions.
enum class EventKind {
  Arrival = 0,
  ProvisionComplete = 1,
  KeepAliveExpiry = 2,
  PolicyTick = 3,
  ExecutionComplete = 4,
  BindComplete = 5,
};

std::string event_kind_name(EventKind kind);

enum class NodeState { Provisioning, WarmIdle, Busy };

struct SimConfig {
  double cold_start_minutes = 0.5;
  double keepalive_minutes = 10.0;  // may be infinity
  double bind_minutes = -1.0;       // < 0 selects 0.2 * cold_start_minutes
  double policy_tick_minutes = 1.0;
  std::uint64_t seed = 0;
  bool emit_event_log = true;

  double bind_latency() const {
    return bind_minutes >= 0.0 ? bind_minutes : 0.2 * cold_start_minutes;
  }
  void validate() const;
};

struct NodeView {
  long id = -1;
  long func_id = -1;  // -1 for an unbound shell
  NodeState state = NodeState::Provisioning;
  double state_since = 0.0;
  double idle_expiry = std::numeric_limits<double>::infinity();
  bool has_pending_request = false;  // a cold arrival is waiting on this node
};

struct PoolSnapshot {
  double now = 0.0;
  long vocab_size = 0;
  std::vector<NodeView> nodes;
};

struct PerFunctionStats {
  long arrivals = 0;
  long cold = 0;
  long warm = 0;
};

struct SimReport {
  long arrivals_total = 0;
  long cold_count = 0;
  long warm_count = 0;
  double cold_fraction = 0.0;
  double warm_idle_node_minutes = 0.0;
  double latency_mean_minutes = 0.0;
  double latency_p95_minutes = 0.0;
  double sim_end_minutes = 0.0;
  long rejected_actions = 0;
  long fallback_windows = 0;   // filled by policies that gate on confidence
  long provider_failures = 0;  // filled by policies with live forecasters
  std::map<long, PerFunctionStats> per_function;

  nlohmann::json to_json() const;
};

/// Policy hook driven by PolicyTick events. Implementations read the
/// snapshot and return actions; the simulator remains the single writer.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<policy::PolicyAction> on_tick(double now,
                                                    const PoolSnapshot& pool) = 0;
  /// Lets a policy attach its own counters to the final report.
  virtual void finalize(SimReport& report) { (void)report; }
};

struct RunResult {
  SimReport report;
  std::vector<nlohmann::json> event_log;  // one object per event / action
};

/// Scale-per-request event loop: an arrival binds the warm idle node of its
/// function that expires soonest, otherwise provisions a fresh node and
/// waits out the cold start. Deterministic for a fixed (dataset, config).
RunResult run(const trace::ArrivalDataset& dataset, const SimConfig& cfg,
              Policy* policy = nullptr);

/// Perfect-foresight upper bound: the ensemble policy fed by ground-truth
/// future arrivals. Defined alongside the policy implementations.
RunResult oracle_policy_run(const trace::ArrivalDataset& dataset, const SimConfig& cfg);

}  // namespace coldstart::sim
