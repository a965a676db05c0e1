#include "coldstart/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "coldstart/errors.hpp"

namespace coldstart::policy {

std::string action_kind_name(PolicyAction::Kind kind) {
  switch (kind) {
    case PolicyAction::Kind::ProvisionShell: return "provision_shell";
    case PolicyAction::Kind::BindShellToFunction: return "bind_shell";
    case PolicyAction::Kind::ExtendKeepAlive: return "extend_keepalive";
    case PolicyAction::Kind::Decommission: return "decommission";
    case PolicyAction::Kind::RankResources: return "rank_resources";
  }
  return "unknown";
}

}  // namespace coldstart::policy

namespace coldstart::sim {

std::string event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Arrival: return "arrival";
    case EventKind::ProvisionComplete: return "provision_complete";
    case EventKind::KeepAliveExpiry: return "keepalive_expiry";
    case EventKind::PolicyTick: return "policy_tick";
    case EventKind::ExecutionComplete: return "execution_complete";
    case EventKind::BindComplete: return "bind_complete";
  }
  return "unknown";
}

void SimConfig::validate() const {
  if (cold_start_minutes < 0.0) throw ConfigError("sim: cold_start_minutes must be >= 0");
  if (keepalive_minutes < 0.0) throw ConfigError("sim: keepalive_minutes must be >= 0");
  if (policy_tick_minutes <= 0.0) throw ConfigError("sim: policy_tick_minutes must be > 0");
}

nlohmann::json SimReport::to_json() const {
  nlohmann::json per_func = nlohmann::json::array();
  for (const auto& [func, stats] : per_function) {
    per_func.push_back({{"func_id", func},
                        {"arrivals", stats.arrivals},
                        {"cold", stats.cold},
                        {"warm", stats.warm}});
  }
  return nlohmann::json{{"schema_version", 1},
                        {"arrivals_total", arrivals_total},
                        {"cold_count", cold_count},
                        {"warm_count", warm_count},
                        {"cold_fraction", cold_fraction},
                        {"warm_idle_node_minutes", warm_idle_node_minutes},
                        {"latency_mean_minutes", latency_mean_minutes},
                        {"latency_p95_minutes", latency_p95_minutes},
                        {"sim_end_minutes", sim_end_minutes},
                        {"rejected_actions", rejected_actions},
                        {"fallback_windows", fallback_windows},
                        {"provider_failures", provider_failures},
                        {"per_function", per_func}};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  long seq = 0;
  long node_id = -1;
  long record_index = -1;
  long generation = 0;

  bool operator>(const Event& other) const {
    return std::tuple(time, static_cast<int>(kind), seq) >
           std::tuple(other.time, static_cast<int>(other.kind), other.seq);
  }
};

struct Node {
  long id = 0;
  long func_id = -1;  // -1 while an unbound shell
  NodeState state = NodeState::Provisioning;
  double state_since = 0.0;
  double idle_expiry = kInf;
  double keepalive_until_hint = 0.0;  // requested first-idle extension
  long expiry_generation = 0;
  bool retired = false;
  bool is_shell = false;
  std::optional<double> pending_exec;
  long pending_record = -1;
  double warm_idle_accum = 0.0;
};

class Engine {
 public:
  Engine(const trace::ArrivalDataset& dataset, const SimConfig& cfg, Policy* policy)
      : dataset_(dataset), cfg_(cfg), policy_(policy) {
    cfg.validate();
    dataset.validate();
  }

  RunResult run() {
    for (std::size_t i = 0; i < dataset_.records.size(); ++i) {
      push(static_cast<double>(dataset_.records[i].arrival_minute), EventKind::Arrival, -1,
           static_cast<long>(i));
    }
    if (!dataset_.records.empty()) {
      last_arrival_time_ = static_cast<double>(dataset_.records.back().arrival_minute);
    }
    if (policy_) push(0.0, EventKind::PolicyTick, -1, -1);

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      sim_end_ = std::max(sim_end_, ev.time);
      dispatch(ev);
    }

    // Idle tails of nodes still alive when the queue drains (infinite
    // keep-alive, or extensions past the last event).
    for (auto& node : nodes_) {
      if (!node.retired && node.state == NodeState::WarmIdle) {
        node.warm_idle_accum += std::max(0.0, sim_end_ - node.state_since);
      }
    }

    RunResult result;
    result.report = make_report();
    if (policy_) policy_->finalize(result.report);
    result.event_log = std::move(log_);
    return result;
  }

 private:
  void push(double time, EventKind kind, long node_id, long record_index, long generation = 0) {
    queue_.push(Event{time, kind, seq_++, node_id, record_index, generation});
  }

  void log(nlohmann::json entry) {
    if (cfg_.emit_event_log) log_.push_back(std::move(entry));
  }

  Node& new_node(long func_id, bool is_shell, double now) {
    Node node;
    node.id = static_cast<long>(nodes_.size());
    node.func_id = func_id;
    node.state = NodeState::Provisioning;
    node.state_since = now;
    node.is_shell = is_shell;
    nodes_.push_back(std::move(node));
    return nodes_.back();
  }

  /// Earliest-expiring warm idle node bound to `func` (use-it-before-you-
  /// lose-it keeps cold counts monotone in the keep-alive window).
  Node* find_warm(long func, double now) {
    Node* best = nullptr;
    for (auto& node : nodes_) {
      if (node.retired || node.state != NodeState::WarmIdle || node.func_id != func) continue;
      if (node.idle_expiry < now) continue;  // expiry event still queued
      if (!best || std::tuple(node.idle_expiry, node.id) <
                       std::tuple(best->idle_expiry, best->id)) {
        best = &node;
      }
    }
    return best;
  }

  Node* find_idle_shell(long preferred_id, double now) {
    Node* best = nullptr;
    for (auto& node : nodes_) {
      if (node.retired || node.state != NodeState::WarmIdle || node.func_id >= 0) continue;
      if (node.idle_expiry < now) continue;
      if (preferred_id >= 0) {
        if (node.id == preferred_id) return &node;
        continue;
      }
      if (!best || std::tuple(node.idle_expiry, node.id) <
                       std::tuple(best->idle_expiry, best->id)) {
        best = &node;
      }
    }
    return best;
  }

  void leave_idle(Node& node, double now) {
    node.warm_idle_accum += std::max(0.0, now - node.state_since);
  }

  void enter_idle(Node& node, double now) {
    node.state = NodeState::WarmIdle;
    node.state_since = now;
    double expiry = std::isinf(cfg_.keepalive_minutes) ? kInf : now + cfg_.keepalive_minutes;
    if (node.keepalive_until_hint > expiry) expiry = node.keepalive_until_hint;
    node.keepalive_until_hint = 0.0;
    node.idle_expiry = expiry;
    node.expiry_generation += 1;
    if (std::isfinite(expiry)) {
      push(expiry, EventKind::KeepAliveExpiry, node.id, -1, node.expiry_generation);
    }
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::Arrival: on_arrival(ev); break;
      case EventKind::ProvisionComplete: on_provision_complete(ev); break;
      case EventKind::KeepAliveExpiry: on_keepalive_expiry(ev); break;
      case EventKind::PolicyTick: on_policy_tick(ev); break;
      case EventKind::ExecutionComplete: on_execution_complete(ev); break;
      case EventKind::BindComplete: on_bind_complete(ev); break;
    }
  }

  void on_arrival(const Event& ev) {
    const auto& record = dataset_.records[static_cast<std::size_t>(ev.record_index)];
    const double exec_minutes = record.avg_exec_ms / 60000.0;
    auto& stats = per_function_[record.func_id];
    stats.arrivals += 1;
    Node* warm = find_warm(record.func_id, ev.time);
    if (warm) {
      leave_idle(*warm, ev.time);
      warm->state = NodeState::Busy;
      warm->state_since = ev.time;
      push(ev.time + exec_minutes, EventKind::ExecutionComplete, warm->id, -1);
      warm_count_ += 1;
      stats.warm += 1;
      latencies_.push_back(exec_minutes);
      log({{"seq", ev.seq}, {"t", ev.time}, {"kind", "arrival"}, {"record", ev.record_index},
           {"func", record.func_id}, {"cold", false}, {"node", warm->id}});
    } else {
      Node& node = new_node(record.func_id, false, ev.time);
      node.pending_exec = exec_minutes;
      node.pending_record = ev.record_index;
      push(ev.time + cfg_.cold_start_minutes, EventKind::ProvisionComplete, node.id, -1);
      cold_count_ += 1;
      stats.cold += 1;
      latencies_.push_back(cfg_.cold_start_minutes + exec_minutes);
      log({{"seq", ev.seq}, {"t", ev.time}, {"kind", "arrival"}, {"record", ev.record_index},
           {"func", record.func_id}, {"cold", true}, {"node", node.id}});
    }
  }

  void on_provision_complete(const Event& ev) {
    Node& node = nodes_[static_cast<std::size_t>(ev.node_id)];
    if (node.retired) return;
    log({{"seq", ev.seq}, {"t", ev.time}, {"kind", "provision_complete"}, {"node", node.id},
         {"func", node.func_id}});
    if (node.pending_exec) {
      // Provisioning -> WarmIdle -> Busy collapses to one instant: the
      // waiting request binds immediately.
      const double exec_minutes = *node.pending_exec;
      node.pending_exec.reset();
      node.pending_record = -1;
      node.state = NodeState::Busy;
      node.state_since = ev.time;
      push(ev.time + exec_minutes, EventKind::ExecutionComplete, node.id, -1);
    } else {
      enter_idle(node, ev.time);
    }
  }

  void on_execution_complete(const Event& ev) {
    Node& node = nodes_[static_cast<std::size_t>(ev.node_id)];
    if (node.retired) return;
    log({{"seq", ev.seq}, {"t", ev.time}, {"kind", "execution_complete"}, {"node", node.id},
         {"func", node.func_id}});
    enter_idle(node, ev.time);
  }

  void on_bind_complete(const Event& ev) {
    Node& node = nodes_[static_cast<std::size_t>(ev.node_id)];
    if (node.retired) return;
    log({{"seq", ev.seq}, {"t", ev.time}, {"kind", "bind_complete"}, {"node", node.id},
         {"func", node.func_id}});
    enter_idle(node, ev.time);
  }

  void on_keepalive_expiry(const Event& ev) {
    Node& node = nodes_[static_cast<std::size_t>(ev.node_id)];
    if (node.retired || node.state != NodeState::WarmIdle) return;
    if (ev.generation != node.expiry_generation) return;  // superseded
    leave_idle(node, ev.time);
    node.retired = true;
    log({{"seq", ev.seq}, {"t", ev.time}, {"kind", "keepalive_expiry"}, {"node", node.id},
         {"func", node.func_id}});
  }

  void on_policy_tick(const Event& ev) {
    log({{"seq", ev.seq}, {"t", ev.time}, {"kind", "policy_tick"}});
    if (policy_) {
      const PoolSnapshot snapshot = make_snapshot(ev.time);
      const std::vector<policy::PolicyAction> actions = policy_->on_tick(ev.time, snapshot);
      for (const auto& action : actions) apply_action(action, ev.time);
    }
    const double next = ev.time + cfg_.policy_tick_minutes;
    if (ev.time < last_arrival_time_) {
      push(next, EventKind::PolicyTick, -1, -1);
    }
  }

  PoolSnapshot make_snapshot(double now) const {
    PoolSnapshot snap;
    snap.now = now;
    snap.vocab_size = dataset_.vocab_size;
    snap.nodes.reserve(nodes_.size());
    for (const auto& node : nodes_) {
      if (node.retired) continue;
      NodeView view;
      view.id = node.id;
      view.func_id = node.func_id;
      view.state = node.state;
      view.state_since = node.state_since;
      view.idle_expiry = node.idle_expiry;
      view.has_pending_request = node.pending_exec.has_value();
      snap.nodes.push_back(view);
    }
    return snap;
  }

  void reject(const policy::PolicyAction& action, double now, const std::string& reason) {
    rejected_actions_ += 1;
    log({{"t", now}, {"kind", "action"}, {"type", policy::action_kind_name(action.kind)},
         {"accepted", false}, {"reason", reason}});
  }

  void apply_action(const policy::PolicyAction& action, double now) {
    using Kind = policy::PolicyAction::Kind;
    switch (action.kind) {
      case Kind::ProvisionShell: {
        if (action.count < 1) {
          reject(action, now, "shell count must be >= 1");
          return;
        }
        for (long i = 0; i < action.count; ++i) {
          Node& node = new_node(-1, true, now);
          node.keepalive_until_hint = action.keepalive_until;
          push(now + cfg_.cold_start_minutes, EventKind::ProvisionComplete, node.id, -1);
          log({{"t", now}, {"kind", "action"}, {"type", "provision_shell"},
               {"accepted", true}, {"node", node.id}});
        }
        return;
      }
      case Kind::BindShellToFunction: {
        if (action.func_id < 0 || action.func_id >= dataset_.vocab_size) {
          reject(action, now, "unknown function");
          return;
        }
        Node* shell = find_idle_shell(action.node_id, now);
        if (!shell) {
          reject(action, now, "no eligible idle shell");
          return;
        }
        leave_idle(*shell, now);
        shell->func_id = action.func_id;
        shell->state = NodeState::Provisioning;
        shell->state_since = now;
        shell->keepalive_until_hint = action.keepalive_until;
        push(now + cfg_.bind_latency(), EventKind::BindComplete, shell->id, -1);
        log({{"t", now}, {"kind", "action"}, {"type", "bind_shell"}, {"accepted", true},
             {"node", shell->id}, {"func", action.func_id}});
        return;
      }
      case Kind::ExtendKeepAlive: {
        if (action.node_id < 0 || action.node_id >= static_cast<long>(nodes_.size())) {
          reject(action, now, "unknown node");
          return;
        }
        Node& node = nodes_[static_cast<std::size_t>(action.node_id)];
        if (node.retired || node.state != NodeState::WarmIdle) {
          reject(action, now, "node not warm idle");
          return;
        }
        const double extended = now + action.minutes;
        if (extended > node.idle_expiry) {
          node.idle_expiry = extended;
          node.expiry_generation += 1;
          if (std::isfinite(extended)) {
            push(extended, EventKind::KeepAliveExpiry, node.id, -1, node.expiry_generation);
          }
        }
        log({{"t", now}, {"kind", "action"}, {"type", "extend_keepalive"},
             {"accepted", true}, {"node", node.id}, {"until", node.idle_expiry}});
        return;
      }
      case Kind::Decommission: {
        if (action.node_id < 0 || action.node_id >= static_cast<long>(nodes_.size())) {
          reject(action, now, "unknown node");
          return;
        }
        Node& node = nodes_[static_cast<std::size_t>(action.node_id)];
        if (node.retired || node.state != NodeState::WarmIdle) {
          reject(action, now, "node not warm idle");
          return;
        }
        leave_idle(node, now);
        node.retired = true;
        log({{"t", now}, {"kind", "action"}, {"type", "decommission"}, {"accepted", true},
             {"node", node.id}});
        return;
      }
      case Kind::RankResources: {
        log({{"t", now}, {"kind", "action"}, {"type", "rank_resources"}, {"accepted", true}});
        return;
      }
    }
  }

  SimReport make_report() const {
    SimReport report;
    report.arrivals_total = static_cast<long>(dataset_.records.size());
    report.cold_count = cold_count_;
    report.warm_count = warm_count_;
    report.cold_fraction =
        report.arrivals_total > 0
            ? static_cast<double>(cold_count_) / static_cast<double>(report.arrivals_total)
            : 0.0;
    double idle = 0.0;
    for (const auto& node : nodes_) idle += node.warm_idle_accum;
    report.warm_idle_node_minutes = idle;
    if (!latencies_.empty()) {
      double acc = 0.0;
      for (double v : latencies_) acc += v;
      report.latency_mean_minutes = acc / static_cast<double>(latencies_.size());
      std::vector<double> sorted = latencies_;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t idx = std::min(
          sorted.size() - 1,
          static_cast<std::size_t>(
              std::ceil(0.95 * static_cast<double>(sorted.size())) - 1));
      report.latency_p95_minutes = sorted[idx];
    }
    report.sim_end_minutes = sim_end_;
    report.rejected_actions = rejected_actions_;
    report.per_function = per_function_;
    return report;
  }

  const trace::ArrivalDataset& dataset_;
  SimConfig cfg_;
  Policy* policy_ = nullptr;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::vector<Node> nodes_;
  std::vector<nlohmann::json> log_;
  std::vector<double> latencies_;
  std::map<long, PerFunctionStats> per_function_;
  long seq_ = 0;
  long cold_count_ = 0;
  long warm_count_ = 0;
  long rejected_actions_ = 0;
  double sim_end_ = 0.0;
  double last_arrival_time_ = 0.0;
};

}  // namespace

RunResult run(const trace::ArrivalDataset& dataset, const SimConfig& cfg, Policy* policy) {
  Engine engine(dataset, cfg, policy);
  return engine.run();
}

}  // namespace coldstart::sim
