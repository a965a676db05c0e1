#include "coldstart/policy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coldstart/errors.hpp"

namespace coldstart::policy {

namespace {

/// Greedy per-function matching of predicted arrivals (time order) against
/// capacity that will be warm for them: idle bound nodes first (soonest
/// expiry first), then bound nodes still provisioning with no waiting
/// request (in-flight binds). Shared by path A and path B.
struct Coverage {
  std::vector<std::pair<long, double>> covered_pairs;  // (node id, arrival)
  std::vector<PredictedArrival> uncovered;
};

Coverage match_coverage(const std::vector<PredictedArrival>& preds,
                        const sim::PoolSnapshot& pool) {
  std::map<long, std::vector<const sim::NodeView*>> capacity;
  for (const auto& node : pool.nodes) {
    if (node.func_id < 0) continue;
    const bool idle = node.state == sim::NodeState::WarmIdle;
    const bool inbound =
        node.state == sim::NodeState::Provisioning && !node.has_pending_request;
    if (idle || inbound) capacity[node.func_id].push_back(&node);
  }
  for (auto& [func, nodes] : capacity) {
    (void)func;
    std::sort(nodes.begin(), nodes.end(),
              [](const sim::NodeView* a, const sim::NodeView* b) {
                const bool a_idle = a->state == sim::NodeState::WarmIdle;
                const bool b_idle = b->state == sim::NodeState::WarmIdle;
                if (a_idle != b_idle) return a_idle;
                return std::tuple(a->idle_expiry, a->id) < std::tuple(b->idle_expiry, b->id);
              });
  }
  std::map<long, std::vector<PredictedArrival>> by_func;
  for (const auto& p : preds) by_func[p.func_id].push_back(p);
  Coverage cov;
  for (auto& [func, arrivals] : by_func) {
    std::sort(arrivals.begin(), arrivals.end(),
              [](const PredictedArrival& a, const PredictedArrival& b) {
                return a.minute < b.minute;
              });
    const auto& nodes = capacity[func];
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      if (i < nodes.size()) {
        cov.covered_pairs.emplace_back(nodes[i]->id, arrivals[i].minute);
      } else {
        cov.uncovered.push_back(arrivals[i]);
      }
    }
  }
  return cov;
}

}  // namespace

std::vector<PredictedArrival> GroundTruthForecastProvider::window(double now,
                                                                  double window_minutes) {
  std::vector<PredictedArrival> out;
  for (const auto& r : dataset_->records) {
    const double minute = static_cast<double>(r.arrival_minute);
    if (minute <= now) continue;
    if (minute > now + window_minutes) break;
    out.push_back(PredictedArrival{r.func_id, minute});
  }
  return out;
}

TcnForecastProvider::TcnForecastProvider(tcn::TcnModel name_model, tcn::TcnModel time_model,
                                         const trace::ArrivalDataset& dataset,
                                         double validation_spearman)
    : name_model_(std::move(name_model)),
      time_model_(std::move(time_model)),
      dataset_(&dataset),
      series_a_(tcn::module_a_target(dataset)),
      series_b_(tcn::module_b_target(dataset)),
      meta_(tcn::FunctionMeta::from_dataset(dataset)),
      confidence_(validation_spearman) {}

void TcnForecastProvider::refresh(long n_observed) {
  cached_.clear();
  cached_observed_ = n_observed;
  const long anchor_a = n_observed;
  const long anchor_b = n_observed - 1;
  if (anchor_a < tcn::receptive_field(name_model_.hp) ||
      anchor_b < tcn::receptive_field(time_model_.hp) || anchor_b < 1) {
    return;  // not enough observed history to fill the receptive field
  }
  const tcn::NormStats stats_a = tcn::NormStats::compute(series_a_, 0, anchor_a);
  const tcn::ForecastResult names = tcn::forecast_at(name_model_, series_a_, stats_a, anchor_a);
  const tcn::SeriesData series_b_wired =
      tcn::apply_predicted_names(series_b_, anchor_b, names.values, meta_);
  const tcn::NormStats stats_b = tcn::NormStats::compute(series_b_wired, 0, anchor_b);
  const tcn::ForecastResult gaps =
      tcn::forecast_at(time_model_, series_b_wired, stats_b, anchor_b);
  const double last_minute =
      static_cast<double>(dataset_->records[static_cast<std::size_t>(n_observed - 1)]
                              .arrival_minute);
  const std::vector<double> minutes = tcn::reconstruct_arrival_minutes(gaps, last_minute);
  for (std::size_t j = 0; j < minutes.size() && j < names.values.size(); ++j) {
    long fid = static_cast<long>(std::llround(names.values[j]));
    fid = std::clamp<long>(fid, 0, dataset_->vocab_size - 1);
    cached_.push_back(PredictedArrival{fid, minutes[j]});
  }
}

std::vector<PredictedArrival> TcnForecastProvider::window(double now, double window_minutes) {
  long n_observed = 0;
  for (const auto& r : dataset_->records) {
    if (static_cast<double>(r.arrival_minute) <= now) {
      ++n_observed;
    } else {
      break;
    }
  }
  if (n_observed != cached_observed_) refresh(n_observed);
  std::vector<PredictedArrival> out;
  for (const auto& p : cached_) {
    if (p.minute > now && p.minute <= now + window_minutes) out.push_back(p);
  }
  return out;
}

PathAResult path_a_infer(const std::vector<PredictedArrival>& forecast_window,
                         const sim::PoolSnapshot& pool, double confidence) {
  PathAResult result;
  result.demand.confidence = confidence;
  for (const auto& p : forecast_window) {
    if (p.minute <= pool.now) {
      result.demand.stale_dropped += 1;  // window already past: no-op for it
      continue;
    }
    result.demand.arrivals.push_back(p);
    result.demand.per_function_count[p.func_id] += 1;
  }

  const Coverage cov = match_coverage(result.demand.arrivals, pool);
  result.covered_pairs = cov.covered_pairs;
  result.total_deficit = static_cast<long>(cov.uncovered.size());

  long shells_available = 0;
  for (const auto& node : pool.nodes) {
    if (node.func_id >= 0) continue;
    if (node.state == sim::NodeState::WarmIdle || node.state == sim::NodeState::Provisioning) {
      shells_available += 1;
    }
  }

  // Warm nodes ranked longest-idle first.
  std::vector<const sim::NodeView*> idle_nodes;
  for (const auto& node : pool.nodes) {
    if (node.state == sim::NodeState::WarmIdle) idle_nodes.push_back(&node);
  }
  std::sort(idle_nodes.begin(), idle_nodes.end(),
            [](const sim::NodeView* a, const sim::NodeView* b) {
              return std::tuple(a->state_since, a->id) < std::tuple(b->state_since, b->id);
            });
  for (const auto* node : idle_nodes) result.ranking.push_back(node->id);

  const long net_deficit = result.total_deficit - shells_available;
  if (result.total_deficit > 0 && net_deficit > 0) {
    double latest = pool.now;
    for (const auto& p : cov.uncovered) latest = std::max(latest, p.minute);
    PolicyAction action;
    action.kind = PolicyAction::Kind::ProvisionShell;
    action.issue_time = pool.now;
    action.count = net_deficit;
    action.keepalive_until = latest + 1.0;
    result.actions.push_back(action);
  } else {
    PolicyAction action;
    action.kind = PolicyAction::Kind::RankResources;
    action.issue_time = pool.now;
    result.actions.push_back(action);
  }
  return result;
}

BindingPlan path_b_schedule(const std::vector<PredictedArrival>& forecast_window,
                            const DemandEstimate& demand, const std::vector<long>& ranking,
                            const sim::PoolSnapshot& pool, const RequirementsTable& reqs,
                            double default_lead_minutes, double safety_margin_minutes,
                            double now) {
  (void)forecast_window;
  const Coverage cov = match_coverage(demand.arrivals, pool);

  struct Item {
    PredictedArrival arrival;
    double lead = 0.0;
    double required_start = 0.0;
  };
  std::vector<Item> items;
  items.reserve(cov.uncovered.size());
  for (const auto& p : cov.uncovered) {
    Item item;
    item.arrival = p;
    const auto it = reqs.find(p.func_id);
    item.lead = it != reqs.end() ? it->second.bind_lead_minutes : default_lead_minutes;
    item.required_start = p.minute - item.lead - safety_margin_minutes;
    items.push_back(item);
  }
  // The instance predicted to arrive first is not necessarily provisioned
  // first: order by when its bind has to start.
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tuple(a.required_start, a.arrival.minute, a.arrival.func_id) <
           std::tuple(b.required_start, b.arrival.minute, b.arrival.func_id);
  });

  // Idle unbound shells, in ranking order, then any not ranked.
  std::map<long, const sim::NodeView*> shell_by_id;
  for (const auto& node : pool.nodes) {
    if (node.func_id < 0 && node.state == sim::NodeState::WarmIdle) {
      shell_by_id[node.id] = &node;
    }
  }
  std::vector<const sim::NodeView*> shells;
  for (long id : ranking) {
    const auto it = shell_by_id.find(id);
    if (it != shell_by_id.end()) {
      shells.push_back(it->second);
      shell_by_id.erase(it);
    }
  }
  for (const auto& [id, node] : shell_by_id) {
    (void)id;
    shells.push_back(node);
  }

  BindingPlan plan;
  std::size_t next_shell = 0;
  for (const auto& item : items) {
    if (next_shell >= shells.size()) {
      plan.shortfall += 1;  // falls back to on-demand cold provisioning
      continue;
    }
    BindingPlanEntry entry;
    entry.shell_node_id = shells[next_shell++]->id;
    entry.func_id = item.arrival.func_id;
    entry.bind_start = std::max(now, item.required_start);
    entry.bind_complete = entry.bind_start + item.lead;
    entry.predicted_arrival = item.arrival.minute;
    entry.feasible = entry.bind_complete < item.arrival.minute;
    plan.entries.push_back(entry);
  }
  return plan;
}

bool validate_binding_plan(const BindingPlan& plan, const sim::PoolSnapshot& pool, double now) {
  std::set<long> idle_shells;
  for (const auto& node : pool.nodes) {
    if (node.func_id < 0 && node.state == sim::NodeState::WarmIdle) {
      idle_shells.insert(node.id);
    }
  }
  std::set<long> used;
  for (const auto& entry : plan.entries) {
    if (!used.insert(entry.shell_node_id).second) return false;  // double-assigned
    if (!idle_shells.count(entry.shell_node_id)) return false;
    if (entry.bind_start + 1e-12 < now) return false;
    if (entry.bind_complete < entry.bind_start) return false;
    const bool feasible = entry.bind_complete < entry.predicted_arrival;
    if (entry.feasible != feasible) return false;
  }
  return true;
}

EnsemblePolicy::EnsemblePolicy(ForecastProvider& provider, EnsembleOptions options)
    : provider_(&provider), options_(std::move(options)) {}

std::vector<PolicyAction> EnsemblePolicy::on_tick(double now, const sim::PoolSnapshot& pool) {
  const double confidence = provider_->confidence();
  if (confidence < options_.confidence_floor) {
    fallback_windows_ += 1;  // defer entirely to the fixed keep-alive fallback
    return {};
  }
  std::vector<PredictedArrival> preds;
  try {
    preds = provider_->window(now, options_.window_minutes);
  } catch (const std::exception&) {
    provider_failures_ += 1;
    fallback_windows_ += 1;  // seamless take-over by the fallback for this window
    return {};
  }

  PathAResult a = path_a_infer(preds, pool, confidence);
  std::vector<PolicyAction> actions = a.actions;

  BindingPlan plan =
      path_b_schedule(preds, a.demand, a.ranking, pool, options_.requirements,
                      options_.bind_latency_minutes, options_.safety_margin_minutes, now);
  last_plan_ = plan;

  std::set<long> reserved;
  for (const auto& entry : plan.entries) {
    if (!entry.feasible) continue;
    reserved.insert(entry.shell_node_id);
    if (entry.bind_start < now + options_.tick_minutes) {
      PolicyAction bind;
      bind.kind = PolicyAction::Kind::BindShellToFunction;
      bind.issue_time = now;
      bind.func_id = entry.func_id;
      bind.node_id = entry.shell_node_id;
      bind.keepalive_until =
          entry.predicted_arrival + options_.post_arrival_keepalive_minutes;
      actions.push_back(bind);
    } else {
      // Shell is planned for a later tick; make sure it survives until then.
      PolicyAction extend;
      extend.kind = PolicyAction::Kind::ExtendKeepAlive;
      extend.issue_time = now;
      extend.node_id = entry.shell_node_id;
      extend.minutes = entry.bind_start + options_.tick_minutes - now;
      actions.push_back(extend);
    }
  }

  // Keep matched warm nodes alive until their predicted arrivals.
  std::set<long> matched;
  for (const auto& [node_id, arrival] : a.covered_pairs) {
    matched.insert(node_id);
    for (const auto& node : pool.nodes) {
      if (node.id != node_id || node.state != sim::NodeState::WarmIdle) continue;
      const double needed = arrival + options_.safety_margin_minutes;
      if (node.idle_expiry < needed) {
        PolicyAction extend;
        extend.kind = PolicyAction::Kind::ExtendKeepAlive;
        extend.issue_time = now;
        extend.node_id = node_id;
        extend.minutes = arrival + options_.post_arrival_keepalive_minutes - now;
        actions.push_back(extend);
      }
    }
  }

  if (options_.decommission_surplus) {
    for (const auto& node : pool.nodes) {
      if (node.func_id < 0 || node.state != sim::NodeState::WarmIdle) continue;
      if (matched.count(node.id) || reserved.count(node.id)) continue;
      PolicyAction drop;
      drop.kind = PolicyAction::Kind::Decommission;
      drop.issue_time = now;
      drop.node_id = node.id;
      actions.push_back(drop);
    }
  }
  return actions;
}

void EnsemblePolicy::finalize(sim::SimReport& report) {
  report.fallback_windows = fallback_windows_;
  report.provider_failures = provider_failures_;
}

RequirementsTable default_requirements(const trace::ArrivalDataset& dataset,
                                       const sim::SimConfig& cfg) {
  RequirementsTable table;
  for (long f = 0; f < dataset.vocab_size; ++f) {
    table[f] = FunctionRequirements{cfg.bind_latency()};
  }
  return table;
}

EnsembleOptions ensemble_options_for(const sim::SimConfig& cfg,
                                     const trace::ArrivalDataset& dataset) {
  EnsembleOptions options;
  options.window_minutes =
      std::max(10.0, 3.0 * (cfg.cold_start_minutes + cfg.bind_latency()) +
                         3.0 * cfg.policy_tick_minutes);
  options.bind_latency_minutes = cfg.bind_latency();
  options.tick_minutes = cfg.policy_tick_minutes;
  options.post_arrival_keepalive_minutes = std::max(0.5, cfg.bind_latency());
  options.requirements = default_requirements(dataset, cfg);
  return options;
}

}  // namespace coldstart::policy

namespace coldstart::sim {

RunResult oracle_policy_run(const trace::ArrivalDataset& dataset, const SimConfig& cfg) {
  policy::GroundTruthForecastProvider provider(dataset);
  policy::EnsembleOptions options = policy::ensemble_options_for(cfg, dataset);
  policy::EnsemblePolicy policy(provider, options);
  return run(dataset, cfg, &policy);
}

}  // namespace coldstart::sim
