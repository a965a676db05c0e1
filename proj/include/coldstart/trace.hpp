#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace coldstart::trace {

enum class Trigger { Http, Event, Queue, Timer, Orchestration, Storage, Other };

Trigger parse_trigger(const std::string& text);
std::string trigger_name(Trigger t);

/// One (owner, app, function, day) row of the raw trace: per-minute
/// invocation counts over one 1440-minute day.
struct RawInvocationRow {
  std::string owner_hash;
  std::string app_hash;
  std::string func_hash;
  Trigger trigger = Trigger::Other;
  int day = 0;  // 0-based day index within the global timeline
  std::vector<long> per_minute_counts;  // length 1440
};

/// One provisioned function-instance arrival.
struct ArrivalRecord {
  long func_index = 0;  // instance index within its function
  std::string owner_hash;
  std::string app_hash;
  long func_id = 0;  // dense 0..V-1 after finalize
  double avg_exec_ms = 0.0;
  long arrival_minute = 0;
  long instance_count_so_far = 0;  // running per-function count, starts at 1
  long owner_index = 0;            // first-seen dense owner id
  long app_index = 0;              // first-seen dense app id
};

struct ArrivalDataset {
  std::vector<ArrivalRecord> records;
  long vocab_size = 0;
  long timeline_minutes = 20160;  // 14 days
  std::vector<long> func_id_decode;  // dense id -> id as found in the source
  long owner_count = 0;
  long app_count = 0;

  void validate() const;
};

/// Sorts by (arrival_minute, source func id, func_index), assigns dense
/// first-seen func/owner/app ids and recomputes instance_count_so_far.
ArrivalDataset finalize_dataset(std::vector<ArrivalRecord> records, long timeline_minutes);

/// Prepared-CSV schema: Func_index,HashOwner,HashApp,Func_ID,Average,ArrivalMinute.
ArrivalDataset parse_prepared(const std::string& path);
void write_prepared(const ArrivalDataset& ds, const std::string& path);

/// Raw-trace schema: HashOwner,HashApp,HashFunction,Trigger,1..1440.
std::vector<RawInvocationRow> parse_raw(const std::string& path, int day = 0);

std::vector<RawInvocationRow> filter_http(const std::vector<RawInvocationRow>& rows);

/// Replays per-minute invocation counts through scale-per-request semantics:
/// whenever a minute's concurrent demand exceeds the number of live
/// instances, new instance arrivals are emitted at that minute. An instance
/// stays live while its most recent use is at most keepalive_min old; the
/// longest-idle live instances are refreshed first. Approximates the trace
/// owners' unpublished raw-to-instance preparation step.
ArrivalDataset derive_instances(const std::vector<RawInvocationRow>& rows,
                                long keepalive_min, double default_exec_ms = 1000.0);

/// Keeps records whose function has strictly more than min_instances
/// instances in the dataset; func ids are re-densified.
ArrivalDataset filter_min_instances(const ArrivalDataset& ds, long min_instances = 9);

enum class GapLaw { Constant, Poisson, BurstyMixture };

/// Synthetic trace generator for tests and desk-scale experiments.
/// BurstyMixture emits per-function bursts (intra-burst gap grows with the
/// function index, plus jitter and an occasional stretched gap) separated by
/// long off periods, which yields irregular, non-seasonal arrivals with
/// function-dependent gap offsets.
struct SynthConfig {
  int n_functions = 1;
  int arrivals_per_function = 10;
  GapLaw law = GapLaw::Constant;
  double constant_gap = 5.0;
  double poisson_mean_gap = 5.0;
  int burst_size = 10;
  double burst_gap_base = 0.5;     // intra-burst gap for function 0
  double burst_gap_slope = 0.35;   // added per function index
  double burst_gap_jitter = 0.2;   // relative uniform jitter
  double stretch_prob = 0.15;      // mixture: occasional doubled gap
  double off_gap_min = 300.0;      // pause between bursts
  double off_gap_max = 900.0;
  double exec_ms_min = 200.0;
  double exec_ms_max = 2000.0;
  double start_stagger = 7.0;  // function i starts near i * stagger
  double start_offset = 0.0;

  void validate() const;
  static SynthConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ArrivalDataset synth_trace(const SynthConfig& cfg, std::uint64_t seed);

/// Per-function mean/variance of arrival-position gaps (gaps measured in
/// time-ordered rows), averaged across functions with at least 2 records.
struct GapStats {
  double mean_gap = 0.0;
  double gap_variance_rows = 0.0;
  long functions_used = 0;
};

GapStats gap_stats(const ArrivalDataset& ds);

}  // namespace coldstart::trace
