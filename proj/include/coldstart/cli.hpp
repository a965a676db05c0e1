#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coldstart/simulator.hpp"
#include "coldstart/tcn.hpp"
#include "coldstart/trace.hpp"
#include "coldstart/training.hpp"

namespace coldstart::cli {

struct DatasetConfig {
  std::optional<std::string> prepared_csv;
  std::vector<std::string> raw_csv;  // one file per trace day
  std::optional<trace::SynthConfig> synth;
  long derive_keepalive_min = 10;
  double default_exec_ms = 1000.0;
  bool http_only = true;
  std::optional<long> min_instances;  // paper filter: keep functions with > k
};

struct SearchConfig {
  bool enabled = false;
  train::SearchSpace space;
  int max_cv_steps = 4;
  std::size_t memory_cap_bytes = 2ull << 30;
};

struct TrainConfig {
  std::string module = "both";  // "function_name" | "arrival_time" | "both"
  int horizon = 500;
  tcn::TcnHyperParams hyperparams;
  double lr = 1e-3;
  bool incremental = true;
  train::TrainBudget budget;
  SearchConfig search;
  std::string wiring = "both";  // "ground_truth" | "predicted_names" | "both"
};

struct SimulateConfig {
  std::string policy = "fixed";  // "fixed" | "ensemble" | "oracle"
  sim::SimConfig sim;
  std::vector<double> keepalive_sweep;  // extra fixed-policy runs
  double confidence_floor = 0.0;
  double window_minutes = 0.0;  // 0 -> derived from the sim config
  bool decommission_surplus = true;
  std::optional<std::string> model_a;  // checkpoints for the live ensemble
  std::optional<std::string> model_b;
};

struct EvaluateConfig {
  double es_alpha = 0.3;
  bool arx = true;
  bool mape_guard = true;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string profile = "tiny";
  std::string out_dir = "out";
  DatasetConfig dataset;
  TrainConfig train;
  EvaluateConfig evaluate;
  SimulateConfig simulate;

  nlohmann::json to_json() const;
};

/// Parses and validates a config document (or a manifest wrapping one);
/// unknown keys anywhere are rejected. Profile presets fill whatever the
/// document leaves unset.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

std::string config_hash_hex(const nlohmann::json& canonical);

trace::ArrivalDataset load_dataset(const RunConfig& cfg);

int cmd_ingest(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

int run_main(int argc, const char* const* argv);

}  // namespace coldstart::cli
