#include "coldstart/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "coldstart/baselines.hpp"
#include "coldstart/checkpoint.hpp"
#include "coldstart/csv.hpp"
#include "coldstart/errors.hpp"
#include "coldstart/metrics.hpp"
#include "coldstart/policy.hpp"

namespace fs = std::filesystem;

namespace coldstart::cli {

namespace {

constexpr const char* kToolVersion = "0.1.0";

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

// ---------------------------------------------------------------------------
// Config parsing

tcn::TcnHyperParams hyperparams_from_json(const nlohmann::json& j, int horizon,
                                          const tcn::TcnHyperParams& defaults) {
  require_keys(j,
               {"n_blocks", "cells_per_block", "hidden_channels", "kernel_width",
                "context_length"},
               "train.hyperparams");
  tcn::TcnHyperParams hp = defaults;
  hp.horizon = horizon;
  if (j.contains("n_blocks")) hp.n_blocks = j.at("n_blocks").get<int>();
  if (j.contains("cells_per_block")) hp.cells_per_block = j.at("cells_per_block").get<int>();
  if (j.contains("hidden_channels")) hp.hidden_channels = j.at("hidden_channels").get<int>();
  if (j.contains("kernel_width")) hp.kernel_width = j.at("kernel_width").get<int>();
  if (j.contains("context_length")) hp.context_length = j.at("context_length").get<int>();
  return hp;
}

struct ProfileDefaults {
  int horizon;
  int hidden_channels;
  int search_channels_max;
  train::TrainBudget budget;
};

ProfileDefaults profile_defaults(const std::string& profile) {
  if (profile == "tiny") {
    return ProfileDefaults{50, 16, 32, {120.0, 8, 3, 8, 10}};
  }
  if (profile == "desk") {
    return ProfileDefaults{200, 32, 64, {900.0, 20, 5, 16, 25}};
  }
  if (profile == "full") {
    return ProfileDefaults{500, 64, 256, {7200.0, 40, 5, 32, 50}};
  }
  throw ConfigError("unknown profile '" + profile + "' (expected tiny|desk|full)");
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc_in) {
  nlohmann::json doc = doc_in;
  if (doc.contains("command") && doc.contains("config")) {
    doc = doc.at("config");  // re-run from a manifest
  }
  require_keys(doc, {"seed", "profile", "out_dir", "dataset", "train", "evaluate", "simulate"},
               "config");
  RunConfig cfg;
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("profile")) cfg.profile = doc.at("profile").get<std::string>();
  if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
  const ProfileDefaults defaults = profile_defaults(cfg.profile);
  cfg.train.horizon = defaults.horizon;
  cfg.train.hyperparams.hidden_channels = defaults.hidden_channels;
  cfg.train.hyperparams.horizon = defaults.horizon;
  cfg.train.budget = defaults.budget;
  cfg.train.search.space.channels_max = defaults.search_channels_max;

  if (doc.contains("dataset")) {
    const auto& d = doc.at("dataset");
    require_keys(d,
                 {"prepared_csv", "raw_csv", "synth", "derive_keepalive_min",
                  "default_exec_ms", "http_only", "min_instances"},
                 "dataset");
    if (d.contains("prepared_csv")) cfg.dataset.prepared_csv = d.at("prepared_csv").get<std::string>();
    if (d.contains("raw_csv")) cfg.dataset.raw_csv = d.at("raw_csv").get<std::vector<std::string>>();
    if (d.contains("synth")) cfg.dataset.synth = trace::SynthConfig::from_json(d.at("synth"));
    if (d.contains("derive_keepalive_min")) {
      cfg.dataset.derive_keepalive_min = d.at("derive_keepalive_min").get<long>();
    }
    if (d.contains("default_exec_ms")) cfg.dataset.default_exec_ms = d.at("default_exec_ms").get<double>();
    if (d.contains("http_only")) cfg.dataset.http_only = d.at("http_only").get<bool>();
    if (d.contains("min_instances")) cfg.dataset.min_instances = d.at("min_instances").get<long>();
  }

  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    require_keys(t,
                 {"module", "horizon", "hyperparams", "lr", "incremental", "budget", "search",
                  "wiring"},
                 "train");
    if (t.contains("module")) cfg.train.module = t.at("module").get<std::string>();
    if (cfg.train.module != "both" && cfg.train.module != "function_name" &&
        cfg.train.module != "arrival_time") {
      throw ConfigError("train.module must be function_name|arrival_time|both");
    }
    if (t.contains("horizon")) cfg.train.horizon = t.at("horizon").get<int>();
    cfg.train.hyperparams.horizon = cfg.train.horizon;
    if (t.contains("hyperparams")) {
      cfg.train.hyperparams =
          hyperparams_from_json(t.at("hyperparams"), cfg.train.horizon, cfg.train.hyperparams);
    }
    if (t.contains("lr")) cfg.train.lr = t.at("lr").get<double>();
    if (t.contains("incremental")) cfg.train.incremental = t.at("incremental").get<bool>();
    if (t.contains("budget")) {
      const auto& b = t.at("budget");
      require_keys(b,
                   {"wall_clock_cap_seconds", "max_epochs_per_step", "patience", "batch_size",
                    "opt_steps_per_epoch"},
                   "train.budget");
      if (b.contains("wall_clock_cap_seconds")) {
        cfg.train.budget.wall_clock_cap_seconds = b.at("wall_clock_cap_seconds").get<double>();
      }
      if (b.contains("max_epochs_per_step")) {
        cfg.train.budget.max_epochs_per_step = b.at("max_epochs_per_step").get<int>();
      }
      if (b.contains("patience")) cfg.train.budget.patience = b.at("patience").get<int>();
      if (b.contains("batch_size")) cfg.train.budget.batch_size = b.at("batch_size").get<int>();
      if (b.contains("opt_steps_per_epoch")) {
        cfg.train.budget.opt_steps_per_epoch = b.at("opt_steps_per_epoch").get<int>();
      }
    }
    if (t.contains("search")) {
      const auto& s = t.at("search");
      require_keys(s,
                   {"enabled", "n_blocks", "cells", "channels", "lr", "max_cv_steps",
                    "memory_cap_mb"},
                   "train.search");
      if (s.contains("enabled")) cfg.train.search.enabled = s.at("enabled").get<bool>();
      const auto pair_of = [](const nlohmann::json& v, const char* what) {
        if (!v.is_array() || v.size() != 2) {
          throw ConfigError(std::string("train.search.") + what + ": expected [min, max]");
        }
        return std::pair(v.at(0), v.at(1));
      };
      if (s.contains("n_blocks")) {
        auto [lo, hi] = pair_of(s.at("n_blocks"), "n_blocks");
        cfg.train.search.space.n_blocks_min = lo.get<int>();
        cfg.train.search.space.n_blocks_max = hi.get<int>();
      }
      if (s.contains("cells")) {
        auto [lo, hi] = pair_of(s.at("cells"), "cells");
        cfg.train.search.space.cells_min = lo.get<int>();
        cfg.train.search.space.cells_max = hi.get<int>();
      }
      if (s.contains("channels")) {
        auto [lo, hi] = pair_of(s.at("channels"), "channels");
        cfg.train.search.space.channels_min = lo.get<int>();
        cfg.train.search.space.channels_max = hi.get<int>();
      }
      if (s.contains("lr")) {
        auto [lo, hi] = pair_of(s.at("lr"), "lr");
        cfg.train.search.space.lr_min = lo.get<double>();
        cfg.train.search.space.lr_max = hi.get<double>();
      }
      if (s.contains("max_cv_steps")) cfg.train.search.max_cv_steps = s.at("max_cv_steps").get<int>();
      if (s.contains("memory_cap_mb")) {
        cfg.train.search.memory_cap_bytes = s.at("memory_cap_mb").get<std::size_t>() << 20;
      }
    }
    if (t.contains("wiring")) cfg.train.wiring = t.at("wiring").get<std::string>();
    if (cfg.train.wiring != "ground_truth" && cfg.train.wiring != "predicted_names" &&
        cfg.train.wiring != "both") {
      throw ConfigError("train.wiring must be ground_truth|predicted_names|both");
    }
  }

  if (doc.contains("evaluate")) {
    const auto& e = doc.at("evaluate");
    require_keys(e, {"es_alpha", "arx", "mape_guard"}, "evaluate");
    if (e.contains("es_alpha")) cfg.evaluate.es_alpha = e.at("es_alpha").get<double>();
    if (e.contains("arx")) cfg.evaluate.arx = e.at("arx").get<bool>();
    if (e.contains("mape_guard")) cfg.evaluate.mape_guard = e.at("mape_guard").get<bool>();
  }

  if (doc.contains("simulate")) {
    const auto& s = doc.at("simulate");
    require_keys(s,
                 {"policy", "cold_start_minutes", "keepalive_minutes", "bind_minutes",
                  "policy_tick_minutes", "keepalive_sweep", "confidence_floor",
                  "window_minutes", "decommission_surplus", "model_a", "model_b",
                  "emit_event_log"},
                 "simulate");
    if (s.contains("policy")) cfg.simulate.policy = s.at("policy").get<std::string>();
    if (cfg.simulate.policy != "fixed" && cfg.simulate.policy != "ensemble" &&
        cfg.simulate.policy != "oracle") {
      throw ConfigError("simulate.policy must be fixed|ensemble|oracle");
    }
    if (s.contains("cold_start_minutes")) {
      cfg.simulate.sim.cold_start_minutes = s.at("cold_start_minutes").get<double>();
    }
    if (s.contains("keepalive_minutes")) {
      cfg.simulate.sim.keepalive_minutes = s.at("keepalive_minutes").get<double>();
    }
    if (s.contains("bind_minutes")) cfg.simulate.sim.bind_minutes = s.at("bind_minutes").get<double>();
    if (s.contains("policy_tick_minutes")) {
      cfg.simulate.sim.policy_tick_minutes = s.at("policy_tick_minutes").get<double>();
    }
    if (s.contains("keepalive_sweep")) {
      cfg.simulate.keepalive_sweep = s.at("keepalive_sweep").get<std::vector<double>>();
    }
    if (s.contains("confidence_floor")) {
      cfg.simulate.confidence_floor = s.at("confidence_floor").get<double>();
    }
    if (s.contains("window_minutes")) cfg.simulate.window_minutes = s.at("window_minutes").get<double>();
    if (s.contains("decommission_surplus")) {
      cfg.simulate.decommission_surplus = s.at("decommission_surplus").get<bool>();
    }
    if (s.contains("model_a")) cfg.simulate.model_a = s.at("model_a").get<std::string>();
    if (s.contains("model_b")) cfg.simulate.model_b = s.at("model_b").get<std::string>();
    if (s.contains("emit_event_log")) {
      cfg.simulate.sim.emit_event_log = s.at("emit_event_log").get<bool>();
    }
  }
  cfg.simulate.sim.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_json(path));
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json d;
  d["seed"] = seed;
  d["profile"] = profile;
  d["out_dir"] = out_dir;
  nlohmann::json ds;
  if (dataset.prepared_csv) ds["prepared_csv"] = *dataset.prepared_csv;
  if (!dataset.raw_csv.empty()) ds["raw_csv"] = dataset.raw_csv;
  if (dataset.synth) ds["synth"] = dataset.synth->to_json();
  ds["derive_keepalive_min"] = dataset.derive_keepalive_min;
  ds["default_exec_ms"] = dataset.default_exec_ms;
  ds["http_only"] = dataset.http_only;
  if (dataset.min_instances) ds["min_instances"] = *dataset.min_instances;
  d["dataset"] = ds;
  d["train"] = {
      {"module", train.module},
      {"horizon", train.horizon},
      {"hyperparams",
       {{"n_blocks", train.hyperparams.n_blocks},
        {"cells_per_block", train.hyperparams.cells_per_block},
        {"hidden_channels", train.hyperparams.hidden_channels},
        {"kernel_width", train.hyperparams.kernel_width},
        {"context_length", train.hyperparams.context_length}}},
      {"lr", train.lr},
      {"incremental", train.incremental},
      {"budget",
       {{"wall_clock_cap_seconds", train.budget.wall_clock_cap_seconds},
        {"max_epochs_per_step", train.budget.max_epochs_per_step},
        {"patience", train.budget.patience},
        {"batch_size", train.budget.batch_size},
        {"opt_steps_per_epoch", train.budget.opt_steps_per_epoch}}},
      {"search",
       {{"enabled", train.search.enabled},
        {"n_blocks", {train.search.space.n_blocks_min, train.search.space.n_blocks_max}},
        {"cells", {train.search.space.cells_min, train.search.space.cells_max}},
        {"channels", {train.search.space.channels_min, train.search.space.channels_max}},
        {"lr", {train.search.space.lr_min, train.search.space.lr_max}},
        {"max_cv_steps", train.search.max_cv_steps},
        {"memory_cap_mb", train.search.memory_cap_bytes >> 20}}},
      {"wiring", train.wiring}};
  d["evaluate"] = {{"es_alpha", evaluate.es_alpha},
                   {"arx", evaluate.arx},
                   {"mape_guard", evaluate.mape_guard}};
  nlohmann::json sim;
  sim["policy"] = simulate.policy;
  sim["cold_start_minutes"] = simulate.sim.cold_start_minutes;
  sim["keepalive_minutes"] = simulate.sim.keepalive_minutes;
  sim["bind_minutes"] = simulate.sim.bind_minutes;
  sim["policy_tick_minutes"] = simulate.sim.policy_tick_minutes;
  if (!simulate.keepalive_sweep.empty()) sim["keepalive_sweep"] = simulate.keepalive_sweep;
  sim["confidence_floor"] = simulate.confidence_floor;
  sim["window_minutes"] = simulate.window_minutes;
  sim["decommission_surplus"] = simulate.decommission_surplus;
  if (simulate.model_a) sim["model_a"] = *simulate.model_a;
  if (simulate.model_b) sim["model_b"] = *simulate.model_b;
  sim["emit_event_log"] = simulate.sim.emit_event_log;
  d["simulate"] = sim;
  return d;
}

std::string config_hash_hex(const nlohmann::json& canonical) {
  const std::string text = canonical.dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

void write_manifest(const RunConfig& cfg, const std::string& command) {
  const nlohmann::json canonical = cfg.to_json();
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config"] = canonical;
  manifest["config_hash"] = config_hash_hex(canonical);
  manifest["seed"] = cfg.seed;
  manifest["profile"] = cfg.profile;
  manifest["tool_version"] = kToolVersion;
  manifest["schemas"] = {{"checkpoint", 1}, {"event_log", 1}, {"report", 1}, {"prepared_csv", 1}};
  write_json(fs::path(cfg.out_dir) / ("manifest_" + command + ".json"), manifest);
}

void log_error(const RunConfig* cfg, const std::string& command, const std::string& kind,
               const std::string& message) {
  if (!cfg) return;
  std::error_code ec;
  fs::create_directories(cfg->out_dir, ec);
  if (ec) return;
  std::ofstream out(fs::path(cfg->out_dir) / "errors.log", std::ios::app);
  out << nlohmann::json{{"command", command}, {"kind", kind}, {"message", message}}.dump()
      << "\n";
}

}  // namespace

trace::ArrivalDataset load_dataset(const RunConfig& cfg) {
  const int sources = (cfg.dataset.prepared_csv ? 1 : 0) +
                      (!cfg.dataset.raw_csv.empty() ? 1 : 0) + (cfg.dataset.synth ? 1 : 0);
  if (sources != 1) {
    throw ConfigError("dataset: exactly one of prepared_csv | raw_csv | synth is required");
  }
  trace::ArrivalDataset ds;
  if (cfg.dataset.prepared_csv) {
    ds = trace::parse_prepared(*cfg.dataset.prepared_csv);
  } else if (!cfg.dataset.raw_csv.empty()) {
    std::vector<trace::RawInvocationRow> rows;
    for (std::size_t day = 0; day < cfg.dataset.raw_csv.size(); ++day) {
      auto day_rows = trace::parse_raw(cfg.dataset.raw_csv[day], static_cast<int>(day));
      rows.insert(rows.end(), day_rows.begin(), day_rows.end());
    }
    if (cfg.dataset.http_only) rows = trace::filter_http(rows);
    ds = trace::derive_instances(rows, cfg.dataset.derive_keepalive_min,
                                 cfg.dataset.default_exec_ms);
  } else {
    ds = trace::synth_trace(*cfg.dataset.synth, cfg.seed);
  }
  if (cfg.dataset.min_instances) {
    ds = trace::filter_min_instances(ds, *cfg.dataset.min_instances);
  }
  return ds;
}

namespace {

// ---------------------------------------------------------------------------
// Model checkpoints

void save_model_checkpoint(const tcn::TcnModel& model, double confidence,
                           const metrics::MetricReport& pooled, const fs::path& path) {
  ckpt::Checkpoint c;
  c.meta["schema"] = "tcn-model";
  c.meta["schema_version"] = 1;
  c.meta["hp"] = {{"n_blocks", model.hp.n_blocks},
                  {"cells_per_block", model.hp.cells_per_block},
                  {"hidden_channels", model.hp.hidden_channels},
                  {"kernel_width", model.hp.kernel_width},
                  {"horizon", model.hp.horizon},
                  {"context_length", model.hp.context_length}};
  c.meta["target"] =
      model.target == tcn::ForecastTarget::ArrivalTime ? "arrival_time" : "function_name";
  c.meta["vocab_size"] = model.vocab_size;
  c.meta["validation_spearman"] = confidence;
  c.meta["pooled_nrmse"] = pooled.nrmse ? nlohmann::json(*pooled.nrmse) : nlohmann::json();
  c.add("params", model.flatten_params());
  c.save(path.string());
}

std::pair<tcn::TcnModel, double> load_model_checkpoint(const fs::path& path) {
  const ckpt::Checkpoint c = ckpt::Checkpoint::load(path.string());
  if (c.meta.value("schema", "") != "tcn-model") {
    throw DataError("not a model checkpoint: " + path.string());
  }
  tcn::TcnHyperParams hp;
  const auto& h = c.meta.at("hp");
  hp.n_blocks = h.at("n_blocks").get<int>();
  hp.cells_per_block = h.at("cells_per_block").get<int>();
  hp.hidden_channels = h.at("hidden_channels").get<int>();
  hp.kernel_width = h.at("kernel_width").get<int>();
  hp.horizon = h.at("horizon").get<int>();
  hp.context_length = h.at("context_length").get<int>();
  const tcn::ForecastTarget target = c.meta.at("target").get<std::string>() == "arrival_time"
                                         ? tcn::ForecastTarget::ArrivalTime
                                         : tcn::ForecastTarget::FunctionName;
  tcn::TcnModel model = tcn::build_model(hp, c.meta.at("vocab_size").get<long>(), 0, target);
  model.load_params(c.array("params"));
  return {std::move(model), c.meta.value("validation_spearman", 0.0)};
}

// ---------------------------------------------------------------------------
// Forecast CSV artifacts

void write_forecast_csv(const fs::path& path, const std::vector<train::StepOutcome>& steps,
                        const std::vector<train::CvStep>& cv_steps) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "step,series_index,actual,predicted\n";
  for (const auto& s : steps) {
    const auto& cv = cv_steps[static_cast<std::size_t>(s.step_index - 1)];
    for (std::size_t j = 0; j < s.predictions.size(); ++j) {
      out << s.step_index << ',' << (cv.predict_begin + static_cast<long>(j)) << ','
          << format_double(s.actuals[j]) << ',' << format_double(s.predictions[j]) << '\n';
    }
  }
}

struct ForecastSeries {
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_step;  // actual, pred
  std::vector<double> pooled_actual, pooled_pred;
};

ForecastSeries read_forecast_csv(const fs::path& path) {
  csv::Reader reader(path.string());
  std::vector<std::string> fields;
  long line = 0;
  if (!reader.next(fields, line) || fields.size() != 4) {
    throw DataError(path.string() + ": bad forecast CSV header");
  }
  ForecastSeries out;
  while (reader.next(fields, line)) {
    const int step = static_cast<int>(csv::parse_long(fields[0], path.string(), line));
    const double actual = csv::parse_double(fields[2], path.string(), line);
    const double pred = csv::parse_double(fields[3], path.string(), line);
    out.by_step[step].first.push_back(actual);
    out.by_step[step].second.push_back(pred);
    out.pooled_actual.push_back(actual);
    out.pooled_pred.push_back(pred);
  }
  return out;
}

nlohmann::json report_json(const metrics::MetricReport& r) {
  nlohmann::json j;
  const auto put = [&j](const char* name, const std::optional<double>& v) {
    j[name] = v ? nlohmann::json(*v) : nlohmann::json();
  };
  put("explained_variance", r.explained_variance);
  put("mape_percent", r.mape_percent);
  put("nrmse", r.nrmse);
  put("r2", r.r2);
  put("spearman", r.spearman);
  j["n_points"] = r.n_points;
  j["mape_guarded_points"] = r.mape_guarded_points;
  j["undefined"] = r.undefined;
  return j;
}

nlohmann::json fit_result_json(const train::FitResult& fit) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : fit.steps) {
    steps.push_back({{"step_index", s.step_index},
                     {"opt_steps", s.opt_steps},
                     {"holdout_loss", s.holdout_loss},
                     {"report", report_json(s.report)}});
  }
  return nlohmann::json{{"steps", steps},
                        {"pooled", report_json(fit.pooled)},
                        {"validation_spearman", fit.validation_spearman},
                        {"budget_exhausted", fit.budget_exhausted}};
}

std::vector<double> predict_window(const tcn::TcnModel& model, const tcn::SeriesData& series,
                                   const tcn::NormStats& stats, long anchor, long n_out) {
  const tcn::WindowAssembly w =
      tcn::assemble_window(series, stats, model.hp, anchor, series.length());
  const std::vector<double> pred = model.predict(w.context, w.future_cov);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_out));
  for (long j = 0; j < n_out; ++j) {
    out.push_back(tcn::denormalize_prediction(series, stats, pred[static_cast<std::size_t>(j)]));
  }
  return out;
}

}  // namespace

int cmd_synth(const RunConfig& cfg) {
  if (!cfg.dataset.synth) throw ConfigError("synth: config has no dataset.synth section");
  fs::create_directories(cfg.out_dir);
  const trace::ArrivalDataset ds = trace::synth_trace(*cfg.dataset.synth, cfg.seed);
  trace::write_prepared(ds, (fs::path(cfg.out_dir) / "prepared.csv").string());
  const trace::GapStats gaps = trace::gap_stats(ds);
  write_json(fs::path(cfg.out_dir) / "dataset_summary.json",
             {{"rows", ds.records.size()},
              {"vocab_size", ds.vocab_size},
              {"timeline_minutes", ds.timeline_minutes},
              {"mean_gap_rows", gaps.mean_gap},
              {"gap_variance_rows", gaps.gap_variance_rows}});
  write_manifest(cfg, "synth");
  return exit_code::kOk;
}

int cmd_ingest(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const trace::ArrivalDataset ds = load_dataset(cfg);
  trace::write_prepared(ds, (fs::path(cfg.out_dir) / "prepared.csv").string());
  nlohmann::json summary{{"rows", ds.records.size()},
                         {"vocab_size", ds.vocab_size},
                         {"timeline_minutes", ds.timeline_minutes},
                         {"owner_count", ds.owner_count},
                         {"app_count", ds.app_count}};
  if (!ds.records.empty()) {
    const trace::GapStats gaps = trace::gap_stats(ds);
    summary["mean_gap_rows"] = gaps.mean_gap;
    summary["gap_variance_rows"] = gaps.gap_variance_rows;
    summary["mean_arrivals_per_minute"] =
        static_cast<double>(ds.records.size()) /
        std::max<double>(1.0, static_cast<double>(ds.timeline_minutes));
  }
  write_json(fs::path(cfg.out_dir) / "dataset_summary.json", summary);
  write_manifest(cfg, "ingest");
  return exit_code::kOk;
}

namespace {

struct ModuleRun {
  std::string name;
  tcn::SeriesData series;
  std::vector<train::CvStep> steps;
  std::optional<train::Trainer> trainer;
  train::FitResult fit;
};

}  // namespace

int cmd_train(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const trace::ArrivalDataset ds = load_dataset(cfg);
  const fs::path out(cfg.out_dir);
  const bool want_a = cfg.train.module == "function_name" || cfg.train.module == "both";
  const bool want_b = cfg.train.module == "arrival_time" || cfg.train.module == "both";

  std::uint64_t seed_state = cfg.seed;
  const std::uint64_t seed_a = splitmix64(seed_state);
  const std::uint64_t seed_b = splitmix64(seed_state);

  bool budget_exhausted = false;
  nlohmann::json metrics_doc;

  // Optional landmark exploration on the arrival-time series (the module
  // the policy depends on); the refined best hyper-parameters are then used
  // for the final fits.
  tcn::TcnHyperParams hp = cfg.train.hyperparams;
  hp.horizon = cfg.train.horizon;
  double lr = cfg.train.lr;
  if (cfg.train.search.enabled) {
    const tcn::SeriesData series_b = tcn::module_b_target(ds);
    train::SearchOptions options;
    options.seed = cfg.seed;
    options.horizon = cfg.train.horizon;
    options.max_cv_steps = cfg.train.search.max_cv_steps;
    options.memory_cap_bytes = cfg.train.search.memory_cap_bytes;
    const train::SearchResult search =
        train::landmark_search(cfg.train.search.space, series_b, cfg.train.budget, options);
    nlohmann::json board = nlohmann::json::array();
    std::ofstream board_csv(out / "leaderboard.csv");
    board_csv << "rank,origin,status,n_blocks,cells_per_block,hidden_channels,lr,"
                 "objective_nrmse,spearman\n";
    for (std::size_t i = 0; i < search.leaderboard.size(); ++i) {
      const auto& c = search.leaderboard[i];
      board.push_back(
          {{"rank", i + 1},
           {"origin", c.candidate.origin},
           {"status", c.status},
           {"n_blocks", c.candidate.hp.n_blocks},
           {"cells_per_block", c.candidate.hp.cells_per_block},
           {"hidden_channels", c.candidate.hp.hidden_channels},
           {"lr", c.candidate.lr},
           {"objective_nrmse", c.objective_nrmse ? nlohmann::json(*c.objective_nrmse)
                                                 : nlohmann::json()},
           {"spearman", c.spearman ? nlohmann::json(*c.spearman) : nlohmann::json()}});
      board_csv << (i + 1) << ',' << c.candidate.origin << ",\"" << c.status << "\","
                << c.candidate.hp.n_blocks << ',' << c.candidate.hp.cells_per_block << ','
                << c.candidate.hp.hidden_channels << ',' << format_double(c.candidate.lr)
                << ','
                << (c.objective_nrmse ? format_double(*c.objective_nrmse) : std::string())
                << ',' << (c.spearman ? format_double(*c.spearman) : std::string()) << '\n';
    }
    write_json(out / "leaderboard.json",
               {{"n_landmarks", search.n_landmarks}, {"leaderboard", board}});
    if (search.best) {
      hp = search.best->hp;
      hp.horizon = cfg.train.horizon;
      lr = search.best->lr;
    }
  }

  train::FitOptions fit_options;
  fit_options.incremental = cfg.train.incremental;
  fit_options.lr = lr;

  std::optional<ModuleRun> run_a;
  std::optional<ModuleRun> run_b;
  if (want_a) {
    run_a.emplace();
    run_a->name = "function_name";
    run_a->series = tcn::module_a_target(ds);
    run_a->steps = train::make_cv_steps(run_a->series.length(), cfg.train.horizon);
    tcn::TcnModel model =
        tcn::build_model(hp, ds.vocab_size, seed_a, tcn::ForecastTarget::FunctionName);
    train::TrainBudget budget = cfg.train.budget;
    if (want_b) budget.wall_clock_cap_seconds /= 2.0;
    run_a->trainer.emplace(std::move(model), run_a->series, run_a->steps, budget, fit_options,
                           seed_a);
  }
  if (want_b) {
    run_b.emplace();
    run_b->name = "arrival_time";
    run_b->series = tcn::module_b_target(ds);
    run_b->steps = train::make_cv_steps(run_b->series.length(), cfg.train.horizon);
    tcn::TcnModel model =
        tcn::build_model(hp, ds.vocab_size, seed_b, tcn::ForecastTarget::ArrivalTime);
    train::TrainBudget budget = cfg.train.budget;
    if (want_a) budget.wall_clock_cap_seconds /= 2.0;
    run_b->trainer.emplace(std::move(model), run_b->series, run_b->steps, budget, fit_options,
                           seed_b);
  }

  // Interleave the two trainers step by step so the predicted-names wiring
  // can query the name model exactly as it stood when the arrival-time
  // window was forecast.
  const bool wire_predicted =
      want_a && want_b && (cfg.train.wiring == "predicted_names" || cfg.train.wiring == "both");
  std::vector<train::StepOutcome> wired_outcomes;
  const tcn::FunctionMeta meta = tcn::FunctionMeta::from_dataset(ds);
  std::size_t total_steps = 0;
  if (run_a) total_steps = std::max(total_steps, run_a->steps.size());
  if (run_b) total_steps = std::max(total_steps, run_b->steps.size());
  for (std::size_t k = 1; k <= total_steps; ++k) {
    if (run_a && run_a->trainer) run_a->trainer->run_until(static_cast<int>(k));
    if (run_b && run_b->trainer) run_b->trainer->run_until(static_cast<int>(k));
    if (wire_predicted && k >= 2 && k <= run_b->steps.size() &&
        run_b->trainer->next_step() > static_cast<int>(k)) {
      const train::CvStep& step_b = run_b->steps[k - 1];
      const train::CvStep& step_a = run_a->steps[std::min(k, run_a->steps.size()) - 1];
      const long anchor_b = step_b.predict_begin;
      const long anchor_a = anchor_b + 1;
      const tcn::NormStats stats_a =
          tcn::NormStats::compute(run_a->series, 0, step_a.train_end);
      const std::vector<double> predicted_ids = predict_window(
          run_a->trainer->model(), run_a->series, stats_a, anchor_a, cfg.train.horizon);
      const tcn::SeriesData wired =
          tcn::apply_predicted_names(run_b->series, anchor_b, predicted_ids, meta);
      const tcn::NormStats stats_b = tcn::NormStats::compute(wired, 0, step_b.train_end);
      const long n_out = step_b.predict_end - step_b.predict_begin;
      train::StepOutcome outcome;
      outcome.step_index = static_cast<int>(k);
      outcome.predictions =
          predict_window(run_b->trainer->model(), wired, stats_b, anchor_b, n_out);
      outcome.actuals.assign(run_b->series.values.begin() + step_b.predict_begin,
                             run_b->series.values.begin() + step_b.predict_end);
      outcome.report = metrics::compute_all(outcome.actuals, outcome.predictions);
      wired_outcomes.push_back(std::move(outcome));
    }
  }

  const auto finish_module = [&](ModuleRun& run, std::uint64_t used_seed,
                                 const std::string& ckpt_name) {
    run.fit = run.trainer->run();  // collects (steps already executed)
    budget_exhausted = budget_exhausted || run.fit.budget_exhausted;
    save_model_checkpoint(run.trainer->model(), run.fit.validation_spearman, run.fit.pooled,
                          out / ckpt_name);
    write_forecast_csv(out / ("forecasts_" + run.name + "_tcn.csv"), run.fit.steps, run.steps);
    metrics_doc[run.name] = fit_result_json(run.fit);
    metrics_doc[run.name]["seed"] = used_seed;
  };
  if (run_a) finish_module(*run_a, seed_a, "model_a.ckpt");
  if (run_b) finish_module(*run_b, seed_b, "model_b.ckpt");

  if (wire_predicted && !wired_outcomes.empty()) {
    write_forecast_csv(out / "forecasts_arrival_time_tcn_predicted_names.csv", wired_outcomes,
                       run_b->steps);
    std::vector<double> pooled_a, pooled_p;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : wired_outcomes) {
      pooled_a.insert(pooled_a.end(), s.actuals.begin(), s.actuals.end());
      pooled_p.insert(pooled_p.end(), s.predictions.begin(), s.predictions.end());
      steps.push_back({{"step_index", s.step_index}, {"report", report_json(s.report)}});
    }
    metrics_doc["arrival_time_predicted_names"] = {
        {"steps", steps}, {"pooled", report_json(metrics::compute_all(pooled_a, pooled_p))}};
  }

  write_json(out / "train_metrics.json", metrics_doc);
  write_manifest(cfg, "train");
  return budget_exhausted ? exit_code::kBudget : exit_code::kOk;
}

namespace {

struct BenchmarkRow {
  std::string module;
  std::string model;
  std::string scope;  // "pooled" or "step<k>"
  metrics::MetricReport report;
};

void append_rows(std::vector<BenchmarkRow>& rows, const std::string& module,
                 const std::string& model, const ForecastSeries& fs, bool guard) {
  for (const auto& [step, data] : fs.by_step) {
    rows.push_back(BenchmarkRow{module, model, "step" + std::to_string(step),
                                metrics::compute_all(data.first, data.second, guard)});
  }
  if (fs.pooled_actual.size() >= 2) {
    rows.push_back(BenchmarkRow{module, model, "pooled",
                                metrics::compute_all(fs.pooled_actual, fs.pooled_pred, guard)});
  }
}

ForecastSeries series_from_baseline(const train::BaselineResult& r) {
  ForecastSeries fs;
  for (const auto& s : r.steps) {
    fs.by_step[s.step_index] = {s.actuals, s.predictions};
    fs.pooled_actual.insert(fs.pooled_actual.end(), s.actuals.begin(), s.actuals.end());
    fs.pooled_pred.insert(fs.pooled_pred.end(), s.predictions.begin(), s.predictions.end());
  }
  return fs;
}

}  // namespace

int cmd_evaluate(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const trace::ArrivalDataset ds = load_dataset(cfg);
  const fs::path out(cfg.out_dir);
  const bool guard = cfg.evaluate.mape_guard;

  std::vector<BenchmarkRow> rows;
  const auto eval_module = [&](const std::string& module, const tcn::SeriesData& series) {
    const std::vector<train::CvStep> steps =
        train::make_cv_steps(series.length(), cfg.train.horizon);
    const fs::path tcn_csv = out / ("forecasts_" + module + "_tcn.csv");
    if (fs::exists(tcn_csv)) {
      append_rows(rows, module, "tcn", read_forecast_csv(tcn_csv), guard);
    }
    const fs::path wired_csv = out / ("forecasts_" + module + "_tcn_predicted_names.csv");
    if (fs::exists(wired_csv)) {
      append_rows(rows, module, "tcn_predicted_names", read_forecast_csv(wired_csv), guard);
    }
    train::BaselineSpec es;
    es.kind = train::BaselineSpec::Kind::ExponentialSmoothing;
    es.alpha = cfg.evaluate.es_alpha;
    append_rows(rows, module, "es", series_from_baseline(train::run_baseline_cv(series, steps, es)),
                guard);
    train::BaselineSpec naive;
    naive.kind = train::BaselineSpec::Kind::Naive;
    append_rows(rows, module, "naive",
                series_from_baseline(train::run_baseline_cv(series, steps, naive)), guard);
    if (cfg.evaluate.arx) {
      const train::BaselineSpec ar = train::select_arx_orders(series, steps, false);
      append_rows(rows, module, "ar_ls",
                  series_from_baseline(train::run_baseline_cv(series, steps, ar)), guard);
      if (module == "arrival_time") {
        const train::BaselineSpec arx = train::select_arx_orders(series, steps, true);
        append_rows(rows, module, "arx_ls",
                    series_from_baseline(train::run_baseline_cv(series, steps, arx)), guard);
      }
    }
    // Scope decision: Prophet is recorded as not run rather than ported.
    rows.push_back(BenchmarkRow{module, "prophet", "not_run", metrics::MetricReport{}});
  };
  eval_module("function_name", tcn::module_a_target(ds));
  eval_module("arrival_time", tcn::module_b_target(ds));

  // Long-format CSV: one row per (module, model, scope, metric).
  std::ofstream csv_out(out / "benchmark.csv");
  csv_out << "module,model,scope,metric,value\n";
  static const std::pair<const char*, std::optional<double> metrics::MetricReport::*>
      metric_fields[] = {{"explained_variance", &metrics::MetricReport::explained_variance},
                         {"mape_percent", &metrics::MetricReport::mape_percent},
                         {"nrmse", &metrics::MetricReport::nrmse},
                         {"r2", &metrics::MetricReport::r2},
                         {"spearman", &metrics::MetricReport::spearman}};
  nlohmann::json doc;
  for (const auto& row : rows) {
    for (const auto& [name, member] : metric_fields) {
      const std::optional<double>& v = row.report.*member;
      csv_out << row.module << ',' << row.model << ',' << row.scope << ',' << name << ','
              << (v ? format_double(*v) : std::string()) << '\n';
    }
    doc[row.module][row.model][row.scope] = report_json(row.report);
  }
  write_json(out / "benchmark.json", doc);
  write_manifest(cfg, "evaluate");
  return exit_code::kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const trace::ArrivalDataset ds = load_dataset(cfg);
  const fs::path out(cfg.out_dir);

  const auto write_run = [&](const sim::RunResult& result, const std::string& name) {
    write_json(out / ("simreport_" + name + ".json"), result.report.to_json());
    if (cfg.simulate.sim.emit_event_log) {
      std::ofstream log(out / ("events_" + name + ".ndjson"));
      for (const auto& entry : result.event_log) log << entry.dump() << '\n';
    }
  };

  // Fixed keep-alive sweep runs (the comparison baseline set).
  nlohmann::json sweep = nlohmann::json::array();
  for (double keepalive : cfg.simulate.keepalive_sweep) {
    sim::SimConfig sweep_cfg = cfg.simulate.sim;
    sweep_cfg.keepalive_minutes = keepalive;
    policy::FixedKeepAlivePolicy fixed;
    const sim::RunResult result = sim::run(ds, sweep_cfg, &fixed);
    const std::string name = "fixed_k" + std::to_string(static_cast<long>(keepalive));
    write_run(result, name);
    sweep.push_back({{"keepalive_minutes", keepalive},
                     {"cold_fraction", result.report.cold_fraction},
                     {"warm_idle_node_minutes", result.report.warm_idle_node_minutes}});
  }

  sim::RunResult main_result;
  if (cfg.simulate.policy == "fixed") {
    policy::FixedKeepAlivePolicy fixed;
    main_result = sim::run(ds, cfg.simulate.sim, &fixed);
  } else if (cfg.simulate.policy == "oracle") {
    main_result = sim::oracle_policy_run(ds, cfg.simulate.sim);
  } else {
    if (!cfg.simulate.model_a || !cfg.simulate.model_b) {
      throw ConfigError("simulate.policy=ensemble requires model_a and model_b checkpoints");
    }
    auto [model_a, conf_a] = load_model_checkpoint(*cfg.simulate.model_a);
    auto [model_b, conf_b] = load_model_checkpoint(*cfg.simulate.model_b);
    policy::TcnForecastProvider provider(std::move(model_a), std::move(model_b), ds,
                                         std::min(conf_a, conf_b));
    policy::EnsembleOptions options = policy::ensemble_options_for(cfg.simulate.sim, ds);
    options.confidence_floor = cfg.simulate.confidence_floor;
    options.decommission_surplus = cfg.simulate.decommission_surplus;
    if (cfg.simulate.window_minutes > 0) options.window_minutes = cfg.simulate.window_minutes;
    policy::EnsemblePolicy ensemble(provider, options);
    main_result = sim::run(ds, cfg.simulate.sim, &ensemble);
  }
  write_run(main_result, cfg.simulate.policy);
  write_json(out / "sim_summary.json",
             {{"policy", cfg.simulate.policy},
              {"report", main_result.report.to_json()},
              {"keepalive_sweep", sweep}});
  write_manifest(cfg, "simulate");
  return exit_code::kOk;
}

int cmd_report(const RunConfig& cfg) {
  const fs::path out(cfg.out_dir);
  if (!fs::exists(out)) throw DataError("report: run directory does not exist: " + out.string());
  nlohmann::json consolidated;
  std::string md;
  md += "# Run report\n\n";

  static const std::pair<const char*, const char*> metric_labels[] = {
      {"explained_variance", "Explained variance"},
      {"mape_percent", "Mean absolute percentage error"},
      {"nrmse", "Normalized root mean square error"},
      {"r2", "R2 score"},
      {"spearman", "Spearman Correlation"}};
  static const std::pair<const char*, const char*> model_labels[] = {
      {"tcn", "TCN"},
      {"tcn_predicted_names", "TCN (predicted names)"},
      {"arx_ls", "Arimax (ARX least-squares stand-in)"},
      {"ar_ls", "Arima (AR least-squares stand-in)"},
      {"es", "ES"},
      {"naive", "Naive"},
      {"prophet", "Prophet (not run)"}};

  if (fs::exists(out / "benchmark.json")) {
    const nlohmann::json bench = read_json(out / "benchmark.json");
    consolidated["benchmark"] = bench;
    for (const auto& [module, models] : bench.items()) {
      md += "## Forecast benchmark: " + module + " (pooled validation)\n\n";
      std::vector<std::string> present;
      for (const auto& [model, label] : model_labels) {
        if (models.contains(model)) present.push_back(model);
        (void)label;
      }
      md += "| Metric |";
      for (const auto& model : present) {
        for (const auto& [key, label] : model_labels) {
          if (model == key) md += std::string(" ") + label + " |";
        }
      }
      md += "\n|---|";
      for (std::size_t i = 0; i < present.size(); ++i) md += "---|";
      md += "\n";
      for (const auto& [metric, label] : metric_labels) {
        md += std::string("| ") + label + " |";
        for (const auto& model : present) {
          std::string cell = "not run";
          if (models.at(model).contains("pooled")) {
            const auto& v = models.at(model).at("pooled").at(metric);
            cell = v.is_null() ? "undefined" : format_double(v.get<double>());
          }
          md += " " + cell + " |";
        }
        md += "\n";
      }
      md += "\n";
    }
  }

  if (fs::exists(out / "sim_summary.json")) {
    const nlohmann::json sim_summary = read_json(out / "sim_summary.json");
    consolidated["simulation"] = sim_summary;
    md += "## Simulation\n\n";
    md += "| Run | Cold fraction | Warm-idle node-minutes |\n|---|---|---|\n";
    for (const auto& entry : sim_summary.value("keepalive_sweep", nlohmann::json::array())) {
      md += "| fixed keep-alive " + format_double(entry.at("keepalive_minutes").get<double>()) +
            " min | " + format_double(entry.at("cold_fraction").get<double>()) + " | " +
            format_double(entry.at("warm_idle_node_minutes").get<double>()) + " |\n";
    }
    const auto& rep = sim_summary.at("report");
    md += "| " + sim_summary.at("policy").get<std::string>() + " | " +
          format_double(rep.at("cold_fraction").get<double>()) + " | " +
          format_double(rep.at("warm_idle_node_minutes").get<double>()) + " |\n\n";
  }

  if (fs::exists(out / "train_metrics.json")) {
    consolidated["training"] = read_json(out / "train_metrics.json");
  }
  if (fs::exists(out / "leaderboard.json")) {
    consolidated["leaderboard"] = read_json(out / "leaderboard.json");
  }
  if (fs::exists(out / "dataset_summary.json")) {
    consolidated["dataset"] = read_json(out / "dataset_summary.json");
  }

  write_json(out / "report.json", consolidated);
  // Flat CSV view of the pooled benchmark numbers.
  std::ofstream csv_out(out / "report.csv");
  csv_out << "section,module,model,metric,value\n";
  if (consolidated.contains("benchmark")) {
    for (const auto& [module, models] : consolidated["benchmark"].items()) {
      for (const auto& [model, scopes] : models.items()) {
        if (!scopes.contains("pooled")) continue;
        for (const auto& [metric, label] : metric_labels) {
          (void)label;
          const auto& v = scopes.at("pooled").at(metric);
          csv_out << "benchmark," << module << ',' << model << ',' << metric << ','
                  << (v.is_null() ? std::string() : format_double(v.get<double>())) << '\n';
        }
      }
    }
  }
  write_text(out / "summary.md", md);
  write_manifest(cfg, "report");
  return exit_code::kOk;
}

int run_main(int argc, const char* const* argv) {
  CLI::App app{"Trace-driven serverless cold-start laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string profile_override;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  bool no_guard = false;

  const std::vector<std::pair<std::string, int (*)(const RunConfig&)>> commands = {
      {"ingest", &cmd_ingest},   {"synth", &cmd_synth},       {"train", &cmd_train},
      {"evaluate", &cmd_evaluate}, {"simulate", &cmd_simulate}, {"report", &cmd_report}};

  for (const auto& [name, fn] : commands) {
    (void)fn;
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run config or manifest JSON")->required();
    sub->add_option("--seed", seed_override)->each([&](const std::string&) {
      has_seed_override = true;
    });
    sub->add_option("--profile", profile_override, "tiny|desk|full");
    sub->add_option("--out", out_override, "output directory override");
    sub->add_flag("--no-guard", no_guard, "disable the MAPE small-denominator guard");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::kOk : exit_code::kConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<RunConfig> cfg;
  try {
    nlohmann::json doc = read_json(config_path);
    if (!profile_override.empty()) {
      if (doc.contains("command") && doc.contains("config")) {
        doc["config"]["profile"] = profile_override;
      } else {
        doc["profile"] = profile_override;
      }
    }
    cfg = parse_run_config(doc);
    if (has_seed_override) {
      cfg->seed = seed_override;
      cfg->simulate.sim.seed = seed_override;
    }
    if (!out_override.empty()) cfg->out_dir = out_override;
    if (no_guard) cfg->evaluate.mape_guard = false;

    for (const auto& [name, fn] : commands) {
      if (name == command) return fn(*cfg);
    }
    throw ConfigError("unknown command: " + command);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    log_error(cfg ? &*cfg : nullptr, command, "config", e.what());
    return exit_code::kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    log_error(cfg ? &*cfg : nullptr, command, "data", e.what());
    return exit_code::kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    log_error(cfg ? &*cfg : nullptr, command, "internal", e.what());
    return exit_code::kInternal;
  }
}

}  // namespace coldstart::cli
