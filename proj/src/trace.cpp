#include "coldstart/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "coldstart/csv.hpp"
#include "coldstart/errors.hpp"
#include "coldstart/rng.hpp"

namespace coldstart::csv {

long parse_long(const std::string& field, const std::string& path, long line) {
  if (field.empty()) throw DataError(path + ":" + std::to_string(line) + ": empty integer field");
  char* end = nullptr;
  const long value = std::strtol(field.c_str(), &end, 10);
  if (end != field.c_str() + field.size()) {
    throw DataError(path + ":" + std::to_string(line) + ": malformed integer '" + field + "'");
  }
  return value;
}

double parse_double(const std::string& field, const std::string& path, long line) {
  if (field.empty()) throw DataError(path + ":" + std::to_string(line) + ": empty numeric field");
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw DataError(path + ":" + std::to_string(line) + ": malformed number '" + field + "'");
  }
  return value;
}

}  // namespace coldstart::csv

namespace coldstart::trace {

namespace {

const char* const kPreparedColumns[6] = {"Func_index", "HashOwner",     "HashApp",
                                         "Func_ID",    "Average",       "ArrivalMinute"};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Trigger parse_trigger(const std::string& text) {
  std::string t;
  t.reserve(text.size());
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "http") return Trigger::Http;
  if (t == "event") return Trigger::Event;
  if (t == "queue") return Trigger::Queue;
  if (t == "timer") return Trigger::Timer;
  if (t == "orchestration") return Trigger::Orchestration;
  if (t == "storage") return Trigger::Storage;
  if (t == "other" || t == "others") return Trigger::Other;
  throw DataError("unknown trigger class '" + text + "'");
}

std::string trigger_name(Trigger t) {
  switch (t) {
    case Trigger::Http: return "http";
    case Trigger::Event: return "event";
    case Trigger::Queue: return "queue";
    case Trigger::Timer: return "timer";
    case Trigger::Orchestration: return "orchestration";
    case Trigger::Storage: return "storage";
    case Trigger::Other: return "others";
  }
  return "others";
}

void ArrivalDataset::validate() const {
  std::set<long> ids;
  std::map<long, long> per_func_count;
  std::set<std::pair<long, long>> seen_instance;
  const ArrivalRecord* prev = nullptr;
  for (const auto& r : records) {
    if (r.func_id < 0 || r.func_id >= vocab_size) {
      throw DataError("dataset invariant: func_id out of range");
    }
    if (r.avg_exec_ms <= 0.0) throw DataError("dataset invariant: non-positive Average");
    if (r.arrival_minute < 0) throw DataError("dataset invariant: negative arrival minute");
    if (prev) {
      const auto key = std::tuple(prev->arrival_minute, prev->func_id, prev->func_index);
      const auto cur = std::tuple(r.arrival_minute, r.func_id, r.func_index);
      if (cur < key) throw DataError("dataset invariant: records not sorted");
    }
    if (!seen_instance.emplace(r.func_id, r.func_index).second) {
      throw DataError("dataset invariant: duplicate (func_id, func_index) pair");
    }
    long& count = per_func_count[r.func_id];
    count += 1;
    if (r.instance_count_so_far != count) {
      throw DataError("dataset invariant: instance_count_so_far not a running count");
    }
    ids.insert(r.func_id);
    prev = &r;
  }
  if (static_cast<long>(ids.size()) != vocab_size) {
    throw DataError("dataset invariant: vocab_size does not match distinct func ids");
  }
}

ArrivalDataset finalize_dataset(std::vector<ArrivalRecord> records, long timeline_minutes) {
  std::stable_sort(records.begin(), records.end(),
                   [](const ArrivalRecord& a, const ArrivalRecord& b) {
                     return std::tuple(a.arrival_minute, a.func_id, a.func_index) <
                            std::tuple(b.arrival_minute, b.func_id, b.func_index);
                   });
  ArrivalDataset ds;
  ds.timeline_minutes = timeline_minutes;
  std::unordered_map<long, long> func_map;
  std::unordered_map<std::string, long> owner_map;
  std::unordered_map<std::string, long> app_map;
  std::unordered_map<long, long> running_count;
  std::set<std::pair<long, long>> seen_instance;
  ds.records.reserve(records.size());
  for (auto& r : records) {
    if (!seen_instance.emplace(r.func_id, r.func_index).second) {
      throw DataError("duplicate (func_id, func_index) pair: func " + std::to_string(r.func_id) +
                      ", index " + std::to_string(r.func_index));
    }
    auto [fit, fnew] = func_map.try_emplace(r.func_id, static_cast<long>(func_map.size()));
    if (fnew) ds.func_id_decode.push_back(r.func_id);
    r.func_id = fit->second;
    auto [oit, onew] = owner_map.try_emplace(r.owner_hash, static_cast<long>(owner_map.size()));
    (void)onew;
    r.owner_index = oit->second;
    auto [ait, anew] = app_map.try_emplace(r.app_hash, static_cast<long>(app_map.size()));
    (void)anew;
    r.app_index = ait->second;
    r.instance_count_so_far = ++running_count[r.func_id];
    ds.records.push_back(std::move(r));
  }
  ds.vocab_size = static_cast<long>(func_map.size());
  ds.owner_count = static_cast<long>(owner_map.size());
  ds.app_count = static_cast<long>(app_map.size());
  ds.validate();
  return ds;
}

ArrivalDataset parse_prepared(const std::string& path) {
  csv::Reader reader(path);
  std::vector<std::string> fields;
  long line = 0;
  if (!reader.next(fields, line)) throw DataError(path + ": empty file (missing header)");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
  if (col.size() != 6 || fields.size() != 6) {
    throw DataError(path + ": prepared header must have exactly the 6 documented columns");
  }
  for (const char* name : kPreparedColumns) {
    if (!col.count(name)) throw DataError(path + ": missing column '" + std::string(name) + "'");
  }
  std::vector<ArrivalRecord> records;
  while (reader.next(fields, line)) {
    if (fields.size() != 6) {
      throw DataError(path + ":" + std::to_string(line) + ": malformed row (expected 6 fields, got " +
                      std::to_string(fields.size()) + ")");
    }
    ArrivalRecord r;
    r.func_index = csv::parse_long(fields[col["Func_index"]], path, line);
    r.owner_hash = fields[col["HashOwner"]];
    r.app_hash = fields[col["HashApp"]];
    r.func_id = csv::parse_long(fields[col["Func_ID"]], path, line);
    r.avg_exec_ms = csv::parse_double(fields[col["Average"]], path, line);
    r.arrival_minute = csv::parse_long(fields[col["ArrivalMinute"]], path, line);
    if (r.avg_exec_ms <= 0.0) {
      throw DataError(path + ":" + std::to_string(line) + ": non-positive Average");
    }
    if (r.arrival_minute < 0) {
      throw DataError(path + ":" + std::to_string(line) + ": negative ArrivalMinute");
    }
    records.push_back(std::move(r));
  }
  return finalize_dataset(std::move(records), 20160);
}

void write_prepared(const ArrivalDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "Func_index,HashOwner,HashApp,Func_ID,Average,ArrivalMinute\n";
  for (const auto& r : ds.records) {
    out << r.func_index << ',' << r.owner_hash << ',' << r.app_hash << ',' << r.func_id << ','
        << format_double(r.avg_exec_ms) << ',' << r.arrival_minute << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<RawInvocationRow> parse_raw(const std::string& path, int day) {
  csv::Reader reader(path);
  std::vector<std::string> fields;
  long line = 0;
  if (!reader.next(fields, line)) throw DataError(path + ": empty file (missing header)");
  if (fields.size() != 4 + 1440 || fields[0] != "HashOwner" || fields[1] != "HashApp" ||
      fields[2] != "HashFunction" || fields[3] != "Trigger") {
    throw DataError(path + ": raw header must be HashOwner,HashApp,HashFunction,Trigger,1..1440");
  }
  for (int m = 0; m < 1440; ++m) {
    if (fields[static_cast<std::size_t>(4 + m)] != std::to_string(m + 1)) {
      throw DataError(path + ": raw header minute columns must be labelled 1..1440");
    }
  }
  std::vector<RawInvocationRow> rows;
  while (reader.next(fields, line)) {
    if (fields.size() != 4 + 1440) {
      throw DataError(path + ":" + std::to_string(line) + ": malformed row (expected " +
                      std::to_string(4 + 1440) + " fields)");
    }
    RawInvocationRow row;
    row.owner_hash = fields[0];
    row.app_hash = fields[1];
    row.func_hash = fields[2];
    try {
      row.trigger = parse_trigger(fields[3]);
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    row.day = day;
    row.per_minute_counts.resize(1440);
    for (int m = 0; m < 1440; ++m) {
      const long c = csv::parse_long(fields[static_cast<std::size_t>(4 + m)], path, line);
      if (c < 0) throw DataError(path + ":" + std::to_string(line) + ": negative invocation count");
      row.per_minute_counts[static_cast<std::size_t>(m)] = c;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawInvocationRow> filter_http(const std::vector<RawInvocationRow>& rows) {
  std::vector<RawInvocationRow> out;
  out.reserve(rows.size());
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [](const RawInvocationRow& r) { return r.trigger == Trigger::Http; });
  return out;
}

ArrivalDataset derive_instances(const std::vector<RawInvocationRow>& rows, long keepalive_min,
                                double default_exec_ms) {
  if (keepalive_min < 0) throw ConfigError("derive_instances: keepalive must be >= 0");
  if (default_exec_ms <= 0.0) throw ConfigError("derive_instances: default exec must be positive");
  struct Group {
    std::string owner, app;
    std::map<long, long> counts_by_minute;
  };
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> group_index;
  std::vector<Group> groups;
  int max_day = 0;
  for (const auto& row : rows) {
    if (row.per_minute_counts.size() != 1440) {
      throw DataError("derive_instances: per-minute counts must have length 1440");
    }
    max_day = std::max(max_day, row.day);
    const auto key = std::tuple(row.owner_hash, row.app_hash, row.func_hash);
    auto [it, inserted] = group_index.try_emplace(key, groups.size());
    if (inserted) groups.push_back(Group{row.owner_hash, row.app_hash, {}});
    Group& g = groups[it->second];
    for (int m = 0; m < 1440; ++m) {
      const long c = row.per_minute_counts[static_cast<std::size_t>(m)];
      if (c > 0) g.counts_by_minute[static_cast<long>(row.day) * 1440 + m] += c;
    }
  }
  std::vector<ArrivalRecord> records;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& g = groups[gi];
    std::vector<long> instance_last_use;  // one entry per live-or-expired instance
    long next_index = 0;
    for (const auto& [minute, count] : g.counts_by_minute) {
      std::vector<std::size_t> live;
      for (std::size_t i = 0; i < instance_last_use.size(); ++i) {
        if (minute - instance_last_use[i] <= keepalive_min) live.push_back(i);
      }
      std::sort(live.begin(), live.end(), [&](std::size_t a, std::size_t b) {
        return std::tuple(instance_last_use[a], a) < std::tuple(instance_last_use[b], b);
      });
      const long fresh = std::max<long>(0, count - static_cast<long>(live.size()));
      for (long k = 0; k < fresh; ++k) {
        ArrivalRecord r;
        r.func_index = next_index++;
        r.owner_hash = g.owner;
        r.app_hash = g.app;
        r.func_id = static_cast<long>(gi);
        r.avg_exec_ms = default_exec_ms;
        r.arrival_minute = minute;
        records.push_back(std::move(r));
        instance_last_use.push_back(minute);
      }
      // Refresh the longest-idle live instances for the demand not covered
      // by fresh ones.
      const long reused = count - fresh;
      for (long k = 0; k < reused && k < static_cast<long>(live.size()); ++k) {
        instance_last_use[live[static_cast<std::size_t>(k)]] = minute;
      }
    }
  }
  return finalize_dataset(std::move(records), static_cast<long>(max_day + 1) * 1440);
}

ArrivalDataset filter_min_instances(const ArrivalDataset& ds, long min_instances) {
  if (min_instances < 0) throw ConfigError("filter_min_instances: k must be >= 0");
  std::map<long, long> counts;
  for (const auto& r : ds.records) counts[r.func_id] += 1;
  std::vector<ArrivalRecord> kept;
  for (const auto& r : ds.records) {
    if (counts[r.func_id] > min_instances) kept.push_back(r);
  }
  ArrivalDataset out = finalize_dataset(std::move(kept), ds.timeline_minutes);
  // Compose the decode table so dense ids still map to the original source ids.
  for (auto& id : out.func_id_decode) id = ds.func_id_decode[static_cast<std::size_t>(id)];
  return out;
}

void SynthConfig::validate() const {
  if (n_functions < 1) throw ConfigError("synth: n_functions must be >= 1");
  if (arrivals_per_function < 1) throw ConfigError("synth: arrivals_per_function must be >= 1");
  if (constant_gap < 0) throw ConfigError("synth: constant_gap must be >= 0");
  if (poisson_mean_gap <= 0) throw ConfigError("synth: poisson_mean_gap must be > 0");
  if (burst_size < 1) throw ConfigError("synth: burst_size must be >= 1");
  if (burst_gap_base < 0 || burst_gap_slope < 0) throw ConfigError("synth: burst gaps must be >= 0");
  if (burst_gap_jitter < 0 || burst_gap_jitter >= 1) {
    throw ConfigError("synth: burst_gap_jitter must be in [0, 1)");
  }
  if (stretch_prob < 0 || stretch_prob > 1) throw ConfigError("synth: stretch_prob must be in [0, 1]");
  if (off_gap_min < 0 || off_gap_max < off_gap_min) throw ConfigError("synth: bad off-gap range");
  if (exec_ms_min <= 0 || exec_ms_max < exec_ms_min) throw ConfigError("synth: bad exec range");
  if (start_stagger < 0 || start_offset < 0) throw ConfigError("synth: negative start");
}

namespace {
const std::map<std::string, GapLaw>& law_names() {
  static const std::map<std::string, GapLaw> names = {
      {"constant", GapLaw::Constant},
      {"poisson", GapLaw::Poisson},
      {"bursty_mixture", GapLaw::BurstyMixture},
  };
  return names;
}
}  // namespace

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  static const std::set<std::string> known = {
      "n_functions",    "arrivals_per_function", "law",          "constant_gap",
      "poisson_mean_gap", "burst_size",          "burst_gap_base", "burst_gap_slope",
      "burst_gap_jitter", "stretch_prob",        "off_gap_min",  "off_gap_max",
      "exec_ms_min",    "exec_ms_max",           "start_stagger", "start_offset"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) throw ConfigError("synth config: unknown key '" + key + "'");
  }
  if (j.contains("n_functions")) cfg.n_functions = j.at("n_functions").get<int>();
  if (j.contains("arrivals_per_function")) {
    cfg.arrivals_per_function = j.at("arrivals_per_function").get<int>();
  }
  if (j.contains("law")) {
    const std::string name = j.at("law").get<std::string>();
    const auto it = law_names().find(name);
    if (it == law_names().end()) throw ConfigError("synth config: unknown law '" + name + "'");
    cfg.law = it->second;
  }
  if (j.contains("constant_gap")) cfg.constant_gap = j.at("constant_gap").get<double>();
  if (j.contains("poisson_mean_gap")) cfg.poisson_mean_gap = j.at("poisson_mean_gap").get<double>();
  if (j.contains("burst_size")) cfg.burst_size = j.at("burst_size").get<int>();
  if (j.contains("burst_gap_base")) cfg.burst_gap_base = j.at("burst_gap_base").get<double>();
  if (j.contains("burst_gap_slope")) cfg.burst_gap_slope = j.at("burst_gap_slope").get<double>();
  if (j.contains("burst_gap_jitter")) cfg.burst_gap_jitter = j.at("burst_gap_jitter").get<double>();
  if (j.contains("stretch_prob")) cfg.stretch_prob = j.at("stretch_prob").get<double>();
  if (j.contains("off_gap_min")) cfg.off_gap_min = j.at("off_gap_min").get<double>();
  if (j.contains("off_gap_max")) cfg.off_gap_max = j.at("off_gap_max").get<double>();
  if (j.contains("exec_ms_min")) cfg.exec_ms_min = j.at("exec_ms_min").get<double>();
  if (j.contains("exec_ms_max")) cfg.exec_ms_max = j.at("exec_ms_max").get<double>();
  if (j.contains("start_stagger")) cfg.start_stagger = j.at("start_stagger").get<double>();
  if (j.contains("start_offset")) cfg.start_offset = j.at("start_offset").get<double>();
  cfg.validate();
  return cfg;
}

nlohmann::json SynthConfig::to_json() const {
  std::string law_name = "constant";
  for (const auto& [name, value] : law_names()) {
    if (value == law) law_name = name;
  }
  return nlohmann::json{{"n_functions", n_functions},
                        {"arrivals_per_function", arrivals_per_function},
                        {"law", law_name},
                        {"constant_gap", constant_gap},
                        {"poisson_mean_gap", poisson_mean_gap},
                        {"burst_size", burst_size},
                        {"burst_gap_base", burst_gap_base},
                        {"burst_gap_slope", burst_gap_slope},
                        {"burst_gap_jitter", burst_gap_jitter},
                        {"stretch_prob", stretch_prob},
                        {"off_gap_min", off_gap_min},
                        {"off_gap_max", off_gap_max},
                        {"exec_ms_min", exec_ms_min},
                        {"exec_ms_max", exec_ms_max},
                        {"start_stagger", start_stagger},
                        {"start_offset", start_offset}};
}

ArrivalDataset synth_trace(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Rng master(seed);
  std::vector<ArrivalRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.n_functions) * cfg.arrivals_per_function);
  for (int f = 0; f < cfg.n_functions; ++f) {
    Rng rng = master.fork(static_cast<std::uint64_t>(f));
    const double exec_ms = rng.uniform(cfg.exec_ms_min, cfg.exec_ms_max);
    double t = cfg.start_offset + cfg.start_stagger * f;
    long emitted = 0;
    long index = 0;
    int burst_left = 0;
    while (emitted < cfg.arrivals_per_function) {
      ArrivalRecord r;
      r.func_index = index++;
      r.owner_hash = "owner-" + std::to_string(f % std::max(1, cfg.n_functions / 4 + 1));
      r.app_hash = "app-" + std::to_string(f);
      r.func_id = f;
      r.avg_exec_ms = exec_ms;
      r.arrival_minute = static_cast<long>(std::floor(t));
      records.push_back(std::move(r));
      ++emitted;
      switch (cfg.law) {
        case GapLaw::Constant:
          t += cfg.constant_gap;
          break;
        case GapLaw::Poisson: {
          double u = rng.uniform();
          while (u <= 0.0) u = rng.uniform();
          t += -cfg.poisson_mean_gap * std::log(u);
          break;
        }
        case GapLaw::BurstyMixture: {
          if (burst_left == 0) {
            burst_left = cfg.burst_size / 2 +
                         static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.burst_size / 2 + 1)));
            burst_left = std::max(1, burst_left);
          }
          --burst_left;
          if (burst_left == 0) {
            t += rng.uniform(cfg.off_gap_min, cfg.off_gap_max);
          } else {
            double gap = (cfg.burst_gap_base + cfg.burst_gap_slope * f) *
                         (1.0 + cfg.burst_gap_jitter * (2.0 * rng.uniform() - 1.0));
            if (rng.uniform() < cfg.stretch_prob) gap *= 2.0;
            t += gap;
          }
          break;
        }
      }
    }
  }
  long max_minute = 0;
  for (const auto& r : records) max_minute = std::max(max_minute, r.arrival_minute);
  return finalize_dataset(std::move(records), std::max<long>(20160, max_minute + 1));
}

GapStats gap_stats(const ArrivalDataset& ds) {
  if (ds.records.empty()) throw DataError("gap_stats: empty dataset");
  std::map<long, std::vector<long>> positions;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    positions[ds.records[i].func_id].push_back(static_cast<long>(i));
  }
  double mean_acc = 0.0;
  double var_acc = 0.0;
  long used = 0;
  for (const auto& [func, pos] : positions) {
    (void)func;
    if (pos.size() < 2) continue;
    std::vector<double> gaps(pos.size() - 1);
    for (std::size_t i = 0; i + 1 < pos.size(); ++i) {
      gaps[i] = static_cast<double>(pos[i + 1] - pos[i]);
    }
    double m = 0.0;
    for (double g : gaps) m += g;
    m /= static_cast<double>(gaps.size());
    double v = 0.0;
    for (double g : gaps) v += (g - m) * (g - m);
    v /= static_cast<double>(gaps.size());
    mean_acc += m;
    var_acc += v;
    ++used;
  }
  if (used == 0) {
    throw DataError("gap_stats: undefined variance (no function has >= 2 records)");
  }
  return GapStats{mean_acc / used, var_acc / used, used};
}

}  // namespace coldstart::trace
