#include "webqoe/report/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include "webqoe/core/fsio.hpp"
#include "webqoe/core/session_io.hpp"
#include "webqoe/core/study_config.hpp"
#include "webqoe/core/textio.hpp"
#include "webqoe/core/trace_io.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/qos/metrics.hpp"
#include "webqoe/scaling/judgment.hpp"
#include "webqoe/sim/simulator.hpp"
#include "webqoe/stats/regression.hpp"
#include "webqoe/usability/scores.hpp"
#include "webqoe/version.hpp"

namespace webqoe::commands {

namespace fs = std::filesystem;

namespace {

struct OutputSet {
  // path (relative to out dir) -> content; written only when complete.
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string content) { files[name] = std::move(content); }

  void write_all(const fs::path& out_dir) const {
    fs::create_directories(out_dir);
    for (const auto& [name, content] : files) {
      write_file_atomic(out_dir / name, content);
    }
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(files.size());
    for (const auto& [name, unused] : files) out.push_back(name);
    return out;
  }
};

LoadedConfig config_or_defaults(const std::string& config_path) {
  if (config_path.empty()) {
    StudyConfig config = default_study_config();
    return LoadedConfig{config, study_config_to_json(config)};
  }
  return load_study_config(config_path);
}

void require_valid_config(const StudyConfig& config) {
  const auto diags = validate_config(config);
  if (!diags.empty()) {
    std::string msg = "invalid study config:";
    for (const std::string& d : diags) msg += "\n  " + d;
    throw ValidationError(msg);
  }
}

nlohmann::ordered_json manifest_base(const std::string& command, const nlohmann::json& raw_config) {
  nlohmann::ordered_json m;
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["command"] = command;
  m["config_hash"] = config_hash_hex(raw_config);
  return m;
}

std::string trace_filename(const std::string& service, const std::string& environment) {
  return "trace_" + service + "_" + environment + ".csv";
}

std::string ratings_from_sessions_csv(std::span<const SessionLog> sessions) {
  std::vector<RatingRow> rows;
  rows.reserve(sessions.size());
  for (const SessionLog& s : sessions) {
    rows.push_back({s.subject_id, s.service_id, s.environment_id, s.rating});
  }
  return ratings_to_csv(rows);
}

std::string qos_rows_json(std::span<const qos::QosSummary> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const qos::QosSummary& s : rows) arr.push_back(qos::summary_to_json(s));
  return arr.dump(2) + "\n";
}

std::string usability_rows_json(std::span<const usability::UsabilityScores> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const usability::UsabilityScores& r : rows) {
    nlohmann::ordered_json j;
    j["service_id"] = r.service_id;
    j["environment_id"] = r.environment_id;
    j["E"] = r.e;
    j["W"] = r.w;
    j["H"] = r.h;
    if (r.s) {
      j["S"] = *r.s;
    } else {
      j["S"] = nullptr;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

struct TableRow {
  std::string service;
  std::string environment;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

std::string table_csv(std::span<const TableRow> rows) {
  std::string out = "service,environment,mean,ci_low,ci_high\n";
  for (const TableRow& r : rows) {
    out += r.service + "," + r.environment + "," + fmt_double(r.mean) + "," +
           fmt_double(r.ci_low) + "," + fmt_double(r.ci_high) + "\n";
  }
  return out;
}

// Per-metric tables in the style of the published result figures: the two
// RTT metrics carry their real confidence intervals, scalar rates collapse
// to the point value.
void add_qos_tables(OutputSet& outputs, std::span<const qos::QosSummary> rows) {
  auto table_of = [&](std::string_view metric, auto getter) {
    std::vector<TableRow> t;
    t.reserve(rows.size());
    for (const qos::QosSummary& s : rows) {
      auto [mean, lo, hi] = getter(s);
      t.push_back({s.label.service_id, s.label.environment_id, mean, lo, hi});
    }
    outputs.add("report_" + std::string(metric) + ".csv", table_csv(t));
  };
  table_of("handshake_rtt_ms", [](const qos::QosSummary& s) {
    return std::tuple{s.handshake_rtt_ms.mean, s.handshake_rtt_ms.ci_low,
                      s.handshake_rtt_ms.ci_high};
  });
  table_of("allseg_rtt_ms", [](const qos::QosSummary& s) {
    return std::tuple{s.allseg_rtt_ms.mean, s.allseg_rtt_ms.ci_low, s.allseg_rtt_ms.ci_high};
  });
  for (std::string_view name :
       {"mean_segment_len_bytes", "pkts_per_s", "bytes_per_s", "retrans_pkts_per_s",
        "retrans_bytes_per_s", "measured_loss_rate"}) {
    table_of(name, [name](const qos::QosSummary& s) {
      const double v = qos::metric_value(s, name);
      return std::tuple{v, v, v};
    });
  }
}

void add_usability_tables(OutputSet& outputs, std::span<const usability::UsabilityScores> rows,
                          std::span<const SessionLog> sessions, const StudyConfig& config) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> per_user;
  for (const SessionLog& s : sessions) {
    per_user[{s.service_id, s.environment_id}].push_back(
        usability::user_achievement(s, config.priority_weights));
  }
  std::vector<TableRow> eff, effic, satis;
  for (const usability::UsabilityScores& r : rows) {
    auto it = per_user.find({r.service_id, r.environment_id});
    if (it != per_user.end()) {
      const qos::MeanCI ci = qos::mean_ci(it->second, config.ci_level);
      eff.push_back({r.service_id, r.environment_id, ci.mean, ci.ci_low, ci.ci_high});
    } else {
      eff.push_back({r.service_id, r.environment_id, r.e, r.e, r.e});
    }
    effic.push_back({r.service_id, r.environment_id, r.h, r.h, r.h});
    const double s = r.s.value_or(0.0);
    satis.push_back({r.service_id, r.environment_id, s, s, s});
  }
  outputs.add("report_effectiveness.csv", table_csv(eff));
  outputs.add("report_efficiency.csv", table_csv(effic));
  outputs.add("report_satisfaction.csv", table_csv(satis));
}

stats::Dataset build_dataset(std::span<const qos::QosSummary> qos_rows,
                             std::span<const usability::UsabilityScores> usability_rows,
                             const StudyConfig& config) {
  std::map<std::pair<std::string, std::string>, const qos::QosSummary*> by_label;
  for (const qos::QosSummary& s : qos_rows) {
    by_label[{s.label.service_id, s.label.environment_id}] = &s;
  }
  if (by_label.size() != qos_rows.size()) {
    throw LabelMismatch("regress: duplicate (service, environment) rows in QoS input");
  }
  if (by_label.size() != usability_rows.size()) {
    throw LabelMismatch("regress: QoS rows (" + std::to_string(by_label.size()) +
                        ") and usability rows (" + std::to_string(usability_rows.size()) +
                        ") do not match");
  }

  stats::Dataset data;
  for (std::string_view name : qos::metric_names()) data.regressor_names.emplace_back(name);
  data.regressor_names.emplace_back("service_dummy");
  data.columns.resize(data.regressor_names.size());
  auto& e = data.responses["E"];
  auto& h = data.responses["H"];
  auto& s_resp = data.responses["S"];

  for (const usability::UsabilityScores& row : usability_rows) {
    auto it = by_label.find({row.service_id, row.environment_id});
    if (it == by_label.end()) {
      throw LabelMismatch("regress: no QoS row for cell (" + row.service_id + ", " +
                          row.environment_id + ")");
    }
    const qos::QosSummary& q = *it->second;
    std::size_t col = 0;
    for (std::string_view name : qos::metric_names()) {
      data.columns[col++].push_back(qos::metric_value(q, name));
    }
    data.columns[col].push_back(row.service_id == config.reference_service ? 0.0 : 1.0);
    if (!row.s) {
      throw ValidationError("regress: usability row (" + row.service_id + ", " +
                            row.environment_id + ") has no satisfaction value");
    }
    e.push_back(row.e);
    h.push_back(row.h);
    s_resp.push_back(*row.s);
  }
  return data;
}

struct RegressionOutputs {
  std::map<std::string, stats::FittedModel> models;  // response -> model
  std::string equations_text;
};

RegressionOutputs run_regressions(const stats::Dataset& data) {
  RegressionOutputs out;
  for (const std::string response : {"E", "H", "S"}) {
    stats::FittedModel model = stats::best_subset(data, response);
    out.equations_text += stats::equation_string(model) + "\n";
    out.models.emplace(response, std::move(model));
  }
  return out;
}

void add_regression_files(OutputSet& outputs, const RegressionOutputs& reg) {
  for (const auto& [response, model] : reg.models) {
    outputs.add("model_" + response + ".json", stats::model_to_json(model).dump(2) + "\n");
  }
  outputs.add("equations.txt", reg.equations_text);
}

}  // namespace

void cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
                  std::ostream& out) {
  if (out_dir.empty()) throw UsageError("simulate: output directory is required");
  const LoadedConfig loaded = config_or_defaults(config_path);
  require_valid_config(loaded.config);
  const sim::SimSettings settings = sim::settings_from_config_json(loaded.raw, loaded.config);
  const sim::StudyBundle bundle = sim::run_study(loaded.config, settings, seed);

  OutputSet outputs;
  std::vector<SessionLog> all_sessions;
  for (const sim::CellData& cell : bundle.cells) {
    outputs.add(trace_filename(cell.service_id, cell.environment_id), trace_to_csv(cell.trace));
    all_sessions.insert(all_sessions.end(), cell.sessions.begin(), cell.sessions.end());
  }
  outputs.add("sessions.jsonl", sessions_to_jsonl(all_sessions));
  outputs.add("ratings.csv", ratings_from_sessions_csv(all_sessions));
  outputs.add("config.json", study_config_to_json(loaded.config).dump(2) + "\n");

  nlohmann::ordered_json manifest = manifest_base("simulate", loaded.raw);
  manifest["seed"] = seed;
  manifest["simulator"] = sim::settings_to_json(settings);
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const sim::CellData& cell : bundle.cells) {
    nlohmann::ordered_json cj;
    cj["service_id"] = cell.service_id;
    cj["environment_id"] = cell.environment_id;
    cj["trace"] = trace_filename(cell.service_id, cell.environment_id);
    cj["sessions"] = cell.sessions.size();
    cells.push_back(std::move(cj));
  }
  manifest["cells"] = std::move(cells);
  std::vector<std::string> names = outputs.names();
  names.push_back("manifest.json");
  std::sort(names.begin(), names.end());
  manifest["outputs"] = names;
  outputs.add("manifest.json", manifest.dump(2) + "\n");

  outputs.write_all(out_dir);
  out << manifest.dump(2) << "\n";
}

void cmd_qos(const std::vector<std::string>& trace_paths, const std::string& out_dir,
             Format format, std::ostream& out) {
  if (trace_paths.empty()) throw UsageError("qos: at least one trace file is required");
  if (out_dir.empty()) throw UsageError("qos: output directory is required");

  std::vector<qos::QosSummary> rows;
  for (const std::string& path : trace_paths) {
    PacketTrace trace = load_trace(path);
    if (trace.label.service_id.empty() || trace.label.environment_id.empty()) {
      throw ValidationError(path +
                            ": cannot derive (service, environment) from filename; expected "
                            "trace_<service>_<environment>.csv");
    }
    rows.push_back(qos::summarize(trace));
  }
  std::sort(rows.begin(), rows.end(), [](const qos::QosSummary& a, const qos::QosSummary& b) {
    return std::tie(a.label.service_id, a.label.environment_id) <
           std::tie(b.label.service_id, b.label.environment_id);
  });

  OutputSet outputs;
  if (format != Format::Json) outputs.add("qos_summary.csv", qos::summaries_to_csv(rows));
  if (format != Format::Csv) outputs.add("qos_summary.json", qos_rows_json(rows));
  outputs.write_all(out_dir);
  out << rows.size() << " trace summaries written\n";
}

void cmd_usability(const std::string& sessions_path, const std::string& ratings_path,
                   const std::string& config_path, const std::string& out_dir, Format format,
                   std::ostream& out) {
  if (sessions_path.empty() || ratings_path.empty()) {
    throw UsageError("usability: session and rating files are required");
  }
  if (out_dir.empty()) throw UsageError("usability: output directory is required");

  const LoadedConfig loaded = config_or_defaults(config_path);
  const std::vector<SessionLog> sessions = load_sessions(sessions_path);
  const std::vector<RatingRow> ratings = load_ratings(ratings_path);

  const auto diags = validate_study(loaded.config, sessions);
  if (!diags.empty()) {
    std::string msg = "usability: study validation failed:";
    for (const std::string& d : diags) msg += "\n  " + d;
    throw ValidationError(msg);
  }

  std::vector<usability::UsabilityScores> scores = usability::cell_scores(sessions, loaded.config);
  const scaling::RatingMatrix matrix = scaling::matrix_from_ratings(ratings, loaded.config);
  scores = scaling::satisfaction(std::move(scores), matrix);
  const scaling::ScaleResult scale = scaling::fit_scale(matrix);

  OutputSet outputs;
  if (format != Format::Json) outputs.add("usability.csv", usability::scores_to_csv(scores));
  if (format != Format::Csv) outputs.add("usability.json", usability_rows_json(scores));
  outputs.add("scale.json", scaling::scale_to_json(scale, matrix).dump(2) + "\n");
  outputs.write_all(out_dir);
  out << scores.size() << " usability rows written\n";
}

void cmd_regress(const std::string& qos_csv_path, const std::string& usability_csv_path,
                 const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  if (qos_csv_path.empty() || usability_csv_path.empty()) {
    throw UsageError("regress: QoS and usability CSV paths are required");
  }
  if (out_dir.empty()) throw UsageError("regress: output directory is required");

  const LoadedConfig loaded = config_or_defaults(config_path);
  const std::vector<qos::QosSummary> qos_rows = qos::summaries_from_csv(read_file(qos_csv_path));
  const std::vector<usability::UsabilityScores> usability_rows =
      usability::scores_from_csv(read_file(usability_csv_path));

  const stats::Dataset data = build_dataset(qos_rows, usability_rows, loaded.config);
  const RegressionOutputs reg = run_regressions(data);

  OutputSet outputs;
  add_regression_files(outputs, reg);
  outputs.write_all(out_dir);
  out << reg.equations_text;
}

void cmd_pipeline(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
                  std::ostream& out) {
  if (out_dir.empty()) throw UsageError("pipeline: output directory is required");
  const LoadedConfig loaded = config_or_defaults(config_path);
  require_valid_config(loaded.config);
  const sim::SimSettings settings = sim::settings_from_config_json(loaded.raw, loaded.config);
  const sim::StudyBundle bundle = sim::run_study(loaded.config, settings, seed);

  std::vector<SessionLog> all_sessions;
  std::vector<qos::QosSummary> qos_rows;
  for (const sim::CellData& cell : bundle.cells) {
    qos_rows.push_back(qos::summarize(cell.trace, loaded.config.ci_level));
    all_sessions.insert(all_sessions.end(), cell.sessions.begin(), cell.sessions.end());
  }

  std::vector<usability::UsabilityScores> scores =
      usability::cell_scores(all_sessions, loaded.config);
  const scaling::RatingMatrix matrix = scaling::matrix_from_sessions(all_sessions, loaded.config);
  scores = scaling::satisfaction(std::move(scores), matrix);
  const scaling::ScaleResult scale = scaling::fit_scale(matrix);

  const stats::Dataset data = build_dataset(qos_rows, scores, loaded.config);
  const RegressionOutputs reg = run_regressions(data);

  OutputSet outputs;
  for (const sim::CellData& cell : bundle.cells) {
    outputs.add(trace_filename(cell.service_id, cell.environment_id), trace_to_csv(cell.trace));
  }
  outputs.add("sessions.jsonl", sessions_to_jsonl(all_sessions));
  outputs.add("ratings.csv", ratings_from_sessions_csv(all_sessions));
  outputs.add("config.json", study_config_to_json(loaded.config).dump(2) + "\n");
  outputs.add("qos_summary.csv", qos::summaries_to_csv(qos_rows));
  outputs.add("qos_summary.json", qos_rows_json(qos_rows));
  outputs.add("usability.csv", usability::scores_to_csv(scores));
  outputs.add("usability.json", usability_rows_json(scores));
  outputs.add("scale.json", scaling::scale_to_json(scale, matrix).dump(2) + "\n");
  add_regression_files(outputs, reg);
  add_qos_tables(outputs, qos_rows);
  add_usability_tables(outputs, scores, all_sessions, loaded.config);

  nlohmann::ordered_json manifest = manifest_base("pipeline", loaded.raw);
  manifest["seed"] = seed;
  manifest["simulator"] = sim::settings_to_json(settings);
  nlohmann::ordered_json equations;
  for (const auto& [response, model] : reg.models) {
    equations[response] = stats::equation_string(model);
  }
  manifest["equations"] = std::move(equations);
  std::vector<std::string> names = outputs.names();
  names.push_back("manifest.json");
  std::sort(names.begin(), names.end());
  manifest["outputs"] = names;
  outputs.add("manifest.json", manifest.dump(2) + "\n");

  outputs.write_all(out_dir);
  out << manifest.dump(2) << "\n";
}

}  // namespace webqoe::commands
