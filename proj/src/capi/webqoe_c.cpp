#include "webqoe/webqoe.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "webqoe/core/trace_io.hpp"
#include "webqoe/core/types.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/qos/metrics.hpp"
#include "webqoe/report/commands.hpp"
#include "webqoe/stats/regression.hpp"
#include "webqoe/version.hpp"

struct webqoe_trace {
  webqoe::PacketTrace trace;
};

struct webqoe_summary {
  webqoe::qos::QosSummary summary;
};

struct webqoe_model {
  webqoe::stats::FittedModel model;
};

namespace {

thread_local std::string g_last_error;

int set_error(const webqoe::Error& e) {
  g_last_error = e.what();
  return static_cast<int>(e.code());
}

int set_error(const std::exception& e) {
  g_last_error = e.what();
  return WEBQOE_E_DATA;
}

int usage_error(const char* msg) {
  g_last_error = msg;
  return WEBQOE_E_USAGE;
}

// Runs fn, translating exceptions to status codes; clears the error slot
// on success so webqoe_last_error reflects only the most recent call.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return WEBQOE_OK;
  } catch (const webqoe::Error& e) {
    return set_error(e);
  } catch (const std::exception& e) {
    return set_error(e);
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

webqoe::commands::Format parse_format(const char* format) {
  if (format == nullptr) return webqoe::commands::Format::Both;
  const std::string f = format;
  if (f == "csv") return webqoe::commands::Format::Csv;
  if (f == "json") return webqoe::commands::Format::Json;
  if (f == "both") return webqoe::commands::Format::Both;
  throw webqoe::UsageError("unknown format '" + f + "' (expected csv, json, or both)");
}

template <typename Fn>
int run_command(char** out_text, Fn&& fn) {
  return guarded([&] {
    std::ostringstream os;
    fn(os);
    if (out_text != nullptr) *out_text = dup_string(os.str());
  });
}

}  // namespace

extern "C" {

const char* webqoe_version(void) { return webqoe::kVersion; }

const char* webqoe_last_error(void) { return g_last_error.c_str(); }

void webqoe_string_free(char* s) { std::free(s); }

int webqoe_trace_load(const char* path, webqoe_trace** out) {
  if (path == nullptr || out == nullptr) return usage_error("trace_load: null argument");
  return guarded([&] { *out = new webqoe_trace{webqoe::load_trace(path)}; });
}

int webqoe_trace_record_count(const webqoe_trace* trace, size_t* out) {
  if (trace == nullptr || out == nullptr) return usage_error("trace_record_count: null argument");
  *out = trace->trace.records.size();
  g_last_error.clear();
  return WEBQOE_OK;
}

void webqoe_trace_free(webqoe_trace* trace) { delete trace; }

int webqoe_trace_summarize(const webqoe_trace* trace, double ci_level, webqoe_summary** out) {
  if (trace == nullptr || out == nullptr) return usage_error("trace_summarize: null argument");
  return guarded(
      [&] { *out = new webqoe_summary{webqoe::qos::summarize(trace->trace, ci_level)}; });
}

int webqoe_summary_metric(const webqoe_summary* summary, const char* name, double* out) {
  if (summary == nullptr || name == nullptr || out == nullptr) {
    return usage_error("summary_metric: null argument");
  }
  return guarded([&] { *out = webqoe::qos::metric_value(summary->summary, name); });
}

int webqoe_summary_to_json(const webqoe_summary* summary, char** out) {
  if (summary == nullptr || out == nullptr) return usage_error("summary_to_json: null argument");
  return guarded(
      [&] { *out = dup_string(webqoe::qos::summary_to_json(summary->summary).dump(2)); });
}

void webqoe_summary_free(webqoe_summary* summary) { delete summary; }

int webqoe_model_load(const char* path, webqoe_model** out) {
  if (path == nullptr || out == nullptr) return usage_error("model_load: null argument");
  return guarded([&] { *out = new webqoe_model{webqoe::stats::load_model(path)}; });
}

int webqoe_model_parse(const char* json_text, webqoe_model** out) {
  if (json_text == nullptr || out == nullptr) return usage_error("model_parse: null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      throw webqoe::ParseError(0, e.what());
    }
    *out = new webqoe_model{webqoe::stats::model_from_json(j)};
  });
}

int webqoe_model_predict(const webqoe_model* model, const char* const* names,
                         const double* values, size_t n, double* out) {
  if (model == nullptr || out == nullptr || (n > 0 && (names == nullptr || values == nullptr))) {
    return usage_error("model_predict: null argument");
  }
  return guarded([&] {
    std::map<std::string, double> inputs;
    for (size_t i = 0; i < n; ++i) {
      if (names[i] == nullptr) throw webqoe::UsageError("model_predict: null regressor name");
      inputs[names[i]] = values[i];
    }
    *out = webqoe::stats::predict(model->model, inputs);
  });
}

int webqoe_model_crossover(const webqoe_model* model, double* out) {
  if (model == nullptr || out == nullptr) return usage_error("model_crossover: null argument");
  return guarded([&] { *out = webqoe::stats::crossover_t(model->model); });
}

int webqoe_model_equation(const webqoe_model* model, char** out) {
  if (model == nullptr || out == nullptr) return usage_error("model_equation: null argument");
  return guarded([&] { *out = dup_string(webqoe::stats::equation_string(model->model)); });
}

void webqoe_model_free(webqoe_model* model) { delete model; }

int webqoe_cmd_simulate(const char* config_path, uint64_t seed, const char* out_dir,
                        char** out_text) {
  if (out_dir == nullptr) return usage_error("simulate: output directory is required");
  return run_command(out_text, [&](std::ostream& os) {
    webqoe::commands::cmd_simulate(config_path != nullptr ? config_path : "", seed, out_dir, os);
  });
}

int webqoe_cmd_qos(const char* const* trace_paths, size_t n_paths, const char* out_dir,
                   const char* format, char** out_text) {
  if (out_dir == nullptr || (n_paths > 0 && trace_paths == nullptr)) {
    return usage_error("qos: null argument");
  }
  return run_command(out_text, [&](std::ostream& os) {
    std::vector<std::string> paths;
    paths.reserve(n_paths);
    for (size_t i = 0; i < n_paths; ++i) {
      if (trace_paths[i] == nullptr) throw webqoe::UsageError("qos: null trace path");
      paths.emplace_back(trace_paths[i]);
    }
    webqoe::commands::cmd_qos(paths, out_dir, parse_format(format), os);
  });
}

int webqoe_cmd_usability(const char* sessions_path, const char* ratings_path,
                         const char* config_path, const char* out_dir, const char* format,
                         char** out_text) {
  if (sessions_path == nullptr || ratings_path == nullptr || out_dir == nullptr) {
    return usage_error("usability: null argument");
  }
  return run_command(out_text, [&](std::ostream& os) {
    webqoe::commands::cmd_usability(sessions_path, ratings_path,
                                    config_path != nullptr ? config_path : "", out_dir,
                                    parse_format(format), os);
  });
}

int webqoe_cmd_regress(const char* qos_csv_path, const char* usability_csv_path,
                       const char* config_path, const char* out_dir, char** out_text) {
  if (qos_csv_path == nullptr || usability_csv_path == nullptr || out_dir == nullptr) {
    return usage_error("regress: null argument");
  }
  return run_command(out_text, [&](std::ostream& os) {
    webqoe::commands::cmd_regress(qos_csv_path, usability_csv_path,
                                  config_path != nullptr ? config_path : "", out_dir, os);
  });
}

int webqoe_cmd_pipeline(const char* config_path, uint64_t seed, const char* out_dir,
                        char** out_text) {
  if (out_dir == nullptr) return usage_error("pipeline: output directory is required");
  return run_command(out_text, [&](std::ostream& os) {
    webqoe::commands::cmd_pipeline(config_path != nullptr ? config_path : "", seed, out_dir, os);
  });
}

}  // extern "C"
