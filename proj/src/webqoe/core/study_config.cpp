#include "webqoe/core/study_config.hpp"

#include <cmath>
#include <set>

#include "webqoe/core/fsio.hpp"
#include "webqoe/core/textio.hpp"
#include "webqoe/errors.hpp"

namespace webqoe {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string mode_name(WorkloadMode mode) {
  return mode == WorkloadMode::ProductAsPrinted ? "ProductAsPrinted" : "RateNormalized";
}

WorkloadMode mode_from_name(const std::string& name) {
  if (name == "ProductAsPrinted") return WorkloadMode::ProductAsPrinted;
  if (name == "RateNormalized") return WorkloadMode::RateNormalized;
  throw ValidationError("workload_mode: expected ProductAsPrinted or RateNormalized, got \"" +
                        name + "\"");
}

}  // namespace

StudyConfig default_study_config() {
  StudyConfig c;
  c.environments = {
      {"1", 0.0, 0.0},
      {"2", 150.0, 0.0},
      {"3", 0.0, 0.05},
      {"4", 150.0, 0.05},
      {"5", 200.0, 0.10},
  };
  c.services = {"ServiceA", "ServiceB"};
  c.reference_service = "ServiceA";
  c.priority_weights = {0.6, 0.3, 0.1};
  c.workload_coefficients = {100.0, 10000.0, 20.0, 20.0};
  c.workload_mode = WorkloadMode::ProductAsPrinted;
  c.ci_level = 0.95;
  return c;
}

StudyConfig study_config_from_json(const json& j) {
  StudyConfig c = default_study_config();
  try {
    if (j.contains("environments")) {
      c.environments.clear();
      for (const json& e : j.at("environments")) {
        Environment env;
        env.id = e.at("id").get<std::string>();
        env.added_rtt_ms = e.value("added_rtt_ms", 0.0);
        env.added_loss_rate = e.value("added_loss_rate", 0.0);
        c.environments.push_back(std::move(env));
      }
    }
    if (j.contains("services")) {
      c.services = j.at("services").get<std::vector<std::string>>();
    }
    if (j.contains("reference_service")) {
      c.reference_service = j.at("reference_service").get<std::string>();
    }
    if (j.contains("priority_weights")) {
      const json& w = j.at("priority_weights");
      c.priority_weights.high = w.at("high").get<double>();
      c.priority_weights.mid = w.at("mid").get<double>();
      c.priority_weights.low = w.at("low").get<double>();
    }
    if (j.contains("workload_coefficients")) {
      const json& w = j.at("workload_coefficients");
      c.workload_coefficients.wheel_spin = w.at("wheel_spin").get<double>();
      c.workload_coefficients.mouse_distance = w.at("mouse_distance").get<double>();
      c.workload_coefficients.click = w.at("click").get<double>();
      c.workload_coefficients.keystroke = w.at("keystroke").get<double>();
    }
    if (j.contains("workload_mode")) {
      c.workload_mode = mode_from_name(j.at("workload_mode").get<std::string>());
    }
    if (j.contains("ci_level")) {
      c.ci_level = j.at("ci_level").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("study config: ") + e.what());
  }
  return c;
}

ordered_json study_config_to_json(const StudyConfig& c) {
  ordered_json j;
  ordered_json envs = ordered_json::array();
  for (const Environment& e : c.environments) {
    ordered_json ej;
    ej["id"] = e.id;
    ej["added_rtt_ms"] = e.added_rtt_ms;
    ej["added_loss_rate"] = e.added_loss_rate;
    envs.push_back(std::move(ej));
  }
  j["environments"] = std::move(envs);
  j["services"] = c.services;
  j["reference_service"] = c.reference_service;
  j["priority_weights"] = {{"high", c.priority_weights.high},
                           {"mid", c.priority_weights.mid},
                           {"low", c.priority_weights.low}};
  j["workload_coefficients"] = {{"wheel_spin", c.workload_coefficients.wheel_spin},
                                {"mouse_distance", c.workload_coefficients.mouse_distance},
                                {"click", c.workload_coefficients.click},
                                {"keystroke", c.workload_coefficients.keystroke}};
  j["workload_mode"] = mode_name(c.workload_mode);
  j["ci_level"] = c.ci_level;
  return j;
}

LoadedConfig load_study_config(const std::filesystem::path& path) {
  std::string content = read_file(path);
  json raw = json::parse(content, nullptr, false);
  if (raw.is_discarded()) throw ParseError(0, path.string() + ": invalid JSON");
  if (!raw.is_object()) throw ParseError(0, path.string() + ": expected a JSON object");
  try {
    return LoadedConfig{study_config_from_json(raw), std::move(raw)};
  } catch (const ParseError& e) {
    throw ParseError(e.row(), path.string() + ": " + e.what());
  }
}

std::vector<std::string> validate_config(const StudyConfig& c) {
  std::vector<std::string> out;
  if (c.environments.empty()) out.push_back("environments: list is empty");
  if (c.services.empty()) out.push_back("services: list is empty");

  std::set<std::string> env_ids;
  for (const Environment& e : c.environments) {
    if (!env_ids.insert(e.id).second) out.push_back("environments: duplicate id \"" + e.id + "\"");
    if (e.added_rtt_ms < 0) out.push_back("environment \"" + e.id + "\": added_rtt_ms is negative");
    if (e.added_loss_rate < 0 || e.added_loss_rate > 1) {
      out.push_back("environment \"" + e.id + "\": added_loss_rate outside [0,1]");
    }
  }

  std::set<std::string> service_ids;
  for (const std::string& s : c.services) {
    if (!service_ids.insert(s).second) out.push_back("services: duplicate id \"" + s + "\"");
  }
  if (!service_ids.contains(c.reference_service)) {
    out.push_back("reference_service \"" + c.reference_service + "\" not in services");
  }

  double wsum = c.priority_weights.high + c.priority_weights.mid + c.priority_weights.low;
  if (std::fabs(wsum - 1.0) > 1e-12) {
    out.push_back("priority_weights sum to " + fmt_double(wsum) + "; expected 1");
  }

  const WorkloadCoefficients& wc = c.workload_coefficients;
  if (wc.wheel_spin <= 0 || wc.mouse_distance <= 0 || wc.click <= 0 || wc.keystroke <= 0) {
    out.push_back("workload_coefficients must all be positive");
  }

  if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) {
    out.push_back("ci_level outside (0,1)");
  }
  return out;
}

std::vector<std::string> validate_study(const StudyConfig& c,
                                        std::span<const SessionLog> sessions) {
  std::vector<std::string> out = validate_config(c);

  std::set<std::string> env_ids, service_ids;
  for (const Environment& e : c.environments) env_ids.insert(e.id);
  for (const std::string& s : c.services) service_ids.insert(s);

  std::set<std::string> unknown_env, unknown_service;
  std::set<std::pair<std::string, std::string>> seen_cells;
  for (const SessionLog& s : sessions) {
    if (!service_ids.contains(s.service_id)) unknown_service.insert(s.service_id);
    if (!env_ids.contains(s.environment_id)) unknown_env.insert(s.environment_id);
    seen_cells.emplace(s.service_id, s.environment_id);
  }
  for (const std::string& id : unknown_service) {
    out.push_back("session references unknown service \"" + id + "\"");
  }
  for (const std::string& id : unknown_env) {
    out.push_back("session references unknown environment \"" + id + "\"");
  }
  for (const std::string& svc : c.services) {
    for (const Environment& e : c.environments) {
      if (!seen_cells.contains({svc, e.id})) {
        out.push_back("no sessions for cell (" + svc + ", " + e.id + ")");
      }
    }
  }
  return out;
}

const Environment& environment_by_id(const StudyConfig& config, const std::string& id) {
  for (const Environment& e : config.environments) {
    if (e.id == id) return e;
  }
  throw ValidationError("unknown environment id \"" + id + "\"");
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

std::string config_hash_hex(const nlohmann::json& raw) {
  std::uint64_t h = fnv1a64(raw.dump());
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

}  // namespace webqoe
