// Command-line front end. Deliberately links only the public C interface
// so it doubles as a living test of that boundary.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "webqoe/webqoe.h"

namespace {

int finish(int code, char* text) {
  if (code == WEBQOE_OK) {
    if (text != nullptr && text[0] != '\0') std::fputs(text, stdout);
  } else {
    std::fprintf(stderr, "webqoe: error: %s\n", webqoe_last_error());
  }
  webqoe_string_free(text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QoS / Web-usability correlation toolkit"};
  app.set_version_flag("--version", std::string(webqoe_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format = "both";
  std::uint64_t seed = 0;
  std::vector<std::string> trace_paths;
  std::string sessions_path;
  std::string ratings_path;
  std::string qos_csv;
  std::string usability_csv;

  auto* sim = app.add_subcommand("simulate", "Synthesize traces, sessions, and ratings");
  sim->add_option("--config", config_path, "Study config JSON (defaults built in)");
  sim->add_option("--seed", seed, "Generator seed")->default_val(0);
  sim->add_option("--out", out_dir, "Output directory")->required();

  auto* qos = app.add_subcommand("qos", "Summarize packet traces");
  qos->add_option("traces", trace_paths, "Trace CSV files (trace_<service>_<environment>.csv)")
      ->required();
  qos->add_option("--out", out_dir, "Output directory")->required();
  qos->add_option("--format", format, "csv, json, or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  auto* usab = app.add_subcommand("usability", "Score sessions and scale ratings");
  usab->add_option("--sessions", sessions_path, "Session JSONL file")->required();
  usab->add_option("--ratings", ratings_path, "Ratings CSV file")->required();
  usab->add_option("--config", config_path, "Study config JSON (defaults built in)");
  usab->add_option("--out", out_dir, "Output directory")->required();
  usab->add_option("--format", format, "csv, json, or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  auto* reg = app.add_subcommand("regress", "Fit usability-on-QoS regression models");
  reg->add_option("--qos", qos_csv, "QoS summary CSV")->required();
  reg->add_option("--usability", usability_csv, "Usability scores CSV")->required();
  reg->add_option("--config", config_path, "Study config JSON (defaults built in)");
  reg->add_option("--out", out_dir, "Output directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "Run simulate, qos, usability, and regress");
  pipe->add_option("--config", config_path, "Study config JSON (defaults built in)");
  pipe->add_option("--seed", seed, "Generator seed")->default_val(0);
  pipe->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : WEBQOE_E_USAGE;
  }

  const char* cfg = config_path.empty() ? nullptr : config_path.c_str();
  char* text = nullptr;

  // The command must complete before finish() reads `text`, so each call
  // is sequenced into its own statement.
  if (sim->parsed()) {
    const int rc = webqoe_cmd_simulate(cfg, seed, out_dir.c_str(), &text);
    return finish(rc, text);
  }
  if (qos->parsed()) {
    std::vector<const char*> paths;
    paths.reserve(trace_paths.size());
    for (const std::string& p : trace_paths) paths.push_back(p.c_str());
    const int rc =
        webqoe_cmd_qos(paths.data(), paths.size(), out_dir.c_str(), format.c_str(), &text);
    return finish(rc, text);
  }
  if (usab->parsed()) {
    const int rc = webqoe_cmd_usability(sessions_path.c_str(), ratings_path.c_str(), cfg,
                                        out_dir.c_str(), format.c_str(), &text);
    return finish(rc, text);
  }
  if (reg->parsed()) {
    const int rc =
        webqoe_cmd_regress(qos_csv.c_str(), usability_csv.c_str(), cfg, out_dir.c_str(), &text);
    return finish(rc, text);
  }
  if (pipe->parsed()) {
    const int rc = webqoe_cmd_pipeline(cfg, seed, out_dir.c_str(), &text);
    return finish(rc, text);
  }
  std::fprintf(stderr, "webqoe: error: no subcommand\n");
  return WEBQOE_E_USAGE;
}
