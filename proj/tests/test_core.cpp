#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "webqoe/core/fsio.hpp"
#include "webqoe/core/session_io.hpp"
#include "webqoe/core/study_config.hpp"
#include "webqoe/core/textio.hpp"
#include "webqoe/core/trace_io.hpp"
#include "webqoe/errors.hpp"

using namespace webqoe;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / ("webqoe_core_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

const char* kTraceHeader = "ts_us,conn_id,dir,seq,ack,flags,payload_len\n";

PacketTrace parse(const std::string& body) {
  std::istringstream in(kTraceHeader + body);
  return parse_trace_csv(in);
}

}  // namespace

TEST_CASE("fmt_double round-trips doubles through text") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 0.693, 1e-300, 1.7976931348623157e308,
                   0.9857142857142858, 170.0}) {
    CHECK(std::stod(fmt_double(v)) == v);
  }
  CHECK(fmt_double(170.0) == "170");
  CHECK(fmt_double(0.5) == "0.5");
}

TEST_CASE("csv line splitting keeps empty fields") {
  auto f = split_csv_line("a,b,,d");
  REQUIRE(f.size() == 4);
  CHECK(f[2] == "");
  CHECK(split_csv_line("").size() == 1);
  CHECK(split_csv_line("x").size() == 1);
}

TEST_CASE("field parsers reject trailing garbage") {
  CHECK(parse_int_field<int>("42", 1, "n") == 42);
  CHECK(parse_double_field("1.5", 1, "v") == 1.5);
  CHECK_THROWS_AS(parse_int_field<int>("42x", 3, "n"), ParseError);
  CHECK_THROWS_AS(parse_int_field<int>("", 3, "n"), ParseError);
  CHECK_THROWS_AS(parse_double_field("1.5.2", 3, "v"), ParseError);
  try {
    parse_int_field<int>("zz", 7, "n");
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.row() == 7);
  }
}

TEST_CASE("atomic write leaves no temp droppings") {
  const fs::path dir = temp_dir();
  const fs::path p = dir / "x.txt";
  write_file_atomic(p, "hello");
  CHECK(read_file(p) == "hello");
  write_file_atomic(p, "replaced");
  CHECK(read_file(p) == "replaced");
  std::size_t entries = 0;
  for (const auto& unused : fs::directory_iterator(dir)) {
    (void)unused;
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("trace labels come from the filename") {
  TraceLabel l = label_from_filename("out/trace_ServiceA_3.csv");
  CHECK(l.service_id == "ServiceA");
  CHECK(l.environment_id == "3");
  // Service names may themselves contain underscores; the split is at the
  // last one.
  TraceLabel u = label_from_filename("trace_my_service_env7.csv");
  CHECK(u.service_id == "my_service");
  CHECK(u.environment_id == "env7");
  CHECK(label_from_filename("other.csv") == TraceLabel{});
  CHECK(label_from_filename("trace_noenv.csv") == TraceLabel{});
}

TEST_CASE("trace parsing validates structure") {
  PacketTrace t = parse(
      "0,1,U,1000,0,S,0\n"
      "20000,1,D,2000,1001,SA,0\n"
      "20100,1,U,1001,2001,A,0\n"
      "20200,1,U,1001,2001,AP,300\n");
  REQUIRE(t.records.size() == 4);
  CHECK(t.records[0].has(flag::Syn));
  CHECK(t.records[1].has(flag::Syn));
  CHECK(t.records[1].has(flag::Ack));
  CHECK(t.records[3].payload_len == 300);
  CHECK(t.records[3].payload_bearing());

  CHECK_THROWS_AS(parse(""), EmptyTrace);
  // Wrong header.
  {
    std::istringstream in("ts,conn,dir\n1,2,U\n");
    CHECK_THROWS_AS(parse_trace_csv(in), ParseError);
  }
  // Wrong field count.
  CHECK_THROWS_AS(parse("0,1,U,1000,0,S\n"), ParseError);
  // Unknown direction.
  CHECK_THROWS_AS(parse("0,1,X,1000,0,S,0\n"), ParseError);
  // Duplicate flag letter.
  CHECK_THROWS_AS(parse("0,1,U,1000,0,SS,0\n"), ParseError);
  // Unknown flag letter.
  CHECK_THROWS_AS(parse("0,1,U,1000,0,Q,0\n"), ParseError);
  // Negative timestamp.
  CHECK_THROWS_AS(parse("-5,1,U,1000,0,S,0\n"), ValidationError);
  // Payload too large for one segment.
  CHECK_THROWS_AS(parse("0,1,U,1000,0,S,70000\n"), ValidationError);
  // First upstream record of a connection must open with SYN.
  CHECK_THROWS_AS(parse("0,1,U,1000,0,A,10\n"), ValidationError);
}

TEST_CASE("trace parsing sorts by timestamp and keeps ties stable") {
  PacketTrace t = parse(
      "50,1,U,1001,2001,A,0\n"
      "0,1,U,1000,0,S,0\n"
      "20,1,D,2000,1001,SA,0\n"
      "50,1,U,1001,2001,AP,300\n");
  CHECK(t.records[0].ts_us == 0);
  CHECK(t.records[1].ts_us == 20);
  // The two ts=50 records keep their input order.
  CHECK(t.records[2].payload_len == 0);
  CHECK(t.records[3].payload_len == 300);
}

TEST_CASE("trace CSV round-trip is exact") {
  PacketTrace t = parse(
      "0,1,U,1000,0,S,0\n"
      "20000,1,D,2000,1001,SA,0\n"
      "20100,1,U,1001,2001,AP,300\n"
      "40000,1,D,2001,1301,AP,1460\n"
      "60000,1,D,2000,1301,FA,0\n"
      "70000,2,U,5000,0,S,0\n");
  const std::string text = trace_to_csv(t);
  std::istringstream in(text);
  PacketTrace back = parse_trace_csv(in);
  REQUIRE(back.records.size() == t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    CHECK(back.records[i].ts_us == t.records[i].ts_us);
    CHECK(back.records[i].conn_id == t.records[i].conn_id);
    CHECK(back.records[i].dir == t.records[i].dir);
    CHECK(back.records[i].seq == t.records[i].seq);
    CHECK(back.records[i].ack == t.records[i].ack);
    CHECK(back.records[i].flags == t.records[i].flags);
    CHECK(back.records[i].payload_len == t.records[i].payload_len);
  }
  CHECK(trace_to_csv(back) == text);
}

TEST_CASE("trace load attaches filename labels and path context") {
  const fs::path dir = temp_dir();
  const fs::path p = dir / "trace_ServiceB_4.csv";
  {
    std::ofstream out(p);
    out << kTraceHeader << "0,1,U,1000,0,S,0\n";
  }
  PacketTrace t = load_trace(p);
  CHECK(t.label.service_id == "ServiceB");
  CHECK(t.label.environment_id == "4");

  const fs::path bad = dir / "trace_ServiceB_5.csv";
  {
    std::ofstream out(bad);
    out << kTraceHeader << "0,1,U,not_a_number,0,S,0\n";
  }
  try {
    load_trace(bad);
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("trace_ServiceB_5.csv") != std::string::npos);
  }
  fs::remove_all(dir);
}

namespace {

SessionLog sample_session() {
  SessionLog s;
  s.subject_id = "s001";
  s.service_id = "ServiceA";
  s.environment_id = "1";
  s.wheel_spins = 12.5;
  s.mouse_distance = 0.8;
  s.clicks = 40;
  s.keystrokes = 66;
  s.conditions = {{Priority::High, true},  {Priority::High, false}, {Priority::Mid, true},
                  {Priority::Mid, true},   {Priority::Low, false},  {Priority::Low, true}};
  s.rating = 5;
  return s;
}

}  // namespace

TEST_CASE("session JSONL round-trip") {
  std::vector<SessionLog> sessions = {sample_session()};
  sessions[0].subject_id = "s001";
  SessionLog second = sample_session();
  second.subject_id = "s002";
  second.rating = 1;
  sessions.push_back(second);

  const std::string text = sessions_to_jsonl(sessions);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  std::vector<SessionLog> back = parse_sessions_jsonl(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].subject_id == "s001");
  CHECK(back[0].wheel_spins == 12.5);
  CHECK(back[0].conditions.size() == 6);
  CHECK(back[0].conditions[1].priority == Priority::High);
  CHECK(back[0].conditions[1].achieved == false);
  CHECK(back[1].rating == 1);
  CHECK(sessions_to_jsonl(back) == text);
}

TEST_CASE("session parsing rejects malformed rows") {
  const std::string good = sessions_to_jsonl(std::vector<SessionLog>{sample_session()});
  CHECK_THROWS_AS(parse_sessions_jsonl("{not json}\n"), ParseError);
  // Rating outside 1..7.
  std::string bad = good;
  bad.replace(bad.find("\"rating\":5"), 10, "\"rating\":8");
  CHECK_THROWS_AS(parse_sessions_jsonl(bad), ValidationError);
  // Negative count.
  bad = good;
  bad.replace(bad.find("\"clicks\":40"), 11, "\"clicks\":-1");
  CHECK_THROWS_AS(parse_sessions_jsonl(bad), ValidationError);
  // Unknown priority letter.
  bad = good;
  bad.replace(bad.find("\"priority\":\"H\""), 14, "\"priority\":\"Z\"");
  CHECK_THROWS_AS(parse_sessions_jsonl(bad), ParseError);
  // Empty condition list.
  bad = good;
  const auto open = bad.find("\"conditions\":[");
  const auto close = bad.find(']', open);
  bad.replace(open, close - open + 1, "\"conditions\":[]");
  CHECK_THROWS_AS(parse_sessions_jsonl(bad), ValidationError);
}

TEST_CASE("ratings CSV round-trip and validation") {
  std::vector<RatingRow> rows = {{"s001", "ServiceA", "1", 7}, {"s002", "ServiceB", "5", 1}};
  const std::string text = ratings_to_csv(rows);
  CHECK(text.rfind("subject_id,service_id,environment_id,rating\n", 0) == 0);
  std::vector<RatingRow> back = parse_ratings_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].rating == 7);
  CHECK(back[1].service_id == "ServiceB");
  CHECK(ratings_to_csv(back) == text);

  CHECK_THROWS_AS(parse_ratings_csv("nope\n"), ParseError);
  CHECK_THROWS_AS(
      parse_ratings_csv("subject_id,service_id,environment_id,rating\ns001,A,1,0\n"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_ratings_csv("subject_id,service_id,environment_id,rating\ns001,A,1,8\n"),
      ValidationError);
}

TEST_CASE("default study layout") {
  StudyConfig c = default_study_config();
  REQUIRE(c.environments.size() == 5);
  CHECK(c.environments[0].added_rtt_ms == 0.0);
  CHECK(c.environments[1].added_rtt_ms == 150.0);
  CHECK(c.environments[2].added_loss_rate == 0.05);
  CHECK(c.environments[3].added_rtt_ms == 150.0);
  CHECK(c.environments[3].added_loss_rate == 0.05);
  CHECK(c.environments[4].added_rtt_ms == 200.0);
  CHECK(c.environments[4].added_loss_rate == 0.10);
  REQUIRE(c.services.size() == 2);
  CHECK(c.reference_service == "ServiceA");
  CHECK(c.priority_weights.high == 0.6);
  CHECK(c.priority_weights.mid == 0.3);
  CHECK(c.priority_weights.low == 0.1);
  CHECK(c.workload_coefficients.wheel_spin == 100.0);
  CHECK(c.workload_coefficients.mouse_distance == 10000.0);
  CHECK(c.workload_coefficients.click == 20.0);
  CHECK(c.workload_coefficients.keystroke == 20.0);
  CHECK(validate_config(c).empty());
}

TEST_CASE("config JSON round-trip and partial overrides") {
  StudyConfig c = default_study_config();
  nlohmann::json j = study_config_to_json(c);
  StudyConfig back = study_config_from_json(j);
  CHECK(back.environments.size() == c.environments.size());
  CHECK(back.reference_service == c.reference_service);
  CHECK(back.workload_mode == c.workload_mode);

  nlohmann::json partial = {{"services", {"OnlyOne"}}, {"reference_service", "OnlyOne"}};
  StudyConfig merged = study_config_from_json(partial);
  CHECK(merged.services == std::vector<std::string>{"OnlyOne"});
  CHECK(merged.environments.size() == 5);  // untouched defaults
}

TEST_CASE("config validation diagnostics") {
  StudyConfig c = default_study_config();
  c.reference_service = "Ghost";
  c.environments.push_back(c.environments[0]);  // duplicate id
  c.environments[1].added_loss_rate = 1.5;
  c.priority_weights.low = 0.2;  // sum != 1
  const auto diags = validate_config(c);
  CHECK(diags.size() >= 4);
}

TEST_CASE("study validation flags missing cells and unknown labels") {
  StudyConfig c = default_study_config();
  std::vector<SessionLog> sessions;
  for (const std::string& svc : c.services) {
    for (const Environment& env : c.environments) {
      SessionLog s = sample_session();
      s.service_id = svc;
      s.environment_id = env.id;
      sessions.push_back(s);
    }
  }
  CHECK(validate_study(c, sessions).empty());

  // Remove one cell: the diagnostic names it.
  std::vector<SessionLog> missing(sessions.begin(), sessions.end() - 1);
  const auto diags = validate_study(c, missing);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("ServiceB") != std::string::npos);
  CHECK(diags[0].find("5") != std::string::npos);

  // Unknown environment label.
  std::vector<SessionLog> unknown = sessions;
  unknown[0].environment_id = "99";
  CHECK(!validate_study(c, unknown).empty());
}

TEST_CASE("config hash is stable and order-sensitive input-insensitive") {
  StudyConfig c = default_study_config();
  const std::string h1 = config_hash_hex(study_config_to_json(c));
  const std::string h2 = config_hash_hex(study_config_to_json(c));
  CHECK(h1 == h2);
  CHECK(h1.size() == 16);
  c.ci_level = 0.99;
  CHECK(config_hash_hex(study_config_to_json(c)) != h1);
}
