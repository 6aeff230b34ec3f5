#include "webqoe/core/trace_io.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <string_view>

#include "webqoe/core/fsio.hpp"
#include "webqoe/core/textio.hpp"
#include "webqoe/errors.hpp"

namespace webqoe {

namespace {

constexpr std::string_view kHeader = "ts_us,conn_id,dir,seq,ack,flags,payload_len";

// Canonical flag order for serialization; parse accepts any order.
constexpr std::string_view kFlagLetters = "SAFRP";

std::uint8_t flag_bit(char c) {
  switch (c) {
    case 'S': return flag::Syn;
    case 'A': return flag::Ack;
    case 'F': return flag::Fin;
    case 'R': return flag::Rst;
    case 'P': return flag::Psh;
    default: return 0;
  }
}

std::uint8_t parse_flags(std::string_view s, long row) {
  std::uint8_t flags = 0;
  for (char c : s) {
    std::uint8_t bit = flag_bit(c);
    if (bit == 0) {
      throw ParseError(row, std::string("flags: unknown letter '") + c + "'");
    }
    if (flags & bit) {
      throw ParseError(row, std::string("flags: duplicate letter '") + c + "'");
    }
    flags |= bit;
  }
  return flags;
}

std::string flags_to_string(std::uint8_t flags) {
  std::string out;
  for (char c : kFlagLetters) {
    if (flags & flag_bit(c)) out.push_back(c);
  }
  return out;
}

}  // namespace

TraceLabel label_from_filename(const std::filesystem::path& path) {
  std::string stem = path.stem().string();
  constexpr std::string_view prefix = "trace_";
  if (stem.rfind(prefix, 0) != 0) return {};
  std::string rest = stem.substr(prefix.size());
  std::size_t pos = rest.rfind('_');
  if (pos == std::string::npos || pos == 0 || pos + 1 == rest.size()) return {};
  return TraceLabel{rest.substr(0, pos), rest.substr(pos + 1)};
}

PacketTrace parse_trace_csv(std::istream& in) {
  PacketTrace trace;
  std::string line;
  long row = 0;

  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++row;
  if (strip_cr(line) != kHeader) {
    throw ParseError(1, "expected header \"" + std::string(kHeader) + "\"");
  }

  while (std::getline(in, line)) {
    ++row;
    std::string_view body = strip_cr(line);
    if (body.empty()) continue;
    auto fields = split_csv_line(body);
    if (fields.size() != 7) {
      throw ParseError(row, "expected 7 fields, got " + std::to_string(fields.size()));
    }

    PacketRecord rec;
    rec.ts_us = parse_int_field<std::int64_t>(fields[0], row, "ts_us");
    if (rec.ts_us < 0) throw ValidationError("row " + std::to_string(row) + ": ts_us must be >= 0");
    rec.conn_id = parse_int_field<std::uint64_t>(fields[1], row, "conn_id");
    if (fields[2] == "U") {
      rec.dir = Direction::Up;
    } else if (fields[2] == "D") {
      rec.dir = Direction::Down;
    } else {
      throw ParseError(row, "dir: expected U or D, got \"" + std::string(fields[2]) + "\"");
    }
    rec.seq = parse_int_field<std::uint32_t>(fields[3], row, "seq");
    rec.ack = parse_int_field<std::uint32_t>(fields[4], row, "ack");
    rec.flags = parse_flags(fields[5], row);
    rec.payload_len = parse_int_field<std::uint32_t>(fields[6], row, "payload_len");
    if (rec.payload_len > 65535) {
      throw ValidationError("row " + std::to_string(row) + ": payload_len exceeds 65535");
    }
    trace.records.push_back(rec);
  }

  if (trace.records.empty()) throw EmptyTrace("trace has no records");

  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.ts_us < b.ts_us; });

  // Every connection must open with a client SYN; anything else means the
  // capture is truncated or mislabeled.
  std::map<std::uint64_t, bool> seen_first_up;
  for (const PacketRecord& rec : trace.records) {
    if (rec.dir != Direction::Up) continue;
    auto [it, inserted] = seen_first_up.emplace(rec.conn_id, true);
    if (inserted && !rec.has(flag::Syn)) {
      throw ValidationError("conn " + std::to_string(rec.conn_id) +
                            ": first Up record does not carry S");
    }
  }

  return trace;
}

PacketTrace load_trace(const std::filesystem::path& path) {
  std::string content = read_file(path);
  std::istringstream in(content);
  PacketTrace trace;
  try {
    trace = parse_trace_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(e.row(), path.string() + ": " + e.what());
  } catch (const EmptyTrace&) {
    throw EmptyTrace(path.string() + ": trace has no records");
  }
  trace.label = label_from_filename(path);
  return trace;
}

std::string trace_to_csv(const PacketTrace& trace) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const PacketRecord& rec : trace.records) {
    out += std::to_string(rec.ts_us);
    out.push_back(',');
    out += std::to_string(rec.conn_id);
    out.push_back(',');
    out.push_back(rec.dir == Direction::Up ? 'U' : 'D');
    out.push_back(',');
    out += std::to_string(rec.seq);
    out.push_back(',');
    out += std::to_string(rec.ack);
    out.push_back(',');
    out += flags_to_string(rec.flags);
    out.push_back(',');
    out += std::to_string(rec.payload_len);
    out.push_back('\n');
  }
  return out;
}

void save_trace(const PacketTrace& trace, const std::filesystem::path& path) {
  write_file_atomic(path, trace_to_csv(trace));
}

}  // namespace webqoe
