#include "webqoe/qos/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "webqoe/core/textio.hpp"
#include "webqoe/errors.hpp"
#include "webqoe/stats/distributions.hpp"

namespace webqoe::qos {

namespace {

// Tracks 32-bit sequence numbers as positions on an unwrapped 64-bit line.
// Steps are interpreted as signed 32-bit differences, i.e. each new value is
// placed within the +/- 2^31 window around the previous one. The 2^32 base
// keeps early negative steps positive.
class SeqUnwrapper {
 public:
  std::uint64_t unwrap(std::uint32_t raw) {
    if (!init_) {
      init_ = true;
      last_raw_ = raw;
      pos_ = (1ull << 32) + raw;
      return pos_;
    }
    const std::int32_t diff = static_cast<std::int32_t>(raw - last_raw_);
    pos_ += static_cast<std::int64_t>(diff);
    last_raw_ = raw;
    return pos_;
  }

 private:
  bool init_ = false;
  std::uint32_t last_raw_ = 0;
  std::uint64_t pos_ = 0;
};

// Disjoint half-open intervals over the unwrapped sequence line.
class IntervalSet {
 public:
  bool overlaps(std::uint64_t lo, std::uint64_t hi) const {
    auto it = set_.lower_bound(lo);
    if (it != set_.begin() && std::prev(it)->second > lo) return true;
    return it != set_.end() && it->first < hi;
  }

  void insert(std::uint64_t lo, std::uint64_t hi) {
    auto it = set_.lower_bound(lo);
    if (it != set_.begin()) {
      auto prev = std::prev(it);
      if (prev->second >= lo) {
        lo = prev->first;
        hi = std::max(hi, prev->second);
        set_.erase(prev);
        it = set_.lower_bound(lo);
      }
    }
    while (it != set_.end() && it->first <= hi) {
      hi = std::max(hi, it->second);
      it = set_.erase(it);
    }
    set_.emplace(lo, hi);
  }

 private:
  std::map<std::uint64_t, std::uint64_t> set_;
};

struct PayloadSeg {
  std::size_t idx = 0;  // position in flow.records
  std::int64_t ts_us = 0;
  std::uint64_t lo = 0;  // unwrapped [lo, hi)
  std::uint64_t hi = 0;
  std::uint32_t end_raw = 0;  // raw seq + payload_len, mod 2^32
};

std::size_t dir_index(Direction d) { return d == Direction::Up ? 0 : 1; }

// Payload segments per direction with unwrapped byte ranges, ts order.
std::array<std::vector<PayloadSeg>, 2> payload_segments(const FlowView& flow) {
  std::array<std::vector<PayloadSeg>, 2> out;
  std::array<SeqUnwrapper, 2> unwrap;
  for (std::size_t i = 0; i < flow.records.size(); ++i) {
    const PacketRecord& rec = flow.records[i];
    if (!rec.payload_bearing()) continue;
    const std::size_t d = dir_index(rec.dir);
    PayloadSeg seg;
    seg.idx = i;
    seg.ts_us = rec.ts_us;
    seg.lo = unwrap[d].unwrap(rec.seq);
    seg.hi = seg.lo + rec.payload_len;
    seg.end_raw = rec.seq + rec.payload_len;
    out[d].push_back(seg);
  }
  return out;
}

// True when `ack` acknowledges byte position `end_raw`, comparing within the
// signed 2^31 window of the 32-bit space.
bool ack_covers(std::uint32_t ack, std::uint32_t end_raw) {
  return static_cast<std::int32_t>(ack - end_raw) >= 0;
}

}  // namespace

MeanCI mean_ci(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("mean_ci: level " + fmt_double(level) + " outside (0,1)");
  }
  MeanCI out;
  out.n = samples.size();
  if (samples.empty()) return out;

  double sum = 0.0;
  for (double v : samples) sum += v;
  out.mean = sum / static_cast<double>(samples.size());
  out.ci_low = out.mean;
  out.ci_high = out.mean;
  if (samples.size() < 2) return out;

  double ss = 0.0;
  for (double v : samples) {
    const double d = v - out.mean;
    ss += d * d;
  }
  const auto n = static_cast<double>(samples.size());
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return out;

  const double q = stats::t_quantile(1.0 - (1.0 - level) / 2.0, static_cast<int>(samples.size()) - 1);
  const double half = q * sd / std::sqrt(n);
  out.ci_low = out.mean - half;
  out.ci_high = out.mean + half;
  return out;
}

std::vector<FlowView> split_flows(const PacketTrace& trace) {
  std::map<std::uint64_t, std::size_t> slot;
  std::vector<FlowView> flows;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const PacketRecord& rec = trace.records[i];
    auto [it, inserted] = slot.emplace(rec.conn_id, flows.size());
    if (inserted) {
      flows.emplace_back();
      flows.back().conn_id = rec.conn_id;
    }
    FlowView& f = flows[it->second];
    f.records.push_back(rec);
    f.trace_indices.push_back(i);
  }
  std::sort(flows.begin(), flows.end(),
            [](const FlowView& a, const FlowView& b) { return a.conn_id < b.conn_id; });
  return flows;
}

std::optional<double> handshake_rtt(const FlowView& flow) {
  std::optional<std::int64_t> syn_ts, synack_ts;
  for (const PacketRecord& rec : flow.records) {
    if (!syn_ts && rec.dir == Direction::Up && rec.has(flag::Syn)) {
      syn_ts = rec.ts_us;
    }
    if (!synack_ts && rec.dir == Direction::Down && rec.has(flag::Syn | flag::Ack)) {
      synack_ts = rec.ts_us;
    }
    if (syn_ts && synack_ts) break;
  }
  if (!syn_ts || !synack_ts) return std::nullopt;
  return static_cast<double>(*synack_ts - *syn_ts) / 1000.0;
}

std::vector<double> allseg_rtt_samples(const FlowView& flow) {
  const auto segs = payload_segments(flow);

  // Ack events per direction, ts order.
  std::array<std::vector<std::pair<std::int64_t, std::uint32_t>>, 2> acks;
  for (const PacketRecord& rec : flow.records) {
    if (rec.has(flag::Ack)) {
      acks[dir_index(rec.dir)].emplace_back(rec.ts_us, rec.ack);
    }
  }

  std::vector<std::pair<std::size_t, double>> found;  // (record idx, ms)
  for (std::size_t d = 0; d < 2; ++d) {
    const auto& own = segs[d];
    const auto& opp = acks[1 - d];
    for (const PayloadSeg& seg : own) {
      // First strictly later opposite-direction ack covering the segment end.
      std::optional<std::int64_t> ack_ts;
      for (const auto& [ts, ack] : opp) {
        if (ts <= seg.ts_us) continue;
        if (ack_covers(ack, seg.end_raw)) {
          ack_ts = ts;
          break;
        }
      }
      if (!ack_ts) continue;

      // Karn's rule: drop the sample when any same-direction copy of these
      // bytes exists on or before the matching ack; the ack is then
      // ambiguous between the copies.
      bool ambiguous = false;
      for (const PayloadSeg& other : own) {
        if (other.ts_us > *ack_ts) break;
        if (other.idx == seg.idx) continue;
        if (other.lo < seg.hi && other.hi > seg.lo) {
          ambiguous = true;
          break;
        }
      }
      if (ambiguous) continue;
      found.emplace_back(seg.idx, static_cast<double>(*ack_ts - seg.ts_us) / 1000.0);
    }
  }

  std::sort(found.begin(), found.end());
  std::vector<double> samples;
  samples.reserve(found.size());
  for (const auto& [idx, ms] : found) samples.push_back(ms);
  return samples;
}

std::vector<std::size_t> detect_retransmissions(const FlowView& flow) {
  const auto segs = payload_segments(flow);
  std::vector<std::size_t> flagged;
  for (const auto& dir_segs : segs) {
    IntervalSet seen;
    for (const PayloadSeg& seg : dir_segs) {
      if (seen.overlaps(seg.lo, seg.hi)) flagged.push_back(seg.idx);
      seen.insert(seg.lo, seg.hi);
    }
  }
  std::sort(flagged.begin(), flagged.end());
  return flagged;
}

QosSummary summarize(const PacketTrace& trace, double ci_level) {
  if (trace.records.empty()) throw EmptyTrace("summarize: trace has no records");

  QosSummary out;
  out.label = trace.label;
  out.total_records = trace.records.size();

  std::int64_t ts_min = trace.records.front().ts_us;
  std::int64_t ts_max = trace.records.back().ts_us;
  if (ts_max <= ts_min) throw ZeroDuration("summarize: trace duration is zero");
  out.duration_s = static_cast<double>(ts_max - ts_min) / 1e6;

  const std::vector<FlowView> flows = split_flows(trace);

  std::vector<double> handshake_samples;
  std::vector<double> rtt_samples;
  std::uint64_t payload_bytes = 0;
  std::uint64_t retrans_bytes = 0;
  for (const FlowView& flow : flows) {
    if (auto rtt = handshake_rtt(flow)) handshake_samples.push_back(*rtt);
    const auto samples = allseg_rtt_samples(flow);
    rtt_samples.insert(rtt_samples.end(), samples.begin(), samples.end());
    for (const PacketRecord& rec : flow.records) {
      if (rec.payload_bearing()) {
        ++out.payload_segments;
        payload_bytes += rec.payload_len;
      }
    }
    for (std::size_t idx : detect_retransmissions(flow)) {
      ++out.retransmitted_segments;
      retrans_bytes += flow.records[idx].payload_len;
    }
  }

  out.handshake_rtt_ms = mean_ci(handshake_samples, ci_level);
  out.allseg_rtt_ms = mean_ci(rtt_samples, ci_level);
  if (out.payload_segments > 0) {
    out.mean_segment_len_bytes =
        static_cast<double>(payload_bytes) / static_cast<double>(out.payload_segments);
    out.measured_loss_rate = static_cast<double>(out.retransmitted_segments) /
                             static_cast<double>(out.payload_segments);
  }
  out.pkts_per_s = static_cast<double>(out.total_records) / out.duration_s;
  out.bytes_per_s = static_cast<double>(payload_bytes) / out.duration_s;
  out.retrans_pkts_per_s = static_cast<double>(out.retransmitted_segments) / out.duration_s;
  out.retrans_bytes_per_s = static_cast<double>(retrans_bytes) / out.duration_s;
  return out;
}

namespace {

constexpr std::array<std::string_view, 8> kMetricNames = {
    "handshake_rtt_ms", "allseg_rtt_ms",      "mean_segment_len_bytes",
    "pkts_per_s",       "bytes_per_s",        "retrans_pkts_per_s",
    "retrans_bytes_per_s", "measured_loss_rate",
};

constexpr std::string_view kCsvHeader =
    "service,environment,"
    "handshake_rtt_ms,handshake_rtt_ci_low,handshake_rtt_ci_high,"
    "allseg_rtt_ms,allseg_rtt_ci_low,allseg_rtt_ci_high,"
    "mean_segment_len_bytes,pkts_per_s,bytes_per_s,"
    "retrans_pkts_per_s,retrans_bytes_per_s,measured_loss_rate";

}  // namespace

std::span<const std::string_view> metric_names() {
  return {kMetricNames.data(), kMetricNames.size()};
}

double metric_value(const QosSummary& s, std::string_view name) {
  if (name == "handshake_rtt_ms") return s.handshake_rtt_ms.mean;
  if (name == "allseg_rtt_ms") return s.allseg_rtt_ms.mean;
  if (name == "mean_segment_len_bytes") return s.mean_segment_len_bytes;
  if (name == "pkts_per_s") return s.pkts_per_s;
  if (name == "bytes_per_s") return s.bytes_per_s;
  if (name == "retrans_pkts_per_s") return s.retrans_pkts_per_s;
  if (name == "retrans_bytes_per_s") return s.retrans_bytes_per_s;
  if (name == "measured_loss_rate") return s.measured_loss_rate;
  throw MissingRegressor("unknown metric \"" + std::string(name) + "\"");
}

nlohmann::ordered_json summary_to_json(const QosSummary& s) {
  nlohmann::ordered_json j;
  j["service_id"] = s.label.service_id;
  j["environment_id"] = s.label.environment_id;
  auto ci = [](const MeanCI& m) {
    nlohmann::ordered_json v;
    v["mean"] = m.mean;
    v["ci_low"] = m.ci_low;
    v["ci_high"] = m.ci_high;
    v["n"] = m.n;
    return v;
  };
  j["handshake_rtt_ms"] = ci(s.handshake_rtt_ms);
  j["allseg_rtt_ms"] = ci(s.allseg_rtt_ms);
  j["mean_segment_len_bytes"] = s.mean_segment_len_bytes;
  j["pkts_per_s"] = s.pkts_per_s;
  j["bytes_per_s"] = s.bytes_per_s;
  j["retrans_pkts_per_s"] = s.retrans_pkts_per_s;
  j["retrans_bytes_per_s"] = s.retrans_bytes_per_s;
  j["measured_loss_rate"] = s.measured_loss_rate;
  j["duration_s"] = s.duration_s;
  j["total_records"] = s.total_records;
  j["payload_segments"] = s.payload_segments;
  j["retransmitted_segments"] = s.retransmitted_segments;
  return j;
}

std::string summaries_to_csv(std::span<const QosSummary> rows) {
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const QosSummary& s : rows) {
    out += s.label.service_id;
    out.push_back(',');
    out += s.label.environment_id;
    for (double v : {s.handshake_rtt_ms.mean, s.handshake_rtt_ms.ci_low, s.handshake_rtt_ms.ci_high,
                     s.allseg_rtt_ms.mean, s.allseg_rtt_ms.ci_low, s.allseg_rtt_ms.ci_high,
                     s.mean_segment_len_bytes, s.pkts_per_s, s.bytes_per_s, s.retrans_pkts_per_s,
                     s.retrans_bytes_per_s, s.measured_loss_rate}) {
      out.push_back(',');
      out += fmt_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<QosSummary> summaries_from_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  long row = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++row;
  if (strip_cr(line) != kCsvHeader) {
    throw ParseError(1, "unexpected header for QoS summary CSV");
  }
  std::vector<QosSummary> rows;
  while (std::getline(in, line)) {
    ++row;
    std::string_view body = strip_cr(line);
    if (body.empty()) continue;
    auto fields = split_csv_line(body);
    if (fields.size() != 14) {
      throw ParseError(row, "expected 14 fields, got " + std::to_string(fields.size()));
    }
    QosSummary s;
    s.label.service_id = std::string(fields[0]);
    s.label.environment_id = std::string(fields[1]);
    s.handshake_rtt_ms.mean = parse_double_field(fields[2], row, "handshake_rtt_ms");
    s.handshake_rtt_ms.ci_low = parse_double_field(fields[3], row, "handshake_rtt_ci_low");
    s.handshake_rtt_ms.ci_high = parse_double_field(fields[4], row, "handshake_rtt_ci_high");
    s.allseg_rtt_ms.mean = parse_double_field(fields[5], row, "allseg_rtt_ms");
    s.allseg_rtt_ms.ci_low = parse_double_field(fields[6], row, "allseg_rtt_ci_low");
    s.allseg_rtt_ms.ci_high = parse_double_field(fields[7], row, "allseg_rtt_ci_high");
    s.mean_segment_len_bytes = parse_double_field(fields[8], row, "mean_segment_len_bytes");
    s.pkts_per_s = parse_double_field(fields[9], row, "pkts_per_s");
    s.bytes_per_s = parse_double_field(fields[10], row, "bytes_per_s");
    s.retrans_pkts_per_s = parse_double_field(fields[11], row, "retrans_pkts_per_s");
    s.retrans_bytes_per_s = parse_double_field(fields[12], row, "retrans_bytes_per_s");
    s.measured_loss_rate = parse_double_field(fields[13], row, "measured_loss_rate");
    rows.push_back(std::move(s));
  }
  return rows;
}

}  // namespace webqoe::qos
