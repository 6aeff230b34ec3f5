#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webqoe/core/types.hpp"

namespace webqoe::qos {

struct MeanCI {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

// Student-t confidence interval around the sample mean; n < 2 or constant
// samples collapse the interval to the mean.
MeanCI mean_ci(std::span<const double> samples, double level = 0.95);

struct FlowView {
  std::uint64_t conn_id = 0;
  std::vector<PacketRecord> records;       // ts order as in the parent trace
  std::vector<std::size_t> trace_indices;  // parallel: position in trace.records
};

std::vector<FlowView> split_flows(const PacketTrace& trace);

// Connection-establishment RTT: first Down SYN+ACK minus first Up SYN, ms.
std::optional<double> handshake_rtt(const FlowView& flow);

// Ack-based RTT samples for payload segments in both directions, with
// retransmission-ambiguous segments excluded (Karn's rule).
std::vector<double> allseg_rtt_samples(const FlowView& flow);

// Indices (into flow.records) of payload segments whose byte range overlaps
// bytes already seen in the same direction.
std::vector<std::size_t> detect_retransmissions(const FlowView& flow);

struct QosSummary {
  TraceLabel label;
  MeanCI handshake_rtt_ms;
  MeanCI allseg_rtt_ms;
  double mean_segment_len_bytes = 0.0;
  double pkts_per_s = 0.0;
  double bytes_per_s = 0.0;
  double retrans_pkts_per_s = 0.0;
  double retrans_bytes_per_s = 0.0;
  double measured_loss_rate = 0.0;
  double duration_s = 0.0;
  std::size_t total_records = 0;
  std::size_t payload_segments = 0;
  std::size_t retransmitted_segments = 0;
};

QosSummary summarize(const PacketTrace& trace, double ci_level = 0.95);

// Names of the scalar metrics usable as regression candidates, in the
// order columns are emitted.
std::span<const std::string_view> metric_names();
double metric_value(const QosSummary& s, std::string_view name);

nlohmann::ordered_json summary_to_json(const QosSummary& s);
std::string summaries_to_csv(std::span<const QosSummary> rows);
std::vector<QosSummary> summaries_from_csv(const std::string& content);

}  // namespace webqoe::qos
