#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace webqoe {

enum class Direction : std::uint8_t { Up, Down };

// TCP flag bits carried per captured segment.
namespace flag {
inline constexpr std::uint8_t Syn = 0x01;
inline constexpr std::uint8_t Ack = 0x02;
inline constexpr std::uint8_t Fin = 0x04;
inline constexpr std::uint8_t Rst = 0x08;
inline constexpr std::uint8_t Psh = 0x10;
}  // namespace flag

struct PacketRecord {
  std::int64_t ts_us = 0;  // microseconds since trace start
  std::uint64_t conn_id = 0;
  Direction dir = Direction::Up;
  std::uint32_t seq = 0;  // raw 32-bit sequence number, may wrap
  std::uint32_t ack = 0;
  std::uint8_t flags = 0;
  std::uint32_t payload_len = 0;

  bool has(std::uint8_t f) const noexcept { return (flags & f) == f; }
  bool payload_bearing() const noexcept { return payload_len > 0; }
};

struct TraceLabel {
  std::string service_id;
  std::string environment_id;

  friend bool operator==(const TraceLabel&, const TraceLabel&) = default;
};

struct PacketTrace {
  TraceLabel label;
  std::vector<PacketRecord> records;  // sorted by ts_us, ties keep input order
};

enum class Priority : int { High = 0, Mid = 1, Low = 2 };

// Index into per-priority arrays; array order is High, Mid, Low.
inline constexpr std::size_t index_of(Priority p) noexcept {
  return static_cast<std::size_t>(p);
}

struct ConditionOutcome {
  Priority priority = Priority::High;
  bool achieved = false;
};

struct SessionLog {
  std::string subject_id;
  std::string service_id;
  std::string environment_id;
  double wheel_spins = 0.0;
  double mouse_distance = 0.0;
  std::int64_t clicks = 0;
  std::int64_t keystrokes = 0;
  std::vector<ConditionOutcome> conditions;
  int rating = 0;  // ordinal category, 1..7
};

struct RatingRow {
  std::string subject_id;
  std::string service_id;
  std::string environment_id;
  int rating = 0;
};

struct Environment {
  std::string id;
  double added_rtt_ms = 0.0;
  double added_loss_rate = 0.0;  // fraction in [0, 1]
};

struct PriorityWeights {
  double high = 0.6;
  double mid = 0.3;
  double low = 0.1;

  double of(Priority p) const noexcept {
    switch (p) {
      case Priority::High: return high;
      case Priority::Mid: return mid;
      default: return low;
    }
  }
};

struct WorkloadCoefficients {
  double wheel_spin = 100.0;
  double mouse_distance = 10000.0;
  double click = 20.0;
  double keystroke = 20.0;
};

// How the per-session interaction counts combine with the coefficients:
// ProductAsPrinted multiplies count by coefficient; RateNormalized divides.
enum class WorkloadMode { ProductAsPrinted, RateNormalized };

struct StudyConfig {
  std::vector<Environment> environments;
  std::vector<std::string> services;
  std::string reference_service;  // the service whose dummy regressor is 0
  PriorityWeights priority_weights;
  WorkloadCoefficients workload_coefficients;
  WorkloadMode workload_mode = WorkloadMode::ProductAsPrinted;
  double ci_level = 0.95;
};

}  // namespace webqoe
