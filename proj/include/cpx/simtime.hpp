#pragma once

#include <cstdint>
#include <string>

namespace cpx {

/// Simulated wall clock. Scenario runs never read the real clock; every
/// timestamp in credentials, consent logs and audit events comes from here.
class SimClock {
 public:
  /// Default epoch: 2020-03-01T00:00:00Z.
  SimClock() : now_(kDefaultEpoch) {}
  explicit SimClock(std::int64_t epoch_seconds) : now_(epoch_seconds) {}

  std::int64_t now() const { return now_; }
  std::string now_iso() const;

  void advance_seconds(std::int64_t s) { now_ += s; }
  void advance_minutes(double m) { now_ += static_cast<std::int64_t>(m * 60.0); }

  /// Move to the given day offset from the epoch; never moves backwards.
  void advance_to_day(std::int64_t day);

  std::int64_t epoch() const { return epoch_; }
  std::int64_t day() const { return (now_ - epoch_) / 86400; }

  static constexpr std::int64_t kDefaultEpoch = 1583020800;  // 2020-03-01T00:00:00Z

 private:
  std::int64_t epoch_ = kDefaultEpoch;
  std::int64_t now_;
};

/// Render unix seconds as ISO-8601 UTC ("YYYY-MM-DDTHH:MM:SSZ").
std::string iso8601(std::int64_t unix_seconds);

/// Parse the fixed-format ISO-8601 UTC string produced by iso8601().
std::int64_t parse_iso8601(const std::string& s);

}  // namespace cpx
