#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "superrag/error.hpp"

namespace superrag {

/// Cumulative hit/total tallies. Safe to record from several threads.
///
/// `total` is bumped before `hits` and readers load `hits` before `total`,
/// so any snapshot satisfies hits <= total even while writers are in flight.
class RequestCounters {
public:
  RequestCounters() = default;
  RequestCounters(std::uint64_t hits, std::uint64_t total) : hits_(hits), total_(total) {
    if (hits > total) throw domain_error("hits > total");
  }
  RequestCounters(const RequestCounters& other) {
    hits_.store(other.hits());
    total_.store(other.total_.load());
  }
  RequestCounters& operator=(const RequestCounters& other) {
    const auto h = other.hits();
    const auto t = other.total_.load();
    total_.store(t);
    hits_.store(h);
    return *this;
  }

  void record(bool hit) noexcept {
    total_.fetch_add(1);
    if (hit) hits_.fetch_add(1);
  }

  std::uint64_t hits() const noexcept { return hits_.load(); }
  std::uint64_t total() const noexcept { return total_.load(); }

private:
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> total_{0};
};

/// Last `capacity` request outcomes, oldest evicted first. Single writer.
class SlidingWindow {
public:
  explicit SlidingWindow(std::size_t capacity = 500) : capacity_(capacity) {}

  void push(bool hit) {
    if (capacity_ == 0) return;
    if (outcomes_.size() == capacity_) {
      if (outcomes_.front()) --hits_;
      outcomes_.pop_front();
    }
    outcomes_.push_back(hit);
    if (hit) ++hits_;
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return outcomes_.size(); }
  bool empty() const noexcept { return outcomes_.empty(); }
  std::size_t hits() const noexcept { return hits_; }
  const std::deque<bool>& outcomes() const noexcept { return outcomes_; }

  double ratio() const {
    if (outcomes_.empty()) throw no_requests();
    return static_cast<double>(hits_) / static_cast<double>(outcomes_.size());
  }

private:
  std::size_t capacity_;
  std::size_t hits_ = 0;
  std::deque<bool> outcomes_;
};

inline void record(RequestCounters& counters, SlidingWindow& window, bool hit) {
  counters.record(hit);
  window.push(hit);
}

/// hits / total. Throws no_requests when nothing has been recorded.
inline double hit_ratio(const RequestCounters& counters) {
  const auto hits = counters.hits();
  const auto total = counters.total();
  if (total == 0) throw no_requests();
  return static_cast<double>(hits) / static_cast<double>(total);
}

/// One served query. `relevant_rank` is the 1-based position of the relevant
/// document in the result list, 0 when it is absent or unknown.
struct QueryRecord {
  bool hit = false;
  double latency_ms = 0.0;
  std::size_t relevant_rank = 0;
};

struct MetricsReport {
  double hit_ratio = 0.0;
  double mean_query_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double throughput_qps = 0.0;
  double precision_at_1 = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based).
inline double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw empty_log();
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

/// Throughput assumes queries are served back to back (serial model).
inline MetricsReport summarize(std::span<const QueryRecord> log) {
  if (log.empty()) throw empty_log();
  std::size_t hits = 0;
  std::size_t top1 = 0;
  double total_ms = 0.0;
  std::vector<double> latencies;
  latencies.reserve(log.size());
  for (const auto& r : log) {
    hits += r.hit ? 1 : 0;
    top1 += r.relevant_rank == 1 ? 1 : 0;
    total_ms += r.latency_ms;
    latencies.push_back(r.latency_ms);
  }
  const auto n = static_cast<double>(log.size());
  MetricsReport rep;
  rep.hit_ratio = static_cast<double>(hits) / n;
  rep.mean_query_ms = total_ms / n;
  rep.p50_ms = nearest_rank_percentile(latencies, 50.0);
  rep.p95_ms = nearest_rank_percentile(std::move(latencies), 95.0);
  rep.throughput_qps = total_ms > 0.0 ? n / (total_ms / 1000.0) : 0.0;
  rep.precision_at_1 = static_cast<double>(top1) / n;
  return rep;
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  return nlohmann::ordered_json{{"hit_ratio", r.hit_ratio},         {"mean_query_ms", r.mean_query_ms},
                                {"p50_ms", r.p50_ms},               {"p95_ms", r.p95_ms},
                                {"throughput_qps", r.throughput_qps}, {"precision_at_1", r.precision_at_1}};
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.hit_ratio = j.at("hit_ratio").get<double>();
  r.mean_query_ms = j.at("mean_query_ms").get<double>();
  r.p50_ms = j.at("p50_ms").get<double>();
  r.p95_ms = j.at("p95_ms").get<double>();
  r.throughput_qps = j.at("throughput_qps").get<double>();
  r.precision_at_1 = j.at("precision_at_1").get<double>();
  return r;
}

inline constexpr const char* kReportCsvHeader =
    "hit_ratio,mean_query_ms,p50_ms,p95_ms,throughput_qps,precision_at_1";

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  return nlohmann::json(v).dump();
}

inline std::string to_csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os << format_double(r.hit_ratio) << ',' << format_double(r.mean_query_ms) << ','
     << format_double(r.p50_ms) << ',' << format_double(r.p95_ms) << ','
     << format_double(r.throughput_qps) << ',' << format_double(r.precision_at_1);
  return os.str();
}

}  // namespace superrag
