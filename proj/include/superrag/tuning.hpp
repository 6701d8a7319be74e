#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "superrag/error.hpp"
#include "superrag/lru_cache.hpp"
#include "superrag/metrics.hpp"

namespace superrag {

/// Sigmoid constants: steepness `k` per size unit, offset `d0` in size units.
struct LatencyModelParams {
  double k = 0.05;
  double d0 = 100.0;

  bool operator==(const LatencyModelParams&) const = default;
};

/// Hit-ratio controller constants.
struct TuningParams {
  double alpha = 0.5;            // learning rate
  double target = 0.85;          // target hit ratio T
  std::size_t s_min = 16;
  std::size_t s_max = 65536;
  std::size_t epoch_len = 500;   // requests per tuning step
  std::size_t window = 500;      // sliding window W read by the controller
  std::size_t initial_capacity = 64;

  bool operator==(const TuningParams&) const = default;
};

struct TuningDecision {
  std::size_t epoch = 0;
  double observed_hit_ratio = 0.0;
  double raw_s_new = 0.0;
  std::size_t applied_capacity = 0;
  std::size_t evicted = 0;
  // Latency prong, logged only; it does not feed the sizing decision.
  double mean_size_units = 0.0;
  double latency_reduction = 0.0;

  bool operator==(const TuningDecision&) const = default;
};

/// L(d) = 1 / (1 + e^(-k (d - d0))).
inline double latency_reduction(double d, const LatencyModelParams& p) {
  return 1.0 / (1.0 + std::exp(-p.k * (d - p.d0)));
}

/// S_new = S_current * (1 + alpha * (hit_ratio - T)), unclamped and unrounded.
inline double adjust_cache_size(double s_current, double hit_ratio, const TuningParams& p) {
  return s_current * (1.0 + p.alpha * (hit_ratio - p.target));
}

/// Round half up, then clamp into [s_min, s_max].
inline std::size_t apply_capacity_bounds(double raw, const TuningParams& p) {
  const double lo = static_cast<double>(p.s_min);
  const double hi = static_cast<double>(p.s_max);
  if (!(raw == raw)) return p.s_min;  // NaN
  const double rounded = std::floor(raw + 0.5);
  return static_cast<std::size_t>(std::clamp(rounded, lo, hi));
}

template <typename Key, typename Value, typename Hash>
TuningDecision tuning_step(LruCache<Key, Value, Hash>& cache, const SlidingWindow& window,
                           const RequestCounters& counters, const TuningParams& tparams,
                           const LatencyModelParams& lparams, std::size_t epoch = 0) {
  TuningDecision d;
  d.epoch = epoch;
  d.mean_size_units = cache.mean_size_units();
  d.latency_reduction = latency_reduction(d.mean_size_units, lparams);

  const auto current = cache.capacity();
  if (window.empty() && counters.total() == 0) {
    d.raw_s_new = static_cast<double>(current);
    d.applied_capacity = current;
    return d;
  }
  d.observed_hit_ratio = window.empty() ? hit_ratio(counters) : window.ratio();
  d.raw_s_new = adjust_cache_size(static_cast<double>(current), d.observed_hit_ratio, tparams);
  d.applied_capacity = apply_capacity_bounds(d.raw_s_new, tparams);
  d.evicted = cache.resize(d.applied_capacity).size();
  return d;
}

/// Controller state carried across epochs: counters, window and the decision log.
class CacheTuningFork {
public:
  CacheTuningFork(TuningParams tparams, LatencyModelParams lparams)
      : tparams_(tparams), lparams_(lparams), window_(tparams.window) {}

  /// Records one request; runs a tuning step at each epoch boundary.
  template <typename Key, typename Value, typename Hash>
  std::optional<TuningDecision> observe(bool hit, LruCache<Key, Value, Hash>& cache) {
    record(counters_, window_, hit);
    if (++since_step_ < tparams_.epoch_len) return std::nullopt;
    since_step_ = 0;
    auto d = tuning_step(cache, window_, counters_, tparams_, lparams_, decisions_.size() + 1);
    decisions_.push_back(d);
    return d;
  }

  void set_params(const TuningParams& tparams) {
    tparams_ = tparams;
  }

  const TuningParams& params() const noexcept { return tparams_; }
  const LatencyModelParams& latency_params() const noexcept { return lparams_; }
  const RequestCounters& counters() const noexcept { return counters_; }
  const SlidingWindow& window() const noexcept { return window_; }
  const std::vector<TuningDecision>& decisions() const noexcept { return decisions_; }

private:
  TuningParams tparams_;
  LatencyModelParams lparams_;
  RequestCounters counters_;
  SlidingWindow window_;
  std::size_t since_step_ = 0;
  std::vector<TuningDecision> decisions_;
};

/// Something that serves one request at a time and exposes its cache.
/// `serve_next()` returns the hit flag, or nullopt once the workload is exhausted.
template <typename P>
concept TunablePipeline = requires(P p) {
  { p.serve_next() } -> std::same_as<std::optional<bool>>;
  p.cache();
};

/// Serves requests and tunes every epoch_len of them until the workload runs
/// out or `stop(epochs_completed)` returns true. Returns the decisions made.
template <TunablePipeline P, typename Stop>
std::vector<TuningDecision> run_tuning_loop(P& pipeline, CacheTuningFork& fork, Stop stop) {
  std::vector<TuningDecision> log;
  while (!stop(log.size())) {
    const auto hit = pipeline.serve_next();
    if (!hit) break;
    if (auto d = fork.observe(*hit, pipeline.cache())) log.push_back(*d);
  }
  return log;
}

template <TunablePipeline P, typename Stop>
std::vector<TuningDecision> run_tuning_loop(P& pipeline, const TuningParams& tparams,
                                            const LatencyModelParams& lparams, Stop stop) {
  CacheTuningFork fork(tparams, lparams);
  return run_tuning_loop(pipeline, fork, std::move(stop));
}

inline nlohmann::ordered_json to_json(const TuningDecision& d) {
  return nlohmann::ordered_json{{"epoch", d.epoch},
                                {"observed_hit_ratio", d.observed_hit_ratio},
                                {"raw_S_new", d.raw_s_new},
                                {"applied_capacity", d.applied_capacity},
                                {"evicted", d.evicted}};
}

/// One JSON object per line, newline-terminated.
inline std::string to_jsonl(const std::vector<TuningDecision>& log) {
  std::string out;
  for (const auto& d : log) {
    out += to_json(d).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace superrag
