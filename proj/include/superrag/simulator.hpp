#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "superrag/metrics.hpp"
#include "superrag/orchestrator.hpp"
#include "superrag/pipeline.hpp"
#include "superrag/tuning.hpp"
#include "superrag/workload.hpp"

namespace superrag {

/// Signed relative change in percent; nullopt when the baseline is zero.
inline std::optional<double> percent_change(double baseline, double treatment) {
  if (baseline == 0.0) return std::nullopt;
  return 100.0 * (treatment - baseline) / baseline;
}

struct MetricRow {
  std::string metric;
  double pre = 0.0;
  double post = 0.0;
  std::optional<double> change_pct;
};

struct ExperimentReport {
  MetricsReport baseline;
  MetricsReport tuned;
  std::vector<TuningDecision> decisions;  // tuned arm

  /// Rows in the pre/post comparison table. Speed is the median per-query
  /// time, Latency the mean, Response Time the 95th percentile.
  std::vector<MetricRow> rows() const {
    const auto row = [](std::string name, double pre, double post) {
      return MetricRow{std::move(name), pre, post, percent_change(pre, post)};
    };
    return {
        row("Accuracy (precision@1)", baseline.precision_at_1, tuned.precision_at_1),
        row("Speed (ms/query)", baseline.p50_ms, tuned.p50_ms),
        row("Cache Hit Ratio", baseline.hit_ratio, tuned.hit_ratio),
        row("Latency (ms)", baseline.mean_query_ms, tuned.mean_query_ms),
        row("Data Throughput (queries/s)", baseline.throughput_qps, tuned.throughput_qps),
        row("Response Time (p95 ms)", baseline.p95_ms, tuned.p95_ms),
    };
  }

  nlohmann::ordered_json deltas_json() const {
    const auto d = [](double pre, double post) {
      const auto pct = percent_change(pre, post);
      return pct ? nlohmann::ordered_json(*pct) : nlohmann::ordered_json(nullptr);
    };
    return {{"hit_ratio", d(baseline.hit_ratio, tuned.hit_ratio)},
            {"mean_query_ms", d(baseline.mean_query_ms, tuned.mean_query_ms)},
            {"p50_ms", d(baseline.p50_ms, tuned.p50_ms)},
            {"p95_ms", d(baseline.p95_ms, tuned.p95_ms)},
            {"throughput_qps", d(baseline.throughput_qps, tuned.throughput_qps)},
            {"precision_at_1", d(baseline.precision_at_1, tuned.precision_at_1)}};
  }

  nlohmann::ordered_json to_json() const {
    return {{"baseline", superrag::to_json(baseline)},
            {"tuned", superrag::to_json(tuned)},
            {"deltas", deltas_json()},
            {"tuning_steps", decisions.size()},
            {"final_capacity", decisions.empty() ? nlohmann::ordered_json(nullptr)
                                                 : nlohmann::ordered_json(decisions.back().applied_capacity)}};
  }

  /// Metric,Pre-Integration,Post-Integration,% Improvement. Undefined changes print as NA.
  std::string to_csv() const {
    std::ostringstream os;
    os << "Metric,Pre-Integration,Post-Integration,% Improvement\n";
    for (const auto& r : rows()) {
      os << r.metric << ',' << format_double(r.pre) << ',' << format_double(r.post) << ','
         << (r.change_pct ? format_double(*r.change_pct) : std::string("NA")) << '\n';
    }
    return os.str();
  }
};

struct ExperimentOptions {
  std::size_t query_terms = 4;
  bool tune_treatment = true;  // false runs both arms static
};

/// Runs the same workload against a static cache and a tuned cache, both
/// starting at tuning.initial_capacity. The arms share corpus, pool and stream.
inline ExperimentReport run_experiment(const SystemConfig& config, const WorkloadSpec& spec,
                                       const std::vector<Document>& docs, const LatencySimParams& lsim,
                                       const ExperimentOptions& opts = {}) {
  const auto cfg = minimal_structural_changes(config);
  validate(lsim);
  auto corpus = std::make_shared<const Corpus>(docs);
  auto index = std::make_shared<const InvertedIndex>(index_corpus(docs));
  const auto pool = make_query_pool(docs, spec.distinct_queries, opts.query_terms, spec.seed);
  const auto stream = generate_workload(spec, pool);

  const auto run_arm = [&](bool tuned, std::vector<TuningDecision>* decisions) {
    RagPipeline pipeline(corpus, index, cfg.tuning.initial_capacity, cfg.k_retrieve, lsim, cfg.latency_model);
    WorkloadRunner runner(pipeline, pool, stream);
    if (tuned) {
      *decisions = run_tuning_loop(runner, cfg.tuning, cfg.latency_model, [](std::size_t) { return false; });
    } else {
      while (runner.serve_next()) {
      }
    }
    return summarize(runner.log());
  };

  ExperimentReport rep;
  rep.baseline = run_arm(false, nullptr);
  rep.tuned = run_arm(opts.tune_treatment, &rep.decisions);
  return rep;
}

}  // namespace superrag
