#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "superrag/error.hpp"
#include "superrag/instruct.hpp"
#include "superrag/metrics.hpp"
#include "superrag/pipeline.hpp"
#include "superrag/retrieval.hpp"
#include "superrag/tuning.hpp"
#include "superrag/workload.hpp"

namespace superrag {

struct Thresholds {
  double min_hit_ratio = 0.0;
  double max_mean_latency_ms = 75.0;
  double min_precision_at_1 = 0.8;

  bool operator==(const Thresholds&) const = default;
};

/// Applied after an unsatisfactory test: alpha *= alpha_factor and
/// T = min(T, observed hit ratio + target_margin).
struct AdjustmentRule {
  double alpha_factor = 1.5;
  double target_margin = 0.05;

  bool operator==(const AdjustmentRule&) const = default;
};

struct SystemConfig {
  TuningParams tuning;
  LatencyModelParams latency_model;
  std::size_t k_retrieve = 5;
  Thresholds thresholds;
  std::size_t max_adjust_iterations = 10;
  AdjustmentRule adjustment;

  bool operator==(const SystemConfig&) const = default;
};

struct TestResults {
  MetricsReport report;
  bool satisfactory = false;
  std::size_t answered = 0;  // responses other than NO_ANSWER
};

struct IterationRecord {
  std::size_t iteration = 0;
  TuningParams tuning;
  TestResults results;
  double observed_hit_ratio = 0.0;  // last windowed ratio seen by the controller
};

namespace detail {
inline bool finite(double v) { return std::isfinite(v); }
inline void require(bool ok, const char* field, const char* detail) {
  if (!ok) throw invalid_config(field, detail);
}
}  // namespace detail

/// Validation only: returns the config untouched or throws invalid_config
/// naming the first violated invariant.
inline SystemConfig minimal_structural_changes(const SystemConfig& c) {
  using detail::finite;
  using detail::require;
  const auto& t = c.tuning;
  require(finite(t.alpha) && t.alpha >= 0.0, "alpha", "must be finite and >= 0");
  require(finite(t.target) && t.target >= 0.0 && t.target <= 1.0, "T", "must be in [0, 1]");
  require(t.s_min > 0, "S_min", "must be > 0");
  require(t.s_min <= t.s_max, "S bounds", "S_min must be <= S_max");
  require(t.epoch_len >= 1, "epoch_len", "must be >= 1");
  require(t.window >= 1, "window", "must be >= 1");
  require(t.initial_capacity >= t.s_min && t.initial_capacity <= t.s_max, "initial_capacity",
          "must lie in [S_min, S_max]");
  require(finite(c.latency_model.k), "k", "must be finite");
  require(finite(c.latency_model.d0) && c.latency_model.d0 >= 0.0, "d0", "must be finite and >= 0");
  require(c.k_retrieve >= 1, "k_retrieve", "must be >= 1");
  const auto& th = c.thresholds;
  require(finite(th.min_hit_ratio) && th.min_hit_ratio >= 0.0, "min_hit_ratio", "must be finite and >= 0");
  require(!std::isnan(th.max_mean_latency_ms) && th.max_mean_latency_ms >= 0.0, "max_mean_latency_ms",
          "must be >= 0");
  require(finite(th.min_precision_at_1) && th.min_precision_at_1 >= 0.0, "min_precision_at_1",
          "must be finite and >= 0");
  require(c.max_adjust_iterations >= 1, "max_adjust_iterations", "must be >= 1");
  require(finite(c.adjustment.alpha_factor) && c.adjustment.alpha_factor >= 0.0, "alpha_factor",
          "must be finite and >= 0");
  require(finite(c.adjustment.target_margin), "target_margin", "must be finite");
  return c;
}

inline void validate(const LatencySimParams& l) {
  detail::require(l.cache_hit_ms >= 0.0 && l.backend_base_ms >= 0.0 && l.per_doc_ms >= 0.0 &&
                      detail::finite(l.cache_hit_ms + l.backend_base_ms + l.per_doc_ms),
                  "latency_sim", "all terms must be finite and >= 0");
}

inline bool is_satisfactory(const MetricsReport& r, const Thresholds& th) {
  return r.hit_ratio >= th.min_hit_ratio && r.mean_query_ms <= th.max_mean_latency_ms &&
         r.precision_at_1 >= th.min_precision_at_1;
}

/// Replays the evaluation queries through retrieval and generation.
inline TestResults test_super_rags(RagPipeline& system, const std::vector<EvalItem>& eval_set,
                                   const Thresholds& th) {
  if (eval_set.empty()) throw empty_eval_set();
  std::vector<QueryRecord> log;
  log.reserve(eval_set.size());
  TestResults out;
  for (const auto& item : eval_set) {
    const auto q = Query::from_text(item.query);
    auto served = system.serve(q, item.relevant_doc_id);
    if (system.respond(q, served.docs) != kNoAnswer) ++out.answered;
    log.push_back(served.record);
  }
  out.report = summarize(log);
  out.satisfactory = is_satisfactory(out.report, th);
  return out;
}

inline TuningParams apply_adjustment(TuningParams t, double observed_hit_ratio, const AdjustmentRule& rule) {
  t.alpha *= rule.alpha_factor;
  t.target = std::clamp(std::min(t.target, observed_hit_ratio + rule.target_margin), 0.0, 1.0);
  return t;
}

struct IntegrationInputs {
  std::vector<InstructExample> instruct_dataset;
  std::vector<Document> corpus;
  std::vector<EvalItem> eval_set;
  LatencySimParams latency_sim;
  // Warmup traffic the controller tunes over on every attempt.
  std::vector<WorkloadQuery> warmup_pool;
  std::vector<std::size_t> warmup_stream;
};

struct EnhancedSystem {
  RagPipeline pipeline;
  SystemConfig config;  // with any adjustments applied
  std::vector<IterationRecord> iterations;
  std::vector<TuningDecision> decisions;
};

struct IntegrationFailed {
  TestResults last;
  SystemConfig config;
  std::vector<IterationRecord> iterations;
  std::vector<TuningDecision> decisions;
};

using IntegrationOutcome = std::variant<EnhancedSystem, IntegrationFailed>;

/// Validate, train, register models, then tune -> test -> adjust until the
/// thresholds are met or max_adjust_iterations attempts have run. Every retry
/// resumes from the tuning step with the cache and controller state kept.
inline IntegrationOutcome integrate_super_rags(const SystemConfig& config, const IntegrationInputs& in) {
  SystemConfig cfg = minimal_structural_changes(config);
  validate(in.latency_sim);
  if (in.corpus.empty()) throw empty_corpus();
  if (in.eval_set.empty()) throw empty_eval_set();

  std::vector<InstructModel> models{train_instruct_model(in.instruct_dataset)};

  auto corpus = std::make_shared<const Corpus>(in.corpus);
  auto index = std::make_shared<const InvertedIndex>(index_corpus(in.corpus));
  RagPipeline pipeline(corpus, index, cfg.tuning.initial_capacity, cfg.k_retrieve, in.latency_sim,
                       cfg.latency_model);
  for (auto& m : models) pipeline.register_model(std::move(m));

  CacheTuningFork fork(cfg.tuning, cfg.latency_model);
  std::vector<IterationRecord> iterations;
  std::vector<TuningDecision> decisions;
  const auto never = [](std::size_t) { return false; };

  for (std::size_t it = 1;; ++it) {
    WorkloadRunner warmup(pipeline, in.warmup_pool, in.warmup_stream);
    auto step_log = run_tuning_loop(warmup, fork, never);
    decisions.insert(decisions.end(), step_log.begin(), step_log.end());

    IterationRecord rec;
    rec.iteration = it;
    rec.tuning = cfg.tuning;
    rec.results = test_super_rags(pipeline, in.eval_set, cfg.thresholds);
    rec.observed_hit_ratio = fork.window().empty() ? rec.results.report.hit_ratio : fork.window().ratio();
    iterations.push_back(rec);

    if (rec.results.satisfactory) {
      return EnhancedSystem{std::move(pipeline), cfg, std::move(iterations), std::move(decisions)};
    }
    if (it == cfg.max_adjust_iterations) {
      return IntegrationFailed{rec.results, cfg, std::move(iterations), std::move(decisions)};
    }
    cfg.tuning = apply_adjustment(cfg.tuning, rec.observed_hit_ratio, cfg.adjustment);
    fork.set_params(cfg.tuning);
  }
}

// JSON echo of the configuration, same key names the run config file uses.

inline nlohmann::ordered_json to_json(const TuningParams& t) {
  return {{"alpha", t.alpha},         {"target", t.target},       {"s_min", t.s_min},
          {"s_max", t.s_max},         {"epoch_len", t.epoch_len}, {"window", t.window},
          {"initial_capacity", t.initial_capacity}};
}

inline nlohmann::ordered_json to_json(const SystemConfig& c) {
  nlohmann::ordered_json max_latency =
      std::isinf(c.thresholds.max_mean_latency_ms) ? nlohmann::ordered_json(nullptr)
                                                   : nlohmann::ordered_json(c.thresholds.max_mean_latency_ms);
  return {{"tuning", to_json(c.tuning)},
          {"latency_model", {{"k", c.latency_model.k}, {"d0", c.latency_model.d0}}},
          {"k_retrieve", c.k_retrieve},
          {"thresholds",
           {{"min_hit_ratio", c.thresholds.min_hit_ratio},
            {"max_mean_latency_ms", max_latency},
            {"min_precision_at_1", c.thresholds.min_precision_at_1}}},
          {"max_adjust_iterations", c.max_adjust_iterations},
          {"adjustment",
           {{"alpha_factor", c.adjustment.alpha_factor}, {"target_margin", c.adjustment.target_margin}}}};
}

inline nlohmann::ordered_json to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration},
          {"tuning", to_json(r.tuning)},
          {"observed_hit_ratio", r.observed_hit_ratio},
          {"report", to_json(r.results.report)},
          {"satisfactory", r.results.satisfactory},
          {"answered", r.results.answered}};
}

}  // namespace superrag
