#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "superrag/config.hpp"
#include "superrag/error.hpp"
#include "superrag/instruct.hpp"
#include "superrag/metrics.hpp"
#include "superrag/orchestrator.hpp"
#include "superrag/retrieval.hpp"
#include "superrag/simulator.hpp"
#include "superrag/tuning.hpp"
#include "superrag/workload.hpp"

namespace superrag::cli {

/// Process exit codes. Stable contract.
enum ExitCode : int {
  kOk = 0,
  kInvalidInput = 1,
  kIoError = 2,
  kIntegrationFailed = 3,
};

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out << contents;
  if (!out) throw io_error("write failed for " + path.string());
}

inline std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open corpus " + path.string());
  return read_corpus_jsonl(in);
}

inline int cmd_index(const std::filesystem::path& corpus_path, const std::filesystem::path& out_path,
                     std::ostream& out, std::ostream& err) {
  try {
    const auto docs = load_corpus(corpus_path);
    const auto index = index_corpus(docs);
    write_file(out_path, index.to_json().dump() + "\n");
    out << "indexed " << index.doc_count() << " documents\n";
    return kOk;
  } catch (const io_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
}

/// Instruct pairs used when the config names no dataset.
inline std::vector<InstructExample> default_instruct_dataset(std::size_t vocabulary) {
  std::vector<InstructExample> out;
  for (std::size_t i = 0; i < std::min<std::size_t>(20, vocabulary); ++i) {
    const auto w = synthetic_word(i);
    out.push_back({"define " + w, w + " is corpus term number " + std::to_string(i + 1) + " by frequency."});
  }
  return out;
}

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Integrate, then compare static vs tuned caches; writes manifest.json,
/// decisions.jsonl, report.csv and report.json into the output directory.
/// Only manifest.json is written when integration fails.
inline int cmd_run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& out,
                   std::ostream& err) {
  RunConfig cfg;
  std::vector<Document> docs;
  std::vector<InstructExample> dataset;
  std::vector<EvalItem> eval;
  std::optional<double> im_score;
  try {
    cfg = load_run_config(config_path);
    if (overrides.seed) cfg.workload.seed = *overrides.seed;
    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
    minimal_structural_changes(cfg.system);
    validate(cfg.latency_sim);
    if (cfg.instruct_setup) im_score = instruct_effectiveness(*cfg.instruct_setup);

    docs = cfg.corpus_path ? load_corpus(*cfg.corpus_path) : synthetic_corpus(cfg.synthetic_corpus, cfg.workload.seed);
    if (cfg.instruct_path) {
      std::ifstream in(*cfg.instruct_path);
      if (!in) throw io_error("cannot open instruct dataset " + cfg.instruct_path->string());
      dataset = read_instruct_jsonl(in);
    } else {
      dataset = default_instruct_dataset(cfg.synthetic_corpus.vocabulary);
    }
  } catch (const io_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  std::optional<IntegrationOutcome> outcome;
  std::optional<ExperimentReport> experiment;
  try {
    const auto pool = make_query_pool(docs, cfg.workload.distinct_queries, cfg.query_terms, cfg.workload.seed);
    if (cfg.eval_path) {
      std::ifstream in(*cfg.eval_path);
      if (!in) throw io_error("cannot open eval set " + cfg.eval_path->string());
      eval = read_eval_jsonl(in);
    } else {
      for (std::size_t i = 0; i < std::min(cfg.eval_size, pool.size()); ++i)
        eval.push_back({pool[i].query.raw, pool[i].relevant});
    }
    WorkloadSpec warmup_spec = cfg.workload;
    warmup_spec.n_queries = cfg.warmup_queries;
    warmup_spec.seed = cfg.workload.seed + 1;

    IntegrationInputs inputs{dataset, docs, eval, cfg.latency_sim, pool, generate_workload(warmup_spec, pool)};
    outcome = integrate_super_rags(cfg.system, inputs);
    if (const auto* ok = std::get_if<EnhancedSystem>(&*outcome)) {
      experiment = run_experiment(ok->config, cfg.workload, docs, cfg.latency_sim, {cfg.query_terms, true});
    }
  } catch (const io_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  const bool deployed = std::holds_alternative<EnhancedSystem>(*outcome);
  const auto& iterations = deployed ? std::get<EnhancedSystem>(*outcome).iterations
                                    : std::get<IntegrationFailed>(*outcome).iterations;
  const auto& final_config =
      deployed ? std::get<EnhancedSystem>(*outcome).config : std::get<IntegrationFailed>(*outcome).config;

  nlohmann::ordered_json manifest;
  manifest["generated_at"] = utc_timestamp();
  manifest["status"] = deployed ? "deployed" : "integration_failed";
  manifest["config"] = to_json(cfg);
  manifest["instruct_effectiveness"] = im_score ? nlohmann::ordered_json(*im_score) : nlohmann::ordered_json(nullptr);
  manifest["iteration_count"] = iterations.size();
  manifest["iterations"] = nlohmann::ordered_json::array();
  for (const auto& it : iterations) manifest["iterations"].push_back(to_json(it));
  manifest["final_config"] = to_json(final_config);
  if (experiment) {
    manifest["outputs"] = {"decisions.jsonl", "report.csv", "report.json"};
  }

  try {
    std::filesystem::create_directories(cfg.out_dir);
    write_file(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");
    if (experiment) {
      write_file(cfg.out_dir / "decisions.jsonl", to_jsonl(experiment->decisions));
      write_file(cfg.out_dir / "report.csv", experiment->to_csv());
      write_file(cfg.out_dir / "report.json", experiment->to_json().dump(2) + "\n");
    }
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const io_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }

  if (!deployed) {
    err << "integration failed after " << iterations.size() << " iterations\n";
    return kIntegrationFailed;
  }
  out << "deployed after " << iterations.size() << " iteration(s)\n" << experiment->to_csv();
  return kOk;
}

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

/// %.12g rendering used by `formula`.
inline std::string format_formula_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Direct evaluation of one formula:
///   hit-ratio HITS TOTAL
///   latency-reduction D K D0
///   cache-size S ALPHA HIT_RATIO T
///   im ALPHA BETA GAMMA DELTA EPSILON ZETA X Y
inline int cmd_formula(const std::string& name, const std::vector<std::string>& args, std::ostream& out,
                       std::ostream& err) {
  const auto fail = [&](const std::string& msg) {
    err << "error: " << msg << '\n';
    return kInvalidInput;
  };
  std::vector<double> v;
  for (const auto& a : args) {
    const auto x = parse_number(a);
    if (!x || !std::isfinite(*x)) return fail("argument '" + a + "' is not a finite number");
    v.push_back(*x);
  }
  const auto arity = [&](std::size_t n, const char* usage) -> bool {
    if (v.size() == n) return true;
    err << "error: " << name << " takes " << n << " arguments: " << usage << '\n';
    return false;
  };

  double value = 0.0;
  try {
    if (name == "hit-ratio") {
      if (!arity(2, "HITS TOTAL")) return kInvalidInput;
      if (v[0] < 0 || v[1] < 0 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]))
        return fail("HITS and TOTAL must be nonnegative integers");
      if (v[0] > v[1]) return fail("HITS must be <= TOTAL");
      value = hit_ratio(RequestCounters(static_cast<std::uint64_t>(v[0]), static_cast<std::uint64_t>(v[1])));
    } else if (name == "latency-reduction") {
      if (!arity(3, "D K D0")) return kInvalidInput;
      if (v[0] < 0) return fail("D must be >= 0");
      if (v[2] < 0) return fail("D0 must be >= 0");
      value = latency_reduction(v[0], LatencyModelParams{v[1], v[2]});
    } else if (name == "cache-size") {
      if (!arity(4, "S ALPHA HIT_RATIO T")) return kInvalidInput;
      if (v[0] < 0) return fail("S must be >= 0");
      if (v[2] < 0 || v[2] > 1) return fail("HIT_RATIO must be in [0, 1]");
      TuningParams p;
      p.alpha = v[1];
      p.target = v[3];
      value = adjust_cache_size(v[0], v[2], p);
    } else if (name == "im") {
      if (!arity(8, "ALPHA BETA GAMMA DELTA EPSILON ZETA X Y")) return kInvalidInput;
      value = instruct_effectiveness(InstructSetupParams{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
    } else {
      return fail("unknown formula '" + name + "' (expected hit-ratio, latency-reduction, cache-size, im)");
    }
  } catch (const no_requests&) {
    return fail("TOTAL must be > 0");
  } catch (const error& e) {
    return fail(e.what());
  }
  out << format_formula_value(value) << '\n';
  return kOk;
}

}  // namespace superrag::cli
