#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "superrag/error.hpp"
#include "superrag/instruct.hpp"
#include "superrag/orchestrator.hpp"
#include "superrag/workload.hpp"

namespace superrag {

/// Everything `run` needs. Paths are resolved against the config file's directory.
struct RunConfig {
  SystemConfig system;
  WorkloadSpec workload;
  LatencySimParams latency_sim;
  SyntheticCorpusSpec synthetic_corpus;
  std::size_t query_terms = 4;
  std::size_t warmup_queries = 5000;
  std::size_t eval_size = 200;
  std::optional<std::filesystem::path> corpus_path;
  std::optional<std::filesystem::path> instruct_path;
  std::optional<std::filesystem::path> eval_path;
  std::filesystem::path out_dir = "out";
  std::optional<InstructSetupParams> instruct_setup;
};

namespace detail {

/// Reads keys off one JSON object and rejects any it was not asked about.
class ObjectReader {
public:
  ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw invalid_config(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    const auto name = qualified(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw invalid_config(name, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 && !v.is_number_unsigned()))
        throw invalid_config(name, "expected a nonnegative integer");
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw invalid_config(name, "expected a number");
      out = v.get<T>();
    } else {
      if (!v.is_string()) throw invalid_config(name, "expected a string");
      out = v.get<std::string>();
    }
  }

  /// null maps to +infinity.
  void read_unbounded(const char* key, double& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out = std::numeric_limits<double>::infinity();
      return;
    }
    read(key, out);
  }

  std::optional<ObjectReader> child(const char* key) {
    known_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return ObjectReader(j_.at(key), qualified(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!known_.contains(k)) throw invalid_config(qualified(k), "unknown key");
    }
  }

private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> known_;
};

}  // namespace detail

/// Parses a run config document. Throws invalid_config on unknown keys or
/// wrongly typed values; range checks happen later in minimal_structural_changes.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  RunConfig c;
  detail::ObjectReader root(j, "");

  const auto path_field = [&](const char* key, std::optional<std::filesystem::path>& out) {
    std::string s;
    root.read(key, s);
    if (!s.empty()) out = base_dir / s;
  };
  path_field("corpus_path", c.corpus_path);
  path_field("instruct_path", c.instruct_path);
  path_field("eval_path", c.eval_path);
  std::string out_dir;
  root.read("out_dir", out_dir);
  if (!out_dir.empty()) c.out_dir = base_dir / out_dir;

  if (auto w = root.child("workload")) {
    w->read("n_queries", c.workload.n_queries);
    w->read("zipf_s", c.workload.zipf_s);
    w->read("distinct_queries", c.workload.distinct_queries);
    w->read("seed", c.workload.seed);
    w->read("query_terms", c.query_terms);
    w->read("warmup_queries", c.warmup_queries);
    w->read("eval_size", c.eval_size);
    w->finish();
  }
  if (auto s = root.child("synthetic_corpus")) {
    s->read("documents", c.synthetic_corpus.documents);
    s->read("vocabulary", c.synthetic_corpus.vocabulary);
    s->read("sentences_per_doc", c.synthetic_corpus.sentences_per_doc);
    s->read("words_per_sentence", c.synthetic_corpus.words_per_sentence);
    s->read("word_zipf_s", c.synthetic_corpus.word_zipf_s);
    s->finish();
  }
  auto& sys = c.system;
  if (auto t = root.child("tuning")) {
    t->read("alpha", sys.tuning.alpha);
    t->read("target", sys.tuning.target);
    t->read("s_min", sys.tuning.s_min);
    t->read("s_max", sys.tuning.s_max);
    t->read("epoch_len", sys.tuning.epoch_len);
    t->read("window", sys.tuning.window);
    t->read("initial_capacity", sys.tuning.initial_capacity);
    t->finish();
  }
  if (auto l = root.child("latency_model")) {
    l->read("k", sys.latency_model.k);
    l->read("d0", sys.latency_model.d0);
    l->finish();
  }
  if (auto l = root.child("latency_sim")) {
    l->read("cache_hit_ms", c.latency_sim.cache_hit_ms);
    l->read("backend_base_ms", c.latency_sim.backend_base_ms);
    l->read("per_doc_ms", c.latency_sim.per_doc_ms);
    l->finish();
  }
  root.read("k_retrieve", sys.k_retrieve);
  if (auto th = root.child("thresholds")) {
    th->read("min_hit_ratio", sys.thresholds.min_hit_ratio);
    th->read_unbounded("max_mean_latency_ms", sys.thresholds.max_mean_latency_ms);
    th->read("min_precision_at_1", sys.thresholds.min_precision_at_1);
    th->finish();
  }
  root.read("max_adjust_iterations", sys.max_adjust_iterations);
  if (auto a = root.child("adjustment")) {
    a->read("alpha_factor", sys.adjustment.alpha_factor);
    a->read("target_margin", sys.adjustment.target_margin);
    a->finish();
  }
  if (auto im = root.child("instruct_setup")) {
    InstructSetupParams p;
    im->read("alpha_im", p.alpha_im);
    im->read("beta_im", p.beta_im);
    im->read("gamma_im", p.gamma_im);
    im->read("delta_im", p.delta_im);
    im->read("epsilon_im", p.epsilon_im);
    im->read("zeta_im", p.zeta_im);
    im->read("x_im", p.x_im);
    im->read("y_im", p.y_im);
    im->finish();
    c.instruct_setup = p;
  }
  root.finish();
  return c;
}

/// Throws io_error when unreadable, invalid_config when malformed.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_config("<document>", std::string("not valid JSON: ") + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  auto j = to_json(c.system);
  const auto opt_path = [](const std::optional<std::filesystem::path>& p) {
    return p ? nlohmann::ordered_json(p->generic_string()) : nlohmann::ordered_json(nullptr);
  };
  j["corpus_path"] = opt_path(c.corpus_path);
  j["instruct_path"] = opt_path(c.instruct_path);
  j["eval_path"] = opt_path(c.eval_path);
  j["out_dir"] = c.out_dir.generic_string();
  j["workload"] = {{"n_queries", c.workload.n_queries},   {"zipf_s", c.workload.zipf_s},
                   {"distinct_queries", c.workload.distinct_queries}, {"seed", c.workload.seed},
                   {"query_terms", c.query_terms},         {"warmup_queries", c.warmup_queries},
                   {"eval_size", c.eval_size}};
  j["synthetic_corpus"] = {{"documents", c.synthetic_corpus.documents},
                           {"vocabulary", c.synthetic_corpus.vocabulary},
                           {"sentences_per_doc", c.synthetic_corpus.sentences_per_doc},
                           {"words_per_sentence", c.synthetic_corpus.words_per_sentence},
                           {"word_zipf_s", c.synthetic_corpus.word_zipf_s}};
  j["latency_sim"] = {{"cache_hit_ms", c.latency_sim.cache_hit_ms},
                      {"backend_base_ms", c.latency_sim.backend_base_ms},
                      {"per_doc_ms", c.latency_sim.per_doc_ms}};
  if (c.instruct_setup) {
    const auto& p = *c.instruct_setup;
    j["instruct_setup"] = {{"alpha_im", p.alpha_im}, {"beta_im", p.beta_im},       {"gamma_im", p.gamma_im},
                           {"delta_im", p.delta_im}, {"epsilon_im", p.epsilon_im}, {"zeta_im", p.zeta_im},
                           {"x_im", p.x_im},         {"y_im", p.y_im}};
  }
  return j;
}

}  // namespace superrag
