#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "superrag/error.hpp"
#include "superrag/retrieval.hpp"
#include "superrag/text.hpp"
#include "superrag/tuning.hpp"

namespace superrag {

/// All generators are std::mt19937_64. Its output sequence is fixed by the
/// C++ standard, so streams are identical on every conforming platform.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection, n > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Draws ranks 1..n with P(i) proportional to i^(-s) by inverse CDF.
class ZipfSampler {
public:
  ZipfSampler(std::size_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -s);
      cdf_[i] = acc;
    }
  }

  /// 1-based rank.
  std::size_t operator()(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), std::ssize(cdf_) - 1)) + 1;
  }

  std::size_t size() const noexcept { return cdf_.size(); }

  double probability(std::size_t rank) const {
    const double prev = rank > 1 ? cdf_[rank - 2] : 0.0;
    return (cdf_[rank - 1] - prev) / cdf_.back();
  }

private:
  std::vector<double> cdf_;
};

struct WorkloadSpec {
  std::size_t n_queries = 10000;
  double zipf_s = 1.0;
  std::size_t distinct_queries = 1000;
  std::uint64_t seed = 42;

  bool operator==(const WorkloadSpec&) const = default;
};

/// A pool query and the document it was drawn from.
struct WorkloadQuery {
  Query query;
  DocId relevant = 0;
};

/// Pool indices (0-based; pool[i] has popularity rank i + 1).
inline std::vector<std::size_t> generate_workload(const WorkloadSpec& spec, std::size_t pool_size) {
  if (spec.distinct_queries == 0) throw domain_error("distinct_queries must be >= 1");
  if (spec.zipf_s < 0.0) throw domain_error("zipf_s must be >= 0");
  if (spec.distinct_queries > pool_size) throw pool_too_small(spec.distinct_queries, pool_size);
  std::vector<std::size_t> stream;
  stream.reserve(spec.n_queries);
  Rng rng(spec.seed);
  const ZipfSampler zipf(spec.distinct_queries, spec.zipf_s);
  for (std::size_t i = 0; i < spec.n_queries; ++i) stream.push_back(zipf(rng) - 1);
  return stream;
}

inline std::vector<std::size_t> generate_workload(const WorkloadSpec& spec, const std::vector<WorkloadQuery>& pool) {
  return generate_workload(spec, pool.size());
}

struct LatencySimParams {
  double cache_hit_ms = 5.0;
  double backend_base_ms = 60.0;
  double per_doc_ms = 2.0;

  bool operator==(const LatencySimParams&) const = default;
};

/// miss: base + per_doc * n; hit: (cache_hit + per_doc * n) * (1 - L(n)).
inline double simulate_latency(bool hit, std::size_t result_docs, const LatencySimParams& lsim,
                               const LatencyModelParams& lparams) {
  const double n = static_cast<double>(result_docs);
  if (!hit) return lsim.backend_base_ms + lsim.per_doc_ms * n;
  return (lsim.cache_hit_ms + lsim.per_doc_ms * n) * (1.0 - latency_reduction(n, lparams));
}

struct SyntheticCorpusSpec {
  std::size_t documents = 2000;
  std::size_t vocabulary = 5000;
  std::size_t sentences_per_doc = 4;
  std::size_t words_per_sentence = 8;
  double word_zipf_s = 0.8;

  bool operator==(const SyntheticCorpusSpec&) const = default;
};

/// Deterministic pronounceable word for a vocabulary index (three syllables).
inline std::string synthetic_word(std::size_t index) {
  static constexpr std::string_view consonants = "bcdfghjklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  constexpr std::size_t syllables = consonants.size() * vowels.size();
  std::string w;
  for (int i = 0; i < 3; ++i) {
    const auto syl = index % syllables;
    index /= syllables;
    w.push_back(consonants[syl / vowels.size()]);
    w.push_back(vowels[syl % vowels.size()]);
  }
  return w;
}

/// Documents with ids 0..documents-1 whose words follow a Zipf law over the vocabulary.
inline std::vector<Document> synthetic_corpus(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
  if (spec.vocabulary == 0 || spec.words_per_sentence == 0 || spec.sentences_per_doc == 0)
    throw domain_error("synthetic corpus dimensions must be >= 1");
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const ZipfSampler words(spec.vocabulary, spec.word_zipf_s);
  std::vector<Document> docs;
  docs.reserve(spec.documents);
  for (std::size_t d = 0; d < spec.documents; ++d) {
    std::string text;
    for (std::size_t s = 0; s < spec.sentences_per_doc; ++s) {
      for (std::size_t w = 0; w < spec.words_per_sentence; ++w) {
        auto word = synthetic_word(words(rng) - 1);
        if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        text += word;
        text.push_back(w + 1 == spec.words_per_sentence ? '.' : ' ');
      }
      if (s + 1 < spec.sentences_per_doc) text.push_back(' ');
    }
    docs.push_back(Document::from_text(d, std::move(text)));
  }
  return docs;
}

/// `count` queries with distinct fingerprints, each a run of `terms` consecutive
/// tokens from a uniformly chosen document; that document is the relevant one.
inline std::vector<WorkloadQuery> make_query_pool(const std::vector<Document>& docs, std::size_t count,
                                                  std::size_t terms, std::uint64_t seed) {
  if (terms == 0) throw domain_error("query_terms must be >= 1");
  std::vector<const Document*> usable;
  for (const auto& d : docs)
    if (d.terms.size() >= terms) usable.push_back(&d);
  if (count > 0 && usable.empty()) throw pool_too_small(count, 0);

  Rng rng(seed ^ 0xc2b2ae3d27d4eb4fULL);
  std::vector<WorkloadQuery> pool;
  pool.reserve(count);
  std::unordered_set<Fingerprint> seen;
  const std::size_t max_attempts = 50 * count + 100;
  for (std::size_t attempt = 0; pool.size() < count; ++attempt) {
    if (attempt == max_attempts) throw pool_too_small(count, pool.size());
    const auto* doc = usable[uniform_below(rng, usable.size())];
    const auto start = uniform_below(rng, doc->terms.size() - terms + 1);
    std::vector<std::string> toks(doc->terms.begin() + static_cast<std::ptrdiff_t>(start),
                                  doc->terms.begin() + static_cast<std::ptrdiff_t>(start + terms));
    auto q = Query::from_text(join(toks));
    if (!seen.insert(q.fingerprint).second) continue;
    pool.push_back({std::move(q), doc->id});
  }
  return pool;
}

struct EvalItem {
  std::string query;
  DocId relevant_doc_id = 0;
};

/// Reads `{"query": string, "relevant_doc_id": int}` lines.
inline std::vector<EvalItem> read_eval_jsonl(std::istream& in) {
  std::vector<EvalItem> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw parse_error(lineno, "invalid JSON");
    }
    if (!j.is_object() || !j.contains("query") || !j["query"].is_string() || !j.contains("relevant_doc_id") ||
        !j["relevant_doc_id"].is_number_integer() || j["relevant_doc_id"].get<std::int64_t>() < 0)
      throw parse_error(lineno, "expected {\"query\": string, \"relevant_doc_id\": nonnegative int}");
    out.push_back({j["query"].get<std::string>(), j["relevant_doc_id"].get<DocId>()});
  }
  return out;
}

}  // namespace superrag
