#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "superrag/error.hpp"
#include "superrag/lru_cache.hpp"
#include "superrag/text.hpp"

namespace superrag {

using DocId = std::uint64_t;

struct Document {
  DocId id = 0;
  std::string text;
  std::vector<std::string> terms;

  static Document from_text(DocId id, std::string text) {
    Document d{id, std::move(text), {}};
    d.terms = normalize(d.text);
    return d;
  }
};

struct Posting {
  DocId doc = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct ScoredDoc {
  DocId doc = 0;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// idf = ln(1 + N / df).
inline double inverse_document_frequency(std::size_t doc_count, std::size_t df) {
  return std::log(1.0 + static_cast<double>(doc_count) / static_cast<double>(df));
}

/// Term -> postings with precomputed tf-idf document norms. Immutable once built.
class InvertedIndex {
public:
  InvertedIndex() = default;

  /// Throws duplicate_doc_id.
  static InvertedIndex build(const std::vector<Document>& docs) {
    InvertedIndex index;
    index.doc_count_ = docs.size();
    std::unordered_set<DocId> seen;
    for (const auto& d : docs) {
      if (!seen.insert(d.id).second) throw duplicate_doc_id(d.id);
      std::map<std::string, std::uint32_t> counts;
      for (const auto& t : d.terms) ++counts[t];
      for (auto& [term, tf] : counts) index.postings_[term].push_back({d.id, tf});
      index.norms_.emplace(d.id, 0.0);
    }
    for (auto& [term, list] : index.postings_) {
      std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    }
    // Per document the squares are added in ascending term order.
    std::unordered_map<DocId, double> squares;
    for (const auto& [term, list] : index.postings_) {
      const double idf = inverse_document_frequency(index.doc_count_, list.size());
      for (const auto& p : list) {
        const double w = static_cast<double>(p.tf) * idf;
        squares[p.doc] += w * w;
      }
    }
    for (auto& [id, norm] : index.norms_) norm = std::sqrt(squares[id]);
    return index;
  }

  std::size_t doc_count() const noexcept { return doc_count_; }
  const std::map<std::string, std::vector<Posting>>& postings() const noexcept { return postings_; }

  const std::vector<Posting>* find(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
  }

  double norm(DocId id) const {
    auto it = norms_.find(id);
    return it == norms_.end() ? 0.0 : it->second;
  }

  double idf(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0.0 : inverse_document_frequency(doc_count_, it->second.size());
  }

  /// tf-idf cosine, descending score then ascending id, zero scores dropped.
  /// Query terms absent from the corpus are ignored, including in the query norm.
  std::vector<ScoredDoc> top_k(const std::vector<std::string>& query_terms, std::size_t k) const {
    std::map<std::string, std::uint32_t> qtf;
    for (const auto& t : query_terms) ++qtf[t];

    double q_sq = 0.0;
    std::unordered_map<DocId, double> dots;
    for (const auto& [term, tf] : qtf) {
      const auto* list = find(term);
      if (!list) continue;
      const double idf = inverse_document_frequency(doc_count_, list->size());
      const double wq = static_cast<double>(tf) * idf;
      q_sq += wq * wq;
      for (const auto& p : *list) dots[p.doc] += wq * (static_cast<double>(p.tf) * idf);
    }
    if (q_sq == 0.0) return {};
    const double q_norm = std::sqrt(q_sq);

    std::vector<ScoredDoc> scored;
    scored.reserve(dots.size());
    for (const auto& [id, dot] : dots) {
      const double dn = norm(id);
      if (dot <= 0.0 || dn == 0.0) continue;
      scored.push_back({id, dot / (q_norm * dn)});
    }
    const auto by_rank = [](const ScoredDoc& a, const ScoredDoc& b) {
      return a.score != b.score ? a.score > b.score : a.doc < b.doc;
    };
    const auto n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), by_rank);
    scored.resize(n);
    return scored;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json postings = nlohmann::ordered_json::object();
    for (const auto& [term, list] : postings_) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& p : list) arr.push_back({p.doc, p.tf});
      postings[term] = std::move(arr);
    }
    std::vector<std::pair<DocId, double>> norms(norms_.begin(), norms_.end());
    std::sort(norms.begin(), norms.end());
    auto norm_arr = nlohmann::ordered_json::array();
    for (const auto& [id, n] : norms) norm_arr.push_back({id, n});
    return {{"doc_count", doc_count_}, {"doc_norms", std::move(norm_arr)}, {"postings", std::move(postings)}};
  }

private:
  std::size_t doc_count_ = 0;
  std::map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<DocId, double> norms_;
};

inline InvertedIndex index_corpus(const std::vector<Document>& docs) {
  return InvertedIndex::build(docs);
}

inline std::vector<ScoredDoc> retrieve_topk(const InvertedIndex& index, const Query& query, std::size_t k = 5) {
  return index.top_k(query.terms, k);
}

using RetrievalCache = LruCache<Fingerprint, std::vector<DocId>>;

struct CachedResult {
  std::vector<DocId> docs;
  bool hit = false;
};

/// Serves from the cache when the fingerprint is resident, else retrieves and
/// caches. Empty results are returned but not cached (cache values are nonempty).
inline CachedResult cached_retrieve(RetrievalCache& cache, const InvertedIndex& index, const Query& query,
                                    std::size_t k = 5) {
  if (auto cached = cache.lookup(query.fingerprint)) return {std::move(*cached), true};
  CachedResult out;
  for (const auto& s : retrieve_topk(index, query, k)) out.docs.push_back(s.doc);
  if (!out.docs.empty()) cache.insert(query.fingerprint, out.docs);
  return out;
}

/// Reads `{"id": int, "text": string}` lines. Blank lines are skipped.
/// Throws parse_error naming the 1-based line, including for duplicate ids.
inline std::vector<Document> read_corpus_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<DocId> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw parse_error(lineno, "invalid JSON");
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text"))
      throw parse_error(lineno, "expected object with \"id\" and \"text\"");
    if (!j["id"].is_number_unsigned() && !(j["id"].is_number_integer() && j["id"].get<std::int64_t>() >= 0))
      throw parse_error(lineno, "\"id\" must be a nonnegative integer");
    if (!j["text"].is_string()) throw parse_error(lineno, "\"text\" must be a string");
    const auto id = j["id"].get<DocId>();
    if (!seen.insert(id).second) throw parse_error(lineno, "duplicate id " + std::to_string(id));
    docs.push_back(Document::from_text(id, j["text"].get<std::string>()));
  }
  return docs;
}

}  // namespace superrag
