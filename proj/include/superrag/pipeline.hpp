#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "superrag/instruct.hpp"
#include "superrag/metrics.hpp"
#include "superrag/retrieval.hpp"
#include "superrag/tuning.hpp"
#include "superrag/workload.hpp"

namespace superrag {

/// Documents plus an id lookup. Immutable once built.
class Corpus {
public:
  explicit Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      if (!by_id_.emplace(docs_[i].id, i).second) throw duplicate_doc_id(docs_[i].id);
    }
  }

  const std::vector<Document>& docs() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

  const Document* find(DocId id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &docs_[it->second];
  }

private:
  std::vector<Document> docs_;
  std::unordered_map<DocId, std::size_t> by_id_;
};

struct ServedQuery {
  std::vector<DocId> docs;
  QueryRecord record;
};

/// Cache-fronted retriever plus the instruct generator. Latencies are
/// simulated, never measured.
class RagPipeline {
public:
  RagPipeline(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const InvertedIndex> index,
              std::size_t cache_capacity, std::size_t k, LatencySimParams lsim, LatencyModelParams lparams)
      : corpus_(std::move(corpus)),
        index_(std::move(index)),
        cache_(cache_capacity),
        k_(k),
        lsim_(lsim),
        lparams_(lparams) {}

  void register_model(InstructModel model) { models_.push_back(std::move(model)); }
  const std::vector<InstructModel>& models() const noexcept { return models_; }

  ServedQuery serve(const Query& q, std::optional<DocId> relevant = std::nullopt) {
    auto res = cached_retrieve(cache_, *index_, q, k_);
    ServedQuery out;
    out.record.hit = res.hit;
    out.record.latency_ms = simulate_latency(res.hit, res.docs.size(), lsim_, lparams_);
    if (relevant) {
      for (std::size_t i = 0; i < res.docs.size(); ++i) {
        if (res.docs[i] == *relevant) {
          out.record.relevant_rank = i + 1;
          break;
        }
      }
    }
    out.docs = std::move(res.docs);
    return out;
  }

  std::string respond(const Query& q, const std::vector<DocId>& docs) const {
    std::vector<const Document*> ptrs;
    for (const auto id : docs)
      if (const auto* d = corpus_->find(id)) ptrs.push_back(d);
    return generate_response(models_, q, std::move(ptrs));
  }

  RetrievalCache& cache() noexcept { return cache_; }
  const RetrievalCache& cache() const noexcept { return cache_; }
  const InvertedIndex& index() const noexcept { return *index_; }
  const Corpus& corpus() const noexcept { return *corpus_; }
  std::size_t k() const noexcept { return k_; }
  const LatencyModelParams& latency_model() const noexcept { return lparams_; }

private:
  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<const InvertedIndex> index_;
  RetrievalCache cache_;
  std::size_t k_;
  LatencySimParams lsim_;
  LatencyModelParams lparams_;
  std::vector<InstructModel> models_;
};

/// Feeds a query stream through a pipeline one request at a time, keeping the
/// per-query log. Satisfies TunablePipeline.
class WorkloadRunner {
public:
  WorkloadRunner(RagPipeline& pipeline, std::span<const WorkloadQuery> pool, std::span<const std::size_t> stream)
      : pipeline_(&pipeline), pool_(pool), stream_(stream) {}

  std::optional<bool> serve_next() {
    if (pos_ == stream_.size()) return std::nullopt;
    const auto& wq = pool_[stream_[pos_++]];
    auto served = pipeline_->serve(wq.query, wq.relevant);
    log_.push_back(served.record);
    return served.record.hit;
  }

  RetrievalCache& cache() noexcept { return pipeline_->cache(); }
  const std::vector<QueryRecord>& log() const noexcept { return log_; }
  std::size_t position() const noexcept { return pos_; }
  void rewind() noexcept { pos_ = 0; }

private:
  RagPipeline* pipeline_;
  std::span<const WorkloadQuery> pool_;
  std::span<const std::size_t> stream_;
  std::size_t pos_ = 0;
  std::vector<QueryRecord> log_;
};

}  // namespace superrag
