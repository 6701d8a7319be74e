#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "superrag/retrieval.hpp"
#include "superrag/workload.hpp"

using namespace superrag;

namespace {
std::vector<std::string> V(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

std::vector<Document> random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const auto len = 1 + rng() % 12;
    for (std::size_t w = 0; w < len; ++w) text += "t" + std::to_string(rng() % vocab) + " ";
    docs.push_back(Document::from_text(i * 3 + rng() % 3, text));
  }
  return docs;
}
}  // namespace

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize("Cache-Tuning, FORK!"), V({"cache", "tuning", "fork"}));
  EXPECT_TRUE(normalize("").empty());
  EXPECT_EQ(normalize("a a B"), V({"a", "a", "b"}));
  EXPECT_EQ(normalize("  x9--Y  "), V({"x9", "y"}));
}

TEST(Normalize, IdempotentOnJoinedOutput) {
  for (const char* s : {"Hello, World!!", "ÄÖ mixed 123 bytes", "a-b_c.d", ""}) {
    const auto once = normalize(s);
    EXPECT_EQ(normalize(join(once)), once);
  }
}

TEST(Fingerprint, PublishedVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(Query::from_text("Tuning fork, cache!").fingerprint.value, 0xbac2cc2de4678ae0ULL);
}

TEST(Fingerprint, OrderInsensitiveMultiplicitySensitive) {
  EXPECT_EQ(Query::from_text("cache fork").fingerprint, Query::from_text("FORK -- cache").fingerprint);
  EXPECT_NE(Query::from_text("cache cache fork").fingerprint, Query::from_text("cache fork").fingerprint);
}

TEST(IndexCorpus, Empty) {
  const auto idx = index_corpus({});
  EXPECT_EQ(idx.doc_count(), 0u);
  EXPECT_TRUE(idx.postings().empty());
  EXPECT_TRUE(retrieve_topk(idx, Query::from_text("anything"), 5).empty());
}

TEST(IndexCorpus, SingleDoc) {
  const auto idx = index_corpus({Document::from_text(0, "alpha beta")});
  ASSERT_EQ(idx.postings().size(), 2u);
  EXPECT_EQ(idx.postings().at("alpha"), (std::vector<Posting>{{0, 1}}));
  EXPECT_EQ(idx.postings().at("beta"), (std::vector<Posting>{{0, 1}}));
}

TEST(IndexCorpus, DuplicateId) {
  EXPECT_THROW(index_corpus({Document::from_text(1, "a"), Document::from_text(1, "b")}), duplicate_doc_id);
}

TEST(IndexCorpus, NormsMatchPostings) {
  std::mt19937_64 rng(8);
  const auto docs = random_corpus(rng, 40, 30);
  const auto idx = index_corpus(docs);
  for (const auto& d : docs) {
    double sq = 0.0;
    for (const auto& [term, list] : idx.postings()) {
      for (const auto& p : list)
        if (p.doc == d.id) sq += std::pow(p.tf * idx.idf(term), 2);
    }
    EXPECT_NEAR(idx.norm(d.id), std::sqrt(sq), 1e-12);
  }
}

TEST(RetrieveTopk, NoOverlap) {
  const auto idx = index_corpus({Document::from_text(0, "alpha beta")});
  EXPECT_TRUE(retrieve_topk(idx, Query::from_text("gamma"), 5).empty());
}

TEST(RetrieveTopk, SingleDocRanksFirst) {
  const auto idx = index_corpus({Document::from_text(7, "alpha beta gamma")});
  const auto r = retrieve_topk(idx, Query::from_text("gamma alpha"), 5);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].doc, 7u);
  EXPECT_NEAR(r[0].score, 2.0 / std::sqrt(6.0), 1e-12);  // equal idf everywhere
}

TEST(RetrieveTopk, TiesBrokenByAscendingId) {
  const auto idx = index_corpus(
      {Document::from_text(9, "same words"), Document::from_text(2, "same words"), Document::from_text(5, "other")});
  const auto r = retrieve_topk(idx, Query::from_text("same"), 5);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].doc, 2u);
  EXPECT_EQ(r[1].doc, 9u);
  EXPECT_EQ(r[0].score, r[1].score);
}

TEST(RetrieveTopk, MatchesBruteForceScan) {
  std::mt19937_64 rng(50);
  for (int corpus = 0; corpus < 20; ++corpus) {
    const auto docs = random_corpus(rng, 50, 25);
    const auto idx = index_corpus(docs);
    for (int q = 0; q < 20; ++q) {
      std::string text;
      for (std::size_t i = 0; i < 1 + rng() % 4; ++i) text += "t" + std::to_string(rng() % 30) + " ";
      const auto query = Query::from_text(text);
      const std::size_t k = 1 + rng() % 8;
      const auto got = retrieve_topk(idx, query, k);
      const auto want = oracle::brute_force_topk(docs, query.terms, k);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_EQ(got[i].doc, want[i].doc);
        ASSERT_EQ(got[i].score, want[i].score);
      }
    }
  }
}

TEST(RetrieveTopk, ScoresInUnitIntervalAndScaleInvariant) {
  std::mt19937_64 rng(12);
  for (int corpus = 0; corpus < 10; ++corpus) {
    const auto docs = random_corpus(rng, 60, 20);
    const auto idx = index_corpus(docs);
    for (int q = 0; q < 20; ++q) {
      std::vector<std::string> terms;
      for (std::size_t i = 0; i < 1 + rng() % 4; ++i) terms.push_back("t" + std::to_string(rng() % 20));
      const auto base = idx.top_k(terms, 10);
      std::vector<std::string> scaled;
      for (int c = 0; c < 3; ++c) scaled.insert(scaled.end(), terms.begin(), terms.end());
      const auto triple = idx.top_k(scaled, 10);
      ASSERT_EQ(base.size(), triple.size());
      for (std::size_t i = 0; i < base.size(); ++i) {
        ASSERT_GT(base[i].score, 0.0);
        ASSERT_LE(base[i].score, 1.0 + 1e-12);
        ASSERT_EQ(base[i].doc, triple[i].doc);
      }
    }
  }
}

TEST(CachedRetrieve, RepeatIsHit) {
  const std::vector<Document> docs{Document::from_text(0, "alpha beta"), Document::from_text(1, "beta gamma")};
  const auto idx = index_corpus(docs);
  RetrievalCache cache(8);
  const auto first = cached_retrieve(cache, idx, Query::from_text("beta gamma"));
  EXPECT_FALSE(first.hit);
  const auto second = cached_retrieve(cache, idx, Query::from_text("beta gamma"));
  EXPECT_TRUE(second.hit);
  EXPECT_EQ(first.docs, second.docs);
  EXPECT_TRUE(cached_retrieve(cache, idx, Query::from_text("Gamma, BETA")).hit);
}

TEST(CachedRetrieve, EmptyResultIsNotCached) {
  const auto idx = index_corpus({Document::from_text(0, "alpha")});
  RetrievalCache cache(8);
  EXPECT_FALSE(cached_retrieve(cache, idx, Query::from_text("zzz")).hit);
  EXPECT_FALSE(cached_retrieve(cache, idx, Query::from_text("zzz")).hit);
  EXPECT_EQ(cache.size(), 0u);
}

// The pipeline against LRU oracle + brute-force scorer composed by hand.
TEST(CachedRetrieve, ZipfTraceMatchesComposedOracle) {
  const auto docs = synthetic_corpus({300, 800, 3, 6, 0.8}, 3);
  const auto pool = make_query_pool(docs, 200, 3, 3);
  const auto stream = generate_workload({1000, 1.0, 200, 3}, pool);
  const auto idx = index_corpus(docs);
  RetrievalCache cache(24);
  RetrievalCache uncached(0);
  oracle::BruteLru<std::uint64_t, std::vector<DocId>> ref(24);
  for (const auto i : stream) {
    const auto& q = pool[i].query;
    const auto got = cached_retrieve(cache, idx, q);
    bool hit = false;
    std::vector<DocId> want;
    if (auto v = ref.lookup(q.fingerprint.value)) {
      hit = true;
      want = *v;
    } else {
      for (const auto& s : oracle::brute_force_topk(docs, q.terms, 5)) want.push_back(s.doc);
      if (!want.empty()) ref.insert(q.fingerprint.value, want);
    }
    ASSERT_EQ(got.hit, hit);
    ASSERT_EQ(got.docs, want);
    // transparency: same ids with the cache effectively disabled
    ASSERT_EQ(cached_retrieve(uncached, idx, q).docs, got.docs);
  }
}

TEST(CorpusJsonl, ParsesAndReportsLines) {
  std::istringstream ok("{\"id\": 3, \"text\": \"Hello there\"}\n\n{\"id\": 1, \"text\": \"x\"}\n");
  const auto docs = read_corpus_jsonl(ok);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, 3u);
  EXPECT_EQ(docs[0].terms, V({"hello", "there"}));

  std::istringstream dup("{\"id\": 1, \"text\": \"a\"}\n{\"id\": 1, \"text\": \"b\"}\n");
  try {
    read_corpus_jsonl(dup);
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream bad("{\"id\": -1, \"text\": \"a\"}\n");
  EXPECT_THROW(read_corpus_jsonl(bad), parse_error);
  std::istringstream junk("not json\n");
  EXPECT_THROW(read_corpus_jsonl(junk), parse_error);
}
