#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "superrag/cli.hpp"

using namespace superrag;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("superrag_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small but complete run config.
std::string small_config(const std::string& extra_thresholds = "") {
  return R"({
    "out_dir": "out",
    "workload": {"n_queries": 2000, "zipf_s": 1.0, "distinct_queries": 200, "seed": 42,
                 "query_terms": 4, "warmup_queries": 1000, "eval_size": 50},
    "synthetic_corpus": {"documents": 300, "vocabulary": 800, "sentences_per_doc": 3,
                         "words_per_sentence": 6, "word_zipf_s": 0.8},
    "tuning": {"alpha": 0.5, "target": 0.85, "s_min": 16, "s_max": 4096, "epoch_len": 250,
               "window": 250, "initial_capacity": 32},
    "max_adjust_iterations": 3,
    "thresholds": {"min_hit_ratio": 0.0, "max_mean_latency_ms": null, "min_precision_at_1": 0.0)" +
         extra_thresholds + R"(}
  })";
}

}  // namespace

TEST(CmdIndex, IndexesValidCorpus) {
  const auto dir = temp_dir("index_ok");
  write(dir / "c.jsonl", "{\"id\":1,\"text\":\"alpha beta\"}\n{\"id\":2,\"text\":\"beta\"}\n{\"id\":3,\"text\":\"c\"}\n");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_index(dir / "c.jsonl", dir / "idx.json", out, err), 0);
  EXPECT_EQ(out.str(), "indexed 3 documents\n");
  const auto j = nlohmann::json::parse(read(dir / "idx.json"));
  EXPECT_EQ(j["doc_count"], 3);
  EXPECT_EQ(j["postings"]["beta"].size(), 2u);
}

TEST(CmdIndex, DuplicateIdNamesLine) {
  const auto dir = temp_dir("index_dup");
  write(dir / "c.jsonl", "{\"id\":1,\"text\":\"a\"}\n{\"id\":1,\"text\":\"b\"}\n");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_index(dir / "c.jsonl", dir / "idx.json", out, err), 1);
  EXPECT_NE(err.str().find("line 2"), std::string::npos) << err.str();
}

TEST(CmdIndex, MissingFile) {
  const auto dir = temp_dir("index_missing");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_index(dir / "nope.jsonl", dir / "idx.json", out, err), 2);
}

TEST(CmdFormula, Values) {
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_formula("cache-size", {"100", "0.5", "0.85", "0.70"}, out, err), 0);
  EXPECT_NEAR(std::stod(out.str()), 107.5, 1e-12);
  EXPECT_EQ(out.str(), "107.5\n");
  out.str("");
  ASSERT_EQ(cli::cmd_formula("latency-reduction", {"100", "0.1", "100"}, out, err), 0);
  EXPECT_EQ(out.str(), "0.5\n");
  out.str("");
  ASSERT_EQ(cli::cmd_formula("im", {"1", "1", "1", "1", "10", "10", "1", "1"}, out, err), 0);
  EXPECT_EQ(std::stod(out.str()), 1.0);
  out.str("");
  ASSERT_EQ(cli::cmd_formula("hit-ratio", {"17", "20"}, out, err), 0);
  EXPECT_EQ(out.str(), "0.85\n");
  out.str("");
  ASSERT_EQ(cli::cmd_formula("latency-reduction", {"200", "0.05", "100"}, out, err), 0);
  EXPECT_EQ(out.str(), "0.993307149076\n");
}

TEST(CmdFormula, Errors) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_formula("cache-size", {"100", "0.5"}, out, err), 1);
  EXPECT_NE(err.str().find("4 arguments"), std::string::npos);
  err.str("");
  EXPECT_EQ(cli::cmd_formula("im", {"1", "1", "0", "1", "10", "10", "1", "1"}, out, err), 1);
  EXPECT_NE(err.str().find("gamma_im"), std::string::npos);
  err.str("");
  EXPECT_EQ(cli::cmd_formula("hit-ratio", {"3", "0"}, out, err), 1);
  EXPECT_NE(err.str().find("HITS must be <= TOTAL"), std::string::npos);
  EXPECT_EQ(cli::cmd_formula("hit-ratio", {"0", "0"}, out, err), 1);
  EXPECT_EQ(cli::cmd_formula("bogus", {}, out, err), 1);
  EXPECT_EQ(cli::cmd_formula("cache-size", {"100", "x", "0.85", "0.70"}, out, err), 1);
  EXPECT_TRUE(out.str().empty());
}

TEST(RunConfig, RejectsUnknownKeys) {
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"tuning": {"alpah": 1}})")), invalid_config);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"extra": 1})")), invalid_config);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"tuning": {"s_min": -3}})")), invalid_config);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"tuning": {"alpha": "x"}})")), invalid_config);
  const auto c = parse_run_config(nlohmann::json::parse(R"({"thresholds": {"max_mean_latency_ms": null}})"));
  EXPECT_TRUE(std::isinf(c.system.thresholds.max_mean_latency_ms));
  const auto d = parse_run_config(nlohmann::json::object());
  EXPECT_EQ(d.system, SystemConfig{});
  EXPECT_EQ(d.workload, WorkloadSpec{});
}

TEST(CmdRun, FixtureWritesOutputs) {
  const auto dir = temp_dir("run_ok");
  write(dir / "cfg.json", small_config());
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(dir / "cfg.json", {}, out, err), 0) << err.str();
  for (const char* f : {"manifest.json", "decisions.jsonl", "report.csv", "report.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const auto manifest = nlohmann::json::parse(read(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["status"], "deployed");
  EXPECT_EQ(manifest["iteration_count"], 1);
  std::istringstream decisions(read(dir / "out" / "decisions.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(decisions, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.size(), 5u);
    ++n;
  }
  EXPECT_EQ(n, 8);
}

TEST(CmdRun, UnsatisfiableExitsThree) {
  const auto dir = temp_dir("run_fail");
  auto cfg = nlohmann::json::parse(small_config());
  cfg["thresholds"]["min_hit_ratio"] = 1.01;
  write(dir / "cfg.json", cfg.dump());
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_run(dir / "cfg.json", {}, out, err), 3);
  const auto manifest = nlohmann::json::parse(read(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["status"], "integration_failed");
  EXPECT_EQ(manifest["iteration_count"], 3);
  EXPECT_FALSE(fs::exists(dir / "out" / "report.csv"));
}

TEST(CmdRun, InvalidTargetExitsOne) {
  const auto dir = temp_dir("run_bad_t");
  auto cfg = nlohmann::json::parse(small_config());
  cfg["tuning"]["target"] = 1.5;
  write(dir / "cfg.json", cfg.dump());
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_run(dir / "cfg.json", {}, out, err), 1);
  EXPECT_NE(err.str().find("T"), std::string::npos);
  EXPECT_NE(err.str().find("invalid config: T"), std::string::npos) << err.str();
}

TEST(CmdRun, MissingConfigExitsTwo) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_run("/nonexistent/cfg.json", {}, out, err), 2);
}

TEST(CmdRun, SeedAndOutOverrides) {
  const auto dir = temp_dir("run_seed");
  write(dir / "cfg.json", small_config());
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(dir / "cfg.json", {7, dir / "a"}, out, err), 0) << err.str();
  ASSERT_EQ(cli::cmd_run(dir / "cfg.json", {8, dir / "b"}, out, err), 0) << err.str();
  EXPECT_NE(read(dir / "a" / "report.json"), read(dir / "b" / "report.json"));
  const auto manifest = nlohmann::json::parse(read(dir / "a" / "manifest.json"));
  EXPECT_EQ(manifest["config"]["workload"]["seed"], 7);
}

TEST(CmdRun, ExternalCorpusAndDatasets) {
  const auto dir = temp_dir("run_files");
  std::string corpus;
  const auto docs = synthetic_corpus({300, 800, 3, 6, 0.8}, 1);
  for (const auto& d : docs) corpus += nlohmann::json{{"id", d.id}, {"text", d.text}}.dump() + "\n";
  write(dir / "corpus.jsonl", corpus);
  write(dir / "instruct.jsonl", "{\"instruction\": \"hello\", \"response\": \"hi\"}\n");
  write(dir / "eval.jsonl", "{\"query\": \"" + docs[3].text + "\", \"relevant_doc_id\": 3}\n");
  auto cfg = nlohmann::json::parse(small_config());
  cfg.erase("synthetic_corpus");
  cfg["corpus_path"] = "corpus.jsonl";
  cfg["instruct_path"] = "instruct.jsonl";
  cfg["eval_path"] = "eval.jsonl";
  write(dir / "cfg.json", cfg.dump());
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(dir / "cfg.json", {}, out, err), 0) << err.str();
  const auto manifest = nlohmann::json::parse(read(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["iterations"][0]["report"]["precision_at_1"], 1.0);
}
