#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "superrag/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"superrag: cache-tuned retrieval pipeline and simulator"};
  app.require_subcommand(1);

  std::string corpus_path;
  std::string index_out = "index.json";
  auto* index = app.add_subcommand("index", "Index a line-delimited JSON corpus");
  index->add_option("corpus", corpus_path, "Corpus file ({\"id\", \"text\"} per line)")->required();
  index->add_option("--out", index_out, "Where to write the index artifact");

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Integrate, tune and compare against a static cache");
  run->add_option("--config", config_path, "Run config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides out_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Workload seed (overrides workload.seed)");

  std::string formula_name;
  std::vector<std::string> formula_args;
  auto* formula = app.add_subcommand("formula", "Evaluate hit-ratio, latency-reduction, cache-size or im");
  formula->add_option("name", formula_name, "Formula name")->required();
  formula->add_option("args", formula_args, "Operands");
  formula->allow_extras(false);
  formula->positionals_at_end();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : superrag::cli::kInvalidInput;
  }

  if (*index) return superrag::cli::cmd_index(corpus_path, index_out, std::cout, std::cerr);
  if (*run) {
    superrag::cli::RunOverrides ov;
    if (*seed_opt) ov.seed = seed;
    if (!out_dir.empty()) ov.out_dir = out_dir;
    return superrag::cli::cmd_run(config_path, ov, std::cout, std::cerr);
  }
  return superrag::cli::cmd_formula(formula_name, formula_args, std::cout, std::cerr);
}
