// Experiment driver: dshgan <subcommand> --config FILE [--out DIR] [--seed N]
//
// Exit codes: 0 success, 1 configuration error, 2 stage failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dshgan/errors.hpp"
#include "dshgan/experiment.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kStageFailure = 2;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string stage;
};

int run(const std::string& command, const Options& opt) {
  dshgan::ExperimentConfig cfg;
  if (command == "report" && opt.config.empty()) {
    if (opt.out.empty()) {
      std::cerr << "report needs --out or --config\n";
      return kConfigError;
    }
  } else {
    try {
      cfg = dshgan::load_experiment_config(opt.config);
    } catch (const dshgan::Error& e) {
      std::cerr << e.what() << "\n";
      return kConfigError;
    }
  }
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.seed) cfg.seed = *opt.seed;

  std::vector<dshgan::Stage> stages;
  if (command == "run") {
    if (opt.stage.empty()) {
      stages = dshgan::all_stages();
    } else {
      const auto s = dshgan::stage_from_string(opt.stage);
      if (!s) {
        std::cerr << "unknown stage '" << opt.stage << "'\n";
        return kConfigError;
      }
      stages = {*s};
    }
  } else {
    stages = {*dshgan::stage_from_string(command)};
  }

  for (dshgan::Stage s : stages) {
    const std::string name = dshgan::to_string(s);
    try {
      std::cerr << "[" << name << "] start\n";
      if (s == dshgan::Stage::kReport) {
        const auto summary = dshgan::summarize_reports(cfg.output_dir);
        std::cout << dshgan::map_table_csv(summary);
        if (summary.rows.empty()) std::cerr << "warning: no evaluation reports under " << cfg.output_dir << "\n";
        for (const auto& dir : summary.missing)
          std::cerr << "warning: partial summary, no report for " << dir.string() << "\n";
      } else {
        dshgan::run_stage(cfg, s);
      }
      std::cerr << "[" << name << "] done\n";
    } catch (const dshgan::Error& e) {
      std::cerr << "stage " << name << " failed: " << e.what() << "\n";
      return e.kind() == dshgan::ErrorKind::kConfiguration ? kConfigError : kStageFailure;
    } catch (const std::exception& e) {
      std::cerr << "stage " << name << " failed: " << e.what() << "\n";
      return kStageFailure;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised GAN hashing experiments"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "run every stage (or one, with --stage)"},
      {"pretrain-gan", "pretrain the conditional GAN"},
      {"train", "train the hashing network for every code length"},
      {"index", "encode database and queries with the trained models"},
      {"encode-lsh", "fit and apply the random-projection baseline"},
      {"eval", "evaluate all code files and write reports"},
      {"sweep", "train and evaluate across synthetic triplet fractions"},
      {"report", "aggregate reports into summary tables"},
      {"dump-samples", "write per-class grids of generated images"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment config (JSON)")
        ->check(CLI::ExistingFile)
        ->required(name != "report");
    sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "master seed (overrides seed)");
    if (name == "run") sub->add_option("--stage", opt.stage, "run only this stage");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) opt.seed = seed;
  return run(chosen->get_name(), opt);
}
