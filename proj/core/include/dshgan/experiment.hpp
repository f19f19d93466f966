#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dshgan/datasets.hpp"
#include "dshgan/evaluation.hpp"
#include "dshgan/gan.hpp"
#include "dshgan/hashmodel.hpp"
#include "dshgan/trainer.hpp"

namespace dshgan {

inline constexpr const char* kDataRootEnv = "DSHGAN_DATA_ROOT";

struct DatasetSpec {
  std::string kind = "toy";  // "toy" or "cifar10"
  std::size_t class_count = 4;
  std::size_t per_class = 550;
  std::size_t image_size = 8;
  LabelMode label_mode = LabelMode::kSingle;
  // CIFAR-10 batch file or directory; relative paths resolve against the
  // data-root environment variable when it is set.
  std::string path;

  bool operator==(const DatasetSpec&) const = default;
};

struct SplitSpec {
  std::size_t labeled_per_class = 50;
  std::size_t queries_per_class = 50;
  bool exclude_queries_from_database = true;

  bool operator==(const SplitSpec&) const = default;
};

struct ExperimentConfig {
  // Every stage seed is derived from this one.
  std::uint64_t seed = 1;
  std::string output_dir = "runs/toy";
  DatasetSpec dataset;
  SplitSpec split;
  // image_shape, class_count and label_mode are taken from the dataset.
  GanConfig gan;
  bool gan_uses_unlabeled = true;
  TrunkConfig hash_trunk;
  bool transfer_from_discriminator = true;
  TrainConfig train;
  std::vector<std::size_t> code_lengths{12};
  EvalSpec eval;
  std::vector<double> synthetic_fractions{0.0, 0.5, 1.0};
  std::size_t samples_per_class = 8;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

enum class StageSeed : std::uint64_t { kDataset = 1, kSplit, kQueries, kGan, kHashInit, kTrain, kLsh, kSamples };
std::uint64_t stage_seed(std::uint64_t master, StageSeed stage);

struct ExperimentData {
  Dataset queries;
  Dataset labeled;
  Dataset unlabeled;
  Dataset database;
};

ExperimentData prepare_data(const ExperimentConfig& cfg);

// GAN config with the dataset-dependent fields filled in.
GanConfig resolved_gan_config(const ExperimentConfig& cfg, const Dataset& ds);
HashModelConfig hash_model_config(const ExperimentConfig& cfg, const Dataset& ds, std::size_t code_length);

enum class Stage { kPretrainGan, kTrain, kIndex, kEncodeLsh, kEval, kSweep, kReport, kDumpSamples };

std::string to_string(Stage stage);
std::optional<Stage> stage_from_string(const std::string& name);
// Order used by run_pipeline.
std::vector<Stage> all_stages();

namespace paths {
std::filesystem::path gan_checkpoint(const ExperimentConfig& cfg);
std::filesystem::path model_dir(const ExperimentConfig& cfg, std::size_t code_length);
std::filesystem::path lsh_dir(const ExperimentConfig& cfg, std::size_t code_length);
std::filesystem::path sweep_dir(const ExperimentConfig& cfg, double fraction, std::size_t code_length);
}  // namespace paths

// Trains one hashing model from the pretrained GAN, as the train and sweep
// stages do.
TrainResult train_hash_model(const ExperimentConfig& cfg, const ExperimentData& data, const GanState& gan,
                             std::size_t code_length, double synthetic_fraction);

void run_stage(const ExperimentConfig& cfg, Stage stage);
void run_pipeline(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string method;
  std::size_t code_length = 0;
  std::optional<double> synthetic_fraction;
  double map = 0.0;
  double lookup_precision = 0.0;
  double excellent_at_k = 0.0;
  std::filesystem::path source;
};

struct ReportSummary {
  std::vector<SummaryRow> rows;
  // Run directories holding codes but no evaluation report.
  std::vector<std::filesystem::path> missing;
};

// Collects every report under run_dir and writes summary.csv (one row per
// report) and map_table.csv (method rows, one MAP column per code length).
ReportSummary summarize_reports(const std::filesystem::path& run_dir);
std::string map_table_csv(const ReportSummary& summary);

}  // namespace dshgan
