// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [work_dir]
//
// Criteria 5-8 run the shipped toy configuration end to end for three seeds
// under work_dir.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cifar_fixture.hpp"
#include "dshgan/evaluation.hpp"
#include "dshgan/experiment.hpp"
#include "dshgan/gan.hpp"
#include "dshgan/retrieval.hpp"
#include "gradient_suite.hpp"
#include "model_oracles.hpp"
#include "pixel_classifier.hpp"
#include "retrieval_oracles.hpp"
#include "tiny_experiment.hpp"

namespace fs = std::filesystem;
using namespace dshgan;
using testing::CheckList;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void log(const std::string& s) { std::cerr << "[acceptance] " << s << std::endl; }

std::string first_failure(const CheckList& list) {
  for (const auto& c : list.checks())
    if (!c.ok) return c.name + " (" + c.detail + ")";
  return {};
}

// ---------------------------------------------------------------- 1-4

Verdict gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::size_t kNetworks = 24;
  // Networks whose difference stencil crosses a kink are replaced by the next
  // seed; central differences are no reference there.
  std::size_t checked = 0, checks = 0, failed = 0;
  double worst = 0.0;
  std::string where, skipped;
  for (std::uint64_t seed = 0; checked < kNetworks && seed < 2 * kNetworks; ++seed) {
    const auto suite = testing::run_gradient_suite(seed);
    if (std::any_of(suite.begin(), suite.end(), [](const auto& c) { return c.straddles_kink; })) {
      skipped += (skipped.empty() ? "" : ",") + std::to_string(seed);
      continue;
    }
    ++checked;
    for (const auto& c : suite) {
      ++checks;
      if (c.relative_error >= testing::kFdTolerance || c.gradient_norm <= 1e-8) {
        ++failed;
        where = c.name + " seed " + std::to_string(seed);
      }
      worst = std::max(worst, c.relative_error);
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = checked == kNetworks && failed == 0 && secs < 120.0;
  v.summary = std::to_string(checks) + " checks on " + std::to_string(checked) +
              " micro-networks, max relative error " + fmt("%.2e", worst) + ", " + fmt("%.1f s", secs);
  if (!skipped.empty()) v.summary += ", seeds " + skipped + " skipped (stencil crosses a kink)";
  if (failed) v.summary += ", " + std::to_string(failed) + " failed, e.g. " + where;
  return v;
}

CheckList oracle_checks(double* secs) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckList list;
  testing::loss_oracles(list);
  testing::gan_oracles(list);
  testing::hashmodel_oracles(list);
  testing::retrieval_oracles(list);
  testing::evaluation_oracles(list);
  testing::metric_brute_force(list, 200);
  *secs = seconds_since(t0);
  return list;
}

Verdict objective_identity() {
  CheckList list;
  testing::objective_identity(list, 100);
  return {list.failures() == 0, list.checks().front().detail + " over 100 random batches"};
}

Verdict retrieval_engine() {
  CheckList list;
  testing::retrieval_engine_suite(list, 500, 10000);
  Verdict v{list.failures() == 0, "500 search/lookup cases across K 12/24/32/48, 10000 metric triples"};
  if (!v.pass) v.summary += "; " + first_failure(list);
  return v;
}

// ---------------------------------------------------------------- toy runs

struct SeedRun {
  std::uint64_t seed = 0;
  ExperimentConfig cfg;
  double dsh_map = 0.0, lsh_map = 0.0, floor_map = 0.0;
  double sweep_zero = 0.0, sweep_one = 0.0;
  double generated_accuracy = 0.0, source_accuracy = 0.0, class_accuracy = 0.0;
  double first_objective = 0.0, last_objective = 0.0;
};

// MAP of uniformly random codes on the same queries and database.
double random_code_floor(const ExperimentData& data, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto random_code = [&] {
    std::vector<std::uint8_t> bits(k);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
    return HashCode::from_bits(bits);
  };
  constexpr int kDraws = 5;
  double sum = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    RetrievalIndex index(k);
    for (const ImageExample& ex : data.database.examples) index.add(ex.id, random_code(), evaluation_label(ex));
    std::vector<HashCode> codes;
    for (std::size_t i = 0; i < data.queries.size(); ++i) codes.push_back(random_code());
    sum += mean_average_precision(make_queries(data.queries, codes), index);
  }
  return sum / kDraws;
}

std::vector<double> objective_column(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    // step,triplet_loss,adversary_loss,classification_loss,cnn_objective,...
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) pos = line.find(',', pos) + 1;
    out.push_back(std::stod(line.substr(pos)));
  }
  return out;
}

SeedRun run_seed(std::uint64_t seed, const fs::path& work) {
  SeedRun r;
  r.seed = seed;
  r.cfg = load_experiment_config(DSHGAN_TOY_CONFIG);
  r.cfg.seed = seed;
  r.cfg.output_dir = (work / ("seed" + std::to_string(seed))).string();
  fs::remove_all(r.cfg.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  run_pipeline(r.cfg);
  log("seed " + std::to_string(seed) + " pipeline " + fmt("%.0f s", seconds_since(t0)));

  const std::size_t k = r.cfg.code_lengths.front();
  r.dsh_map = read_report(paths::model_dir(r.cfg, k) / "report").map;
  r.lsh_map = read_report(paths::lsh_dir(r.cfg, k) / "report").map;
  r.sweep_zero = read_report(paths::sweep_dir(r.cfg, 0.0, k) / "report").map;
  r.sweep_one = read_report(paths::sweep_dir(r.cfg, 1.0, k) / "report").map;
  const ExperimentData data = prepare_data(r.cfg);
  r.floor_map = random_code_floor(data, k, seed * 7919 + 1);

  const auto log_values = objective_column(paths::model_dir(r.cfg, k) / "train_log.csv");
  const std::size_t w = std::min<std::size_t>(100, log_values.size() / 2);
  for (std::size_t i = 0; i < w; ++i) {
    r.first_objective += log_values[i] / static_cast<double>(w);
    r.last_objective += log_values[log_values.size() - 1 - i] / static_cast<double>(w);
  }

  const GanState gan = gan_from_container(read_container(paths::gan_checkpoint(r.cfg)));
  // Independent judge trained on real database images only.
  const testing::PixelClassifier judge(data.database);
  std::mt19937_64 rng(seed + 17);
  Dataset fake = data.queries;
  const std::size_t c = data.queries.class_count;
  fake.examples.clear();
  for (std::size_t i = 0; i < 100 * c; ++i) {
    ImageExample ex = generate(gan, LabelVector::one_hot(c, i % c), sample_noise(gan.config.generator.noise_dim, rng));
    ex.true_label = ex.label;
    fake.examples.push_back(std::move(ex));
  }
  r.generated_accuracy = judge.accuracy(fake);
  r.source_accuracy = discriminator_source_accuracy(gan, data.queries, data.labeled, seed + 29);
  r.class_accuracy = discriminator_class_accuracy(gan, data.queries);
  log("seed " + std::to_string(seed) + ": dsh " + fmt("%.4f", r.dsh_map) + " lsh " + fmt("%.4f", r.lsh_map) +
      " floor " + fmt("%.4f", r.floor_map) + " sf0 " + fmt("%.4f", r.sweep_zero) + " sf1 " +
      fmt("%.4f", r.sweep_one) + " gen-acc " + fmt("%.3f", r.generated_accuracy) + " src-acc " +
      fmt("%.3f", r.source_accuracy) + " cls-acc " + fmt("%.3f", r.class_accuracy));
  return r;
}

Verdict ordering(const std::vector<SeedRun>& runs, double secs) {
  int good = 0;
  std::string detail;
  for (const SeedRun& r : runs) {
    const bool ok = r.dsh_map - r.lsh_map >= 0.10 && r.dsh_map - r.floor_map >= 0.25;
    good += ok ? 1 : 0;
    detail += " seed " + std::to_string(r.seed) + ": " + fmt("%.3f", r.dsh_map) + " vs lsh " +
              fmt("%.3f", r.lsh_map) + ", floor " + fmt("%.3f", r.floor_map) + (ok ? "" : " (miss)") + ";";
  }
  return {good >= 2 && secs < 1200.0,
          "model MAP beats LSH by >=0.10 and the random floor by >=0.25 in " + std::to_string(good) + "/3 seeds (" +
              fmt("%.0f s", secs) + ");" + detail};
}

Verdict fraction_trend(const std::vector<SeedRun>& runs) {
  int good = 0;
  std::string detail;
  for (const SeedRun& r : runs) {
    const bool ok = r.sweep_one >= r.sweep_zero - 0.03;
    good += ok ? 1 : 0;
    detail += " seed " + std::to_string(r.seed) + ": sf1 " + fmt("%.3f", r.sweep_one) + " vs sf0 " +
              fmt("%.3f", r.sweep_zero) + ";";
  }
  return {good >= 2, "MAP at fraction 1 within 0.03 of (or above) fraction 0 in " + std::to_string(good) + "/3 seeds;" +
                         detail};
}

Verdict gan_sanity(const std::vector<SeedRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const SeedRun& r : runs) {
    const double chance = 1.0 / static_cast<double>(r.cfg.dataset.class_count);
    const bool seed_ok = r.generated_accuracy >= 2.0 * chance && r.source_accuracy > 0.5 && r.source_accuracy < 1.0;
    ok = ok && seed_ok;
    detail += " seed " + std::to_string(r.seed) + ": generated-class accuracy " + fmt("%.3f", r.generated_accuracy) +
              ", source accuracy " + fmt("%.3f", r.source_accuracy) + ";";
  }
  return {ok, "judge accuracy >= 2x chance and source accuracy in (0.5, 1) on every seed;" + detail};
}

// ---------------------------------------------------------------- 8

Verdict format_fidelity(const std::vector<SeedRun>& runs, const fs::path& work) {
  std::vector<std::string> problems;
  const std::string fixture = testing::cifar_fixture();
  const fs::path cifar = work / "fixture_batch.bin";
  std::ofstream(cifar, std::ios::binary) << fixture;
  const Dataset loaded = load_cifar10(cifar);
  if (encode_cifar10(loaded) != fixture) problems.push_back("CIFAR fixture did not round-trip");
  if (loaded.size() != 2 || loaded.examples[0].label != LabelVector::one_hot(10, 3) ||
      loaded.examples[1].label != LabelVector::one_hot(10, 7) || loaded.examples[0].pixels[0] != -1.0 ||
      loaded.examples[0].pixels[1] != 1.0)
    problems.push_back("CIFAR fixture decoded wrongly");

  std::size_t code_files = 0;
  for (const SeedRun& r : runs)
    for (const auto& e : fs::recursive_directory_iterator(r.cfg.output_dir)) {
      if (e.path().extension() != ".bin") continue;
      const std::string bytes = testing::read_bytes(e.path());
      const RetrievalIndex index = decode_code_file(bytes);
      if (encode_code_file(index, r.cfg.dataset.class_count) != bytes) problems.push_back(e.path().string());
      ++code_files;
    }

  // Same-seed rerun of every stage but the sweep, compared file by file.
  const SeedRun& base = runs.front();
  ExperimentConfig again = base.cfg;
  again.output_dir = (work / "rerun").string();
  fs::remove_all(again.output_dir);
  for (Stage s : {Stage::kPretrainGan, Stage::kDumpSamples, Stage::kTrain, Stage::kIndex, Stage::kEncodeLsh, Stage::kEval})
    run_stage(again, s);
  std::size_t compared = 0;
  for (const auto& [rel, bytes] : testing::snapshot(again.output_dir)) {
    if (rel == "config.json") continue;  // records its own output_dir
    ++compared;
    if (testing::read_bytes(fs::path(base.cfg.output_dir) / rel) != bytes) problems.push_back("rerun differs: " + rel);
  }
  // The tiny pipeline, sweep included, run twice in place.
  const fs::path tiny = work / "tiny";
  fs::remove_all(tiny);
  run_pipeline(testing::tiny_experiment(tiny));
  const auto first = testing::snapshot(tiny);
  run_pipeline(testing::tiny_experiment(tiny));
  if (testing::snapshot(tiny) != first) problems.push_back("tiny pipeline rerun differs");

  Verdict v{problems.empty(), "CIFAR fixture bit-exact, " + std::to_string(code_files) +
                                  " code files re-encoded bit-exactly, rerun matched " + std::to_string(compared) +
                                  " files byte for byte"};
  if (!problems.empty()) v.summary += "; " + problems.front();
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "dshgan_acceptance";
  fs::create_directories(work);
  std::vector<Verdict> verdicts(8);
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Verdict{false, std::string("error: ") + e.what()};
    }
  };

  log("gradient suite");
  verdicts[0] = guarded(gradient_suite);
  log("oracles");
  double oracle_secs = 0.0;
  CheckList oracles;
  try {
    oracles = oracle_checks(&oracle_secs);
  } catch (const std::exception& e) {
    oracles.truth("oracle suites ran", false, e.what());
  }
  verdicts[2] = guarded(objective_identity);
  verdicts[3] = guarded(retrieval_engine);

  std::vector<SeedRun> runs;
  const auto t0 = std::chrono::steady_clock::now();
  std::string run_error;
  try {
    for (std::uint64_t seed : {1, 2, 3}) runs.push_back(run_seed(seed, work));
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  const double pipeline_secs = seconds_since(t0);

  // Oracles that need a pretrained GAN use the toy runs' checkpoints.
  for (const SeedRun& r : runs) {
    const std::string s = " (seed " + std::to_string(r.seed) + ")";
    const double chance = 1.0 / static_cast<double>(r.cfg.dataset.class_count);
    oracles.truth("pretrained discriminator beats chance on held-out labeled reals" + s, r.class_accuracy > chance,
                  fmt("%.3f", r.class_accuracy));
    oracles.truth("generated images carry their conditioning class above chance" + s, r.generated_accuracy > chance,
                  fmt("%.3f", r.generated_accuracy));
  }
  verdicts[1] = {oracles.failures() == 0 && oracle_secs < 60.0 && runs.size() == 3,
                 std::to_string(oracles.checks().size()) + " oracle checks including 200 brute-force metric instances, " +
                     fmt("%.1f s", oracle_secs) + " excluding GAN pretraining"};
  if (oracles.failures()) verdicts[1].summary += "; first failure: " + first_failure(oracles);

  if (runs.size() == 3) {
    verdicts[4] = ordering(runs, pipeline_secs);
    verdicts[5] = fraction_trend(runs);
    verdicts[6] = gan_sanity(runs);
    verdicts[7] = guarded([&] { return format_fidelity(runs, work); });
    for (const SeedRun& r : runs)
      log("seed " + std::to_string(r.seed) + " training objective, first 100 steps " + fmt("%.4f", r.first_objective) +
          ", last 100 " + fmt("%.4f", r.last_objective));
  } else {
    for (int i = 4; i < 8; ++i) verdicts[i] = {false, "toy runs failed: " + run_error};
  }

  const char* names[] = {"gradient suite",     "loss and metric oracles", "objective identity",
                         "retrieval engine",   "toy ordering vs LSH",     "synthetic fraction trend",
                         "GAN sanity",         "format fidelity"};
  int failures = 0;
  std::ostringstream lines;
  for (int i = 0; i < 8; ++i) {
    lines << (verdicts[i].pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << names[i]
          << "): " << verdicts[i].summary << "\n";
    failures += verdicts[i].pass ? 0 : 1;
  }
  lines << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  std::cout << lines.str() << std::flush;
  std::ofstream(work / "acceptance_summary.txt") << lines.str();
  return failures == 0 ? 0 : 1;
}
