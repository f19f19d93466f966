#include "dshgan/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>

#include <json.hpp>

#include "binary_io.hpp"
#include "dshgan/errors.hpp"
#include "dshgan/image_io.hpp"
#include "dshgan/lsh.hpp"
#include "dshgan/retrieval.hpp"
#include "json_config.hpp"

namespace dshgan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
void read_unsigned(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  require(j.at(key).is_number_unsigned(), ErrorKind::kConfiguration,
          where + "." + key + " must be a non-negative integer");
  out = j.at(key).get<T>();
}

void read_bool(const json& j, const char* key, bool& out, const std::string& where) {
  if (!j.contains(key)) return;
  require(j.at(key).is_boolean(), ErrorKind::kConfiguration, where + "." + key + " must be a boolean");
  out = j.at(key).get<bool>();
}

void read_string(const json& j, const char* key, std::string& out, const std::string& where) {
  if (!j.contains(key)) return;
  require(j.at(key).is_string(), ErrorKind::kConfiguration, where + "." + key + " must be a string");
  out = j.at(key).get<std::string>();
}

std::vector<std::size_t> read_size_list(const json& j, const std::string& where) {
  require(j.is_array(), ErrorKind::kConfiguration, where + " must be a list");
  std::vector<std::size_t> out;
  for (const json& v : j) {
    require(v.is_number_unsigned(), ErrorKind::kConfiguration, where + " entries must be non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::string fraction_tag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sf%.2f", f);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json j = json::parse(json_text, nullptr, false);
  require(!j.is_discarded(), ErrorKind::kConfiguration, "config is not valid JSON");
  detail::check_keys(j,
                     {"seed", "output_dir", "dataset", "split", "gan", "gan_uses_unlabeled", "hash_trunk",
                      "transfer_from_discriminator", "train", "code_lengths", "eval", "synthetic_fractions",
                      "samples_per_class"},
                     "");
  ExperimentConfig cfg;
  read_unsigned(j, "seed", cfg.seed, "config");
  read_string(j, "output_dir", cfg.output_dir, "config");

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    detail::check_keys(d, {"kind", "class_count", "per_class", "image_size", "label_mode", "path"}, "dataset");
    read_string(d, "kind", cfg.dataset.kind, "dataset");
    read_unsigned(d, "class_count", cfg.dataset.class_count, "dataset");
    read_unsigned(d, "per_class", cfg.dataset.per_class, "dataset");
    read_unsigned(d, "image_size", cfg.dataset.image_size, "dataset");
    if (d.contains("label_mode")) {
      std::string mode;
      read_string(d, "label_mode", mode, "dataset");
      cfg.dataset.label_mode = detail::label_mode_from_string(mode);
    }
    read_string(d, "path", cfg.dataset.path, "dataset");
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    detail::check_keys(s, {"labeled_per_class", "queries_per_class", "exclude_queries_from_database"}, "split");
    read_unsigned(s, "labeled_per_class", cfg.split.labeled_per_class, "split");
    read_unsigned(s, "queries_per_class", cfg.split.queries_per_class, "split");
    read_bool(s, "exclude_queries_from_database", cfg.split.exclude_queries_from_database, "split");
  }
  if (j.contains("gan")) cfg.gan = detail::gan_from_json(j.at("gan"), cfg.gan, "gan");
  read_bool(j, "gan_uses_unlabeled", cfg.gan_uses_unlabeled, "config");
  if (j.contains("hash_trunk")) cfg.hash_trunk = detail::trunk_from_json(j.at("hash_trunk"), cfg.hash_trunk, "hash_trunk");
  read_bool(j, "transfer_from_discriminator", cfg.transfer_from_discriminator, "config");
  if (j.contains("train")) cfg.train = detail::train_from_json(j.at("train"), cfg.train, "train");
  if (j.contains("code_lengths")) cfg.code_lengths = read_size_list(j.at("code_lengths"), "code_lengths");
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    detail::check_keys(e, {"radius", "top_n", "ks", "excellent_k"}, "eval");
    read_unsigned(e, "radius", cfg.eval.radius, "eval");
    if (e.contains("top_n") && !e.at("top_n").is_null()) {
      std::size_t n = 0;
      read_unsigned(e, "top_n", n, "eval");
      cfg.eval.top_n = n;
    }
    if (e.contains("ks")) cfg.eval.ks = read_size_list(e.at("ks"), "eval.ks");
    read_unsigned(e, "excellent_k", cfg.eval.excellent_k, "eval");
  }
  if (j.contains("synthetic_fractions")) {
    const json& f = j.at("synthetic_fractions");
    require(f.is_array(), ErrorKind::kConfiguration, "synthetic_fractions must be a list");
    cfg.synthetic_fractions.clear();
    for (const json& v : f) {
      require(v.is_number(), ErrorKind::kConfiguration, "synthetic_fractions entries must be numbers");
      cfg.synthetic_fractions.push_back(v.get<double>());
    }
  }
  read_unsigned(j, "samples_per_class", cfg.samples_per_class, "config");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::string text;
  try {
    text = detail::read_file_bytes(path.string());
  } catch (const Error& e) {
    fail(ErrorKind::kConfiguration, "cannot read config " + path.string() + ": " + e.what());
  }
  return parse_experiment_config(text);
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["dataset"] = {{"kind", cfg.dataset.kind},
                  {"class_count", cfg.dataset.class_count},
                  {"per_class", cfg.dataset.per_class},
                  {"image_size", cfg.dataset.image_size},
                  {"label_mode", detail::to_string(cfg.dataset.label_mode)},
                  {"path", cfg.dataset.path}};
  j["split"] = {{"labeled_per_class", cfg.split.labeled_per_class},
                {"queries_per_class", cfg.split.queries_per_class},
                {"exclude_queries_from_database", cfg.split.exclude_queries_from_database}};
  j["gan"] = detail::to_json(cfg.gan);
  j["gan_uses_unlabeled"] = cfg.gan_uses_unlabeled;
  j["hash_trunk"] = detail::to_json(cfg.hash_trunk);
  j["transfer_from_discriminator"] = cfg.transfer_from_discriminator;
  j["train"] = detail::to_json(cfg.train);
  j["code_lengths"] = cfg.code_lengths;
  j["eval"] = {{"radius", cfg.eval.radius},
               {"top_n", cfg.eval.top_n ? json(*cfg.eval.top_n) : json(nullptr)},
               {"ks", cfg.eval.ks},
               {"excellent_k", cfg.eval.excellent_k}};
  j["synthetic_fractions"] = cfg.synthetic_fractions;
  j["samples_per_class"] = cfg.samples_per_class;
  return j.dump(2) + "\n";
}

void validate(const ExperimentConfig& cfg) {
  require(cfg.dataset.kind == "toy" || cfg.dataset.kind == "cifar10", ErrorKind::kConfiguration,
          "dataset.kind must be 'toy' or 'cifar10', got '" + cfg.dataset.kind + "'");
  require(cfg.dataset.kind != "cifar10" || !cfg.dataset.path.empty(), ErrorKind::kConfiguration,
          "dataset.path is required for cifar10");
  require(!cfg.code_lengths.empty(), ErrorKind::kConfiguration, "code_lengths must not be empty");
  for (std::size_t k : cfg.code_lengths)
    require(k >= 1, ErrorKind::kConfiguration, "code_lengths entries must be at least 1");
  for (double f : cfg.synthetic_fractions)
    require(f >= 0.0 && f <= 1.0, ErrorKind::kConfiguration, "synthetic_fractions entries must lie in [0, 1]");
  require(!cfg.output_dir.empty(), ErrorKind::kConfiguration, "output_dir must not be empty");
  validate(cfg.train);
}

std::uint64_t stage_seed(std::uint64_t master, StageSeed stage) {
  // splitmix64 finalizer over (master, stage)
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stage) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ExperimentData prepare_data(const ExperimentConfig& cfg) {
  Dataset all;
  if (cfg.dataset.kind == "toy") {
    all = make_toy_dataset(cfg.dataset.class_count, cfg.dataset.per_class, cfg.dataset.image_size,
                           cfg.dataset.label_mode, stage_seed(cfg.seed, StageSeed::kDataset));
  } else {
    fs::path p = cfg.dataset.path;
    if (p.is_relative()) {
      if (const char* root = std::getenv(kDataRootEnv)) p = fs::path(root) / p;
    }
    all = load_cifar10(p);
  }
  ExperimentData data;
  Split q = split_queries(all, cfg.split.queries_per_class, stage_seed(cfg.seed, StageSeed::kQueries));
  data.queries = std::move(q.first);
  Split s = split_supervised(q.second, cfg.split.labeled_per_class, stage_seed(cfg.seed, StageSeed::kSplit));
  data.labeled = std::move(s.first);
  data.unlabeled = std::move(s.second);
  data.database = merge(data.labeled, data.unlabeled);
  if (!cfg.split.exclude_queries_from_database) data.database = merge(data.database, data.queries);
  return data;
}

GanConfig resolved_gan_config(const ExperimentConfig& cfg, const Dataset& ds) {
  GanConfig g = cfg.gan;
  g.image_shape = ds.image_shape;
  g.class_count = ds.class_count;
  g.label_mode = ds.label_mode;
  return g;
}

HashModelConfig hash_model_config(const ExperimentConfig& cfg, const Dataset& ds, std::size_t code_length) {
  HashModelConfig h;
  h.image_shape = ds.image_shape;
  h.class_count = ds.class_count;
  h.label_mode = ds.label_mode;
  h.code_length = code_length;
  h.trunk = cfg.hash_trunk;
  return h;
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::kPretrainGan: return "pretrain-gan";
    case Stage::kTrain: return "train";
    case Stage::kIndex: return "index";
    case Stage::kEncodeLsh: return "encode-lsh";
    case Stage::kEval: return "eval";
    case Stage::kSweep: return "sweep";
    case Stage::kReport: return "report";
    case Stage::kDumpSamples: return "dump-samples";
  }
  return "unknown";
}

std::vector<Stage> all_stages() {
  return {Stage::kPretrainGan, Stage::kDumpSamples, Stage::kTrain, Stage::kIndex,
          Stage::kEncodeLsh,   Stage::kEval,        Stage::kSweep, Stage::kReport};
}

std::optional<Stage> stage_from_string(const std::string& name) {
  for (Stage s : all_stages())
    if (to_string(s) == name) return s;
  return std::nullopt;
}

namespace paths {
fs::path gan_checkpoint(const ExperimentConfig& cfg) { return fs::path(cfg.output_dir) / "gan" / "gan.dshg"; }
fs::path model_dir(const ExperimentConfig& cfg, std::size_t k) {
  return fs::path(cfg.output_dir) / "dshgan" / ("K" + std::to_string(k));
}
fs::path lsh_dir(const ExperimentConfig& cfg, std::size_t k) {
  return fs::path(cfg.output_dir) / "lsh" / ("K" + std::to_string(k));
}
fs::path sweep_dir(const ExperimentConfig& cfg, double fraction, std::size_t k) {
  return fs::path(cfg.output_dir) / "sweep" / fraction_tag(fraction) / ("K" + std::to_string(k));
}
}  // namespace paths

namespace {

GanState load_gan(const ExperimentConfig& cfg) {
  const fs::path p = paths::gan_checkpoint(cfg);
  require(fs::exists(p), ErrorKind::kIo, "missing GAN checkpoint " + p.string() + " (run pretrain-gan first)");
  return gan_from_container(read_container(p));
}

std::string gan_log_csv(const std::vector<GanLogEntry>& log) {
  std::string out = "step,d_adversarial,d_classification,g_objective\n";
  for (const auto& e : log)
    out += std::to_string(e.step) + "," + num(e.d_adversarial) + "," + num(e.d_classification) + "," +
           num(e.g_objective) + "\n";
  return out;
}

void stage_pretrain(const ExperimentConfig& cfg, const ExperimentData& data) {
  const GanConfig g = resolved_gan_config(cfg, data.labeled);
  Dataset unlabeled = cfg.gan_uses_unlabeled ? data.unlabeled : Dataset{};
  if (!cfg.gan_uses_unlabeled) {
    unlabeled.class_count = data.labeled.class_count;
    unlabeled.label_mode = data.labeled.label_mode;
    unlabeled.image_shape = data.labeled.image_shape;
  }
  std::vector<GanLogEntry> log;
  const GanState gan = pretrain_gan(data.labeled, unlabeled, g, stage_seed(cfg.seed, StageSeed::kGan), &log);
  fs::create_directories(paths::gan_checkpoint(cfg).parent_path());
  write_container(to_container(gan), paths::gan_checkpoint(cfg));
  detail::write_file_bytes((paths::gan_checkpoint(cfg).parent_path() / "gan_log.csv").string(), gan_log_csv(log));
}

void write_model_outputs(const fs::path& dir, const TrainResult& result, const ExperimentData& data,
                         std::size_t class_count) {
  fs::create_directories(dir);
  write_container(to_container(result.model), dir / "model.dshg");
  write_training_log_csv(result.log, dir / "train_log.csv");
  write_code_file(build_index(data.database, result.model), class_count, dir / "codes_db.bin");
  RetrievalIndex queries(result.model.config.code_length);
  const std::vector<HashCode> codes = encode_dataset(data.queries, result.model);
  for (std::size_t i = 0; i < data.queries.size(); ++i)
    queries.add(data.queries.examples[i].id, codes[i], data.queries.examples[i].label);
  write_code_file(queries, class_count, dir / "codes_query.bin");
}

EvalReport evaluate_code_files(const fs::path& dir, const EvalSpec& spec, const std::string& method) {
  const RetrievalIndex db = read_code_file(dir / "codes_db.bin");
  const RetrievalIndex q = read_code_file(dir / "codes_query.bin");
  std::vector<Query> queries;
  for (const IndexEntry& e : q.entries()) queries.push_back({e.id, e.code, e.label});
  return evaluate(queries, db, spec, method);
}

void stage_train(const ExperimentConfig& cfg, const ExperimentData& data) {
  const GanState gan = load_gan(cfg);
  for (std::size_t k : cfg.code_lengths) {
    const TrainResult r = train_hash_model(cfg, data, gan, k, cfg.train.synthetic_fraction);
    fs::create_directories(paths::model_dir(cfg, k));
    write_container(to_container(r.model), paths::model_dir(cfg, k) / "model.dshg");
    write_training_log_csv(r.log, paths::model_dir(cfg, k) / "train_log.csv");
  }
}

void stage_index(const ExperimentConfig& cfg, const ExperimentData& data) {
  for (std::size_t k : cfg.code_lengths) {
    const fs::path dir = paths::model_dir(cfg, k);
    require(fs::exists(dir / "model.dshg"), ErrorKind::kIo,
            "missing model checkpoint in " + dir.string() + " (run train first)");
    TrainResult r;
    r.model = hash_model_from_container(read_container(dir / "model.dshg"));
    fs::create_directories(dir);
    write_code_file(build_index(data.database, r.model), data.database.class_count, dir / "codes_db.bin");
    RetrievalIndex queries(k);
    const std::vector<HashCode> codes = encode_dataset(data.queries, r.model);
    for (std::size_t i = 0; i < data.queries.size(); ++i)
      queries.add(data.queries.examples[i].id, codes[i], data.queries.examples[i].label);
    write_code_file(queries, data.queries.class_count, dir / "codes_query.bin");
  }
}

void stage_encode_lsh(const ExperimentConfig& cfg, const ExperimentData& data) {
  const std::vector<std::vector<double>> features = pixel_features(data.database);
  for (std::size_t k : cfg.code_lengths) {
    const LshModel model = fit_lsh(features, k, stage_seed(cfg.seed, StageSeed::kLsh) + k);
    const fs::path dir = paths::lsh_dir(cfg, k);
    fs::create_directories(dir);
    write_container(to_container(model), dir / "model.dshg");
    write_code_file(build_lsh_index(data.database, model), data.database.class_count, dir / "codes_db.bin");
    RetrievalIndex queries(k);
    for (const ImageExample& ex : data.queries.examples) queries.add(ex.id, lsh_encode(model, ex.pixels), ex.label);
    write_code_file(queries, data.queries.class_count, dir / "codes_query.bin");
  }
}

void stage_eval(const ExperimentConfig& cfg) {
  for (std::size_t k : cfg.code_lengths) {
    for (const auto& [dir, method] : {std::pair{paths::model_dir(cfg, k), std::string("dshgan")},
                                      std::pair{paths::lsh_dir(cfg, k), std::string("lsh")}}) {
      require(fs::exists(dir / "codes_db.bin") && fs::exists(dir / "codes_query.bin"), ErrorKind::kIo,
              "missing code files in " + dir.string());
      write_report(evaluate_code_files(dir, cfg.eval, method), dir / "report");
    }
  }
}

void stage_sweep(const ExperimentConfig& cfg, const ExperimentData& data) {
  const GanState gan = load_gan(cfg);
  const std::size_t k = cfg.code_lengths.front();
  for (double f : cfg.synthetic_fractions) {
    const fs::path dir = paths::sweep_dir(cfg, f, k);
    const TrainResult r = train_hash_model(cfg, data, gan, k, f);
    write_model_outputs(dir, r, data, data.database.class_count);
    EvalReport report = evaluate_code_files(dir, cfg.eval, "dshgan");
    report.synthetic_fraction = f;
    write_report(report, dir / "report");
  }
}

void stage_dump_samples(const ExperimentConfig& cfg, const ExperimentData& data) {
  const GanState gan = load_gan(cfg);
  std::mt19937_64 rng(stage_seed(cfg.seed, StageSeed::kSamples));
  const fs::path dir = fs::path(cfg.output_dir) / "samples";
  fs::create_directories(dir);
  const std::size_t c = data.labeled.class_count;
  std::vector<std::vector<double>> all;
  for (std::size_t j = 0; j < c; ++j) {
    std::vector<std::vector<double>> images;
    for (std::size_t i = 0; i < cfg.samples_per_class; ++i)
      images.push_back(generate(gan, LabelVector::one_hot(c, j), sample_noise(gan.config.generator.noise_dim, rng)).pixels);
    write_ppm_grid(dir / ("class_" + std::to_string(j) + ".ppm"), images, gan.config.image_shape,
                   std::max<std::size_t>(1, cfg.samples_per_class));
    all.insert(all.end(), images.begin(), images.end());
  }
  if (!all.empty())
    write_ppm_grid(dir / "all_classes.ppm", all, gan.config.image_shape, std::max<std::size_t>(1, cfg.samples_per_class));
}

}  // namespace

TrainResult train_hash_model(const ExperimentConfig& cfg, const ExperimentData& data, const GanState& gan,
                             std::size_t code_length, double synthetic_fraction) {
  HashModelState init =
      init_hash_model(hash_model_config(cfg, data.labeled, code_length), stage_seed(cfg.seed, StageSeed::kHashInit));
  if (cfg.transfer_from_discriminator) transfer_from_discriminator(init, gan);
  TrainConfig t = cfg.train;
  t.synthetic_fraction = synthetic_fraction;
  t.seed = stage_seed(cfg.seed, StageSeed::kTrain);
  return train(data.labeled, gan, init, t);
}

void run_stage(const ExperimentConfig& cfg, Stage stage) {
  if (stage == Stage::kReport) {
    summarize_reports(cfg.output_dir);
    return;
  }
  if (stage == Stage::kEval) {
    stage_eval(cfg);
    return;
  }
  const ExperimentData data = prepare_data(cfg);
  fs::create_directories(cfg.output_dir);
  detail::write_file_bytes((fs::path(cfg.output_dir) / "config.json").string(), experiment_config_to_json(cfg));
  switch (stage) {
    case Stage::kPretrainGan: stage_pretrain(cfg, data); break;
    case Stage::kTrain: stage_train(cfg, data); break;
    case Stage::kIndex: stage_index(cfg, data); break;
    case Stage::kEncodeLsh: stage_encode_lsh(cfg, data); break;
    case Stage::kSweep: stage_sweep(cfg, data); break;
    case Stage::kDumpSamples: stage_dump_samples(cfg, data); break;
    default: break;
  }
}

void run_pipeline(const ExperimentConfig& cfg) {
  for (Stage s : all_stages()) run_stage(cfg, s);
}

ReportSummary summarize_reports(const fs::path& run_dir) {
  ReportSummary summary;
  std::vector<fs::path> report_dirs;
  std::vector<fs::path> code_dirs;
  if (fs::exists(run_dir)) {
    for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
      if (!entry.is_regular_file()) continue;
      if (entry.path().filename() == "report.json") report_dirs.push_back(entry.path().parent_path());
      if (entry.path().filename() == "codes_query.bin") code_dirs.push_back(entry.path().parent_path());
    }
  }
  std::sort(report_dirs.begin(), report_dirs.end());
  std::sort(code_dirs.begin(), code_dirs.end());
  for (const fs::path& dir : code_dirs)
    if (!fs::exists(dir / "report" / "report.json")) summary.missing.push_back(dir);

  for (const fs::path& dir : report_dirs) {
    const EvalReport r = read_report(dir);
    summary.rows.push_back({r.method, r.code_length, r.synthetic_fraction, r.map, r.lookup_precision,
                            r.excellent_at_k, fs::relative(dir, run_dir)});
  }

  std::string csv = "method,code_length,synthetic_fraction,map,lookup_precision,excellent_at_k,source\n";
  for (const SummaryRow& row : summary.rows)
    csv += row.method + "," + std::to_string(row.code_length) + "," +
           (row.synthetic_fraction ? num(*row.synthetic_fraction) : std::string()) + "," + num(row.map) + "," +
           num(row.lookup_precision) + "," + num(row.excellent_at_k) + "," + row.source.generic_string() + "\n";
  if (fs::exists(run_dir)) {
    detail::write_file_bytes((run_dir / "summary.csv").string(), csv);
    detail::write_file_bytes((run_dir / "map_table.csv").string(), map_table_csv(summary));
  }
  return summary;
}

std::string map_table_csv(const ReportSummary& summary) {
  std::vector<std::size_t> ks;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::size_t>, double> cells;
  for (const SummaryRow& row : summary.rows) {
    const std::string name =
        row.synthetic_fraction ? row.method + "@" + fraction_tag(*row.synthetic_fraction) : row.method;
    if (std::find(methods.begin(), methods.end(), name) == methods.end()) methods.push_back(name);
    if (std::find(ks.begin(), ks.end(), row.code_length) == ks.end()) ks.push_back(row.code_length);
    cells[{name, row.code_length}] = row.map;
  }
  std::sort(ks.begin(), ks.end());
  std::string out = "method";
  for (std::size_t k : ks) out += ",K" + std::to_string(k);
  out += "\n";
  for (const std::string& m : methods) {
    out += m;
    for (std::size_t k : ks) {
      const auto it = cells.find({m, k});
      out += "," + (it == cells.end() ? std::string() : num(it->second));
    }
    out += "\n";
  }
  return out;
}

}  // namespace dshgan
