#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dshgan/datasets.hpp"
#include "dshgan/hashmodel.hpp"
#include "dshgan/retrieval.hpp"

namespace dshgan {

// Relevance: the label sets share at least one class.
bool is_relevant(const LabelVector& q, const LabelVector& d);
// Stricter match used for excellent@k: d carries every label of q.
bool is_excellent(const LabelVector& q, const LabelVector& d);

double average_precision(std::span<const bool> relevance, std::optional<std::size_t> top_n = {});

struct Query {
  std::uint64_t id = 0;
  HashCode code;
  LabelVector label;
};

// Encodes labeled query images; an unlabeled query is an invalid-query error.
std::vector<Query> encode_queries(const Dataset& queries, const HashModelState& model);
std::vector<Query> make_queries(const Dataset& queries, std::span<const HashCode> codes);

struct PrecisionAtK {
  std::size_t k = 0;
  double precision = 0.0;

  bool operator==(const PrecisionAtK&) const = default;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;

  bool operator==(const PrPoint&) const = default;
};

struct PrCurve {
  std::vector<PrPoint> points;
  // Queries with no relevant database entry; they are left out of the average.
  std::size_t excluded_queries = 0;
};

double mean_average_precision(std::span<const Query> queries, const RetrievalIndex& index,
                              std::optional<std::size_t> top_n = {});
std::vector<PrecisionAtK> precision_at_k(std::span<const Query> queries, const RetrievalIndex& index,
                                         std::span<const std::size_t> ks);
PrCurve precision_recall_curve(std::span<const Query> queries, const RetrievalIndex& index);
// Empty balls count as precision 0.
double hash_lookup_precision(std::span<const Query> queries, const RetrievalIndex& index,
                             std::size_t radius);
double excellent_at_k(std::span<const Query> queries, const RetrievalIndex& index, std::size_t k);

double mean_average_precision(const Dataset& queries, const RetrievalIndex& index,
                              const HashModelState& model, std::optional<std::size_t> top_n = {});
std::vector<PrecisionAtK> precision_at_k(const Dataset& queries, const RetrievalIndex& index,
                                         const HashModelState& model, std::span<const std::size_t> ks);
PrCurve precision_recall_curve(const Dataset& queries, const RetrievalIndex& index,
                               const HashModelState& model);
double hash_lookup_precision(const Dataset& queries, const RetrievalIndex& index,
                             const HashModelState& model, std::size_t radius);

struct EvalSpec {
  std::size_t radius = 2;
  std::optional<std::size_t> top_n;
  std::vector<std::size_t> ks{1, 5, 10, 20, 50, 100};
  std::size_t excellent_k = 10;

  bool operator==(const EvalSpec&) const = default;
};

struct QueryDetail {
  std::uint64_t id = 0;
  double average_precision = 0.0;
  double lookup_precision = 0.0;
  std::size_t ball_size = 0;
  std::size_t relevant_count = 0;

  bool operator==(const QueryDetail&) const = default;
};

struct EvalReport {
  std::string method;
  std::size_t code_length = 0;
  std::optional<double> synthetic_fraction;
  double map = 0.0;
  std::optional<std::size_t> top_n;
  std::vector<PrecisionAtK> precision_at_k;
  std::vector<PrPoint> pr_curve;
  std::size_t pr_excluded_queries = 0;
  std::size_t lookup_radius = 2;
  double lookup_precision = 0.0;
  std::size_t excellent_k = 10;
  double excellent_at_k = 0.0;
  std::vector<QueryDetail> per_query;
};

// ks larger than the index are dropped; excellent_k is clipped to the index size.
EvalReport evaluate(std::span<const Query> queries, const RetrievalIndex& index, const EvalSpec& spec,
                    std::string method);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

// Files written: report.json, metrics.csv (metric,value), precision_at_k.csv
// (k,precision), pr_curve.csv (recall,precision), per_query.csv.
void write_report(const EvalReport& report, const std::filesystem::path& dir);
EvalReport read_report(const std::filesystem::path& dir);

}  // namespace dshgan
