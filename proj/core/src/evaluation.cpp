#include "dshgan/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "binary_io.hpp"
#include "dshgan/errors.hpp"

namespace dshgan {

bool is_relevant(const LabelVector& q, const LabelVector& d) {
  require(q.size() == d.size(), ErrorKind::kShape, "label vectors of different length");
  return q.intersects(d);
}

bool is_excellent(const LabelVector& q, const LabelVector& d) {
  require(q.size() == d.size(), ErrorKind::kShape, "label vectors of different length");
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] && !d[j]) return false;
  return !q.is_zero();
}

namespace {

template <class Flags>
double ap_of(const Flags& relevance, std::optional<std::size_t> top_n) {
  require(!relevance.empty(), ErrorKind::kEmptyInput, "average precision of an empty list");
  const std::size_t n = top_n ? std::min(*top_n, relevance.size()) : relevance.size();
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!relevance[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

}  // namespace

double average_precision(std::span<const bool> relevance, std::optional<std::size_t> top_n) {
  return ap_of(relevance, top_n);
}

std::vector<Query> make_queries(const Dataset& queries, std::span<const HashCode> codes) {
  require(codes.size() == queries.size(), ErrorKind::kShape, "one code per query expected");
  std::vector<Query> out;
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const ImageExample& ex = queries.examples[i];
    require(ex.is_labeled && !ex.label.is_zero(), ErrorKind::kInvalidQuery,
            "query " + std::to_string(ex.id) + " is unlabeled");
    out.push_back({ex.id, codes[i], ex.label});
  }
  return out;
}

std::vector<Query> encode_queries(const Dataset& queries, const HashModelState& model) {
  for (const ImageExample& ex : queries.examples)
    require(ex.is_labeled && !ex.label.is_zero(), ErrorKind::kInvalidQuery,
            "query " + std::to_string(ex.id) + " is unlabeled");
  const std::vector<HashCode> codes = encode_dataset(queries, model);
  return make_queries(queries, codes);
}

namespace {

// Relevance of every index entry to q in search order.
std::vector<bool> ranked_relevance(const Query& q, const RetrievalIndex& index,
                                   const std::vector<const LabelVector*>& labels_by_pos,
                                   const std::unordered_map<std::uint64_t, std::size_t>& pos_of) {
  const std::vector<SearchHit> hits = search(index, q.code);
  std::vector<bool> rel(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i)
    rel[i] = is_relevant(q.label, *labels_by_pos[pos_of.at(hits[i].id)]);
  return rel;
}

struct IndexLookup {
  std::vector<const LabelVector*> labels;
  std::unordered_map<std::uint64_t, std::size_t> pos;

  explicit IndexLookup(const RetrievalIndex& index) {
    require(!index.empty(), ErrorKind::kEmptyInput, "evaluation against an empty index");
    for (const IndexEntry& e : index.entries()) {
      pos.emplace(e.id, labels.size());
      labels.push_back(&e.label);
    }
  }

  std::vector<bool> relevance(const Query& q, const RetrievalIndex& index) const {
    return ranked_relevance(q, index, labels, pos);
  }
};

void require_queries(std::span<const Query> queries) {
  require(!queries.empty(), ErrorKind::kEmptyInput, "no queries to evaluate");
  for (const Query& q : queries)
    require(!q.label.is_zero(), ErrorKind::kInvalidQuery, "query " + std::to_string(q.id) + " is unlabeled");
}

}  // namespace

double mean_average_precision(std::span<const Query> queries, const RetrievalIndex& index,
                              std::optional<std::size_t> top_n) {
  require_queries(queries);
  const IndexLookup lookup(index);
  double sum = 0.0;
  for (const Query& q : queries) {
    sum += ap_of(lookup.relevance(q, index), top_n);
  }
  return sum / static_cast<double>(queries.size());
}

std::vector<PrecisionAtK> precision_at_k(std::span<const Query> queries, const RetrievalIndex& index,
                                         std::span<const std::size_t> ks) {
  require_queries(queries);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    require(ks[i] >= 1 && ks[i] <= index.size(), ErrorKind::kDomain,
            "k=" + std::to_string(ks[i]) + " outside [1, " + std::to_string(index.size()) + "]");
    require(i == 0 || ks[i] > ks[i - 1], ErrorKind::kDomain, "k values must be strictly increasing");
  }
  const IndexLookup lookup(index);
  std::vector<double> sums(ks.size(), 0.0);
  for (const Query& q : queries) {
    const std::vector<bool> rel = lookup.relevance(q, index);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto hits = std::count(rel.begin(), rel.begin() + static_cast<std::ptrdiff_t>(ks[i]), true);
      sums[i] += static_cast<double>(hits) / static_cast<double>(ks[i]);
    }
  }
  std::vector<PrecisionAtK> out;
  for (std::size_t i = 0; i < ks.size(); ++i)
    out.push_back({ks[i], sums[i] / static_cast<double>(queries.size())});
  return out;
}

PrCurve precision_recall_curve(std::span<const Query> queries, const RetrievalIndex& index) {
  require_queries(queries);
  const IndexLookup lookup(index);
  const std::size_t n = index.size();
  std::vector<double> recall_sum(n, 0.0), precision_sum(n, 0.0);
  PrCurve curve;
  std::size_t included = 0;
  for (const Query& q : queries) {
    const std::vector<bool> rel = lookup.relevance(q, index);
    const auto total = static_cast<std::size_t>(std::count(rel.begin(), rel.end(), true));
    if (total == 0) {
      ++curve.excluded_queries;
      continue;
    }
    ++included;
    std::size_t hits = 0;
    for (std::size_t d = 0; d < n; ++d) {
      if (rel[d]) ++hits;
      recall_sum[d] += static_cast<double>(hits) / static_cast<double>(total);
      precision_sum[d] += static_cast<double>(hits) / static_cast<double>(d + 1);
    }
  }
  if (included == 0) return curve;
  for (std::size_t d = 0; d < n; ++d)
    curve.points.push_back({recall_sum[d] / static_cast<double>(included),
                            precision_sum[d] / static_cast<double>(included)});
  return curve;
}

double hash_lookup_precision(std::span<const Query> queries, const RetrievalIndex& index,
                             std::size_t radius) {
  require_queries(queries);
  const IndexLookup lookup(index);
  double sum = 0.0;
  for (const Query& q : queries) {
    const std::vector<std::uint64_t> ball = lookup_within_radius(index, q.code, radius);
    if (ball.empty()) continue;
    std::size_t hits = 0;
    for (std::uint64_t id : ball)
      if (is_relevant(q.label, *lookup.labels[lookup.pos.at(id)])) ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(ball.size());
  }
  return sum / static_cast<double>(queries.size());
}

double excellent_at_k(std::span<const Query> queries, const RetrievalIndex& index, std::size_t k) {
  require_queries(queries);
  require(k >= 1 && k <= index.size(), ErrorKind::kDomain, "excellent@k with k outside the index");
  const IndexLookup lookup(index);
  double sum = 0.0;
  for (const Query& q : queries) {
    const std::vector<SearchHit> hits = search(index, q.code);
    std::size_t good = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (is_excellent(q.label, *lookup.labels[lookup.pos.at(hits[i].id)])) ++good;
    sum += static_cast<double>(good) / static_cast<double>(k);
  }
  return sum / static_cast<double>(queries.size());
}

double mean_average_precision(const Dataset& queries, const RetrievalIndex& index,
                              const HashModelState& model, std::optional<std::size_t> top_n) {
  return mean_average_precision(encode_queries(queries, model), index, top_n);
}

std::vector<PrecisionAtK> precision_at_k(const Dataset& queries, const RetrievalIndex& index,
                                         const HashModelState& model, std::span<const std::size_t> ks) {
  return precision_at_k(encode_queries(queries, model), index, ks);
}

PrCurve precision_recall_curve(const Dataset& queries, const RetrievalIndex& index,
                               const HashModelState& model) {
  return precision_recall_curve(encode_queries(queries, model), index);
}

double hash_lookup_precision(const Dataset& queries, const RetrievalIndex& index,
                             const HashModelState& model, std::size_t radius) {
  return hash_lookup_precision(encode_queries(queries, model), index, radius);
}

EvalReport evaluate(std::span<const Query> queries, const RetrievalIndex& index, const EvalSpec& spec,
                    std::string method) {
  require_queries(queries);
  const IndexLookup lookup(index);
  EvalReport r;
  r.method = std::move(method);
  r.code_length = index.code_length();
  r.top_n = spec.top_n;
  r.lookup_radius = spec.radius;
  r.excellent_k = std::min(spec.excellent_k, index.size());

  std::vector<std::size_t> ks;
  for (std::size_t k : spec.ks)
    if (k >= 1 && k <= index.size()) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  r.map = mean_average_precision(queries, index, spec.top_n);
  r.precision_at_k = precision_at_k(queries, index, ks);
  PrCurve curve = precision_recall_curve(queries, index);
  r.pr_curve = std::move(curve.points);
  r.pr_excluded_queries = curve.excluded_queries;
  r.lookup_precision = hash_lookup_precision(queries, index, spec.radius);
  r.excellent_at_k = excellent_at_k(queries, index, r.excellent_k);

  for (const Query& q : queries) {
    QueryDetail d;
    d.id = q.id;
    const std::vector<bool> rel = lookup.relevance(q, index);
    d.average_precision = ap_of(rel, spec.top_n);
    d.relevant_count = static_cast<std::size_t>(std::count(rel.begin(), rel.end(), true));
    const std::vector<std::uint64_t> ball = lookup_within_radius(index, q.code, spec.radius);
    d.ball_size = ball.size();
    std::size_t hits = 0;
    for (std::uint64_t id : ball)
      if (is_relevant(q.label, *lookup.labels[lookup.pos.at(id)])) ++hits;
    d.lookup_precision = ball.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ball.size());
    r.per_query.push_back(d);
  }
  return r;
}

using nlohmann::json;

std::string report_to_json(const EvalReport& r) {
  json j;
  j["method"] = r.method;
  j["code_length"] = r.code_length;
  j["synthetic_fraction"] = r.synthetic_fraction ? json(*r.synthetic_fraction) : json(nullptr);
  j["map"] = r.map;
  j["top_n"] = r.top_n ? json(*r.top_n) : json(nullptr);
  json pk = json::array();
  for (const auto& p : r.precision_at_k) pk.push_back({{"k", p.k}, {"precision", p.precision}});
  j["precision_at_k"] = pk;
  json pr = json::array();
  for (const auto& p : r.pr_curve) pr.push_back({{"recall", p.recall}, {"precision", p.precision}});
  j["pr_curve"] = pr;
  j["pr_excluded_queries"] = r.pr_excluded_queries;
  j["lookup_radius"] = r.lookup_radius;
  j["lookup_precision"] = r.lookup_precision;
  j["excellent_k"] = r.excellent_k;
  j["excellent_at_k"] = r.excellent_at_k;
  json rows = json::array();
  for (const auto& d : r.per_query)
    rows.push_back({{"id", d.id},
                    {"average_precision", d.average_precision},
                    {"lookup_precision", d.lookup_precision},
                    {"ball_size", d.ball_size},
                    {"relevant_count", d.relevant_count}});
  j["per_query"] = rows;
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  require(!j.is_discarded() && j.is_object(), ErrorKind::kMalformedFile, "evaluation report is not JSON");
  try {
    EvalReport r;
    r.method = j.at("method").get<std::string>();
    r.code_length = j.at("code_length").get<std::size_t>();
    if (!j.at("synthetic_fraction").is_null()) r.synthetic_fraction = j.at("synthetic_fraction").get<double>();
    r.map = j.at("map").get<double>();
    if (!j.at("top_n").is_null()) r.top_n = j.at("top_n").get<std::size_t>();
    for (const auto& p : j.at("precision_at_k"))
      r.precision_at_k.push_back({p.at("k").get<std::size_t>(), p.at("precision").get<double>()});
    for (const auto& p : j.at("pr_curve"))
      r.pr_curve.push_back({p.at("recall").get<double>(), p.at("precision").get<double>()});
    r.pr_excluded_queries = j.at("pr_excluded_queries").get<std::size_t>();
    r.lookup_radius = j.at("lookup_radius").get<std::size_t>();
    r.lookup_precision = j.at("lookup_precision").get<double>();
    r.excellent_k = j.at("excellent_k").get<std::size_t>();
    r.excellent_at_k = j.at("excellent_at_k").get<double>();
    for (const auto& d : j.at("per_query"))
      r.per_query.push_back({d.at("id").get<std::uint64_t>(), d.at("average_precision").get<double>(),
                             d.at("lookup_precision").get<double>(), d.at("ball_size").get<std::size_t>(),
                             d.at("relevant_count").get<std::size_t>()});
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::kMalformedFile, std::string("evaluation report: ") + e.what());
  }
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_report(const EvalReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::write_file_bytes((dir / "report.json").string(), report_to_json(r));

  std::string metrics = "metric,value\n";
  metrics += "map," + num(r.map) + "\n";
  metrics += "lookup_precision_r" + std::to_string(r.lookup_radius) + "," + num(r.lookup_precision) + "\n";
  metrics += "excellent_at_" + std::to_string(r.excellent_k) + "," + num(r.excellent_at_k) + "\n";
  metrics += "pr_excluded_queries," + std::to_string(r.pr_excluded_queries) + "\n";
  detail::write_file_bytes((dir / "metrics.csv").string(), metrics);

  std::string pk = "k,precision\n";
  for (const auto& p : r.precision_at_k) pk += std::to_string(p.k) + "," + num(p.precision) + "\n";
  detail::write_file_bytes((dir / "precision_at_k.csv").string(), pk);

  std::string pr = "recall,precision\n";
  for (const auto& p : r.pr_curve) pr += num(p.recall) + "," + num(p.precision) + "\n";
  detail::write_file_bytes((dir / "pr_curve.csv").string(), pr);

  std::string rows = "id,average_precision,lookup_precision,ball_size,relevant_count\n";
  for (const auto& d : r.per_query)
    rows += std::to_string(d.id) + "," + num(d.average_precision) + "," + num(d.lookup_precision) + "," +
            std::to_string(d.ball_size) + "," + std::to_string(d.relevant_count) + "\n";
  detail::write_file_bytes((dir / "per_query.csv").string(), rows);
}

EvalReport read_report(const std::filesystem::path& dir) {
  return report_from_json(detail::read_file_bytes((dir / "report.json").string()));
}

}  // namespace dshgan
