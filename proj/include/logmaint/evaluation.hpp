#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "logmaint/clustering.hpp"
#include "logmaint/detail/json_io.hpp"
#include "logmaint/detail/parallel.hpp"
#include "logmaint/error.hpp"
#include "logmaint/spellcorrect.hpp"
#include "logmaint/vectorspace.hpp"

namespace logmaint {

// ---------------------------------------------------------------------------
// Internal validity

struct SilhouetteResult {
  double mean = 0.0;                // over non-noise points
  std::vector<double> per_point;    // NaN for noise points
};

/// Euclidean silhouette. Noise points are ignored; members of singleton
/// clusters score 0.
inline SilhouetteResult silhouette(const PointMatrix& points, const std::vector<int>& labels, unsigned threads = 1) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (labels.size() != n) throw Error("silhouette: label count does not match point count");
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  for (int l : labels)
    if (l >= 0) ++size[static_cast<std::size_t>(l)];
  const auto populated = std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; });
  if (populated < 2) throw Error("silhouette: needs at least 2 non-noise clusters");

  SilhouetteResult out;
  out.per_point.assign(n, std::numeric_limits<double>::quiet_NaN());
  detail::parallel_for(n, threads, [&](std::size_t i) {
    const int li = labels[i];
    if (li < 0) return;
    if (size[static_cast<std::size_t>(li)] == 1) {
      out.per_point[i] = 0.0;
      return;
    }
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || labels[j] < 0) continue;
      sum[static_cast<std::size_t>(labels[j])] +=
          (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sum[static_cast<std::size_t>(li)] / static_cast<double>(size[static_cast<std::size_t>(li)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != li && size[static_cast<std::size_t>(c)] > 0)
        b = std::min(b, sum[static_cast<std::size_t>(c)] / static_cast<double>(size[static_cast<std::size_t>(c)]));
    const double m = std::max(a, b);
    out.per_point[i] = m > 0.0 ? (b - a) / m : 0.0;
  });
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) continue;
    total += out.per_point[i];
    ++counted;
  }
  out.mean = total / static_cast<double>(counted);
  return out;
}

/// Sum of squared distances to the label means (noise excluded).
inline double inertia(const PointMatrix& points, const std::vector<int>& labels) {
  if (points.rows() == 0 || labels.empty()) throw Error("inertia: empty clustering");
  if (labels.size() != static_cast<std::size_t>(points.rows()))
    throw Error("inertia: label count does not match point count");
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  if (k == 0) throw Error("inertia: no clustered points");
  return detail::inertia_of(points, labels, centroids_from_labels(points, labels, k));
}

/// Uses the clustering's own centroids when present.
inline double inertia(const PointMatrix& points, const Clustering& clustering) {
  if (!clustering.centroids) return inertia(points, clustering.labels);
  if (points.rows() == 0) throw Error("inertia: empty clustering");
  return detail::inertia_of(points, clustering.labels, *clustering.centroids);
}

// ---------------------------------------------------------------------------
// Topic-model quality

struct CoherenceResult {
  double mean = 0.0;
  std::vector<double> per_topic;
  std::vector<std::vector<std::size_t>> top_words;  // column ids, most probable first
};

/// Top-n column ids of one topic, ties broken by lower id.
inline std::vector<std::size_t> top_words(const TopicModel& model, Eigen::Index topic, std::size_t top_n) {
  std::vector<std::size_t> ids(static_cast<std::size_t>(model.topic_word.cols()));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    return model.topic_word(topic, static_cast<Eigen::Index>(a)) > model.topic_word(topic, static_cast<Eigen::Index>(b));
  });
  ids.resize(std::min(top_n, ids.size()));
  return ids;
}

/// UMass coherence: sum over i < j of log((D(w_i, w_j) + 1) / D(w_j)) for each
/// topic's top_n words, where D counts documents containing the word(s).
inline CoherenceResult coherence(const TopicModel& model, const SparseRowMatrix& counts, std::size_t top_n) {
  if (top_n < 2) throw Error("coherence: top_n must be >= 2");
  if (counts.cols() != model.topic_word.cols()) throw Error("coherence: counts do not match the model vocabulary");
  if (top_n > static_cast<std::size_t>(counts.cols())) throw Error("coherence: top_n exceeds vocabulary size");

  std::vector<std::vector<Eigen::Index>> docs_of(static_cast<std::size_t>(counts.cols()));
  for (Eigen::Index d = 0; d < counts.outerSize(); ++d)
    for (SparseRowMatrix::InnerIterator it(counts, d); it; ++it)
      if (it.value() > 0) docs_of[static_cast<std::size_t>(it.col())].push_back(d);
  const auto co = [&](std::size_t a, std::size_t b) {
    const auto& x = docs_of[a];
    const auto& y = docs_of[b];
    std::size_t n = 0;
    for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
      if (x[i] < y[j]) ++i;
      else if (y[j] < x[i]) ++j;
      else ++n, ++i, ++j;
    }
    return static_cast<double>(n);
  };

  CoherenceResult out;
  for (Eigen::Index t = 0; t < model.num_topics(); ++t) {
    auto words = top_words(model, t, top_n);
    double score = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        const double dj = static_cast<double>(docs_of[words[j]].size());
        if (dj == 0.0) throw Error("coherence: top word with zero document frequency");
        score += std::log((co(words[i], words[j]) + 1.0) / dj);
      }
    }
    out.per_topic.push_back(score);
    out.top_words.push_back(std::move(words));
  }
  double total = 0.0;
  for (double s : out.per_topic) total += s;
  out.mean = total / static_cast<double>(out.per_topic.size());
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise similarity

/// 1 - d / max(|a|, |b|); 1 for two empty strings.
inline double levenshtein_similarity(std::string_view a, std::string_view b) {
  const std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

/// Jaro similarity over bytes with match window max(|a|, |b|) / 2 - 1.
inline double jaro(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t longest = std::max(a.size(), b.size());
  const std::size_t window = longest / 2 > 0 ? longest / 2 - 1 : 0;
  std::vector<bool> ma(a.size(), false), mb(b.size(), false);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (mb[j] || a[i] != b[j]) continue;
      ma[i] = mb[j] = true;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;
  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < a.size(); ++i) {
    if (!ma[i]) continue;
    while (!mb[j]) ++j;
    if (a[i] != b[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions / 2);
  return (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;
}

/// dot / (|x| |y|), 0 when either vector is zero.
inline double cosine(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw Error("cosine: dimension mismatch");
  const double nx = x.norm(), ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return x.dot(y) / (nx * ny);
}

/// Cosine between two rows of a row-major sparse matrix.
inline double cosine(const SparseRowMatrix& m, Eigen::Index r1, Eigen::Index r2) {
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  SparseRowMatrix::InnerIterator a(m, r1), b(m, r2);
  for (SparseRowMatrix::InnerIterator it(m, r1); it; ++it) n1 += it.value() * it.value();
  for (SparseRowMatrix::InnerIterator it(m, r2); it; ++it) n2 += it.value() * it.value();
  while (a && b) {
    if (a.col() < b.col()) ++a;
    else if (b.col() < a.col()) ++b;
    else {
      dot += a.value() * b.value();
      ++a;
      ++b;
    }
  }
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  return dot / (std::sqrt(n1) * std::sqrt(n2));
}

enum class SimilarityMetric { levenshtein, jaro, cosine };

inline std::string_view to_string(SimilarityMetric m) {
  switch (m) {
    case SimilarityMetric::levenshtein: return "levenshtein";
    case SimilarityMetric::jaro: return "jaro";
    case SimilarityMetric::cosine: return "cosine";
  }
  return "cosine";
}

inline SimilarityMetric parse_similarity_metric(std::string_view s) {
  if (s == "levenshtein") return SimilarityMetric::levenshtein;
  if (s == "jaro") return SimilarityMetric::jaro;
  if (s == "cosine") return SimilarityMetric::cosine;
  throw Error("unknown similarity metric '" + std::string(s) + "' (expected levenshtein|jaro|cosine)");
}

/// Similarity of two strings under a string metric; cosine is not a string metric.
inline double string_similarity(std::string_view a, std::string_view b, SimilarityMetric metric) {
  switch (metric) {
    case SimilarityMetric::levenshtein: return levenshtein_similarity(a, b);
    case SimilarityMetric::jaro: return jaro(a, b);
    case SimilarityMetric::cosine: break;
  }
  throw Error("string_similarity: cosine needs document vectors");
}

/// What a similarity report compares: token strings for the string metrics,
/// TF-IDF rows for cosine.
struct SimilarityInput {
  std::vector<std::string> texts;  // space-joined preprocessed tokens
  const SparseRowMatrix* vectors = nullptr;

  std::size_t size() const { return vectors ? static_cast<std::size_t>(vectors->rows()) : texts.size(); }
};

struct ClusterSimilarity {
  SimilarityMetric metric = SimilarityMetric::cosine;
  std::vector<int> labels;            // cluster labels in ascending order
  std::vector<std::size_t> sizes;     // parallel to labels
  std::vector<double> intra;          // mean pairwise similarity, 1 for singletons
  Eigen::MatrixXd inter;              // mean cross-pair similarity; diagonal = intra
};

/// Intra- and inter-cluster mean similarities. Noise documents are left out.
/// Pair sums are accumulated per row and combined in row order, so results do
/// not depend on the thread count.
inline ClusterSimilarity cluster_similarity_report(const SimilarityInput& input, const std::vector<int>& labels,
                                                   SimilarityMetric metric, unsigned threads = 1) {
  const std::size_t n = labels.size();
  if (metric == SimilarityMetric::cosine && !input.vectors) throw Error("cluster_similarity_report: cosine needs vectors");
  if (metric != SimilarityMetric::cosine && input.texts.size() != n)
    throw Error("cluster_similarity_report: text count does not match label count");
  if (metric == SimilarityMetric::cosine && static_cast<std::size_t>(input.vectors->rows()) != n)
    throw Error("cluster_similarity_report: vector count does not match label count");
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  if (k == 0) throw Error("cluster_similarity_report: no clusters");
  const auto kk = static_cast<std::size_t>(k);

  const auto sim = [&](std::size_t i, std::size_t j) {
    if (metric == SimilarityMetric::cosine)
      return cosine(*input.vectors, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return string_similarity(input.texts[i], input.texts[j], metric);
  };

  // row_sums[i][c] = sum over j > i with label c of sim(i, j).
  std::vector<std::vector<double>> row_sums(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    if (labels[i] < 0) return;
    auto& acc = row_sums[i];
    acc.assign(kk, 0.0);
    for (std::size_t j = i + 1; j < n; ++j)
      if (labels[j] >= 0) acc[static_cast<std::size_t>(labels[j])] += sim(i, j);
  });

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, k);
  std::vector<std::size_t> size(kk, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) continue;
    const auto li = labels[i];
    ++size[static_cast<std::size_t>(li)];
    for (int c = 0; c < k; ++c) {
      const double s = row_sums[i][static_cast<std::size_t>(c)];
      if (c == li) sums(li, li) += s;
      else {
        sums(li, c) += s;
        sums(c, li) += s;
      }
    }
  }

  ClusterSimilarity out;
  out.metric = metric;
  for (int c = 0; c < k; ++c) {
    if (size[static_cast<std::size_t>(c)] == 0) continue;
    out.labels.push_back(c);
    out.sizes.push_back(size[static_cast<std::size_t>(c)]);
  }
  const auto m = static_cast<Eigen::Index>(out.labels.size());
  out.inter = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const int ca = out.labels[static_cast<std::size_t>(a)];
    const double na = static_cast<double>(out.sizes[static_cast<std::size_t>(a)]);
    const double pairs = na * (na - 1.0) / 2.0;
    out.intra.push_back(pairs > 0 ? sums(ca, ca) / pairs : 1.0);
    out.inter(a, a) = out.intra.back();
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const int cb = out.labels[static_cast<std::size_t>(b)];
      const double nb = static_cast<double>(out.sizes[static_cast<std::size_t>(b)]);
      out.inter(a, b) = out.inter(b, a) = sums(ca, cb) / (na * nb);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// External validity

struct GoldComparison {
  double purity = 0.0;
  double adjusted_rand_index = 0.0;
};

namespace detail {

/// Relabels to 0..m-1 with every negative (noise) label becoming its own singleton.
inline std::vector<std::size_t> dense_partition(const std::vector<int>& labels) {
  std::map<int, std::size_t> ids;
  std::vector<std::size_t> out(labels.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      out[i] = SIZE_MAX;
      continue;
    }
    const auto [it, inserted] = ids.emplace(labels[i], next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  for (auto& v : out)
    if (v == SIZE_MAX) v = next++;
  return out;
}

inline double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace detail

/// Purity and adjusted Rand index. Negative labels count as singleton clusters.
inline GoldComparison compare_to_gold(const std::vector<int>& predicted, const std::vector<int>& gold) {
  if (predicted.size() != gold.size())
    throw Error("compare_to_gold: " + std::to_string(predicted.size()) + " predicted labels vs " +
                std::to_string(gold.size()) + " gold labels");
  if (predicted.empty()) throw Error("compare_to_gold: empty labelling");
  const auto p = detail::dense_partition(predicted);
  const auto g = detail::dense_partition(gold);
  const std::size_t np = *std::max_element(p.begin(), p.end()) + 1;
  const std::size_t ng = *std::max_element(g.begin(), g.end()) + 1;
  std::vector<std::vector<double>> table(np, std::vector<double>(ng, 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) table[p[i]][g[i]] += 1.0;

  const double n = static_cast<double>(p.size());
  double matched = 0.0, sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  std::vector<double> col(ng, 0.0);
  for (const auto& row : table) {
    matched += *std::max_element(row.begin(), row.end());
    double r = 0.0;
    for (std::size_t j = 0; j < ng; ++j) {
      sum_cells += detail::choose2(row[j]);
      r += row[j];
      col[j] += row[j];
    }
    sum_rows += detail::choose2(r);
  }
  for (double c : col) sum_cols += detail::choose2(c);

  GoldComparison out;
  out.purity = matched / n;
  const double expected = sum_rows * sum_cols / detail::choose2(n);
  const double max_index = (sum_rows + sum_cols) / 2.0;
  if (max_index == expected)  // both partitions trivial (all one cluster or all singletons)
    out.adjusted_rand_index = sum_rows == sum_cols ? 1.0 : 0.0;
  else
    out.adjusted_rand_index = (sum_cells - expected) / (max_index - expected);
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct EvaluationReport {
  ClusterMethod method = ClusterMethod::kmeans;
  std::size_t documents = 0;
  std::size_t noise = 0;
  std::map<std::string, double> metrics;       // sorted by name
  std::vector<std::string> skipped;            // "metric: reason" for metrics that could not be computed
  std::vector<ClusterSimilarity> similarity;   // one per requested metric
  std::optional<CoherenceResult> coherence;
  std::vector<std::vector<std::string>> top_terms;  // coherence top words as terms, when known
  std::optional<GoldComparison> gold;
};

inline Json to_json(const EvaluationReport& r) {
  Json j;
  j["method"] = std::string(to_string(r.method));
  j["documents"] = r.documents;
  j["noise"] = r.noise;
  Json metrics = Json::object();
  for (const auto& [name, value] : r.metrics) metrics[name] = value;
  j["metrics"] = std::move(metrics);
  j["skipped"] = r.skipped;
  Json sims = Json::object();
  for (const auto& s : r.similarity) {
    Json per = Json::array();
    for (std::size_t c = 0; c < s.labels.size(); ++c)
      per.push_back(Json{{"label", s.labels[c]}, {"size", s.sizes[c]}, {"intra_similarity", s.intra[c]}});
    Json inter = Json::array();
    for (Eigen::Index a = 0; a < s.inter.rows(); ++a) {
      Json row = Json::array();
      for (Eigen::Index b = 0; b < s.inter.cols(); ++b) row.push_back(s.inter(a, b));
      inter.push_back(std::move(row));
    }
    sims[std::string(to_string(s.metric))] = Json{{"per_cluster", std::move(per)}, {"inter_matrix", std::move(inter)}};
  }
  j["similarity"] = std::move(sims);
  if (r.coherence && !r.top_terms.empty())
    j["coherence"] = Json{{"per_topic", r.coherence->per_topic}, {"top_words", r.top_terms}};
  else if (r.coherence)
    j["coherence"] = Json{{"per_topic", r.coherence->per_topic}, {"top_words", r.coherence->top_words}};
  else
    j["coherence"] = nullptr;
  if (r.gold)
    j["gold"] = Json{{"purity", r.gold->purity}, {"adjusted_rand_index", r.gold->adjusted_rand_index}};
  else
    j["gold"] = nullptr;
  return j;
}

}  // namespace logmaint
