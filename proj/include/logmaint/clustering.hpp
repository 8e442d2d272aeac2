#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "logmaint/detail/json_io.hpp"
#include "logmaint/detail/rng.hpp"
#include "logmaint/error.hpp"
#include "logmaint/vectorspace.hpp"

namespace logmaint {

/// Row-per-point coordinates (LSA embedding or dense TF-IDF rows).
using PointMatrix = Eigen::MatrixXd;

inline constexpr int kNoiseLabel = -1;

enum class ClusterMethod { kmeans, dbscan, hierarchical, lda };

inline std::string_view to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::kmeans: return "kmeans";
    case ClusterMethod::dbscan: return "dbscan";
    case ClusterMethod::hierarchical: return "hier";
    case ClusterMethod::lda: return "lda";
  }
  return "kmeans";
}

inline ClusterMethod parse_cluster_method(std::string_view s) {
  if (s == "kmeans") return ClusterMethod::kmeans;
  if (s == "dbscan") return ClusterMethod::dbscan;
  if (s == "hier" || s == "hierarchical") return ClusterMethod::hierarchical;
  if (s == "lda") return ClusterMethod::lda;
  throw Error("unknown clustering method '" + std::string(s) + "' (expected kmeans|dbscan|hier|lda)");
}

struct Clustering {
  std::vector<int> labels;  // per document; kNoiseLabel for noise / excluded rows
  std::optional<Eigen::MatrixXd> centroids;
  ClusterMethod method = ClusterMethod::kmeans;
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::vector<double> inertia_trace;  // k-means only, one entry per Lloyd iteration

  /// Number of distinct non-noise labels (they are always 0..k-1).
  int num_clusters() const {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    return k;
  }
};

namespace detail {

inline double squared_distance(const PointMatrix& p, Eigen::Index i, const Eigen::MatrixXd& c, Eigen::Index j) {
  return (p.row(i) - c.row(j)).squaredNorm();
}

/// Renumbers non-noise labels 0..k-1 by first appearance; returns old->new map.
inline std::vector<int> canonicalize_labels(std::vector<int>& labels) {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  std::vector<int> remap(static_cast<std::size_t>(max_label + 1), -1);
  int next = 0;
  for (int& l : labels) {
    if (l < 0) continue;
    auto& slot = remap[static_cast<std::size_t>(l)];
    if (slot < 0) slot = next++;
    l = slot;
  }
  return remap;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// k-means

inline Eigen::MatrixXd centroids_from_labels(const PointMatrix& points, const std::vector<int>& labels, int k) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, points.cols());
  std::vector<std::size_t> n(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l < 0) continue;
    c.row(l) += points.row(i);
    ++n[static_cast<std::size_t>(l)];
  }
  for (int j = 0; j < k; ++j)
    if (n[static_cast<std::size_t>(j)] > 0) c.row(j) /= static_cast<double>(n[static_cast<std::size_t>(j)]);
  return c;
}

namespace detail {

inline std::vector<int> assign_nearest(const PointMatrix& points, const Eigen::MatrixXd& centroids) {
  std::vector<int> labels(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::Index best = 0;
    double best_d = squared_distance(points, i, centroids, 0);
    for (Eigen::Index j = 1; j < centroids.rows(); ++j) {
      const double d = squared_distance(points, i, centroids, j);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

/// Moves the point farthest from its centroid into each empty cluster.
inline void repair_empty_clusters(const PointMatrix& points, std::vector<int>& labels, int k) {
  for (int j = 0; j < k; ++j) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    if (sizes[static_cast<std::size_t>(j)] > 0) continue;
    const auto c = centroids_from_labels(points, labels, k);
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(l)] < 2) continue;
      const double d = squared_distance(points, i, c, l);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far >= 0) labels[static_cast<std::size_t>(far)] = j;
  }
}

inline Eigen::MatrixXd kmeanspp_seeds(const PointMatrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> chosen;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  chosen.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  taken[static_cast<std::size_t>(chosen[0])] = true;
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  while (static_cast<int>(chosen.size()) < k) {
    const Eigen::Index last = chosen.back();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, (points.row(i) - points.row(last)).squaredNorm());
      if (!taken[static_cast<std::size_t>(i)]) total += d;
    }
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        const double d = d2[static_cast<std::size_t>(i)];
        if (d <= 0.0) continue;
        acc += d;
        pick = i;
        if (acc > r) break;
      }
    }
    if (pick < 0)  // every remaining point coincides with a seed
      for (Eigen::Index i = 0; i < n && pick < 0; ++i)
        if (!taken[static_cast<std::size_t>(i)]) pick = i;
    chosen.push_back(pick);
    taken[static_cast<std::size_t>(pick)] = true;
  }
  Eigen::MatrixXd c(k, points.cols());
  for (int j = 0; j < k; ++j) c.row(j) = points.row(chosen[static_cast<std::size_t>(j)]);
  return c;
}

inline double inertia_of(const PointMatrix& points, const std::vector<int>& labels, const Eigen::MatrixXd& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l >= 0) s += squared_distance(points, i, c, l);
  }
  return s;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeds. Stops when assignments repeat or
/// after max_iter iterations; inertia_trace records every iteration.
inline Clustering kmeans(const PointMatrix& points, int k, std::uint64_t seed = 42, int max_iter = 300) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw Error("kmeans: empty input");
  if (k < 1 || k > n) throw Error("kmeans: k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
  if (max_iter < 1) throw Error("kmeans: max_iter must be >= 1");

  detail::Rng rng(seed);
  Eigen::MatrixXd centroids = detail::kmeanspp_seeds(points, k, rng);
  std::vector<int> labels = detail::assign_nearest(points, centroids);
  Clustering out;
  for (int it = 0; it < max_iter; ++it) {
    detail::repair_empty_clusters(points, labels, k);
    centroids = centroids_from_labels(points, labels, k);
    out.inertia_trace.push_back(detail::inertia_of(points, labels, centroids));
    auto next = detail::assign_nearest(points, centroids);
    if (next == labels) break;
    labels = std::move(next);
  }
  detail::repair_empty_clusters(points, labels, k);

  const auto remap = detail::canonicalize_labels(labels);
  out.labels = std::move(labels);
  out.centroids = centroids_from_labels(points, out.labels, k);
  (void)remap;
  out.method = ClusterMethod::kmeans;
  out.params = Json{{"k", k}, {"max_iter", max_iter}};
  out.seed = seed;
  return out;
}

// ---------------------------------------------------------------------------
// DBSCAN

/// Density clustering with Euclidean eps-neighbourhoods (inclusive). Points
/// flagged in `excluded` are noise and neighbour no one. Cluster ids follow
/// the first core point of each cluster in index order.
inline Clustering dbscan(const PointMatrix& points, double eps, int min_pts, const std::vector<bool>& excluded = {}) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw Error("dbscan: empty input");
  if (!(eps > 0.0)) throw Error("dbscan: eps must be > 0");
  if (min_pts < 1) throw Error("dbscan: min_pts must be >= 1");
  if (!excluded.empty() && static_cast<Eigen::Index>(excluded.size()) != n)
    throw Error("dbscan: exclusion mask length mismatch");
  const auto is_excluded = [&](Eigen::Index i) { return !excluded.empty() && excluded[static_cast<std::size_t>(i)]; };

  const double eps2 = eps * eps;
  std::vector<std::vector<Eigen::Index>> nbrs(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_excluded(i)) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!is_excluded(j) && (points.row(i) - points.row(j)).squaredNorm() <= eps2)
        nbrs[static_cast<std::size_t>(i)].push_back(j);
  }
  const auto is_core = [&](Eigen::Index i) {
    return static_cast<int>(nbrs[static_cast<std::size_t>(i)].size()) >= min_pts;
  };

  std::vector<int> labels(static_cast<std::size_t>(n), kNoiseLabel);
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  int next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (visited[static_cast<std::size_t>(i)] || !is_core(i)) continue;
    const int id = next++;
    std::vector<Eigen::Index> frontier{i};
    visited[static_cast<std::size_t>(i)] = true;
    labels[static_cast<std::size_t>(i)] = id;
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const Eigen::Index p = frontier[f];
      if (!is_core(p)) continue;
      for (Eigen::Index q : nbrs[static_cast<std::size_t>(p)]) {
        if (labels[static_cast<std::size_t>(q)] == kNoiseLabel) labels[static_cast<std::size_t>(q)] = id;
        if (!visited[static_cast<std::size_t>(q)]) {
          visited[static_cast<std::size_t>(q)] = true;
          frontier.push_back(q);
        }
      }
    }
  }

  Clustering out;
  out.labels = std::move(labels);
  out.method = ClusterMethod::dbscan;
  out.params = Json{{"eps", eps}, {"min_pts", min_pts}};
  return out;
}

// ---------------------------------------------------------------------------
// Agglomerative hierarchical clustering

enum class Linkage { average, single, complete };

inline std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::average: return "average";
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
  }
  return "average";
}

inline Linkage parse_linkage(std::string_view s) {
  if (s == "average") return Linkage::average;
  if (s == "single") return Linkage::single;
  if (s == "complete") return Linkage::complete;
  throw Error("unknown linkage '" + std::string(s) + "' (expected average|single|complete)");
}

struct Merge {
  std::size_t a;  // cluster ids: points are 0..N-1, merge i creates N+i
  std::size_t b;
  double distance;
  std::size_t size;
};

/// Cut by a target cluster count, or by a distance threshold (merges at or
/// below it are applied).
struct HierarchicalCut {
  std::variant<std::size_t, double> value;

  static HierarchicalCut count(std::size_t c) { return {c}; }
  static HierarchicalCut threshold(double t) { return {t}; }
};

struct Dendrogram {
  std::vector<Merge> merges;  // N-1 merges in the order performed
  HierarchicalCut cut;
};

/// Labels after applying the first `applied` merges.
inline std::vector<int> labels_after_merges(const std::vector<Merge>& merges, std::size_t n, std::size_t applied) {
  std::vector<std::size_t> parent(n + merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < applied; ++i) {
    parent[find(merges[i].a)] = n + i;
    parent[find(merges[i].b)] = n + i;
  }
  std::vector<int> labels(n);
  for (std::size_t p = 0; p < n; ++p) labels[p] = static_cast<int>(find(p));
  detail::canonicalize_labels(labels);
  return labels;
}

/// Agglomerative merging with Lance-Williams updates. Equal distances are
/// resolved by the smallest (lower id, higher id) pair.
inline std::pair<Dendrogram, Clustering> hierarchical(const PointMatrix& points, HierarchicalCut cut,
                                                      Linkage linkage = Linkage::average) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw Error("hierarchical: empty input");
  if (const auto* c = std::get_if<std::size_t>(&cut.value); c && (*c < 1 || *c > n))
    throw Error("hierarchical: cut count " + std::to_string(*c) + " outside 1.." + std::to_string(n));
  if (const auto* t = std::get_if<double>(&cut.value); t && !(*t >= 0.0))
    throw Error("hierarchical: threshold must be >= 0");

  Eigen::MatrixXd dist(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();

  std::vector<std::size_t> id(n), size(n, 1);
  std::iota(id.begin(), id.end(), std::size_t{0});
  std::vector<bool> active(n, true);
  Dendrogram dendro;
  dendro.cut = cut;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double bd = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> bkey{SIZE_MAX, SIZE_MAX};
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const std::pair<std::size_t, std::size_t> key{std::min(id[i], id[j]), std::max(id[i], id[j])};
        if (d < bd || (d == bd && key < bkey)) {
          bd = d;
          bi = i;
          bj = j;
          bkey = key;
        }
      }
    }
    const double ni = static_cast<double>(size[bi]), nj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double dik = dist(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(k));
      const double djk = dist(static_cast<Eigen::Index>(bj), static_cast<Eigen::Index>(k));
      double d = 0.0;
      switch (linkage) {
        case Linkage::average: d = (ni * dik + nj * djk) / (ni + nj); break;
        case Linkage::single: d = std::min(dik, djk); break;
        case Linkage::complete: d = std::max(dik, djk); break;
      }
      dist(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(k)) = d;
      dist(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(bi)) = d;
    }
    dendro.merges.push_back({bkey.first, bkey.second, bd, size[bi] + size[bj]});
    active[bj] = false;
    size[bi] += size[bj];
    id[bi] = n + step;
  }

  std::size_t applied = 0;
  if (const auto* c = std::get_if<std::size_t>(&cut.value)) {
    applied = n - *c;
  } else {
    const double t = std::get<double>(cut.value);
    while (applied < dendro.merges.size() && dendro.merges[applied].distance <= t) ++applied;
  }

  Clustering cl;
  cl.labels = labels_after_merges(dendro.merges, n, applied);
  cl.method = ClusterMethod::hierarchical;
  cl.params = Json{{"linkage", std::string(to_string(linkage))}};
  if (const auto* c = std::get_if<std::size_t>(&cut.value))
    cl.params["cut_count"] = *c;
  else
    cl.params["cut_threshold"] = std::get<double>(cut.value);
  return {std::move(dendro), std::move(cl)};
}

// ---------------------------------------------------------------------------
// LDA by collapsed Gibbs sampling

struct TopicModel {
  Eigen::MatrixXd topic_word;  // T x V, rows sum to 1
  Eigen::MatrixXd doc_topic;   // N x T, rows sum to 1
  double alpha = 0.0;
  double beta = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<bool> excluded;            // documents without tokens
  std::vector<double> perplexity_trace;  // after each sweep

  Eigen::Index num_topics() const { return topic_word.rows(); }
};

/// exp(-sum_d sum_w n_dw log p(w|d) / total tokens), p(w|d) = sum_t theta_dt phi_tw.
inline double perplexity(const TopicModel& model, const SparseRowMatrix& counts) {
  if (counts.rows() != model.doc_topic.rows() || counts.cols() != model.topic_word.cols())
    throw Error("perplexity: counts do not match the model shape");
  double loglik = 0.0, total = 0.0;
  for (Eigen::Index d = 0; d < counts.outerSize(); ++d) {
    for (SparseRowMatrix::InnerIterator it(counts, d); it; ++it) {
      if (it.value() <= 0) continue;
      const double p = model.doc_topic.row(d).dot(model.topic_word.col(it.col()));
      if (!(p > 0.0)) throw Error("perplexity: zero probability for an observed token");
      loglik += it.value() * std::log(p);
      total += it.value();
    }
  }
  if (total <= 0) throw Error("perplexity: no tokens");
  return std::exp(-loglik / total);
}

namespace detail {

struct GibbsState {
  std::vector<std::size_t> doc_of, word_of;
  std::vector<int> topic_of;
  Eigen::MatrixXd n_dt, n_tw;
  Eigen::VectorXd n_t;
};

inline void estimate(const GibbsState& s, double alpha, double beta, TopicModel& m) {
  const auto topics = s.n_tw.rows();
  const auto vocab = s.n_tw.cols();
  m.topic_word.resize(topics, vocab);
  for (Eigen::Index t = 0; t < topics; ++t)
    m.topic_word.row(t) =
        (s.n_tw.row(t).array() + beta) / (s.n_t(t) + static_cast<double>(vocab) * beta);
  m.doc_topic.resize(s.n_dt.rows(), topics);
  for (Eigen::Index d = 0; d < s.n_dt.rows(); ++d)
    m.doc_topic.row(d) = (s.n_dt.row(d).array() + alpha) / (s.n_dt.row(d).sum() + static_cast<double>(topics) * alpha);
}

}  // namespace detail

/// Collapsed Gibbs sampling for `iterations` sweeps over documents in order.
/// The returned distributions are smoothed point estimates of the final state.
inline TopicModel lda(const SparseRowMatrix& counts, int num_topics, double alpha, double beta, int iterations,
                      std::uint64_t seed = 42) {
  if (num_topics < 1) throw Error("lda: num_topics must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw Error("lda: alpha and beta must be positive");
  if (iterations < 1) throw Error("lda: iterations must be >= 1");

  const auto docs = counts.rows();
  const auto vocab = counts.cols();
  detail::GibbsState s;
  s.n_dt = Eigen::MatrixXd::Zero(docs, num_topics);
  s.n_tw = Eigen::MatrixXd::Zero(num_topics, vocab);
  s.n_t = Eigen::VectorXd::Zero(num_topics);
  TopicModel model;
  model.excluded.assign(static_cast<std::size_t>(docs), true);
  for (Eigen::Index d = 0; d < counts.outerSize(); ++d) {
    for (SparseRowMatrix::InnerIterator it(counts, d); it; ++it) {
      const double v = it.value();
      if (v < 0 || v != std::floor(v)) throw Error("lda: counts must be non-negative integers");
      for (long c = 0; c < static_cast<long>(v); ++c) {
        s.doc_of.push_back(static_cast<std::size_t>(d));
        s.word_of.push_back(static_cast<std::size_t>(it.col()));
      }
      if (v > 0) model.excluded[static_cast<std::size_t>(d)] = false;
    }
  }
  if (s.doc_of.empty()) throw Error("lda: all-zero count matrix");

  detail::Rng rng(seed);
  s.topic_of.resize(s.doc_of.size());
  for (std::size_t i = 0; i < s.doc_of.size(); ++i) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_topics)));
    s.topic_of[i] = t;
    s.n_dt(static_cast<Eigen::Index>(s.doc_of[i]), t) += 1;
    s.n_tw(t, static_cast<Eigen::Index>(s.word_of[i])) += 1;
    s.n_t(t) += 1;
  }

  const double vbeta = static_cast<double>(vocab) * beta;
  std::vector<double> cum(static_cast<std::size_t>(num_topics));
  model.alpha = alpha;
  model.beta = beta;
  model.iterations = iterations;
  model.seed = seed;
  for (int sweep = 0; sweep < iterations; ++sweep) {
    for (std::size_t i = 0; i < s.doc_of.size(); ++i) {
      const auto d = static_cast<Eigen::Index>(s.doc_of[i]);
      const auto w = static_cast<Eigen::Index>(s.word_of[i]);
      int t = s.topic_of[i];
      s.n_dt(d, t) -= 1;
      s.n_tw(t, w) -= 1;
      s.n_t(t) -= 1;
      double total = 0.0;
      for (int k = 0; k < num_topics; ++k) {
        total += (s.n_dt(d, k) + alpha) * (s.n_tw(k, w) + beta) / (s.n_t(k) + vbeta);
        cum[static_cast<std::size_t>(k)] = total;
      }
      const double u = rng.uniform() * total;
      t = 0;
      while (t + 1 < num_topics && cum[static_cast<std::size_t>(t)] <= u) ++t;
      s.topic_of[i] = t;
      s.n_dt(d, t) += 1;
      s.n_tw(t, w) += 1;
      s.n_t(t) += 1;
    }
    detail::estimate(s, alpha, beta, model);
    model.perplexity_trace.push_back(perplexity(model, counts));
  }
  return model;
}

/// Hard assignment: most probable topic per document, kNoiseLabel for
/// documents that had no tokens.
inline Clustering lda_labels(const TopicModel& model) {
  Clustering c;
  c.method = ClusterMethod::lda;
  c.seed = model.seed;
  c.params = Json{{"num_topics", model.num_topics()},
                  {"alpha", model.alpha},
                  {"beta", model.beta},
                  {"iterations", model.iterations}};
  for (Eigen::Index d = 0; d < model.doc_topic.rows(); ++d) {
    if (model.excluded[static_cast<std::size_t>(d)]) {
      c.labels.push_back(kNoiseLabel);
      continue;
    }
    Eigen::Index best = 0;
    model.doc_topic.row(d).maxCoeff(&best);
    c.labels.push_back(static_cast<int>(best));
  }
  return c;
}

}  // namespace logmaint
