#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "logmaint/clustering.hpp"
#include "logmaint/corpus_io.hpp"
#include "logmaint/detail/csv.hpp"
#include "logmaint/detail/json_io.hpp"
#include "logmaint/detail/strings.hpp"
#include "logmaint/evaluation.hpp"
#include "logmaint/spellcorrect.hpp"
#include "logmaint/textnorm.hpp"
#include "logmaint/vectorspace.hpp"

namespace logmaint {

inline constexpr const char* kVersion = "logmaint 1.0.0";

enum class ClusterSpace { lsa, tfidf };

inline std::string_view to_string(ClusterSpace s) { return s == ClusterSpace::lsa ? "lsa" : "tfidf"; }

inline ClusterSpace parse_cluster_space(std::string_view s) {
  if (s == "lsa") return ClusterSpace::lsa;
  if (s == "tfidf") return ClusterSpace::tfidf;
  throw Error("unknown clustering space '" + std::string(s) + "' (expected lsa|tfidf)");
}

/// Parameters for one clustering run over a matrix file.
struct ClusterSettings {
  ClusterMethod method = ClusterMethod::kmeans;
  ClusterSpace space = ClusterSpace::lsa;
  int k = 8;  // clusters for kmeans / hier count cut, topics for lda
  int max_iter = 300;
  std::optional<double> eps;
  std::optional<int> min_pts;
  Linkage linkage = Linkage::average;
  std::optional<double> cut_threshold;
  std::optional<std::size_t> cut_count;
  std::optional<double> alpha;  // default 50 / k
  double beta = 0.01;
  int iters = 1000;
  std::uint64_t seed = 42;
};

struct EvaluationSettings {
  std::vector<std::string> metrics{"silhouette", "inertia", "intra-inter:cosine"};
  std::size_t coherence_top_n = 10;
  unsigned threads = 1;
};

/// Every pipeline parameter. Paths are kept apart from the rest so the
/// manifest's configuration block is machine-independent.
struct PipelineConfig {
  std::string input;
  ColumnMapping columns;
  TextField text_field = TextField::both;

  std::string resources;
  std::optional<std::string> abbrev, lexicon, stopwords, termbank, wordlist;
  std::optional<std::string> gold;

  std::size_t max_distance = kDefaultMaxDistance;
  bool correct_spelling = true;
  TfidfOptions tfidf;
  Eigen::Index lsa_k = 0;  // 0 = min(100, rank bound)
  ClusterSettings cluster;
  EvaluationSettings evaluation;

  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string out_dir = ".";
};

namespace detail {

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config key '" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  std::istringstream in{std::string(v)};
  T out{};
  in >> out;
  if (!in || !in.eof() || (std::is_unsigned_v<T> && v.find('-') != std::string_view::npos))
    throw Error("config key '" + std::string(key) + "': invalid number '" + std::string(v) + "'");
  return out;
}

inline std::optional<std::string> optional_path(std::string_view v) {
  if (v.empty() || v == "none") return std::nullopt;
  return std::string(v);
}

}  // namespace detail

/// Sets one configuration key from its text form. Unknown keys are errors.
inline void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_number;
  const std::string v(detail::trim(value));
  if (key == "input") c.input = v;
  else if (key == "id_col") c.columns.id = v;
  else if (key == "text_col") c.columns.issue = v;
  else if (key == "date_col") c.columns.date = detail::optional_path(v);
  else if (key == "action_col") c.columns.action = detail::optional_path(v);
  else if (key == "text_field") c.text_field = parse_text_field(v);
  else if (key == "resources") c.resources = v;
  else if (key == "abbrev") c.abbrev = detail::optional_path(v);
  else if (key == "lexicon") c.lexicon = detail::optional_path(v);
  else if (key == "stopwords") c.stopwords = detail::optional_path(v);
  else if (key == "termbank") c.termbank = detail::optional_path(v);
  else if (key == "wordlist") c.wordlist = detail::optional_path(v);
  else if (key == "gold") c.gold = detail::optional_path(v);
  else if (key == "max_distance") c.max_distance = parse_number<std::size_t>(key, v);
  else if (key == "correct_spelling") c.correct_spelling = detail::parse_bool(key, v);
  else if (key == "token_field") c.tfidf.field = parse_token_field(v);
  else if (key == "min_df") c.tfidf.min_df = parse_number<std::size_t>(key, v);
  else if (key == "sublinear_tf") c.tfidf.sublinear_tf = detail::parse_bool(key, v);
  else if (key == "lsa_k") c.lsa_k = parse_number<Eigen::Index>(key, v);
  else if (key == "method") c.cluster.method = parse_cluster_method(v);
  else if (key == "space") c.cluster.space = parse_cluster_space(v);
  else if (key == "k") c.cluster.k = parse_number<int>(key, v);
  else if (key == "max_iter") c.cluster.max_iter = parse_number<int>(key, v);
  else if (key == "eps") c.cluster.eps = v == "none" ? std::nullopt : std::optional(parse_number<double>(key, v));
  else if (key == "min_pts") c.cluster.min_pts = v == "none" ? std::nullopt : std::optional(parse_number<int>(key, v));
  else if (key == "linkage") c.cluster.linkage = parse_linkage(v);
  else if (key == "cut_threshold")
    c.cluster.cut_threshold = v == "none" ? std::nullopt : std::optional(parse_number<double>(key, v));
  else if (key == "cut_count")
    c.cluster.cut_count = v == "none" ? std::nullopt : std::optional(parse_number<std::size_t>(key, v));
  else if (key == "alpha") c.cluster.alpha = v == "none" ? std::nullopt : std::optional(parse_number<double>(key, v));
  else if (key == "beta") c.cluster.beta = parse_number<double>(key, v);
  else if (key == "iters") c.cluster.iters = parse_number<int>(key, v);
  else if (key == "metrics") {
    c.evaluation.metrics.clear();
    for (auto m : detail::split(v, ','))
      if (!detail::trim(m).empty()) c.evaluation.metrics.emplace_back(detail::trim(m));
  } else if (key == "coherence_top_n") c.evaluation.coherence_top_n = parse_number<std::size_t>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "threads") c.threads = parse_number<unsigned>(key, v);
  else if (key == "out_dir") c.out_dir = v;
  else throw Error("unknown config key '" + std::string(key) + "'");
}

/// Path-valued keys; relative values in a config file resolve against the file's directory.
inline bool is_path_key(std::string_view key) {
  return key == "input" || key == "resources" || key == "abbrev" || key == "lexicon" || key == "stopwords" ||
         key == "termbank" || key == "wordlist" || key == "gold" || key == "out_dir";
}

namespace detail {

inline std::string resolve_against(const std::filesystem::path& base, const std::string& v) {
  if (v.empty() || v == "none") return v;
  std::filesystem::path p(v);
  return p.is_absolute() ? v : (base / p).lexically_normal().string();
}

inline std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "none";
  if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : v) parts.push_back(json_scalar_text(e));
    return join(parts, ",");
  }
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace detail

/// Applies a `key = value` config file (or a manifest.json written by a
/// previous run) on top of `config`.
inline void apply_config_file(PipelineConfig& config, const std::string& path) {
  const auto text = detail::read_file(path);
  const auto base = std::filesystem::path(path).parent_path();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw Error(path + ": " + e.what());
    }
    for (const char* block : {"config", "paths"}) {
      if (!j.contains(block)) throw Error(path + ": manifest lacks a '" + std::string(block) + "' object");
      for (const auto& [k, v] : j.at(block).items()) {
        const auto value = detail::json_scalar_text(v);
        set_config_value(config, k, is_path_key(k) ? detail::resolve_against(base, value) : value);
      }
    }
    return;
  }
  std::size_t line_no = 0;
  for (auto line : detail::lines(text)) {
    ++line_no;
    const auto hash = line.find('#');
    auto body = detail::trim(hash == std::string_view::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(path, line_no, "expected key = value");
    const auto key = std::string(detail::trim(body.substr(0, eq)));
    const auto value = std::string(detail::trim(body.substr(eq + 1)));
    try {
      set_config_value(config, key, is_path_key(key) ? detail::resolve_against(base, value) : value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
}

/// Machine-independent parameters, typed.
inline Json config_to_json(const PipelineConfig& c) {
  const auto opt = [](const auto& o) -> Json { return o ? Json(*o) : Json(nullptr); };
  Json j;
  j["id_col"] = c.columns.id;
  j["text_col"] = c.columns.issue;
  j["date_col"] = opt(c.columns.date);
  j["action_col"] = opt(c.columns.action);
  j["text_field"] = std::string(to_string(c.text_field));
  j["max_distance"] = c.max_distance;
  j["correct_spelling"] = c.correct_spelling;
  j["token_field"] = std::string(to_string(c.tfidf.field));
  j["min_df"] = c.tfidf.min_df;
  j["sublinear_tf"] = c.tfidf.sublinear_tf;
  j["lsa_k"] = c.lsa_k;
  j["method"] = std::string(to_string(c.cluster.method));
  j["space"] = std::string(to_string(c.cluster.space));
  j["k"] = c.cluster.k;
  j["max_iter"] = c.cluster.max_iter;
  j["eps"] = opt(c.cluster.eps);
  j["min_pts"] = opt(c.cluster.min_pts);
  j["linkage"] = std::string(to_string(c.cluster.linkage));
  j["cut_threshold"] = opt(c.cluster.cut_threshold);
  j["cut_count"] = opt(c.cluster.cut_count);
  j["alpha"] = opt(c.cluster.alpha);
  j["beta"] = c.cluster.beta;
  j["iters"] = c.cluster.iters;
  j["metrics"] = c.evaluation.metrics;
  j["coherence_top_n"] = c.evaluation.coherence_top_n;
  j["seed"] = c.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Resources

struct ResolvedResources {
  ResourcePaths paths;
  std::optional<std::string> wordlist;
};

/// Explicit per-resource paths win; otherwise the standard file names inside
/// the resource directory (words.txt only when present).
inline ResolvedResources resolve_resources(const PipelineConfig& c) {
  namespace fs = std::filesystem;
  ResolvedResources r;
  const auto pick = [&](const std::optional<std::string>& explicit_path, const char* name) -> std::optional<std::string> {
    if (explicit_path) return explicit_path;
    if (c.resources.empty()) return std::nullopt;
    return (fs::path(c.resources) / name).string();
  };
  r.paths.abbreviations = pick(c.abbrev, "abbrev.tsv");
  r.paths.lexicon = pick(c.lexicon, "lexicon.tsv");
  r.paths.stopwords = pick(c.stopwords, "stopwords.txt");
  r.paths.termbank = pick(c.termbank, "termbank.tsv");
  r.wordlist = c.wordlist;
  if (!r.wordlist && !c.resources.empty() && fs::exists(fs::path(c.resources) / "words.txt"))
    r.wordlist = (fs::path(c.resources) / "words.txt").string();
  return r;
}

// ---------------------------------------------------------------------------
// Clustering over a matrix file

struct ClusterOutput {
  Clustering clustering;
  ClusterSpace space = ClusterSpace::lsa;
  std::optional<Dendrogram> dendrogram;
  std::optional<TopicModel> topics;
};

/// Rows used for geometric clustering and silhouette.
inline PointMatrix clustering_points(const MatrixFile& mf, ClusterSpace space) {
  if (space == ClusterSpace::lsa) {
    if (!mf.lsa) throw Error("matrix file has no LSA embedding; use space=tfidf or vectorize with --lsa-k");
    return mf.lsa->embedding;
  }
  return PointMatrix(mf.tfidf);
}

/// Rows whose TF-IDF vector is zero (documents left empty after preprocessing and pruning).
inline std::vector<bool> zero_rows(const SparseRowMatrix& m) {
  std::vector<bool> out(static_cast<std::size_t>(m.rows()), true);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(m, r); it; ++it)
      if (it.value() != 0.0) out[static_cast<std::size_t>(r)] = false;
  return out;
}

inline ClusterOutput run_clustering(const MatrixFile& mf, const ClusterSettings& s) {
  ClusterOutput out;
  out.space = s.space;
  switch (s.method) {
    case ClusterMethod::kmeans:
      out.clustering = kmeans(clustering_points(mf, s.space), s.k, s.seed, s.max_iter);
      break;
    case ClusterMethod::dbscan: {
      if (!s.eps || !s.min_pts) throw Error("dbscan requires both eps and min_pts");
      out.clustering = dbscan(clustering_points(mf, s.space), *s.eps, *s.min_pts, zero_rows(mf.tfidf));
      out.clustering.seed = s.seed;
      break;
    }
    case ClusterMethod::hierarchical: {
      const auto cut = s.cut_threshold ? HierarchicalCut::threshold(*s.cut_threshold)
                                       : HierarchicalCut::count(s.cut_count.value_or(static_cast<std::size_t>(s.k)));
      auto [dendro, clustering] = hierarchical(clustering_points(mf, s.space), cut, s.linkage);
      out.dendrogram = std::move(dendro);
      out.clustering = std::move(clustering);
      out.clustering.seed = s.seed;
      break;
    }
    case ClusterMethod::lda: {
      const double alpha = s.alpha.value_or(50.0 / static_cast<double>(s.k));
      out.topics = lda(mf.counts, s.k, alpha, s.beta, s.iters, s.seed);
      out.clustering = lda_labels(*out.topics);
      break;
    }
  }
  out.clustering.params["space"] = std::string(to_string(s.space));
  return out;
}

inline std::string clusters_csv(const std::vector<std::string>& record_ids, const std::vector<int>& labels) {
  std::string out = "record_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out += detail::csv_escape(record_ids.at(i)) + ',' + std::to_string(labels[i]) + '\n';
  return out;
}

/// Sidecar: method, parameters, and the method's diagnostics.
inline Json cluster_sidecar(const ClusterOutput& o) {
  const auto& c = o.clustering;
  Json j;
  j["format"] = "logmaint-clusters";
  j["method"] = std::string(to_string(c.method));
  j["params"] = c.params;
  j["seed"] = c.seed;
  j["num_clusters"] = c.num_clusters();
  j["noise"] = std::count(c.labels.begin(), c.labels.end(), kNoiseLabel);
  Json diag = Json::object();
  if (c.method == ClusterMethod::kmeans) {
    diag["inertia_trace"] = c.inertia_trace;
    diag["centroids"] = detail::dense_to_json(*c.centroids);
  }
  if (o.dendrogram) {
    Json merges = Json::array();
    for (const auto& m : o.dendrogram->merges) merges.push_back(Json::array({m.a, m.b, m.distance, m.size}));
    diag["merges"] = std::move(merges);
  }
  if (o.topics) {
    diag["perplexity_trace"] = o.topics->perplexity_trace;
    diag["topic_word"] = detail::dense_to_json(o.topics->topic_word);
    diag["doc_topic"] = detail::dense_to_json(o.topics->doc_topic);
  }
  j["diagnostics"] = std::move(diag);
  return j;
}

/// Rebuilds the parts of a ClusterOutput that evaluation needs from the CSV and its sidecar.
inline ClusterOutput cluster_output_from_files(const std::string& csv_text, const std::string& csv_path,
                                               const Json& sidecar, const MatrixFile& mf) {
  ClusterOutput o;
  const auto rows = detail::parse_csv(csv_text, csv_path);
  if (rows.empty() || rows[0].fields.size() < 2 || rows[0].fields[0] != "record_id" || rows[0].fields[1] != "label")
    throw Error(csv_path + ": expected header record_id,label");
  if (rows.size() - 1 != mf.record_ids.size())
    throw Error(csv_path + ": " + std::to_string(rows.size() - 1) + " rows but the matrix has " +
                std::to_string(mf.record_ids.size()) + " documents");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].fields.size() < 2 || rows[r].fields[0] != mf.record_ids[r - 1])
      throw ParseError(csv_path, rows[r].line, "record ids out of step with the matrix file");
    o.clustering.labels.push_back(detail::parse_number<int>("label", rows[r].fields[1]));
  }
  o.clustering.method = parse_cluster_method(sidecar.at("method").get<std::string>());
  o.clustering.params = sidecar.at("params");
  o.clustering.seed = sidecar.at("seed").get<std::uint64_t>();
  o.space = parse_cluster_space(o.clustering.params.value("space", "lsa"));
  const auto& diag = sidecar.at("diagnostics");
  const int k = o.clustering.num_clusters();
  if (diag.contains("centroids"))
    o.clustering.centroids = detail::dense_from_json(diag.at("centroids"), k, static_cast<Eigen::Index>(
                                                         diag.at("centroids").size() / static_cast<std::size_t>(std::max(1, k))));
  if (diag.contains("topic_word")) {
    TopicModel m;
    const auto topics = o.clustering.params.at("num_topics").get<Eigen::Index>();
    m.topic_word = detail::dense_from_json(diag.at("topic_word"), topics, mf.counts.cols());
    m.doc_topic = detail::dense_from_json(diag.at("doc_topic"), mf.counts.rows(), topics);
    m.alpha = o.clustering.params.at("alpha").get<double>();
    m.beta = o.clustering.params.at("beta").get<double>();
    m.iterations = o.clustering.params.at("iterations").get<int>();
    m.seed = o.clustering.seed;
    m.perplexity_trace = diag.at("perplexity_trace").get<std::vector<double>>();
    for (int l : o.clustering.labels) m.excluded.push_back(l == kNoiseLabel);
    o.topics = std::move(m);
  }
  return o;
}

// ---------------------------------------------------------------------------
// Evaluation over artifacts

/// Gold file `record_id,label`; labels are arbitrary strings mapped to
/// integers by first appearance. Every document must be labelled.
inline std::vector<int> load_gold_labels(const std::string& path, const std::vector<std::string>& record_ids) {
  const auto rows = detail::parse_csv(detail::read_file(path), path);
  if (rows.empty()) throw Error(path + ": empty gold file");
  std::map<std::string, std::string> by_id;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].fields.size() < 2) throw ParseError(path, rows[r].line, "expected record_id,label");
    if (!by_id.emplace(std::string(detail::trim(rows[r].fields[0])), std::string(detail::trim(rows[r].fields[1]))).second)
      throw ParseError(path, rows[r].line, "duplicate record id " + rows[r].fields[0]);
  }
  std::map<std::string, int> ids;
  std::vector<std::string> order;
  std::vector<int> out;
  for (const auto& rid : record_ids) {
    const auto it = by_id.find(rid);
    if (it == by_id.end()) throw Error(path + ": no gold label for record " + rid);
    const auto [lt, inserted] = ids.emplace(it->second, static_cast<int>(ids.size()));
    out.push_back(lt->second);
  }
  return out;
}

/// Computes the requested metrics. Metrics that do not apply (silhouette with
/// fewer than two clusters, topic metrics for non-LDA runs) are listed in
/// `skipped` instead of failing the run.
inline EvaluationReport evaluate_clustering(const MatrixFile& mf, const std::vector<ProcessedDocument>& docs,
                                            const ClusterOutput& co, const EvaluationSettings& settings,
                                            const std::optional<std::vector<int>>& gold = std::nullopt) {
  const auto& labels = co.clustering.labels;
  if (docs.size() != labels.size()) throw Error("evaluate: processed documents and labels differ in length");
  EvaluationReport r;
  r.method = co.clustering.method;
  r.documents = labels.size();
  r.noise = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoiseLabel));
  std::optional<PointMatrix> points;
  const auto get_points = [&]() -> const PointMatrix& {
    if (!points) points = clustering_points(mf, co.space);
    return *points;
  };

  for (const auto& name : settings.metrics) {
    if (name == "silhouette") {
      std::vector<int> seen;
      for (int l : labels)
        if (l >= 0 && std::find(seen.begin(), seen.end(), l) == seen.end()) seen.push_back(l);
      if (seen.size() < 2) {
        r.skipped.push_back("silhouette: fewer than 2 clusters");
        continue;
      }
      r.metrics["silhouette"] = silhouette(get_points(), labels, settings.threads).mean;
    } else if (name == "inertia") {
      if (co.clustering.num_clusters() == 0) {
        r.skipped.push_back("inertia: no clustered points");
        continue;
      }
      r.metrics["inertia"] = co.clustering.method == ClusterMethod::kmeans && co.clustering.centroids
                                 ? inertia(get_points(), co.clustering)
                                 : inertia(get_points(), labels);
    } else if (name == "perplexity") {
      if (!co.topics) {
        r.skipped.push_back("perplexity: not a topic model");
        continue;
      }
      r.metrics["perplexity"] = perplexity(*co.topics, mf.counts);
    } else if (name == "coherence") {
      if (!co.topics) {
        r.skipped.push_back("coherence: not a topic model");
        continue;
      }
      const auto n = std::min<std::size_t>(settings.coherence_top_n, static_cast<std::size_t>(mf.counts.cols()));
      if (n < 2) {
        r.skipped.push_back("coherence: vocabulary smaller than 2");
        continue;
      }
      r.coherence = coherence(*co.topics, mf.counts, n);
      r.metrics["coherence"] = r.coherence->mean;
      for (const auto& ids : r.coherence->top_words) {
        auto& terms = r.top_terms.emplace_back();
        for (auto id : ids) terms.push_back(mf.vocabulary.terms.at(id));
      }
    } else if (name.rfind("intra-inter:", 0) == 0) {
      const auto metric = parse_similarity_metric(std::string_view(name).substr(12));
      if (co.clustering.num_clusters() == 0) {
        r.skipped.push_back(name + ": no clusters");
        continue;
      }
      SimilarityInput in;
      if (metric == SimilarityMetric::cosine) in.vectors = &mf.tfidf;
      else
        for (const auto& d : docs) in.texts.push_back(detail::join(terms_of(d, mf.tfidf_options.field), " "));
      r.similarity.push_back(cluster_similarity_report(in, labels, metric, settings.threads));
    } else {
      throw Error("unknown evaluation metric '" + name +
                  "' (expected silhouette|inertia|perplexity|coherence|intra-inter:<levenshtein|jaro|cosine>)");
    }
  }
  if (gold) r.gold = compare_to_gold(labels, *gold);
  return r;
}

// ---------------------------------------------------------------------------
// End-to-end run

inline const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> stages{"ingest", "normalize", "expand", "correct", "filter", "tag",
                                               "lemmatize", "stem", "vectorize", "reduce", "cluster", "evaluate"};
  return stages;
}

inline const std::vector<std::string>& artifact_names() {
  static const std::vector<std::string> names{"processed.jsonl", "matrix.json", "clusters.csv",
                                              "clusters.json", "report.json", "manifest.json"};
  return names;
}

/// Error raised by run_pipeline; `stage` is one of stage_order() or "config"/"write".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

using LogSink = std::function<void(const std::string&)>;

/// Checks every referenced path and the method-specific parameters.
inline void validate_config(const PipelineConfig& c) {
  namespace fs = std::filesystem;
  const auto require = [](const std::optional<std::string>& p, const char* what) {
    if (p && !fs::is_regular_file(*p)) throw Error(std::string(what) + " file not found: " + *p);
  };
  if (c.input.empty()) throw Error("no input corpus configured");
  require(c.input, "input");
  if (!c.resources.empty() && !fs::is_directory(c.resources))
    throw Error("resource directory not found: " + c.resources);
  const auto r = resolve_resources(c);
  require(r.paths.abbreviations, "abbreviation");
  require(r.paths.lexicon, "lexicon");
  require(r.paths.stopwords, "stop-word");
  require(r.paths.termbank, "term bank");
  require(r.wordlist, "word list");
  require(c.gold, "gold");
  if (c.max_distance < 1) throw Error("max_distance must be >= 1");
  if (c.tfidf.min_df < 1) throw Error("min_df must be >= 1");
  if (c.lsa_k < 0) throw Error("lsa_k must be >= 0");
  if (c.cluster.method == ClusterMethod::dbscan && (!c.cluster.eps || !c.cluster.min_pts))
    throw Error("dbscan requires both eps and min_pts");
  if (c.cluster.k < 1) throw Error("k must be >= 1");
}

struct PipelineResult {
  std::map<std::string, std::string> artifacts;  // name -> file contents
};

/// Runs every stage in order and writes the artifacts into config.out_dir.
/// On failure, files written by this run are removed and a StageError names
/// the stage.
inline PipelineResult run_pipeline(const PipelineConfig& config, const LogSink& log = {}) {
  namespace fs = std::filesystem;
  const auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  std::string stage = "config";
  std::vector<fs::path> written;
  PipelineResult result;
  try {
    validate_config(config);
    const auto res = resolve_resources(config);

    stage = "ingest";
    const auto corpus = load_corpus(config.input, config.columns, config.text_field);
    const auto bundle = load_resources(res.paths);
    const DomainDictionary extra = res.wordlist ? load_wordlist(*res.wordlist) : DomainDictionary{};
    say("[ingest] " + std::to_string(corpus.size()) + " records (" + std::to_string(corpus.skipped_rows) +
        " skipped), " + std::to_string(bundle.abbreviations.entries.size()) + " abbreviations, " +
        std::to_string(bundle.lexicon.entries.size()) + " lexicon entries, " +
        std::to_string(bundle.stopwords.words.size()) + " stop words, " +
        std::to_string(bundle.termbank.entries.size()) + " terms");

    stage = "normalize";
    const auto dictionary = build_domain_dictionary(corpus, bundle, extra);
    PreprocessOptions popt;
    popt.max_distance = config.max_distance;
    popt.correct_spelling = config.correct_spelling;
    popt.threads = config.threads;
    const auto docs = preprocess_corpus(corpus, bundle, dictionary, popt);
    std::size_t surfaces = 0, expanded = 0, corrected = 0, dropped = 0, kept = 0, empty = 0;
    for (const auto& d : docs) {
      dropped += d.dropped_stopwords;
      kept += d.tokens.size();
      empty += d.empty ? 1 : 0;
      for (const auto& t : d.tokens) {
        expanded += t.source == CorrectionSource::abbreviation;
        corrected += t.source == CorrectionSource::spelling;
      }
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) surfaces += normalize_tokenize(corpus.text(i)).size();
    say("[normalize] " + std::to_string(surfaces) + " tokens");
    say("[expand] " + std::to_string(expanded) + " tokens from abbreviations (after filtering)");
    say("[correct] " + std::to_string(corrected) + " spelling corrections (dictionary " +
        std::to_string(dictionary.size()) + " words, max distance " + std::to_string(config.max_distance) + ")");
    say("[filter] " + std::to_string(dropped) + " stop words removed, " + std::to_string(kept) + " tokens kept, " +
        std::to_string(empty) + " empty documents");
    say("[tag] lexicon lookup + suffix rules");
    say("[lemmatize] exception-aware");
    say("[stem] porter2 with lexicon overrides");
    result.artifacts["processed.jsonl"] = to_jsonl(docs);

    stage = "vectorize";
    auto tf = build_tfidf(docs, config.tfidf);
    say("[vectorize] " + std::to_string(tf.matrix.rows()) + " x " + std::to_string(tf.matrix.cols()) + " tf-idf (" +
        std::string(to_string(config.tfidf.field)) + ", min_df " + std::to_string(config.tfidf.min_df) + ")");

    stage = "reduce";
    MatrixFile mf;
    mf.record_ids = tf.matrix.record_ids;
    mf.vocabulary = tf.vocabulary;
    mf.tfidf = tf.matrix.weights;
    mf.counts = tf.counts;
    mf.tfidf_options = config.tfidf;
    mf.seed = config.seed;
    const Eigen::Index bound = std::min(mf.tfidf.rows(), mf.tfidf.cols());
    const Eigen::Index k = config.lsa_k == 0 ? default_lsa_k(mf.tfidf) : std::min(config.lsa_k, bound);
    mf.lsa = lsa_reduce(mf.tfidf, k, config.seed);
    say("[reduce] lsa k=" + std::to_string(k) + (config.lsa_k > bound ? " (clamped from " + std::to_string(config.lsa_k) + ")" : ""));
    result.artifacts["matrix.json"] = to_json_text(to_json(mf)) + "\n";

    stage = "cluster";
    auto settings = config.cluster;
    settings.seed = config.seed;
    const auto co = run_clustering(mf, settings);
    say("[cluster] " + std::string(to_string(co.clustering.method)) + ": " +
        std::to_string(co.clustering.num_clusters()) + " clusters");
    result.artifacts["clusters.csv"] = clusters_csv(mf.record_ids, co.clustering.labels);
    result.artifacts["clusters.json"] = to_json_text(cluster_sidecar(co), 2) + "\n";

    stage = "evaluate";
    std::optional<std::vector<int>> gold;
    if (config.gold) gold = load_gold_labels(*config.gold, mf.record_ids);
    auto eval = config.evaluation;
    eval.threads = config.threads;
    const auto report = evaluate_clustering(mf, docs, co, eval, gold);
    result.artifacts["report.json"] = to_json_text(to_json(report), 2) + "\n";
    say("[evaluate] " + std::to_string(report.metrics.size()) + " metrics");

    stage = "write";
    Json manifest;
    manifest["format"] = "logmaint-manifest";
    manifest["version"] = kVersion;
    manifest["stages"] = stage_order();
    manifest["config"] = config_to_json(config);
    const auto abs = [](const std::string& p) { return fs::absolute(p).lexically_normal().string(); };
    const auto opt = [&](const std::optional<std::string>& p) -> Json { return p ? Json(abs(*p)) : Json(nullptr); };
    manifest["paths"] = Json{{"input", abs(config.input)},
                             {"resources", config.resources.empty() ? std::string() : abs(config.resources)},
                             {"abbrev", opt(res.paths.abbreviations)},
                             {"lexicon", opt(res.paths.lexicon)},
                             {"stopwords", opt(res.paths.stopwords)},
                             {"termbank", opt(res.paths.termbank)},
                             {"wordlist", opt(res.wordlist)},
                             {"gold", opt(config.gold)}};
    Json sums;
    const auto checksum = [&](const char* role, const std::optional<std::string>& p) {
      sums[role] = p ? Json(detail::fnv1a_hex(detail::read_file(*p))) : Json(nullptr);
    };
    checksum("input", config.input);
    checksum("abbrev", res.paths.abbreviations);
    checksum("lexicon", res.paths.lexicon);
    checksum("stopwords", res.paths.stopwords);
    checksum("termbank", res.paths.termbank);
    checksum("wordlist", res.wordlist);
    checksum("gold", config.gold);
    manifest["inputs_fnv1a64"] = std::move(sums);
    Json outs;
    for (const auto& name : artifact_names())
      if (result.artifacts.count(name)) outs[name] = detail::fnv1a_hex(result.artifacts[name]);
    manifest["artifacts_fnv1a64"] = std::move(outs);
    result.artifacts["manifest.json"] = to_json_text(manifest, 2) + "\n";

    fs::create_directories(config.out_dir);
    for (const auto& name : artifact_names()) {
      const auto path = fs::path(config.out_dir) / name;
      written.push_back(path);
      detail::write_file(path.string(), result.artifacts.at(name));
    }
    say("[write] " + std::to_string(written.size()) + " artifacts in " + config.out_dir);
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw StageError(stage, e.what());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Self-test against committed artifacts

struct SelftestResult {
  bool passed = true;
  std::vector<std::string> lines;  // one "PASS name" / "FAIL name: reason" per artifact
};

/// Manifest minus its machine-dependent path block.
inline std::string portable_manifest(const std::string& text) {
  auto j = Json::parse(text);
  j.erase("paths");
  return to_json_text(j, 2);
}

/// Runs the bundled fixture configuration (`<data_dir>/fixture/pipeline.conf`)
/// into out_dir and compares every artifact with `<data_dir>/fixture/expected/`.
inline SelftestResult selftest(const std::string& data_dir, const std::string& out_dir, unsigned threads = 1,
                               const LogSink& log = {}) {
  namespace fs = std::filesystem;
  PipelineConfig config;
  apply_config_file(config, (fs::path(data_dir) / "fixture" / "pipeline.conf").string());
  config.out_dir = out_dir;
  config.threads = threads;
  const auto run = run_pipeline(config, log);
  SelftestResult out;
  const auto expected_dir = fs::path(data_dir) / "fixture" / "expected";
  for (const auto& name : artifact_names()) {
    const auto path = expected_dir / name;
    if (!fs::exists(path)) {
      out.passed = false;
      out.lines.push_back("FAIL " + name + ": missing expected file " + path.string());
      continue;
    }
    auto want = detail::read_file(path.string());
    auto got = run.artifacts.at(name);
    if (name == "manifest.json") {
      want = portable_manifest(want);
      got = portable_manifest(got);
    }
    if (want == got) {
      out.lines.push_back("PASS " + name);
    } else {
      out.passed = false;
      out.lines.push_back("FAIL " + name + ": differs from " + path.string());
    }
  }
  return out;
}

}  // namespace logmaint
