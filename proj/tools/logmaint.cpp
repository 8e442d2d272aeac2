#include <deque>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "logmaint/logmaint.hpp"

#ifndef LOGMAINT_DATA_DIR
#define LOGMAINT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace logmaint;

namespace {

/// Flag values kept as text and applied through the config setter, so flags,
/// config files and manifests share one parser.
struct Overrides {
  struct Entry {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
  };
  std::deque<Entry> entries;  // stable addresses for CLI11 to write into

  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& e = entries.emplace_back(Entry{key, {}, nullptr});
    e.option = app->add_option(flag, e.value, help);
    return e.option;
  }

  void apply(PipelineConfig& c) const {
    for (const auto& e : entries)
      if (e.option->count() > 0) set_config_value(c, e.key, e.value);
  }
};

void add_column_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--id-col", "id_col", "ID column header");
  o.add(app, "--text-col", "text_col", "issue text column header");
  o.add(app, "--date-col", "date_col", "date column header ('none' to ignore)");
  o.add(app, "--action-col", "action_col", "action text column header ('none' to ignore)");
  o.add(app, "--text-field", "text_field", "issue|action|both");
}

void add_resource_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--resources", "resources", "directory with abbrev.tsv, lexicon.tsv, stopwords.txt, termbank.tsv");
  o.add(app, "--abbrev", "abbrev", "abbreviation dictionary");
  o.add(app, "--lexicon", "lexicon", "morphosyntactic lexicon");
  o.add(app, "--stopwords", "stopwords", "stop-word list");
  o.add(app, "--termbank", "termbank", "term bank");
  o.add(app, "--wordlist", "wordlist", "extra dictionary words (word[<TAB>count])");
  o.add(app, "--max-distance", "max_distance", "maximum edit distance for spelling correction");
  o.add(app, "--correct-spelling", "correct_spelling", "true|false");
}

void add_vector_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--field", "token_field", "lemma|stem|surface|corrected");
  o.add(app, "--min-df", "min_df", "minimum document frequency");
  o.add(app, "--sublinear-tf", "sublinear_tf", "true|false");
  o.add(app, "--lsa-k", "lsa_k", "LSA dimensions (0 = min(100, rank bound))");
}

void add_cluster_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--method", "method", "kmeans|dbscan|hier|lda");
  o.add(app, "--space", "space", "lsa|tfidf");
  o.add(app, "--k", "k", "clusters (kmeans, hier count cut) or topics (lda)");
  o.add(app, "--max-iter", "max_iter", "k-means iteration cap");
  o.add(app, "--eps", "eps", "DBSCAN radius");
  o.add(app, "--min-pts", "min_pts", "DBSCAN core-point threshold");
  o.add(app, "--linkage", "linkage", "average|single|complete");
  o.add(app, "--cut-threshold", "cut_threshold", "hierarchical distance cut");
  o.add(app, "--cut-count", "cut_count", "hierarchical cluster-count cut");
  o.add(app, "--alpha", "alpha", "LDA document-topic prior (default 50/k)");
  o.add(app, "--beta", "beta", "LDA topic-word prior");
  o.add(app, "--iters", "iters", "Gibbs sweeps");
}

void add_eval_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--metrics", "metrics",
        "comma list of silhouette,inertia,perplexity,coherence,intra-inter:<levenshtein|jaro|cosine>");
  o.add(app, "--coherence-top-n", "coherence_top_n", "top words per topic for coherence");
  o.add(app, "--gold", "gold", "gold labels, CSV record_id,label");
}

std::string out_path(const std::string& explicit_out, const std::string& out_dir, const char* name) {
  if (!explicit_out.empty()) return explicit_out;
  return (fs::path(out_dir) / name).string();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  detail::write_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maintenance logbook text mining: normalization, correction, TF-IDF/LSA, clustering, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".", data_dir = LOGMAINT_DATA_DIR;
  std::string seed_text, threads_text;
  bool quiet = false;
  auto* seed_opt = app.add_option("--seed", seed_text, "random seed (default 42)");
  auto* threads_opt = app.add_option("--threads", threads_text, "worker threads (output does not depend on it)");
  app.add_option("--config", config_path, "key = value config file, or a manifest.json from a previous run")
      ->check(CLI::ExistingFile);
  auto* out_dir_opt = app.add_option("--out-dir", out_dir, "directory for output artifacts");
  app.add_flag("--quiet", quiet, "suppress progress messages");
  app.add_option("--data-dir", data_dir, "bundled data directory (fixture and sample resources)");

  Overrides o;
  std::string input, out, matrix_path, clusters_path, processed_path, dict_path, pairs_path;

  auto* pre = app.add_subcommand("preprocess", "corpus CSV -> processed.jsonl");
  pre->add_option("--input", input, "corpus CSV")->required();
  pre->add_option("--out", out, "output JSONL (default <out-dir>/processed.jsonl)");
  add_column_flags(pre, o);
  add_resource_flags(pre, o);

  auto* cor = app.add_subcommand("correct", "spelling-correct a token list, or score a corrector on pairs");
  cor->add_option("--dict", dict_path, "word list (word[<TAB>count])")->required()->check(CLI::ExistingFile);
  cor->add_option("--input", input, "tokens, whitespace separated")->check(CLI::ExistingFile);
  cor->add_option("--pairs", pairs_path, "evaluation pairs nonstandard<TAB>gold[<TAB>doc]")->check(CLI::ExistingFile);
  cor->add_option("--out", out, "output file (default stdout)");
  o.add(cor, "--abbrev", "abbrev", "abbreviation dictionary applied before spelling");
  o.add(cor, "--max-distance", "max_distance", "maximum edit distance");

  auto* vec = app.add_subcommand("vectorize", "processed.jsonl -> matrix.json (TF-IDF + LSA)");
  vec->add_option("--input", input, "processed JSONL")->required()->check(CLI::ExistingFile);
  vec->add_option("--out", out, "matrix file (default <out-dir>/matrix.json)");
  add_vector_flags(vec, o);

  auto* clu = app.add_subcommand("cluster", "matrix.json -> clusters.csv + clusters.json");
  clu->add_option("--matrix", matrix_path, "matrix file")->required()->check(CLI::ExistingFile);
  clu->add_option("--out", out, "labels CSV (default <out-dir>/clusters.csv); sidecar uses .json");
  add_cluster_flags(clu, o);

  auto* eva = app.add_subcommand("evaluate", "cluster quality report as JSON");
  eva->add_option("--clusters", clusters_path, "clusters.csv (its .json sidecar must sit beside it)")
      ->required()
      ->check(CLI::ExistingFile);
  eva->add_option("--matrix", matrix_path, "matrix file")->required()->check(CLI::ExistingFile);
  eva->add_option("--processed", processed_path, "processed JSONL")->required()->check(CLI::ExistingFile);
  eva->add_option("--out", out, "report file (default stdout)");
  add_eval_flags(eva, o);

  auto* pip = app.add_subcommand("pipeline", "run every stage and write all artifacts to --out-dir");
  o.add(pip, "--input", "input", "corpus CSV");
  add_column_flags(pip, o);
  add_resource_flags(pip, o);
  add_vector_flags(pip, o);
  add_cluster_flags(pip, o);
  add_eval_flags(pip, o);

  auto* self = app.add_subcommand("selftest", "run the bundled fixture and compare with committed artifacts");

  CLI11_PARSE(app, argc, argv);

  const auto log = [&](const std::string& s) {
    if (!quiet) std::cerr << s << '\n';
  };

  try {
    PipelineConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    o.apply(cfg);
    if (seed_opt->count()) set_config_value(cfg, "seed", seed_text);
    if (threads_opt->count()) set_config_value(cfg, "threads", threads_text);
    if (out_dir_opt->count()) cfg.out_dir = out_dir;

    if (*pre) {
      cfg.input = input;
      validate_config(cfg);
      const auto res = resolve_resources(cfg);
      const auto corpus = load_corpus(cfg.input, cfg.columns, cfg.text_field);
      const auto bundle = load_resources(res.paths);
      const auto extra = res.wordlist ? load_wordlist(*res.wordlist) : DomainDictionary{};
      PreprocessOptions popt{cfg.max_distance, cfg.correct_spelling, cfg.threads};
      const auto docs = preprocess_corpus(corpus, bundle, build_domain_dictionary(corpus, bundle, extra), popt);
      const auto path = out_path(out, cfg.out_dir, "processed.jsonl");
      write_output(path, to_jsonl(docs));
      log("preprocess: " + std::to_string(docs.size()) + " documents -> " + path);
    } else if (*cor) {
      if (input.empty() == pairs_path.empty()) throw Error("correct: give exactly one of --input or --pairs");
      const auto dict = load_wordlist(dict_path);
      const auto abbrevs = cfg.abbrev ? load_abbreviations(*cfg.abbrev) : AbbreviationDictionary{};
      if (!pairs_path.empty()) {
        const auto pairs = parse_eval_pairs(detail::read_file(pairs_path), pairs_path);
        const auto ev = evaluate_corrector(pairs, [&](std::string_view t) {
          return correct(t, abbrevs, dict, cfg.max_distance).replacement;
        });
        Json j{{"total_documents", ev.total_documents},
               {"total_unique_tokens", ev.total_unique_tokens},
               {"total_nonstandard", ev.total_nonstandard},
               {"corrected_correctly", ev.corrected_correctly},
               {"success_rate", ev.success_rate}};
        write_output(out, to_json_text(j, 2) + "\n");
      } else {
        std::string tsv;
        for (const auto& tok : detail::split_whitespace(detail::read_file(input))) {
          const auto c = correct(detail::to_lower(tok), abbrevs, dict, cfg.max_distance);
          tsv += c.original + '\t' + c.replacement + '\t' + std::to_string(c.distance) + '\t' +
                 std::string(to_string(c.source)) + '\n';
        }
        write_output(out, tsv);
      }
    } else if (*vec) {
      const auto docs = load_jsonl(input);
      auto tf = build_tfidf(docs, cfg.tfidf);
      MatrixFile mf;
      mf.record_ids = tf.matrix.record_ids;
      mf.vocabulary = std::move(tf.vocabulary);
      mf.tfidf = std::move(tf.matrix.weights);
      mf.counts = std::move(tf.counts);
      mf.tfidf_options = cfg.tfidf;
      mf.seed = cfg.seed;
      const Eigen::Index bound = std::min(mf.tfidf.rows(), mf.tfidf.cols());
      const Eigen::Index k = cfg.lsa_k == 0 ? default_lsa_k(mf.tfidf) : std::min(cfg.lsa_k, bound);
      mf.lsa = lsa_reduce(mf.tfidf, k, cfg.seed);
      const auto path = out_path(out, cfg.out_dir, "matrix.json");
      write_output(path, to_json_text(to_json(mf)) + "\n");
      log("vectorize: " + std::to_string(mf.tfidf.rows()) + " x " + std::to_string(mf.tfidf.cols()) + ", lsa k=" +
          std::to_string(k) + " -> " + path);
    } else if (*clu) {
      const auto mf = load_matrix_file(matrix_path);
      auto settings = cfg.cluster;
      settings.seed = cfg.seed;
      const auto co = run_clustering(mf, settings);
      const auto path = out_path(out, cfg.out_dir, "clusters.csv");
      write_output(path, clusters_csv(mf.record_ids, co.clustering.labels));
      write_output(fs::path(path).replace_extension(".json").string(), to_json_text(cluster_sidecar(co), 2) + "\n");
      log("cluster: " + std::to_string(co.clustering.num_clusters()) + " clusters -> " + path);
    } else if (*eva) {
      const auto mf = load_matrix_file(matrix_path);
      const auto docs = load_jsonl(processed_path);
      const auto sidecar_path = fs::path(clusters_path).replace_extension(".json").string();
      Json sidecar;
      try {
        sidecar = Json::parse(detail::read_file(sidecar_path));
      } catch (const Json::exception& e) {
        throw Error(sidecar_path + ": " + e.what());
      }
      const auto co = cluster_output_from_files(detail::read_file(clusters_path), clusters_path, sidecar, mf);
      std::optional<std::vector<int>> gold;
      if (cfg.gold) gold = load_gold_labels(*cfg.gold, mf.record_ids);
      auto settings = cfg.evaluation;
      settings.threads = cfg.threads;
      write_output(out, to_json_text(to_json(evaluate_clustering(mf, docs, co, settings, gold)), 2) + "\n");
    } else if (*pip) {
      run_pipeline(cfg, log);
    } else if (*self) {
      const auto dir = out_dir_opt->count() ? out_dir : (fs::temp_directory_path() / "logmaint-selftest").string();
      const auto r = selftest(data_dir, dir, cfg.threads, log);
      for (const auto& line : r.lines) std::cout << line << '\n';
      std::cout << (r.passed ? "selftest PASS" : "selftest FAIL") << '\n';
      return r.passed ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "logmaint: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
