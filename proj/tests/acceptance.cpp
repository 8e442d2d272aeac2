// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "logmaint/logmaint.hpp"
#include "test_support.hpp"

using namespace logmaint;
namespace fs = std::filesystem;

namespace {

const std::string kData = LOGMAINT_DATA_DIR;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Plain two-row edit distance for filtering generated perturbations.
std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string perturb(std::string w, std::mt19937_64& rng) {
  const char c = static_cast<char>('a' + rng() % 26);
  const auto pos = rng() % (w.size() + 1);
  switch (rng() % 4) {
    case 0: w.insert(pos, 1, c); break;
    case 1: if (pos < w.size()) w.erase(pos, 1); else w.pop_back(); break;
    case 2: if (pos < w.size()) w[pos] = c; else w.back() = c; break;
    default:
      if (w.size() >= 2) {
        const auto p = std::min<std::size_t>(pos, w.size() - 2);
        std::swap(w[p], w[p + 1]);
      } else {
        w.push_back(c);
      }
  }
  return w;
}

// Perturbations whose unique nearest dictionary word is the source and that sit
// exactly `edits` away from it.
std::vector<EvalPair> perturbations(const std::vector<std::string>& words, std::size_t edits, std::size_t count,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EvalPair> out;
  std::set<std::string> seen;
  while (out.size() < count) {
    const auto& w = words[rng() % words.size()];
    std::string p = w;
    for (std::size_t e = 0; e < edits; ++e) p = perturb(p, rng);
    if (p.size() < 3 || !seen.insert(p).second) continue;
    if (edit_distance(p, w) != edits) continue;
    std::size_t best = SIZE_MAX, ties = 0;
    for (const auto& x : words) {
      const auto d = edit_distance(p, x);
      if (d < best) best = d, ties = 1;
      else if (d == best) ++ties;
    }
    if (best != edits || ties != 1) continue;
    out.push_back({p, w, std::nullopt});
  }
  return out;
}

Check spell_correction_recovery() {
  Check c;
  const auto lex = load_lexicon(kData + "/resources/lexicon.tsv");
  std::vector<std::string> words;
  for (const auto& [token, entry] : lex.entries) {
    if (token.size() < 4 || !std::all_of(token.begin(), token.end(), [](char ch) { return ch >= 'a' && ch <= 'z'; }))
      continue;
    words.push_back(token);
    if (words.size() == 500) break;
  }
  c.require(words.size() == 500, "lexicon yields only " + std::to_string(words.size()) + " words");
  DomainDictionary dict;
  for (const auto& w : words) dict.add(w);
  const auto one = perturbations(words, 1, 200, 101);
  const auto two = perturbations(words, 2, 200, 202);
  const auto corrector = [&](std::string_view t) { return correct_token(t, dict, 2).replacement; };
  const auto t0 = std::chrono::steady_clock::now();
  const auto e1 = evaluate_corrector(one, corrector);
  const auto e2 = evaluate_corrector(two, corrector);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(e1.total_nonstandard == 200 && e1.success_rate == 1.0,
            "one-edit success " + std::to_string(e1.success_rate));
  c.require(e2.success_rate >= 0.97, "two-edit success " + std::to_string(e2.success_rate));
  c.require(secs < 5.0, "runtime " + std::to_string(secs) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "one-edit %.2f, two-edit %.2f, %.3f s", e1.success_rate, e2.success_rate, secs);
  if (c.ok) c.detail = buf;
  return c;
}

Check string_metric_oracles() {
  Check c;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000 && c.ok; ++i) {
    const auto a = gen::random_string(rng, 8, "abcdef"), b = gen::random_string(rng, 8, "abcdef");
    c.require(levenshtein(a, b) == oracle::levenshtein(a, b), "levenshtein " + a + "/" + b);
    c.require(std::abs(jaro(a, b) - oracle::jaro(a, b)) <= 1e-12, "jaro " + a + "/" + b);
    const auto dim = static_cast<Eigen::Index>(1 + rng() % 6);
    Eigen::VectorXd x(dim), y(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      x(k) = u(rng) < 0.3 ? 0.0 : u(rng);
      y(k) = u(rng) < 0.3 ? 0.0 : u(rng);
    }
    const std::vector<double> xs(x.data(), x.data() + dim), ys(y.data(), y.data() + dim);
    c.require(std::abs(cosine(x, y) - oracle::cosine(xs, ys)) <= 1e-12, "cosine");
  }
  if (c.ok) c.detail = "10000 random inputs per metric";
  return c;
}

Check tfidf_lsa_properties() {
  Check c;
  std::mt19937_64 rng(33);
  std::vector<ProcessedDocument> docs;
  for (int d = 0; d < 60; ++d) {
    ProcessedDocument doc;
    doc.record_id = std::to_string(d);
    const int n = static_cast<int>(rng() % 12);
    for (int t = 0; t < n; ++t) {
      const std::string w(1, static_cast<char>('a' + rng() % 20));
      doc.tokens.push_back({w, w, CorrectionSource::unchanged, Pos::noun, w, w});
    }
    doc.empty = n == 0;
    docs.push_back(std::move(doc));
  }
  const auto tf = build_tfidf(docs);
  for (Eigen::Index r = 0; r < tf.matrix.rows(); ++r) {
    const double norm = tf.matrix.weights.row(r).norm();
    c.require(norm == 0.0 || std::abs(norm - 1.0) <= 1e-9, "row " + std::to_string(r) + " norm");
  }
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20 && c.ok; ++trial) {
    const int r = 1 + static_cast<int>(rng() % 20);
    const int k = r + static_cast<int>(rng() % (21 - r));
    const int m = 25 + static_cast<int>(rng() % 15), n = 22 + static_cast<int>(rng() % 15);
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(m, r, [&] { return g(rng); }) *
                        Eigen::MatrixXd::NullaryExpr(r, n, [&] { return g(rng); });
    const SparseRowMatrix sa = a.sparseView();
    for (auto method : {SvdMethod::dense, SvdMethod::iterative}) {
      LsaOptions o;
      o.method = method;
      const double err = (lsa_reduce(sa, k, 42, o).reconstruct() - a).norm();
      c.require(err <= 1e-6, "rank " + std::to_string(r) + " k " + std::to_string(k) + " error " + std::to_string(err));
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(30, 25, [&] { return g(rng); });
  const SparseRowMatrix sa = a.sparseView();
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 10; ++k) {
    const double err = (lsa_reduce(sa, k).reconstruct() - a).norm();
    c.require(err <= prev + 1e-12, "Eckart-Young at k=" + std::to_string(k));
    prev = err;
  }
  if (c.ok) c.detail = "unit rows, rank-r reconstruction, monotone error k=1..10";
  return c;
}

Check clustering_correctness() {
  Check c;
  const std::vector<std::vector<double>> centres{{0, 0}, {10, 0}, {5, 9}};
  const double sigma = 0.5;  // 20 sigma apart
  const auto [x, truth] = gen::blobs(centres, 20, sigma, 77);
  for (int run = 0; run < 5; ++run) {
    const auto km = kmeans(x, 3, 42);
    c.require(compare_to_gold(km.labels, truth).purity == 1.0, "kmeans purity");
    const auto sel = select_k(x, 2, 6, 42);
    c.require(sel.chosen_k == 3, "select_k chose " + std::to_string(sel.chosen_k));
    const auto db = dbscan(x, 2.5, 3);
    c.require(std::count(db.labels.begin(), db.labels.end(), kNoiseLabel) == 0, "dbscan noise");
    c.require(compare_to_gold(db.labels, truth).adjusted_rand_index == 1.0, "dbscan partition");
    const auto hc = hierarchical(x, HierarchicalCut::threshold(5.0)).second;
    c.require(hc.num_clusters() == 3 && compare_to_gold(hc.labels, truth).adjusted_rand_index == 1.0,
              "hierarchical threshold cut");
    static std::vector<int> first_km, first_db, first_hc;
    if (run == 0) {
      first_km = km.labels, first_db = db.labels, first_hc = hc.labels;
    } else {
      c.require(km.labels == first_km && db.labels == first_db && hc.labels == first_hc, "repeat run differs");
    }
  }
  if (c.ok) c.detail = "kmeans, select_k, dbscan and hierarchical recover 3 blobs over 5 runs";
  return c;
}

Check lda_behaviour() {
  Check c;
  std::mt19937_64 rng(55);
  std::vector<Eigen::Triplet<double>> trip;
  for (int d = 0; d < 40; ++d) {
    const int base = d < 20 ? 0 : 10;
    for (int t = 0; t < 25; ++t) trip.emplace_back(d, base + static_cast<int>(rng() % 10), 1.0);
  }
  SparseRowMatrix counts(40, 20);
  counts.setFromTriplets(trip.begin(), trip.end());
  const auto m = lda(counts, 2, 0.1, 0.01, 200, 42);
  c.require(m.perplexity_trace.size() == 200, "trace length");
  c.require(m.perplexity_trace.back() < m.perplexity_trace.front(), "perplexity did not drop");
  for (Eigen::Index t = 0; t < 2; ++t) {
    const double low = m.topic_word.row(t).head(10).sum();
    c.require(std::max(low, 1.0 - low) >= 0.9, "topic " + std::to_string(t) + " mass " + std::to_string(low));
    c.require(std::abs(m.topic_word.row(t).sum() - 1.0) <= 1e-9, "topic row sum");
  }
  for (Eigen::Index d = 0; d < m.doc_topic.rows(); ++d)
    c.require(std::abs(m.doc_topic.row(d).sum() - 1.0) <= 1e-9, "doc row sum");
  char buf[120];
  std::snprintf(buf, sizeof buf, "perplexity %.4f -> %.4f", m.perplexity_trace.front(), m.perplexity_trace.back());
  if (c.ok) c.detail = buf;
  return c;
}

Check evaluation_metrics() {
  Check c;
  PointMatrix p(4, 2);
  p << 0, 0, 0, 1, 10, 0, 10, 1;
  const double s = silhouette(p, {0, 0, 1, 1}).mean;
  c.require(std::abs(s - 0.900) <= 0.001, "silhouette " + std::to_string(s));
  const auto same = compare_to_gold({2, 2, 0, 1, 1}, {0, 0, 1, 2, 2});
  c.require(same.purity == 1.0 && same.adjusted_rand_index == 1.0, "identical partitions");
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25 && c.ok; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng() % 49);
    Eigen::MatrixXd m(n, 5);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < 5; ++k) rows[static_cast<std::size_t>(i)].push_back(m(i, k) = u(rng) < 0.5 ? 0.0 : u(rng));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(rng() % 4);
    const SparseRowMatrix sm = m.sparseView();
    const auto got = cluster_similarity_report({{}, &sm}, labels, SimilarityMetric::cosine);
    const auto [ls, intra, inter] = oracle::similarity_report(
        labels, [&](std::size_t i, std::size_t j) { return oracle::cosine(rows[i], rows[j]); });
    c.require(got.labels == ls, "report labels");
    for (std::size_t a = 0; a < ls.size(); ++a)
      for (std::size_t b = 0; b < ls.size(); ++b)
        c.require(std::abs(got.inter(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) - inter[a][b]) <= 1e-12,
                  "report cell");
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "silhouette %.6f", s);
  if (c.ok) c.detail = buf;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + LOGMAINT_CLI + "\" " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Check end_to_end_determinism() {
  Check c;
  const auto dir = fs::temp_directory_path() / "logmaint-acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string conf = kData + "/fixture/pipeline.conf";
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* threads : {"1", "1", "4"}) {
    const int rc = run_cli("--quiet --config \"" + conf + "\" --threads " + threads + " --out-dir \"" + dir.string() +
                           "\" pipeline");
    c.require(rc == 0, "pipeline exit " + std::to_string(rc));
    std::map<std::string, std::string> files;
    for (const auto& name : artifact_names()) files[name] = slurp(dir / name);
    runs.push_back(std::move(files));
  }
  c.require(runs[0] == runs[1], "two runs differ");
  c.require(runs[0] == runs[2], "threads 1 vs 4 differ");

  // Fixture token counts, recomputed from the raw CSV and the processed output.
  const auto corpus = load_corpus(kData + "/fixture/logbook_sample.csv");
  std::size_t raw = 0;
  for (const auto& r : corpus.records) {
    std::istringstream in(r.text(TextField::both));
    for (std::string w; in >> w;) ++raw;
  }
  std::size_t kept = 0;
  for (const auto& d : parse_jsonl(runs[0]["processed.jsonl"], "processed.jsonl")) kept += d.tokens.size();
  c.require(corpus.size() == 4 && raw == 71 && kept == 65,
            "token counts raw " + std::to_string(raw) + " kept " + std::to_string(kept));

  const int self = run_cli("--quiet --out-dir \"" + (dir / "selftest").string() + "\" selftest");
  c.require(self == 0, "selftest exit " + std::to_string(self));
  if (c.ok) c.detail = "3 runs byte-identical, 4 records, 71 raw / 65 kept tokens, selftest ok";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Check (*)()>> criteria{
      {"spell-correction recovery", spell_correction_recovery},
      {"string-metric oracle equivalence", string_metric_oracles},
      {"tf-idf / lsa properties", tfidf_lsa_properties},
      {"clustering on separated blobs", clustering_correctness},
      {"lda behaviour", lda_behaviour},
      {"evaluation metrics", evaluation_metrics},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    failed += !c.ok;
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << c.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
