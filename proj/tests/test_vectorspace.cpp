#include <gtest/gtest.h>

#include "logmaint/vectorspace.hpp"
#include "test_support.hpp"

using namespace logmaint;

namespace {

ProcessedDocument doc(const std::string& id, const std::vector<std::string>& terms) {
  ProcessedDocument d;
  d.record_id = id;
  for (const auto& t : terms) d.tokens.push_back({t, t, CorrectionSource::unchanged, Pos::noun, t, t});
  d.empty = terms.empty();
  return d;
}

TfidfOptions min_df(std::size_t m) {
  TfidfOptions o;
  o.min_df = m;
  return o;
}

double weight(const TfidfResult& r, Eigen::Index row, const std::string& term) {
  const auto it = r.vocabulary.index.find(term);
  if (it == r.vocabulary.index.end()) return 0.0;
  return r.matrix.weights.coeff(row, static_cast<Eigen::Index>(it->second));
}

Eigen::MatrixXd random_low_rank(std::mt19937_64& rng, int m, int n, int r) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(m, r), b(r, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = g(rng);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = g(rng);
  return a * b;
}

SparseRowMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

}  // namespace

TEST(Tfidf, SharedTermVanishes) {
  const auto r = build_tfidf({doc("1", {"a", "b"}), doc("2", {"a", "c"})}, min_df(1));
  EXPECT_EQ(r.vocabulary.terms, (std::vector<std::string>{"b", "c"}));
  EXPECT_DOUBLE_EQ(weight(r, 0, "b"), 1.0);
  EXPECT_DOUBLE_EQ(weight(r, 1, "c"), 1.0);
  EXPECT_DOUBLE_EQ(weight(r, 0, "a"), 0.0);
}

TEST(Tfidf, SingleDocumentHasNoWeights) {
  try {
    build_tfidf({doc("1", {"seal", "leak"})}, min_df(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("all weights zero"), std::string::npos);
  }
}

TEST(Tfidf, RawCountsTimesLog2Idf) {
  const auto r = build_tfidf({doc("1", {"b", "b", "c"}), doc("2", {"c", "d"})}, min_df(1));
  EXPECT_EQ(r.vocabulary.terms, (std::vector<std::string>{"b", "d"}));
  // Unnormalized: b = 2 * log2(2) = 2 in row 1, d = 1 in row 2; each row has one term, so both normalize to 1.
  EXPECT_DOUBLE_EQ(weight(r, 0, "b"), 1.0);
  EXPECT_DOUBLE_EQ(weight(r, 1, "d"), 1.0);
  EXPECT_EQ(r.counts.coeff(0, 0), 2.0);
}

TEST(Tfidf, MixedRowNormalization) {
  // N=3: df(x)=1, df(y)=2.  Row 1 raw weights x = 2*log2(3), y = log2(3/2).
  const auto r = build_tfidf({doc("1", {"x", "x", "y"}), doc("2", {"y", "z"}), doc("3", {"z", "w"})}, min_df(1));
  const double wx = 2 * std::log2(3.0), wy = std::log2(1.5), n = std::hypot(wx, wy);
  EXPECT_NEAR(weight(r, 0, "x"), wx / n, 1e-15);
  EXPECT_NEAR(weight(r, 0, "y"), wy / n, 1e-15);
}

TEST(Tfidf, MinDfPrunesRareTerms) {
  const auto r = build_tfidf({doc("1", {"a", "b"}), doc("2", {"b", "c"}), doc("3", {"c", "d"})}, min_df(2));
  EXPECT_EQ(r.vocabulary.terms, (std::vector<std::string>{"b", "c"}));
  for (auto df : r.vocabulary.document_frequency) EXPECT_EQ(df, 2u);
}

TEST(Tfidf, AllDocumentsEmptyIsAnError) {
  EXPECT_THROW(build_tfidf({doc("1", {}), doc("2", {})}, min_df(1)), Error);
  EXPECT_THROW(build_tfidf({}, min_df(1)), Error);
}

TEST(Tfidf, SublinearScaling) {
  TfidfOptions o = min_df(1);
  o.sublinear_tf = true;
  const auto r = build_tfidf({doc("1", {"x", "x", "x", "x", "y"}), doc("2", {"z"})}, o);
  const double wx = 1 + std::log2(4.0), wy = 1.0, n = std::hypot(wx, wy);
  EXPECT_NEAR(weight(r, 0, "x"), wx / n, 1e-15);
}

TEST(Tfidf, RowNormsAndPermutationEquivariance) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ProcessedDocument> docs;
    for (int d = 0; d < 12; ++d) {
      std::vector<std::string> terms;
      const int n = static_cast<int>(rng() % 8);
      for (int t = 0; t < n; ++t) terms.push_back(std::string(1, static_cast<char>('a' + rng() % 9)));
      docs.push_back(doc(std::to_string(d), terms));
    }
    TfidfResult r;
    try {
      r = build_tfidf(docs, min_df(2));
    } catch (const Error&) {
      continue;
    }
    for (Eigen::Index i = 0; i < r.matrix.rows(); ++i) {
      const double norm = r.matrix.weights.row(i).norm();
      EXPECT_TRUE(norm == 0.0 || std::abs(norm - 1.0) < 1e-9);
    }
    std::vector<std::size_t> perm(docs.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ProcessedDocument> shuffled;
    for (auto p : perm) shuffled.push_back(docs[p]);
    const auto s = build_tfidf(shuffled, min_df(2));
    ASSERT_EQ(s.vocabulary.size(), r.vocabulary.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
      for (const auto& term : r.vocabulary.terms)
        EXPECT_NEAR(weight(s, static_cast<Eigen::Index>(i), term), weight(r, static_cast<Eigen::Index>(perm[i]), term),
                    1e-15);
  }
}

TEST(Lsa, RankOneIsRecoveredExactly) {
  Eigen::VectorXd u(4), v(5);
  u << 1, 2, 0, -1;
  v << 0.5, 0, 1, 2, 3;
  const Eigen::MatrixXd a = u * v.transpose();
  for (auto method : {SvdMethod::dense, SvdMethod::iterative}) {
    LsaOptions o;
    o.method = method;
    const auto r = lsa_reduce(sparse(a), 1, 42, o);
    EXPECT_LT((r.reconstruct() - a).norm(), 1e-9);
  }
}

TEST(Lsa, DiagonalMatrix) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a.diagonal() << 1, 3, 2;
  for (auto method : {SvdMethod::dense, SvdMethod::iterative}) {
    LsaOptions o;
    o.method = method;
    const auto r = lsa_reduce(sparse(a), 2, 42, o);
    EXPECT_NEAR(r.singular_values(0), 3.0, 1e-12);
    EXPECT_NEAR(r.singular_values(1), 2.0, 1e-12);
  }
}

TEST(Lsa, FullRankReconstructs) {
  std::mt19937_64 rng(8);
  const auto a = random_low_rank(rng, 7, 5, 5);
  for (auto method : {SvdMethod::dense, SvdMethod::iterative}) {
    LsaOptions o;
    o.method = method;
    EXPECT_LT((lsa_reduce(sparse(a), 5, 42, o).reconstruct() - a).norm(), 1e-8);
  }
}

TEST(Lsa, SingularValuesMatchJacobiOracle) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 6 + static_cast<int>(rng() % 10), n = 4 + static_cast<int>(rng() % 10);
    Eigen::MatrixXd a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = u(rng) < 0.5 ? 0.0 : u(rng);
    const auto want = oracle::singular_values(a);
    const int k = std::min(m, n) / 2 + 1;
    for (auto method : {SvdMethod::dense, SvdMethod::iterative}) {
      LsaOptions o;
      o.method = method;
      const auto r = lsa_reduce(sparse(a), k, 42, o);
      for (int i = 0; i < k; ++i) EXPECT_NEAR(r.singular_values(i), want[static_cast<std::size_t>(i)], 1e-6);
      for (int i = 1; i < k; ++i) EXPECT_LE(r.singular_values(i), r.singular_values(i - 1));
    }
  }
}

TEST(Lsa, IterativeAgreesWithDense) {
  std::mt19937_64 rng(12);
  const auto a = random_low_rank(rng, 40, 30, 12);
  LsaOptions dense, iter;
  dense.method = SvdMethod::dense;
  iter.method = SvdMethod::iterative;
  const auto d = lsa_reduce(sparse(a), 8, 42, dense);
  const auto i = lsa_reduce(sparse(a), 8, 42, iter);
  EXPECT_LT((d.singular_values - i.singular_values).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((d.reconstruct() - i.reconstruct()).norm(), 1e-6);
  EXPECT_LT((d.embedding - i.embedding).cwiseAbs().maxCoeff(), 1e-6);  // signs are canonical
  EXPECT_GT(i.iterations, 0u);
}

TEST(Lsa, EckartYoungMonotone) {
  std::mt19937_64 rng(14);
  const auto a = random_low_rank(rng, 20, 15, 10);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 10; ++k) {
    const double err = (lsa_reduce(sparse(a), k).reconstruct() - a).norm();
    EXPECT_LE(err, prev + 1e-12);
    prev = err;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(Lsa, DeterministicAndRangeChecked) {
  std::mt19937_64 rng(16);
  const auto a = sparse(random_low_rank(rng, 10, 8, 4));
  LsaOptions iter;
  iter.method = SvdMethod::iterative;
  const auto x = lsa_reduce(a, 3, 5, iter), y = lsa_reduce(a, 3, 5, iter);
  EXPECT_EQ(x.embedding, y.embedding);
  EXPECT_EQ(x.components, y.components);
  EXPECT_THROW(lsa_reduce(a, 0), Error);
  EXPECT_THROW(lsa_reduce(a, 9), Error);
}

TEST(MatrixFile, JsonRoundTrip) {
  const auto r = build_tfidf({doc("1", {"b", "b", "c"}), doc("2", {"c", "d"}), doc("3", {"b", "e"})}, min_df(1));
  MatrixFile mf;
  mf.record_ids = r.matrix.record_ids;
  mf.vocabulary = r.vocabulary;
  mf.tfidf = r.matrix.weights;
  mf.counts = r.counts;
  mf.tfidf_options = min_df(1);
  mf.lsa = lsa_reduce(mf.tfidf, 2);
  const auto text = to_json_text(to_json(mf));
  const auto back = matrix_file_from_json(Json::parse(text));
  EXPECT_EQ(to_json_text(to_json(back)), text);
  EXPECT_EQ(back.vocabulary.terms, mf.vocabulary.terms);
  EXPECT_TRUE(back.tfidf.isApprox(mf.tfidf));
  EXPECT_EQ(back.lsa->embedding, mf.lsa->embedding);
}
